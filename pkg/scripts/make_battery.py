"""Write the default battery of a signature to a JSON file.

    python3 scripts/make_battery.py sigs/modal.json modal-battery.json --seed 1
"""
import argparse

from dlecorr.semantics import BatteryConfig, default_battery, save_battery
from dlecorr.signature import full, load_signature


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("signature")
    ap.add_argument("out")
    ap.add_argument("--max-points", type=int, default=3)
    ap.add_argument("--per-poset", type=int, default=6)
    ap.add_argument("--four-point", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    sig = full(load_signature(a.signature))
    cfg = BatteryConfig(a.max_points, a.per_poset, a.four_point, a.seed)
    battery = default_battery(sig, cfg)
    save_battery(a.out, battery)
    print(f"{len(battery)} algebras -> {a.out}")


if __name__ == "__main__":
    main()

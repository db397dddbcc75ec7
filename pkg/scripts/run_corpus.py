"""Generate a random corpus and check every ALBA step and round trip on the battery."""
import argparse
import time

from dlecorr.corpus import CorpusConfig, alba_step_failures, generate_corpus, round_trip_failures
from dlecorr.semantics import default_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--signatures", type=int, default=3)
    ap.add_argument("--per-signature", type=int, default=70)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", action="store_true", help="print every inequality")
    a = ap.parse_args()
    t0 = time.perf_counter()
    corpus = generate_corpus(CorpusConfig(a.signatures, a.per_signature, a.depth, seed=a.seed))
    batteries = {id(s): default_battery(s) for s in corpus.sigs}
    for k, s in enumerate(corpus.sigs):
        conns = ", ".join(f"{c.name}:{c.family}{c.order_type}" for c in s.user())
        print(f"signature {k}: {conns}")
    failures = 0
    for it in corpus.items:
        b = batteries[id(it.sig)]
        bad = alba_step_failures(it, b) + round_trip_failures(it, b)
        failures += len(bad)
        if a.show or bad:
            print(f"  [{it.cls}] {it.show()}" + (f"  FAIL {bad[0]}" if bad else ""))
    print(f"{len(corpus.items)} inequalities, {failures} failures, "
          f"{corpus.rejected} rejected, {time.perf_counter() - t0:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())

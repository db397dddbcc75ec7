"""Brute-force finite perfect DLE oracle.

Every finite distributive lattice is the lattice of downsets of the poset of
its join-irreducibles, so algebras are built from small posets. Operators are
extended from seeds on irreducible tuples by the normality equations, and
residuals are computed from the tables.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

import numpy as np

from .signature import POS, Signature
from .syntax import (ATOMS, Bot, Conominal, Formula, Inequality, Nominal, Top,
                     atoms, head, kids, left_interpret, right_interpret)


@dataclass(frozen=True)
class Poset:
    n: int
    less: frozenset = frozenset()  # strict pairs (a, b) with a < b

    def leq(self, a, b):
        return a == b or (a, b) in self.less


def _close(n, pairs):
    rel = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return frozenset(rel)


def posets(n: int):
    """All posets on n points up to isomorphism, in a fixed order."""
    cand = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen, out = set(), []
    for bits in range(1 << len(cand)):
        rel = frozenset(p for k, p in enumerate(cand) if bits >> k & 1)
        if _close(n, rel) != rel:
            continue
        key = min(tuple(sorted((perm[a], perm[b]) for a, b in rel))
                  for perm in itertools.permutations(range(n)))
        if key in seen:
            continue
        seen.add(key)
        out.append(Poset(n, rel))
    return out


class FiniteDLE:
    """Downset lattice of a poset with operation tables.

    Elements are indices into `self.masks`; each mask is a bitset of points.
    """

    def __init__(self, poset: Poset, sig: Signature, tables: dict | None = None, label: str = ""):
        self.poset = poset
        self.sig = sig
        self.label = label
        n = poset.n
        masks = []
        for m in range(1 << n):
            ok = all(not (m >> b & 1) or (m >> a & 1) for (a, b) in poset.less)
            if ok:
                masks.append(m)
        masks.sort(key=lambda m: (bin(m).count("1"), m))
        self.masks = masks
        self.index = {m: i for i, m in enumerate(masks)}
        N = self.N = len(masks)
        arr = np.array(masks)
        self.leq = (arr[:, None] & ~arr[None, :]) == 0
        self.meet_t = np.vectorize(lambda a, b: self.index[masks[a] & masks[b]])(*np.indices((N, N)))
        self.join_t = np.vectorize(lambda a, b: self.index[masks[a] | masks[b]])(*np.indices((N, N)))
        self.bot = 0
        self.top = self.index[(1 << n) - 1]
        down = [sum(1 << a for a in range(n) if poset.leq(a, x)) for x in range(n)]
        up = [sum(1 << b for b in range(n) if poset.leq(x, b)) for x in range(n)]
        self.jirr = [self.index[down[x]] for x in range(n)]
        self.mirr = [self.index[((1 << n) - 1) & ~up[x]] for x in range(n)]
        self.tables = {"meet": self.meet_t, "join": self.join_t,
                       "top": np.array(self.top), "bot": np.array(self.bot)}
        for k, v in (tables or {}).items():
            self.tables[k] = v

    # lattice helpers -----------------------------------------------------
    def join_all(self, xs):
        out = self.bot
        for x in xs:
            out = self.join_t[out, x]
        return int(out)

    def meet_all(self, xs):
        out = self.top
        for x in xs:
            out = self.meet_t[out, x]
        return int(out)

    def show_elem(self, e):
        m = self.masks[int(e)]
        return "{" + ",".join(str(a) for a in range(self.poset.n) if m >> a & 1) + "}"

    # operations ----------------------------------------------------------
    def table(self, name: str):
        t = self.tables.get(name)
        if t is not None:
            return t
        c = self.sig[name]
        if c.origin == "primitive":
            raise KeyError(f"no interpretation for {name}")
        parent = self.table(c.parent)
        pc = self.sig[c.parent]
        t = self._residual_table(parent, pc.family, pc.order_type[c.coord], c.coord, pc.arity)
        self.tables[name] = t
        return t

    def _residual_table(self, parent, family, pol, i, arity):
        N = self.N
        out = np.zeros((N,) * arity, dtype=np.int64)
        for idx in itertools.product(range(N), repeat=arity):
            b = idx[i]
            good = []
            for x in range(N):
                args = idx[:i] + (x,) + idx[i + 1:]
                v = parent[args]
                if family == "F":
                    if self.leq[v, b]:
                        good.append(x)
                else:
                    if self.leq[b, v]:
                        good.append(x)
            # F, pol 1: largest x; F, pol d: least x; G, pol 1: least x; G, pol d: largest
            largest = (family == "F") == (pol == POS)
            out[idx] = self.join_all(good) if largest else self.meet_all(good)
        return out

    def audit(self, name: str) -> bool:
        """Check normality of a table: joins/meets preserved or reversed per coordinate."""
        c = self.sig[name]
        t = self.table(name)
        N = self.N
        F = c.family == "F"
        for i, pol in enumerate(c.order_type):
            for idx in itertools.product(range(N), repeat=c.arity):
                # unit: F sends bot (pol 1) / top (pol d) to bot
                unit = self.bot if (pol == POS) == F else self.top
                if idx[i] == unit and t[idx] != (self.bot if F else self.top):
                    return False
                for y in range(N):
                    a, b = idx[i], y
                    comb = self.join_t[a, b] if (pol == POS) == F else self.meet_t[a, b]
                    j1 = t[idx]
                    j2 = t[idx[:i] + (y,) + idx[i + 1:]]
                    lhs = t[idx[:i] + (comb,) + idx[i + 1:]]
                    rhs = self.join_t[j1, j2] if F else self.meet_t[j1, j2]
                    if lhs != rhs:
                        return False
        return True

    # evaluation ----------------------------------------------------------
    def domain(self, atom):
        if isinstance(atom, Nominal):
            return np.array(self.jirr)
        if isinstance(atom, Conominal):
            return np.array(self.mirr)
        return np.arange(self.N)

    def env(self, atom_list):
        """Broadcastable arrays enumerating all assignments of the atoms."""
        k = len(atom_list)
        env = {}
        for pos, a in enumerate(atom_list):
            shape = [1] * k
            dom = self.domain(a)
            shape[pos] = len(dom)
            env[a] = dom.reshape(shape)
        return env

    def eval(self, f: Formula, env):
        if isinstance(f, ATOMS):
            return env[f]
        if isinstance(f, Top):
            return np.array(self.top)
        if isinstance(f, Bot):
            return np.array(self.bot)
        t = self.table(head(f))
        vals = [self.eval(k, env) for k in kids(f)]
        return t[tuple(vals)]

    def _holds(self, ineq, env):
        return self.leq[self.eval(ineq.lhs, env), self.eval(ineq.rhs, env)]

    def counter(self, atom_list, mask):
        bad = np.argwhere(~mask)
        if len(bad) == 0:
            return None
        pos = bad[0]
        out = {}
        for k, a in enumerate(atom_list):
            i = pos[k] if mask.ndim > k and mask.shape[k] > 1 else 0
            out[a] = self.show_elem(self.domain(a)[i])
        return out

    def valid_inequality(self, ineq: Inequality, with_counter=False):
        al = _atom_list([ineq])
        env = self.env(al)
        ok = np.broadcast_to(self._holds(ineq, env), tuple(len(self.domain(a)) for a in al))
        res = bool(ok.all())
        if with_counter:
            return res, (None if res else self.counter(al, ok))
        return res

    def valid_quasi(self, antecedents, conclusion: Inequality) -> bool:
        al = _atom_list(list(antecedents) + [conclusion])
        if any(len(self.domain(a)) == 0 for a in al):
            return True
        env = self.env(al)
        shape = tuple(len(self.domain(a)) for a in al)
        mask = np.ones(shape, dtype=bool)
        for a in antecedents:
            mask &= self._holds(a, env)
        ok = ~mask | self._holds(conclusion, env)
        return bool(np.broadcast_to(ok, shape).all())

    def valid_rule(self, rule) -> bool:
        sig = self.sig
        prem = [Inequality(left_interpret(s.antecedent, sig), right_interpret(s.succedent, sig))
                for s in rule.premises]
        concl = Inequality(left_interpret(rule.conclusion.antecedent, sig),
                           right_interpret(rule.conclusion.succedent, sig))
        return self.valid_quasi(prem, concl)


def _atom_list(ineqs):
    seen = []
    for q in ineqs:
        for a in atoms(q.lhs) + atoms(q.rhs):
            if a not in seen:
                seen.append(a)
    return seen


def _generators(alg: FiniteDLE, pol, family):
    # F: join-irreducibles in pol-1 coordinates, meet-irreducibles in pol-d ones
    use_j = (pol == POS) == (family == "F")
    return alg.jirr if use_j else alg.mirr


def build_algebra(poset: Poset, sig: Signature, seeds: dict, strict: bool = False, label: str = "") -> FiniteDLE:
    """Extend operator seeds to full tables.

    `seeds[name]` maps a tuple of poset points (one per coordinate) to an
    element index; points stand for the irreducible generator of the
    coordinate's kind. Missing entries default to bot (F) or top (G).
    """
    alg = FiniteDLE(poset, sig, label=label)
    for c in sig.user():
        seed = seeds.get(c.name, {})
        F = c.family == "F"
        gens = [_generators(alg, pol, c.family) for pol in c.order_type]
        vals = {}
        for pts in itertools.product(range(poset.n), repeat=c.arity):
            vals[tuple(g[p] for g, p in zip(gens, pts))] = seed.get(pts, alg.bot if F else alg.top)
        N = alg.N
        t = np.zeros((N,) * c.arity, dtype=np.int64)
        for idx in itertools.product(range(N), repeat=c.arity):
            picked = []
            for gt, v in vals.items():
                ok = True
                for pol, g, a in zip(c.order_type, gt, idx):
                    # F: generator below the argument (pol 1) or above it (pol d); G dually
                    below = (pol == POS) == F
                    if below and not alg.leq[g, a]:
                        ok = False
                        break
                    if not below and not alg.leq[a, g]:
                        ok = False
                        break
                if ok:
                    picked.append(v)
            t[idx] = alg.join_all(picked) if F else alg.meet_all(picked)
        if strict:
            for gt, v in vals.items():
                if t[gt] != v:
                    raise ValueError(f"seed for {c.name} is not normal at {gt}")
        alg.tables[c.name] = t
    alg.seeds = {k: dict(v) for k, v in seeds.items()}
    return alg


@dataclass
class BatteryConfig:
    max_points: int = 3
    per_poset: int = 6
    four_point_posets: int = 3
    seed: int = 0


def default_battery(sig: Signature, config: BatteryConfig | None = None):
    """A deterministic battery of finite perfect DLEs for a signature.

    Seeds are enumerated exhaustively when the seed space of a poset is at
    most `per_poset`, and sampled with a fixed seed otherwise. A few 4-point
    posets are added with sampled seeds.
    """
    cfg = config or BatteryConfig()
    rng = random.Random(cfg.seed)
    out = []
    plist = [p for n in range(1, cfg.max_points + 1) for p in posets(n)]
    if cfg.four_point_posets:
        p4 = posets(4)
        plist += [p4[k] for k in sorted(rng.sample(range(len(p4)), min(cfg.four_point_posets, len(p4))))]
    users = sig.user()
    for pi, P in enumerate(plist):
        N = FiniteDLE(P, sig).N
        slots = [(c.name, pts) for c in users for pts in itertools.product(range(P.n), repeat=c.arity)]
        total = N ** len(slots)
        if total <= cfg.per_poset:
            choices = itertools.product(range(N), repeat=len(slots))
        else:
            choices = [tuple(rng.randrange(N) for _ in slots) for _ in range(cfg.per_poset)]
        for k, vals in enumerate(choices):
            seeds = {}
            for (name, pts), v in zip(slots, vals):
                seeds.setdefault(name, {})[pts] = v
            out.append(build_algebra(P, sig, seeds, label=f"P{pi}.{k}"))
    return out


@dataclass
class BatteryReport:
    agree: list = field(default_factory=list)
    disagree: list = field(default_factory=list)
    note: str = "oracle agreement is a necessary condition, not a proof"

    @property
    def ok(self):
        return not self.disagree


def equivalence_battery(ineq: Inequality, rules, battery) -> BatteryReport:
    rep = BatteryReport()
    for alg in battery:
        a = alg.valid_inequality(ineq)
        b = all(alg.valid_rule(r) for r in rules)
        (rep.agree if a == b else rep.disagree).append((alg.label, a, b))
    return rep


def equivalent_on(battery, lhs_check, rhs_check) -> list:
    """Labels of algebras where the two validity checks disagree."""
    return [alg.label for alg in battery if lhs_check(alg) != rhs_check(alg)]


# ---------------------------------------------------------------- battery files

def _downset(poset: Poset, pts) -> int:
    m = 0
    for x in pts:
        for a in range(poset.n):
            if poset.leq(a, x):
                m |= 1 << a
    return m


def battery_to_dict(battery) -> dict:
    """Poset edges plus seeds; seed values are listed as point sets."""
    out = []
    for alg in battery:
        P = alg.poset
        seeds = {}
        for name, seed in sorted(getattr(alg, "seeds", {}).items()):
            seeds[name] = {",".join(map(str, pts)): [a for a in range(P.n) if alg.masks[v] >> a & 1]
                           for pts, v in sorted(seed.items())}
        out.append({"label": alg.label, "points": P.n,
                    "edges": sorted([a, b] for a, b in P.less), "seeds": seeds})
    return {"algebras": out}


def battery_from_dict(data: dict, sig: Signature, strict: bool = False) -> list:
    """Inverse of battery_to_dict. Edges are closed transitively; a seed value
    is any list of points and stands for the downset they generate."""
    out = []
    for k, a in enumerate(data.get("algebras", [])):
        n = int(a["points"])
        rel = _close(n, [tuple(e) for e in a.get("edges", [])])
        if any(x == y for x, y in rel):
            raise ValueError(f"algebra {k}: edges contain a cycle")
        P = Poset(n, rel)
        probe = FiniteDLE(P, sig)
        seeds = {}
        for name, tab in a.get("seeds", {}).items():
            c = sig[name]
            for key, pts in tab.items():
                tup = tuple(int(x) for x in str(key).split(",")) if str(key) else ()
                if len(tup) != c.arity or any(not 0 <= x < n for x in tup):
                    raise ValueError(f"algebra {k}: bad seed key {key!r} for {name}")
                seeds.setdefault(name, {})[tup] = probe.index[_downset(P, pts)]
        out.append(build_algebra(P, sig, seeds, strict=strict, label=a.get("label", f"B{k}")))
    return out


def load_battery(path, sig: Signature, strict: bool = False) -> list:
    with open(path) as fh:
        return battery_from_dict(json.load(fh), sig, strict)


def save_battery(path, battery):
    with open(path, "w") as fh:
        json.dump(battery_to_dict(battery), fh, indent=1)

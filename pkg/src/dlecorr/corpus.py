"""Random signatures and analytic inductive inequalities for property suites."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .alba import run_alba
from .classify import classify_analytic
from .signature import Signature, full, load_signature
from .syntax import Bot, Inequality, Join, Meet, Top, Var, head, mk, show_ineq, variables

VARS = ("p", "q", "r")


@dataclass
class CorpusConfig:
    signatures: int = 3
    per_signature: int = 70
    max_depth: int = 3
    max_vars: int = 3
    max_tries: int = 20000
    seed: int = 0


@dataclass
class CorpusItem:
    sig: Signature
    ineq: Inequality
    cls: str
    tag: str = ""

    def show(self):
        return show_ineq(self.ineq, self.sig)


@dataclass
class Corpus:
    sigs: list = field(default_factory=list)
    items: list = field(default_factory=list)
    rejected: int = 0


def random_signature(rng: random.Random, tag: str = "s") -> Signature:
    """Two to four connectives; at least one F and one G; arity 1 or 2."""
    k = rng.randint(2, 4)
    fams = ["F", "G"] + [rng.choice("FG") for _ in range(k - 2)]
    conns = []
    for i, fam in enumerate(fams):
        ar = rng.choice((1, 1, 2))
        conns.append({"name": f"{tag}{fam.lower()}{i}", "family": fam, "arity": ar,
                      "order_type": [rng.choice((1, "d")) for _ in range(ar)]})
    return full(load_signature({"connectives": conns}))


def random_formula(rng: random.Random, sig: Signature, depth: int, names) -> object:
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.04:
            return Top()
        if r < 0.08:
            return Bot()
        return Var(rng.choice(names))
    ops = [c.name for c in sig.user()] * 2 + ["meet", "join"]
    h = rng.choice(ops)
    if h == "meet":
        return Meet(random_formula(rng, sig, depth - 1, names), random_formula(rng, sig, depth - 1, names))
    if h == "join":
        return Join(random_formula(rng, sig, depth - 1, names), random_formula(rng, sig, depth - 1, names))
    return mk(h, tuple(random_formula(rng, sig, depth - 1, names) for _ in range(sig[h].arity)))


def _interesting(q: Inequality) -> bool:
    return q.lhs != q.rhs and bool(variables(q.lhs) + variables(q.rhs))


def generate_corpus(config: CorpusConfig | None = None, with_non_analytic: int = 0) -> Corpus:
    """Analytic inductive inequalities by rejection sampling.

    `with_non_analytic` also keeps up to that many rejected samples per
    signature, tagged "non-analytic", for hierarchy checks.
    """
    cfg = config or CorpusConfig()
    rng = random.Random(cfg.seed)
    out = Corpus()
    for s in range(cfg.signatures):
        sig = random_signature(rng, tag=chr(ord("a") + s))
        out.sigs.append(sig)
        got, bad, seen = 0, 0, set()
        for _ in range(cfg.max_tries):
            if got >= cfg.per_signature and bad >= with_non_analytic:
                break
            names = VARS[:rng.randint(1, cfg.max_vars)]
            q = Inequality(random_formula(rng, sig, rng.randint(1, cfg.max_depth), names),
                           random_formula(rng, sig, rng.randint(1, cfg.max_depth), names))
            if not _interesting(q) or q in seen:
                continue
            seen.add(q)
            c = classify_analytic(q, sig)
            if c.analytic and got < cfg.per_signature:
                if not run_alba(q, sig).ok:
                    out.rejected += 1
                    continue
                out.items.append(CorpusItem(sig, q, c.cls))
                got += 1
            elif not c.analytic and bad < with_non_analytic:
                out.items.append(CorpusItem(sig, q, c.cls, "non-analytic"))
                bad += 1
    return out


# ---------------------------------------------------------------- soundness

@dataclass
class StepFailure:
    item: str
    algebra: str
    step: str

    def __str__(self):
        return f"{self.item} on {self.algebra}: {self.step}"


def _all_valid(alg, ineqs):
    return all(alg.valid_inequality(q) for q in ineqs)


def _pure_valid(alg, p):
    if p.inequality is None:
        return alg.valid_quasi(p.system.antecedents, p.system.conclusion)
    return alg.valid_quasi(p.antecedents, p.inequality)


def alba_step_failures(item: CorpusItem, battery, result=None) -> list:
    """Every ALBA state must have the validity of the input, algebra by algebra."""
    res = result or run_alba(item.ineq, item.sig)
    bad = []
    for alg in battery:
        v = alg.valid_inequality(item.ineq)
        if res.isolated is not None and alg.valid_inequality(res.isolated) != v:
            bad.append(StepFailure(item.show(), alg.label, "adjunction"))
        for rule, before, after in (res.prelog.steps if res.prelog else []):
            if _all_valid(alg, before) != _all_valid(alg, after):
                bad.append(StepFailure(item.show(), alg.label, f"preprocess {rule}"))
        for q, qi in zip(res.preprocessed, res.systems):
            w = alg.valid_inequality(q)
            for ra in qi.trace:
                ants, concl = ra.after
                if alg.valid_quasi(ants, concl) != w:
                    bad.append(StepFailure(item.show(), alg.label, ra.rule))
        if res.ok and all(_pure_valid(alg, p) for p in res.outputs()) != v:
            bad.append(StepFailure(item.show(), alg.label, "pure output"))
    return bad


def round_trip_failures(item: CorpusItem, battery) -> list:
    """rule_to_inequality after analytic_to_rules must be oracle-equivalent."""
    from .rulegen import analytic_to_rules, rule_to_inequality
    rules = analytic_to_rules(item.ineq, item.sig)
    back = [rule_to_inequality(r, item.sig) for r in rules]
    out = []
    for alg in battery:
        if alg.valid_inequality(item.ineq) != _all_valid(alg, back):
            out.append(StepFailure(item.show(), alg.label, "round trip"))
    return out


# ---------------------------------------------------------------- definite PIA

def is_definite_pia(f, sign: int, sig: Signature) -> bool:
    """Every internal node of the signed tree is PIA, and none is +meet or -join."""
    from .trees import pia_label, signed_tree
    t = signed_tree(f, sign, sig)
    for n in t.nodes.values():
        if n.is_leaf:
            continue
        if not pia_label(n.labels):
            return False
        h = head(n.formula)
        if (h == "meet" and n.sign > 0) or (h == "join" and n.sign < 0):
            return False
    return True


def definite_pia_formulas(sig: Signature, depth: int = 3, ops=None, x: str = "x", side=("z",)):
    """(formula, kind) for every definite PIA formula of nesting depth at most
    `depth` in which x occurs exactly once; kind is "positive" or "negative".

    Built top-down: a +node is a G connective or a join, a -node an F
    connective or a meet, and children take the signs of the order type.
    """
    ops = ops or [c.name for c in sig.user()] + ["meet", "join"]
    memo = {}

    def gen(sign, d, has_x):
        key = (sign, d, has_x)
        if key in memo:
            return memo[key]
        out = [Var(x)] if has_x else [Var(z) for z in side]
        if d > 0:
            for h in ops:
                if h in ("meet", "join"):
                    if (h == "join") != (sign > 0):
                        continue
                    ot = (1, 1)
                else:
                    c = sig[h]
                    if (c.family == "G") != (sign > 0):
                        continue
                    ot = tuple(c.order_type)
                slots = range(len(ot)) if has_x else [None]
                for k in slots:
                    pools = [gen(sign * pol, d - 1, i == k) for i, pol in enumerate(ot)]
                    for args in itertools.product(*pools):
                        out.append(Meet(*args) if h == "meet" else Join(*args) if h == "join" else mk(h, args))
        memo[key] = out
        return out

    res = [(f, "positive") for f in gen(1, depth, True)]
    res += [(f, "negative") for f in gen(-1, depth, True)]
    return res

"""Membership in the primitive / inductive / analytic hierarchy."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .signature import NEG, POS, Signature
from .syntax import (ATOMS, Inequality, Var, head, kids, variables)
from .trees import (SignedTree, all_branches_good, attached_pia_roots, critical_leaves,
                    eps_dual_uniform, inductive_check, is_strict_order,
                    max_skeleton, pia_label, restricted_clause, signed_tree,
                    skeleton_options, transitive_closure, var_signs)

CLASSES = ("very-restricted-left", "very-restricted-right", "restricted-left", "restricted-right",
           "quasi-special", "analytic", "not-analytic")


# ---------------------------------------------------------------- primitive

def is_primitive_formula(f, side: str, sig: Signature, definite: bool = False) -> bool:
    """Left-primitive (side='left') or right-primitive (side='right') formula."""
    if isinstance(f, ATOMS):
        return True
    h = head(f)
    if h == "top":
        return side == "left"
    if h == "bot":
        return side == "right"
    if h in ("meet", "join"):
        if definite and h != ("meet" if side == "left" else "join"):
            return False
        return all(is_primitive_formula(k, side, sig, definite) for k in kids(f))
    c = sig[h]
    if c.family != ("F" if side == "left" else "G"):
        return False
    other = "right" if side == "left" else "left"
    return all(is_primitive_formula(k, side if pol == POS else other, sig, definite)
               for pol, k in zip(c.order_type, kids(f)))


def scattered(f) -> bool:
    names = [a.name for a in _vars(f)]
    return len(names) == len(set(names))


def _vars(f):
    if isinstance(f, Var):
        return [f]
    out = []
    for k in kids(f):
        out.extend(_vars(k))
    return out


def order_type_of(f, sig) -> dict:
    """Variable -> set of signs in the positive generation tree."""
    return var_signs(signed_tree(f, POS, sig))


def monotone(f, sig) -> bool:
    return all(len(s) == 1 for s in order_type_of(f, sig).values())


def _agree(a: dict, b: dict) -> bool:
    return all(a[v] == b[v] for v in a.keys() & b.keys())


@dataclass
class PrimitiveReport:
    kind: str | None
    head: str | None = None
    definite: bool = False
    order_type: dict = field(default_factory=dict)

    def __bool__(self):
        return self.kind is not None


def is_primitive(ineq: Inequality, sig: Signature) -> PrimitiveReport:
    ls, rs = order_type_of(ineq.lhs, sig), order_type_of(ineq.rhs, sig)
    for side in ("left", "right"):
        hd, tl = (ineq.lhs, ineq.rhs) if side == "left" else (ineq.rhs, ineq.lhs)
        tsig = rs if side == "left" else ls
        if not (is_primitive_formula(ineq.lhs, side, sig) and is_primitive_formula(ineq.rhs, side, sig)):
            continue
        if not scattered(hd) or not all(len(s) == 1 for s in tsig.values()) or not _agree(ls, rs):
            continue
        ot = {v: next(iter(s)) for v, s in (ls | rs).items() if len(s) == 1}
        return PrimitiveReport(side, "lhs" if side == "left" else "rhs",
                               is_primitive_formula(hd, side, sig, True), ot)
    return PrimitiveReport(None)


def is_quasi_primitive(ineq: Inequality, sig: Signature) -> PrimitiveReport:
    ls, rs = order_type_of(ineq.lhs, sig), order_type_of(ineq.rhs, sig)
    if not (monotone(ineq.lhs, sig) and monotone(ineq.rhs, sig) and _agree(ls, rs)):
        return PrimitiveReport(None)
    for side in ("left", "right"):
        if is_primitive_formula(ineq.lhs, side, sig) and is_primitive_formula(ineq.rhs, side, sig):
            hd = ineq.lhs if side == "left" else ineq.rhs
            ot = {v: next(iter(s)) for v, s in (ls | rs).items()}
            return PrimitiveReport(side, "lhs" if side == "left" else "rhs",
                                   is_primitive_formula(hd, side, sig, True), ot)
    return PrimitiveReport(None)


# ---------------------------------------------------------------- witnesses

def eps_str(eps: dict, names=None) -> str:
    names = names or sorted(eps)
    return "(" + ",".join("1" if eps[n] == POS else "d" for n in names) + ")"


def omega_str(omega) -> str:
    if not omega:
        return "{}"
    return "{" + ", ".join(f"{a}<{b}" for a, b in sorted(omega)) + "}"


@dataclass
class Witness:
    cls: str
    eps: dict
    omega: frozenset
    chirality: str | None = None
    lhs_labels: dict = field(default_factory=dict)
    rhs_labels: dict = field(default_factory=dict)
    lhs_skeleton: frozenset = frozenset()
    rhs_skeleton: frozenset = frozenset()

    def key(self):
        names = sorted(self.eps)
        return (len(self.omega), tuple(0 if self.eps[n] == POS else 1 for n in names),
                0 if self.chirality in (None, "left") else 1)

    def describe(self) -> str:
        out = f"{self.cls} eps{eps_str(self.eps)} omega={omega_str(self.omega)}"
        return out


def _eps_iter(names):
    for bits in itertools.product((POS, NEG), repeat=len(names)):
        yield dict(zip(names, bits))


def _ineq_vars(ineq):
    return sorted({v.name for v in variables(ineq.lhs) + variables(ineq.rhs)})


def find_inductive(ineq: Inequality, sig: Signature, max_vars: int = 10):
    """First (eps, Omega) witness, eps in lexicographic order (1 first) and
    Omega the least order satisfying the side conditions."""
    names = _ineq_vars(ineq)
    if len(names) > max_vars:
        raise ValueError(f"{len(names)} variables exceeds the search cutoff {max_vars}")
    ts, tt = signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)
    ss, st = max_skeleton(ts), max_skeleton(tt)
    for eps in _eps_iter(names):
        a, b = inductive_check(ts, eps, ss), inductive_check(tt, eps, st)
        if not (a.ok and b.ok):
            continue
        om = transitive_closure(a.pairs | b.pairs)
        if is_strict_order(om):
            return Witness("inductive", eps, om, None, a.labels, b.labels, ss, st)
    return None


def check_inductive(ineq: Inequality, sig: Signature, eps: dict, omega) -> bool:
    ts, tt = signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)
    a = inductive_check(ts, eps, max_skeleton(ts))
    b = inductive_check(tt, eps, max_skeleton(tt))
    if not (a.ok and b.ok):
        return False
    om = transitive_closure(omega)
    return is_strict_order(om) and (a.pairs | b.pairs) <= om


# ---------------------------------------------------------------- analytic classes

def _count_uniform_attached(t: SignedTree, eps, skel) -> int:
    n = 0
    for r in attached_pia_roots(t, skel):
        if r and not any(t[q].is_var for q in t.below(r)):
            continue
        if eps_dual_uniform(t, r, eps):
            n += 1
    return n


def _critical_all_skeleton(t: SignedTree, eps, skel) -> bool:
    return all(all(a in skel for a in t.ancestors(leaf)) for leaf in critical_leaves(t, eps))


def _memberships(ineq, sig, ts, tt, eps, ss, st, left_prim_t, right_prim_s):
    a, b = inductive_check(ts, eps, ss), inductive_check(tt, eps, st)
    if not (a.ok and b.ok):
        return None, []
    om = transitive_closure(a.pairs | b.pairs)
    if not is_strict_order(om):
        return None, []
    an_s, an_t = all_branches_good(ts, ss), all_branches_good(tt, st)
    res_s = an_s and not restricted_clause(ts, eps, ss, a.labels)
    res_t = an_t and not restricted_clause(tt, eps, st, b.labels)
    uni_s, uni_t = eps_dual_uniform(ts, (), eps), eps_dual_uniform(tt, (), eps)
    found = []
    if res_s and uni_t and left_prim_t:
        found.append(("very-restricted-left", "left"))
    if res_t and uni_s and right_prim_s:
        found.append(("very-restricted-right", "right"))
    if res_s and an_t and _count_uniform_attached(tt, eps, st) == 1:
        found.append(("restricted-left", "left"))
    if res_t and an_s and _count_uniform_attached(ts, eps, ss) == 1:
        found.append(("restricted-right", "right"))
    if an_s and an_t:
        if _critical_all_skeleton(ts, eps, ss) and _critical_all_skeleton(tt, eps, st):
            found.append(("quasi-special", None))
        found.append(("analytic", None))
    return (om, a.labels, b.labels), found


_GROUPS = (("very-restricted-left", "very-restricted-right"),
           ("restricted-left", "restricted-right"),
           ("quasi-special",),
           ("analytic",))


@dataclass
class Classification:
    cls: str
    witness: Witness | None = None
    witnesses: dict = field(default_factory=dict)  # class -> best witness

    def __str__(self):
        return self.witness.describe() if self.witness else self.cls

    @property
    def analytic(self) -> bool:
        return self.cls != "not-analytic"


def classify_analytic(ineq: Inequality, sig: Signature, eps: dict | None = None,
                      only: tuple | None = None, max_vars: int = 8) -> Classification:
    """Most specific analytic class with its best witness.

    Within a class, witnesses are ordered by the size of Omega, then eps
    lexicographically (1 first), then chirality (left first). `eps` fixes
    the order type; `only` restricts the classes considered.
    """
    names = _ineq_vars(ineq)
    if len(names) > max_vars:
        raise ValueError(f"{len(names)} variables exceeds the search cutoff {max_vars}")
    ts, tt = signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)
    opts_s, opts_t = skeleton_options(ts), skeleton_options(tt)
    lp_t = is_primitive_formula(ineq.rhs, "left", sig)
    rp_s = is_primitive_formula(ineq.lhs, "right", sig)
    best = {}
    eps_list = [eps] if eps is not None else list(_eps_iter(names))
    for e in eps_list:
        for ss, st in itertools.product(opts_s, opts_t):
            info, found = _memberships(ineq, sig, ts, tt, e, ss, st, lp_t, rp_s)
            for cls, chir in found:
                if only and cls not in only:
                    continue
                om, la, lb = info
                w = Witness(cls, dict(e), om, chir, la, lb, ss, st)
                if cls not in best or w.key() < best[cls].key():
                    best[cls] = w
    for group in _GROUPS:
        cands = [best[c] for c in group if c in best]
        if cands:
            w = min(cands, key=Witness.key)
            return Classification(w.cls, w, best)
    return Classification("not-analytic", None, best)


def is_inductive(ineq, sig) -> bool:
    return find_inductive(ineq, sig) is not None


# ---------------------------------------------------------------- acyclic I2

def _pieces(t: SignedTree, path):
    """Sequents left after invertible rules on a PIA part: multisets of
    (variable, side) with side 's' for succedent and 'a' for antecedent."""
    n = t[path]
    if n.is_leaf:
        if n.is_var:
            return [((n.formula.name, "s" if n.sign == POS else "a"),)]
        return [()]
    ch = [_pieces(t, c) for c in t.children(path)]
    if head(n.formula) in ("meet", "join") and pia_label(n.labels) == "SRA":
        return [p for c in ch for p in c]
    out = []
    for combo in itertools.product(*ch):
        out.append(tuple(sorted(x for piece in combo for x in piece)))
    return out


def _respects(seqs, p):
    """Form ('a' or 's') in which the set respects multiplicities wrt p."""
    forms = []
    for side, other in (("a", "s"), ("s", "a")):
        ok = True
        for q in seqs:
            occ = [x for x in q if x[0] == p]
            if any(s == side for _, s in occ) and len(occ) != 1:
                ok = False
                break
        if ok:
            forms.append(side)
    return forms


def _eliminate(seqs, p, side):
    keep = [q for q in seqs if all(v != p for v, _ in q)]
    defs = [tuple(x for x in q if x[0] != p) for q in seqs if (p, side) in q]
    users = [q for q in seqs if any(v == p for v, _ in q) and (p, side) not in q]
    if not defs or not users:
        # p occurs with a single side: replaced by a constant
        return frozenset(keep)
    out = set(keep)
    for q in users:
        rest = tuple(x for x in q if x[0] != p)
        k = sum(1 for x in q if x[0] == p)
        for choice in itertools.product(defs, repeat=k):
            out.add(tuple(sorted(rest + tuple(x for d in choice for x in d))))
    return frozenset(out)


@lru_cache(maxsize=None)
def _acyclic(seqs: frozenset) -> bool:
    vs = sorted({v for q in seqs for v, _ in q})
    if not vs:
        return True
    if len(seqs) > 4000:
        return False
    for p in vs:
        for side in _respects(seqs, p):
            if _acyclic(_eliminate(seqs, p, side)):
                return True
    return False


def premise_sequents(ineq: Inequality, sig: Signature):
    out = []
    for t in (signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)):
        skel = max_skeleton(t)
        for r in attached_pia_roots(t, skel):
            out.extend(_pieces(t, r))
    return frozenset(out)


def in_I2(ineq: Inequality, sig: Signature) -> bool:
    for t in (signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)):
        if not all_branches_good(t, max_skeleton(t)):
            return False
    return True


def is_acyclic_I2(ineq: Inequality, sig: Signature) -> bool:
    """Membership in I2(DL) plus acyclicity of the premise sequents."""
    return in_I2(ineq, sig) and _acyclic(premise_sequents(ineq, sig))

"""Structural rules: synthesis from inequalities, analyticity checks, and the
way back from rules to inequalities.

Rules are built from structures (`SVar`, `SOp`, `FormulaLeaf`); a rule is
read on an algebra through the left/right interpretations of its sequents.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field

from .alba import (AlbaError, Fresh, QuasiInequality, ackermann, ackermann_order,
                   eliminate_monotone, inverted_ackermann, isolate, preprocess, run_alba, simplify_constants,
                   solve_for, split, trivial)
from .classify import (Classification, classify_analytic, is_primitive)
from .signature import NEG, POS, Signature
from .syntax import (App, Bot, Conominal, Formula, FormulaLeaf, Inequality, Join,
                     Meet, Nominal, NotPrimitive, NotSided, SOp, Sequent, SVar, Top,
                     Var, atoms, big_join, big_meet, head, kids, left_interpret, mk,
                     parse_sequent, reading_of, rebuild, right_interpret, show,
                     show_ineq, show_sequent, structure_of, subst, subterm,
                     svars, variables)
from .trees import (critical_leaves, max_skeleton, attached_pia_roots, maximal_uniform_subtrees,
                    signed_tree)


class SynthesisError(ValueError):
    pass


class NotAnalytic(SynthesisError):
    pass


# ---------------------------------------------------------------- rules

@dataclass(frozen=True)
class StructuralRule:
    premises: tuple
    conclusion: Sequent
    name: str = ""
    # optional classes of occurrences required to carry one name (C2);
    # an occurrence is (sequent index or -1 for the conclusion, side, path)
    congruence: tuple = ()

    def sequents(self):
        return list(self.premises) + [self.conclusion]

    def variables(self) -> list:
        out = []
        for q in [self.conclusion] + list(self.premises):
            for v in svars(q.antecedent) + svars(q.succedent):
                if v.name not in out:
                    out.append(v.name)
        return out


_BASE_NAMES = ("X", "Y", "Z", "W", "U", "V")


def _name_stream():
    yield from _BASE_NAMES
    for k in itertools.count(1):
        for b in _BASE_NAMES:
            yield f"{b}{k}"


def rename_struct(s, mapping: dict):
    return _smap(s, lambda v: SVar(mapping.get(v.name, v.name)))


def _smap(s, fn):
    if isinstance(s, SVar):
        return fn(s)
    if isinstance(s, SOp):
        return SOp(s.sid, tuple(_smap(a, fn) for a in s.args))
    return s


def rename_seq(q: Sequent, mapping: dict) -> Sequent:
    return Sequent(rename_struct(q.antecedent, mapping), rename_struct(q.succedent, mapping))


def rename_rule(r: StructuralRule, mapping: dict) -> StructuralRule:
    return StructuralRule(tuple(rename_seq(p, mapping) for p in r.premises),
                          rename_seq(r.conclusion, mapping), r.name, r.congruence)


def canonical_names(r: StructuralRule) -> dict:
    """First appearance, conclusion first, mapped to X, Y, Z, W, U, V, X1, ..."""
    gen = _name_stream()
    return {n: next(gen) for n in r.variables()}


def _seq_key(q: Sequent) -> str:
    return repr(q)


def canonical_rule(r: StructuralRule) -> StructuralRule:
    """Canonical variable names; premises deduplicated and sorted."""
    r2 = rename_rule(r, canonical_names(r))
    prem = sorted(set(r2.premises), key=_seq_key)
    return StructuralRule(tuple(prem), r2.conclusion, r.name, r.congruence)


def same_rule(a: StructuralRule, b: StructuralRule) -> bool:
    """Equality up to renaming of structure variables and premise order."""
    ca, cb = canonical_rule(a), canonical_rule(b)
    return ca.conclusion == cb.conclusion and set(ca.premises) == set(cb.premises)


def _dedupe_rules(rules) -> list:
    out = []
    for r in rules:
        c = canonical_rule(r)
        if not any(same_rule(c, o) for o in out):
            out.append(c)
    return out


# ---------------------------------------------------------------- text formats

def format_rule(r: StructuralRule, sig: Signature) -> str:
    prem = [show_sequent(p, sig) for p in r.premises]
    concl = show_sequent(r.conclusion, sig)
    width = max([len(concl)] + [len(p) for p in prem] + [4])
    bar = "-" * width + (f" {r.name}" if r.name else "")
    return "\n".join(prem + [bar, concl])


def format_rules(rules, sig: Signature) -> str:
    return "\n\n".join(format_rule(r, sig) for r in rules)


_BAR = re.compile(r"^-{3,}\s*(.*)$")


def parse_rule(text: str, sig: Signature) -> StructuralRule:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    bars = [k for k, ln in enumerate(lines) if _BAR.match(ln)]
    if len(bars) != 1 or bars[0] != len(lines) - 2:
        raise SynthesisError("a rule is premise lines, a line of dashes, and one conclusion")
    k = bars[0]
    name = _BAR.match(lines[k]).group(1)
    prem = tuple(parse_sequent(ln, sig) for ln in lines[:k])
    return StructuralRule(prem, parse_sequent(lines[k + 1], sig), name)


def parse_rules(text: str, sig: Signature) -> list:
    blocks = re.split(r"\n\s*\n", text.strip())
    return [parse_rule(b, sig) for b in blocks if b.strip() and not b.strip().startswith("#")]


_LATTICE_TEX = {"I": r"\mathrm{I}", ";": r"\,;\,", ">": r"\,{>}\,", "<": r"\,{<}\,"}


def struct_latex(s, sig: Signature, glyphs: dict | None = None, pos: str = "pre") -> str:
    """LaTeX for a structure in precedent (`pre`) or succedent position.

    Operational readings get a hat (F) or a check (G); `glyphs` overrides
    the macro of a struct id.
    """
    from .syntax import latex
    if isinstance(s, SVar):
        return s.name
    if isinstance(s, FormulaLeaf):
        return latex(s.formula, sig)
    fam = "F" if pos == "pre" else "G"
    ot = struct_order_type(s, pos, sig)
    g = (glyphs or {}).get(s.sid) or _LATTICE_TEX.get(s.sid)
    if g is None:
        c = sig.get(reading_of(s.sid, fam, sig) or reading_of(s.sid, "G" if fam == "F" else "F", sig) or s.sid)
        base = c.latex if c is not None and c.latex else r"\mathrm{" + s.sid.replace("#", r"\#") + "}"
        g = r"\hat{" + base + "}" if c is not None and c.family == "F" else r"\check{" + base + "}"

    def wrap(k):
        a = s.args[k]
        t = struct_latex(a, sig, glyphs, pos if ot[k] == POS else _flip(pos))
        return f"({t})" if isinstance(a, SOp) and len(a.args) >= 2 else t

    if not s.args:
        return g
    if len(s.args) == 1:
        return g + " " + wrap(0)
    if len(s.args) == 2:
        return wrap(0) + (g if s.sid in _LATTICE_TEX else r" \mathbin{" + g + "} ") + wrap(1)
    return g + "(" + ", ".join(wrap(k) for k in range(len(s.args))) + ")"


def sequent_latex(q: Sequent, sig: Signature, glyphs=None) -> str:
    return (struct_latex(q.antecedent, sig, glyphs, "pre") + r" \vdash "
            + struct_latex(q.succedent, sig, glyphs, "suc"))


def latex_rule(r: StructuralRule, sig: Signature, glyphs=None) -> str:
    """bussproofs source; premises share one axiom line."""
    prem = r" \quad ".join(f"${sequent_latex(p, sig, glyphs)}$" for p in r.premises)
    out = [r"\AxiomC{" + prem + "}"]
    if r.name:
        out.append(r"\RightLabel{\scriptsize " + r.name + "}")
    out.append(r"\UnaryInfC{$" + sequent_latex(r.conclusion, sig, glyphs) + "$}")
    out.append(r"\DisplayProof")
    return "\n".join(out)


# ---------------------------------------------------------------- positions

def _flip(pos):
    return "suc" if pos == "pre" else "pre"


def struct_order_type(s: SOp, pos: str, sig: Signature):
    """Order type of a structural connective; either reading will do."""
    fam = "F" if pos == "pre" else "G"
    name = reading_of(s.sid, fam, sig) or reading_of(s.sid, "G" if fam == "F" else "F", sig)
    if name is None:
        raise NotSided(f"unknown structural connective {s.sid!r}")
    c = sig[name]
    if c.arity != len(s.args):
        raise NotSided(f"arity mismatch at structural connective {s.sid!r}")
    return c.order_type


def occurrences(q: Sequent, sig: Signature) -> list:
    """(leaf, position, side, path) for every SVar and FormulaLeaf."""
    out = []

    def go(s, pos, side, path):
        if isinstance(s, (SVar, FormulaLeaf)):
            out.append((s, pos, side, path))
            return
        ot = struct_order_type(s, pos, sig)
        for i, a in enumerate(s.args):
            go(a, pos if ot[i] == POS else _flip(pos), side, path + (i,))

    go(q.antecedent, "pre", "ante", ())
    go(q.succedent, "suc", "succ", ())
    return out


def _get(s, path):
    for i in path:
        s = s.args[i]
    return s


def _put(s, path, new):
    if not path:
        return new
    args = list(s.args)
    args[path[0]] = _put(args[path[0]], path[1:], new)
    return SOp(s.sid, tuple(args))


# ---------------------------------------------------------------- display

def _step(q: Sequent, side: str, i: int, sig: Signature):
    """One display postulate at the root: returns (sequent, side of arg i)."""
    if side == "ante":
        s, other = q.antecedent, q.succedent
        name = reading_of(s.sid, "F", sig) if isinstance(s, SOp) else None
    else:
        s, other = q.succedent, q.antecedent
        name = reading_of(s.sid, "G", sig) if isinstance(s, SOp) else None
    if name is None:
        raise NotSided("no display move at this root")
    c = sig[name]
    res = sig.residual(name, i)
    args = list(s.args)
    target = args[i]
    args[i] = other
    new = SOp(sig.struct_of(res.name), tuple(args))
    pol = c.order_type[i]
    if side == "ante":
        return (Sequent(target, new), "ante") if pol == POS else (Sequent(new, target), "succ")
    return (Sequent(new, target), "succ") if pol == POS else (Sequent(target, new), "ante")


def display(q: Sequent, side: str, path, sig: Signature):
    """Display the substructure at `path` of `side`; returns (sequent, side)."""
    for i in path:
        q, side = _step(q, side, i, sig)
    return q, side


def display_moves(q: Sequent, sig: Signature) -> list:
    out = []
    for side, s in (("ante", q.antecedent), ("succ", q.succedent)):
        if not isinstance(s, SOp):
            continue
        for i in range(len(s.args)):
            try:
                out.append(_step(q, side, i, sig)[0])
            except NotSided:
                break
    return out


def display_closure(q: Sequent, sig: Signature, limit: int = 5000) -> set:
    seen = {q}
    todo = deque([q])
    while todo and len(seen) < limit:
        cur = todo.popleft()
        for nxt in display_moves(cur, sig):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def _display_key(q: Sequent, sig: Signature) -> str:
    return min(_seq_key(x) for x in display_closure(q, sig))


def _bijections(a, b):
    """Variable maps making structure a equal to structure b, if any."""
    m = {}

    def go(x, y):
        if isinstance(x, SVar) and isinstance(y, SVar):
            if m.setdefault(x.name, y.name) != y.name:
                return False
            return True
        if isinstance(x, SOp) and isinstance(y, SOp):
            return x.sid == y.sid and len(x.args) == len(y.args) and all(go(u, v) for u, v in zip(x.args, y.args))
        return x == y

    ok = go(a.antecedent, b.antecedent) and go(a.succedent, b.succedent)
    if ok and len(set(m.values())) == len(m):
        return m
    return None


def display_equivalent(r1: StructuralRule, r2: StructuralRule, sig: Signature) -> bool:
    """Same rule up to renaming and display postulates on each sequent."""
    if len(r1.premises) != len(r2.premises):
        return False
    memo = {}

    def key(q):
        if q not in memo:
            memo[q] = _display_key(q, sig)
        return memo[q]

    keys2 = {key(p) for p in r2.premises}
    for c in display_closure(r1.conclusion, sig):
        m = _bijections(c, r2.conclusion)
        if m is None:
            continue
        ren = rename_rule(r1, m)
        if {key(p) for p in ren.premises} == keys2:
            return True
    return False


# ---------------------------------------------------------------- analyticity

@dataclass
class AnalyticReport:
    checks: dict = field(default_factory=dict)  # condition -> (ok, detail)

    @property
    def ok(self) -> bool:
        return all(v[0] for v in self.checks.values())

    def failed(self) -> list:
        return [k for k, v in self.checks.items() if not v[0]]

    def show(self) -> str:
        return "\n".join(f"{k}: {'ok' if v[0] else 'FAIL'}" + (f"  {v[1]}" if v[1] else "")
                         for k, v in self.checks.items())


def _occ_by_name(q, sig):
    out = {}
    for leaf, pos, side, path in occurrences(q, sig):
        if isinstance(leaf, SVar):
            out.setdefault(leaf.name, []).append((pos, side, path))
    return out


def check_analytic(rule: StructuralRule, sig: Signature) -> AnalyticReport:
    """Conditions C1-C7 for a structural rule."""
    rep = AnalyticReport()
    try:
        concl = _occ_by_name(rule.conclusion, sig)
        prem = [_occ_by_name(p, sig) for p in rule.premises]
        allocc = [occurrences(q, sig) for q in rule.sequents()]
    except NotSided as e:
        for k in ("C1", "C2", "C3", "C4", "C5", "C6", "C7"):
            rep.checks[k] = (False, str(e))
        return rep
    lost = sorted({n for p in prem for n in p if n not in concl})
    rep.checks["C1"] = (not lost, "premise variables missing from the conclusion: " + ", ".join(lost) if lost else "")
    bad = []
    for cls in rule.congruence:
        names = set()
        for idx, side, path in cls:
            q = rule.conclusion if idx == -1 else rule.premises[idx]
            s = _get(q.antecedent if side == "ante" else q.succedent, path)
            names.add(s.name if isinstance(s, SVar) else repr(s))
        if len(names) > 1:
            bad.append("/".join(sorted(names)))
    rep.checks["C2"] = (not bad, "non-congruent classes: " + ", ".join(bad) if bad else "")
    dup = sorted(n for n, o in concl.items() if len(o) > 1)
    rep.checks["C3"] = (not dup, "repeated in the conclusion: " + ", ".join(dup) if dup else "")
    moved = []
    for n, o in concl.items():
        if len(o) != 1:
            continue
        pos = o[0][0]
        for p in prem:
            if any(x[0] != pos for x in p.get(n, [])):
                moved.append(n)
                break
    rep.checks["C4"] = (not moved, "position changes between premise and conclusion: " + ", ".join(sorted(moved))
                        if moved else "")
    rep.checks["C5"] = (True, "no formula is principal in a structural rule")
    succ_f = any(isinstance(l, FormulaLeaf) and pos == "suc" for occ in allocc for l, pos, _, _ in occ)
    pre_f = any(isinstance(l, FormulaLeaf) and pos == "pre" for occ in allocc for l, pos, _, _ in occ)
    rep.checks["C6"] = (not succ_f, "formula in succedent position" if succ_f else "")
    rep.checks["C7"] = (not pre_f, "formula in precedent position" if pre_f else "")
    return rep


def is_analytic(rule, sig) -> bool:
    return check_analytic(rule, sig).ok


def is_special(rule: StructuralRule, sig: Signature, lax: bool = False) -> bool:
    """Special shape: (X |- T_i)/X |- T or (S_i |- Y)/S |- Y, X (Y) not in T_i, T (S_i, S).

    With `lax`, some variable occurs exactly once in each premise and in the
    conclusion, always in the same position.
    """
    if not check_analytic(rule, sig).ok:
        return False
    if lax:
        c = _occ_by_name(rule.conclusion, sig)
        ps = [_occ_by_name(p, sig) for p in rule.premises]
        for n, o in c.items():
            if len(o) == 1 and all(len(p.get(n, [])) == 1 and p[n][0][0] == o[0][0] for p in ps):
                return True
        return False
    q = rule.conclusion
    for side, other in (("antecedent", "succedent"), ("succedent", "antecedent")):
        x = getattr(q, side)
        if not isinstance(x, SVar):
            continue
        ok = x not in svars(getattr(q, other))
        for p in rule.premises:
            ok = ok and getattr(p, side) == x and x not in svars(getattr(p, other))
        if ok:
            return True
    return False


def quasi_special_keys(rule: StructuralRule, sig: Signature):
    """Key variable (name, position) per premise, or None if not quasi-special."""
    if not check_analytic(rule, sig).ok:
        return None
    concl = _occ_by_name(rule.conclusion, sig)
    prem = [_occ_by_name(p, sig) for p in rule.premises]
    cands = []
    for p in prem:
        cands.append([n for n, o in p.items()
                      if len(o) == 1 and len(concl.get(n, [])) == 1 and o[0][0] == concl[n][0][0]])

    def ok(keys):
        ks = set(keys)
        for p, k in zip(prem, keys):
            if any(n in ks for n in p if n != k):
                return False
        return True

    def go(k, keys):
        if k == len(prem):
            return list(keys) if ok(keys) else None
        for n in cands[k]:
            keys.append(n)
            if ok(keys):
                res = go(k + 1, keys)
                if res is not None:
                    return res
            keys.pop()
        return None

    return go(0, [])


def is_quasi_special(rule, sig) -> bool:
    return quasi_special_keys(rule, sig) is not None


# ---------------------------------------------------------------- rules to inequalities

def _display_var(q: Sequent, name: str, sig: Signature):
    for leaf, pos, side, path in occurrences(q, sig):
        if isinstance(leaf, SVar) and leaf.name == name:
            return display(q, side, path, sig)
    raise SynthesisError(f"{name} does not occur")


def rule_to_inequality(rule: StructuralRule, sig: Signature, quasi: bool | None = None) -> Inequality:
    """An inequality valid exactly where the analytic rule is.

    Quasi-special rules substitute the displayed keys directly; otherwise
    each displayed variable v becomes v joined (met) with its bound.
    """
    rep = check_analytic(rule, sig)
    if not rep.ok:
        raise NotAnalytic("rule is not analytic: " + ", ".join(rep.failed()))
    keys = quasi_special_keys(rule, sig)
    use_keys = keys is not None if quasi is None else (quasi and keys is not None)
    lowers, uppers = {}, {}  # y: [s] from S |- Y ; x: [t] from X |- T
    for k, p in enumerate(rule.premises):
        name = keys[k] if use_keys else next(l.name for l, _, _, _ in occurrences(p, sig) if isinstance(l, SVar))
        d, side = _display_var(p, name, sig)
        v = Var(name.lower())
        if side == "ante":
            uppers.setdefault(v, []).append(right_interpret(d.succedent, sig))
        else:
            lowers.setdefault(v, []).append(left_interpret(d.antecedent, sig))
    s = left_interpret(rule.conclusion.antecedent, sig)
    t = right_interpret(rule.conclusion.succedent, sig)
    m = {}
    for v, bs in lowers.items():
        m[v] = big_join(bs) if use_keys else Join(v, big_join(bs))
    for v, bs in uppers.items():
        m[v] = big_meet(bs) if use_keys else Meet(v, big_meet(bs))
    return Inequality(subst(s, m), subst(t, m))


# ---------------------------------------------------------------- normal forms

def _product(lists):
    return [list(c) for c in itertools.product(*lists)]


def cnf_right(f: Formula, sig: Signature) -> list:
    """Meet of the returned pieces; pieces contain no + meet. [] means top."""
    if isinstance(f, (Var, Nominal, Conominal)):
        return [f]
    if isinstance(f, Top):
        return []
    if isinstance(f, Bot):
        return [f]
    if isinstance(f, Meet):
        return _uniq(cnf_right(f.l, sig) + cnf_right(f.r, sig))
    if isinstance(f, Join):
        a, b = cnf_right(f.l, sig), cnf_right(f.r, sig)
        if not a or not b:
            return []
        return _uniq([Join(x, y) for x in a for y in b])
    c = sig[head(f)]
    if c.family != "G":
        return [f]
    lists = [cnf_right(k, sig) if pol == POS else dnf_left(k, sig) for pol, k in zip(c.order_type, kids(f))]
    if any(not l for l in lists):
        return []
    return _uniq([mk(c.name, combo) for combo in _product(lists)])


def dnf_left(f: Formula, sig: Signature) -> list:
    """Join of the returned pieces; pieces contain no + join. [] means bottom."""
    if isinstance(f, (Var, Nominal, Conominal)):
        return [f]
    if isinstance(f, Bot):
        return []
    if isinstance(f, Top):
        return [f]
    if isinstance(f, Join):
        return _uniq(dnf_left(f.l, sig) + dnf_left(f.r, sig))
    if isinstance(f, Meet):
        a, b = dnf_left(f.l, sig), dnf_left(f.r, sig)
        if not a or not b:
            return []
        return _uniq([Meet(x, y) for x in a for y in b])
    c = sig[head(f)]
    if c.family != "F":
        return [f]
    lists = [dnf_left(k, sig) if pol == POS else cnf_right(k, sig) for pol, k in zip(c.order_type, kids(f))]
    if any(not l for l in lists):
        return []
    return _uniq([mk(c.name, combo) for combo in _product(lists)])


def _uniq(xs):
    out = []
    for x in xs:
        if x not in out:
            out.append(x)
    return out


# ---------------------------------------------------------------- primitive inequalities

def _fresh_svar(used, base="X"):
    for n in _name_stream():
        if n not in used:
            return SVar(n)


def _struct(f, side, sig):
    try:
        return structure_of(f, side, sig)
    except NotPrimitive as e:
        raise SynthesisError(str(e)) from e


def primitive_to_rules(ineq: Inequality, sig: Signature) -> list:
    """Special rules for a primitive inequality."""
    rep = is_primitive(ineq, sig)
    if not rep:
        raise SynthesisError(f"not primitive: {show_ineq(ineq, sig)}")
    hd = ineq.lhs if rep.kind == "left" else ineq.rhs
    keep = {v.name for v in variables(hd)}
    m = {}
    ts, tt = signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)
    for t in (ts, tt):
        for p in t.var_leaves():
            v = t[p].formula
            if v.name not in keep:
                m[v] = Top() if t[p].sign == POS else Bot()
    s = simplify_constants(subst(ineq.lhs, m), sig)
    t = simplify_constants(subst(ineq.rhs, m), sig)
    # each conclusion piece on its own; constants or splitting can strand a
    # variable on one side, and its extreme value then replaces it (else it
    # would occur in a premise only, against C1)
    if rep.kind == "right":
        pieces = [(s, tj) for tj in cnf_right(t, sig)]
    else:
        pieces = [(si, t) for si in dnf_left(s, sig)]
    rules = []
    for a, b in pieces:
        while True:
            q, done = eliminate_monotone(Inequality(a, b), sig)
            if not done:
                break
            a, b = simplify_constants(q.lhs, sig), simplify_constants(q.rhs, sig)
        if not trivial(Inequality(a, b)):
            rules.extend(_primitive_piece(rep.kind, a, b, sig))
    return _dedupe_rules(rules)


def _primitive_piece(kind, s, t, sig):
    used = {v.name.upper()[:1] + v.name[1:] for v in variables(s) + variables(t)}
    rules = []
    if kind == "right":
        ss, tts = cnf_right(s, sig), cnf_right(t, sig)
        if not ss:
            for tj in tts:
                rules.append(StructuralRule((), Sequent(SOp("I"), _struct(tj, "right", sig))))
        else:
            x = _fresh_svar(used)
            prem = tuple(Sequent(x, _struct(si, "right", sig)) for si in ss)
            for tj in tts:
                rules.append(StructuralRule(prem, Sequent(x, _struct(tj, "right", sig))))
    else:
        ss, tts = dnf_left(s, sig), dnf_left(t, sig)
        if not tts:
            for si in ss:
                rules.append(StructuralRule((), Sequent(_struct(si, "left", sig), SOp("I"))))
        else:
            y = _fresh_svar(used)
            prem = tuple(Sequent(_struct(tj, "left", sig), y) for tj in tts)
            for si in ss:
                rules.append(StructuralRule(prem, Sequent(_struct(si, "left", sig), y)))
    return _dedupe_rules(rules)


def pure_to_primitive(pure) -> Inequality:
    """Replace nominals and conominals by fresh variables p1, p2, ..."""
    if hasattr(pure, "inequality"):
        if pure.inequality is None or pure.antecedents:
            raise SynthesisError("pure output keeps antecedents")
        q = pure.inequality
    else:
        q = pure
    m, k = {}, 0
    for a in atoms(q.lhs) + atoms(q.rhs):
        if isinstance(a, (Nominal, Conominal)) and a not in m:
            k += 1
            m[a] = Var(f"p{k}")
        elif isinstance(a, Var):
            raise SynthesisError("pure output still contains variables")
    return Inequality(subst(q.lhs, m), subst(q.rhs, m))


# ---------------------------------------------------------------- analytic inequalities

@dataclass
class Synthesis:
    input: Inequality
    route: str
    classification: Classification | None = None
    rules: list = field(default_factory=list)
    primitive: list = field(default_factory=list)  # primitive inequalities used
    systems: list = field(default_factory=list)  # quasi-inequalities used
    alba: object = None
    notes: list = field(default_factory=list)

    def report(self, sig: Signature, trace: bool = False) -> str:
        lines = [f"route: {self.route}"]
        if self.classification is not None:
            lines.append(f"class: {self.classification}")
        for p in self.primitive:
            lines.append("primitive: " + show_ineq(p, sig))
        if trace:
            for qi in self.systems:
                for ra in qi.trace:
                    lines.append("  " + ra.record(sig))
                lines.append("system: " + qi.show(sig))
        lines.extend("note: " + n for n in self.notes)
        lines.append("")
        lines.append(format_rules(self.rules, sig))
        return "\n".join(lines)


ROUTES = ("auto", "primitive", "alba", "inverted-ackermann")


def synthesize(ineq: Inequality, sig: Signature, eps: dict | None = None, route: str = "auto") -> Synthesis:
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    cls = classify_analytic(ineq, sig, eps=eps)
    if not cls.analytic:
        raise NotAnalytic(f"not analytic inductive: {show_ineq(ineq, sig)}")
    out = Synthesis(ineq, route, cls)
    if route == "auto":
        if is_primitive(ineq, sig):
            route = "primitive"
        elif cls.cls.startswith(("very-restricted", "restricted")):
            route = "alba"
        else:
            route = "inverted-ackermann"
    if route == "primitive":
        out.route = "primitive"
        out.primitive = [ineq]
        out.rules = primitive_to_rules(ineq, sig)
        return out
    if route == "alba":
        res = run_alba(ineq, sig, witness=cls.witness)
        out.alba = res
        try:
            if not res.ok:
                raise SynthesisError(res.stuck.reason if res.stuck else "ALBA output is not pure")
            prims = [pure_to_primitive(o) for o in res.outputs()]
            rules = []
            for p in prims:
                rules.extend(primitive_to_rules(p, sig))
            out.route = "alba"
            out.primitive = prims
            out.systems = list(res.systems)
            out.rules = _dedupe_rules(rules)
            return out
        except SynthesisError as e:
            out.notes.append(f"ALBA route unavailable ({e}); using inverted Ackermann")
    out.route = "inverted-ackermann"
    systems = quasi_inequalities(ineq, sig, cls.witness)
    out.systems = systems
    rules = []
    for qi in systems:
        rules.extend(quasi_to_rules(qi, sig))
    out.rules = _dedupe_rules(rules)
    return out


def analytic_to_rules(ineq: Inequality, sig: Signature, eps: dict | None = None, route: str = "auto") -> list:
    return synthesize(ineq, sig, eps=eps, route=route).rules


def quasi_inequalities(ineq: Inequality, sig: Signature, witness) -> list:
    """Inverted Ackermann on every attached PIA part, then Ackermann on the
    original variables: one quasi-inequality per preprocessed piece."""
    eps = dict(witness.eps)
    names = {v.name for v in variables(ineq.lhs) + variables(ineq.rhs)}
    fresh = Fresh(names)
    out = []
    for q in preprocess(ineq, sig):
        ts, tt = signed_tree(q.lhs, POS, sig), signed_tree(q.rhs, NEG, sig)
        marks = []
        for side, t in (("lhs", ts), ("rhs", tt)):
            for r in attached_pia_roots(t, max_skeleton(t)):
                if t[r].is_leaf and not t[r].is_var:
                    continue
                marks.append((side, r))
        qi = inverted_ackermann(q, marks, sig, fresh)
        ants = [p for a in qi.antecedents for p in split(a)]
        if len(ants) != len(qi.antecedents):
            qi = qi.step("splitting", ants)
        solved = []
        for a in qi.antecedents:
            side, f, sign = ("rhs", a.rhs, POS) if isinstance(a.lhs, Var) and a.lhs.name not in names \
                else ("lhs", a.lhs, NEG)
            for e in variables(f):
                eps.setdefault(e.name, POS)
            crit = critical_leaves(signed_tree(f, sign, sig), eps)
            if len(crit) > 1:
                raise SynthesisError(f"PIA part {show_ineq(a, sig)} has several critical occurrences")
            solved.append(solve_for(a, side, crit[0], sig) if crit else a)
        if solved != list(qi.antecedents):
            qi = qi.step("adjunction", solved)
        vs = sorted({v.name for a in qi.antecedents for v in variables(a.lhs) + variables(a.rhs)} & names)
        try:
            for p in ackermann_order(vs, witness.omega):
                qi = ackermann(qi, Var(p), "RAR" if eps.get(p, POS) == POS else "LAR", sig)
        except AlbaError as e:
            raise SynthesisError(str(e)) from e
        cl = [Inequality(simplify_constants(a.lhs, sig), simplify_constants(a.rhs, sig)) for a in qi.antecedents]
        cl = [a for a in cl if not trivial(a)]
        concl = Inequality(simplify_constants(qi.conclusion.lhs, sig), simplify_constants(qi.conclusion.rhs, sig))
        out.append(qi.step("constants", cl, concl))
    return out


def quasi_to_rules(qi: QuasiInequality, sig: Signature) -> list:
    """Rules whose premises interpret the antecedents of a quasi-inequality.

    Each antecedent a <= b splits into definite pieces dnf(a) x cnf(b).
    """
    prem = []
    for a in qi.antecedents:
        for x in dnf_left(a.lhs, sig):
            for y in cnf_right(a.rhs, sig):
                prem.append(Sequent(_struct(x, "left", sig), _struct(y, "right", sig)))
    rules = []
    c = qi.conclusion
    for x in dnf_left(c.lhs, sig):
        for y in cnf_right(c.rhs, sig):
            rules.append(StructuralRule(tuple(_uniq(prem)), Sequent(_struct(x, "left", sig),
                                                                    _struct(y, "right", sig))))
    return rules


# ---------------------------------------------------------------- quasi-special to primitive

def quasi_special_to_primitive(ineq: Inequality, sig: Signature) -> Inequality:
    """Equivalent primitive inequality in the residuated language.

    One side is first reduced by residuation to a uniform PIA subterm; the
    uniform parts of the other side are then replaced by fresh variables,
    with the disjunctive (conjunctive) correction terms.
    """
    c = classify_analytic(ineq, sig, only=("quasi-special",))
    if c.cls != "quasi-special":
        raise SynthesisError("not quasi-special inductive")
    eps = dict(c.witness.eps)
    ts, tt = signed_tree(ineq.lhs, POS, sig), signed_tree(ineq.rhs, NEG, sig)
    roots = []
    for side, t in (("rhs", tt), ("lhs", ts)):
        for r in maximal_uniform_subtrees(t, eps):
            if any(t[q].is_var for q in t.below(r)):
                roots.append((side, r))
    if not roots:
        if is_primitive(ineq, sig):
            return ineq
        raise SynthesisError("no uniform part to isolate and the input is not primitive")
    names = {v.name for v in variables(ineq.lhs) + variables(ineq.rhs)}
    last = None
    for side, path in roots:
        target = subterm(ineq.lhs if side == "lhs" else ineq.rhs, path)
        try:
            iso = isolate(ineq, side, path, sig)
        except (AlbaError, KeyError, ValueError) as e:
            last = e
            continue
        if iso.rhs == target:
            out = _prop_left(iso, sig, eps, names)
        elif iso.lhs == target:
            out = _prop_right(iso, sig, eps, names)
        else:
            continue
        out = Inequality(simplify_constants(out.lhs, sig), simplify_constants(out.rhs, sig))
        if is_primitive(out, sig):
            return out
    raise SynthesisError(f"no primitive form found{': ' + str(last) if last else ''}")


def _slots(f, sign, sig, eps, names):
    """Replace maximal uniform subtrees by fresh variables; returns the
    skeleton formula and [(fresh var, subterm, sign)]."""
    t = signed_tree(f, sign, sig)
    fresh = Fresh(names)
    slots = []
    for r in maximal_uniform_subtrees(t, eps):
        if r == () or not any(t[q].is_var for q in t.below(r)):
            continue
        slots.append((r, t[r].sign))
    out = f
    res = []
    for r, s in sorted(slots, key=lambda x: -len(x[0])):
        v = fresh.var("u")
        names.add(v.name)
        res.append((v, subterm(f, r), s))
        out = _replace_formula(out, r, v)
    return out, list(reversed(res))


def _replace_formula(f, path, new):
    if not path:
        return new
    ks = list(kids(f))
    ks[path[0]] = _replace_formula(ks[path[0]], path[1:], new)
    return rebuild(f, ks)


def _corrections(xi, slots):
    out = []
    for v, part, s in slots:
        val = App("coimp_l", (v, part)) if s == POS else App("himp", (part, v))
        out.append(subst(xi, {v: val}))
    return out


def _prop_left(q: Inequality, sig, eps, names) -> Inequality:
    xi1, slots = _slots(q.lhs, POS, sig, eps, set(names))
    return Inequality(xi1, big_join([q.rhs] + _corrections(xi1, slots)))


def _prop_right(q: Inequality, sig, eps, names) -> Inequality:
    xi2, slots = _slots(q.rhs, NEG, sig, eps, set(names))
    return Inequality(big_meet([q.lhs] + _corrections(xi2, slots)), xi2)


# ---------------------------------------------------------------- direct synthesis

def _decomposable(f, pos, sig) -> bool:
    if isinstance(f, (Top, Bot, Meet, Join)):
        return True
    if isinstance(f, App):
        return sig[f.name].family == ("F" if pos == "pre" else "G")
    return False


def _decompose(q: Sequent, sig: Signature) -> list:
    """Invertible logical rules applied exhaustively to formula leaves."""
    out, work = [], [q]
    while work:
        cur = work.pop(0)
        hit = None
        for leaf, pos, side, path in occurrences(cur, sig):
            if isinstance(leaf, FormulaLeaf) and _decomposable(leaf.formula, pos, sig):
                hit = (leaf.formula, pos, side, path)
                break
        if hit is None:
            out.append(cur)
            continue
        f, pos, side, path = hit

        def put(new):
            if side == "ante":
                return Sequent(_put(cur.antecedent, path, new), cur.succedent)
            return Sequent(cur.antecedent, _put(cur.succedent, path, new))

        unit, split_on = (Bot, Join) if pos == "pre" else (Top, Meet)
        if isinstance(f, unit):
            continue
        if isinstance(f, split_on):
            work[0:0] = [put(FormulaLeaf(f.l)), put(FormulaLeaf(f.r))]
            continue
        work.insert(0, put(SOp(sig.struct_of(head(f)), tuple(FormulaLeaf(k) for k in kids(f)))))
    return out


def _formula_vars(q: Sequent, sig):
    return [(leaf.formula.name, pos, side, path) for leaf, pos, side, path in occurrences(q, sig)
            if isinstance(leaf, FormulaLeaf) and isinstance(leaf.formula, Var)]


def _eliminate(prems, p, mode, sig):
    """Cut out variable p. Lower mode: premises with p once in succedent
    position define it (displayed as A |- p); others use p in precedent."""
    want = "suc" if mode == "lower" else "pre"
    defs, users, keep = [], [], []
    for q in prems:
        occ = [o for o in _formula_vars(q, sig) if o[0] == p]
        if not occ:
            keep.append(q)
        elif any(o[1] == want for o in occ):
            if len(occ) != 1:
                return None
            d, side = display(q, occ[0][2], occ[0][3], sig)
            defs.append(d.antecedent if side == "succ" else d.succedent)
        else:
            users.append((q, occ))
    if not defs or not users:
        return frozenset(keep)
    out = set(keep)
    for q, occ in users:
        for combo in itertools.product(defs, repeat=len(occ)):
            cur = q
            for (_, _, side, path), s in zip(occ, combo):
                if side == "ante":
                    cur = Sequent(_put(cur.antecedent, path, s), cur.succedent)
                else:
                    cur = Sequent(cur.antecedent, _put(cur.succedent, path, s))
            out.add(cur)
    return frozenset(out)


def _elim_search(prems: frozenset, sig, limit=2000, memo=None):
    memo = {} if memo is None else memo
    if prems in memo:
        return memo[prems]
    vs = sorted({o[0] for q in prems for o in _formula_vars(q, sig)})
    if not vs:
        return prems
    if len(prems) > limit:
        return None
    memo[prems] = None
    for p in vs:
        for mode in ("lower", "upper"):
            nxt = _eliminate(prems, p, mode, sig)
            if nxt is None:
                continue
            res = _elim_search(nxt, sig, limit, memo)
            if res is not None:
                memo[prems] = res
                return res
    return None


def invertible_synthesis(ineq: Inequality, sig: Signature) -> list:
    """Rules read off the sequent s |- t by invertible logical rules,
    fresh structure variables for the remaining formulas, and cuts on the
    original variables."""
    concls = _decompose(Sequent(FormulaLeaf(ineq.lhs), FormulaLeaf(ineq.rhs)), sig)
    rules = []
    k = 0
    for c in concls:
        prem = []
        sub = {}
        for leaf, pos, side, path in occurrences(c, sig):
            if not isinstance(leaf, FormulaLeaf):
                continue
            k += 1
            x = SVar(f"S{k}")
            sub[(side, path)] = x
            prem.append(Sequent(x, leaf) if pos == "pre" else Sequent(leaf, x))
        for (side, path), x in sub.items():
            c = Sequent(_put(c.antecedent, path, x), c.succedent) if side == "ante" \
                else Sequent(c.antecedent, _put(c.succedent, path, x))
        ps = []
        for p in prem:
            ps.extend(_decompose(p, sig))
        for p in ps:
            for leaf, pos, _, _ in occurrences(p, sig):
                if isinstance(leaf, FormulaLeaf) and not isinstance(leaf.formula, Var):
                    raise NotAnalytic(f"formula {show(leaf.formula, sig)} cannot be decomposed invertibly")
        done = _elim_search(frozenset(ps), sig)
        if done is None:
            raise NotAnalytic("variable elimination is cyclic")
        rules.append(StructuralRule(tuple(sorted(done, key=_seq_key)), c))
    return _dedupe_rules(rules)


# ---------------------------------------------------------------- the calculus DL

def _p(text, sig):
    return parse_sequent(text, sig)


def _r(name, prem, concl, sig):
    return StructuralRule(tuple(_p(p, sig) for p in prem), _p(concl, sig), name)


def display_postulates(sig: Signature) -> list:
    """Both directions of every display postulate of the signature."""
    out = []
    seen = set()
    for c in list(sig.connectives.values()):
        if c.arity == 0:
            continue
        side = "ante" if c.family == "F" else "succ"
        args = tuple(SVar(n) for n in ("X", "Y", "Z", "W", "U", "V")[:c.arity])
        other = SVar("Z1")
        s = SOp(sig.struct_of(c.name), args)
        q = Sequent(s, other) if side == "ante" else Sequent(other, s)
        for i in range(c.arity):
            try:
                d, _ = _step(q, side, i, sig)
            except (NotSided, KeyError, ValueError):
                continue
            for a, b in ((q, d), (d, q)):
                key = (a, b)
                if key in seen:
                    continue
                seen.add(key)
                out.append(canonical_rule(StructuralRule((a,), b, f"display {c.name}/{i + 1}")))
    return out


def dl_structural_rules(sig: Signature) -> list:
    """Identity, exchange, weakening, contraction and associativity rules for
    the lattice structures, plus the display postulates."""
    rules = [
        _r("I_L", ["X |- Y"], "I ; X |- Y", sig), _r("I_L-inv", ["I ; X |- Y"], "X |- Y", sig),
        _r("I_R", ["Y |- X"], "Y |- X ; I", sig), _r("I_R-inv", ["Y |- X ; I"], "Y |- X", sig),
        _r("E_L", ["Y ; X |- Z"], "X ; Y |- Z", sig), _r("E_R", ["Z |- X ; Y"], "Z |- Y ; X", sig),
        _r("W_L", ["Y |- Z"], "X ; Y |- Z", sig), _r("W_R", ["Z |- Y"], "Z |- Y ; X", sig),
        _r("C_L", ["X ; X |- Y"], "X |- Y", sig), _r("C_R", ["Y |- X ; X"], "Y |- X", sig),
        _r("A_L", ["X ; (Y ; Z) |- W"], "(X ; Y) ; Z |- W", sig),
        _r("A_L-inv", ["(X ; Y) ; Z |- W"], "X ; (Y ; Z) |- W", sig),
        _r("A_R", ["W |- (Z ; Y) ; X"], "W |- Z ; (Y ; X)", sig),
        _r("A_R-inv", ["W |- Z ; (Y ; X)"], "W |- (Z ; Y) ; X", sig),
    ]
    return rules + display_postulates(sig)


def violating_rules(sig: Signature) -> dict:
    """Condition -> a rule that fails exactly that condition."""
    return {
        "C1": _r("lose", ["X ; Z |- Y"], "X |- Y", sig),
        "C3": _r("copy", ["X |- Y"], "X ; X |- Y", sig),
        "C4": _r("swap", ["X |- Y"], "Y |- X", sig),
    }

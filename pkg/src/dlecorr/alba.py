"""The ALBA rewriting engine.

A run preprocesses the input, applies the first approximation, reduces each
system with approximation, residuation and adjunction rules, and eliminates
proposition variables with the Ackermann rules. Every rule application is
recorded in the trace of the system it acts on.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .signature import NEG, POS, Signature
from .syntax import (App, Bot, Conominal, Formula, Inequality, Join, Meet, Nominal,
                     Top, Var, atoms, big_join, big_meet, head, kids, mk, positions,
                     rebuild, show, show_ineq, subst, subterm, variables)
from .trees import (DA, SLR, attached_pia_roots, max_skeleton, node_labels,
                    signed_tree, skeleton_label)


class AlbaError(ValueError):
    pass


class ShapeError(AlbaError):
    pass


# ---------------------------------------------------------------- states

@dataclass(frozen=True)
class RuleApplication:
    rule: str
    focus: str = ""
    fresh: tuple = ()
    before: tuple = ()  # (antecedents, conclusion)
    after: tuple = ()

    def record(self, sig=None) -> str:
        fr = ",".join(self.fresh)
        return f"{self.rule}\tfocus={self.focus}\tfresh={fr}\tafter={_show_state(self.after, sig)}"


def _show_state(state, sig=None) -> str:
    if not state:
        return ""
    ants, concl = state
    a = ", ".join(show_ineq(q, sig) for q in ants)
    return "{" + a + "} => " + (show_ineq(concl, sig) if concl is not None else "")


@dataclass
class QuasiInequality:
    antecedents: tuple
    conclusion: Inequality
    trace: list = field(default_factory=list)

    def state(self):
        return (tuple(self.antecedents), self.conclusion)

    def is_pure(self) -> bool:
        return not any(isinstance(a, Var) for q in self.antecedents + (self.conclusion,)
                       for a in atoms(q.lhs) + atoms(q.rhs))

    def variables(self) -> list:
        seen = []
        for q in self.antecedents + (self.conclusion,):
            for v in variables(q.lhs) + variables(q.rhs):
                if v not in seen:
                    seen.append(v)
        return seen

    def show(self, sig=None) -> str:
        return _show_state(self.state(), sig)

    def step(self, rule, antecedents, conclusion=None, focus="", fresh=()):
        """New state after a rule application, with the trace extended."""
        before = self.state()
        out = QuasiInequality(tuple(antecedents), conclusion if conclusion is not None else self.conclusion,
                              list(self.trace))
        out.trace.append(RuleApplication(rule, focus, tuple(fresh), before, out.state()))
        return out


class Fresh:
    """Single monotone counter for all fresh names of a run."""

    def __init__(self, used=()):
        self.n = 0
        self.used = set(used)

    def _next(self, prefix):
        while True:
            self.n += 1
            name = f"{prefix}{self.n}"
            if name not in self.used:
                self.used.add(name)
                return name

    def nominal(self):
        return Nominal(self._next("j"))

    def conominal(self):
        return Conominal(self._next("n"))

    def var(self, prefix="r"):
        return Var(self._next(prefix))


def _names_in(*fs):
    out = set()
    for f in fs:
        for a in atoms(f):
            out.add(a.name)
    return out


# ---------------------------------------------------------------- polarity helpers

def signs_of(f: Formula, sign: int, sig: Signature, name: str) -> set:
    t = signed_tree(f, sign, sig)
    return {t[p].sign for p in t.var_leaves() if t[p].formula.name == name}


def ineq_signs(q: Inequality, sig, name) -> set:
    """Signs of a variable in +lhs and -rhs."""
    return signs_of(q.lhs, POS, sig, name) | signs_of(q.rhs, NEG, sig, name)


def occurs(f: Formula, a) -> bool:
    return a in atoms(f)


# ---------------------------------------------------------------- preprocessing

def simplify_constants(f: Formula, sig: Signature) -> Formula:
    """Normality identities for constants: f(..bot..) = bot, g(..top..) = top,
    and the lattice units."""
    ks = kids(f)
    if not ks:
        return f
    ks = [simplify_constants(k, sig) for k in ks]
    h = head(f)
    if h == "meet":
        a, b = ks
        if isinstance(a, Bot) or isinstance(b, Bot):
            return Bot()
        if isinstance(a, Top):
            return b
        if isinstance(b, Top):
            return a
        return Meet(a, b)
    if h == "join":
        a, b = ks
        if isinstance(a, Top) or isinstance(b, Top):
            return Top()
        if isinstance(a, Bot):
            return b
        if isinstance(b, Bot):
            return a
        return Join(a, b)
    c = sig[h]
    for pol, k in zip(c.order_type, ks):
        if c.family == "F" and isinstance(k, Bot if pol == POS else Top):
            return Bot()
        if c.family == "G" and isinstance(k, Top if pol == POS else Bot):
            return Top()
    return rebuild(f, ks)


def trivial(q: Inequality) -> bool:
    return isinstance(q.lhs, Bot) or isinstance(q.rhs, Top)


def _f_like(f, sign, sig):
    return (sig[head(f)].family == "F") == (sign == POS)


def distribute_skeleton(f: Formula, sign: int, sig: Signature) -> Formula:
    """Push Skeleton SLR nodes below Delta-adjoints (rules 1a-1d)."""
    labels = node_labels(f, sign, sig)
    if not labels or not skeleton_label(labels):
        return f
    ot = sig[head(f)].order_type
    ks = [distribute_skeleton(k, sign * ot[i], sig) for i, k in enumerate(kids(f))]
    f = rebuild(f, ks)
    if SLR not in labels:
        return f
    for i, k in enumerate(ks):
        if DA in node_labels(k, sign * ot[i], sig):
            a, b = kids(k)
            l = distribute_skeleton(rebuild(f, ks[:i] + [a] + ks[i + 1:]), sign, sig)
            r = distribute_skeleton(rebuild(f, ks[:i] + [b] + ks[i + 1:]), sign, sig)
            return Join(l, r) if sig[head(f)].family == "F" else Meet(l, r)
    return f


def _sra_lattice(f, sign):
    return (isinstance(f, Meet) and sign == POS) or (isinstance(f, Join) and sign == NEG)


def distribute_pia(f: Formula, sign: int, sig: Signature, in_pia: bool = False) -> Formula:
    """Surface +meet / -join nodes out of PIA subterms (rules a'-d')."""
    labels = node_labels(f, sign, sig)
    if not labels:
        return f
    here = in_pia or not skeleton_label(labels)
    ot = sig[head(f)].order_type
    ks = [distribute_pia(k, sign * ot[i], sig, here) for i, k in enumerate(kids(f))]
    f = rebuild(f, ks)
    if not here or _f_like(f, sign, sig):
        return f
    for i, k in enumerate(ks):
        if _sra_lattice(k, sign * ot[i]):
            a, b = kids(k)
            l = distribute_pia(rebuild(f, ks[:i] + [a] + ks[i + 1:]), sign, sig, in_pia)
            r = distribute_pia(rebuild(f, ks[:i] + [b] + ks[i + 1:]), sign, sig, in_pia)
            return Meet(l, r) if sig[head(f)].family == "G" else Join(l, r)
    return f


def split(q: Inequality) -> list:
    if isinstance(q.lhs, Join):
        return split(Inequality(q.lhs.l, q.rhs)) + split(Inequality(q.lhs.r, q.rhs))
    if isinstance(q.rhs, Meet):
        return split(Inequality(q.lhs, q.rhs.l)) + split(Inequality(q.lhs, q.rhs.r))
    return [q]


def eliminate_monotone(q: Inequality, sig: Signature):
    """Substitute bot/top for variables of uniform sign; returns (ineq, names)."""
    done = []
    for v in variables(q.lhs) + variables(q.rhs):
        if v.name in done:
            continue
        s = ineq_signs(q, sig, v.name)
        if s == {NEG}:
            q = Inequality(subst(q.lhs, {v: Bot()}), subst(q.rhs, {v: Bot()}))
            done.append(v.name)
        elif s == {POS}:
            q = Inequality(subst(q.lhs, {v: Top()}), subst(q.rhs, {v: Top()}))
            done.append(v.name)
    return q, done



def monotone_normal_form(q: Inequality, sig: Signature) -> Inequality:
    """Eliminate uniform-sign variables and simplify constants to a fixpoint."""
    while True:
        r, _ = eliminate_monotone(q, sig)
        r = Inequality(simplify_constants(r.lhs, sig), simplify_constants(r.rhs, sig))
        if r == q:
            return q
        q = r

@dataclass
class PreprocessLog:
    steps: list = field(default_factory=list)  # (rule, [inequalities before], [after])

    def add(self, rule, before, after):
        if list(before) != list(after):
            self.steps.append((rule, list(before), list(after)))


def preprocess(ineq: Inequality, sig: Signature, constant_rules: bool = True,
               pia_distribution: bool = True, monotone_elimination: bool = True,
               log: PreprocessLog | None = None) -> list:
    log = log if log is not None else PreprocessLog()
    cur = [ineq]
    for _ in range(8):
        prev = cur
        if constant_rules:
            nxt = [Inequality(simplify_constants(q.lhs, sig), simplify_constants(q.rhs, sig)) for q in cur]
            nxt = [q for q in nxt if not trivial(q)]
            log.add("constants", cur, nxt)
            cur = nxt
        nxt = [Inequality(distribute_skeleton(q.lhs, POS, sig), distribute_skeleton(q.rhs, NEG, sig)) for q in cur]
        log.add("distribution", cur, nxt)
        cur = nxt
        if pia_distribution:
            nxt = [Inequality(distribute_pia(q.lhs, POS, sig), distribute_pia(q.rhs, NEG, sig)) for q in cur]
            log.add("pia-distribution", cur, nxt)
            cur = nxt
        nxt = [p for q in cur for p in split(q)]
        log.add("splitting", cur, nxt)
        cur = nxt
        if monotone_elimination:
            nxt = [eliminate_monotone(q, sig)[0] for q in cur]
            log.add("monotone-elimination", cur, nxt)
            cur = nxt
        if cur == prev:
            break
    out = []
    for q in cur:
        if q not in out:
            out.append(q)
    return out


# ---------------------------------------------------------------- basic rules

def first_approximation(ineq: Inequality, fresh: Fresh | None = None) -> QuasiInequality:
    fresh = fresh or Fresh(_names_in(ineq.lhs, ineq.rhs))
    i0, m0 = Nominal("i0"), Conominal("m0")
    fresh.used |= {"i0", "m0"}
    qi = QuasiInequality((), Inequality(i0, m0))
    return qi.step("first-approximation", (Inequality(i0, ineq.lhs), Inequality(ineq.rhs, m0)),
                   Inequality(i0, m0), focus="input", fresh=("i0", "m0"))


def residuate(ineq: Inequality, coordinate: int, sig: Signature, side: str | None = None) -> Inequality:
    """Residuation rule on the lhs (F head) or rhs (G head); coordinate is 1-based."""
    if side is None:
        hl, hr = head(ineq.lhs), head(ineq.rhs)
        if hl and kids(ineq.lhs) and sig[hl].family == "F":
            side = "lhs"
        elif hr and kids(ineq.rhs) and sig[hr].family == "G":
            side = "rhs"
        else:
            raise AlbaError("no residuable head: need an F connective on the left or a G connective on the right")
    f, chi = (ineq.lhs, ineq.rhs) if side == "lhs" else (ineq.rhs, ineq.lhs)
    if not kids(f):
        raise AlbaError(f"{show(f, sig)} has no coordinates")
    c = sig[head(f)]
    if c.family != ("F" if side == "lhs" else "G"):
        raise AlbaError(f"wrong family for residuation on the {side}: {c.name} is in {c.family}")
    i = coordinate - 1
    if not 0 <= i < c.arity:
        raise AlbaError(f"coordinate {coordinate} out of range for {c.sym}")
    res = sig.residual(c.name, i)
    args = list(kids(f))
    target = args[i]
    args[i] = chi
    r = mk(res.name, args)
    pol = c.order_type[i]
    if side == "lhs":
        return Inequality(target, r) if pol == POS else Inequality(r, target)
    return Inequality(r, target) if pol == POS else Inequality(target, r)


def approximate(ineq: Inequality, coordinate: int, fresh: Fresh, sig: Signature):
    """Approximation rule at a 1-based coordinate; returns (main, side, name)."""
    i = coordinate - 1
    if isinstance(ineq.lhs, Nominal):
        f, fam = ineq.rhs, "F"
    elif isinstance(ineq.rhs, Conominal):
        f, fam = ineq.lhs, "G"
    else:
        raise AlbaError("approximation needs a nominal on the left or a conominal on the right")
    if not kids(f) or sig[head(f)].family != fam:
        raise AlbaError(f"approximation needs an {fam} connective at the root of {show(f, sig)}")
    c = sig[head(f)]
    if not 0 <= i < c.arity:
        raise AlbaError(f"coordinate {coordinate} out of range for {c.sym}")
    pol = c.order_type[i]
    use_nominal = (pol == POS) == (fam == "F")
    x = fresh.nominal() if use_nominal else fresh.conominal()
    args = list(kids(f))
    target = args[i]
    args[i] = x
    g = rebuild(f, args)
    main = Inequality(ineq.lhs, g) if fam == "F" else Inequality(g, ineq.rhs)
    side = Inequality(x, target) if use_nominal else Inequality(target, x)
    return main, side, x.name


def approx_structure(q: Inequality, sig: Signature, fresh: Fresh):
    """Display every maximal PIA subterm of the non-nominal side at once.

    Subterms with sign + become nominals j (side condition j <= alpha), those
    with sign - become conominals n (alpha <= n). Constants stay in place.
    """
    side = _approx_side(q)
    if side is None:
        raise AlbaError("approximation needs a nominal on the left or a conominal on the right")
    f = q.rhs if side == "rhs" else q.lhs
    t = signed_tree(f, POS if side == "rhs" else NEG, sig)
    skel = max_skeleton(t)
    roots = [r for r in attached_pia_roots(t, skel)
             if r != () and not (t[r].is_leaf and not isinstance(t[r].formula, Var))]
    sides, names = [], []
    for r in roots:
        alpha = t[r].formula
        if t[r].sign == POS:
            x = fresh.nominal()
            sides.append(Inequality(x, alpha))
        else:
            x = fresh.conominal()
            sides.append(Inequality(alpha, x))
        names.append(x.name)
        f = _replace(f, r, x)
    main = Inequality(q.lhs, f) if side == "rhs" else Inequality(f, q.rhs)
    return main, sides, names


# ---------------------------------------------------------------- LA / RA

def _locate(phi: Formula, x):
    if isinstance(x, tuple):
        return x
    hits = [p for p, g in positions(phi) if g == x]
    if len(hits) != 1:
        raise AlbaError(f"{x.name if hasattr(x, 'name') else x} must occur exactly once, found {len(hits)}")
    return hits[0]


def _la(phi, path, u, sig):
    if not path:
        return u
    c = sig[head(phi)]
    if c.family != "G":
        raise AlbaError(f"LA: {c.sym} is not a positive PIA node")
    j = path[0]
    res = sig.residual(c.name, j)
    args = list(kids(phi))
    child = args[j]
    args[j] = u
    nu = mk(res.name, args)
    return _la(child, path[1:], nu, sig) if c.order_type[j] == POS else _ra(child, path[1:], nu, sig)


def _ra(psi, path, u, sig):
    if not path:
        return u
    c = sig[head(psi)]
    if c.family != "F":
        raise AlbaError(f"RA: {c.sym} is not a negative PIA node")
    j = path[0]
    res = sig.residual(c.name, j)
    args = list(kids(psi))
    child = args[j]
    args[j] = u
    nu = mk(res.name, args)
    return _ra(child, path[1:], nu, sig) if c.order_type[j] == POS else _la(child, path[1:], nu, sig)


def compute_LA(phi: Formula, x, sig: Signature, u: Formula | None = None) -> Formula:
    """LA(phi)(u) for a definite positive PIA phi with x occurring once."""
    return _la(phi, _locate(phi, x), u if u is not None else Var("u"), sig)


def compute_RA(psi: Formula, x, sig: Signature, u: Formula | None = None) -> Formula:
    """RA(psi)(u) for a definite negative PIA psi with x occurring once."""
    return _ra(psi, _locate(psi, x), u if u is not None else Var("u"), sig)


def solve_for(ineq: Inequality, side: str, path, sig: Signature) -> Inequality:
    """Display the occurrence at `path` of the given side via LA/RA."""
    if side == "rhs":
        phi, chi = ineq.rhs, ineq.lhs
        x = subterm(phi, path)
        t = signed_tree(phi, POS, sig)
        sol = _la(phi, path, chi, sig)
        return Inequality(sol, x) if t[path].sign == POS else Inequality(x, sol)
    psi, chi = ineq.lhs, ineq.rhs
    x = subterm(psi, path)
    t = signed_tree(psi, POS, sig)
    sol = _ra(psi, path, chi, sig)
    return Inequality(x, sol) if t[path].sign == POS else Inequality(sol, x)


# ---------------------------------------------------------------- Ackermann

def ackermann(qi: QuasiInequality, p: Var, side: str, sig: Signature) -> QuasiInequality:
    """Eliminate p with RAR (lower bounds) or LAR (upper bounds)."""
    bounds, rest = [], []
    for q in qi.antecedents:
        if side == "RAR" and q.rhs == p and not occurs(q.lhs, p):
            bounds.append(q.lhs)
        elif side == "LAR" and q.lhs == p and not occurs(q.rhs, p):
            bounds.append(q.rhs)
        else:
            rest.append(q)
    want = POS if side == "RAR" else NEG
    for q in rest:
        s = ineq_signs(q, sig, p.name)
        # RAR: beta positive and gamma negative in p, i.e. every sign is +
        if s - {want}:
            raise ShapeError(f"{side} on {p.name}: wrong polarity in {show_ineq(q, sig)}")
    if occurs(qi.conclusion.lhs, p) or occurs(qi.conclusion.rhs, p):
        raise ShapeError(f"{p.name} occurs in the conclusion")
    val = big_join(bounds) if side == "RAR" else big_meet(bounds)
    new = [Inequality(subst(q.lhs, {p: val}), subst(q.rhs, {p: val})) for q in rest]
    return qi.step(side, new, focus=p.name)


def ackermann_order(names, omega) -> list:
    """Omega-minimal first, ties broken by name."""
    left, out = sorted(names), []
    while left:
        ready = [n for n in left if not any((m, n) in omega for m in left if m != n)]
        if not ready:
            raise AlbaError("dependency order is cyclic")
        out.append(ready[0])
        left.remove(ready[0])
    return out


# ---------------------------------------------------------------- inverted Ackermann

def inverted_ackermann(ineq: Inequality, marks, sig: Signature, fresh: Fresh | None = None) -> QuasiInequality:
    """Replace marked subterms by fresh variables.

    `marks` lists (side, path) pairs; a subterm with sign + in +lhs / -rhs
    gets an antecedent r <= alpha, one with sign - gets alpha <= r.
    """
    fresh = fresh or Fresh(_names_in(ineq.lhs, ineq.rhs))
    lhs, rhs = ineq.lhs, ineq.rhs
    ts, tt = signed_tree(lhs, POS, sig), signed_tree(rhs, NEG, sig)
    ants, names = [], []
    subs = {"lhs": [], "rhs": []}
    for side, path in marks:
        t, f = (ts, lhs) if side == "lhs" else (tt, rhs)
        alpha = subterm(f, path)
        r = fresh.var("r")
        names.append(r.name)
        ants.append(Inequality(r, alpha) if t[path].sign == POS else Inequality(alpha, r))
        subs[side].append((path, r))
    for side in ("lhs", "rhs"):
        for path, r in sorted(subs[side], key=lambda x: -len(x[0])):
            if side == "lhs":
                lhs = _replace(lhs, path, r)
            else:
                rhs = _replace(rhs, path, r)
    qi = QuasiInequality((), ineq)
    return qi.step("inverted-ackermann", ants, Inequality(lhs, rhs), focus="marked", fresh=tuple(names))


def _replace(f, path, new):
    if not path:
        return new
    ks = list(kids(f))
    ks[path[0]] = _replace(ks[path[0]], path[1:], new)
    return rebuild(f, ks)


# ---------------------------------------------------------------- results

@dataclass
class Stuck:
    reason: str
    state: QuasiInequality | None = None

    def show(self, sig=None):
        return self.reason + ("" if self.state is None else "\n  at " + self.state.show(sig))


@dataclass
class PureOutput:
    """A pure quasi-inequality, collapsed to an inequality when possible."""
    antecedents: tuple
    inequality: Inequality | None
    system: QuasiInequality

    def show(self, sig=None) -> str:
        names = sorted({a.name for q in self.antecedents + ((self.inequality,) if self.inequality else ())
                        for a in atoms(q.lhs) + atoms(q.rhs)})
        if self.inequality is None:
            return self.system.show(sig)
        body = show_ineq(self.inequality, sig)
        if self.antecedents:
            body = "{" + ", ".join(show_ineq(q, sig) for q in self.antecedents) + "} => " + body
        return (f"forall {' '.join(names)} [" if names else "[") + body + "]"


def collapse(qi: QuasiInequality) -> PureOutput:
    """{i0 <= A, B <= m0, rest} => i0 <= m0 becomes rest => A <= B."""
    i0, m0 = qi.conclusion.lhs, qi.conclusion.rhs
    if not (isinstance(i0, Nominal) and isinstance(m0, Conominal)):
        return PureOutput(qi.antecedents, None, qi)
    if qi.conclusion in qi.antecedents:
        return PureOutput((), Inequality(Top(), Top()), qi)
    As, Bs, rest = [], [], []
    for q in qi.antecedents:
        if q.lhs == i0 and not occurs(q.rhs, i0) and not occurs(q.rhs, m0):
            As.append(q.rhs)
        elif q.rhs == m0 and not occurs(q.lhs, m0) and not occurs(q.lhs, i0):
            Bs.append(q.lhs)
        else:
            rest.append(q)
    if any(occurs(q.lhs, x) or occurs(q.rhs, x) for q in rest for x in (i0, m0)):
        return _collapse_one_side(qi)
    return PureOutput(tuple(rest), Inequality(big_meet(As), big_join(Bs)), qi)


def _collapse_one_side(qi: QuasiInequality) -> PureOutput:
    """{B <= m0, rest} => i0 <= m0 becomes rest => i0 <= B when m0 only occurs
    there, even if i0 occurs in B; dually for i0."""
    i0, m0 = qi.conclusion.lhs, qi.conclusion.rhs
    for x, pick, build in ((m0, lambda q: q.rhs == m0, lambda fs: Inequality(i0, big_join([q.lhs for q in fs]))),
                           (i0, lambda q: q.lhs == i0, lambda fs: Inequality(big_meet([q.rhs for q in fs]), m0))):
        chosen = [q for q in qi.antecedents if pick(q)]
        rest = [q for q in qi.antecedents if not pick(q)]
        other = [q.lhs for q in chosen] if x is m0 else [q.rhs for q in chosen]
        if chosen and not any(occurs(f, x) for f in other) \
                and not any(occurs(q.lhs, x) or occurs(q.rhs, x) for q in rest):
            return PureOutput(tuple(rest), build(chosen), qi)
    return PureOutput(qi.antecedents, None, qi)


@dataclass
class AlbaResult:
    input: Inequality
    route: str
    witness: object = None
    preprocessed: list = field(default_factory=list)
    systems: list = field(default_factory=list)
    stuck: Stuck | None = None
    prelog: PreprocessLog | None = None
    isolated: Inequality | None = None

    @property
    def ok(self) -> bool:
        return self.stuck is None and all(s.is_pure() for s in self.systems)

    def outputs(self) -> list:
        return [collapse(s) for s in self.systems]

    def trace(self) -> list:
        out = []
        for s in self.systems:
            out.extend(s.trace)
        return out

    def report(self, sig=None, trace=False) -> str:
        lines = [f"route: {self.route}"]
        if self.witness is not None and hasattr(self.witness, "describe"):
            lines.append(f"witness: {self.witness.describe()}")
        if self.isolated is not None:
            lines.append(f"adjunction: {show_ineq(self.isolated, sig)}")
        if self.stuck:
            lines.append("stuck: " + self.stuck.show(sig))
            return "\n".join(lines)
        for k, s in enumerate(self.systems):
            if trace:
                for ra in s.trace:
                    lines.append(f"  [{k}] " + ra.record(sig))
            lines.append(collapse(s).show(sig))
        return "\n".join(lines)


# ---------------------------------------------------------------- reduction

def _critical_paths(f, sign, sig, eps):
    t = signed_tree(f, sign, sig)
    return [p for p in t.var_leaves() if t[p].formula.name in eps and t[p].sign == eps[t[p].formula.name]]


def _approx_side(q: Inequality):
    if isinstance(q.lhs, Nominal):
        return "rhs"
    if isinstance(q.rhs, Conominal):
        return "lhs"
    return None


def approximation_phase(qi: QuasiInequality, sig: Signature, eps: dict, fresh: Fresh,
                        everything: bool = False) -> QuasiInequality:
    """Approximate and split along Skeleton nodes.

    By default only coordinates containing critical occurrences are
    approximated; with `everything` all maximal PIA subterms are displayed.
    """
    work = list(qi.antecedents)
    k = 0
    while k < len(work):
        q = work[k]
        side = _approx_side(q)
        f = None if side is None else (q.rhs if side == "rhs" else q.lhs)
        if f is None or not kids(f):
            k += 1
            continue
        fam = "F" if side == "rhs" else "G"
        h = head(f)
        if (side == "rhs" and isinstance(f, Meet)) or (side == "lhs" and isinstance(f, Join)):
            parts = split(q)
            work[k:k + 1] = parts
            qi = qi.step("splitting", work, focus=show_ineq(q, sig))
            continue
        if h in ("meet", "join") or sig[h].family != fam:
            k += 1
            continue
        sign = POS if side == "rhs" else NEG
        crit = _critical_paths(f, sign, sig, eps)
        todo = []
        for i, a in enumerate(kids(f)):
            if isinstance(a, (Top, Bot)) or (isinstance(a, App) and not a.args) or isinstance(a, (Nominal, Conominal)):
                continue
            if everything or any(p[0] == i for p in crit):
                todo.append(i)
        if not todo:
            k += 1
            continue
        cur, sides, names = q, [], []
        for i in todo:
            cur, s, n = approximate(cur, i + 1, fresh, sig)
            sides.append(s)
            names.append(n)
        work[k:k + 1] = [cur] + sides
        qi = qi.step("approximation", work, focus=show_ineq(q, sig), fresh=names)
        k += 1
    return qi


def adjunction_phase(qi: QuasiInequality, sig: Signature, eps: dict) -> QuasiInequality:
    """Solve each displayed PIA subterm for its critical occurrence."""
    work = list(qi.antecedents)
    for k, q in enumerate(list(work)):
        side = _approx_side(q)
        if side is None:
            continue
        f = q.rhs if side == "rhs" else q.lhs
        sign = POS if side == "rhs" else NEG
        crit = _critical_paths(f, sign, sig, eps)
        if not crit or crit == [()]:
            continue
        if len(crit) > 1:
            raise ShapeError(f"{show(f, sig)} has {len(crit)} critical occurrences")
        work[k] = solve_for(q, side, crit[0], sig)
        qi = qi.step("LA" if side == "rhs" else "RA", work, focus=show_ineq(q, sig))
    return qi


def elimination_phase(qi: QuasiInequality, sig: Signature, eps: dict, omega, names=None) -> QuasiInequality:
    names = names if names is not None else [v.name for v in qi.variables()]
    for n in ackermann_order(names, omega):
        p = Var(n)
        if p not in qi.variables():
            continue
        qi = ackermann(qi, p, "RAR" if eps.get(n, POS) == POS else "LAR", sig)
    return qi


def cleanup(qi: QuasiInequality, sig: Signature) -> QuasiInequality:
    ants = []
    for q in qi.antecedents:
        q2 = Inequality(simplify_constants(q.lhs, sig), simplify_constants(q.rhs, sig))
        if trivial(q2) or q2 in ants:
            continue
        ants.append(q2)
    if tuple(ants) != qi.antecedents:
        qi = qi.step("constants", ants)
    return qi


def reduce_system(ineq: Inequality, sig: Signature, eps: dict, omega, fresh: Fresh,
                  everything: bool = False) -> QuasiInequality:
    qi = first_approximation(ineq, fresh)
    qi = approximation_phase(qi, sig, eps, fresh, everything)
    qi = adjunction_phase(qi, sig, eps)
    qi = elimination_phase(qi, sig, eps, omega)
    return cleanup(qi, sig)


# ---------------------------------------------------------------- restricted phase

def _skeleton_path_direct(f, path, sig) -> bool:
    for k in range(len(path)):
        g = subterm(f, path[:k])
        if not sig.has_direct_residual(head(g), path[k]):
            return False
    return True


def isolate(ineq: Inequality, side: str, path, sig: Signature) -> Inequality:
    """Residuate along a Skeleton path until the subterm at `path` stands alone."""
    cur, cur_side, rel = ineq, side, tuple(path)
    while rel:
        f = cur.lhs if cur_side == "lhs" else cur.rhs
        i = rel[0]
        pol = sig[head(f)].order_type[i]
        cur = residuate(cur, i + 1, sig, cur_side)
        rel = rel[1:]
        # an antitone coordinate moves the argument across
        if pol == NEG:
            cur_side = "lhs" if cur_side == "rhs" else "rhs"
    return cur


def restricted_candidates(ineq: Inequality, sig: Signature, witness):
    """Tail PIA subterms to isolate, in trial order."""
    from .trees import eps_dual_uniform
    tail_side = "rhs" if witness.chirality == "left" else "lhs"
    f = ineq.rhs if tail_side == "rhs" else ineq.lhs
    t = signed_tree(f, NEG if tail_side == "rhs" else POS, sig)
    skel = max_skeleton(t)
    roots = [r for r in attached_pia_roots(t, skel) if r != ()]
    uni = [r for r in roots if eps_dual_uniform(t, r, witness.eps) and any(t[q].is_var for q in t.below(r))]
    rest = [r for r in roots if r not in uni]
    ordered = uni + rest
    direct = [r for r in ordered if _skeleton_path_direct(f, r, sig)]
    chained = [r for r in ordered if r not in direct]
    return tail_side, direct + chained


def restricted_phase(ineq: Inequality, sig: Signature, witness):
    """Isolate a tail PIA subterm so that the result is very restricted."""
    from .classify import classify_analytic
    side, cands = restricted_candidates(ineq, sig, witness)
    vr = ("very-restricted-left", "very-restricted-right")
    outs = []
    for path in cands:
        try:
            outs.append(isolate(ineq, side, path, sig))
        except AlbaError:
            # the path crosses a lattice node that only splitting can remove
            continue
    for eps in (witness.eps, None):
        for out in outs:
            c = classify_analytic(out, sig, eps=eps, only=vr)
            if c.cls in vr:
                return out, c.witness
    return None, None


# ---------------------------------------------------------------- driver

def run_alba(ineq: Inequality, sig: Signature, strategy: str = "pipeline", witness=None,
             constant_rules: bool = True, script=None) -> AlbaResult:
    """Reduce an inequality to pure quasi-inequalities.

    The route follows the classification: very restricted inputs display all
    PIA subterms of the head, restricted inputs first isolate a tail subterm
    by adjunction, and other inductive inputs run the standard cycle.
    """
    from .classify import classify_analytic, find_inductive
    if strategy == "interactive-script":
        return run_script(ineq, sig, script or [])
    names = {v.name for v in variables(ineq.lhs) + variables(ineq.rhs)}
    route, cur = "inductive", ineq
    isolated = None
    if witness is None:
        c = classify_analytic(ineq, sig)
        if c.cls.startswith("very-restricted"):
            route, witness = "very-restricted", c.witness
        elif c.cls.startswith("restricted"):
            route, witness = "restricted", c.witness
        else:
            witness = c.witness or find_inductive(ineq, sig)
    elif witness.cls.startswith("very-restricted"):
        route = "very-restricted"
    elif witness.cls.startswith("restricted"):
        route = "restricted"
    if witness is None:
        return AlbaResult(ineq, "none", None, stuck=Stuck("not inductive for any (Omega, eps)"))
    if route == "restricted":
        isolated, w2 = restricted_phase(ineq, sig, witness)
        if isolated is None:
            # restricted inputs are inductive, so the standard cycle applies
            route = "inductive"
        else:
            cur, witness = isolated, w2
    fresh = Fresh(names | _names_in(cur.lhs, cur.rhs))
    log = PreprocessLog()
    pre = preprocess(cur, sig, constant_rules=constant_rules, log=log)
    res = AlbaResult(ineq, route, witness, pre, prelog=log, isolated=isolated)
    eps = dict(witness.eps)
    for q in pre:
        try:
            if route == "inductive":
                qi = reduce_system(q, sig, eps, witness.omega, fresh)
            else:
                qi = _reduce_vr(q, sig, eps, witness, fresh)
        except AlbaError as e:
            res.stuck = Stuck(str(e))
            return res
        if not qi.is_pure():
            res.stuck = Stuck("variables remain after elimination", qi)
            res.systems.append(qi)
            return res
        res.systems.append(qi)
    return res


def _reduce_vr(q: Inequality, sig, eps, witness, fresh) -> QuasiInequality:
    qi = first_approximation(q, fresh)
    # only the head is displayed; the uniform tail waits for Ackermann
    head_idx = 0 if witness.chirality == "left" else 1
    ants = list(qi.antecedents)
    sub = QuasiInequality((ants[head_idx],), qi.conclusion)
    main, sides, names = approx_structure(ants[head_idx], sig, fresh)
    if sides:
        sub = sub.step("approximation", [main] + sides, focus=show_ineq(ants[head_idx], sig), fresh=names)
    sub = adjunction_phase(sub, sig, eps)
    other = ants[1 - head_idx]
    merged = list(sub.antecedents) + [other] if head_idx == 0 else [other] + list(sub.antecedents)
    qi2 = QuasiInequality(tuple(merged), qi.conclusion, list(qi.trace))
    for ra in sub.trace:
        b = (tuple(list(ra.before[0]) + [other]) if head_idx == 0 else tuple([other] + list(ra.before[0])), ra.before[1])
        a = (tuple(list(ra.after[0]) + [other]) if head_idx == 0 else tuple([other] + list(ra.after[0])), ra.after[1])
        qi2.trace.append(RuleApplication(ra.rule, ra.focus, ra.fresh, b, a))
    qi2 = elimination_phase(qi2, sig, eps, witness.omega)
    return cleanup(qi2, sig)


# ---------------------------------------------------------------- scripted runs

def run_script(ineq: Inequality, sig: Signature, script) -> AlbaResult:
    """Apply an explicit list of steps.

    Steps are tuples: ("first-approximation",), ("approximate", k, coord),
    ("residuate", k, coord), ("split", k), ("LA", k, path) / ("RA", k, path),
    ("RAR", var) / ("LAR", var). k indexes the antecedents.
    """
    fresh = Fresh(_names_in(ineq.lhs, ineq.rhs))
    qi = None
    res = AlbaResult(ineq, "script")
    try:
        for st in script:
            name = st[0]
            if name == "first-approximation":
                qi = first_approximation(ineq, fresh)
                continue
            if qi is None:
                raise AlbaError("the script must start with first-approximation")
            ants = list(qi.antecedents)
            if name == "approximate":
                m, s, n = approximate(ants[st[1]], st[2], fresh, sig)
                ants[st[1]:st[1] + 1] = [m, s]
                qi = qi.step("approximation", ants, focus=str(st[1]), fresh=(n,))
            elif name == "residuate":
                ants[st[1]] = residuate(ants[st[1]], st[2], sig)
                qi = qi.step("residuation", ants, focus=str(st[1]))
            elif name == "split":
                ants[st[1]:st[1] + 1] = split(ants[st[1]])
                qi = qi.step("splitting", ants, focus=str(st[1]))
            elif name in ("LA", "RA"):
                ants[st[1]] = solve_for(ants[st[1]], "rhs" if name == "LA" else "lhs", tuple(st[2]), sig)
                qi = qi.step(name, ants, focus=str(st[1]))
            elif name in ("RAR", "LAR"):
                qi = ackermann(qi, Var(st[1]), name, sig)
            else:
                raise AlbaError(f"unknown step {name!r}")
    except AlbaError as e:
        res.stuck = Stuck(str(e), qi)
    if qi is not None:
        res.systems.append(qi)
    if res.stuck is None and qi is not None and not qi.is_pure():
        res.stuck = Stuck("variables remain", qi)
    return res

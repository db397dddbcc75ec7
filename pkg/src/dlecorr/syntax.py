"""Formulas, structural terms, parsing, printing and the l/r translation."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .signature import POS, Signature


class ParseError(ValueError):
    pass


class NotSided(ValueError):
    pass


class NotPrimitive(ValueError):
    pass


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Nominal(Formula):
    name: str


@dataclass(frozen=True)
class Conominal(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Meet(Formula):
    l: Formula
    r: Formula


@dataclass(frozen=True)
class Join(Formula):
    l: Formula
    r: Formula


@dataclass(frozen=True)
class App(Formula):
    name: str
    args: tuple = ()


ATOMS = (Var, Nominal, Conominal)


def head(f: Formula):
    """Connective name at the root, or None for atoms."""
    if isinstance(f, App):
        return f.name
    if isinstance(f, Meet):
        return "meet"
    if isinstance(f, Join):
        return "join"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    return None


def kids(f: Formula) -> tuple:
    if isinstance(f, App):
        return f.args
    if isinstance(f, (Meet, Join)):
        return (f.l, f.r)
    return ()


def mk(name: str, args=()) -> Formula:
    args = tuple(args)
    if name == "meet":
        return Meet(*args)
    if name == "join":
        return Join(*args)
    if name == "top":
        return Top()
    if name == "bot":
        return Bot()
    return App(name, args)


def rebuild(f: Formula, args) -> Formula:
    return mk(head(f), args) if head(f) else f


def big_join(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return Bot()
    out = fs[0]
    for x in fs[1:]:
        out = Join(out, x)
    return out


def big_meet(fs) -> Formula:
    fs = list(fs)
    if not fs:
        return Top()
    out = fs[0]
    for x in fs[1:]:
        out = Meet(out, x)
    return out


def subst(f: Formula, mapping: dict) -> Formula:
    if f in mapping:
        return mapping[f]
    ks = kids(f)
    if not ks:
        return f
    return rebuild(f, [subst(k, mapping) for k in ks])


def atoms(f: Formula) -> list:
    """Atom occurrences in left-to-right order (with repetitions)."""
    if isinstance(f, ATOMS):
        return [f]
    out = []
    for k in kids(f):
        out.extend(atoms(k))
    return out


def variables(f: Formula) -> list:
    """Distinct proposition variables in order of first occurrence."""
    seen = []
    for a in atoms(f):
        if isinstance(a, Var) and a not in seen:
            seen.append(a)
    return seen


def size(f: Formula) -> int:
    return 1 + sum(size(k) for k in kids(f))


def depth(f: Formula) -> int:
    return 1 + max((depth(k) for k in kids(f)), default=0)


def subterm(f: Formula, path) -> Formula:
    for i in path:
        f = kids(f)[i]
    return f


def replace_at(f: Formula, path, new: Formula) -> Formula:
    if not path:
        return new
    ks = list(kids(f))
    ks[path[0]] = replace_at(ks[path[0]], path[1:], new)
    return rebuild(f, ks)


def positions(f: Formula, path=()):
    yield path, f
    for i, k in enumerate(kids(f)):
        yield from positions(k, path + (i,))


def polarity_at(f: Formula, path, sig: Signature) -> int:
    pol = POS
    for i in path:
        pol *= sig[head(f)].order_type[i]
        f = kids(f)[i]
    return pol


@dataclass(frozen=True)
class Inequality:
    lhs: Formula
    rhs: Formula

    def sides(self):
        return (self.lhs, self.rhs)


# ---------------------------------------------------------------- printing

def _is_infix(f: Formula, sig) -> bool:
    h = head(f)
    if h in ("meet", "join"):
        return True
    return h is not None and sig is not None and len(kids(f)) == 2 and bool(sig[h].infix)


def canonical_atoms(q: "Inequality") -> "Inequality":
    """Rename atoms by kind in order of first occurrence (p1.., j1.., n1..)."""
    m, count = {}, {Var: 0, Nominal: 0, Conominal: 0}
    prefix = {Var: "p", Nominal: "j", Conominal: "n"}
    for a in atoms(q.lhs) + atoms(q.rhs):
        if a not in m:
            count[type(a)] += 1
            m[a] = type(a)(f"{prefix[type(a)]}{count[type(a)]}")
    return Inequality(subst(q.lhs, m), subst(q.rhs, m))


def alpha_equal(a: "Inequality", b: "Inequality") -> bool:
    """Equal up to a kind-preserving renaming of atoms."""
    return canonical_atoms(a) == canonical_atoms(b)


def show(f: Formula, sig: Signature | None = None) -> str:
    if isinstance(f, ATOMS):
        return f.name
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"

    def wrap(g):
        s = show(g, sig)
        return f"({s})" if _is_infix(g, sig) else s

    if isinstance(f, Meet):
        return f"{wrap(f.l)} /\\ {wrap(f.r)}"
    if isinstance(f, Join):
        return f"{wrap(f.l)} \\/ {wrap(f.r)}"
    c = sig[f.name] if sig is not None else None
    sym = c.sym if c else f.name
    if c is not None and c.infix and len(f.args) == 2:
        return f"{wrap(f.args[0])} {c.infix} {wrap(f.args[1])}"
    if len(f.args) == 1:
        return f"{sym} {wrap(f.args[0])}"
    return f"{sym}(" + ", ".join(show(a, sig) for a in f.args) + ")"


def show_ineq(q: Inequality, sig=None) -> str:
    return f"{show(q.lhs, sig)} <= {show(q.rhs, sig)}"


def latex(f: Formula, sig: Signature) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, (Nominal, Conominal)):
        return "\\mathbf{" + f.name + "}"
    c = sig[head(f)]
    sym = c.latex or "\\mathrm{" + c.sym.replace("_", "\\_").replace("#", "\\#") + "}"
    if not kids(f):
        return sym

    def wrap(g):
        s = latex(g, sig)
        return f"({s})" if _is_infix(g, sig) else s

    if len(kids(f)) == 2 and (c.infix or head(f) in ("meet", "join")):
        return f"{wrap(kids(f)[0])} {sym} {wrap(kids(f)[1])}"
    if len(kids(f)) == 1:
        return f"{sym} {wrap(kids(f)[0])}"
    return sym + "(" + ", ".join(latex(a, sig) for a in kids(f)) + ")"


# ---------------------------------------------------------------- parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_']*(?:[#@][0-9]+)*"


def _tokenize(text: str, symbols):
    syms = sorted(symbols, key=len, reverse=True)
    alts = [re.escape(s) + (r"(?![A-Za-z0-9_])" if s[-1:].isalnum() else "") for s in syms]
    pat = "|".join(alts + [_IDENT, r"\(", r"\)", ","])
    rx = re.compile(r"\s*(?:(" + pat + r"))")
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = rx.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, sig):
        self.sig = sig
        self.text = text
        toks = sig.infix_tokens() | {"<=", "/\\", "\\/"}
        self.toks = _tokenize(text, toks)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def eat(self, t=None):
        tok = self.peek()
        if tok is None or (t is not None and tok != t):
            raise ParseError(f"expected {t or 'token'} at position {self.pos()}, got {tok!r}")
        self.i += 1
        return tok

    def level(self, tok):
        if tok == "/\\":
            return 3
        if tok == "\\/":
            return 2
        if tok is not None and tok != "<=" and tok in self.sig.infix_tokens():
            return 1
        return None

    def formula(self, minlev=1):
        left = self.unary()
        while True:
            tok = self.peek()
            lev = self.level(tok)
            if lev is None or lev < minlev:
                return left
            self.eat()
            # user infix operators associate to the right, lattice ones to the left
            right = self.formula(lev if lev == 1 else lev + 1)
            if tok == "/\\":
                left = Meet(left, right)
            elif tok == "\\/":
                left = Join(left, right)
            else:
                c = self.sig.by_infix(tok)
                left = mk(c.name, (left, right))

    def unary(self):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input at position {self.pos()}")
        if tok == "(":
            self.eat("(")
            f = self.formula()
            self.eat(")")
            return f
        if tok in ("top", "bot"):
            self.eat()
            return Top() if tok == "top" else Bot()
        if re.fullmatch(_IDENT, tok):
            c = self.sig.by_symbol(tok)
            if c is None and ("#" in tok or "@" in tok):
                c = self.sig.get(tok)
            if c is None:
                self.eat()
                return Var(tok)
            at = self.pos()
            self.eat()
            if c.arity == 0:
                return mk(c.name)
            if self.peek() == "(" and c.arity > 1:
                self.eat("(")
                args = [self.formula()]
                while self.peek() == ",":
                    self.eat(",")
                    args.append(self.formula())
                self.eat(")")
            elif c.arity == 1:
                args = [self.unary()]
            else:
                raise ParseError(f"{c.sym} expects {c.arity} arguments at position {at}")
            if len(args) != c.arity:
                raise ParseError(f"{c.sym} expects {c.arity} arguments, got {len(args)} at position {at}")
            return mk(c.name, args)
        raise ParseError(f"unexpected token {tok!r} at position {self.pos()}")

    def done(self):
        if self.peek() is not None:
            raise ParseError(f"trailing input at position {self.pos()}: {self.peek()!r}")


def parse_formula(text: str, sig: Signature) -> Formula:
    p = _Parser(text, sig)
    f = p.formula()
    p.done()
    return f


def parse_inequality(text: str, sig: Signature) -> Inequality:
    p = _Parser(text, sig)
    lhs = p.formula()
    p.eat("<=")
    rhs = p.formula()
    p.done()
    return Inequality(lhs, rhs)


# ---------------------------------------------------------------- structures

class StructTerm:
    __slots__ = ()


@dataclass(frozen=True)
class SVar(StructTerm):
    name: str


@dataclass(frozen=True)
class FormulaLeaf(StructTerm):
    formula: Formula


@dataclass(frozen=True)
class SOp(StructTerm):
    """Structural connective identified by its struct id; its reading as a
    formula connective depends on the side it occupies."""
    sid: str
    args: tuple = ()


def I():
    return SOp("I")


def Semi(a, b):
    return SOp(";", (a, b))


def Gt(a, b):
    return SOp(">", (a, b))


def Lt(a, b):
    return SOp("<", (a, b))


def H(f, *args, sig=None):
    return SOp(sig.struct_of(f) if sig else f, tuple(args))


K = H


def Hi(f, i, *args, sig=None):
    name = f"{f}#{i}"
    return SOp(sig.struct_of(name) if sig else name, tuple(args))


def Kh(g, h, *args, sig=None):
    name = f"{g}@{h}"
    return SOp(sig.struct_of(name) if sig else name, tuple(args))


@dataclass(frozen=True)
class Sequent:
    antecedent: StructTerm
    succedent: StructTerm


def svars(s: StructTerm) -> list:
    if isinstance(s, SVar):
        return [s]
    if isinstance(s, SOp):
        out = []
        for a in s.args:
            out.extend(svars(a))
        return out
    return []


def smap(s: StructTerm, fn):
    if isinstance(s, SVar):
        return fn(s)
    if isinstance(s, SOp):
        return SOp(s.sid, tuple(smap(a, fn) for a in s.args))
    return s


def var_of_struct(name: str) -> str:
    return name.lower()


def struct_of_var(name: str) -> str:
    return name[:1].upper() + name[1:]


def reading_of(sid: str, fam: str, sig: Signature):
    """Reading of a struct id in a family; deep residual ids resolve by name."""
    name = sig.reading(sid, fam)
    if name is None:
        c = sig.get(sid)
        if c is not None and c.family == fam:
            name = c.name
    return name


def _interpret(s: StructTerm, sig: Signature, fam: str) -> Formula:
    if isinstance(s, SVar):
        return Var(var_of_struct(s.name))
    if isinstance(s, FormulaLeaf):
        return s.formula
    name = reading_of(s.sid, fam, sig)
    if name is None:
        side = "precedent" if fam == "F" else "succedent"
        raise NotSided(f"structure {show_struct(s, sig)!r} cannot occur in {side} position")
    c = sig[name]
    if c.arity != len(s.args):
        raise NotSided(f"arity mismatch at {show_struct(s, sig)!r}")
    args = []
    for pol, a in zip(c.order_type, s.args):
        args.append(_interpret(a, sig, fam if pol == POS else ("G" if fam == "F" else "F")))
    return mk(name, args)


def left_interpret(s: StructTerm, sig: Signature) -> Formula:
    return _interpret(s, sig, "F")


def right_interpret(s: StructTerm, sig: Signature) -> Formula:
    return _interpret(s, sig, "G")


def is_sided(s: StructTerm, sig: Signature, side: str) -> bool:
    try:
        _interpret(s, sig, "F" if side == "left" else "G")
        return True
    except NotSided:
        return False


def structure_of(f: Formula, side: str, sig: Signature) -> StructTerm:
    """The maps l^-1 (side='left') and r^-1 (side='right')."""
    fam = "F" if side == "left" else "G"
    if isinstance(f, Var):
        return SVar(struct_of_var(f.name))
    if isinstance(f, (Nominal, Conominal)):
        raise NotPrimitive(f"nominal {f.name} in primitive formula")
    c = sig[head(f)]
    if c.family != fam:
        kind = "left" if side == "left" else "right"
        raise NotPrimitive(f"{show(f, sig)!r} is not definite {kind}-primitive")
    args = []
    for pol, a in zip(c.order_type, kids(f)):
        args.append(structure_of(a, side if pol == POS else ("right" if side == "left" else "left"), sig))
    return SOp(sig.struct_of(c.name), tuple(args))


def show_struct(s: StructTerm, sig: Signature) -> str:
    if isinstance(s, SVar):
        return s.name
    if isinstance(s, FormulaLeaf):
        return "{" + show(s.formula, sig) + "}"
    g = sig.glyph(s.sid)

    def wrap(a):
        t = show_struct(a, sig)
        return f"({t})" if isinstance(a, SOp) and len(a.args) >= 2 else t

    if not s.args:
        return g
    if len(s.args) == 1:
        sep = " " if g[-1:].isalnum() else ""
        return g + sep + wrap(s.args[0])
    if len(s.args) == 2:
        return f"{wrap(s.args[0])} {g} {wrap(s.args[1])}"
    return g + "(" + ", ".join(show_struct(a, sig) for a in s.args) + ")"


def show_sequent(q: Sequent, sig: Signature) -> str:
    return f"{show_struct(q.antecedent, sig)} |- {show_struct(q.succedent, sig)}"


def _glyph_table(sig: Signature):
    table = {}
    for sid, readings in sig.struct_table().items():
        g = sig.glyph(sid)
        arity = sig[next(iter(readings.values()))].arity
        prim = any(sig[n].origin == "primitive" for n in readings.values())
        if g in table and not prim:
            continue
        table[g] = (sid, arity)
    return table


class _SParser:
    def __init__(self, text, sig):
        self.sig = sig
        self.text = text
        self.glyphs = _glyph_table(sig)
        self.toks = _tokenize(text, set(self.glyphs) | {"|-"})
        self.i = 0

    peek = _Parser.peek
    pos = _Parser.pos
    eat = _Parser.eat

    def struct(self):
        left = self.unary()
        tok = self.peek()
        if tok in self.glyphs and self.glyphs[tok][1] == 2:
            self.eat()
            right = self.struct()
            return SOp(self.glyphs[tok][0], (left, right))
        return left

    def unary(self):
        tok = self.peek()
        if tok == "(":
            self.eat("(")
            s = self.struct()
            self.eat(")")
            return s
        if tok in self.glyphs:
            sid, ar = self.glyphs[tok]
            self.eat()
            if ar == 0:
                return SOp(sid)
            if ar == 1:
                return SOp(sid, (self.unary(),))
            self.eat("(")
            args = [self.struct()]
            while self.peek() == ",":
                self.eat(",")
                args.append(self.struct())
            self.eat(")")
            return SOp(sid, tuple(args))
        if tok is not None and re.fullmatch(_IDENT, tok) and tok[0].isupper():
            self.eat()
            return SVar(tok)
        raise ParseError(f"unexpected token {tok!r} at position {self.pos()}")


def parse_sequent(text: str, sig: Signature) -> Sequent:
    p = _SParser(text, sig)
    a = p.struct()
    p.eat("|-")
    b = p.struct()
    if p.peek() is not None:
        raise ParseError(f"trailing input at position {p.pos()}")
    return Sequent(a, b)


def parse_struct(text: str, sig: Signature) -> StructTerm:
    p = _SParser(text, sig)
    s = p.struct()
    if p.peek() is not None:
        raise ParseError(f"trailing input at position {p.pos()}")
    return s

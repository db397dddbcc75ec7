"""DLE signatures and their residual expansion.

A signature is a pair (F, G) of connective families. F connectives preserve
finite joins in coordinates of polarity 1 and reverse meets in coordinates of
polarity d; G connectives are the order dual. The expansion adds, for every
connective and coordinate, the residual in that coordinate.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

POS = 1
NEG = -1

LATTICE_NAMES = ("top", "bot", "meet", "join", "himp", "himp_l", "coimp", "coimp_l")
RESERVED = set(LATTICE_NAMES) | {"I"}


class SignatureError(ValueError):
    pass


def pol_str(p: int) -> str:
    return "1" if p == POS else "d"


def parse_pol(x) -> int:
    if x in (1, "1", "+", POS):
        return POS
    if x in (-1, "d", "D", "∂", "-", "dual"):
        return NEG
    raise SignatureError(f"bad polarity {x!r}")


@dataclass(frozen=True)
class OrderType:
    entries: tuple

    def __post_init__(self):
        for e in self.entries:
            if e not in (POS, NEG):
                raise SignatureError(f"bad polarity {e!r}")

    @classmethod
    def of(cls, *xs):
        return cls(tuple(parse_pol(x) for x in xs))

    def opposite(self) -> "OrderType":
        return OrderType(tuple(-e for e in self.entries))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return "(" + ",".join(pol_str(e) for e in self.entries) + ")"


def residual_order_type(ot: OrderType, i: int) -> OrderType:
    """Order type of the residual in coordinate i (0-based)."""
    if ot[i] == POS:
        return OrderType(tuple(e if k == i else -e for k, e in enumerate(ot)))
    return ot


def residual_family(family: str, ot: OrderType, i: int) -> str:
    if family == "F":
        return "G" if ot[i] == POS else "F"
    return "F" if ot[i] == POS else "G"


@dataclass(frozen=True)
class Connective:
    name: str
    family: str
    order_type: OrderType
    origin: str = "primitive"  # primitive | residual | lattice
    parent: str | None = None
    coord: int | None = None  # 0-based residual coordinate
    symbol: str | None = None
    infix: str | None = None
    glyph: str | None = None
    latex: str | None = None
    struct: str | None = None

    @property
    def arity(self) -> int:
        return len(self.order_type)

    @property
    def sym(self) -> str:
        return self.symbol or self.name

    def __post_init__(self):
        if self.family not in ("F", "G"):
            raise SignatureError(f"{self.name}: family must be F or G")


def _lattice():
    T = OrderType.of
    return {
        "top": Connective("top", "F", T(), "lattice", symbol="top", glyph="I", latex="\\top", struct="I"),
        "bot": Connective("bot", "G", T(), "lattice", symbol="bot", glyph="I", latex="\\bot", struct="I"),
        "meet": Connective("meet", "F", T(1, 1), "lattice", infix="/\\", glyph=";", latex="\\wedge", struct=";"),
        "join": Connective("join", "G", T(1, 1), "lattice", infix="\\/", glyph=";", latex="\\vee", struct=";"),
    }


def _lattice_residuals():
    T = OrderType.of
    return {
        "himp": Connective("himp", "G", T("d", 1), "residual", "meet", 1, infix="->", glyph=">",
                           latex="\\rightarrow", struct=">"),
        "himp_l": Connective("himp_l", "G", T(1, "d"), "residual", "meet", 0, infix="<-", glyph="<",
                             latex="\\leftarrow", struct="<"),
        "coimp": Connective("coimp", "F", T("d", 1), "residual", "join", 1, infix=">-", glyph=">",
                            latex="\\mbox{$\\,>\\mkern-8mu\\raisebox{-0.065ex}{\\aol}\\,$}", struct=">"),
        "coimp_l": Connective("coimp_l", "F", T(1, "d"), "residual", "join", 0, infix="-<", glyph="<",
                              latex="\\mbox{$\\,-{\\mkern-3mu\\raisebox{-0.065ex}{\\rule[0.5865ex]{1.38ex}{0.1ex}}\\mkern-3mu<}\\,$}",
                              struct="<"),
    }


# residual of a lattice connective at a coordinate; every entry keeps the
# argument order of the input with the bound in the residuated slot
_LATTICE_RES = {
    ("meet", 0): "himp_l", ("meet", 1): "himp",
    ("join", 0): "coimp_l", ("join", 1): "coimp",
    ("himp", 0): "himp", ("himp", 1): "meet",
    ("himp_l", 0): "meet", ("himp_l", 1): "himp_l",
    ("coimp", 0): "coimp", ("coimp", 1): "join",
    ("coimp_l", 0): "join", ("coimp_l", 1): "coimp_l",
}


def residual_name(c: Connective, i: int) -> str:
    return f"{c.name}{'#' if c.family == 'F' else '@'}{i + 1}"


@dataclass(frozen=True)
class Signature:
    connectives: dict = field(default_factory=dict)
    dual_pairs: frozenset = frozenset()
    expanded: bool = False
    depth: int = 0
    overrides: tuple = ()  # (residual name, display-override dict) pairs

    # lookups -------------------------------------------------------------
    def __contains__(self, name):
        return name in self.connectives

    def __getitem__(self, name) -> Connective:
        c = self.get(name)
        if c is None:
            raise SignatureError(f"unknown connective {name!r}")
        return c

    def get(self, name):
        c = self.connectives.get(name)
        if c is not None:
            return c
        # residuals of residuals are resolved on demand from their names
        m = re.fullmatch(r"(.+)([#@])(\d+)", name)
        if not m:
            return None
        base = self.get(m.group(1))
        if base is None or (m.group(2) == "#") != (base.family == "F"):
            return None
        i = int(m.group(3)) - 1
        if not 0 <= i < base.arity:
            return None
        return make_residual(base, i, self)

    @property
    def F(self):
        return [c for c in self.connectives.values() if c.family == "F"]

    @property
    def G(self):
        return [c for c in self.connectives.values() if c.family == "G"]

    def user(self):
        return [c for c in self.connectives.values() if c.origin == "primitive"]

    def by_symbol(self, sym: str):
        for c in self.connectives.values():
            if c.sym == sym or c.name == sym:
                return c
        return None

    def by_infix(self, tok: str):
        # user declarations win over the built-in lattice tokens
        hit = None
        for c in self.connectives.values():
            if c.infix == tok:
                if c.origin != "lattice" and not (c.origin == "residual" and c.parent in ("meet", "join")):
                    return c
                hit = hit or c
        return hit

    def infix_tokens(self):
        return {c.infix for c in self.connectives.values() if c.infix}

    # residuals -----------------------------------------------------------
    def residual(self, name: str, i: int) -> Connective:
        """Residual of connective `name` in 0-based coordinate i."""
        c = self[name]
        if not 0 <= i < c.arity:
            raise SignatureError(f"{name}: coordinate {i + 1} out of range")
        if (name, i) in _LATTICE_RES:
            return self[_LATTICE_RES[(name, i)]]
        if c.origin == "residual" and c.coord == i:
            return self[c.parent]
        rname = residual_name(c, i)
        if rname in self.connectives:
            return self.connectives[rname]
        canon = self.canonical_name(rname)
        if canon != rname:
            return self[canon]
        return make_residual(c, i, self)

    def _roles(self, name: str):
        """(primitive ancestor, role of each argument and of the output).

        Taking the residual in coordinate i swaps the roles of argument i and
        the output, so two names with equal roles denote the same operation.
        """
        c = self[name]
        if c.origin != "residual":
            return c.name, tuple(range(c.arity + 1))
        base, roles = self._roles(c.parent)
        r = list(roles)
        r[c.coord], r[-1] = r[-1], r[c.coord]
        return base, tuple(r)

    def canonical_name(self, name: str) -> str:
        """Shortest residual chain from the primitive ancestor with the same roles."""
        cache = self.__dict__.setdefault("_canon", {})
        if name in cache:
            return cache[name]
        base, roles = self._roles(name)
        out, frontier = name, [base]
        arity = len(roles) - 1
        for _ in range(2 * (arity + 1)):
            nxt = []
            for n in frontier:
                if self._roles(n)[1] == roles:
                    out = n
                    break
                c = self[n]
                nxt += [residual_name(c, k) for k in range(arity) if not (c.origin == "residual" and c.coord == k)]
            else:
                frontier = nxt
                continue
            break
        cache[name] = out
        return out

    def has_direct_residual(self, name: str, i: int) -> bool:
        c = self[name]
        if (name, i) in _LATTICE_RES:
            return True
        if c.origin == "residual" and c.coord == i:
            return True
        return residual_name(c, i) in self.connectives

    # structural connectives ----------------------------------------------
    def struct_table(self):
        """struct id -> {'F': name, 'G': name}"""
        out = {}
        for c in self.connectives.values():
            sid = c.struct or c.name
            out.setdefault(sid, {})[c.family] = c.name
        return out

    def struct_of(self, name: str) -> str:
        c = self[name]
        return c.struct or c.name

    def glyph(self, sid: str) -> str:
        for c in self.connectives.values():
            if (c.struct or c.name) == sid and c.glyph:
                return c.glyph
        return "{" + sid + "}"

    def reading(self, sid: str, family: str):
        return self.struct_table().get(sid, {}).get(family)

    def with_connectives(self, extra):
        d = dict(self.connectives)
        for c in extra:
            d[c.name] = c
        return replace(self, connectives=d)


def make_residual(c: Connective, i: int, sig: Signature | None = None) -> Connective:
    ot = residual_order_type(c.order_type, i)
    fam = residual_family(c.family, c.order_type, i)
    name = residual_name(c, i)
    struct = name
    if sig is not None:
        for f, g in sig.dual_pairs:
            if c.name == g:
                struct = residual_name(sig[f], i)
    return Connective(name, fam, ot, "residual", c.name, i, struct=struct)


def validate(sig: Signature):
    for c in sig.connectives.values():
        if c.origin == "primitive" and c.name in RESERVED:
            raise SignatureError(f"reserved name {c.name!r}")
    for f, g in sig.dual_pairs:
        cf, cg = sig[f], sig[g]
        if cf.family != "F" or cg.family != "G":
            raise SignatureError(f"dual pair ({f},{g}) must be (F, G)")
        if cf.order_type != cg.order_type:
            raise SignatureError(f"dual pair ({f},{g}) order types differ")
    syms = {}
    for c in sig.connectives.values():
        if c.sym in syms and syms[c.sym] != c.name:
            raise SignatureError(f"symbol collision {c.sym!r}")
        syms[c.sym] = c.name


def base_signature(user=(), dual_pairs=()) -> Signature:
    conns = _lattice()
    for c in user:
        if c.name in conns or c.name in RESERVED:
            raise SignatureError(f"name collision or reserved name {c.name!r}")
        conns[c.name] = c
    pairs = frozenset(tuple(p) for p in dual_pairs)
    for f, g in pairs:
        if g in conns and f in conns:
            conns[g] = replace(conns[g], struct=conns[f].struct or f)
            if conns[g].glyph and not conns[f].glyph:
                conns[f] = replace(conns[f], glyph=conns[g].glyph)
    sig = Signature(conns, pairs)
    validate(sig)
    return sig


def expand(sig: Signature, depth: int = 1, names: dict | None = None) -> Signature:
    """Add lattice residuals and one layer of residuals of user connectives.

    `names` optionally maps a residual name (e.g. "box@1") to a dict of display
    overrides (symbol, glyph, latex, infix).
    """
    if sig.expanded and sig.depth >= depth:
        return sig
    conns = dict(sig.connectives)
    for k, v in _lattice_residuals().items():
        conns.setdefault(k, v)
    layer = [c for c in sig.connectives.values() if c.origin == "primitive"]
    cur = replace(sig, connectives=conns)
    for _ in range(depth):
        new = []
        for c in layer:
            for i in range(c.arity):
                if c.origin == "residual" and c.coord == i:
                    continue
                r = make_residual(c, i, cur)
                if r.name not in conns:
                    new.append(r)
        for r in new:
            conns[r.name] = r
        cur = replace(cur, connectives=dict(conns))
        layer = new
    names = dict(sig.overrides) | (names or {})
    for n, over in names.items():
        if n in conns:
            conns[n] = replace(conns[n], **over)
    # residuals of dual pairs share a glyph
    for f, g in sig.dual_pairs:
        for i in range(sig[f].arity):
            rf, rg = residual_name(sig[f], i), residual_name(sig[g], i)
            if rf in conns and rg in conns:
                gl = conns[rf].glyph or conns[rg].glyph
                conns[rf] = replace(conns[rf], glyph=gl)
                conns[rg] = replace(conns[rg], glyph=gl, struct=conns[rf].struct)
    out = Signature(conns, sig.dual_pairs, True, depth, sig.overrides)
    validate(out)
    return out


def load_signature(source) -> Signature:
    """Load a signature from a JSON string, dict or path.

    Schema: {"connectives": [{"name", "family", "arity", "order_type",
    "symbol"?, "infix"?, "glyph"?, "latex"?, "dual_of"?, "residuals"?}]}
    where "residuals" maps a 1-based coordinate to display overrides for the
    residual in that coordinate. A bare list or a name-keyed mapping is also
    accepted. The result is not expanded.
    """
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        source = Path(source).read_text()
    doc = json.loads(source) if isinstance(source, str) else source
    if isinstance(doc, dict) and "connectives" in doc:
        entries = doc["connectives"]
    elif isinstance(doc, dict):
        entries = [dict(v, name=k) for k, v in doc.items()]
    else:
        entries = doc
    user, pairs, seen = [], [], set()
    for e in entries:
        name = e["name"]
        if name in seen:
            raise SignatureError(f"duplicate connective {name!r}")
        seen.add(name)
        if name in RESERVED:
            raise SignatureError(f"reserved name {name!r}")
        ot = OrderType.of(*e.get("order_type", []))
        if "arity" in e and e["arity"] != len(ot):
            raise SignatureError(f"{name}: order type length {len(ot)} != arity {e['arity']}")
        user.append(Connective(name, e["family"], ot, "primitive", symbol=e.get("symbol"),
                               infix=e.get("infix"), glyph=e.get("glyph"), latex=e.get("latex")))
        if e.get("dual_of"):
            pairs.append((name, e["dual_of"]) if e["family"] == "F" else (e["dual_of"], name))
    sig = base_signature(user, pairs)
    names = {}
    for e in entries:
        for k, over in (e.get("residuals") or {}).items():
            c = sig[e["name"]]
            names[residual_name(c, int(k) - 1)] = over
    return replace(sig, overrides=tuple(names.items()))


def full(sig: Signature, depth: int = 1) -> Signature:
    """Loaded signature with the default one-layer expansion applied."""
    return expand(sig, depth)

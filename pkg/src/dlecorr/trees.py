"""Signed generation trees and their Skeleton/PIA classification.

Nodes are addressed by paths (tuples of child indices) from the root.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .signature import POS, Signature
from .syntax import Formula, Var, head, kids, show

DA, SLR, SRR, SRA = "DA", "SLR", "SRR", "SRA"
SKELETON = frozenset({DA, SLR})
PIA = frozenset({SRA, SRR})


def sign_str(s: int) -> str:
    return "+" if s == POS else "-"


def node_labels(f: Formula, sign: int, sig: Signature) -> frozenset:
    """Admissible labels of a signed node; empty for leaves."""
    h = head(f)
    if h is None or not kids(f):
        return frozenset()
    if h == "join":
        return frozenset({DA, SRR}) if sign == POS else frozenset({SLR, SRA})
    if h == "meet":
        return frozenset({SLR, SRA}) if sign == POS else frozenset({DA, SRR})
    c = sig[h]
    if (c.family == "F") == (sign == POS):
        return frozenset({SLR})
    return frozenset({SRA}) if c.arity == 1 else frozenset({SRR})


def pia_label(labels) -> str | None:
    for x in (SRR, SRA):
        if x in labels:
            return x
    return None


def skeleton_label(labels) -> str | None:
    for x in (DA, SLR):
        if x in labels:
            return x
    return None


@dataclass(frozen=True)
class SignedNode:
    path: tuple
    sign: int
    formula: Formula
    labels: frozenset

    @property
    def is_leaf(self):
        return not self.labels

    @property
    def is_var(self):
        return isinstance(self.formula, Var)


@dataclass
class SignedTree:
    formula: Formula
    sign: int
    sig: Signature
    nodes: dict = field(default_factory=dict)

    def __getitem__(self, path) -> SignedNode:
        return self.nodes[path]

    def leaves(self):
        return [p for p, n in self.nodes.items() if n.is_leaf]

    def var_leaves(self):
        return [p for p, n in self.nodes.items() if n.is_var]

    def children(self, path):
        return [path + (i,) for i in range(len(kids(self.nodes[path].formula)))]

    def ancestors(self, path):
        """Proper ancestors, nearest first."""
        return [path[:k] for k in range(len(path) - 1, -1, -1)]

    def below(self, path):
        return [p for p in self.nodes if p[:len(path)] == path]

    def flipped(self) -> "SignedTree":
        return signed_tree(self.formula, -self.sign, self.sig)


def signed_tree(f: Formula, sign: int, sig: Signature) -> SignedTree:
    t = SignedTree(f, sign, sig)

    def go(g, s, path):
        t.nodes[path] = SignedNode(path, s, g, node_labels(g, s, sig))
        ks = kids(g)
        if not ks:
            return
        ot = sig[head(g)].order_type
        for i, k in enumerate(ks):
            go(k, s * ot[i], path + (i,))

    go(f, sign, ())
    return t


# ---------------------------------------------------------------- criticality

def is_critical(node: SignedNode, eps: dict) -> bool:
    if not node.is_var:
        return False
    name = node.formula.name
    if name not in eps:
        raise KeyError(f"variable {name} missing from order type")
    return node.sign == eps[name]


def critical_leaves(t: SignedTree, eps: dict) -> list:
    return [p for p in t.var_leaves() if is_critical(t[p], eps)]


def eps_dual_uniform(t: SignedTree, path, eps: dict) -> bool:
    """The subtree at path agrees with the dual of eps: no critical leaf."""
    return not any(is_critical(t[p], eps) for p in t.below(path) if t[p].is_var)


def uniform_in(t: SignedTree, p, sign: int) -> bool:
    name = p.name if isinstance(p, Var) else p
    return all(t[q].sign == sign for q in t.var_leaves() if t[q].formula.name == name)


def var_signs(t: SignedTree) -> dict:
    out = {}
    for q in t.var_leaves():
        out.setdefault(t[q].formula.name, set()).add(t[q].sign)
    return out


# ---------------------------------------------------------------- labelling

def max_skeleton(t: SignedTree) -> frozenset:
    """Nodes that are Skeleton-capable together with all their ancestors."""
    out = set()
    for p, n in t.nodes.items():
        if n.is_leaf:
            continue
        if all(skeleton_label(t[a].labels) for a in t.ancestors(p) + [p]):
            out.add(p)
    return frozenset(out)


def labelling(t: SignedTree, skel) -> dict:
    """Concrete labels from a Skeleton region; None marks an impossible node."""
    out = {}
    for p, n in t.nodes.items():
        if n.is_leaf:
            continue
        out[p] = skeleton_label(n.labels) if p in skel else pia_label(n.labels)
    return out


def is_good_branch(t: SignedTree, leaf, labels: dict | None = None):
    """Good-branch test with a witnessing label choice for the branch.

    With `labels` given, the choice is checked rather than searched.
    """
    branch = t.ancestors(leaf)  # nearest first
    if labels is not None:
        seq = [labels.get(p) for p in branch]
        if None in seq:
            return False, None
        k = 0
        while k < len(seq) and seq[k] in PIA:
            k += 1
        ok = all(x in SKELETON for x in seq[k:])
        return ok, ({p: labels[p] for p in branch} if ok else None)
    # P1 is as short as possible: the split point is the lowest node
    # from which everything above is Skeleton-capable
    for k in range(len(branch) + 1):
        low, high = branch[:k], branch[k:]
        if all(pia_label(t[p].labels) for p in low) and all(skeleton_label(t[p].labels) for p in high):
            w = {p: pia_label(t[p].labels) for p in low}
            w.update({p: skeleton_label(t[p].labels) for p in high})
            return True, w
    return False, None


def all_branches_good(t: SignedTree, skel) -> bool:
    return all(p in skel or pia_label(n.labels) for p, n in t.nodes.items() if not n.is_leaf)


def skeleton_options(t: SignedTree, limit: int = 12):
    """Top-closed Skeleton regions worth trying, the maximal one first.

    Beyond the maximal region, a lattice node may be demoted to PIA when its
    whole subtree is PIA-capable; demotion takes the subtree with it.
    """
    top = max_skeleton(t)
    cuttable = [p for p in sorted(top, key=lambda q: (len(q), q))
                if head(t[p].formula) in ("meet", "join")
                and all(t[q].is_leaf or pia_label(t[q].labels) for q in t.below(p))]
    cuttable = cuttable[:limit]
    seen, out = set(), []
    for r in range(len(cuttable) + 1):
        for cut in itertools.combinations(cuttable, r):
            s = frozenset(p for p in top if not any(p[:len(c)] == c for c in cut))
            if s not in seen:
                seen.add(s)
                out.append(s)
    return out


def attached_pia_roots(t: SignedTree, skel) -> list:
    """Roots of the maximal PIA subtrees hanging off the Skeleton."""
    if () not in skel:
        return [()]
    out = []
    for p in sorted(skel):
        for c in t.children(p):
            if c not in skel:
                out.append(c)
    return out


# ---------------------------------------------------------------- inductive

@dataclass
class TreeCheck:
    ok: bool
    pairs: frozenset = frozenset()  # required (smaller, larger) Omega pairs
    reason: str = ""
    labels: dict = field(default_factory=dict)


def inductive_check(t: SignedTree, eps: dict, skel) -> TreeCheck:
    """Clauses of the inductive definition for a fixed Skeleton region.

    Returns the Omega pairs the SRR side conditions require.
    """
    labels = labelling(t, skel)
    pairs = set()
    for leaf in critical_leaves(t, eps):
        pi = t[leaf].formula.name
        ok, _ = is_good_branch(t, leaf, labels)
        if not ok:
            return TreeCheck(False, reason=f"critical branch to {sign_str(t[leaf].sign)}{pi} at {leaf} is not good")
        prev = leaf
        for a in t.ancestors(leaf):
            if a in skel:
                break
            if labels[a] == SRR:
                for c in t.children(a):
                    if c == prev:
                        continue
                    if not eps_dual_uniform(t, c, eps):
                        return TreeCheck(False, reason=f"SRR node {a} has a non-uniform side subtree {c}")
                    for q in t.below(c):
                        if t[q].is_var:
                            pairs.add((t[q].formula.name, pi))
            prev = a
    return TreeCheck(True, frozenset(pairs), labels=labels)


def maximal_uniform_subtrees(t: SignedTree, eps: dict) -> list:
    out = []
    for p in t.nodes:
        if not eps_dual_uniform(t, p, eps):
            continue
        if p == () or not eps_dual_uniform(t, p[:-1], eps):
            out.append(p)
    return sorted(out)


def restricted_clause(t: SignedTree, eps: dict, skel, labels) -> str:
    """Empty string when every maximal uniform subtree hangs off an SRR node
    lying on a critical branch below the Skeleton."""
    for p in maximal_uniform_subtrees(t, eps):
        # constants are absorbed by the constant rules and do not count
        if not any(t[q].is_var for q in t.below(p)):
            continue
        if p == ():
            return "the whole tree is uniform"
        par = p[:-1]
        if par in skel or labels.get(par) != SRR:
            return f"uniform subtree at {p} is not below an SRR node of a critical branch"
    return ""


def transitive_closure(pairs) -> frozenset:
    rel = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return frozenset(rel)


def is_strict_order(rel) -> bool:
    """True if the transitive closure of `rel` is irreflexive."""
    return all(a != b for a, b in transitive_closure(rel))


# ---------------------------------------------------------------- dumps

def to_text(t: SignedTree, labels: dict | None = None) -> str:
    lines = []
    for p in sorted(t.nodes, key=lambda q: q):
        n = t[p]
        h = head(n.formula)
        name = show(n.formula, t.sig) if n.is_leaf else (t.sig[h].sym if h not in ("meet", "join") else
                                                          ("/\\" if h == "meet" else "\\/"))
        lab = labels.get(p) if labels else "/".join(sorted(n.labels))
        lines.append("  " * len(p) + f"{sign_str(n.sign)}{name}" + (f"  [{lab}]" if lab else ""))
    return "\n".join(lines)


def to_dot(t: SignedTree, labels: dict | None = None) -> str:
    def nid(p):
        return "n" + "_".join(str(i) for i in p) if p else "root"

    out = ["digraph T {"]
    for p in sorted(t.nodes):
        n = t[p]
        h = head(n.formula)
        name = show(n.formula, t.sig) if n.is_leaf else t.sig[h].sym
        lab = labels.get(p) if labels else "/".join(sorted(n.labels))
        text = f"{sign_str(n.sign)}{name}" + (f"\\n{lab}" if lab else "")
        out.append(f'  {nid(p)} [label="{text}"];')
        if p:
            out.append(f"  {nid(p[:-1])} -> {nid(p)};")
    out.append("}")
    return "\n".join(out)

"""Equidistant rooted trees, ultrametrics, rooted triplets and nestings.

Tree space coordinates are indexed by unordered taxon pairs in
lexicographic order, so an ultrametric on ``n`` taxa is a vector of
length ``n(n-1)/2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .bigm import BigM, ZERO, as_bigm, parse_bigm

__all__ = [
    "NewickError",
    "TreeError",
    "UltrametricError",
    "Node",
    "PhyloTree",
    "Ultrametric",
    "Triplet",
    "parse_newick",
    "parse_newick_file",
    "write_newick",
    "tree_to_ultrametric",
    "ultrametric_to_tree",
    "find_ultrametric_violation",
    "is_ultrametric",
    "rooted_triplets",
    "displays_nesting",
    "pair_index",
]

TAXON_RE = re.compile(r"[A-Za-z0-9_.\-]+")
_LENGTH_CHARS = set("0123456789+-/*M")


class NewickError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class TreeError(ValueError):
    """Structurally valid tree that breaks a modelling assumption."""


class UltrametricError(ValueError):
    def __init__(self, message: str, witness: tuple[str, str, str] | None = None):
        self.witness = witness
        super().__init__(message)


@dataclass(eq=False)
class Node:
    name: str | None = None
    length: BigM = ZERO
    children: list["Node"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def leaf_names(self) -> list[str]:
        return [leaf.name for leaf in self.leaves()]

    def copy(self) -> "Node":
        return Node(self.name, self.length, [c.copy() for c in self.children])


class PhyloTree:
    """Rooted equidistant tree; the constructor checks every invariant."""

    def __init__(self, root: Node, *, source: str | None = None):
        self.root = root
        self.source = source
        names = root.leaf_names()
        seen = set()
        for name in names:
            if name is None or not TAXON_RE.fullmatch(name):
                raise TreeError(f"invalid taxon label {name!r}")
            if name in seen:
                raise TreeError(f"duplicate taxon {name!r}")
            seen.add(name)
        for node in self._nodes():
            if node is not root and node.length < ZERO:
                raise TreeError(f"negative edge length {node.length}")
        dist = self.root_distances()
        lo = min(dist, key=lambda k: (dist[k], k))
        hi = max(dist, key=lambda k: (dist[k], k))
        if dist[lo] != dist[hi]:
            raise TreeError(
                f"tree is not equidistant: leaf {lo} at root distance {dist[lo]}, "
                f"leaf {hi} at root distance {dist[hi]}"
            )
        self._height = dist[lo]

    def _nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def root_distances(self) -> dict[str, BigM]:
        out = {}
        stack = [(self.root, ZERO)]
        while stack:
            node, d = stack.pop()
            if node.is_leaf:
                out[node.name] = d
            for c in node.children:
                stack.append((c, d + c.length))
        return out

    @property
    def height(self) -> BigM:
        return self._height

    @property
    def taxa(self) -> tuple[str, ...]:
        return tuple(sorted(self.root.leaf_names()))

    def canonical(self) -> "PhyloTree":
        """Collapse zero-length internal edges and unary nodes, sort children."""
        return PhyloTree(_canonical_node(self.root, is_root=True), source=self.source)

    def scaled(self, factor) -> "PhyloTree":
        root = self.root.copy()
        stack = [root]
        while stack:
            node = stack.pop()
            node.length = node.length * Fraction(factor)
            stack.extend(node.children)
        root.length = ZERO
        return PhyloTree(root, source=self.source)

    def at(self, m0) -> "PhyloTree":
        root = self.root.copy()
        stack = [root]
        while stack:
            node = stack.pop()
            node.length = node.length.at(m0)
            stack.extend(node.children)
        return PhyloTree(root, source=self.source)

    def newick(self, fmt: Callable[[BigM], str] = str) -> str:
        return write_newick(self, fmt)

    def __eq__(self, other):
        if not isinstance(other, PhyloTree):
            return NotImplemented
        return self.canonical().newick() == other.canonical().newick()

    def __hash__(self):
        return hash(self.canonical().newick())

    def __repr__(self):
        return f"PhyloTree({self.newick()})"


def _min_taxon(node: Node) -> str:
    return min(node.leaf_names())


def _canonical_node(node: Node, is_root: bool = False) -> Node:
    if node.is_leaf:
        return Node(node.name, node.length)
    kids: list[Node] = []
    for child in node.children:
        c = _canonical_node(child)
        if not c.is_leaf and c.length == ZERO:
            kids.extend(c.children)
        else:
            kids.append(c)
    if len(kids) == 1:
        only = kids[0]
        merged = Node(only.name, only.length + node.length, only.children)
        if is_root:
            merged.length = ZERO
        return merged
    kids.sort(key=_min_taxon)
    return Node(None, ZERO if is_root else node.length, kids)


# -- Newick -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def error(self, msg):
        raise NewickError(msg, self.i)

    def skip(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip()
        return self.s[self.i] if self.i < len(self.s) else ""

    def parse(self) -> Node:
        root = self.subtree()
        if self.peek() == ":":
            self.i += 1
            root.length = self.length()
        if self.peek() != ";":
            self.error("expected ';'")
        self.i += 1
        if self.peek():
            self.error("trailing characters after ';'")
        root.length = ZERO
        return root

    def subtree(self) -> Node:
        if self.peek() == "(":
            self.i += 1
            children = [self.edge()]
            while self.peek() == ",":
                self.i += 1
                children.append(self.edge())
            if self.peek() != ")":
                self.error("expected ',' or ')'")
            self.i += 1
            node = Node(None, ZERO, children)
            # internal labels are accepted and dropped
            self.label(optional=True)
            return node
        return Node(self.label(optional=False))

    def edge(self) -> Node:
        node = self.subtree()
        if self.peek() != ":":
            what = f"leaf {node.name!r}" if node.is_leaf else "internal edge"
            self.error(f"missing branch length for {what}")
        self.i += 1
        node.length = self.length()
        return node

    def label(self, optional: bool):
        self.skip()
        m = TAXON_RE.match(self.s, self.i)
        if not m:
            if optional:
                return None
            self.error("expected a taxon label")
        self.i = m.end()
        return m.group()

    def length(self) -> BigM:
        self.skip()
        start = self.i
        while self.i < len(self.s) and self.s[self.i] in _LENGTH_CHARS:
            self.i += 1
        token = self.s[start:self.i]
        try:
            return parse_bigm(token)
        except ValueError:
            raise NewickError(f"bad branch length {token!r}", start) from None


def parse_newick_raw(text: str) -> Node:
    return _Parser(text.strip()).parse()


def parse_newick(text: str) -> PhyloTree:
    """Parse one ``;``-terminated Newick tree with lengths on every edge."""
    return PhyloTree(parse_newick_raw(text), source=text.strip())


def parse_newick_file(text: str) -> list[PhyloTree]:
    """One tree per non-blank line; errors carry the 1-based line number."""
    trees = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            trees.append(parse_newick(line))
        except ValueError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    return trees


def write_newick(tree: PhyloTree, fmt: Callable[[BigM], str] = str) -> str:
    def emit(node: Node, out: list[str]):
        if node.is_leaf:
            out.append(node.name)
        else:
            out.append("(")
            for k, child in enumerate(node.children):
                if k:
                    out.append(",")
                emit(child, out)
                out.append(":")
                out.append(fmt(child.length))
            out.append(")")

    parts: list[str] = []
    emit(tree.root, parts)
    parts.append(";")
    return "".join(parts)


# -- ultrametrics -----------------------------------------------------------

def pair_index(taxa: Sequence[str]) -> list[tuple[str, str]]:
    return list(combinations(sorted(taxa), 2))


class Ultrametric:
    """Symmetric dissimilarity over sorted taxa with zero diagonal.

    The constructor does not enforce the ultrametric inequality; use
    :func:`is_ultrametric` or :func:`find_ultrametric_violation`.
    """

    __slots__ = ("taxa", "_d")

    def __init__(self, taxa: Iterable[str], values: Mapping[tuple[str, str], object]):
        self.taxa = tuple(sorted(taxa))
        if len(set(self.taxa)) != len(self.taxa):
            raise ValueError("duplicate taxa")
        known = set(self.taxa)
        d = {}
        for (a, b), v in values.items():
            if a not in known or b not in known:
                raise KeyError(f"unknown taxon in pair ({a}, {b})")
            if a == b:
                if as_bigm(v) != ZERO:
                    raise ValueError(f"nonzero diagonal entry for {a}")
                continue
            key = (a, b) if a < b else (b, a)
            val = as_bigm(v)
            if key in d and d[key] != val:
                raise ValueError(f"asymmetric entries for {key}")
            d[key] = val
        missing = [p for p in combinations(self.taxa, 2) if p not in d]
        if missing:
            raise ValueError(f"missing distance for pair {missing[0]}")
        self._d = d

    @classmethod
    def from_vector(cls, taxa: Iterable[str], values: Sequence) -> "Ultrametric":
        pairs = pair_index(list(taxa))
        if len(pairs) != len(values):
            raise ValueError(f"expected {len(pairs)} pair values, got {len(values)}")
        return cls([t for t in sorted(taxa)], dict(zip(pairs, values)))

    def __call__(self, a: str, b: str) -> BigM:
        if a == b:
            if a not in self.taxa:
                raise KeyError(a)
            return ZERO
        return self._d[(a, b) if a < b else (b, a)]

    def pairs(self) -> list[tuple[str, str]]:
        return list(combinations(self.taxa, 2))

    def vector(self) -> tuple[BigM, ...]:
        return tuple(self._d[p] for p in self.pairs())

    def items(self):
        return ((p, self._d[p]) for p in self.pairs())

    def max_entry(self) -> BigM:
        return max(self._d.values(), default=ZERO)

    def norm1(self) -> Fraction:
        """Sum of absolute values over the full symmetric matrix (numeric only)."""
        total = Fraction(0)
        for v in self._d.values():
            if not v.is_constant:
                raise ValueError("1-norm of a non-constant dissimilarity")
            total += abs(v.const)
        return 2 * total

    def restrict(self, taxa: Iterable[str]) -> "Ultrametric":
        keep = sorted(set(taxa))
        return Ultrametric(keep, {p: self(*p) for p in combinations(keep, 2)})

    def at(self, m0) -> "Ultrametric":
        return Ultrametric(self.taxa, {p: v.at(m0) for p, v in self._d.items()})

    def shifted(self, c: BigM) -> "Ultrametric":
        return Ultrametric(self.taxa, {p: v + c for p, v in self._d.items()})

    def as_dict(self, fmt: Callable[[BigM], str] = str) -> dict:
        return {
            "taxa": list(self.taxa),
            "matrix": [[fmt(self(a, b)) for b in self.taxa] for a in self.taxa],
        }

    def __eq__(self, other):
        if not isinstance(other, Ultrametric):
            return NotImplemented
        return self.taxa == other.taxa and self._d == other._d

    def __hash__(self):
        return hash((self.taxa, self.vector()))

    def __repr__(self):
        body = ", ".join(f"{a}{b}={v}" for (a, b), v in self.items())
        return f"Ultrametric({body})"


def find_ultrametric_violation(D: Ultrametric) -> tuple[str, str, str] | None:
    """A triple ``(i, j, k)`` with ``D(i,k) > max(D(i,j), D(j,k))``, or None.

    A negative entry ``D(i,j)`` is reported as the degenerate triple ``(i, j, j)``.
    """
    for (a, b), v in D.items():
        if v < ZERO:
            return (a, b, b)
    for a, b, c in combinations(D.taxa, 3):
        ab, ac, bc = D(a, b), D(a, c), D(b, c)
        if ac > max(ab, bc):
            return (a, b, c)
        if ab > max(ac, bc):
            return (a, c, b)
        if bc > max(ab, ac):
            return (b, a, c)
    return None


def is_ultrametric(D: Ultrametric) -> bool:
    return find_ultrametric_violation(D) is None


def tree_to_ultrametric(T: PhyloTree) -> Ultrametric:
    """Leaf-to-leaf path lengths: twice the age of the lowest common ancestor."""
    values: dict[tuple[str, str], BigM] = {}

    def walk(node: Node) -> tuple[list[str], BigM]:
        if node.is_leaf:
            return [node.name], ZERO
        groups = []
        age = None
        for child in node.children:
            names, child_age = walk(child)
            groups.append(names)
            if age is None:
                age = child_age + child.length
        d = age * 2
        for g1, g2 in combinations(groups, 2):
            for a in g1:
                for b in g2:
                    values[(a, b) if a < b else (b, a)] = d
        return [n for g in groups for n in g], age

    walk(T.root)
    return Ultrametric(T.taxa, values)


def ultrametric_to_tree(D: Ultrametric) -> PhyloTree:
    """Single-linkage reconstruction; internal nodes sit at half their merge value."""
    witness = find_ultrametric_violation(D)
    if witness is not None:
        a, b, c = witness
        if b == c:
            raise UltrametricError(f"negative distance between {a} and {b}", witness)
        raise UltrametricError(
            f"ultrametric inequality fails: D({a},{c}) = {D(a, c)} > "
            f"max(D({a},{b}), D({b},{c})) = max({D(a, b)}, {D(b, c)})",
            witness,
        )
    if len(D.taxa) < 2:
        raise UltrametricError("need at least two taxa")
    clusters: dict[str, tuple[Node, BigM]] = {t: (Node(t), ZERO) for t in D.taxa}
    owner = {t: t for t in D.taxa}
    for delta in sorted(set(D.vector())):
        parent = {c: c for c in clusters}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (a, b), v in D.items():
            if v == delta:
                ra, rb = find(owner[a]), find(owner[b])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict[str, list[str]] = {}
        for c in clusters:
            groups.setdefault(find(c), []).append(c)
        age = delta / 2
        for rep, members in groups.items():
            if len(members) < 2:
                continue
            kids = []
            for c in sorted(members):
                node, child_age = clusters.pop(c)
                node.length = age - child_age
                kids.append(node)
            clusters[rep] = (Node(None, ZERO, kids), age)
            for t in D.taxa:
                if owner[t] in members:
                    owner[t] = rep
    if len(clusters) != 1:
        raise UltrametricError("dissimilarity does not merge into a single tree")
    (root, _), = clusters.values()
    root.length = ZERO
    return PhyloTree(root).canonical()


# -- triplets and nestings ---------------------------------------------------

class Triplet(NamedTuple):
    """``a b | c``: ``a`` and ``b`` are closer to each other than to ``c`` (a < b)."""

    a: str
    b: str
    c: str

    def __str__(self):
        return f"{self.a},{self.b}|{self.c}"


def rooted_triplets(D: Ultrametric) -> frozenset[Triplet]:
    out = set()
    for a, b, c in combinations(D.taxa, 3):
        ab, ac, bc = D(a, b), D(a, c), D(b, c)
        if ab < ac and ab < bc:
            out.add(Triplet(a, b, c))
        elif ac < ab and ac < bc:
            out.add(Triplet(a, c, b))
        elif bc < ab and bc < ac:
            out.add(Triplet(b, c, a))
    return frozenset(out)


def _max_within(D: Ultrametric, X: Sequence[str]) -> BigM:
    # a single taxon has no pairs; its cluster sits at height 0
    return max((D(a, b) for a, b in combinations(sorted(X), 2)), default=ZERO)


def displays_nesting(D: Ultrametric, X: Iterable[str], Y: Iterable[str]) -> bool:
    """Whether ``lca(X)`` is a strict descendant of ``lca(X | Y)``."""
    X, Y = set(X), set(Y)
    if not X or not Y:
        raise ValueError("nesting sides must be nonempty")
    known = set(D.taxa)
    unknown = sorted((X | Y) - known)
    if unknown:
        raise KeyError(f"unknown taxon {unknown[0]!r}")
    return _max_within(D, sorted(X)) < _max_within(D, sorted(X | Y))

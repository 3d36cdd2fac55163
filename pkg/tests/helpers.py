"""Random instance generators and independent reference checks for tests."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from tropical_supertree.bigm import BigM, as_bigm
from tropical_supertree.phylo import Node, PhyloTree, Triplet, Ultrametric

TAXA = [chr(ord("a") + k) for k in range(26)]


def random_equidistant_tree(rng: random.Random, taxa, height=None) -> PhyloTree:
    """Random tree with distinct rational merge ages; multifurcations allowed."""
    taxa = list(taxa)
    height = Fraction(rng.randint(2, 20) if height is None else height)
    clusters = [(Node(t), Fraction(0)) for t in taxa]
    rng.shuffle(clusters)
    ages = sorted({Fraction(rng.randint(1, 39), 40) * height for _ in range(len(taxa))})
    while len(clusters) > 1:
        if len(clusters) == 2 or not ages:
            age, k = height, len(clusters)
        else:
            age, k = ages.pop(0), rng.randint(2, min(3, len(clusters) - 1))
        picked, rest = clusters[:k], clusters[k:]
        for node, a in picked:
            node.length = age - a
        rest.insert(rng.randint(0, len(rest)), (Node(None, BigM(0), [n for n, _ in picked]), age))
        clusters = rest
    root, _ = clusters[0]
    _to_bigm(root)
    root.length = BigM(0)
    return PhyloTree(root)


def _to_bigm(node):
    node.length = as_bigm(node.length)
    for c in node.children:
        _to_bigm(c)


def random_ultrametric(rng: random.Random, taxa) -> Ultrametric:
    """Ultrametric built from a random hierarchy with equal-value ties allowed."""
    taxa = sorted(taxa)
    groups = [[t] for t in taxa]
    level = Fraction(0)
    values = {}
    while len(groups) > 1:
        level += Fraction(rng.randint(1, 6), rng.randint(1, 3))
        k = rng.randint(2, len(groups))
        rng.shuffle(groups)
        merged, groups = groups[:k], groups[k:]
        for g1, g2 in combinations(merged, 2):
            for a in g1:
                for b in g2:
                    values[(a, b)] = level
        groups.append([t for g in merged for t in g])
    return Ultrametric(taxa, values)


def lca_triplets(tree: PhyloTree) -> frozenset:
    """Rooted triplets by comparing lowest common ancestors on the tree itself."""
    parent = {}
    depth = {}

    def walk(node, p, d):
        parent[id(node)] = p
        depth[id(node)] = d
        for c in node.children:
            walk(c, node, d + 1)

    walk(tree.root, None, 0)
    leaf = {n.name: n for n in tree.root.leaves()}

    def ancestors(n):
        out = []
        while n is not None:
            out.append(n)
            n = parent[id(n)]
        return out

    def lca(a, b):
        anc = {id(x) for x in ancestors(leaf[a])}
        for x in ancestors(leaf[b]):
            if id(x) in anc:
                return x
        raise AssertionError

    out = set()
    for a, b, c in combinations(sorted(leaf), 3):
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            l_xy = lca(x, y)
            # xy|z iff lca(x,y) lies strictly below lca(x,y,z)
            if depth[id(l_xy)] > depth[id(lca(x, z))] and depth[id(l_xy)] > depth[id(lca(y, z))]:
                out.add(Triplet(x, y, z))
    return frozenset(out)


def random_supertree_instance(rng: random.Random, n_trees, n_taxa, min_cover=3, height=None):
    """Trees on random subsets covering all taxa, all of one height."""
    taxa = TAXA[:n_taxa]
    height = Fraction(rng.randint(4, 12)) if height is None else height
    while True:
        subsets = [
            sorted(rng.sample(taxa, rng.randint(min_cover, n_taxa))) for _ in range(n_trees)
        ]
        if set().union(*subsets) == set(taxa):
            break
    return [random_equidistant_tree(rng, s, height) for s in subsets]


def restricted_instance(rng: random.Random, n_trees, n_taxa, min_cover=3):
    """Restrictions of one random tree to subsets that keep its root, so inputs agree a lot."""
    from tropical_supertree.phylo import tree_to_ultrametric, ultrametric_to_tree

    taxa = TAXA[:n_taxa]
    ref = random_equidistant_tree(rng, taxa, Fraction(rng.randint(4, 12)))
    D = tree_to_ultrametric(ref)
    top = D.max_entry()
    while True:
        subsets = []
        while len(subsets) < n_trees:
            s = sorted(rng.sample(taxa, rng.randint(min_cover, n_taxa)))
            if D.restrict(s).max_entry() == top:
                subsets.append(s)
        if set().union(*subsets) == set(taxa):
            break
    return [ultrametric_to_tree(D.restrict(s)) for s in subsets]

"""Tropical supertrees: Fermat-Weber medians of big-M-extended ultrametrics.

Each input tree is turned into an ultrametric on the combined taxa by
filling every pair it does not cover with ``M``.  The tropical median of
those points is an ultrametric again, and its tree is the supertree.  By
default ``M`` stays symbolic, so the result is the one valid for every
sufficiently large ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .bigm import BigM, M, ZERO
from .fermat_weber import FermatWeberResult, InternalError, fermat_weber, stabilization_threshold
from .phylo import (
    PhyloTree,
    Triplet,
    TreeError,
    Ultrametric,
    displays_nesting,
    find_ultrametric_violation,
    rooted_triplets,
    tree_to_ultrametric,
    ultrametric_to_tree,
)
from .tropical import CovectorGraph, PointConfig

__all__ = [
    "SupertreeProblem",
    "SupertreeResult",
    "AuditReport",
    "ProbeReport",
    "combined_taxa",
    "extend_ultrametric",
    "explicit_big_m",
    "family_threshold",
    "tropical_supertree",
    "tropical_consensus",
    "pareto_audit",
    "topology_stability_probe",
]


def combined_taxa(trees: Iterable[PhyloTree]) -> tuple[str, ...]:
    return tuple(sorted({t for tree in trees for t in tree.taxa}))


def extend_ultrametric(tree: PhyloTree, taxa: Sequence[str], big: BigM = M) -> Ultrametric:
    """The tree's ultrametric on ``taxa``, with ``big`` on every pair it does not cover."""
    own = tree.taxa
    extra = set(own) - set(taxa)
    if extra:
        raise TreeError(f"taxon {sorted(extra)[0]!r} is not among the combined taxa")
    D = tree_to_ultrametric(tree)
    inside = set(own)
    values = {}
    for i, a in enumerate(sorted(taxa)):
        for b in sorted(taxa)[i + 1:]:
            values[(a, b)] = D(a, b) if a in inside and b in inside else big
    return Ultrametric(taxa, values)


def explicit_big_m(trees: Sequence[PhyloTree]) -> Fraction:
    """``2^(m + C(n,2) - 1) * sum_k ||D_k||_1 + 1`` over full symmetric distance matrices."""
    if not trees:
        raise ValueError("need at least one tree")
    n = len(combined_taxa(trees))
    total = sum(tree_to_ultrametric(t).norm1() for t in trees)
    return Fraction(2) ** (len(trees) + comb(n, 2) - 1) * total + 1


def family_threshold(config: PointConfig) -> Fraction | None:
    """Stabilization bound for the affine family behind ``config``; None if ``W`` is not integral."""
    try:
        return stabilization_threshold(config.U, config.W)
    except ValueError:
        return None


@dataclass(frozen=True)
class SupertreeProblem:
    """Input trees plus the value used for ``M`` (None keeps it symbolic)."""

    trees: tuple[PhyloTree, ...]
    at: Fraction | None = None
    rescale_heights: bool = False

    def __init__(self, trees: Iterable[PhyloTree], at=None, rescale_heights: bool = False):
        object.__setattr__(self, "trees", tuple(trees))
        object.__setattr__(self, "at", None if at is None else Fraction(at))
        object.__setattr__(self, "rescale_heights", rescale_heights)

    @property
    def taxa(self) -> tuple[str, ...]:
        return combined_taxa(self.trees)

    def prepared_trees(self) -> list[PhyloTree]:
        """Validated input trees, rescaled to a common height when requested."""
        trees = list(self.trees)
        if not trees:
            raise TreeError("no input trees")
        for k, t in enumerate(trees, 1):
            if len(t.taxa) < 2:
                raise TreeError(f"tree {k} has fewer than two taxa")
        heights = [t.height for t in trees]
        top = max(heights)
        if self.rescale_heights:
            out = []
            for k, (t, h) in enumerate(zip(trees, heights), 1):
                if h == top:
                    out.append(t)
                    continue
                if not (h.is_constant and top.is_constant) or h == ZERO:
                    raise TreeError(f"tree {k}: cannot rescale height {h} to {top}")
                out.append(t.scaled(top.const / h.const))
            trees = out
        else:
            for k, h in enumerate(heights, 1):
                if h != heights[0]:
                    raise TreeError(
                        f"tree {k} has height {h}, tree 1 has height {heights[0]} "
                        "(use --rescale-heights)"
                    )
        if self.at is not None:
            trees = [t.at(self.at) for t in trees]
        return trees


@dataclass
class SupertreeResult:
    supertree: PhyloTree
    median: Ultrametric
    taxa: tuple[str, ...]
    config: PointConfig | None
    fw: FermatWeberResult | None
    threshold: Fraction | None
    explicit_M: Fraction | None
    at: Fraction | None = None

    @property
    def graph(self) -> CovectorGraph | None:
        return self.fw.graph if self.fw else None

    @property
    def objective(self) -> BigM:
        return self.fw.objective if self.fw else ZERO

    def triplets(self) -> frozenset[Triplet]:
        return rooted_triplets(self.median)


def tropical_supertree(problem: SupertreeProblem, jobs: int = 1) -> SupertreeResult:
    trees = problem.prepared_trees()
    taxa = combined_taxa(trees)
    if len(taxa) < 2:
        raise TreeError("fewer than two combined taxa")
    big = M if problem.at is None else BigM(problem.at)
    rows = [extend_ultrametric(t, taxa, big) for t in trees]
    # representative of the median whose largest entry matches the inputs'
    top = max(D.max_entry() for D in rows)

    fw = None
    config = None
    if len(taxa) == 2:
        median_vec = (top,)
    else:
        config = PointConfig(D.vector() for D in rows)
        fw = fermat_weber(config, jobs=jobs)
        median_vec = fw.median.coords
    shift = top - max(median_vec)
    median = Ultrametric.from_vector(taxa, [c + shift for c in median_vec])
    witness = find_ultrametric_violation(median)
    if witness is not None:
        raise InternalError(f"tropical median is not an ultrametric (triple {witness})")
    supertree = ultrametric_to_tree(median)

    threshold = None
    if config is not None:
        sym = PointConfig(extend_ultrametric(t, taxa, M).vector() for t in _symbolic_inputs(problem))
        threshold = family_threshold(sym)
    try:
        explicit = explicit_big_m(_symbolic_inputs(problem))
    except ValueError:
        explicit = None
    return SupertreeResult(supertree, median, taxa, config, fw, threshold, explicit, problem.at)


def _symbolic_inputs(problem: SupertreeProblem) -> list[PhyloTree]:
    return SupertreeProblem(problem.trees, None, problem.rescale_heights).prepared_trees()


def tropical_consensus(problem: SupertreeProblem, jobs: int = 1) -> SupertreeResult:
    """Supertree restricted to inputs that all share one taxa set."""
    trees = list(problem.trees)
    for k, t in enumerate(trees[1:], 2):
        if t.taxa != trees[0].taxa:
            missing = sorted(set(trees[0].taxa) ^ set(t.taxa))
            raise TreeError(f"tree {k} does not share the taxa of tree 1 (differs in {missing[0]!r})")
    return tropical_supertree(problem, jobs=jobs)


# -- audits -----------------------------------------------------------------

@dataclass
class AuditEntry:
    kind: str  # "triplet" or "nesting"
    label: str
    common: bool
    displayed: bool

    @property
    def ok(self) -> bool:
        return self.displayed or not self.common


@dataclass
class AuditReport:
    entries: list[AuditEntry] = field(default_factory=list)

    @property
    def failures(self) -> list[AuditEntry]:
        return [e for e in self.entries if not e.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        out = []
        for e in self.entries:
            if not e.common:
                status = "skip"
            else:
                status = "pass" if e.displayed else "FAIL"
            out.append(f"{e.kind} {e.label} {status}")
        return out


def _nesting_label(X, Y) -> str:
    return "{" + ",".join(sorted(X)) + "}<{" + ",".join(sorted(Y)) + "}"


def pareto_audit(
    inputs: Sequence[PhyloTree],
    output: PhyloTree,
    nestings: Sequence[tuple[Iterable[str], Iterable[str]]] = (),
) -> AuditReport:
    """Check that every triplet (and requested nesting) shared by all inputs is in ``output``.

    Inputs are compared through their ``M``-extended ultrametrics on the
    output taxa, which is where shared nestings are defined; this covers
    every triplet common to the inputs on their shared taxa.
    """
    taxa = output.taxa
    missing = set(combined_taxa(inputs)) - set(taxa)
    if missing:
        raise TreeError(f"output lacks input taxon {sorted(missing)[0]!r}")
    extended = [extend_ultrametric(t, taxa, M) for t in inputs]
    out_D = tree_to_ultrametric(output)
    common = frozenset.intersection(*(rooted_triplets(D) for D in extended)) if extended else frozenset()
    shown = rooted_triplets(out_D)
    report = AuditReport()
    for t in sorted(common):
        report.entries.append(AuditEntry("triplet", str(t), True, t in shown))
    for X, Y in nestings:
        X, Y = sorted(set(X)), sorted(set(Y))
        common_n = all(displays_nesting(D, X, Y) for D in extended)
        report.entries.append(
            AuditEntry("nesting", _nesting_label(X, Y), common_n, displays_nesting(out_D, X, Y))
        )
    return report


@dataclass
class ProbeReport:
    samples: list[Fraction]
    triplets_identical: bool
    graphs_identical: bool
    mismatches: list[str]

    @property
    def identical(self) -> bool:
        return self.triplets_identical and self.graphs_identical


def topology_stability_probe(
    problem: SupertreeProblem, samples: Sequence, jobs: int = 1
) -> ProbeReport:
    """Rerun numerically at each sample above the explicit safe ``M`` and compare with symbolic ``M``."""
    samples = [Fraction(s) for s in samples]
    bound = explicit_big_m(_symbolic_inputs(problem))
    low = [s for s in samples if s <= bound]
    if low:
        raise ValueError(f"probe value {low[0]} does not exceed the explicit safe M = {bound}")
    base = tropical_supertree(SupertreeProblem(problem.trees, None, problem.rescale_heights), jobs=jobs)
    ref_triplets = base.triplets()
    mismatches = []
    trip_ok = graph_ok = True
    for s in samples:
        res = tropical_supertree(SupertreeProblem(problem.trees, s, problem.rescale_heights), jobs=jobs)
        if res.triplets() != ref_triplets:
            trip_ok = False
            mismatches.append(f"M={s}: triplet set differs")
        if res.graph != base.graph:
            graph_ok = False
            mismatches.append(f"M={s}: covector graph differs")
    return ProbeReport(samples, trip_ok, graph_ok, mismatches)

# Dominance-filtering algorithms over the index trees
# PlainNDred, PreND (with its ParetoSubset pre-pass) and SymND, plus the union and
# Minkowski-sum input builders and the dispatch helpers used by the CLI and API.

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from index_tree import DEFAULT_LEAF_CAPACITY, IndexTree
from ndplus_tree import NdPlusTree
from pareto_core import (
    EMPTY_MASK,
    ContractViolation,
    DimMask,
    FilterStats,
    PointSet,
    dedup,
    lex_sort,
    minkowski_sum,
)
from qndplus_tree import QndPlusTree
from tndplus_tree import TndPlusTree

logger = logging.getLogger(__name__)

# the lexicographically leading dimension never decides dominance in a sorted sweep
LEADING_DIM_MASK: DimMask = frozenset({0})


class TreeKind(str, Enum):
    ND_PLUS = "nd"
    QND_PLUS = "qnd"
    TND_PLUS = "tnd"


class Algorithm(str, Enum):
    PLAIN_ND_RED = "plainndred"
    PRE_ND = "prend"
    SYM_ND = "symnd"


TREE_CLASSES: dict[TreeKind, type[IndexTree]] = {
    TreeKind.ND_PLUS: NdPlusTree,
    TreeKind.QND_PLUS: QndPlusTree,
    TreeKind.TND_PLUS: TndPlusTree,
}


@dataclass(frozen=True)
class FilterResult:
    frontier: PointSet
    stats: FilterStats


def new_tree(kind: Union[TreeKind, str], dim: int, m: int = DEFAULT_LEAF_CAPACITY,
             excluded: DimMask = EMPTY_MASK) -> IndexTree:
    return TREE_CLASSES[TreeKind(kind)](dim, m, excluded)


def build_tree(kind: Union[TreeKind, str], points: PointSet,
               m: int = DEFAULT_LEAF_CAPACITY) -> IndexTree:
    return new_tree(kind, points.dim, m).build(points)


def _require_dim(f: PointSet) -> None:
    if f.dim < 2:
        raise ContractViolation(f"filtering needs dimensionality >= 2, got {f.dim}")


def plain_nd_red(f: PointSet, kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
                 m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    """Sweep f in lexicographic order, keeping each point no kept point dominates.

    The tree splits and prunes on dimensions 2..d only: a point earlier in the
    sweep is never worse in dimension 1, so that dimension is masked out.
    """
    _require_dim(f)
    stats = FilterStats()
    with stats.timed():
        ordered = lex_sort(dedup(f))
        tree = new_tree(kind, f.dim, m, LEADING_DIM_MASK)
        accepted = []
        for p in ordered:
            if not tree.dominated(p, LEADING_DIM_MASK, stats):
                tree.insert(p)
                accepted.append(p)
    _log_run(Algorithm.PLAIN_ND_RED, kind, len(f), len(accepted), stats)
    return FilterResult(PointSet(f.dim, tuple(accepted), True), stats)


def pareto_subset(f: PointSet) -> tuple[PointSet, PointSet]:
    """Split f into points that improve a running minimum of dimensions 2..d and the rest.

    Every point of the first part belongs to the frontier; for d == 2 it is the
    whole frontier. Both parts keep lexicographic order.
    """
    ordered = lex_sort(dedup(f))
    best = [math.inf] * f.dim
    subset, rest = [], []
    for p in ordered:
        improved = False
        for k in range(1, f.dim):
            if p[k] < best[k]:
                best[k] = p[k]
                improved = True
        (subset if improved else rest).append(p)
    return PointSet(f.dim, tuple(subset)), PointSet(f.dim, tuple(rest))


def pre_nd(f: PointSet, kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
           m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    _require_dim(f)
    stats = FilterStats()
    with stats.timed():
        subset, rest = pareto_subset(f)
        tree = build_tree(kind, subset, m)
        accepted = list(subset)
        for q in rest:
            if not tree.dominated(q, EMPTY_MASK, stats):
                tree.insert(q)
                accepted.append(q)
    logger.debug("pre-pass kept %d of %d points outright", len(subset), len(subset) + len(rest))
    _log_run(Algorithm.PRE_ND, kind, len(f), len(accepted), stats)
    return FilterResult(PointSet(f.dim, tuple(accepted), True), stats)


def sym_nd(a: PointSet, b: PointSet, kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
           m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    """Frontier of the union of two Pareto sets, filtering each against the other."""
    if a.dim != b.dim:
        raise ContractViolation(f"dimensionality mismatch: {a.dim} vs {b.dim}")
    _require_dim(a)
    if not (a.pareto_verified and b.pareto_verified):
        raise ContractViolation("symnd needs both inputs to be verified Pareto sets")
    stats = FilterStats()
    with stats.timed():
        a = dedup(a)
        shared = set(a.points)
        b_points = [p for p in dict.fromkeys(b.points) if p not in shared]
        tree_a = build_tree(kind, a, m)
        b_survivors = [p for p in b_points if not tree_a.dominated(p, EMPTY_MASK, stats)]
        tree_b = build_tree(kind, PointSet(b.dim, tuple(b_survivors)), m)
        a_survivors = [p for p in a.points if not tree_b.dominated(p, EMPTY_MASK, stats)]
        frontier = PointSet(a.dim, tuple(a_survivors + b_survivors), True)
    _log_run(Algorithm.SYM_ND, kind, len(a) + len(b_points), len(frontier), stats)
    return FilterResult(frontier, stats)


def union_input(a: PointSet, b: PointSet) -> PointSet:
    if a.dim != b.dim:
        raise ContractViolation(f"dimensionality mismatch: {a.dim} vs {b.dim}")
    return dedup(PointSet(a.dim, a.points + b.points))


def sum_input(a: PointSet, b: PointSet) -> PointSet:
    return minkowski_sum(a, b)


FILTERS = {
    Algorithm.PLAIN_ND_RED: plain_nd_red,
    Algorithm.PRE_ND: pre_nd,
}


def run_filter(f: PointSet, algorithm: Union[Algorithm, str] = Algorithm.PRE_ND,
               kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
               m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.SYM_ND:
        raise ContractViolation("symnd filters the union of two Pareto sets only")
    return FILTERS[algorithm](f, TreeKind(kind), m)


def pareto_union(a: PointSet, b: PointSet, algorithm: Union[Algorithm, str] = Algorithm.SYM_ND,
                 kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
                 m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.SYM_ND:
        return sym_nd(a, b, TreeKind(kind), m)
    return run_filter(union_input(a, b), algorithm, kind, m)


def pareto_sum(a: PointSet, b: PointSet, algorithm: Union[Algorithm, str] = Algorithm.PRE_ND,
               kind: Union[TreeKind, str] = TreeKind.QND_PLUS,
               m: int = DEFAULT_LEAF_CAPACITY) -> FilterResult:
    if Algorithm(algorithm) is Algorithm.SYM_ND:
        raise ContractViolation("symnd filters the union of two Pareto sets only")
    return run_filter(sum_input(a, b), algorithm, kind, m)


def _log_run(algorithm: Algorithm, kind, size_in: int, size_out: int, stats: FilterStats) -> None:
    logger.debug(
        "%s/%s: %d points -> %d on the frontier, %d comparisons, %d node visits, %.1f ms",
        algorithm.value, TreeKind(kind).value, size_in, size_out,
        stats.comparisons, stats.node_visits, stats.elapsed_ns / 1e6,
    )

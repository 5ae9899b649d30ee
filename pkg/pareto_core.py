# Core dominance primitives for Pareto filtering
# Points, dominance with ignored dimensions, ordering, selection, Minkowski sums
# and the brute-force reference frontier.

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

Point = tuple[float, ...]
DimMask = frozenset

EMPTY_MASK: DimMask = frozenset()


class ContractViolation(ValueError):
    """Raised when a caller breaks an operation's precondition."""


def make_point(coords: Iterable[float]) -> Point:
    point = tuple(float(c) for c in coords)
    if len(point) < 2:
        raise ContractViolation(f"points need at least 2 coordinates, got {len(point)}")
    for value in point:
        if not math.isfinite(value):
            raise ContractViolation(f"non-finite coordinate in {point!r}")
    return point


def check_mask(mask: DimMask, dim: int) -> DimMask:
    """Validate a set of 0-based excluded dimensions against dimensionality `dim`."""
    mask = frozenset(mask)
    for index in mask:
        if not 0 <= index < dim:
            raise ContractViolation(f"mask index {index} outside [0, {dim})")
    if len(mask) >= dim:
        raise ContractViolation("mask must leave at least one active dimension")
    return mask


def active_dims(dim: int, mask: DimMask) -> tuple[int, ...]:
    return tuple(i for i in range(dim) if i not in mask)


@dataclass(frozen=True)
class PointSet:
    dim: int
    points: tuple[Point, ...] = ()
    pareto_verified: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ContractViolation(f"dimensionality must be positive, got {self.dim}")
        for point in self.points:
            if len(point) != self.dim:
                raise ContractViolation(
                    f"point {point!r} has {len(point)} coordinates, expected {self.dim}"
                )

    @classmethod
    def of(cls, points: Iterable[Sequence[float]], dim: Optional[int] = None,
           pareto_verified: bool = False) -> "PointSet":
        converted = tuple(make_point(p) for p in points)
        if dim is None:
            if not converted:
                raise ContractViolation("dimensionality of an empty point set must be given")
            dim = len(converted[0])
        return cls(dim, converted, pareto_verified)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def as_array(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, self.dim), dtype=np.float64)
        return np.asarray(self.points, dtype=np.float64)

    def same_points(self, other: "PointSet") -> bool:
        return self.dim == other.dim and set(self.points) == set(other.points)


@dataclass
class FilterStats:
    comparisons: int = 0
    node_visits: int = 0
    leaf_scans: int = 0
    elapsed_ns: int = 0

    @contextmanager
    def timed(self):
        start = time.perf_counter_ns()
        try:
            yield self
        finally:
            self.elapsed_ns += time.perf_counter_ns() - start

    def merge(self, other: "FilterStats") -> "FilterStats":
        self.comparisons += other.comparisons
        self.node_visits += other.node_visits
        self.leaf_scans += other.leaf_scans
        self.elapsed_ns += other.elapsed_ns
        return self

    def as_dict(self) -> dict:
        return {
            "comparisons": self.comparisons,
            "node_visits": self.node_visits,
            "leaf_scans": self.leaf_scans,
            "elapsed_ns": self.elapsed_ns,
        }


def dominates_on(p: Point, q: Point, active: Sequence[int]) -> bool:
    # hot path: no validation, weak comparison over the given indices
    for i in active:
        if p[i] > q[i]:
            return False
    return True


def dominates(p: Point, q: Point, mask: DimMask = EMPTY_MASK) -> bool:
    """Minimisation dominance of p over q.

    With an empty mask this is strict dominance (p != q and p <= q everywhere).
    With a non-empty mask the comparison is weak over the active dimensions only;
    callers use it where the masked dimensions are known to be settled.
    """
    if len(p) != len(q):
        raise ContractViolation(f"dimensionality mismatch: {len(p)} vs {len(q)}")
    mask = check_mask(mask, len(p))
    if not mask:
        return p != q and dominates_on(p, q, range(len(p)))
    return dominates_on(p, q, active_dims(len(p), mask))


def lex_sort(s: PointSet) -> PointSet:
    # tuple ordering is exactly lexicographic on coordinates
    return PointSet(s.dim, tuple(sorted(s.points)), s.pareto_verified)


def dedup(s: PointSet) -> PointSet:
    return PointSet(s.dim, tuple(dict.fromkeys(s.points)), s.pareto_verified)


def select_kth(values: Sequence[float], k: int) -> float:
    """Value at 0-based rank k of the sorted order (numpy introselect, expected linear)."""
    n = len(values)
    if n == 0:
        raise ContractViolation("select_kth on an empty sequence")
    if not 0 <= k < n:
        raise ContractViolation(f"rank {k} outside [0, {n})")
    return float(np.partition(np.asarray(values, dtype=np.float64), k)[k])


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """Nearest-rank quartiles at 0-based indices n//4, n//2 and 3n//4."""
    n = len(values)
    if n == 0:
        raise ContractViolation("quartiles of an empty sequence")
    ranks = (n // 4, n // 2, (3 * n) // 4)
    part = np.partition(np.asarray(values, dtype=np.float64), ranks)
    return float(part[ranks[0]]), float(part[ranks[1]]), float(part[ranks[2]])


def minkowski_sum(a: PointSet, b: PointSet) -> PointSet:
    if a.dim != b.dim:
        raise ContractViolation(f"dimensionality mismatch: {a.dim} vs {b.dim}")
    if not a.points or not b.points:
        return PointSet(a.dim)
    sums = (a.as_array()[:, None, :] + b.as_array()[None, :, :]).reshape(-1, a.dim)
    return dedup(PointSet(a.dim, tuple(map(tuple, sums.tolist()))))


# candidate rows compared against the frontier in one numpy call
_ORACLE_BLOCK_ROWS = 256
_ORACLE_BLOCK_ELEMENTS = 4_000_000


def oracle_pareto(f: PointSet, stats: Optional[FilterStats] = None) -> PointSet:
    """Reference frontier: every point of f not dominated by another point of f.

    Points are swept in lexicographic order and checked against the frontier found
    so far; only earlier points can dominate later ones, and a point dominated by a
    discarded point is also dominated by a frontier point. Output keeps input order.
    """
    stats = stats if stats is not None else FilterStats()
    with stats.timed():
        n = len(f)
        if n <= 1:
            return PointSet(f.dim, f.points, True)
        data = f.as_array()
        order = np.lexsort(data.T[::-1])
        ordered = data[order]
        keep = np.zeros(n, dtype=bool)
        frontier = np.empty_like(ordered)
        size = 0
        start = 0
        while start < n:
            width = max(1, min(n - start, _ORACLE_BLOCK_ROWS,
                            _ORACLE_BLOCK_ELEMENTS // ((size + 1) * f.dim)))
            block = ordered[start:start + width]
            if size:
                front = frontier[:size]
                le = np.all(front[None, :, :] <= block[:, None, :], axis=2)
                ne = np.any(front[None, :, :] != block[:, None, :], axis=2)
                blocked = np.any(le & ne, axis=1)
                stats.comparisons += size * width
            else:
                blocked = np.zeros(width, dtype=bool)
            base = size
            for offset in range(width):
                if blocked[offset]:
                    continue
                row = block[offset]
                # earlier survivors of this same block
                if size > base:
                    recent = frontier[base:size]
                    stats.comparisons += len(recent)
                    if np.any(np.all(recent <= row, axis=1) & np.any(recent != row, axis=1)):
                        continue
                frontier[size] = row
                size += 1
                keep[order[start + offset]] = True
            start += width
        survivors = tuple(p for p, kept in zip(f.points, keep) if kept)
    return PointSet(f.dim, survivors, True)

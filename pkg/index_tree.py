# Shared skeleton of the dominance index trees
# Node layout, lower-bound maintenance, shape statistics, the invariant checker
# and the build/insert/search driver that the ND+, QND+ and TND+ trees specialise.

import logging
from dataclasses import asdict, dataclass
from typing import Iterator, Optional, Sequence, Union

from pareto_core import (
    EMPTY_MASK,
    ContractViolation,
    DimMask,
    FilterStats,
    Point,
    PointSet,
    active_dims,
    check_mask,
    dominates_on,
)

logger = logging.getLogger(__name__)

DEFAULT_LEAF_CAPACITY = 8

CHILD_SLOTS = ("left", "middle", "right")


class TreeInvariantError(AssertionError):
    """A structural invariant of an index tree does not hold."""


class Node:
    __slots__ = ("dim", "q", "lb", "left", "middle", "right", "points",
                 "plateau", "level", "excluded")

    def __init__(self, level: int, dim: Optional[int], excluded: DimMask):
        self.level = level
        self.dim = dim
        self.excluded = excluded
        self.q: Optional[float] = None
        self.lb: Optional[list[float]] = None
        self.left: Optional["Node"] = None
        self.middle: Optional["Node"] = None
        self.right: Optional["Node"] = None
        self.points: Optional[list[Point]] = None
        self.plateau = False

    @property
    def is_leaf(self) -> bool:
        return self.points is not None

    def children(self) -> Iterator[tuple[str, "Node"]]:
        for slot in CHILD_SLOTS:
            child = getattr(self, slot)
            if child is not None:
                yield slot, child

    def __repr__(self):
        if self.is_leaf:
            return f"Leaf(level={self.level}, points={len(self.points)})"
        kind = "plateau" if self.plateau else "median"
        return f"Node(level={self.level}, dim={self.dim}, q={self.q}, {kind})"


def next_active_dim(dim_count: int, after: Optional[int], excluded: DimMask) -> Optional[int]:
    """Next dimension after `after` in cyclic order that is not excluded."""
    start = 0 if after is None else after + 1
    for step in range(dim_count):
        candidate = (start + step) % dim_count
        if candidate not in excluded:
            return candidate
    return None


def compute_bounds(node: Optional[Node]) -> Optional[list[float]]:
    """Post-order recomputation of every lower-bound vector under node."""
    if node is None:
        return None
    if node.is_leaf:
        node.lb = [min(column) for column in zip(*node.points)]
        return node.lb
    bounds = [compute_bounds(child) for _, child in node.children()]
    node.lb = [min(column) for column in zip(*bounds)]
    return node.lb


def widen(node: Node, p: Point) -> None:
    lb = node.lb
    for i, value in enumerate(p):
        if value < lb[i]:
            lb[i] = value


@dataclass(frozen=True)
class TreeShapeStats:
    max_depth: int = 0
    min_depth: int = 0
    bi: int = 0
    avg_depth: float = 0.0
    node_count: int = 0
    leaf_count: int = 0
    point_count: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def shape_stats(root: Optional[Node]) -> TreeShapeStats:
    if root is None:
        return TreeShapeStats()
    depths = []
    nodes = 0
    points = 0
    stack = [root]
    while stack:
        node = stack.pop()
        nodes += 1
        if node.is_leaf:
            depths.append(node.level - root.level)
            points += len(node.points)
        else:
            stack.extend(child for _, child in node.children())
    return TreeShapeStats(
        max_depth=max(depths),
        min_depth=min(depths),
        bi=max(depths) - min(depths),
        avg_depth=sum(depths) / len(depths),
        node_count=nodes,
        leaf_count=len(depths),
        point_count=points,
    )


class IndexTree:
    """Leaf-oriented space-partitioning tree answering "is p dominated?".

    Subclasses decide how a node splits (`_partition`), where an inserted point
    goes (`_route`), which children a query must visit (`_descend`) and which
    child slot holds the plateau whose split dimension is excluded below it.
    `base_excluded` removes dimensions from splitting and pruning for the whole
    tree; queries are then expected to mask the same dimensions.
    """

    kind = "base"
    plateau_slot: Optional[str] = None

    def __init__(self, dim: int, m: int = DEFAULT_LEAF_CAPACITY,
                 base_excluded: DimMask = EMPTY_MASK):
        if dim < 2:
            raise ContractViolation(f"trees index points of dimensionality >= 2, got {dim}")
        if m < 1:
            raise ContractViolation(f"leaf capacity must be at least 1, got {m}")
        self.dim = dim
        self.m = m
        self.excluded = check_mask(base_excluded, dim)
        self.root: Optional[Node] = None
        self.size = 0
        self._active: dict[DimMask, tuple[int, ...]] = {}

    def __len__(self) -> int:
        return self.size

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, m={self.m}, size={self.size})"

    # construction

    def build(self, points: Union[PointSet, Sequence[Point]]) -> "IndexTree":
        pts = list(points)
        for p in pts:
            self._check_point(p)
        root_dim = next_active_dim(self.dim, None, self.excluded)
        self.root = self._build(pts, 0, root_dim, self.excluded)
        compute_bounds(self.root)
        self.size = len(pts)
        logger.debug("built %s over %d points: %s", self.kind, self.size, self.shape())
        return self

    def _build(self, points: list[Point], level: int, dim: Optional[int],
               excluded: DimMask, stall: int = 0) -> Optional[Node]:
        if not points:
            return None
        node = Node(level, dim, excluded)
        if len(points) <= self.m:
            node.points = points
            return node
        if dim is None:
            raise ContractViolation(
                f"{len(points)} points left with every dimension excluded; input has duplicates"
            )
        q, plateau, parts = self._partition(points, dim)
        if max(len(part) for part in parts.values()) == len(points) and not plateau:
            # one-sided median split; give up once every active dimension failed
            stall += 1
            if stall >= self.dim - len(excluded):
                node.points = points
                return node
        else:
            stall = 0
        node.q = q
        node.plateau = plateau
        for slot, part in parts.items():
            child_dim, child_excluded = self._child_context(node, slot)
            setattr(node, slot, self._build(part, level + 1, child_dim, child_excluded, stall))
        return node

    def _partition(self, points: list[Point], dim: int) -> tuple[float, bool, dict[str, list[Point]]]:
        raise NotImplementedError

    def _child_context(self, node: Node, slot: str) -> tuple[Optional[int], DimMask]:
        excluded = node.excluded
        if node.plateau and slot == self.plateau_slot:
            excluded = excluded | {node.dim}
        return next_active_dim(self.dim, node.dim, excluded), excluded

    def insert(self, p: Point) -> None:
        self._check_point(p)
        self.size += 1
        if self.root is None:
            root_dim = next_active_dim(self.dim, None, self.excluded)
            self.root = self._build([p], 0, root_dim, self.excluded)
            compute_bounds(self.root)
            return
        parent: Optional[Node] = None
        slot = ""
        node = self.root
        while not node.is_leaf:
            widen(node, p)
            parent = node
            slot = self._route(node, p)
            node = getattr(node, slot)
            if node is None:
                child_dim, child_excluded = self._child_context(parent, slot)
                leaf = self._build([p], parent.level + 1, child_dim, child_excluded)
                compute_bounds(leaf)
                setattr(parent, slot, leaf)
                return
        node.points.append(p)
        widen(node, p)
        if len(node.points) <= self.m:
            return
        rebuilt = self._build(node.points, node.level, node.dim, node.excluded)
        compute_bounds(rebuilt)
        if parent is None:
            self.root = rebuilt
        else:
            setattr(parent, slot, rebuilt)

    def _route(self, node: Node, p: Point) -> str:
        raise NotImplementedError

    # queries

    def dominated(self, p: Point, mask: DimMask = EMPTY_MASK,
                  stats: Optional[FilterStats] = None) -> bool:
        """True iff some stored point other than p itself dominates p on the unmasked dimensions."""
        self._check_point(p)
        mask = check_mask(mask, self.dim)
        stats = stats if stats is not None else FilterStats()
        return self._dominated(self.root, p, mask, stats)

    def _active_dims(self, mask: DimMask) -> tuple[int, ...]:
        active = self._active.get(mask)
        if active is None:
            active = self._active[mask] = active_dims(self.dim, mask)
        return active

    def _dominated(self, node: Optional[Node], p: Point, mask: DimMask,
                   stats: FilterStats) -> bool:
        if node is None:
            return False
        stats.node_visits += 1
        active = self._active_dims(mask)
        if not dominates_on(node.lb, p, active):
            return False
        if node.is_leaf:
            stats.leaf_scans += 1
            for s in node.points:
                stats.comparisons += 1
                if dominates_on(s, p, active) and s != p:
                    return True
            return False
        return self._descend(node, p, mask, stats)

    def _descend(self, node: Node, p: Point, mask: DimMask, stats: FilterStats) -> bool:
        raise NotImplementedError

    # inspection

    def shape(self) -> TreeShapeStats:
        return shape_stats(self.root)

    def iter_points(self) -> Iterator[Point]:
        for leaf in self.iter_leaves():
            yield from leaf.points

    def iter_leaves(self) -> Iterator[Node]:
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(child for _, child in reversed(list(node.children())))

    def leaf_sets(self) -> list[list[Point]]:
        return [list(leaf.points) for leaf in self.iter_leaves()]

    def validate(self) -> None:
        """Check partition, bound, leaf-size, exclusion and plateau invariants."""
        if self.root is None:
            if self.size:
                raise TreeInvariantError(f"empty tree reports {self.size} points")
            return
        expected_root = next_active_dim(self.dim, None, self.excluded)
        if self.root.level != 0 or self.root.dim != expected_root or self.root.excluded != self.excluded:
            raise TreeInvariantError(f"root {self.root!r} does not start the dimension cycle")
        stored = self._validate(self.root)
        if len(stored) != self.size:
            raise TreeInvariantError(f"tree stores {len(stored)} points, size says {self.size}")

    def _validate(self, node: Node) -> list[Point]:
        if node.dim is not None and node.dim in node.excluded:
            raise TreeInvariantError(f"{node!r} splits on excluded dimension {node.dim}")
        if node.is_leaf:
            if any(child is not None for child in (node.left, node.middle, node.right)):
                raise TreeInvariantError(f"{node!r} has both points and children")
            if not node.points:
                raise TreeInvariantError(f"{node!r} is an empty leaf")
            if len(node.points) > self.m and self._splittable(node.points, node.excluded):
                # only a leaf no median split can shrink may overflow
                raise TreeInvariantError(f"{node!r} holds more than {self.m} points")
            stored = list(node.points)
        else:
            if node.dim is None or node.q is None:
                raise TreeInvariantError(f"{node!r} has no split")
            stored = []
            for slot, child in node.children():
                if child.level != node.level + 1:
                    raise TreeInvariantError(f"{child!r} under {node!r} has the wrong level")
                child_dim, child_excluded = self._child_context(node, slot)
                if child.dim != child_dim or child.excluded != child_excluded:
                    raise TreeInvariantError(
                        f"{child!r} in slot {slot} of {node!r} has dim {child.dim} "
                        f"excluding {set(child.excluded)}, expected {child_dim} excluding {set(child_excluded)}"
                    )
                part = self._validate(child)
                for p in part:
                    if self._slot_for(node, p) != slot:
                        raise TreeInvariantError(f"{p!r} stored in slot {slot} of {node!r}")
                stored.extend(part)
            if not stored:
                raise TreeInvariantError(f"{node!r} has no children")
        expected = [min(column) for column in zip(*stored)]
        if node.lb != expected:
            raise TreeInvariantError(f"{node!r} lower bound {node.lb} != {expected}")
        return stored

    def _splittable(self, points: list[Point], excluded: DimMask) -> bool:
        for dim in active_dims(self.dim, excluded):
            _, plateau, parts = self._partition(points, dim)
            if plateau or max(len(part) for part in parts.values()) < len(points):
                return True
        return False

    def _slot_for(self, node: Node, p: Point) -> str:
        """Slot a stored point must occupy; the partition rule of the node."""
        return self._route(node, p)

    def _check_point(self, p: Point) -> None:
        if len(p) != self.dim:
            raise ContractViolation(f"point {p!r} has {len(p)} coordinates, tree indexes {self.dim}")

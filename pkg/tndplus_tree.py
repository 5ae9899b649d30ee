# TND+ tree: ternary dominance index with a middle child for plateaus.

from typing import Optional

from index_tree import DEFAULT_LEAF_CAPACITY, IndexTree, Node, TreeShapeStats, compute_bounds
from ndplus_tree import median_split
from pareto_core import EMPTY_MASK, DimMask, FilterStats, Point, PointSet, quartiles


class TndPlusTree(IndexTree):
    """Splits three ways around the median when it sits on a plateau.

    Quartiles Q1 == Q2 or Q2 == Q3 mark a plateau at the median: values below it
    go left, equal values go to the middle (where the dimension is excluded) and
    larger values go right. Any other node is a plain median split.
    """

    kind = "tnd"
    plateau_slot = "middle"

    def _partition(self, points, dim):
        q1, q2, q3 = quartiles([p[dim] for p in points])
        if q1 != q2 and q2 != q3:
            q, parts = median_split(points, dim)
            return q, False, parts
        left, middle, right = [], [], []
        for p in points:
            if p[dim] < q2:
                left.append(p)
            elif p[dim] == q2:
                middle.append(p)
            else:
                right.append(p)
        return q2, True, {"left": left, "middle": middle, "right": right}

    def _route(self, node: Node, p: Point) -> str:
        value = p[node.dim]
        if value < node.q:
            return "left"
        if value == node.q and node.middle is not None:
            return "middle"
        return "right"

    def _descend(self, node, p, mask, stats):
        if p[node.dim] < node.q:
            return self._dominated(node.left, p, mask, stats)
        if self._dominated(node.left, p, mask, stats):
            return True
        if node.middle is not None and self._dominated(node.middle, p, mask | {node.dim}, stats):
            return True
        return self._dominated(node.right, p, mask, stats)


def build_tnd(points: PointSet, m: int = DEFAULT_LEAF_CAPACITY,
              base_excluded: DimMask = EMPTY_MASK) -> TndPlusTree:
    return TndPlusTree(points.dim, m, base_excluded).build(points)


def insert_tnd(tree: TndPlusTree, p: Point) -> None:
    tree.insert(p)


def dominated_tnd(tree: TndPlusTree, p: Point, mask: DimMask = EMPTY_MASK,
                  stats: Optional[FilterStats] = None) -> bool:
    return tree.dominated(p, mask, stats)


def tree_stats_tnd(tree: TndPlusTree) -> TreeShapeStats:
    return tree.shape()


def compute_bounds_tnd(tree: TndPlusTree) -> None:
    compute_bounds(tree.root)

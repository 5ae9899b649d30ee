# QND+ tree: binary dominance index that detects plateaus with quartiles.
#
# A node whose first two quartiles coincide in its split dimension sends the
# points equal to the median right and everything else left. The right side then
# holds a constant value in that dimension, so it is excluded from splitting and
# pruning inside the right subtree.

from typing import Optional

from index_tree import DEFAULT_LEAF_CAPACITY, IndexTree, Node, TreeShapeStats
from ndplus_tree import median_split
from pareto_core import EMPTY_MASK, DimMask, FilterStats, Point, PointSet, quartiles


class QndPlusTree(IndexTree):
    kind = "qnd"
    plateau_slot = "right"

    def _partition(self, points, dim):
        q1, q2, _ = quartiles([p[dim] for p in points])
        if q1 != q2:
            q, parts = median_split(points, dim)
            return q, False, parts
        left = [p for p in points if p[dim] != q2]
        right = [p for p in points if p[dim] == q2]
        return q2, True, {"left": left, "right": right}

    def _route(self, node: Node, p: Point) -> str:
        if node.plateau:
            return "right" if p[node.dim] == node.q else "left"
        return "left" if p[node.dim] < node.q else "right"

    def _descend(self, node, p, mask, stats):
        if p[node.dim] < node.q:
            return self._dominated(node.left, p, mask, stats)
        if node.plateau:
            return (self._dominated(node.left, p, mask, stats)
                    or self._dominated(node.right, p, mask | {node.dim}, stats))
        return (self._dominated(node.left, p, mask, stats)
                or self._dominated(node.right, p, mask, stats))


def build_qnd(points: PointSet, m: int = DEFAULT_LEAF_CAPACITY,
              base_excluded: DimMask = EMPTY_MASK) -> QndPlusTree:
    return QndPlusTree(points.dim, m, base_excluded).build(points)


def insert_qnd(tree: QndPlusTree, p: Point) -> None:
    tree.insert(p)


def dominated_qnd(tree: QndPlusTree, p: Point, mask: DimMask = EMPTY_MASK,
                  stats: Optional[FilterStats] = None) -> bool:
    return tree.dominated(p, mask, stats)


def tree_stats_qnd(tree: QndPlusTree) -> TreeShapeStats:
    return tree.shape()

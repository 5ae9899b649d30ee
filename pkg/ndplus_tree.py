# ND+ tree: binary median-split dominance index with lower-bound pruning.

from typing import Optional

from index_tree import DEFAULT_LEAF_CAPACITY, IndexTree, Node, TreeShapeStats, compute_bounds
from pareto_core import EMPTY_MASK, DimMask, FilterStats, Point, PointSet, select_kth


def median_split(points: list[Point], dim: int) -> tuple[float, dict[str, list[Point]]]:
    """Upper-median split: values below q go left, the rest go right."""
    q = select_kth([p[dim] for p in points], len(points) // 2)
    left = [p for p in points if p[dim] < q]
    right = [p for p in points if p[dim] >= q]
    return q, {"left": left, "right": right}


class NdPlusTree(IndexTree):
    kind = "nd"

    def _partition(self, points, dim):
        q, parts = median_split(points, dim)
        return q, False, parts

    def _route(self, node: Node, p: Point) -> str:
        return "left" if p[node.dim] < node.q else "right"

    def _descend(self, node, p, mask, stats):
        if p[node.dim] < node.q:
            return self._dominated(node.left, p, mask, stats)
        return (self._dominated(node.left, p, mask, stats)
                or self._dominated(node.right, p, mask, stats))


def build_nd(points: PointSet, m: int = DEFAULT_LEAF_CAPACITY,
             base_excluded: DimMask = EMPTY_MASK) -> NdPlusTree:
    return NdPlusTree(points.dim, m, base_excluded).build(points)


def insert_nd(tree: NdPlusTree, p: Point) -> None:
    tree.insert(p)


def dominated_nd(tree: NdPlusTree, p: Point, mask: DimMask = EMPTY_MASK,
                 stats: Optional[FilterStats] = None) -> bool:
    return tree.dominated(p, mask, stats)


def tree_stats_nd(tree: NdPlusTree) -> TreeShapeStats:
    return tree.shape()


def compute_bounds_nd(tree: NdPlusTree) -> None:
    compute_bounds(tree.root)

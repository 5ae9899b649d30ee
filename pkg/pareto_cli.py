# Command-line front end: generate data sets, filter them, inspect trees, benchmark.
#
#   python pareto_cli.py generate --family urs --d 4 --n 1000 --seed 7 --out a.pts
#   python pareto_cli.py union a.pts b.pts --algo symnd --tree qnd --out u.pts
#   python pareto_cli.py bench --families urs,ursp --dims 3,5 --sizes 1000 --out bench.csv

import csv
import functools
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterator, Optional, Union

import click

from datasets import (
    DatasetError,
    DatasetSpec,
    Family,
    PointFileError,
    derive_seed,
    generate,
    generate_raw,
    read_points,
    write_points,
)
from index_tree import DEFAULT_LEAF_CAPACITY
from pareto_core import ContractViolation, FilterStats, PointSet, dedup, oracle_pareto
from pareto_filters import (
    Algorithm,
    FilterResult,
    TreeKind,
    new_tree,
    pareto_sum,
    pareto_union,
    run_filter,
    sum_input,
    union_input,
)

logger = logging.getLogger("pareto_cli")

OPS = ("union", "sum", "filter")
ALGORITHMS = [a.value for a in Algorithm]
TREES = [t.value for t in TreeKind]
FAMILIES = [f.value for f in Family]


class VerificationFailed(click.ClickException):
    exit_code = 3


@dataclass(frozen=True)
class BenchRow:
    family: str
    d: int
    n_a: int
    n_b: int
    op: str
    algorithm: str
    tree: str
    seed: Union[int, str]
    m: int
    output_size: int
    comparisons: int
    node_visits: int
    leaf_scans: int
    elapsed_ns: int

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_result(cls, result: FilterResult, **cell) -> "BenchRow":
        stats = result.stats
        return cls(output_size=len(result.frontier), comparisons=stats.comparisons,
                   node_visits=stats.node_visits, leaf_scans=stats.leaf_scans,
                   elapsed_ns=stats.elapsed_ns, **cell)

    def as_row(self) -> list:
        return list(astuple(self))


class CommaSeparated(click.ParamType):
    """Comma-separated list whose items are converted by another click type."""

    name = "list"

    def __init__(self, item_type: click.ParamType):
        self.item_type = item_type

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        items = [item.strip() for item in str(value).split(",") if item.strip()]
        if not items:
            self.fail("expected at least one value", param, ctx)
        return [self.item_type.convert(item, param, ctx) for item in items]


def _load(path: str, require_pareto: bool = False) -> PointSet:
    try:
        points = read_points(path)
    except PointFileError as exc:
        raise click.ClickException(f"{path}: {exc}") from exc
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc.strerror}") from exc
    if require_pareto:
        unique = dedup(points)
        frontier = oracle_pareto(unique)
        if len(frontier) != len(unique):
            raise click.UsageError(f"{path} is not a Pareto set; symnd needs Pareto inputs")
        points = frontier
    return points


def _save(points: PointSet, path: str) -> None:
    try:
        write_points(points, path)
    except OSError as exc:
        raise click.ClickException(f"cannot write {path}: {exc.strerror}") from exc


def _write_stats(row: BenchRow, path: str) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(BenchRow.header())
            writer.writerow(row.as_row())
    except OSError as exc:
        raise click.ClickException(f"cannot write {path}: {exc.strerror}") from exc


def _run(action: Callable[[], FilterResult]) -> FilterResult:
    try:
        return action()
    except ContractViolation as exc:
        raise click.UsageError(str(exc)) from exc


def _verify(result: FilterResult, source: PointSet) -> None:
    expected = oracle_pareto(dedup(source))
    if not expected.same_points(result.frontier):
        raise VerificationFailed(
            f"frontier has {len(result.frontier)} points, the reference frontier has {len(expected)}"
        )
    logger.info("verified %d frontier points against the reference", len(expected))


def _finish(result: FilterResult, out: str, stats_path: Optional[str], **cell) -> None:
    _save(result.frontier, out)
    if stats_path:
        _write_stats(BenchRow.from_result(result, family="file", seed="", **cell), stats_path)
    click.echo(f"{len(result.frontier)} points written to {out}")


def filter_options(func):
    func = click.option("--verify", is_flag=True, help="Check the frontier against the reference oracle")(func)
    func = click.option("--stats", "stats_path", type=click.Path(dir_okay=False), help="Write one CSV stats row")(func)
    func = click.option("--out", required=True, type=click.Path(dir_okay=False))(func)
    func = click.option("--m", default=DEFAULT_LEAF_CAPACITY, show_default=True, type=click.IntRange(min=1))(func)
    func = click.option("--tree", default=TreeKind.QND_PLUS.value, show_default=True, type=click.Choice(TREES))(func)
    func = click.option("--algo", default=Algorithm.PRE_ND.value, show_default=True, type=click.Choice(ALGORITHMS))(func)
    return func


@click.group(name="pareto")
@click.option("--verbose", is_flag=True, help="Log progress at DEBUG level to stderr")
def cli(verbose):
    """Dominance-filtering toolkit over ND+, QND+ and TND+ trees."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@cli.command("generate")
@click.option("--family", required=True, type=click.Choice(FAMILIES))
@click.option("--d", "d", required=True, type=int)
@click.option("--n", "n", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--oversample", default=4, show_default=True, type=int)
@click.option("--plateau-fraction", default=0.2, show_default=True, type=float)
@click.option("--plateau-dims", default=None, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def generate_command(family, d, n, seed, oversample, plateau_fraction, plateau_dims, out):
    """Write a synthetic Pareto set (or raw uniform points) to a point file."""
    try:
        spec = DatasetSpec(Family(family), d, n, seed, oversample, plateau_fraction, plateau_dims)
    except ContractViolation as exc:
        raise click.UsageError(str(exc)) from exc
    try:
        points = generate(spec)
    except DatasetError as exc:
        raise click.ClickException(str(exc)) from exc
    _save(points, out)
    click.echo(f"{len(points)} points written to {out}")


@cli.command("filter")
@click.argument("input_path", type=click.Path(dir_okay=False))
@filter_options
def filter_command(input_path, algo, tree, m, out, stats_path, verify):
    """Keep the non-dominated points of one point file."""
    if algo == Algorithm.SYM_ND.value:
        raise click.UsageError("symnd filters the union of two Pareto sets only")
    f = _load(input_path)
    result = _run(lambda: run_filter(f, algo, tree, m))
    if verify:
        _verify(result, f)
    _finish(result, out, stats_path, d=f.dim, n_a=len(f), n_b=0, op="filter",
            algorithm=algo, tree=tree, m=m)


@cli.command("union")
@click.argument("a_path", type=click.Path(dir_okay=False))
@click.argument("b_path", type=click.Path(dir_okay=False))
@filter_options
def union_command(a_path, b_path, algo, tree, m, out, stats_path, verify):
    """Frontier of the union of two point files."""
    symmetric = algo == Algorithm.SYM_ND.value
    a = _load(a_path, require_pareto=symmetric)
    b = _load(b_path, require_pareto=symmetric)
    result = _run(lambda: pareto_union(a, b, algo, tree, m))
    if verify:
        _verify(result, union_input(a, b))
    _finish(result, out, stats_path, d=a.dim, n_a=len(a), n_b=len(b), op="union",
            algorithm=algo, tree=tree, m=m)


@cli.command("sum")
@click.argument("a_path", type=click.Path(dir_okay=False))
@click.argument("b_path", type=click.Path(dir_okay=False))
@filter_options
def sum_command(a_path, b_path, algo, tree, m, out, stats_path, verify):
    """Frontier of the Minkowski sum of two point files."""
    if algo == Algorithm.SYM_ND.value:
        raise click.UsageError("symnd filters the union of two Pareto sets only")
    a = _load(a_path)
    b = _load(b_path)
    result = _run(lambda: pareto_sum(a, b, algo, tree, m))
    if verify:
        _verify(result, sum_input(a, b))
    _finish(result, out, stats_path, d=a.dim, n_a=len(a), n_b=len(b), op="sum",
            algorithm=algo, tree=tree, m=m)


@cli.command("stats")
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option("--tree", default=TreeKind.QND_PLUS.value, show_default=True, type=click.Choice(TREES))
@click.option("--m", default=DEFAULT_LEAF_CAPACITY, show_default=True, type=click.IntRange(min=1))
@click.option("--queries", "queries_path", type=click.Path(dir_okay=False),
              help="Point file of dominance queries to run against the tree")
def stats_command(input_path, tree, m, queries_path):
    """Build a tree over a point file and report its shape."""
    points = dedup(_load(input_path))
    try:
        index = new_tree(tree, points.dim, m).build(points)
    except ContractViolation as exc:
        raise click.UsageError(str(exc)) from exc
    shape = index.shape()
    click.echo(f"tree: {tree} m={m} points={shape.point_count}")
    click.echo(f"height: max {shape.max_depth} min {shape.min_depth} avg {shape.avg_depth:.2f}")
    click.echo(f"BI: {shape.bi}")
    click.echo(f"nodes: {shape.node_count} leaves: {shape.leaf_count}")
    if queries_path:
        queries = _load(queries_path)
        if queries.dim != points.dim:
            raise click.UsageError(f"queries have d={queries.dim}, the tree indexes d={points.dim}")
        stats = FilterStats()
        dominated = sum(index.dominated(q, stats=stats) for q in queries)
        per_query = stats.comparisons / len(queries) if len(queries) else 0.0
        click.echo(f"queries: {len(queries)} dominated: {dominated}")
        click.echo(f"comparisons per query: {per_query:.2f}")
        click.echo(f"node visits per query: {stats.node_visits / max(1, len(queries)):.2f}")


@functools.lru_cache(maxsize=16)
def _bench_inputs(family: str, d: int, n: int, seed: int, op: str) -> tuple[PointSet, PointSet]:
    spec = DatasetSpec(Family(family), d, n, seed)
    if op == "filter":
        return generate_raw(spec), PointSet(d)
    second = DatasetSpec(Family(family), d, n, derive_seed(seed, 1))
    return generate(spec), generate(second)


def run_cell(cell: tuple) -> BenchRow:
    """One benchmark measurement; top level so worker processes can unpickle it."""
    family, d, n, seed, op, algo, tree, m = cell
    a, b = _bench_inputs(family, d, n, seed, op)
    if op == "union":
        result = pareto_union(a, b, algo, tree, m)
    elif op == "sum":
        result = pareto_sum(a, b, algo, tree, m)
    else:
        result = run_filter(a, algo, tree, m)
    return BenchRow.from_result(result, family=family, d=d, n_a=len(a), n_b=len(b), op=op,
                                algorithm=algo, tree=tree, seed=seed, m=m)


def bench_cells(families, dims, sizes, seeds, ops, algos, trees, m) -> Iterator[tuple]:
    for family, d, n, seed, op, algo, tree in itertools.product(
            families, dims, sizes, seeds, ops, algos, trees):
        if algo == Algorithm.SYM_ND.value and (op != "union" or family == Family.UNIFORM.value):
            logger.info("skipping %s/%s for %s on %s: symnd filters unions of Pareto sets only",
                        algo, tree, op, family)
            continue
        yield family, d, n, seed, op, algo, tree, m


def _bench_rows(cells: list[tuple], workers: int) -> Iterator[BenchRow]:
    if workers == 1:
        yield from map(run_cell, cells)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(run_cell, cells)


@cli.command("bench")
@click.option("--families", default="urs", show_default=True, type=CommaSeparated(click.Choice(FAMILIES)))
@click.option("--dims", default="3", show_default=True, type=CommaSeparated(click.IntRange(min=2)))
@click.option("--sizes", default="1000", show_default=True, type=CommaSeparated(click.IntRange(min=1)))
@click.option("--seeds", default="1", show_default=True, type=CommaSeparated(click.IntRange(min=0)))
@click.option("--ops", default="union", show_default=True, type=CommaSeparated(click.Choice(OPS)))
@click.option("--algos", default=",".join(ALGORITHMS), show_default=True,
              type=CommaSeparated(click.Choice(ALGORITHMS)))
@click.option("--trees", default=",".join(TREES), show_default=True, type=CommaSeparated(click.Choice(TREES)))
@click.option("--m", default=DEFAULT_LEAF_CAPACITY, show_default=True, type=click.IntRange(min=1))
@click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def bench_command(families, dims, sizes, seeds, ops, algos, trees, m, workers, out):
    """Run the Cartesian grid of data sets, operations, algorithms and trees; stream CSV rows."""
    for family, d, n, seed in itertools.product(families, dims, sizes, seeds):
        try:
            DatasetSpec(Family(family), d, n, seed)
        except ContractViolation as exc:
            raise click.UsageError(f"invalid grid cell {family} d={d} n={n}: {exc}") from exc
    cells = list(bench_cells(families, dims, sizes, seeds, ops, algos, trees, m))
    try:
        handle = open(out, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot write {out}: {exc.strerror}") from exc
    written = 0
    with handle:
        writer = csv.writer(handle)
        writer.writerow(BenchRow.header())
        handle.flush()
        try:
            for row in _bench_rows(cells, workers):
                writer.writerow(row.as_row())
                handle.flush()
                written += 1
        except DatasetError as exc:
            raise click.ClickException(f"{exc} ({written} rows written to {out})") from exc
    click.echo(f"{written} rows written to {out}")


def main():
    cli()


if __name__ == "__main__":
    main()

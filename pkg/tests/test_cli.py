import csv
import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from click.testing import CliRunner

from datasets import read_points, write_points
from pareto_cli import BenchRow, cli
from pareto_core import FilterStats, PointSet
from pareto_filters import FilterResult
from samples import SAMPLE_S, SUM_A, SUM_B, SUM_FRONTIER, as_set


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = tmp.name
        # the group installs a stderr handler bound to the runner's stream
        root = logging.getLogger()
        handlers, level = root.handlers[:], root.level
        self.addCleanup(setattr, root, "handlers", handlers)
        self.addCleanup(root.setLevel, level)

    def path(self, name):
        return os.path.join(self.dir, name)

    def points_file(self, name, points):
        path = self.path(name)
        write_points(points, path)
        return path

    def invoke(self, *args):
        return self.runner.invoke(cli, [str(arg) for arg in args])

    def read_csv(self, path):
        with open(path, newline="", encoding="utf-8") as handle:
            return list(csv.reader(handle))


class GenerateCommandTests(CliTestCase):
    def test_writes_header_and_is_deterministic(self):
        out = self.path("a.pts")
        result = self.invoke("generate", "--family", "urs", "--d", 4, "--n", 1000, "--seed", 7, "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("1000 points written", result.output)
        with open(out, "rb") as handle:
            first = handle.read()
        self.assertEqual(first.split(b"\n")[1], b"d=4 n=1000")
        self.invoke("generate", "--family", "urs", "--d", 4, "--n", 1000, "--seed", 7, "--out", out)
        with open(out, "rb") as handle:
            self.assertEqual(handle.read(), first)

    def test_plateau_options(self):
        out = self.path("p.pts")
        result = self.invoke("generate", "--family", "ursp", "--d", 4, "--n", 100, "--seed", 1,
                             "--plateau-fraction", 0.5, "--plateau-dims", 1, "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(len(read_points(out)), 100)

    def test_invalid_arguments(self):
        out = self.path("c.pts")
        cases = [
            ("--family", "ursc", "--d", 2, "--n", 10, "--seed", 1),
            ("--family", "gaussian", "--d", 3, "--n", 10, "--seed", 1),
            ("--family", "urs", "--d", 3, "--n", 0, "--seed", 1),
            ("--family", "urs", "--d", 3, "--n", 10),
        ]
        for args in cases:
            with self.subTest(args=args):
                result = self.invoke("generate", *args, "--out", out)
                self.assertEqual(result.exit_code, 2, result.output)
        self.assertFalse(os.path.exists(out))

    def test_generation_failure(self):
        out = self.path("f.pts")
        with patch("datasets.MAX_ROUNDS", 1):
            result = self.invoke("generate", "--family", "ursp", "--d", 2, "--n", 10, "--seed", 1,
                                 "--plateau-fraction", 1.0, "--plateau-dims", 2, "--out", out)
        self.assertEqual(result.exit_code, 1, result.output)


class FilterCommandTests(CliTestCase):
    def setUp(self):
        super().setUp()
        self.a = self.points_file("a.pts", SUM_A)
        self.b = self.points_file("b.pts", SUM_B)
        self.s = self.points_file("s.pts", SAMPLE_S)

    def test_sum(self):
        out = self.path("sum.pts")
        result = self.invoke("sum", self.a, self.b, "--algo", "plainndred", "--tree", "qnd", "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(as_set(read_points(out)), SUM_FRONTIER)

    def test_self_union(self):
        out = self.path("u.pts")
        result = self.invoke("union", self.s, self.s, "--algo", "symnd", "--tree", "nd", "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(read_points(out).same_points(SAMPLE_S))

    def test_all_combinations_agree(self):
        outputs = []
        for algo in ("plainndred", "prend", "symnd"):
            for tree in ("nd", "qnd", "tnd"):
                out = self.path(f"u-{algo}-{tree}.pts")
                result = self.invoke("union", self.a, self.b, "--algo", algo, "--tree", tree,
                                     "--m", 1, "--out", out, "--verify")
                self.assertEqual(result.exit_code, 0, result.output)
                outputs.append(as_set(read_points(out)))
        self.assertTrue(all(output == outputs[0] for output in outputs))

    def test_filter_with_stats(self):
        raw = self.points_file("raw.pts", PointSet.of([(1, 5), (2, 4), (2, 6), (3, 3)]))
        out, stats = self.path("f.pts"), self.path("f.csv")
        result = self.invoke("filter", raw, "--algo", "prend", "--tree", "tnd", "--out", out,
                             "--stats", stats, "--verify")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(as_set(read_points(out)), {(1, 5), (2, 4), (3, 3)})
        rows = self.read_csv(stats)
        self.assertEqual(rows[0], BenchRow.header())
        self.assertEqual(len(rows), 2)
        record = dict(zip(rows[0], rows[1]))
        self.assertEqual((record["op"], record["algorithm"], record["tree"]), ("filter", "prend", "tnd"))
        self.assertEqual(record["output_size"], "3")

    def test_symnd_outside_unions_is_a_usage_error(self):
        out = self.path("x.pts")
        self.assertEqual(self.invoke("sum", self.a, self.b, "--algo", "symnd", "--out", out).exit_code, 2)
        self.assertEqual(self.invoke("filter", self.s, "--algo", "symnd", "--out", out).exit_code, 2)

    def test_symnd_rejects_non_pareto_input(self):
        raw = self.points_file("raw.pts", PointSet.of([(1, 1, 1), (2, 2, 2)]))
        result = self.invoke("union", raw, self.s, "--algo", "symnd", "--out", self.path("x.pts"))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("not a Pareto set", result.output)

    def test_dimension_mismatch_is_a_usage_error(self):
        flat = self.points_file("flat.pts", PointSet.of([(1, 2)]))
        result = self.invoke("union", self.a, flat, "--algo", "prend", "--out", self.path("x.pts"))
        self.assertEqual(result.exit_code, 2)

    def test_io_failures(self):
        out = self.path("x.pts")
        self.assertEqual(self.invoke("filter", self.path("missing.pts"), "--out", out).exit_code, 1)
        with open(self.path("bad.pts"), "w", encoding="utf-8") as handle:
            handle.write("# pareto-points v1\nd=2 n=1\n1 2 3\n")
        result = self.invoke("filter", self.path("bad.pts"), "--out", out)
        self.assertEqual(result.exit_code, 1)
        self.assertIn("line 3", result.output)

    def test_invalid_flags(self):
        out = self.path("x.pts")
        self.assertEqual(self.invoke("filter", self.s, "--tree", "kd", "--out", out).exit_code, 2)
        self.assertEqual(self.invoke("filter", self.s, "--m", 0, "--out", out).exit_code, 2)

    def test_verification_mismatch(self):
        wrong = FilterResult(PointSet(3), FilterStats())
        with patch("pareto_cli.run_filter", return_value=wrong):
            result = self.invoke("filter", self.s, "--verify", "--out", self.path("x.pts"))
        self.assertEqual(result.exit_code, 3)


class StatsCommandTests(CliTestCase):
    def test_golden_shapes(self):
        s = self.points_file("s.pts", SAMPLE_S)
        result = self.invoke("stats", s, "--tree", "qnd", "--m", 4)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("height: max 2 min 2", result.output)
        self.assertIn("BI: 0", result.output)
        result = self.invoke("stats", s, "--tree", "tnd", "--m", 4)
        self.assertIn("BI: 1", result.output)
        self.assertIn("nodes: 8 leaves: 5", result.output)

    def test_singleton(self):
        single = self.points_file("one.pts", PointSet.of([(1, 2, 3)]))
        result = self.invoke("stats", single, "--tree", "nd")
        self.assertIn("height: max 0 min 0", result.output)
        self.assertIn("BI: 0", result.output)

    def test_queries(self):
        s = self.points_file("s.pts", SAMPLE_S)
        queries = self.points_file("q.pts", PointSet.of([(9, 9, 9), (0, 0, 0)]))
        result = self.invoke("stats", s, "--tree", "nd", "--m", 4, "--queries", queries)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("queries: 2 dominated: 1", result.output)
        self.assertIn("comparisons per query:", result.output)


class BenchCommandTests(CliTestCase):
    def bench(self, *args):
        out = self.path("bench.csv")
        result = self.invoke("bench", "--dims", 3, "--sizes", 50, "--seeds", 1, *args, "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        return self.read_csv(out)

    def test_single_cell(self):
        rows = self.bench("--ops", "union", "--algos", "prend", "--trees", "qnd")
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[0], BenchRow.header())

    def test_nine_union_rows(self):
        rows = self.bench("--ops", "union")
        body = rows[1:]
        self.assertEqual(len(body), 9)
        header = rows[0]
        pairs = {(row[header.index("algorithm")], row[header.index("tree")]) for row in body}
        self.assertEqual(len(pairs), 9)
        self.assertTrue(all(len(row) == len(header) for row in body))
        self.assertEqual(len({row[header.index("output_size")] for row in body}), 1)

    def test_symnd_cells_are_skipped_for_sums(self):
        rows = self.bench("--ops", "sum,filter", "--families", "urs,uniform")
        header = rows[0]
        body = rows[1:]
        self.assertEqual(len(body), 2 * 2 * 6)
        self.assertNotIn("symnd", {row[header.index("algorithm")] for row in body})

    def test_deterministic_apart_from_time(self):
        def columns(rows):
            header = rows[0]
            keep = [header.index(name) for name in ("output_size", "comparisons", "node_visits")]
            return [[row[i] for i in keep] for row in rows[1:]]

        first = columns(self.bench("--ops", "union,sum", "--families", "ursp"))
        second = columns(self.bench("--ops", "union,sum", "--families", "ursp"))
        self.assertEqual(first, second)

    def test_worker_pool_matches_serial_run(self):
        serial = self.bench("--ops", "union", "--trees", "nd")
        pooled = self.bench("--ops", "union", "--trees", "nd", "--workers", 2)
        header = serial[0]
        index = header.index("comparisons")
        self.assertEqual([row[index] for row in serial[1:]], [row[index] for row in pooled[1:]])

    def test_invalid_grid(self):
        out = self.path("bench.csv")
        result = self.invoke("bench", "--families", "ursc", "--dims", 2, "--out", out)
        self.assertEqual(result.exit_code, 2)
        result = self.invoke("bench", "--ops", "merge", "--out", out)
        self.assertEqual(result.exit_code, 2)


if __name__ == "__main__":
    unittest.main()

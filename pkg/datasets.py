# Synthetic Pareto-set generators and the point-set file format
# URS: uniform points on the unit sphere. URSP: URS with plateaus injected.
# URSC: URS with three correlated dimensions. URSPC: correlation then plateaus.

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from pareto_core import ContractViolation, PointSet, dedup, make_point, oracle_pareto

logger = logging.getLogger(__name__)

DEFAULT_OVERSAMPLE = 4
MAX_ROUNDS = 64
# raw sample size per round stops doubling here
MAX_RAW_POINTS = 2_000_000
PLATEAU_FRACTION = 0.2
CORRELATION_NOISE = 0.05
INVERSE_OFFSET = 1.05

FILE_MAGIC = "# pareto-points v1"
_HEADER = re.compile(r"^d=(\d+) n=(\d+)$")


class Family(str, Enum):
    URS = "urs"
    URSP = "ursp"
    URSC = "ursc"
    URSPC = "urspc"
    UNIFORM = "uniform"


class DatasetError(RuntimeError):
    """A generator could not reach its target size within its retry budget."""


class PointFileError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class DatasetSpec:
    family: Family
    d: int
    n: int
    seed: int = 0
    oversample: int = DEFAULT_OVERSAMPLE
    plateau_fraction: float = PLATEAU_FRACTION
    plateau_dims: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.d < 2:
            raise ContractViolation(f"d must be at least 2, got {self.d}")
        if self.n < 1:
            raise ContractViolation(f"n must be at least 1, got {self.n}")
        if not 0 <= self.seed < 2 ** 64:
            raise ContractViolation(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.oversample < 1:
            raise ContractViolation(f"oversample must be positive, got {self.oversample}")
        if not 0.0 <= self.plateau_fraction <= 1.0:
            raise ContractViolation(f"plateau fraction must lie in [0, 1], got {self.plateau_fraction}")
        if self.family in (Family.URSC, Family.URSPC) and self.d < 3:
            raise ContractViolation(f"{self.family.value} correlates three dimensions, d={self.d}")
        if self.plateau_dims is not None and not 1 <= self.plateau_dims <= self.d:
            raise ContractViolation(f"plateau dims must lie in [1, {self.d}], got {self.plateau_dims}")

    @property
    def resolved_plateau_dims(self) -> int:
        if self.plateau_dims is not None:
            return self.plateau_dims
        if self.family is Family.URSPC:
            return math.ceil(self.d / 3)
        return math.ceil(self.d / 2)


def derive_seed(seed: int, stream: int) -> int:
    """Independent 64-bit seed for a second data set drawn alongside `seed`."""
    state = np.random.SeedSequence(seed, spawn_key=(stream,)).generate_state(1, np.uint64)
    return int(state[0])


def _uniform(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    # random() is [0, 1); flip it to (0, 1]
    return 1.0 - rng.random((n, d))


def _unit_sphere(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    raw = _uniform(rng, n, d)
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def add_plateaus(rng: np.random.Generator, raw: np.ndarray, dims: int,
                 fraction: float = PLATEAU_FRACTION) -> np.ndarray:
    """Overwrite `dims` random dimensions of a random `fraction` of rows with the column median."""
    n, d = raw.shape
    count = int(round(fraction * n))
    if count == 0:
        return raw
    for dim in rng.choice(d, size=dims, replace=False):
        pivot = np.partition(raw[:, dim], n // 2)[n // 2]
        rows = rng.choice(n, size=count, replace=False)
        raw[rows, dim] = pivot
    return raw


def add_correlation(rng: np.random.Generator, raw: np.ndarray,
                    noise: float = CORRELATION_NOISE) -> np.ndarray:
    """Make one random dimension follow another and a third follow its inverse."""
    n, d = raw.shape
    a, b, c = rng.choice(d, size=3, replace=False)
    eta = rng.uniform(-noise, noise, size=(2, n))
    tiny = np.finfo(np.float64).tiny
    raw[:, b] = np.maximum(raw[:, a] * (1.0 + eta[0]), tiny)
    raw[:, c] = np.maximum((INVERSE_OFFSET - raw[:, a]) * (1.0 + eta[1]), tiny)
    return raw


def _transform(spec: DatasetSpec) -> Callable[[np.random.Generator, np.ndarray], np.ndarray]:
    fraction = spec.plateau_fraction
    dims = spec.resolved_plateau_dims
    if spec.family is Family.URSP:
        return lambda rng, raw: add_plateaus(rng, raw, dims, fraction)
    if spec.family is Family.URSC:
        return add_correlation
    if spec.family is Family.URSPC:
        return lambda rng, raw: add_plateaus(rng, add_correlation(rng, raw), dims, fraction)
    return lambda rng, raw: raw


def _to_pointset(raw: np.ndarray, pareto_verified: bool = False) -> PointSet:
    return PointSet(raw.shape[1], tuple(map(tuple, raw.tolist())), pareto_verified)


def _filtered_rounds(spec: DatasetSpec) -> PointSet:
    rng = np.random.default_rng(spec.seed)
    transform = _transform(spec)
    oversample = spec.oversample
    for round_no in range(1, MAX_ROUNDS + 1):
        raw_n = min(oversample * spec.n, MAX_RAW_POINTS)
        raw = transform(rng, _unit_sphere(rng, raw_n, spec.d))
        frontier = oracle_pareto(dedup(_to_pointset(raw)))
        if len(frontier) >= spec.n:
            return PointSet(spec.d, frontier.points[:spec.n], True)
        logger.info(
            "%s round %d: %d of %d raw points on the frontier, need %d",
            spec.family.value, round_no, len(frontier), raw_n, spec.n,
        )
        oversample *= 2
    raise DatasetError(
        f"{spec.family.value} d={spec.d} n={spec.n} seed={spec.seed}: "
        f"frontier still short of n after {MAX_ROUNDS} rounds"
    )


def gen_urs(spec: DatasetSpec) -> PointSet:
    rng = np.random.default_rng(spec.seed)
    points: dict = {}
    for _ in range(MAX_ROUNDS):
        # distinct points on the sphere never dominate each other
        for p in map(tuple, _unit_sphere(rng, spec.n - len(points), spec.d).tolist()):
            points.setdefault(p, None)
        if len(points) == spec.n:
            return PointSet(spec.d, tuple(points), True)
    raise DatasetError(f"urs d={spec.d} n={spec.n}: could not draw {spec.n} distinct points")


def gen_ursp(spec: DatasetSpec) -> PointSet:
    return _filtered_rounds(spec)


def gen_ursc(spec: DatasetSpec) -> PointSet:
    return _filtered_rounds(spec)


def gen_urspc(spec: DatasetSpec) -> PointSet:
    return _filtered_rounds(spec)


def gen_uniform(spec: DatasetSpec) -> PointSet:
    rng = np.random.default_rng(spec.seed)
    return _to_pointset(_uniform(rng, spec.n, spec.d))


GENERATORS = {
    Family.URS: gen_urs,
    Family.URSP: gen_ursp,
    Family.URSC: gen_ursc,
    Family.URSPC: gen_urspc,
    Family.UNIFORM: gen_uniform,
}


def generate(spec: DatasetSpec) -> PointSet:
    points = GENERATORS[spec.family](spec)
    logger.debug("generated %s d=%d n=%d seed=%d", spec.family.value, spec.d, len(points), spec.seed)
    return points


def generate_raw(spec: DatasetSpec) -> PointSet:
    """n transformed points of the family before any dominance filtering."""
    if spec.family is Family.UNIFORM:
        return gen_uniform(spec)
    rng = np.random.default_rng(spec.seed)
    raw = _transform(spec)(rng, _unit_sphere(rng, spec.n, spec.d))
    return _to_pointset(raw)


def write_points(s: PointSet, path: Union[str, Path]) -> None:
    lines = [FILE_MAGIC, f"d={s.dim} n={len(s)}"]
    lines.extend(" ".join(repr(value) for value in p) for p in s)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_points(path: Union[str, Path]) -> PointSet:
    with open(path, encoding="utf-8", newline="") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != FILE_MAGIC:
        raise PointFileError(f"expected header {FILE_MAGIC!r}", 1)
    header = _HEADER.match(lines[1].rstrip("\r")) if len(lines) > 1 else None
    if header is None:
        raise PointFileError("expected 'd=<int> n=<int>'", 2)
    d, n = int(header.group(1)), int(header.group(2))
    if d < 2:
        raise PointFileError(f"dimensionality must be at least 2, got {d}", 2)
    rows = lines[2:]
    points = []
    for offset, row in enumerate(rows):
        line_no = offset + 3
        if offset >= n:
            raise PointFileError(f"more rows than the declared n={n}", line_no)
        fields = row.split()
        if len(fields) != d:
            raise PointFileError(f"expected {d} values, found {len(fields)}", line_no)
        try:
            points.append(make_point(float(field) for field in fields))
        except ValueError as exc:
            raise PointFileError(str(exc), line_no) from exc
    if len(points) != n:
        raise PointFileError(f"declared n={n} but found {len(points)} rows", len(rows) + 3)
    return PointSet(d, tuple(points))

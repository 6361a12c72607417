"""Random instance generation and the factorial testbed."""

from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .demand import DEFAULT_EPSILON, PatternKind, pattern_demands
from .guidance import compute_rs_plan
from .instance import Instance
from .search import DescentStrategy, bnb_solve, enumerate_baseline

Range = tuple[float, float]

METHODS = ("baseline", "bnb", "bnb-rand", "bnb-guided")
CSV_COLUMNS = ("instance_id", "T", "K", "W", "b", "pattern", "method", "cost",
               "nodes_computed", "nodes_pruned", "pruning_pct_visited",
               "pruning_pct_fulltree", "n_reviews", "seconds")
SUMMARY_COLUMNS = ("factor", "level", "method", "instances", "mean_seconds",
                   "mean_pruning_pct_visited", "mean_pruning_pct_fulltree", "mean_n_reviews")
GRID_K = (80, 160, 320)
GRID_W = (80, 160, 320)
GRID_B = (4, 8, 16)


def _as_range(value: float | Range, name: str) -> Range:
    lo, hi = (value, value) if np.isscalar(value) else value
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ValueError(f"{name}: malformed range ({lo}, {hi})")
    return float(lo), float(hi)


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for instances; a cost given as a pair is drawn uniformly from it.

    Demand comes from ``means`` if set, else from ``pattern``, else each
    period's mean is drawn from ``mean_range``. K and W are drawn as integers.
    """

    T: int
    K: float | Range = (80, 320)
    W: float | Range = (80, 320)
    b: float | Range = (4, 16)
    h: float = 1.0
    means: tuple[float, ...] | None = None
    pattern: PatternKind | None = None
    mean_range: Range = (30, 70)
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        for name in ("K", "W", "b", "mean_range"):
            _as_range(getattr(self, name), name)
        for name in ("K", "W"):
            lo, hi = _as_range(getattr(self, name), name)
            if np.ceil(lo) > np.floor(hi):
                raise ValueError(f"{name}: range ({lo}, {hi}) holds no integer")
        if self.means is not None and len(self.means) != self.T:
            raise ValueError(f"means has {len(self.means)} entries, T = {self.T}")


def generate_instance(spec: InstanceSpec, seed: int) -> Instance:
    rng = np.random.default_rng(seed)

    def integer(r):
        lo, hi = r
        return float(rng.integers(int(np.ceil(lo)), int(np.floor(hi)) + 1))

    K = integer(_as_range(spec.K, "K"))
    W = integer(_as_range(spec.W, "W"))
    b = float(rng.uniform(*_as_range(spec.b, "b")))
    if spec.means is not None:
        means = tuple(spec.means)
    elif spec.pattern is not None:
        means = tuple(pattern_demands(spec.pattern, spec.T, int(rng.integers(2**31))))
    else:
        means = tuple(rng.uniform(*spec.mean_range, size=spec.T))
    return Instance(demand_means=means, K=K, W=W, h=spec.h, b=b, epsilon=spec.epsilon)


def random_instance(T: int, seed: int) -> Instance:
    """An instance from the desk-scale cost and demand distribution."""
    return generate_instance(InstanceSpec(T), seed)


@dataclass(frozen=True)
class Cell:
    instance_id: str
    K: float
    W: float
    b: float
    pattern: PatternKind
    instance: Instance


def testbed_cells(T: int, seed: int = 0, K_values: Sequence[float] = GRID_K,
                  W_values: Sequence[float] = GRID_W, b_values: Sequence[float] = GRID_B,
                  patterns: Iterable[PatternKind] = tuple(PatternKind)) -> list[Cell]:
    """One instance per grid cell; only the random pattern depends on ``seed``."""
    cells = []
    for n, (K, W, b, pat) in enumerate(itertools.product(K_values, W_values, b_values, patterns)):
        pat = PatternKind(pat)
        spec = InstanceSpec(T, K=K, W=W, b=b, pattern=pat)
        inst = generate_instance(spec, seed * 100_003 + n)
        cells.append(Cell(f"T{T}-K{K:g}-W{W:g}-b{b:g}-{pat.value}", K, W, b, pat, inst))
    return cells


def _run_method(inst: Instance, method: str, seed: int) -> dict:
    start = time.perf_counter()
    if method == "baseline":
        res = enumerate_baseline(inst)
        plan, cost = res.plan, res.cost
        computed, pruned, visited, full = inst.T * 2**inst.T, 0, 0.0, 0.0
    else:
        if method == "bnb":
            strategy = DescentStrategy.deterministic()
        elif method == "bnb-rand":
            strategy = DescentStrategy.randomized(seed)
        elif method == "bnb-guided":
            strategy = DescentStrategy.guided(compute_rs_plan(inst), seed)
        else:
            raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
        res = bnb_solve(inst, strategy)
        s = res.stats
        plan, cost = res.plan, res.cost
        computed, pruned = s.nodes_computed, s.nodes_pruned
        visited, full = s.pruning_pct_visited, s.pruning_pct_fulltree
    return dict(method=method, cost=cost, nodes_computed=computed, nodes_pruned=pruned,
                pruning_pct_visited=visited, pruning_pct_fulltree=full,
                n_reviews=sum(plan), seconds=time.perf_counter() - start)


def _run_cell(args) -> list[dict]:
    cell, T, methods, seed = args
    rows = []
    for m in methods:
        row = dict(instance_id=cell.instance_id, T=T, K=cell.K, W=cell.W, b=cell.b,
                   pattern=cell.pattern.value)
        row.update(_run_method(cell.instance, m, seed))
        rows.append(row)
    return rows


@dataclass
class BenchReport:
    rows: list[dict]

    def summary(self) -> list[dict]:
        """Means per factor level and method, one factor at a time."""
        out = []
        for factor in ("K", "W", "b", "pattern"):
            groups: dict[tuple, list[dict]] = {}
            for r in self.rows:
                groups.setdefault((r[factor], r["method"]), []).append(r)
            for (level, method), rs in groups.items():
                out.append(dict(
                    factor=factor, level=level, method=method, instances=len(rs),
                    mean_seconds=float(np.mean([r["seconds"] for r in rs])),
                    mean_pruning_pct_visited=float(np.mean([r["pruning_pct_visited"] for r in rs])),
                    mean_pruning_pct_fulltree=float(np.mean([r["pruning_pct_fulltree"] for r in rs])),
                    mean_n_reviews=float(np.mean([r["n_reviews"] for r in rs]))))
        return out

    def to_csv(self) -> str:
        return _csv(CSV_COLUMNS, self.rows)

    def summary_csv(self) -> str:
        return _csv(SUMMARY_COLUMNS, self.summary())


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def run_testbed(T: int, methods: Sequence[str] = ("bnb", "bnb-guided"), output: str | Path | None = None,
                seed: int = 0, workers: int = 1, cells: Sequence[Cell] | None = None) -> BenchReport:
    """Solve every cell with every method; rows keep cell order, then method order."""
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    cells = list(cells) if cells is not None else testbed_cells(T, seed)
    jobs = [(c, T, tuple(methods), seed) for c in cells] if methods else []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell, jobs))
    else:
        chunks = [_run_cell(j) for j in jobs]
    report = BenchReport([r for chunk in chunks for r in chunk])
    if output is not None:
        Path(output).write_text(report.to_csv())
    return report

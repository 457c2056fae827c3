"""Rigidity sweep over (n, theta, seed) with a deterministic ordered merge."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

from . import __version__
from .errors import CapacityError, DomainError
from .games import CHSH_OPTIMAL_BIAS, FFL_VALUE, build_chsh_game
from .rigidity import BOUND_IDS, BoundReport, run_bound_suite
from .serialize import SCHEMA_VERSION, fmt, report_to_dict
from .strategies import (
    block_size,
    build_ffl_strategy,
    build_optimal_chsh_strategy,
    build_reference_strategy,
    measure_epsilon,
    perturb_strategy,
)
from .tensor import DEFAULT_ENTRY_CAP

WORKERS_ENV = "XORRIGIDITY_WORKERS"
CSV_COLUMNS = ("bound_id", "n", "theta", "seed", "epsilon", "residual", "stated_bound", "slack", "passed")

DEFAULT_N = (2, 3, 4)
DEFAULT_THETA = (0.0, 0.001, 0.01, 0.05, 0.1)
DEFAULT_SEEDS = tuple(range(1, 11))


@dataclass(frozen=True)
class SweepConfig:
    game: str = "chsh"
    n_values: tuple = DEFAULT_N
    theta_grid: tuple = DEFAULT_THETA
    seeds: tuple = DEFAULT_SEEDS
    bounds: tuple | None = None
    output: str | None = None
    format: str = "json"
    timings: bool = False

    def __post_init__(self):
        if self.game not in ("chsh", "ffl"):
            raise DomainError(f"game must be chsh or ffl, got {self.game!r}")
        if self.game == "ffl":
            object.__setattr__(self, "n_values", (2,))
        if not self.n_values or any(int(n) < 2 for n in self.n_values):
            raise DomainError("n must be ≥ 2")
        if any(t < 0 for t in self.theta_grid):
            raise DomainError("theta values must be nonnegative")
        if self.format not in ("json", "csv"):
            raise DomainError(f"format must be json or csv, got {self.format!r}")
        if self.bounds is not None:
            unknown = sorted(set(self.bounds) - set(BOUND_IDS))
            if unknown:
                raise DomainError(f"unknown bound ids {unknown}")
        object.__setattr__(self, "n_values", tuple(sorted({int(n) for n in self.n_values})))
        object.__setattr__(self, "theta_grid", tuple(sorted({float(t) for t in self.theta_grid})))
        object.__setattr__(self, "seeds", tuple(sorted({int(s) for s in self.seeds})))

    def points(self) -> list[tuple[int, float, int]]:
        return [(n, t, s) for n in self.n_values for t in self.theta_grid for s in self.seeds]

    def echo(self) -> dict:
        d = asdict(self)
        d["theta_grid"] = [fmt(t) for t in self.theta_grid]
        d["n_values"] = list(self.n_values)
        d["seeds"] = list(self.seeds)
        d["bounds"] = list(self.bounds) if self.bounds is not None else None
        d.pop("output")
        d.pop("timings")
        return d


def intertwiner_entries(n: int) -> int:
    """Dense entries of T against the (doubled for odd n) reference."""
    d = block_size(n)
    ref = 2 * d if n % 2 else d
    return d * d * ref * ref


@dataclass
class PointResult:
    n: int
    theta: float
    seed: int
    epsilon: float | None
    reports: list = field(default_factory=list)
    error: str | None = None
    seconds: float = 0.0


@lru_cache(maxsize=None)
def _base(game: str, n: int):
    if game == "ffl":
        return build_ffl_strategy().correlator, build_reference_strategy(2), FFL_VALUE
    return build_optimal_chsh_strategy(n), build_reference_strategy(n), CHSH_OPTIMAL_BIAS


def run_point(game: str, n: int, theta: float, seed: int, bounds=None) -> PointResult:
    start = time.perf_counter()
    try:
        if intertwiner_entries(n) > DEFAULT_ENTRY_CAP:
            raise CapacityError(f"n={n}: intertwiner needs {intertwiner_entries(n)} entries")
        base, ref, optimum = _base(game, n)
        chsh = build_chsh_game(n)
        s, _ = perturb_strategy(base, theta, seed, game=chsh, optimum=float(optimum))
        eps = measure_epsilon(s, chsh, float(optimum))
        reports = [
            r.with_context(seed=seed, theta=theta, game=game)
            for r in run_bound_suite(s, ref, eps, n, bounds, lemma7_coefficient=float(optimum))
        ]
        return PointResult(n, theta, seed, eps, reports, None, time.perf_counter() - start)
    except CapacityError as exc:
        return PointResult(n, theta, seed, None, [], str(exc), time.perf_counter() - start)


def _run_point_args(args) -> PointResult:
    return run_point(*args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run_sweep(config: SweepConfig, workers: int | None = None) -> list[PointResult]:
    workers = workers or worker_count()
    args = [(config.game, n, t, s, config.bounds) for n, t, s in config.points()]
    if workers == 1:
        return [_run_point_args(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so the merge is deterministic.
        return list(pool.map(_run_point_args, args, chunksize=4))


def all_reports(results: list[PointResult]) -> list[BoundReport]:
    return [r for p in results for r in p.reports]


def summarize(results: list[PointResult]) -> dict:
    reports = all_reports(results)
    per_bound = {}
    for bid in BOUND_IDS:
        rs = [r for r in reports if r.bound_id == bid]
        if not rs:
            continue
        per_bound[bid] = {
            "count": len(rs),
            "failures": sum(not r.passed for r in rs),
            "max_slack": fmt(max(r.slack for r in rs)),
            "min_slack": fmt(min(r.slack for r in rs)),
            "max_residual": fmt(max(r.residual for r in rs)),
        }
    failures = [
        {"bound_id": r.bound_id, "n": r.n, "theta": fmt(r.theta), "seed": r.seed}
        for r in reports if not r.passed
    ]
    return {
        "points": len(results),
        "reports": len(reports),
        "any_failures": bool(failures),
        "failures": failures,
        "capacity_errors": [
            {"n": p.n, "theta": fmt(p.theta), "seed": p.seed, "error": p.error} for p in results if p.error
        ],
        "per_bound": per_bound,
    }


def run_report(config: SweepConfig, results: list[PointResult]) -> dict:
    points = []
    for p in results:
        entry = {"n": p.n, "theta": fmt(p.theta), "seed": p.seed,
                 "epsilon": None if p.epsilon is None else fmt(p.epsilon), "error": p.error}
        if config.timings:
            entry["seconds"] = fmt(p.seconds)
        points.append(entry)
    return {
        "schema": "run-report",
        "version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "config": config.echo(),
        "summary": summarize(results),
        "points": points,
        "reports": [report_to_dict(r) for r in all_reports(results)],
    }


def reports_csv(results: list[PointResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in all_reports(results):
        writer.writerow([
            r.bound_id, r.n, fmt(r.theta), r.seed, fmt(r.epsilon), fmt(r.residual),
            fmt(r.stated_bound), fmt(r.slack), "true" if r.passed else "false",
        ])
    return buf.getvalue()


def exit_code(results: list[PointResult]) -> int:
    if any(not r.passed for r in all_reports(results)):
        return 1
    if any(p.error for p in results):
        return 3
    return 0

"""Experiment runner: seeded estimator trials checked against exact bands.

The runner owns the only piece of full-distribution knowledge in an
experiment: it computes the exact acceptance band once, then hands each
trial a fresh oracle seeded from (master_seed, trial_index).  Trials are
independent, so they can run serially or in a process pool with identical
results; records are always assembled in trial order.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import time
from dataclasses import dataclass
from .distribution import (
    MAX_EPS,
    DiscreteDistribution,
    exact_ess,
    read_distribution,
)
from .errors import OutOfRangeError
from .estimator import (
    EstimatorParams,
    estimate_ess,
    estimate_ess_unicriterion,
    SLACK_CAP,
)
from .generators import (
    FAMILIES,
    GeneratorSpec,
    make_distribution,
    parse_spec,
    spec_string,
)
from .oracle import DualOracle, derive_seed, sampler_table

MODES = ("bicriteria", "unicriterion")
FORMATS = ("csv", "json")

# relative tolerance applied at band endpoints to absorb float error
BAND_RELATIVE_TOLERANCE = 1e-12

_CSV_HEADER = (
    "trial,seed,estimate,raw_mean,band_low,band_high,success,"
    "samp_queries,eval_queries"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``dist_source`` is a distribution file path, a generator string such as
    ``zipf:n=100000,s=1.0``, or a :class:`GeneratorSpec`.  ``gamma`` is
    required in bicriteria mode and ignored in unicriterion mode.
    """

    dist_source: str | GeneratorSpec
    eps: float
    beta: float
    gamma: float | None
    mode: str
    trials: int
    master_seed: int
    out_path: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise OutOfRangeError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise OutOfRangeError(
                f"format must be one of {FORMATS}, got {self.format!r}"
            )
        if self.trials < 1:
            raise OutOfRangeError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.eps < 1.0:
            raise OutOfRangeError(f"eps must lie in (0, 1), got {self.eps!r}")
        if not self.beta > 0.0:
            raise OutOfRangeError(f"beta must be positive, got {self.beta!r}")
        if self.mode == "bicriteria":
            if self.gamma is None or not self.gamma > 0.0:
                raise OutOfRangeError(
                    f"bicriteria mode needs gamma > 0, got {self.gamma!r}"
                )


@dataclass(frozen=True)
class TrialRecord:
    """One estimator call and its verdict against the exact band."""

    trial_index: int
    seed: int
    estimate: float
    raw_mean: float
    band_low: float
    band_high: float
    success: bool
    samp_queries: int
    eval_queries: int
    wall_time_ns: int


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated outcome of an experiment plus all per-trial records."""

    config: ExperimentConfig
    success_rate: float
    estimate_mean: float
    estimate_min: float
    estimate_max: float
    exact_ess_eps: int
    exact_ess_relaxed: int
    band_low: float
    band_high: float
    total_samp_queries: int
    total_eval_queries: int
    trials: tuple[TrialRecord, ...]


def load_distribution(source) -> DiscreteDistribution:
    """Resolve a config ``dist_source`` into a validated distribution."""
    if isinstance(source, DiscreteDistribution):
        return source
    if isinstance(source, GeneratorSpec):
        return make_distribution(source)
    text = str(source)
    family = text.partition(":")[0]
    if family in FAMILIES:
        return make_distribution(parse_spec(text))
    return read_distribution(text)


def band_endpoints(
    dist: DiscreteDistribution,
    eps: float,
    beta: float,
    gamma: float | None,
    mode: str,
) -> tuple[float, float, int, int]:
    """Exact acceptance band for one configuration.

    Returns (band_low, band_high, ess at eps, ess at the relaxed level).
    In bicriteria mode the band is [ess_relaxed, (1+gamma)*ess_eps]; in
    unicriterion mode it is [ess_relaxed, ess_eps] with the relaxed level
    using the capped beta actually served by the estimator.
    """
    ess_eps = exact_ess(dist, eps)
    if mode == "bicriteria":
        relaxed_level = (1.0 + beta) * eps
    else:
        relaxed_level = (1.0 + min(beta, SLACK_CAP)) * eps
    # at or beyond level 1 a single point mass is always close enough
    ess_relaxed = 1 if relaxed_level >= MAX_EPS else exact_ess(dist, relaxed_level)
    if mode == "bicriteria":
        band_high = (1.0 + float(gamma)) * ess_eps
    else:
        band_high = float(ess_eps)
    return float(ess_relaxed), band_high, ess_eps, ess_relaxed


def _within_band(estimate: float, low: float, high: float, mode: str) -> bool:
    tol = BAND_RELATIVE_TOLERANCE * high
    if mode == "unicriterion":
        # support sizes are integers and the unicriterion band has integer
        # endpoints; judge the rounded value (round half up)
        estimate = math.floor(estimate + 0.5)
    return (low - tol) <= estimate <= (high + tol)


def check_band(
    estimate: float,
    dist: DiscreteDistribution,
    eps: float,
    beta: float,
    gamma: float | None,
    mode: str = "bicriteria",
) -> bool:
    """Is ``estimate`` inside the exact acceptance band for these parameters?"""
    low, high, _, _ = band_endpoints(dist, eps, beta, gamma, mode)
    return _within_band(estimate, low, high, mode)


def _run_trial(
    dist: DiscreteDistribution,
    config: ExperimentConfig,
    band_low: float,
    band_high: float,
    index: int,
) -> TrialRecord:
    seed = derive_seed(config.master_seed, index)
    oracle = DualOracle(dist, seed)
    start = time.perf_counter_ns()
    if config.mode == "bicriteria":
        result = estimate_ess(
            oracle, EstimatorParams(config.eps, config.beta, config.gamma)
        )
    else:
        result = estimate_ess_unicriterion(oracle, config.eps, config.beta)
    elapsed = time.perf_counter_ns() - start
    return TrialRecord(
        trial_index=index,
        seed=seed,
        estimate=result.estimate,
        raw_mean=result.raw_mean,
        band_low=band_low,
        band_high=band_high,
        success=_within_band(result.estimate, band_low, band_high, config.mode),
        samp_queries=result.samp_queries,
        eval_queries=result.eval_queries,
        wall_time_ns=elapsed,
    )


# Worker-side context for parallel trials; set once per worker process.
_TRIAL_CONTEXT = None


def _init_trial_worker(context) -> None:
    global _TRIAL_CONTEXT
    _TRIAL_CONTEXT = context


def _trial_by_index(index: int) -> TrialRecord:
    dist, config, band_low, band_high = _TRIAL_CONTEXT
    return _run_trial(dist, config, band_low, band_high, index)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run all trials of ``config`` and (optionally) write the report.

    ``jobs`` > 1 runs trials in a process pool.  Per-trial seeds are derived
    from (master_seed, trial_index) alone, so serial and parallel execution
    produce identical records apart from wall-clock timings.
    """
    dist = load_distribution(config.dist_source)
    band_low, band_high, ess_eps, ess_relaxed = band_endpoints(
        dist, config.eps, config.beta, config.gamma, config.mode
    )
    sampler_table(dist)  # build once here so workers inherit it

    indices = range(config.trials)
    if jobs <= 1 or config.trials == 1:
        records = [
            _run_trial(dist, config, band_low, band_high, i) for i in indices
        ]
    else:
        context = (dist, config, band_low, band_high)
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:  # pragma: no cover - non-POSIX fallback
            ctx = multiprocessing.get_context()
        chunk = max(1, config.trials // (jobs * 4))
        with ctx.Pool(
            processes=jobs, initializer=_init_trial_worker, initargs=(context,)
        ) as pool:
            records = pool.map(_trial_by_index, indices, chunksize=chunk)

    estimates = [r.estimate for r in records]
    report = ExperimentReport(
        config=config,
        success_rate=sum(r.success for r in records) / config.trials,
        estimate_mean=math.fsum(estimates) / config.trials,
        estimate_min=min(estimates),
        estimate_max=max(estimates),
        exact_ess_eps=ess_eps,
        exact_ess_relaxed=ess_relaxed,
        band_low=band_low,
        band_high=band_high,
        total_samp_queries=sum(r.samp_queries for r in records),
        total_eval_queries=sum(r.eval_queries for r in records),
        trials=tuple(records),
    )
    if config.out_path is not None:
        with open(config.out_path, "wb") as fh:
            fh.write(emit_report(report, config.format))
    return report


# -- report serialization ---------------------------------------------------


def _fmt(value: float) -> str:
    # 17 significant digits round-trip any double exactly
    return format(float(value), ".17g")


def _json_text(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_json_text(v) for v in value) + "]"
    if isinstance(value, dict):
        return (
            "{"
            + ",".join(f"{json.dumps(k)}:{_json_text(v)}" for k, v in value.items())
            + "}"
        )
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _config_dict(config: ExperimentConfig) -> dict:
    source = config.dist_source
    if isinstance(source, GeneratorSpec):
        source = spec_string(source)
    return {
        "dist_source": str(source),
        "eps": config.eps,
        "beta": config.beta,
        "gamma": config.gamma,
        "mode": config.mode,
        "trials": config.trials,
        "master_seed": config.master_seed,
        "out_path": config.out_path,
        "format": config.format,
    }


def _trial_dict(record: TrialRecord) -> dict:
    return {
        "trial": record.trial_index,
        "seed": record.seed,
        "estimate": record.estimate,
        "raw_mean": record.raw_mean,
        "band_low": record.band_low,
        "band_high": record.band_high,
        "success": record.success,
        "samp_queries": record.samp_queries,
        "eval_queries": record.eval_queries,
        "wall_time_ns": record.wall_time_ns,
    }


def report_dict(report: ExperimentReport) -> dict:
    """Report as plain nested dicts (stable field order)."""
    return {
        "config": _config_dict(report.config),
        "summary": {
            "success_rate": report.success_rate,
            "estimate_mean": report.estimate_mean,
            "estimate_min": report.estimate_min,
            "estimate_max": report.estimate_max,
            "exact_ess_eps": report.exact_ess_eps,
            "exact_ess_relaxed": report.exact_ess_relaxed,
            "band_low": report.band_low,
            "band_high": report.band_high,
            "total_samp_queries": report.total_samp_queries,
            "total_eval_queries": report.total_eval_queries,
        },
        "trials": [_trial_dict(r) for r in report.trials],
    }


def emit_report(report: ExperimentReport, format: str = "json") -> bytes:
    """Serialize a report.

    CSV holds the per-trial table only (header ``trial,seed,...``, no
    timing column); JSON holds config, summary, and trials.  Floats are
    rendered with 17 significant digits so parsing reproduces them exactly.
    """
    if format == "csv":
        lines = [_CSV_HEADER]
        for r in report.trials:
            lines.append(
                f"{r.trial_index},{r.seed},{_fmt(r.estimate)},{_fmt(r.raw_mean)},"
                f"{_fmt(r.band_low)},{_fmt(r.band_high)},"
                f"{'true' if r.success else 'false'},"
                f"{r.samp_queries},{r.eval_queries}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "json":
        return (_json_text(report_dict(report)) + "\n").encode("utf-8")
    raise OutOfRangeError(f"format must be one of {FORMATS}, got {format!r}")

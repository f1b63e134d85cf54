"""Two-stage sampling estimator for effective support size.

Stage one draws a batch of probability-revealing samples and takes an
empirical quantile of it under the canonical (probability, label) order;
the selected element is the pivot.  Stage two draws a second batch and
averages the inverse probabilities of the samples that rank at or above
the pivot.  That average is an unbiased estimate of the number of elements
at or above the pivot, and the returned value is the average times a small
calibration factor.

Everything the estimator learns about the distribution comes through the
oracle handle, and probabilities are only ever taken for elements that
were actually sampled, so the procedure runs unchanged whether probability
lookups are restricted to sampled items or not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptySampleError, OutOfRangeError
from .oracle import DualOracle

# The variance analysis behind the guarantees assumes both slack
# parameters are at most 0.2.  Larger requests only widen the acceptance
# band, so they are served at the cap.
SLACK_CAP = 0.2

PIVOT_SAMPLE_CONSTANT = 180.0
MEAN_SAMPLE_CONSTANT = 500.0

# Stage-two draws are consumed in fixed-size chunks.  The chunk size never
# changes what is drawn (one uniform per draw) but it does fix the float
# summation order, so it must stay constant for bit-reproducibility.
# 64Ki keeps the whole pipeline's working set inside the CPU caches.
_CHUNK = 1 << 16


@dataclass(frozen=True)
class EstimatorParams:
    """Target level ``eps`` plus the two slack parameters ``beta`` and ``gamma``.

    ``beta`` widens the tolerated level to (1+beta)*eps; ``gamma`` is the
    tolerated multiplicative error.  Values above ``SLACK_CAP`` are clamped
    internally (see ``beta_eff`` / ``gamma_eff``).
    """

    eps: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.eps < 1.0:
            raise OutOfRangeError(f"eps must lie in (0, 1), got {self.eps!r}")
        if not self.beta > 0.0:
            raise OutOfRangeError(f"beta must be positive, got {self.beta!r}")
        if not self.gamma > 0.0:
            raise OutOfRangeError(f"gamma must be positive, got {self.gamma!r}")

    @property
    def beta_eff(self) -> float:
        return min(self.beta, SLACK_CAP)

    @property
    def gamma_eff(self) -> float:
        return min(self.gamma, SLACK_CAP)

    @property
    def is_degenerate(self) -> bool:
        """True when even a single point mass is within the tolerated distance."""
        return (1.0 + self.beta_eff) * self.eps >= 1.0


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of one estimator run.

    ``estimate`` is the calibrated output; ``raw_mean`` the plain stage-two
    average it was derived from.  ``pivot`` is the stage-one (label, prob)
    pair, or None on the degenerate path.  Query counters cover this run
    only.
    """

    estimate: float
    raw_mean: float
    pivot: tuple[int, float] | None
    quantile_sample_size: int
    estimator_sample_size: int
    samp_queries: int
    eval_queries: int


def _ceil_sample_size(value: float) -> int:
    # ceiling with a relative guard: decimal parameters often put the exact
    # result a few ulp past an integer, which must not bump the size by one
    return max(1, int(math.ceil(value * (1.0 - 1e-12))))


def sample_sizes(params: EstimatorParams) -> tuple[int, int]:
    """Stage sizes (pivot batch, averaging batch).

    Both depend only on (eps, beta_eff, gamma_eff) -- never on the
    distribution being queried.
    """
    eps = params.eps
    beta = params.beta_eff
    gamma = params.gamma_eff
    r_size = _ceil_sample_size(PIVOT_SAMPLE_CONSTANT / (beta * beta * eps))
    t_size = _ceil_sample_size(MEAN_SAMPLE_CONSTANT / (eps * beta * gamma * gamma))
    return r_size, t_size


def _strict_rank_index(threshold: float, size: int) -> int:
    # 0-based position of the smallest order statistic whose 1-based rank
    # strictly exceeds ``threshold``.  Snap to an adjacent integer first:
    # the strictness boundary matters exactly when threshold is integral,
    # and float products drift off integers by a few ulp.
    nearest = round(threshold)
    if abs(threshold - nearest) <= 1e-9 * max(1.0, abs(threshold)):
        rank = int(nearest)
    else:
        rank = int(math.floor(threshold))
    return min(rank, size - 1)


def empirical_quantile(labels, probs, theta: float) -> tuple[int, float]:
    """Quantile of a probability-revealing sample under the canonical order.

    Returns the (label, prob) of the smallest sampled element whose
    multiplicity-counted rank strictly exceeds ``theta`` times the sample
    size.  Ties between equal probabilities are broken by label, matching
    the distribution-level order exactly.
    """
    labels = np.asarray(labels, dtype=np.uint64)
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0:
        raise EmptySampleError("empirical quantile of an empty sample")
    if not 0.0 < theta < 1.0:
        raise OutOfRangeError(f"theta must lie in (0, 1), got {theta!r}")
    order = np.lexsort((labels, probs))
    j = order[_strict_rank_index(theta * probs.size, probs.size)]
    return int(labels[j]), float(probs[j])


def select_pivot(oracle: DualOracle, params: EstimatorParams) -> tuple[int, float]:
    """Run stage one: draw the pivot batch and return its quantile element."""
    if params.is_degenerate:
        raise OutOfRangeError(
            "degenerate parameters: any single element is already a valid answer"
        )
    r_size, _ = sample_sizes(params)
    labels, probs = oracle.sample_with_prob_many(r_size)
    theta = (1.0 + params.beta_eff / 2.0) * params.eps
    return empirical_quantile(labels, probs, theta)


def inverse_prob_terms(labels, probs, pivot: tuple[int, float]) -> np.ndarray:
    """Per-sample contributions: 1/prob where the sample ranks at or above
    the pivot in canonical order, 0 otherwise.

    The mean of these terms over independent draws is an unbiased estimate
    of the number of elements at or above the pivot.  ``probs`` must be the
    samples' own probabilities (hence positive).
    """
    pivot_label, pivot_prob = pivot
    labels = np.asarray(labels, dtype=np.uint64)
    probs = np.asarray(probs, dtype=np.float64)
    at_or_above = probs > pivot_prob
    ties = probs == pivot_prob
    if ties.any():
        at_or_above |= ties & (labels >= np.uint64(pivot_label))
    return at_or_above / probs


def _degenerate_result() -> EstimateResult:
    return EstimateResult(
        estimate=1.0,
        raw_mean=1.0,
        pivot=None,
        quantile_sample_size=0,
        estimator_sample_size=0,
        samp_queries=0,
        eval_queries=0,
    )


def estimate_ess(oracle: DualOracle, params: EstimatorParams) -> EstimateResult:
    """Estimate the effective support size at level ``params.eps``.

    When (1+beta)*eps >= 1 the answer 1 is always valid and is returned
    without touching the oracle.  Otherwise the guarantee is that, with
    probability at least 2/3 per call, the estimate lies between the
    effective support size at level (1+beta)*eps and (1+gamma) times the
    one at level eps.
    """
    if params.is_degenerate:
        return _degenerate_result()
    samp_before, eval_before = oracle.query_counts()
    r_size, t_size = sample_sizes(params)
    pivot = select_pivot(oracle, params)

    chunk_sums = []
    remaining = t_size
    while remaining > 0:
        batch = min(_CHUNK, remaining)
        labels, probs = oracle.sample_with_prob_many(batch)
        chunk_sums.append(float(inverse_prob_terms(labels, probs, pivot).sum()))
        remaining -= batch
    raw_mean = math.fsum(chunk_sums) / t_size

    samp_after, eval_after = oracle.query_counts()
    return EstimateResult(
        estimate=(1.0 + params.gamma_eff / 2.0) * raw_mean,
        raw_mean=raw_mean,
        pivot=pivot,
        quantile_sample_size=r_size,
        estimator_sample_size=t_size,
        samp_queries=samp_after - samp_before,
        eval_queries=eval_after - eval_before,
    )


def estimate_ess_unicriterion(
    oracle: DualOracle, eps: float, beta: float
) -> EstimateResult:
    """Estimate with no multiplicative slack in the guarantee.

    Runs the two-stage estimator with a halved distance slack and a
    multiplicative slack tied to it (gamma = eps * beta/2), then rescales
    the output by 1/(1+gamma).  With probability at least 2/3 per call the
    result lies between the effective support sizes at levels (1+beta)*eps
    and eps -- the gamma = 0 form of the guarantee.  Rounding the returned
    real to the nearest integer is the caller's job.
    """
    eps = float(eps)
    beta = float(beta)
    if not 0.0 < eps < 1.0:
        raise OutOfRangeError(f"eps must lie in (0, 1), got {eps!r}")
    if not beta > 0.0:
        raise OutOfRangeError(f"beta must be positive, got {beta!r}")
    beta_capped = min(beta, SLACK_CAP)
    if (1.0 + beta_capped) * eps >= 1.0:
        return _degenerate_result()
    beta_inner = beta_capped / 2.0
    gamma = eps * beta_inner
    inner = estimate_ess(oracle, EstimatorParams(eps, beta_inner, gamma))
    return replace(inner, estimate=inner.estimate / (1.0 + gamma))

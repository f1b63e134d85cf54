"""Finite discrete distributions with exact ground-truth computations.

Elements are (label, probability) pairs with unsigned 64-bit labels.  The
canonical order sorts elements by increasing probability, breaking ties by
label, and every quantile or effective-support-size question is answered
against that order.  Functions here see the whole distribution; they serve
as exact references for the sampling-based estimator, which never gets
this kind of access.
"""

from __future__ import annotations

import csv
import json
import math
import operator
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DuplicateLabelError,
    MassNotOneError,
    NegativeProbabilityError,
    OutOfRangeError,
    UnknownLabelError,
)

MASS_TOLERANCE = 1e-9

# Largest admissible quantile level.  Above this the strict comparison
# against the cumulative mass sits inside the mass-sum tolerance itself,
# where float noise could flip it.
MAX_EPS = 1.0 - 1e-9

_UINT64_MAX = 2**64 - 1


def _as_label_array(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.ndim != 1:
            raise OutOfRangeError("labels must form a one-dimensional sequence")
        if np.issubdtype(values.dtype, np.unsignedinteger):
            return values.astype(np.uint64)
        if np.issubdtype(values.dtype, np.signedinteger):
            if values.size and int(values.min()) < 0:
                raise OutOfRangeError("labels must be unsigned integers")
            return values.astype(np.uint64)
        raise OutOfRangeError(f"labels must be integers, got dtype {values.dtype}")
    # plain sequences go element by element: numpy would silently turn
    # ints above 2**63-1 into floats
    seq = list(values)
    out = np.empty(len(seq), dtype=np.uint64)
    for i, value in enumerate(seq):
        try:
            label = operator.index(value)
        except TypeError:
            raise OutOfRangeError(f"label {value!r} is not an integer") from None
        if not 0 <= label <= _UINT64_MAX:
            raise OutOfRangeError(f"label {label} does not fit in 64 bits")
        out[i] = label
    return out


class DiscreteDistribution:
    """A validated finite distribution and its canonical element order.

    Construction checks every invariant (unique uint64 labels, nonnegative
    finite probabilities, total mass 1 within ``MASS_TOLERANCE``) and builds
    the canonical rank: ``order`` is the permutation sorting elements by
    (probability, label) and ``cumulative`` holds prefix sums of probability
    along it.  Instances are immutable afterwards and safe to share across
    threads.

    Elements with probability 0 are kept in the table -- they model padding
    of the universe with unreachable items -- but they never influence
    quantiles or effective support sizes.
    """

    __slots__ = (
        "labels",
        "probs",
        "order",
        "cumulative",
        "_support_size",
        "_labels_are_arange",
        "_index_map",
        "_derived",
        "__weakref__",
    )

    def __init__(self, labels, probs) -> None:
        label_arr = _as_label_array(labels)
        prob_arr = np.asarray(probs, dtype=np.float64).copy()
        if prob_arr.ndim != 1 or prob_arr.size != label_arr.size:
            raise OutOfRangeError("labels and probs must be sequences of equal length")
        if label_arr.size == 0:
            raise OutOfRangeError("distribution must contain at least one element")
        if not np.all(np.isfinite(prob_arr)):
            raise OutOfRangeError("probabilities must be finite")
        if np.any(prob_arr < 0.0):
            worst = float(prob_arr.min())
            raise NegativeProbabilityError(f"negative probability {worst!r}")
        if np.unique(label_arr).size != label_arr.size:
            raise DuplicateLabelError("labels within one distribution must be unique")
        total = math.fsum(prob_arr.tolist())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise MassNotOneError(
                f"probabilities sum to {total!r}, expected 1 within {MASS_TOLERANCE}"
            )

        self.labels = label_arr
        self.probs = prob_arr
        self.order = np.lexsort((label_arr, prob_arr))
        self.cumulative = np.cumsum(prob_arr[self.order])
        self._support_size = int(np.count_nonzero(prob_arr))
        self._labels_are_arange = bool(
            np.array_equal(label_arr, np.arange(label_arr.size, dtype=np.uint64))
        )
        self._index_map: dict[int, int] | None = None
        self._derived: dict[str, object] = {}

        for arr in (self.labels, self.probs, self.order, self.cumulative):
            arr.flags.writeable = False

    # -- constructors -------------------------------------------------

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "DiscreteDistribution":
        """Build from an iterable of (label, prob) pairs."""
        items = list(pairs)
        if not items:
            raise OutOfRangeError("distribution must contain at least one element")
        labels, probs = zip(*items)
        return cls(labels, probs)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "DiscreteDistribution":
        """Build from a label -> prob mapping (insertion order preserved)."""
        return cls.from_pairs(mapping.items())

    @classmethod
    def from_probs(cls, probs) -> "DiscreteDistribution":
        """Build with labels 0..n-1 in the given order."""
        prob_arr = np.asarray(probs, dtype=np.float64)
        return cls(np.arange(prob_arr.size, dtype=np.uint64), prob_arr)

    # -- accessors ----------------------------------------------------

    @property
    def size(self) -> int:
        """Number of table entries, including zero-probability padding."""
        return int(self.labels.size)

    @property
    def support_size(self) -> int:
        """Number of elements with positive probability."""
        return self._support_size

    def index_of(self, label) -> int:
        """Table position of ``label``; raises UnknownLabelError if absent."""
        value = operator.index(label)
        if self._labels_are_arange:
            if 0 <= value < self.size:
                return value
            raise UnknownLabelError(f"label {value} not in distribution")
        if self._index_map is None:
            self._index_map = {
                int(lab): i for i, lab in enumerate(self.labels.tolist())
            }
        try:
            return self._index_map[value]
        except KeyError:
            raise UnknownLabelError(f"label {value} not in distribution") from None

    def prob_of(self, label) -> float:
        """Exact stored probability of ``label``."""
        return float(self.probs[self.index_of(label)])

    def labels_at(self, indices: np.ndarray) -> np.ndarray:
        """Labels for an array of table positions (vectorized)."""
        if self._labels_are_arange:
            # labels equal positions; reinterpret the int64 indices in place
            return indices.view(np.uint64)
        return self.labels[indices]

    def to_pairs(self) -> list[tuple[int, float]]:
        """Element table as a list of (label, prob) pairs."""
        return list(zip(self.labels.tolist(), self.probs.tolist()))

    def _cached(self, key: str, build):
        value = self._derived.get(key)
        if value is None:
            value = build()
            self._derived[key] = value
        return value

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"DiscreteDistribution(size={self.size}, "
            f"support_size={self.support_size})"
        )


def validate(elements) -> DiscreteDistribution:
    """Build a validated distribution from pairs, a mapping, or pass one through.

    Raises NegativeProbabilityError, MassNotOneError, or DuplicateLabelError
    when the input violates the corresponding invariant.
    """
    if isinstance(elements, DiscreteDistribution):
        return elements
    if isinstance(elements, Mapping):
        return DiscreteDistribution.from_mapping(elements)
    return DiscreteDistribution.from_pairs(elements)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < MAX_EPS:
        raise OutOfRangeError(f"eps must lie in [0, {MAX_EPS}), got {eps!r}")
    return eps


def precedes(dist: DiscreteDistribution, a, b) -> bool:
    """True iff element ``a`` comes strictly before ``b`` in canonical order.

    The order compares (probability, label): smaller probability first,
    exact float ties broken by the label order.
    """
    key_a = (dist.prob_of(a), operator.index(a))
    key_b = (dist.prob_of(b), operator.index(b))
    return key_a < key_b


def _quantile_position(dist: DiscreteDistribution, eps: float) -> int:
    eps = _check_eps(eps)
    # first position in canonical order whose cumulative mass strictly
    # exceeds eps; the mass-sum invariant guarantees one exists
    pos = int(np.searchsorted(dist.cumulative, eps, side="right"))
    return min(pos, dist.size - 1)


def exact_quantile(dist: DiscreteDistribution, eps: float) -> int:
    """Smallest element (canonical order) with cumulative mass > eps.

    The returned label always has positive probability: zero-probability
    elements sort first and contribute nothing to the cumulative mass.
    """
    return int(dist.labels[dist.order[_quantile_position(dist, eps)]])


def exact_ess(dist: DiscreteDistribution, eps: float) -> int:
    """Effective support size at level eps, via the canonical quantile.

    Counts the elements at or above the eps-quantile in canonical order;
    all of them have positive probability.
    """
    return dist.size - _quantile_position(dist, eps)


def exact_ess_bruteforce(dist: DiscreteDistribution, eps: float) -> int:
    """Smallest n such that all but the n heaviest elements carry mass <= eps.

    Independent reference for :func:`exact_ess`: walks the sorted
    probabilities from the lightest end, greedily dropping elements while
    the dropped mass stays within eps.
    """
    eps = _check_eps(eps)
    ascending = np.sort(dist.probs[dist.probs > 0.0])
    kept = int(ascending.size)
    dropped_mass = 0.0
    for p in ascending.tolist():
        if dropped_mass + p <= eps:
            dropped_mass += p
            kept -= 1
        else:
            break
    return kept


def tv_distance(p1: DiscreteDistribution, p2: DiscreteDistribution) -> float:
    """Total variation distance: half the L1 distance between the pmfs.

    Labels are unioned; a label absent from one distribution counts as
    probability 0 there.
    """
    first = dict(zip(p1.labels.tolist(), p1.probs.tolist()))
    second = dict(zip(p2.labels.tolist(), p2.probs.tolist()))
    diffs = [
        abs(first.get(label, 0.0) - second.get(label, 0.0))
        for label in first.keys() | second.keys()
    ]
    return 0.5 * math.fsum(diffs)


# -- file formats ----------------------------------------------------------

_CSV_HEADER = ["label", "prob"]


def _format_prob(p: float) -> str:
    # 17 significant digits round-trip any double exactly
    return format(float(p), ".17g")


def write_distribution(dist: DiscreteDistribution, path, fmt: str | None = None) -> None:
    """Write a distribution file (CSV with a label,prob header, or JSON).

    The format is inferred from the path suffix unless ``fmt`` is given.
    Probabilities are rendered with 17 significant digits so a read-back
    reproduces them bit-exactly.
    """
    fmt = fmt or _infer_format(path)
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_HEADER)
            for label, prob in dist.to_pairs():
                writer.writerow([str(label), _format_prob(prob)])
    elif fmt == "json":
        rows = ",\n".join(
            f'  {{"label": {label}, "prob": {_format_prob(prob)}}}'
            for label, prob in dist.to_pairs()
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("[\n" + rows + "\n]\n")
    else:
        raise OutOfRangeError(f"unknown distribution file format {fmt!r}")


def read_distribution(path, fmt: str | None = None) -> DiscreteDistribution:
    """Read and validate a distribution file written by :func:`write_distribution`."""
    fmt = fmt or _infer_format(path)
    if fmt == "csv":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != _CSV_HEADER:
                raise OutOfRangeError(
                    f"expected CSV header {','.join(_CSV_HEADER)!r}, got {header!r}"
                )
            pairs = [(int(row[0]), float(row[1])) for row in reader if row]
        return DiscreteDistribution.from_pairs(pairs)
    if fmt == "json":
        with open(path, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
        if not isinstance(rows, list):
            raise OutOfRangeError("distribution JSON must be an array of objects")
        return DiscreteDistribution.from_pairs(
            (row["label"], row["prob"]) for row in rows
        )
    raise OutOfRangeError(f"unknown distribution file format {fmt!r}")


def _infer_format(path) -> str:
    name = str(path).lower()
    if name.endswith(".csv"):
        return "csv"
    if name.endswith(".json"):
        return "json"
    raise OutOfRangeError(
        f"cannot infer distribution format from {path!r}; use .csv or .json"
    )

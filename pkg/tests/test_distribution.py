import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ess_toolkit import (
    DiscreteDistribution,
    DuplicateLabelError,
    MassNotOneError,
    NegativeProbabilityError,
    OutOfRangeError,
    UnknownLabelError,
    exact_ess,
    exact_ess_bruteforce,
    exact_quantile,
    precedes,
    read_distribution,
    tv_distance,
    validate,
    write_distribution,
)
from ess_toolkit.generators import GeneratorSpec, make_distribution

from conftest import random_simplex_distribution

A, B = 0, 1  # two-element label shorthand


def uniform(n: int) -> DiscreteDistribution:
    return DiscreteDistribution.from_probs([1.0 / n] * n)


class TestValidate:
    def test_symmetric_two_point(self):
        dist = validate({A: 0.5, B: 0.5})
        # equal probabilities: canonical order falls back to label order
        assert dist.labels[dist.order].tolist() == [A, B]

    def test_mass_not_one(self):
        with pytest.raises(MassNotOneError):
            validate({A: 0.5, B: 0.6})

    def test_zero_prob_element_sorts_first(self):
        dist = validate({A: 1.0, B: 0.0})
        assert dist.labels[dist.order].tolist() == [B, A]
        assert dist.support_size == 1
        assert dist.size == 2

    def test_negative_probability(self):
        with pytest.raises(NegativeProbabilityError):
            validate({A: 1.2, B: -0.2})

    def test_duplicate_label(self):
        with pytest.raises(DuplicateLabelError):
            DiscreteDistribution([3, 3], [0.5, 0.5])

    def test_empty_rejected(self):
        with pytest.raises(OutOfRangeError):
            DiscreteDistribution([], [])

    def test_mass_tolerance_boundary(self):
        validate({A: 0.5, B: 0.5 + 5e-10})  # inside 1e-9
        with pytest.raises(MassNotOneError):
            validate({A: 0.5, B: 0.5 + 5e-9})

    def test_nonfinite_rejected(self):
        with pytest.raises(OutOfRangeError):
            validate({A: float("nan"), B: 0.5})

    def test_validate_passes_instance_through(self):
        dist = uniform(3)
        assert validate(dist) is dist

    def test_labels_must_be_unsigned_64bit(self):
        with pytest.raises(OutOfRangeError):
            DiscreteDistribution([-1, 0], [0.5, 0.5])
        with pytest.raises(OutOfRangeError):
            DiscreteDistribution([2**64, 0], [0.5, 0.5])
        dist = DiscreteDistribution([2**64 - 1, 0], [0.25, 0.75])
        assert dist.prob_of(2**64 - 1) == 0.25


class TestPrecedes:
    def test_smaller_probability_precedes(self):
        dist = validate({A: 0.3, B: 0.7})
        assert precedes(dist, A, B) is True

    def test_tie_broken_by_label(self):
        dist = validate({A: 0.5, B: 0.5})
        assert precedes(dist, A, B) is True

    def test_antisymmetry(self):
        dist = validate({A: 0.3, B: 0.7})
        assert precedes(dist, B, A) is False

    def test_irreflexive(self):
        dist = validate({A: 0.3, B: 0.7})
        assert precedes(dist, A, A) is False

    def test_unknown_label(self):
        dist = validate({A: 0.3, B: 0.7})
        with pytest.raises(UnknownLabelError):
            precedes(dist, A, 99)


class TestExactQuantile:
    def test_uniform_interior(self):
        assert exact_quantile(uniform(10), 0.25) == 2  # cumulative 0.3 > 0.25

    def test_strictness_at_boundary(self):
        dist = validate({A: 0.1, B: 0.9})
        # cumulative at A is exactly 0.1, not > 0.1
        assert exact_quantile(dist, 0.1) == B

    def test_below_boundary(self):
        dist = validate({A: 0.1, B: 0.9})
        assert exact_quantile(dist, 0.05) == A

    def test_eps_zero_returns_lightest_positive(self):
        dist = validate({A: 1.0, B: 0.0})
        assert exact_quantile(dist, 0.0) == A

    def test_eps_domain(self):
        dist = uniform(4)
        with pytest.raises(OutOfRangeError):
            exact_quantile(dist, 1.0)
        with pytest.raises(OutOfRangeError):
            exact_quantile(dist, 1.0 - 1e-10)
        with pytest.raises(OutOfRangeError):
            exact_quantile(dist, -0.1)

    def test_strictness_invariant_on_random_sweep(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            dist = random_simplex_distribution(rng)
            eps = float(rng.uniform(0.0, 0.9))
            label = exact_quantile(dist, eps)
            pos = int(np.flatnonzero(dist.labels[dist.order] == label)[0])
            mass_before = float(dist.cumulative[pos - 1]) if pos else 0.0
            assert mass_before <= eps < float(dist.cumulative[pos])
            assert dist.prob_of(label) > 0.0


class TestExactEss:
    def test_uniform(self):
        assert exact_ess(uniform(10), 0.25) == 8

    def test_strict_threshold(self):
        dist = validate({A: 0.1, B: 0.9})
        assert exact_ess(dist, 0.05) == 2
        assert exact_ess(dist, 0.1) == 1

    def test_zipf_matches_bruteforce(self):
        dist = make_distribution(GeneratorSpec("zipf", n=100, s=1.0))
        assert exact_ess(dist, 0.1) == exact_ess_bruteforce(dist, 0.1)

    def test_monotone_in_eps(self):
        rng = np.random.default_rng(7)
        grid = [0.0, 0.01, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9]
        for _ in range(100):
            dist = random_simplex_distribution(rng)
            values = [exact_ess(dist, e) for e in grid]
            assert values == sorted(values, reverse=True)

    def test_quantile_probability_lower_bounds_wider_ess(self):
        # For any levels eps and alpha in (0, 1):
        # ess at (1-alpha)*eps is at least eps*alpha / p(quantile at eps).
        # Holds for every distribution as a matter of arithmetic (the mass
        # between the two quantiles exceeds eps*alpha and sits on elements
        # no heavier than p(quantile at eps)), so assert with no slack.
        rng = np.random.default_rng(99)
        grid = [0.1, 0.3, 0.5]
        for _ in range(200):
            dist = random_simplex_distribution(rng)
            for eps in grid:
                p_eps = dist.prob_of(exact_quantile(dist, eps))
                for alpha in grid:
                    assert exact_ess(dist, (1 - alpha) * eps) >= eps * alpha / p_eps


class TestExactEssBruteforce:
    def test_uniform(self):
        assert exact_ess_bruteforce(uniform(10), 0.25) == 8

    def test_point_mass(self):
        dist = validate({A: 1.0})
        for eps in [0.0, 0.3, 0.9]:
            assert exact_ess_bruteforce(dist, eps) == 1

    def test_equivalence_sweep(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            dist = random_simplex_distribution(rng)
            for eps in [0.01, 0.05, 0.1, 0.2, 0.3, 0.5]:
                assert exact_ess(dist, eps) == exact_ess_bruteforce(dist, eps)

    def test_equivalence_at_uniform_boundaries(self):
        # eps landing exactly on a cumulative-mass boundary is the
        # adversarial case for float prefix sums; the two routes must
        # still agree on what the stored probabilities imply
        for n in (10, 1000, 10_000):
            dist = uniform(n)
            for eps in [0.1, 0.11, 0.2, 0.24, 0.25, 0.5]:
                assert exact_ess(dist, eps) == exact_ess_bruteforce(dist, eps)


class TestZeroPadding:
    def test_padding_changes_nothing(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            base = random_simplex_distribution(rng)
            pad_labels = np.arange(base.size, base.size + 40, dtype=np.uint64)
            padded = DiscreteDistribution(
                np.concatenate([base.labels, pad_labels]),
                np.concatenate([base.probs, np.zeros(40)]),
            )
            for eps in [0.0, 0.05, 0.2, 0.5]:
                assert exact_quantile(padded, eps) == exact_quantile(base, eps)
                assert exact_ess(padded, eps) == exact_ess(base, eps)


class TestTvDistance:
    def test_identity(self):
        dist = uniform(5)
        assert tv_distance(dist, dist) == 0.0

    def test_disjoint_supports(self):
        assert tv_distance(validate({A: 1.0}), validate({B: 1.0})) == 1.0

    def test_two_point(self):
        p1 = validate({A: 0.7, B: 0.3})
        p2 = validate({A: 0.5, B: 0.5})
        assert tv_distance(p1, p2) == pytest.approx(0.2, abs=1e-15)

    def test_metric_axioms(self):
        rng = np.random.default_rng(13)
        dists = [random_simplex_distribution(rng, max_n=8) for _ in range(6)]
        for p in dists:
            assert tv_distance(p, p) == 0.0
            for q in dists:
                assert 0.0 <= tv_distance(p, q) <= 1.0
                assert tv_distance(p, q) == tv_distance(q, p)
                for r in dists:
                    assert (
                        tv_distance(p, r)
                        <= tv_distance(p, q) + tv_distance(q, r) + 1e-12
                    )


@st.composite
def simplex_dists(draw):
    weights = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
            min_size=1,
            max_size=25,
        )
    )
    total = math.fsum(weights)
    return DiscreteDistribution.from_probs([w / total for w in weights])


@given(simplex_dists(), st.floats(min_value=0.0, max_value=0.9))
@settings(deadline=None, max_examples=150)
def test_ess_oracle_equivalence_property(dist, eps):
    assert exact_ess(dist, eps) == exact_ess_bruteforce(dist, eps)


@given(
    simplex_dists(),
    st.floats(min_value=0.0, max_value=0.9),
    st.floats(min_value=0.0, max_value=0.9),
)
@settings(deadline=None, max_examples=150)
def test_ess_monotonicity_property(dist, eps1, eps2):
    lo, hi = sorted([eps1, eps2])
    assert exact_ess(dist, lo) >= exact_ess(dist, hi)


class TestFileFormats:
    @pytest.fixture
    def awkward_dist(self):
        # values with no short decimal representation, plus a zero
        rng = np.random.default_rng(17)
        probs = rng.dirichlet(np.ones(9)) * (1.0 - 0.1 - 1e-17)
        labels = [5, 17, 2, 900, 31, 64, 128, 7, 2**40, 11, 12]
        return DiscreteDistribution(labels, list(probs) + [0.1 + 1e-17, 0.0])

    def test_csv_round_trip_bit_exact(self, tmp_path, awkward_dist):
        path = tmp_path / "dist.csv"
        write_distribution(awkward_dist, path)
        back = read_distribution(path)
        assert np.array_equal(back.labels, awkward_dist.labels)
        assert np.array_equal(back.probs, awkward_dist.probs)

    def test_json_round_trip_bit_exact(self, tmp_path, awkward_dist):
        path = tmp_path / "dist.json"
        write_distribution(awkward_dist, path)
        back = read_distribution(path)
        assert np.array_equal(back.labels, awkward_dist.labels)
        assert np.array_equal(back.probs, awkward_dist.probs)

    def test_csv_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,weight\n0,1.0\n")
        with pytest.raises(OutOfRangeError):
            read_distribution(path)

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(OutOfRangeError):
            write_distribution(uniform(2), tmp_path / "dist.txt")

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            read_distribution(tmp_path / "absent.csv")


class TestImmutability:
    def test_arrays_not_writeable(self):
        dist = uniform(4)
        for arr in (dist.labels, dist.probs, dist.order, dist.cumulative):
            with pytest.raises(ValueError):
                arr[0] = 0

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from swejudge.core import ScoreScale
from swejudge.stats import (
    avg_correlation,
    cohen_kappa,
    correlations,
    discretize,
    kendall_tau,
    pearson,
    spearman,
)

SCALE01 = ScoreScale(0, 1, 1)
SCALE04 = ScoreScale(0, 4, 1)


def test_kendall_examples():
    assert kendall_tau([1, 2, 3], [10, 20, 30]) == 1.0
    assert kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0
    # oracle: C=5, D=0, one tied pair in x -> 5 / sqrt(5 * 6)
    expected = oracles.kendall_tau_b([1, 2, 2, 3], [1, 3, 2, 4])
    assert expected == pytest.approx(5 / math.sqrt(30), abs=1e-15)
    assert kendall_tau([1, 2, 2, 3], [1, 3, 2, 4]) == pytest.approx(expected, abs=1e-12)


def test_spearman_examples():
    truth = [3.0, 1.0, 4.0, 1.5, 9.0]
    assert spearman([math.exp(t) for t in truth], truth) == pytest.approx(1.0, abs=1e-12)
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)
    assert spearman([5, 5, 5, 5], [1, 2, 3, 4]) is None


def test_pearson_examples():
    truth = [1.0, 4.0, 2.0, 8.0]
    assert pearson([2 * t + 7 for t in truth], truth) == pytest.approx(1.0, abs=1e-12)
    assert pearson([-t for t in truth], truth) == pytest.approx(-1.0, abs=1e-12)
    expected = oracles.pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.8)


def test_avg_correlation():
    assert avg_correlation([1, 2, 3], [1, 2, 3]) == 1.0
    assert avg_correlation([2, 2, 2], [1, 2, 3]) == 0.0
    s = correlations([1, 2, 3], [1, 2, 3])
    assert s.avg_cor == (s.kendall_tau + s.spearman + s.pearson) / 3


def test_avg_correlation_arithmetic():
    from swejudge.stats import CorrelationSummary

    assert CorrelationSummary(5, 0.6, 0.7, 0.8).avg_cor == pytest.approx(0.7, abs=1e-15)
    assert CorrelationSummary(5, None, 0.6, None).avg_cor == pytest.approx(0.2)


@pytest.mark.parametrize("fn", [kendall_tau, spearman, pearson])
def test_correlation_errors(fn):
    with pytest.raises(ValueError, match="length mismatch"):
        fn([1, 2, 3], [1, 2])
    with pytest.raises(ValueError, match="at least 2"):
        fn([1], [1])
    with pytest.raises(ValueError):
        fn([1, float("nan")], [1, 2])


def test_kappa_examples():
    assert cohen_kappa([0, 1, 1, 0, 1], [0, 1, 1, 0, 1], SCALE01) == 1.0
    assert cohen_kappa([0, 0, 1, 1], [1, 1, 0, 0], SCALE01) == pytest.approx(-1.0)
    assert cohen_kappa([0, 1, 0, 1], [0, 0, 1, 1], SCALE01) == pytest.approx(0.0)


def test_kappa_degenerate_chance_agreement():
    assert cohen_kappa([1, 1, 1], [1, 1, 1], SCALE01) == 1.0
    # p_e = 1 needs both raters constant on the same label, so p_o = 1 too;
    # with one constant rater p_e < 1 and kappa is 0
    assert cohen_kappa([1, 1, 1], [1, 0, 1], SCALE01) == pytest.approx(0.0)


def test_kappa_errors():
    with pytest.raises(ValueError, match="not on the grid"):
        cohen_kappa([0.5, 1], [0, 1], SCALE01)
    with pytest.raises(ValueError, match="not on the grid"):
        cohen_kappa([5, 1], [0, 1], SCALE04)
    with pytest.raises(ValueError, match="length mismatch"):
        cohen_kappa([0, 1], [0], SCALE01)


@pytest.mark.parametrize("value, scale, expected", [
    (2.4, SCALE04, 2),
    (2.5, SCALE04, 3),
    (0.49, SCALE01, 0),
    (0.5, SCALE01, 1),
    (4.0, SCALE04, 4),
    (0.0, SCALE04, 0),
    (3.25, ScoreScale(1, 5, 0.5), 3.5),
])
def test_discretize(value, scale, expected):
    assert discretize(value, scale) == expected


def test_discretize_out_of_range():
    with pytest.raises(ValueError):
        discretize(4.5, SCALE04)


def _random_vector(rng, n):
    kind = rng.randrange(3)
    if kind == 0:
        return [rng.randrange(5) for _ in range(n)]        # heavy ties
    if kind == 1:
        return [round(rng.uniform(-3, 3), 1) for _ in range(n)]
    return [rng.choice([0.0, 0.25, 0.5, 0.75, 1.0, rng.random()]) for _ in range(n)]


def test_oracle_equivalence_random():
    rng = random.Random(20240611)
    for _ in range(1000):
        n = rng.randint(2, 50)
        x, y = _random_vector(rng, n), _random_vector(rng, n)
        for fast, slow in ((kendall_tau, oracles.kendall_tau_b),
                           (spearman, oracles.spearman),
                           (pearson, oracles.pearson)):
            got, want = fast(x, y), slow(x, y)
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-9)


def test_kappa_oracle_equivalence_random():
    rng = random.Random(99)
    for _ in range(1000):
        n = rng.randint(1, 50)
        k = rng.randint(1, 5)
        a = [rng.randrange(k) for _ in range(n)]
        b = a[:] if rng.random() < 0.1 else [rng.randrange(k) for _ in range(n)]
        got, want = cohen_kappa(a, b, SCALE04), oracles.cohen_kappa(a, b)
        if want is None:
            assert got is None
        else:
            assert got == pytest.approx(want, abs=1e-9)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = st.integers(2, 30).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 6), min_size=n, max_size=n),
                        st.lists(st.integers(0, 6), min_size=n, max_size=n))
)


@given(vectors)
def test_symmetry_and_bounds(xy):
    x, y = xy
    for fn in (kendall_tau, spearman, pearson):
        a, b = fn(x, y), fn(y, x)
        assert (a is None) == (b is None)
        if a is not None:
            assert a == pytest.approx(b, abs=1e-12)
            assert -1.0 <= a <= 1.0
    k1, k2 = cohen_kappa(x, y, ScoreScale(0, 6, 1)), cohen_kappa(y, x, ScoreScale(0, 6, 1))
    assert (k1 is None) == (k2 is None)
    if k1 is not None:
        assert k1 == pytest.approx(k2, abs=1e-12)
        assert -1.0 <= k1 <= 1.0


@given(vectors)
def test_rank_statistics_invariant_under_monotone_transform(xy):
    x, y = xy
    transformed = [t ** 3 + 2 * t for t in x]
    for fn in (kendall_tau, spearman):
        a, b = fn(x, y), fn(transformed, y)
        assert (a is None) == (b is None)
        if a is not None:
            assert a == pytest.approx(b, abs=1e-12)


@given(vectors, st.floats(0.01, 100), finite)
@settings(max_examples=50)
def test_pearson_invariant_under_positive_affine(xy, scale, shift):
    x, y = xy
    a, b = pearson(x, y), pearson([scale * t + shift for t in x], y)
    assert (a is None) == (b is None)
    if a is not None:
        assert a == pytest.approx(b, abs=1e-9)


@given(st.lists(st.integers(0, 4), min_size=2, max_size=60).filter(lambda v: len(set(v)) > 1))
def test_identical_ordering_is_exactly_one(truth):
    mapped = [t * 0.8 + 1 for t in truth]
    assert kendall_tau(mapped, truth) == 1.0
    assert spearman(mapped, truth) == 1.0

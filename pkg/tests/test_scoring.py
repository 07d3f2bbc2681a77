import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import interval_score_ref
from winkler.scoring import (
    DomainError,
    Interval,
    NonCentralLevels,
    TransformSpec,
    generalized_interval_score,
    generalized_interval_scores,
    interval_score,
    interval_scores,
    mean_score,
    noncentral_interval_score,
    noncentral_interval_scores,
    quantile_score,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
levels = st.sampled_from([0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.9])


def test_quantile_score_examples():
    assert quantile_score(0.0, 1.0, 0.5) == 0.5
    assert quantile_score(3.2, 3.2, 0.05) == 0.0
    assert quantile_score(-1.6449, 0.0, 0.05) == pytest.approx(0.082245, abs=1e-12)


def test_quantile_score_rejects_nonfinite():
    with pytest.raises(DomainError):
        quantile_score(float("nan"), 0.0, 0.5)
    with pytest.raises(DomainError):
        quantile_score(0.0, 1.0, 1.0)


def test_interval_score_examples():
    assert interval_score(Interval(-1.6449, 1.6449), 0.0, 0.1) == pytest.approx(3.2898)
    assert interval_score(Interval(0, 1), 2.0, 0.1) == 21.0


def test_noncentral_examples():
    lv = NonCentralLevels(0.1, 0.8)
    assert noncentral_interval_score(Interval(0, 1), 2.0, lv) == pytest.approx(6.0)
    assert noncentral_interval_score(Interval(0, 1), -1.0, lv) == pytest.approx(11.0)


def test_generalized_examples():
    g = TransformSpec.log_shift(0.0)
    iv = Interval(1.0, math.e)
    assert generalized_interval_score(iv, 1.0, 0.1, g) == pytest.approx(1.0)
    assert generalized_interval_score(iv, math.e**2, 0.1, g) == pytest.approx(21.0)


def test_invalid_intervals():
    with pytest.raises(DomainError):
        Interval(1.0, 0.0)
    with pytest.raises(DomainError):
        Interval(0.0, float("inf"))
    with pytest.raises(DomainError):
        interval_scores([1.0], [0.0], [0.5], 0.1)
    with pytest.raises(DomainError):
        NonCentralLevels(0.8, 0.1)


def test_transform_domain():
    with pytest.raises(DomainError):
        TransformSpec.log_shift(0.0)(np.array([-1.0]))
    table = TransformSpec.from_table([0, 1, 2], [0, 1, 3])
    assert table(1.5) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        table(2.5)
    with pytest.raises(DomainError):
        TransformSpec.from_table([0, 1], [1, 0])
    assert not TransformSpec.from_table([0, 1, 2], [0, 1, 1]).strictly_increasing


def test_mean_score_examples():
    assert mean_score([1, 2, 3]) == 2
    assert mean_score([5]) == 5
    assert abs(mean_score([0.1] * 1000) - 0.1) < 1e-12
    with pytest.raises(DomainError):
        mean_score([])


@given(finite, st.floats(0, 100), finite, levels)
def test_interval_score_is_sum_of_quantile_scores(lo, width, y, alpha):
    up = lo + width
    qs = quantile_score(lo, y, alpha / 2) + quantile_score(up, y, 1 - alpha / 2)
    assert interval_scores(lo, up, y, alpha) == pytest.approx(2 / alpha * qs, rel=1e-9, abs=1e-9)
    assert interval_scores(lo, up, y, alpha) == pytest.approx(interval_score_ref(lo, up, y, alpha), rel=1e-12)


@given(finite, st.floats(0, 100), finite, levels)
def test_noncentral_reduces_to_central_bit_for_bit(lo, width, y, alpha):
    up = lo + width
    a = interval_scores(lo, up, y, alpha)
    b = noncentral_interval_scores(lo, up, y, NonCentralLevels.central(alpha))
    assert a == b


@given(finite, st.floats(0, 100), finite, levels)
def test_identity_transform_matches_plain(lo, width, y, alpha):
    up = lo + width
    assert generalized_interval_scores(lo, up, y, alpha, TransformSpec.identity()) == interval_scores(lo, up, y, alpha)


@given(finite, st.floats(0, 100), finite, levels)
def test_score_at_least_length(lo, width, y, alpha):
    up = lo + width
    assert interval_scores(lo, up, y, alpha) >= up - lo


@settings(max_examples=50)
@given(st.lists(finite, min_size=1, max_size=50), st.randoms(use_true_random=False))
def test_mean_score_order_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert mean_score(values) == mean_score(shuffled)

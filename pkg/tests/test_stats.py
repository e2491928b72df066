import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decotrans.stats import LogMoments, merge_all

logs = st.lists(st.floats(-50, 50), min_size=1, max_size=40)


def direct(x):
    v = np.exp(np.asarray(x))
    se = v.std(ddof=1) / math.sqrt(v.size) if v.size > 1 else 0.0
    return v.mean(), se


@given(logs)
def test_from_logs_matches_direct(x):
    m = LogMoments.from_logs(x)
    mean, se = direct(x)
    assert math.exp(m.log_mean) == pytest.approx(mean, rel=1e-10)
    if se > 1e-12 * mean:
        assert math.exp(m.log_stderr) == pytest.approx(se, rel=1e-6)


@settings(max_examples=50)
@given(st.lists(logs, min_size=1, max_size=8))
def test_merge_matches_pooled(parts):
    pooled = LogMoments.from_logs(np.concatenate(parts))
    merged = merge_all([LogMoments.from_logs(p) for p in parts])
    assert merged.count == pooled.count
    assert merged.log_mean == pytest.approx(pooled.log_mean, abs=1e-10)
    if pooled.log_stderr > pooled.log_mean - 20:
        assert merged.log_stderr == pytest.approx(pooled.log_stderr, abs=1e-6)


@given(logs, logs, logs)
def test_merge_associative_in_value(a, b, c):
    A, B, C = (LogMoments.from_logs(x) for x in (a, b, c))
    left = A.merge(B).merge(C)
    right = A.merge(B.merge(C))
    assert left.log_mean == pytest.approx(right.log_mean, abs=1e-12)


def test_huge_values_stay_finite():
    m = LogMoments.from_logs([5000.0, 5000.0 + math.log(3.0)])
    assert m.log_mean == pytest.approx(5000 + math.log(2.0))
    assert m.log_stderr == pytest.approx(5000.0)


def test_empty_and_zero():
    assert merge_all([]).count == 0
    assert LogMoments.from_logs([-math.inf, -math.inf]).log_mean == -math.inf
    assert LogMoments.from_logs([1.0]).log_stderr == -math.inf
    with pytest.raises(OverflowError):
        LogMoments.from_logs([math.inf])

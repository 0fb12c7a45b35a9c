import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from perfpatch.student_t import betainc, t_cdf, t_critical, t_sf


@pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (2.0, 3.0, 0.7), (5.0, 0.5, 0.99), (30.0, 40.0, 0.45), (1.0, 1.0, 0.2)])
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-9)


def test_betainc_edges():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(0.5, 500))
def test_t_sf_matches_scipy(t, df):
    assert t_sf(t, df) == pytest.approx(stats.t.sf(t, df), abs=1e-9)


@given(st.floats(-20, 20), st.floats(1, 100))
def test_cdf_and_sf_sum_to_one(t, df):
    assert t_cdf(t, df) + t_sf(t, df) == pytest.approx(1.0, abs=1e-12)


def test_critical_value_df10():
    assert t_critical(0.05, 10) == pytest.approx(1.812, abs=1e-3)


@pytest.mark.parametrize("alpha,df", [(0.05, 1), (0.01, 5), (0.05, 38), (0.1, 3.7)])
def test_critical_value_matches_scipy(alpha, df):
    assert t_critical(alpha, df) == pytest.approx(stats.t.ppf(1 - alpha, df), abs=1e-8)


def test_sf_infinite_t():
    assert t_sf(math.inf, 5) == 0.0
    assert t_sf(-math.inf, 5) == 1.0

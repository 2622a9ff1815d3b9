import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hammerlpp.rng import make_stream
from hammerlpp.stats import (
    chernoff_exponent,
    chernoff_h,
    chernoff_h_quadrature,
    chisq_poisson,
    ks_2samp,
    ks_test,
    mc_estimate,
    poisson_tail_bound,
    poisson_tail_exact,
)


def mp_poisson_tail(lam, x, side):
    """High-precision reference tail via mpmath."""
    with mpmath.workdps(60):
        lam = mpmath.mpf(lam)
        if side == "upper":
            k0 = int(mpmath.ceil(lam + x))
            total = mpmath.mpf(1) - mpmath.nsum(
                lambda k: mpmath.exp(-lam) * lam**k / mpmath.factorial(k), [0, k0 - 1]
            )
        else:
            k1 = int(mpmath.floor(lam - x))
            if k1 < 0:
                return 0.0
            total = mpmath.nsum(
                lambda k: mpmath.exp(-lam) * lam**k / mpmath.factorial(k), [0, k1]
            )
        return float(total)


def test_mc_estimate_basics():
    e = mc_estimate([3.0, 3.0, 3.0])
    assert e.mean == 3.0 and e.stderr == 0.0
    e = mc_estimate([0.0, 1.0])
    assert e.mean == 0.5
    assert abs(e.stderr - 0.5 / math.sqrt(2)) < 1e-12  # 0.3536
    assert abs(e.ci95[1] - (0.5 + 1.96 * e.stderr)) < 1e-12
    with pytest.raises(ValueError):
        mc_estimate([1.0])


def test_mc_estimate_uniforms():
    u = make_stream(21).uniforms(10**5)
    e = mc_estimate(u)
    assert abs(e.mean - 0.5) < 3 * e.stderr


def test_ks_constant_sample():
    d, _ = ks_test(np.full(100, 0.5), lambda v: np.clip(v, 0, 1))
    assert d >= 0.5


def test_ks_level_meta():
    # samples actually drawn from the tested cdf: passes at 1e-3 nearly always
    fails = 0
    for i in range(100):
        u = make_stream(31, i).uniforms(300)
        _, p = ks_test(u, lambda v: np.clip(v, 0, 1))
        if p < 1e-3:
            fails += 1
    assert fails <= 1


def test_ks_power_against_shift():
    u = make_stream(33).uniforms(10**4) ** 1.15  # shifted distribution
    _, p = ks_test(u, lambda v: np.clip(v, 0, 1))
    assert p < 1e-3


def test_ks_exact_branch_small_n():
    u = make_stream(35).uniforms(20)
    d, p = ks_test(u, lambda v: np.clip(v, 0, 1))
    assert 0 <= d <= 1 and 0 <= p <= 1
    with pytest.raises(ValueError):
        ks_test([], lambda v: v)


def test_ks_2samp_same_law():
    a = make_stream(36, 0).uniforms(3000)
    b = make_stream(36, 1).uniforms(3000)
    _, p = ks_2samp(a, b)
    assert p >= 1e-3


def test_chisq_poisson_detects_wrong_mean():
    counts = np.random.default_rng(5).poisson(5.0, 4000)
    _, p_ok = chisq_poisson(counts, 5.0)
    _, p_bad = chisq_poisson(counts, 6.0)
    assert p_ok >= 1e-3 and p_bad < 1e-3


def test_poisson_tail_closed_forms():
    assert abs(poisson_tail_exact(1.0, 1.0, "upper") - (1 - 2 / math.e)) < 1e-14
    assert abs(poisson_tail_exact(1.0, 1.0, "lower") - 1 / math.e) < 1e-14
    assert poisson_tail_exact(1.0, 2.0, "lower") == 0.0  # empty support
    with pytest.raises(ValueError):
        poisson_tail_exact(0.0, 1.0, "upper")
    with pytest.raises(ValueError):
        poisson_tail_exact(1.0, 1.0, "sideways")


@pytest.mark.parametrize("lam,x", [(20.0, 5.0), (0.5, 0.3), (100.0, 25.0), (1000.0, 40.0)])
def test_poisson_tail_vs_mpmath(lam, x):
    for side in ("upper", "lower"):
        ref = mp_poisson_tail(lam, x, side)
        got = poisson_tail_exact(lam, x, side)
        assert abs(got - ref) < 1e-12


def test_poisson_bound_values_and_shape():
    assert abs(poisson_tail_bound(1.0, 1.0) - math.exp(-0.25)) < 1e-14
    xs = np.linspace(0.5, 60, 200)
    vals = [poisson_tail_bound(2.0, float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals[1:], vals[:-1]))  # decreasing in x
    assert vals[-1] < 1e-6 or vals[-1] < vals[0]


def test_poisson_bound_dominates_exact_grid():
    for lam in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
        for x in np.geomspace(lam * 1e-3, 5 * lam, 20):
            bound = poisson_tail_bound(lam, float(x))
            for side in ("upper", "lower"):
                assert poisson_tail_exact(lam, float(x), side) <= bound + 1e-15


def test_chernoff_h_special_values():
    assert chernoff_h(0.0) == 1.0
    assert chernoff_h(-1.0) == 2.0
    assert abs(chernoff_h(1.0) - 2 * (2 * math.log(2) - 1)) < 1e-14  # 0.772589
    with pytest.raises(ValueError):
        chernoff_h(-1.5)


def test_chernoff_h_vs_quadrature():
    for x in np.concatenate([np.linspace(-0.999, 10, 97), [-1e-5, 1e-5, 1e-7]]):
        assert abs(chernoff_h(float(x)) - chernoff_h_quadrature(float(x))) < 1e-10


def test_h_monotone_g_monotone():
    xs = np.linspace(-1.0, 10.0, 2001)
    h = np.array([chernoff_h(float(x)) for x in xs])
    assert np.all(np.diff(h) < 0)  # decreasing
    assert np.all(h > 0)
    g = (1 + xs) * h
    assert np.all(np.diff(g) > 0)  # increasing
    pos = xs[xs >= 0]
    hp = np.array([chernoff_h(float(x)) for x in pos])
    assert np.all(hp >= 1.0 / (1.0 + pos) - 1e-12)


def test_chernoff_exponent_chain():
    # exact <= exp(-exponent) <= simplified bound, upper side
    for lam in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
        for x in np.geomspace(lam * 1e-2, 5 * lam, 20):
            x = float(x)
            mid = math.exp(-chernoff_exponent(lam, x, "upper"))
            assert poisson_tail_exact(lam, x, "upper") <= mid + 1e-15
            assert mid <= poisson_tail_bound(lam, x) + 1e-15
            if x < lam:
                mid_lo = math.exp(-chernoff_exponent(lam, x, "lower"))
                assert poisson_tail_exact(lam, x, "lower") <= mid_lo + 1e-15
    with pytest.raises(ValueError):
        chernoff_exponent(1.0, 2.0, "lower")  # needs x < lam


@given(st.floats(min_value=-0.9999, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_h_continuous_series_seam(x):
    # series and closed form agree across the |x| = 1e-4 seam
    h = chernoff_h(x)
    assert 0 < h <= 2
    if 1e-6 < abs(x) < 1e-2:
        closed = 2.0 * ((1.0 + x) * math.log1p(x) - x) / (x * x)
        assert abs(h - closed) < 1e-9

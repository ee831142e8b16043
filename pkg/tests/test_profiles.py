import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasim import profiles
from dephasim.errors import ClassificationError, DomainError
from dephasim.profiles import DecoherenceProfile, Regime, classify_regime, lambda_of_t


def quad_only(p):
    """Same sigma with the closed form removed, forcing quadrature."""
    return DecoherenceProfile(sigma=p.sigma, label=p.label + "-quad")


def test_constant_sigma():
    c = 1.7
    p = DecoherenceProfile(sigma=lambda t: np.full_like(np.asarray(t, float), c))
    assert lambda_of_t(p, 2.5) == pytest.approx(c * c * 2.5, rel=1e-12)


def test_exponential_sigma():
    p = DecoherenceProfile(sigma=lambda t: np.exp(-np.asarray(t, float)))
    for t in (0.1, 1.0, 5.0):
        assert lambda_of_t(p, t) == pytest.approx((1 - math.exp(-2 * t)) / 2, rel=1e-8)


def test_zero_time_and_negative_time(builtin):
    assert lambda_of_t(builtin, 0.0) == 0.0
    with pytest.raises(DomainError):
        lambda_of_t(builtin, -1.0)


def test_builtin_values():
    assert profiles.markovian(1.0).lam(3.0) == 3.0
    assert profiles.super_markovian_ii(1.0).lam(2.0) == 2.0
    sub = profiles.submarkovian(1.0, 1.0)
    assert sub.lam(4.0) == pytest.approx(0.49983, abs=1e-5)
    assert sub.lam(4.0) > 0.499
    assert sub.lam(60.0) == pytest.approx(0.5, rel=1e-15)
    assert profiles.super_markovian_i(1.0).lam(3.0) == pytest.approx(2.0, rel=1e-15)


def test_closed_forms_agree_with_quadrature(builtin):
    q = quad_only(builtin)
    for t in (0.3, 1.0, 4.0, 25.0):
        assert lambda_of_t(q, t) == pytest.approx(builtin.lam(t), rel=1e-8)


def test_numerical_derivative_matches_sigma_squared(builtin):
    ts = np.linspace(0.5, 10.0, 20)
    h = 1e-4
    lam_p = profiles.lambda_on_grid(builtin, ts + h)
    lam_m = profiles.lambda_on_grid(builtin, ts - h)
    deriv = (lam_p - lam_m) / (2 * h)
    np.testing.assert_allclose(deriv, builtin.sigma2(ts), rtol=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(profiles.BUILTINS)), st.floats(0.1, 5), st.lists(st.floats(0, 200), min_size=2, max_size=30))
def test_lambda_nondecreasing(name, s0, times):
    p = profiles.BUILTINS[name](sigma0=s0)
    ts = np.sort(np.array(times))
    lam = profiles.lambda_on_grid(p, ts)
    assert np.all(lam >= 0)
    assert np.all(np.diff(lam) >= 0)


def test_lambda_on_grid_quadrature_path():
    p = quad_only(profiles.submarkovian(1.0, 0.5))
    ts = np.array([0.0, 0.5, 0.5, 2.0, 7.0])
    np.testing.assert_allclose(profiles.lambda_on_grid(p, ts), profiles.submarkovian(1.0, 0.5).lam(ts), rtol=1e-8)


def test_expression_profile():
    p = profiles.from_expression("sqrt(t)", label="quad ii")
    assert p.lam(2.0) == pytest.approx(2.0, rel=1e-10)
    q = profiles.from_expression("sqrt(t)", "t^2/2")
    assert q.lam(3.0) == 4.5


def test_calibrated_builtins_share_lambda_one():
    for p in profiles.builtin_profiles(calibrate_at=1.0):
        assert p.lam(1.0) == pytest.approx(1.0, rel=1e-12)


def test_unbounded_sigma_only_via_direct_sampler():
    p = profiles.from_expression("t^(-0.25)", "4/3*t^0.75")
    assert not p.pathwise_ok
    assert profiles.markovian().pathwise_ok


@pytest.mark.parametrize("lam, expected", [
    ("2*t", Regime.MARKOVIAN),
    ("1 - exp(-t)", Regime.SUBMARKOVIAN),
    ("t^2", Regime.SUPERMARKOVIAN_II),
    ("sqrt(t)", Regime.SUPERMARKOVIAN_I),
])
def test_classify_lambda_functions(lam, expected):
    p = profiles.from_expression("1", lam)
    cls = classify_regime(p, horizon=100.0)
    assert cls.regime is expected


def test_classify_slopes_are_exact_for_power_laws():
    assert classify_regime(profiles.from_expression("1", "2*t"), 100.0).fitted_exponent == pytest.approx(1.0, abs=1e-12)
    assert classify_regime(profiles.from_expression("1", "t^2"), 100.0).fitted_exponent == pytest.approx(2.0, abs=1e-12)


def test_classify_saturating_slope_by_direct_fit():
    # direct least-squares on the same window, computed independently
    ts = np.geomspace(50.0, 100.0, 64)
    ly = np.log(1 - np.exp(-ts))
    direct = np.polyfit(np.log(ts), ly, 1)[0]
    cls = classify_regime(profiles.from_expression("1", "1 - exp(-t)"), 100.0)
    assert cls.fitted_exponent == pytest.approx(direct, abs=1e-12)
    assert abs(cls.fitted_exponent) < 1e-15 * 1e3


def test_builtins_classify_at_horizon_1000():
    expected = [Regime.MARKOVIAN, Regime.SUBMARKOVIAN, Regime.SUPERMARKOVIAN_I, Regime.SUPERMARKOVIAN_II]
    got = [classify_regime(p, 1e3).regime for p in profiles.builtin_profiles()]
    assert got == expected


def test_thresholds_are_configurable():
    p = profiles.super_markovian_i()
    strict = profiles.RegimeThresholds(sub_below=0.6, markov_low=0.9, markov_high=1.1)
    assert classify_regime(p, 1e3, thresholds=strict).regime is Regime.SUBMARKOVIAN


def test_classify_no_decoherence():
    with pytest.raises(ClassificationError, match="no decoherence"):
        classify_regime(profiles.markovian(0.0), 100.0)


@pytest.mark.parametrize("horizon, window", [(0.0, 0.5), (10.0, 0.0), (10.0, 1.0)])
def test_classify_bad_arguments(horizon, window):
    with pytest.raises(DomainError):
        classify_regime(profiles.markovian(), horizon, window)


def test_make_profile():
    assert profiles.make_profile("submarkovian", sigma0=2.0, gamma=3.0).params == {"sigma0": 2.0, "gamma": 3.0}
    with pytest.raises(DomainError):
        profiles.make_profile("nope")

"""Rapidity profiles, analytic continuation, and the modular-conjugation check."""
import math

import gmpy2
import numpy as np
import pytest
from scipy.integrate import quad

from wedgelab import (ModelConfig, GridSpanError, SupportPreconditionError,
                      ConfigValidationError)
from wedgelab.modular import (RapidityProfile, rapidity_profile, profile_norm,
                              boost_flow, theta_reflection, mollifier_profile,
                              half_continuation, delta_consistency_check,
                              flow_sign_calibration, tomita_S_check,
                              tomita_refinement, _window_for)
from wedgelab._mpmoll import MollifierCT, get_table, fft_pow2
from wedgelab.testfn import wedge_bump, seed_bump

CFG = ModelConfig(d=2, m=1.0)

# 25-digit reference: C(0) = int_{-1}^{1} e^{-1/(1-t^2)} dt
C0 = 0.4439938161680794378230489


@pytest.fixture(scope="module")
def table():
    return MollifierCT(80.0, 30)


def test_transform_table_matches_quadrature(table):
    assert float(table(gmpy2.mpfr(0))) == pytest.approx(C0, abs=1e-25)
    for y in (0.7, 1.9, 2.0, 2.3, 5.5, 17.25, 63.8):
        ref, err = quad(lambda t: np.exp(-1 / (1 - t * t)) * np.cos(y * t),
                        -1, 1, epsabs=1e-14, limit=200)
        assert float(table(gmpy2.mpfr(y))) == pytest.approx(ref, abs=1e-12)


def test_transform_series_and_march_agree_at_the_seam(table):
    # the moment series (y < 2) and the Taylor march (y >= 2) must agree
    # across the seam up to the local slope times the step
    below = float(table(gmpy2.mpfr("2") - gmpy2.mpfr("1e-13")))
    above = float(table(gmpy2.mpfr("2")))
    assert below == pytest.approx(above, abs=1e-12)


def test_transform_envelope_follows_saddle_point(table):
    # |C(y)| ~ sqrt(2 pi) (2y)^(-3/4) exp(-sqrt(y))
    y = 64.0
    env = table.log_envelope(y)
    predicted = 0.5 * math.log(2 * math.pi) - 0.75 * math.log(2 * y) \
        - math.sqrt(y) - math.log(C0)
    assert env == pytest.approx(predicted, abs=0.4)


def test_extended_fft_matches_numpy():
    rng = np.random.default_rng(2)
    data = rng.normal(size=16) + 1j * rng.normal(size=16)
    gmpy2.get_context().precision = 120
    a = [gmpy2.mpc(z.real, z.imag) for z in data]
    fft_pow2(a)
    ref = np.fft.fft(data)
    got = np.array([complex(z) for z in a])
    assert np.allclose(got, ref, atol=1e-12)
    with pytest.raises(ValueError):
        fft_pow2([gmpy2.mpc(0)] * 12)


def test_profile_validation():
    theta = np.linspace(-3, 3, 101)
    vals = np.exp(-theta ** 2).astype(complex)
    p = RapidityProfile(theta, vals, "g")
    assert p.spacing == pytest.approx(0.06)
    with pytest.raises(GridSpanError):
        RapidityProfile(theta ** 2, vals, "bad")      # non-uniform
    with pytest.raises(GridSpanError):
        RapidityProfile(theta + 1.0, vals, "bad")     # not symmetric


def test_boost_flow_is_the_translation_group():
    theta = np.linspace(-8, 8, 512, endpoint=False)
    vals = np.exp(-(theta - 0.4) ** 2).astype(complex)
    p = RapidityProfile(theta, vals, "g")
    n0 = profile_norm(p)
    q = boost_flow(boost_flow(p, 0.3), 0.45)
    r = boost_flow(p, 0.75)
    assert np.linalg.norm(q.values - r.values) < 1e-10
    assert profile_norm(q) == pytest.approx(n0, rel=1e-12)
    # the flow translates the profile: peak moves to theta = t + 0.4
    shifted = boost_flow(p, 1.0)
    assert abs(shifted.theta[np.argmax(np.abs(shifted.values))] - 1.4) < 0.05


def test_theta_reflection_is_an_involution():
    theta = np.linspace(-3, 3, 101)
    vals = (np.exp(-theta ** 2) * np.exp(0.3j * theta)).astype(complex)
    p = RapidityProfile(theta, vals, "g")
    r = theta_reflection(theta_reflection(p))
    assert np.allclose(r.values, p.values, atol=1e-15)


def test_window_scaling_and_caps():
    f = wedge_bump(CFG, center=(0.0, 2.2), radius=1.0)
    base0, lam0 = _window_for(np.array([0.0, 2.2]), 1.0, 0)
    base1, lam1 = _window_for(np.array([0.0, 2.2]), 1.0, 1)
    assert base0 == base1 and lam0 == base0
    assert lam1 - lam0 == pytest.approx(20.0)
    with pytest.raises(GridSpanError):
        _window_for(np.array([0.0, 40.0]), 1.0, 0)    # beyond the window cap
    with pytest.raises(SupportPreconditionError):
        _window_for(np.array([0.0, 1.5]), 1.0, 0)     # not strictly inside


def test_continuation_rejects_unsupported_profiles():
    f = wedge_bump(CFG, center=(0.0, 0.6), radius=0.5)  # touches the edge
    with pytest.raises(SupportPreconditionError):
        tomita_S_check(f, config=CFG)
    g = seed_bump(CFG, radius=0.5)                       # wrong family
    with pytest.raises(ConfigValidationError):
        mollifier_profile(g, config=CFG)


def test_double_precision_continuation_contracts():
    f = wedge_bump(CFG, center=(0.0, 2.2), radius=1.0)
    prof = rapidity_profile(f, span=6.0, count=1024, config=CFG)
    cont = half_continuation(prof)
    ratio = cont.metadata["growth_ratio"]
    # the reflected boundary value of a real profile has comparable norm;
    # only a wrong-sign multiplier explodes past the growth threshold
    assert 0.2 < ratio < 5.0
    assert delta_consistency_check(prof) < 1e-8
    cal = flow_sign_calibration([prof])
    assert cal["sign"] == +1


def test_modular_conjugation_residual_small_and_refinable():
    f = wedge_bump(CFG, center=(0.0, 2.2), radius=1.0)
    res = tomita_refinement(f, config=CFG, levels=(0, 1))
    assert res[0].residual < 1e-4
    assert res[0].residual / res[1].residual > 4.0


def test_modular_conjugation_pinned_configuration():
    # deep-window configuration: narrow bump close to the wedge edge
    f = wedge_bump(CFG, center=(0.0, 2.0), radius=0.5)
    res = tomita_S_check(f, config=CFG)
    assert res.residual < 1e-4

"""Quadrature and two-point-function oracles for the mass-shell layer."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wedgelab import (ModelConfig, build_grid, restrict, inner_product,
                      commutator_value, anticommutator_value,
                      GridConfigError, OneParticleVector)
from wedgelab.testfn import TestFunction, All, wedge_bump, translate

# independently derived reference values (30-digit arithmetic)
TWO_PI_K0_2 = 0.71561630783764997334886315395    # 2*pi * K_0(2)
PI2_EXP_M2 = 1.33570570705474752223907340236    # pi^2 * exp(-2)

CFG = ModelConfig(d=2, m=1.0)


def _exp_fn(d):
    """f~(p) = exp(-p0): analytically integrable against the shell measure."""
    def ev(p0, p):
        return np.exp(-np.asarray(p0, dtype=float)).astype(complex)
    return TestFunction(ev, All(), True, "exp(-p0)", d, {"family": "raw"})


def test_invariant_measure_d2_matches_bessel_oracle():
    # <f|f> = pi * int_R exp(-2 cosh t) dt = 2*pi * K_0(2)
    grid = build_grid(CFG, resolution=512, theta_max=9.0)
    v = restrict(_exp_fn(2), grid)
    assert inner_product(v, v).real == pytest.approx(TWO_PI_K0_2, abs=1e-13)


def test_invariant_measure_d3_matches_closed_form():
    # 2*pi * int d^2p exp(-2 omega)/(2 omega) = pi^2 * exp(-2m)
    cfg = ModelConfig(d=3, m=1.0)
    grid = build_grid(cfg, resolution=220, cutoff=22.0)
    v = restrict(_exp_fn(3), grid)
    assert inner_product(v, v).real == pytest.approx(PI2_EXP_M2, rel=1e-7)


def test_weights_positive_and_symmetric():
    grid = build_grid(CFG, resolution=256, theta_max=6.0)
    assert np.all(grid.weights > 0)
    assert np.allclose(grid.nodes[:, 0], -grid.nodes[::-1, 0], atol=1e-12)
    assert np.allclose(grid.weights, grid.weights[::-1], rtol=1e-12)


def test_grid_rejects_bad_parameters():
    with pytest.raises(GridConfigError):
        build_grid(CFG, resolution=4)
    with pytest.raises(GridConfigError):
        build_grid(CFG, theta_max=-1.0)
    with pytest.raises(GridConfigError):
        ModelConfig(d=1, m=1.0)
    with pytest.raises(GridConfigError):
        ModelConfig(d=2, m=-1.0)


@pytest.fixture(scope="module")
def grid():
    return build_grid(CFG, resolution=1024, theta_max=7.0)


@pytest.fixture(scope="module")
def bumps(grid):
    return (wedge_bump(CFG, center=(0.0, 2.0), radius=0.8),
            wedge_bump(CFG, center=(0.3, 2.6), radius=0.6))


def test_inner_product_conjugate_symmetry(grid, bumps):
    f, g = bumps
    u, v = restrict(f, grid), restrict(g, grid)
    assert inner_product(u, v) == pytest.approx(np.conj(inner_product(v, u)),
                                               abs=1e-15)


def test_translation_is_unitary_and_covariant(grid, bumps):
    f, _ = bumps
    a = np.array([0.7, -1.3])
    u = restrict(f, grid)
    ta = restrict(translate(f, a), grid)
    assert ta.norm == pytest.approx(u.norm, rel=1e-13)
    phase = np.exp(1j * (grid.omega * a[0] - grid.nodes[:, 0] * a[1]))
    assert np.allclose(ta.values, phase * u.values, atol=1e-12)


def test_commutator_value_antisymmetric_for_real_functions(grid, bumps):
    f, g = bumps
    assert commutator_value(f, g, grid) == pytest.approx(
        -commutator_value(g, f, grid), abs=1e-15)
    assert anticommutator_value(f, g, grid) == pytest.approx(
        anticommutator_value(g, f, grid), abs=1e-15)


def test_commutator_vanishes_at_spacelike_separation(grid, bumps):
    f, _ = bumps
    g = translate(wedge_bump(CFG, center=(-0.2, 2.4), radius=0.6),
                  np.array([0.45, -5.3]))
    assert abs(commutator_value(f, g, grid)) < 1e-12
    # sensitivity: overlapping supports give a value far above the floor
    g2 = wedge_bump(CFG, center=(0.2, 2.2), radius=0.8)
    assert abs(commutator_value(f, g2, grid)) > 1e-4


@settings(max_examples=20, deadline=None)
@given(a0=st.floats(-2, 2), a1=st.floats(-2, 2), c=st.floats(-3, 3))
def test_restriction_is_linear(a0, a1, c):
    grid = build_grid(CFG, resolution=128, theta_max=5.0)
    f = wedge_bump(CFG, center=(0.0, 2.0), radius=0.8)
    g = wedge_bump(CFG, center=(0.3, 2.6), radius=0.6)
    u, v = restrict(f, grid), restrict(g, grid)
    a = np.array([a0, a1])
    w = OneParticleVector(grid, u.values + c * v.values)
    lhs = inner_product(w, w).real
    rhs = (inner_product(u, u) + c**2 * inner_product(v, v)
           + 2 * c * inner_product(u, v).real).real
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    # translation phases compose
    t2 = restrict(translate(translate(f, a), -a), grid)
    assert np.allclose(t2.values, u.values, atol=1e-10)

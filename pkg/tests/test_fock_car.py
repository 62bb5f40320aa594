"""Fock-space representation: ladder algebra, twist, and the Wick oracle."""
import itertools

import numpy as np
import pytest

from wedgelab import (ModelConfig, build_grid, restrict, inner_product,
                      build_modes, creation, annihilation, field, field_plus,
                      field_minus, twisted_field, number_N, parity_Z, klein_V,
                      parity_projectors, vacuum, vacuum_expectation_wick,
                      CapacityError, EmptyBasisError, OutOfSpanError,
                      MAX_MODES, OneParticleVector)
from wedgelab.fock_car import _jw_ladders, _pfaffian_expansion
from wedgelab.testfn import wedge_bump, seed_bump, translate
from wedgelab.mass_shell import anticommutator_value, commutator_value

CFG = ModelConfig(d=2, m=1.0)


@pytest.fixture(scope="module")
def grid():
    return build_grid(CFG, resolution=1024, theta_max=7.0)


@pytest.fixture(scope="module")
def fns():
    return [wedge_bump(CFG, center=(0.0, 2.0), radius=0.8),
            wedge_bump(CFG, center=(0.3, 2.6), radius=0.6),
            seed_bump(CFG, radius=0.5),
            translate(wedge_bump(CFG, center=(0.0, 2.2), radius=0.7),
                      np.array([0.1, -4.0]))]


@pytest.fixture(scope="module")
def basis(grid, fns):
    return build_modes([restrict(f, grid) for f in fns])


def test_ladder_car_is_exact():
    for M in (1, 2, 4):
        adag = _jw_ladders(M)
        eye = np.eye(2 ** M)
        for i in range(M):
            for j in range(M):
                a_i = adag[i].conj().T
                acr = a_i @ adag[j] + adag[j] @ a_i
                assert np.allclose(acr, (i == j) * eye, atol=1e-14)
                aa = adag[i] @ adag[j] + adag[j] @ adag[i]
                assert np.allclose(aa, 0.0, atol=1e-14)


def test_basis_is_orthonormal(grid, basis):
    G = np.array([[inner_product(u, v) for v in basis.modes]
                  for u in basis.modes])
    assert np.allclose(G, np.eye(basis.M), atol=1e-10)


def test_capacity_and_degenerate_inputs(grid, basis):
    v = basis.modes[0]
    with pytest.raises(EmptyBasisError):
        build_modes([v.scaled(0.0)])
    too_many = [OneParticleVector(grid, np.eye(len(grid))[i].astype(complex))
                for i in range(MAX_MODES + 1)]
    with pytest.raises(CapacityError):
        build_modes(too_many)
    # a vector outside the span is refused on expansion
    w = OneParticleVector(grid, np.exp(-grid.theta ** 2).astype(complex))
    with pytest.raises(OutOfSpanError):
        basis.expand(w)


def test_smeared_field_car(grid, fns, basis):
    f, g = fns[0], fns[1]
    F, G = field(f, basis, grid), field(g, basis, grid)
    scalar = anticommutator_value(f, g, grid)
    eye = np.eye(basis.dim)
    assert np.linalg.norm(F.anticommutator(G).matrix - scalar * eye, 2) < 1e-12
    assert np.linalg.norm((F.adjoint - F).matrix, 2) < 1e-12  # f real


def test_field_splits_into_creation_and_annihilation(grid, fns, basis):
    f = fns[0]
    P, M_ = field_plus(f, basis, grid), field_minus(f, basis, grid)
    total = field(f, basis, grid)
    assert np.allclose(P.matrix + M_.matrix, total.matrix, atol=1e-13)
    vac = vacuum(basis)
    assert np.linalg.norm(M_.matrix @ vac.components) < 1e-13
    created = P.matrix @ vac.components
    assert np.linalg.norm(created) == pytest.approx(
        restrict(f, grid).norm, rel=1e-10)


def test_twist_conjugation_and_mixed_commutator(grid, fns, basis):
    f, g = fns[0], fns[3]
    Ft = twisted_field(f, basis, grid)
    G = field(g, basis, grid)
    Z = parity_Z(basis)
    scalar = commutator_value(f, g, grid)
    resid = np.linalg.norm(Ft.commutator(G).matrix - scalar * Z.matrix, 2)
    assert resid < 1e-12
    # V is a parity-dependent sign and squares to one
    V = klein_V(basis)
    assert np.allclose((V @ V).matrix, np.eye(basis.dim), atol=1e-14)


def test_parity_structure(basis):
    Z, N = parity_Z(basis), number_N(basis)
    assert np.allclose(Z.matrix, np.diag((-1.0) ** np.diag(N.matrix).real),
                       atol=1e-14)
    Pe, Po = parity_projectors(basis)
    assert np.allclose((Pe.matrix + Po.matrix), np.eye(basis.dim), atol=1e-14)
    assert np.allclose(Pe.matrix @ Po.matrix, 0.0, atol=1e-14)


def _pfaffian_bruteforce(A):
    """Sum over perfect matchings with the crossing sign, by enumeration."""
    n = A.shape[0]
    if n % 2:
        return 0.0

    def matchings(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for k, second in enumerate(rest):
            for sub in matchings(rest[:k] + rest[k + 1:]):
                yield [(first, second)] + sub

    total = 0.0
    for match in matchings(list(range(n))):
        perm = [i for pair in match for i in pair]
        # parity of the permutation taking 0..n-1 to the matching order
        seen, sign = [False] * n, 1
        for i in range(n):
            if not seen[i]:
                j, clen = i, 0
                while not seen[j]:
                    seen[j] = True
                    j = perm.index(j)
                    clen += 1
                if clen % 2 == 0:
                    sign = -sign
        total += sign * np.prod([A[i, j] for i, j in match])
    return total


def test_pfaffian_expansion_against_bruteforce():
    rng = np.random.default_rng(11)
    for n in (2, 4, 6):
        U = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = np.triu(U, 1)
        assert _pfaffian_expansion(A) == pytest.approx(
            _pfaffian_bruteforce(A), rel=1e-12)


def test_wick_oracle_matches_matrix_route(grid, fns, basis):
    fields = [field(f, basis, grid) for f in fns]
    rng = np.random.default_rng(5)
    for _ in range(25):
        length = rng.integers(0, 7)
        word = list(rng.integers(0, len(fns), length))
        mat = np.eye(basis.dim)
        for idx in word:
            mat = mat @ fields[idx].matrix
        mval = complex(mat[0, 0])
        pval = vacuum_expectation_wick([fns[i] for i in word], grid)
        assert mval == pytest.approx(pval, abs=1e-10)

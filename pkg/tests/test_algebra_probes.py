"""Projection lattice, witness machinery, and locality probes."""
import numpy as np
import pytest

from wedgelab import (ModelConfig, build_grid, restrict, build_modes,
                      creation, annihilation, FockOperator, field,
                      clifford_projection, meet_with_rank, ST_identity_check,
                      word_basis, weak_locality_check, relative_locality_check,
                      interval_generators, NonOrthonormalPairError,
                      OneParticleVector)
from wedgelab.algebra_probes import (_check_projection, NonProjectionError,
                                     central_sequence_experiment)
from wedgelab.testfn import wedge_bump, seed_bump, translate, lemma32_pair

CFG = ModelConfig(d=2, m=1.0)


@pytest.fixture(scope="module")
def grid():
    return build_grid(CFG, resolution=1024, theta_max=7.0)


@pytest.fixture(scope="module")
def onb(grid):
    """Four exactly orthonormal one-particle vectors (real profiles)."""
    th = grid.theta
    raw = [np.exp(-th ** 2), th * np.exp(-th ** 2),
           np.exp(-(th - 1) ** 2), np.exp(-(th + 1) ** 2)]
    vecs = [OneParticleVector(grid, np.asarray(v, dtype=complex)) for v in raw]
    basis = build_modes(vecs)
    return basis, basis.modes


def test_clifford_projection_is_projection(grid, onb):
    basis, modes = onb
    P = clifford_projection(modes[0], modes[1], +1, basis, grid)
    _check_projection(P)
    Q = clifford_projection(modes[0], modes[1], -1, basis, grid)
    assert np.allclose((P.matrix + Q.matrix), np.eye(basis.dim), atol=1e-10)
    assert np.allclose(P.matrix @ Q.matrix, 0.0, atol=1e-10)


def test_clifford_projection_rejects_bad_pairs(grid, onb):
    basis, modes = onb
    with pytest.raises(NonOrthonormalPairError):
        clifford_projection(modes[0], modes[0], +1, basis, grid)
    with pytest.raises(NonOrthonormalPairError):
        clifford_projection(modes[0].scaled(0.5), modes[1], +1, basis, grid)


def _subspace_intersection_rank(E, F, tol=1e-8):
    """Brute-force oracle: dim(range E intersect range F) via principal angles."""
    def ran(M):
        w, v = np.linalg.eigh(M)
        return v[:, w > 0.5]
    A, B = ran(E), ran(F)
    if A.size == 0 or B.size == 0:
        return 0
    s = np.linalg.svd(A.conj().T @ B, compute_uv=False)
    return int(np.sum(s > 1 - tol))


def test_meet_matches_bruteforce_intersection(grid, onb):
    basis, modes = onb
    n0 = creation(0, basis) @ annihilation(0, basis)
    n1 = creation(1, basis) @ annihilation(1, basis)
    P = FockOperator(n0.matrix, basis, "n0")       # mode 0 occupied
    Q = FockOperator(n1.matrix, basis, "n1")       # mode 1 occupied
    M, rank = meet_with_rank(P, Q)
    assert rank == _subspace_intersection_rank(P.matrix, Q.matrix) == 4
    _check_projection(M)
    # orthogonal case
    R = FockOperator(np.eye(basis.dim) - n0.matrix, basis, "1-n0")
    _, rank0 = meet_with_rank(P, R)
    assert rank0 == _subspace_intersection_rank(P.matrix, R.matrix) == 0
    with pytest.raises(NonProjectionError):
        meet_with_rank(P, FockOperator(0.5 * np.eye(basis.dim), basis, "x"))


def test_clifford_meet_oracle(grid, onb):
    basis, modes = onb
    P = clifford_projection(modes[0], modes[1], +1, basis, grid)
    Q = clifford_projection(modes[2], modes[3], +1, basis, grid)
    _, rank = meet_with_rank(P, Q)
    assert rank == _subspace_intersection_rank(P.matrix, Q.matrix)


def test_ST_identity_check(grid, onb):
    basis, modes = onb
    rep = ST_identity_check((modes[0], modes[1]), (modes[2], modes[3]),
                            basis, grid)
    assert rep.max_asserted_residual() < 1e-9


def test_witness_shrinks_overlap_with_fixed_probe(grid):
    h = seed_bump(CFG, radius=0.5, sharpness=0.1)
    probe = wedge_bump(CFG, center=(0.0, 2.0), radius=0.8)
    rep = central_sequence_experiment(4, h, [0.004, 0.0], probe=probe,
                                     config=CFG)
    assert all(r.meet_rank == 0 for r in rep.records)
    assert rep.monotone
    wit = [r.witness for r in rep.records]
    assert wit[-1] > wit[0]
    b = [max(r.bound_f1_g, r.bound_f2_g) for r in rep.records]
    assert b[-1] < b[0]  # commutator bound with the fixed probe decays


def test_weak_locality_prefixes_and_consistency(grid):
    A = [wedge_bump(CFG, center=(0.0, 2.4), radius=0.7)]
    B = [translate(wedge_bump(CFG, center=(0.0, 2.6), radius=0.7),
                   np.array([0.0, -5.5]))]
    rep = weak_locality_check(A, B, grid)
    for name, rec in rep.checks.items():
        if name == "matrix-vs-pfaffian":
            assert rec["residual"] < 1e-9
        else:
            assert rec["residual"] < 1e-6


def test_relative_locality_identity_for_arbitrary_supports(grid):
    f = wedge_bump(CFG, center=(0.0, 2.0), radius=0.8)
    g = wedge_bump(CFG, center=(0.2, 2.2), radius=0.7)   # overlapping
    rep = relative_locality_check(f, g, grid)
    assert rep.residual("identity") < 1e-10
    assert not rep.checks["commutator-scalar"]["spacelike"]


def test_interval_generators_are_localized(grid):
    gens = interval_generators(0.5, 1.0, CFG)
    assert len(gens) == 2
    for k in gens:
        v = restrict(k, grid)
        assert v.norm > 0.05

"""Operator-algebraic experiments on the fermionic Fock representation.

Clifford projections built from field pairs, lattice meets of projections,
central-sequence nonlocality witnesses, weak / relative / string locality
checks, and membership probes for the local net generated by even
polynomials of string-localized fields.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import WedgelabError, ConfigValidationError
from .mass_shell import (ModelConfig, MassShellGrid, build_grid, restrict,
                         inner_product, commutator_value, anticommutator_value)
from . import fock_car
from .fock_car import (ModeBasis, FockOperator, build_modes, field,
                       twisted_field, parity_Z, vacuum_expectation_wick)
from . import testfn
from .testfn import (TestFunction, lemma32_pair, coherence_scalar, translate,
                     region_in_right_wedge, region_in_left_wedge,
                     regions_spacelike)

MEET_EIGENVALUE_THRESHOLD = 1e-8


class NonOrthonormalPairError(WedgelabError):
    """The field pair fed to a Clifford projection is not an orthonormal
    real pair (unit norms, vanishing real part of the overlap)."""


class NonProjectionError(WedgelabError):
    """An operator expected to be an orthogonal projection is not one."""


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WitnessRecord:
    """Per-n data of the central-sequence experiment."""
    n: int
    omega_P: float
    omega_Q: float
    meet_rank: int
    witness: float
    overlap_s12: complex
    coherence: float
    bound_f1_g: float
    bound_f2_g: float
    grid_points: int


@dataclass(frozen=True)
class WitnessReport:
    """Central-sequence nonlocality witness over a range of scaling indices."""
    records: tuple
    monotone: bool
    noise_tolerance: float
    descriptor: dict = dfield(default_factory=dict)

    def __post_init__(self):
        for r in self.records:
            if not (-1e-12 <= r.witness <= 1.0 + 1e-8):
                raise ConfigValidationError(
                    f"witness value {r.witness} outside [0, 1+tol] at n={r.n}")
            if r.meet_rank < 0:
                raise ConfigValidationError("negative meet rank")

    @property
    def n_values(self):
        return [r.n for r in self.records]

    @property
    def final_witness(self) -> float:
        return self.records[-1].witness


@dataclass(frozen=True)
class LocalityReport:
    """Named residuals of a locality check, with the tolerances used.

    ``checks`` maps a check name to a dict with at least ``residual``;
    entries carrying ``tolerance`` are asserted by callers, entries with
    ``control: True`` are negative controls (recorded, never asserted small).
    """
    checks: dict
    descriptors: tuple = ()

    def residual(self, name: str) -> float:
        return self.checks[name]["residual"]

    def max_asserted_residual(self) -> float:
        vals = [v["residual"] for v in self.checks.values()
                if not v.get("control")]
        return max(vals) if vals else 0.0


# ---------------------------------------------------------------------------
# Clifford projections and meets
# ---------------------------------------------------------------------------
def clifford_projection(f1, f2, sign: int, basis: ModeBasis,
                        grid: MassShellGrid, tol: float = 1e-6) -> FockOperator:
    """Projection (1 +/- i phi(f1) phi(f2))/2 for an orthonormal real pair.

    Preconditions: f1, f2 real test functions (or one-particle vectors)
    with unit norm and Re<f1|f2> = 0 within ``tol``; then
    (phi(f1)phi(f2))^2 = -1 and both signs give orthogonal projections.
    """
    if sign not in (+1, -1):
        raise ConfigValidationError("sign must be +1 or -1")
    v1 = f1 if not isinstance(f1, TestFunction) else restrict(f1, grid)
    v2 = f2 if not isinstance(f2, TestFunction) else restrict(f2, grid)
    n1, n2 = v1.norm, v2.norm
    s12 = inner_product(v1, v2)
    defect = max(abs(n1 - 1.0), abs(n2 - 1.0), abs(s12.real))
    if defect > tol:
        raise NonOrthonormalPairError(
            f"pair not orthonormal: |norms-1|=({abs(n1-1):.2e},{abs(n2-1):.2e}),"
            f" Re<f1|f2>={s12.real:.2e} (tol {tol})")
    F1 = field(f1, basis, grid)
    F2 = field(f2, basis, grid)
    eye = np.eye(basis.dim)
    mat = 0.5 * (eye + sign * 1j * (F1.matrix @ F2.matrix))
    return FockOperator(mat, basis, f"P{'+' if sign > 0 else '-'}")


def _check_projection(P: FockOperator, tol: float = 1e-8):
    m = P.matrix
    if np.linalg.norm(m @ m - m, 2) > tol or np.linalg.norm(m.conj().T - m, 2) > tol:
        raise NonProjectionError(f"{P.label}: not an orthogonal projection")


def meet_with_rank(E: FockOperator, F: FockOperator,
                   threshold: float = MEET_EIGENVALUE_THRESHOLD):
    """Lattice meet of two projections and its rank.

    The meet projects onto ker((1-E) + (1-F)); computed by
    eigendecomposition, keeping eigenvalues below ``threshold``.
    """
    _check_projection(E)
    _check_projection(F)
    eye = np.eye(E.basis.dim)
    S = (eye - E.matrix) + (eye - F.matrix)
    w, v = np.linalg.eigh(0.5 * (S + S.conj().T))
    keep = w < threshold
    rank = int(np.sum(keep))
    U = v[:, keep]
    mat = U @ U.conj().T
    return FockOperator(mat, E.basis, f"meet(rank={rank})"), rank


def meet(E: FockOperator, F: FockOperator,
         threshold: float = MEET_EIGENVALUE_THRESHOLD) -> FockOperator:
    """Lattice meet of two projections (see :func:`meet_with_rank`)."""
    return meet_with_rank(E, F, threshold)[0]


def ST_identity_check(f_pair, g_pair, basis: ModeBasis,
                      grid: MassShellGrid) -> LocalityReport:
    """Verify the partial-isometry identities behind the Clifford projections.

    With S = phi(f1 - i f2)/2 and T = phi(g1 - i g2)/2 for orthonormal real
    pairs: S S* = P+, S* S = P-, T T* = Q+, T* T = Q-, and
    S T + T S = <f1 + i f2 | g1 - i g2>/2 * 1.
    """
    f1, f2 = f_pair
    g1, g2 = g_pair
    Pp = clifford_projection(f1, f2, +1, basis, grid)
    Pm = clifford_projection(f1, f2, -1, basis, grid)
    Qp = clifford_projection(g1, g2, +1, basis, grid)
    Qm = clifford_projection(g1, g2, -1, basis, grid)

    def fld(a, b):
        # phi is real-linear; build phi(a - i b) as the operator combination
        return 0.5 * (field(a, basis, grid) - 1j * field(b, basis, grid))

    S = fld(f1, f2)
    T = fld(g1, g2)
    eye = np.eye(basis.dim)
    v1 = restrict(f1, grid) if isinstance(f1, TestFunction) else f1
    v2 = restrict(f2, grid) if isinstance(f2, TestFunction) else f2
    w1 = restrict(g1, grid) if isinstance(g1, TestFunction) else g1
    w2 = restrict(g2, grid) if isinstance(g2, TestFunction) else g2
    fplus = type(v1)(grid, v1.values + 1j * v2.values)
    gminus = type(w1)(grid, w1.values - 1j * w2.values)
    cross = 0.5 * inner_product(fplus, gminus)
    checks = {
        "SSdag=P+": {"residual": np.linalg.norm((S @ S.adjoint).matrix - Pp.matrix, 2)},
        "SdagS=P-": {"residual": np.linalg.norm((S.adjoint @ S).matrix - Pm.matrix, 2)},
        "TTdag=Q+": {"residual": np.linalg.norm((T @ T.adjoint).matrix - Qp.matrix, 2)},
        "TdagT=Q-": {"residual": np.linalg.norm((T.adjoint @ T).matrix - Qm.matrix, 2)},
        "ST+TS=scalar": {"residual": np.linalg.norm(
            (S @ T + T @ S).matrix - cross * eye, 2)},
    }
    return LocalityReport(checks=checks)


# ---------------------------------------------------------------------------
# Central-sequence nonlocality witness
# ---------------------------------------------------------------------------
def _momentum_reach(h: TestFunction, config: ModelConfig,
                    rel: float = 1e-11, qmax: float = 3000.0) -> float:
    """Spatial-momentum reach Q beyond which |h~| on shell is negligible."""
    q = np.linspace(1.0, qmax, 6000)
    p = np.zeros((q.size, config.d - 1))
    p[:, 0] = q
    om = np.sqrt(q**2 + config.m**2)
    mag = np.abs(h.evaluator(om, p))
    pk = mag.max()
    if pk <= 0:
        raise ConfigValidationError("seed evaluator vanishes on the scan ray")
    idx = np.where(mag / pk < rel)[0]
    return float(q[idx[0]]) if len(idx) else qmax


def central_sequence_grid(n: int, reach: float, a, config: ModelConfig,
                          panel_scale: float = 1.0) -> MassShellGrid:
    """Rapidity grid resolving the n-th central-sequence pair.

    The pair oscillates in rapidity at rate ~ n^2 * reach * |a| from the
    translation phase and varies on scale n * reach from the inner
    sine-integral factor; panels scale accordingly.
    """
    m = config.m
    a = np.asarray(a, dtype=float)
    theta_max = float(np.arcsinh(n**2 * reach / m) + 0.5)
    osc = n**2 * reach * float(np.sum(np.abs(a))) + n * reach
    npanels = int(max(300, osc / 5 * panel_scale))
    return build_grid(config, resolution=16 * npanels, theta_max=theta_max)


def central_sequence_experiment(n_max: int, h: TestFunction, a,
                                probe: TestFunction | None = None,
                                config: ModelConfig | None = None,
                                noise_tolerance: float = 1e-3,
                                coherence_gate: float = 1e-10,
                                panel_scale: float = 1.0) -> WitnessReport:
    """Run the shrinking-pair nonlocality witness up to scaling index n_max.

    For each n, builds the rescaled pair from the seed ``h``, the
    a-translated pair, the Clifford projections P_n, Q_n, and records the
    meet rank, the vacuum witness |omega(P_n ^ Q_n) - omega(P_n)omega(Q_n)|,
    and the commutator-bound overlaps with the fixed probe function.
    """
    if config is None:
        config = ModelConfig(d=h.d, m=1.0)
    a = np.asarray(a, dtype=float)
    if a.shape != (config.d,):
        raise ConfigValidationError(f"translation must have {config.d} components")
    reach = _momentum_reach(h, config)
    records = []
    monotone = True
    prev = -np.inf
    for n in range(1, n_max + 1):
        grid = central_sequence_grid(n, reach, a, config, panel_scale)
        pair = lemma32_pair(n, h, grid)
        f1, f2 = pair.f1, pair.f2
        coh = abs(coherence_scalar(pair, a, grid))
        if coh < coherence_gate:
            raise ConfigValidationError(
                f"coherence gate fails at n={n}: |scalar|={coh:.3e} < {coherence_gate}")
        tf1, tf2 = translate(f1, a), translate(f2, a)
        vecs = [restrict(v, grid) for v in (f1, f2, tf1, tf2)]
        basis = build_modes(vecs)
        P = clifford_projection(vecs[0], vecs[1], +1, basis, grid)
        Q = clifford_projection(vecs[2], vecs[3], +1, basis, grid)
        _, rank = meet_with_rank(P, Q)
        wP = P.vacuum_expectation().real
        wQ = Q.vacuum_expectation().real
        # rank 0 forces omega(P ^ Q) = 0
        meet_vac = 0.0 if rank == 0 else meet(P, Q).vacuum_expectation().real
        wit = abs(meet_vac - wP * wQ)
        s12 = inner_product(vecs[0], vecs[1])
        if probe is not None:
            g = restrict(probe, grid)
            gn = g.norm
            b1 = abs(inner_product(vecs[0], g)) / gn
            b2 = abs(inner_product(vecs[1], g)) / gn
        else:
            b1 = b2 = np.nan
        records.append(WitnessRecord(n=n, omega_P=wP, omega_Q=wQ,
                                     meet_rank=rank, witness=wit,
                                     overlap_s12=s12, coherence=coh,
                                     bound_f1_g=b1, bound_f2_g=b2,
                                     grid_points=len(grid)))
        if wit < prev - noise_tolerance:
            monotone = False
        prev = wit
    return WitnessReport(records=tuple(records), monotone=monotone,
                         noise_tolerance=noise_tolerance,
                         descriptor={"seed": h.descriptor,
                                     "translation": [float(x) for x in a]})


# ---------------------------------------------------------------------------
# Locality checks
# ---------------------------------------------------------------------------
def word_basis(fns, grid: MassShellGrid) -> ModeBasis:
    """Mode basis spanning the given functions and their conjugates."""
    vecs = []
    for f in fns:
        vecs.append(restrict(f, grid))
        vecs.append(restrict(f.conjugate(), grid))
    return build_modes(vecs)


def _word_operator(fns, basis: ModeBasis, grid: MassShellGrid) -> FockOperator:
    op = FockOperator(np.eye(basis.dim), basis, "1")
    for f in fns:
        op = op @ field(f, basis, grid)
    return op


def weak_locality_check(A_word, B_word, grid: MassShellGrid,
                        basis: ModeBasis | None = None) -> LocalityReport:
    """Vacuum weak locality: <Omega, A B Omega> = <Omega, B A Omega>.

    A_word / B_word are lists of test functions defining products of plain
    fields.  The residual is computed for every prefix pair by the matrix
    route and cross-checked against the Pfaffian route.
    """
    if basis is None:
        basis = word_basis(list(A_word) + list(B_word), grid)
    checks = {}
    consistency = 0.0
    for ka in range(len(A_word) + 1):
        for kb in range(len(B_word) + 1):
            Af, Bf = list(A_word)[:ka], list(B_word)[:kb]
            A = _word_operator(Af, basis, grid)
            B = _word_operator(Bf, basis, grid)
            ab = (A @ B).vacuum_expectation()
            ba = (B @ A).vacuum_expectation()
            ab_pf = vacuum_expectation_wick(Af + Bf, grid)
            ba_pf = vacuum_expectation_wick(Bf + Af, grid)
            consistency = max(consistency, abs(ab - ab_pf), abs(ba - ba_pf))
            checks[f"deg({ka},{kb})"] = {"residual": abs(ab - ba)}
    checks["matrix-vs-pfaffian"] = {"residual": consistency}
    return LocalityReport(checks=checks)


def relative_locality_check(f: TestFunction, g: TestFunction,
                            grid: MassShellGrid,
                            basis: ModeBasis | None = None) -> LocalityReport:
    """Mixed commutator identity [twisted phi(f), phi(g)] = scalar * Z.

    The identity residual holds for arbitrary supports; the scalar itself
    (the invariant pairing of f and g) vanishes when the supports are
    spacelike separated, which is recorded when the metadata certifies it.
    """
    if basis is None:
        basis = word_basis([f, g], grid)
    Ft = twisted_field(f, basis, grid)
    G = field(g, basis, grid)
    Z = parity_Z(basis)
    scalar = commutator_value(f, g, grid)
    ident = np.linalg.norm(Ft.commutator(G).matrix - scalar * Z.matrix, 2)
    checks = {"identity": {"residual": float(ident)}}
    spacelike = regions_spacelike(f.support, g.support)
    checks["commutator-scalar"] = {"residual": abs(scalar),
                                   "control": not spacelike,
                                   "spacelike": spacelike}
    return LocalityReport(checks=checks, descriptors=(f.descriptor, g.descriptor))


def string_locality_check(h: TestFunction, probes, grid: MassShellGrid,
                          profile_points=None,
                          config: ModelConfig | None = None) -> LocalityReport:
    """Anticommutation of a string-localized field with opposite-wedge probes.

    For each probe f the scalar anticommutator coefficient of {phi(h),
    phi(f)} is recorded relative to the product of one-particle norms; a
    two-point anticommutator profile over sample points and the
    nontriviality norm |phi(h) Omega| are included.
    """
    if config is None:
        config = grid.config
    hv = restrict(h, grid)
    hn = hv.norm
    checks = {"field-nontrivial": {"residual": float(hn), "lower_bound": True}}
    for i, f in enumerate(probes):
        fv = restrict(f, grid)
        val = anticommutator_value(h, f, grid)
        checks[f"anticommutator[{i}]"] = {
            "residual": abs(val) / (2.0 * hn * fv.norm),
            "probe": f.label}
    if profile_points is not None:
        from .mass_shell import pauli_jordan_profile
        prof = pauli_jordan_profile(h, profile_points, grid)
        checks["pauli-jordan-profile"] = {
            "residual": float(np.max(np.abs(prof)) / hn),
            "points": int(len(profile_points))}
    return LocalityReport(checks=checks, descriptors=(h.descriptor,))


def local_net_element(h_list, degree: int, grid: MassShellGrid,
                      probes=(), basis: ModeBasis | None = None):
    """Even monomial in string fields, probed for double-wedge membership.

    Builds phi(h_1) ... phi(h_degree) (cycling the list).  Membership in
    the algebra of the first wedge holds by construction (the generators
    are string fields localized in it); membership in the commutant of the
    second-wedge algebra is probed by commutators with fields smeared with
    the given probes, reported relative to the operator norms.
    """
    if degree < 0:
        raise ConfigValidationError("degree must be nonnegative")
    fns = [h_list[i % len(h_list)] for i in range(degree)]
    if basis is None:
        basis = word_basis(list(h_list) + list(probes), grid)
    A = _word_operator(fns, basis, grid)
    checks = {"degree": {"residual": float(degree), "info": True},
              "even": {"residual": 0.0 if degree % 2 == 0 else 1.0,
                       "control": degree % 2 == 1}}
    An = A.norm or 1.0
    for i, f in enumerate(probes):
        F = field(f, basis, grid)
        rel = A.commutator(F).norm / (An * (F.norm or 1.0))
        checks[f"commutes-with-probe[{i}]"] = {"residual": float(rel),
                                               "probe": f.label,
                                               "control": degree % 2 == 1}
    return A, LocalityReport(checks=checks)


def interval_generators(shift: float, width: float, config: ModelConfig,
                        count: int = 2, margin: float = 0.15):
    """String-field generators for the double cone over (shift, shift+width).

    Each generator is a lower-vanishing string built from a time-zero slab
    seed inside the interval, then translated to start at ``shift``.  The
    slab margin is the given fraction of the width (varied per generator).
    """
    gens = []
    for i in range(count):
        l = testfn.slab_bump(config, width=width,
                             margin=(margin + 0.05 * i) * width)
        k = testfn.string_function(width, l, "lower-vanishing", config)
        if shift != 0.0:
            k = translate(k, np.array([0.0] + [shift] + [0.0] * (config.d - 2)))
        gens.append(k)
    return gens


def isotony_and_locality_scan(pairs, config: ModelConfig,
                              grid: MassShellGrid | None = None,
                              probe_offsets=(0.3, 0.8, 1.5)) -> LocalityReport:
    """Isotony and locality of the net of double-cone algebras.

    ``pairs`` is a list of dicts with keys ``inner``/``outer`` (each an
    ``(shift, width)`` interval at time zero) and ``relation`` in
    {"nested", "spacelike"}.  For nested pairs, a degree-2 element of the
    inner algebra must commute with probe fields localized beyond the
    outer interval's right edge (membership in the larger algebra).  For
    spacelike pairs, the two degree-2 elements must commute.
    """
    if grid is None:
        grid = build_grid(config, resolution=4096, theta_max=8.5)
    checks = {}
    for idx, pair in enumerate(pairs):
        (s1, w1), (s2, w2) = pair["inner"], pair["outer"]
        rel = pair["relation"]
        g1 = interval_generators(s1, w1, config)
        if rel == "nested":
            if not (s2 <= s1 and s1 + w1 <= s2 + w2):
                raise ConfigValidationError(
                    f"pair {idx}: inner interval not contained in outer")
            probes = [translate(testfn.wedge_bump(config, center=(0.0, 0.0),
                                                  radius=min(0.4, 0.4 * w2)),
                                np.array([0.0, s2 + w2 + off + min(0.4, 0.4 * w2)
                                          * np.sqrt(config.d)]))
                      for off in probe_offsets]
            basis = word_basis(g1 + probes, grid)
            A, _ = local_net_element(g1, 2, grid, probes=(), basis=basis)
            An = A.norm or 1.0
            worst = 0.0
            for f in probes:
                F = field(f, basis, grid)
                worst = max(worst, A.commutator(F).norm / (An * F.norm))
            checks[f"nested[{idx}]"] = {"residual": float(worst),
                                        "inner": [s1, w1], "outer": [s2, w2]}
        elif rel == "spacelike":
            if not (s1 + w1 <= s2 or s2 + w2 <= s1):
                raise ConfigValidationError(
                    f"pair {idx}: intervals overlap, not spacelike")
            g2 = interval_generators(s2, w2, config)
            basis = word_basis(g1 + g2, grid)
            A, _ = local_net_element(g1, 2, grid, basis=basis)
            B, _ = local_net_element(g2, 2, grid, basis=basis)
            resid = A.commutator(B).norm / ((A.norm or 1.0) * (B.norm or 1.0))
            checks[f"spacelike[{idx}]"] = {"residual": float(resid),
                                           "first": [s1, w1], "second": [s2, w2]}
        else:
            raise ConfigValidationError(f"unknown relation {rel!r}")
    return LocalityReport(checks=checks)

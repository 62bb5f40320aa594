"""Exact CAR field matrices on a truncated antisymmetric Fock space.

The truncation is by *span*, not particle number: an orthonormal ModeBasis
is built over the one-particle vectors of the working set, and all operators
are dense 2^M x 2^M matrices on the antisymmetric Fock space over that span.
All algebraic identities of the smeared fields then hold exactly (up to
quadrature error in the scalar coefficients).

Also provides an independent Wick/Pfaffian oracle for vacuum expectation
values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WedgelabError
from .mass_shell import MassShellGrid, OneParticleVector, inner_product, restrict

MAX_MODES = 12


class CapacityError(WedgelabError):
    """Mode count exceeds the dense-matrix capacity (M > 12)."""


class EmptyBasisError(WedgelabError):
    """All basis input vectors were numerically dependent / null."""


class OutOfSpanError(WedgelabError):
    """A requested vector does not lie in the basis span."""


@dataclass(frozen=True)
class ModeBasis:
    """Orthonormal one-particle modes spanning the working set.

    Attributes
    ----------
    modes : list of OneParticleVector
        Orthonormal (Gram matrix = identity within 1e-10).
    provenance : list of dict
        Per input vector: its coefficient expansion in the modes and the
        post-projection residual.
    drop_log : list of dict
        Inputs discarded as numerically dependent.
    tol : float
        Gram-Schmidt drop tolerance used.
    """

    modes: list
    provenance: list
    drop_log: list
    tol: float
    grid: MassShellGrid

    @property
    def M(self) -> int:
        return len(self.modes)

    @property
    def dim(self) -> int:
        return 2 ** len(self.modes)

    def expand(self, v: OneParticleVector, what: str = "vector") -> np.ndarray:
        """Coefficients of v in the modes; raises if v leaves the span."""
        coeff = np.array([inner_product(mo, v) for mo in self.modes])
        resid = v.values - sum(c * mo.values for c, mo in zip(coeff, self.modes))
        rnorm = np.sqrt(abs(np.sum(v.grid.weights * np.abs(resid) ** 2)))
        vnorm = max(v.norm, 1e-300)
        if rnorm / vnorm > 1e-6:
            raise OutOfSpanError(
                f"{what} lies outside the mode span: relative residual "
                f"{rnorm / vnorm:.3e}")
        return coeff


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the truncated Fock space."""

    matrix: np.ndarray
    basis: ModeBasis
    label: str = ""

    def _chk(self, other: "FockOperator"):
        if self.basis is not other.basis:
            raise WedgelabError("operators live on different mode bases")

    def __matmul__(self, other):
        self._chk(other)
        return FockOperator(self.matrix @ other.matrix, self.basis,
                            f"({self.label})({other.label})")

    def __add__(self, other):
        self._chk(other)
        return FockOperator(self.matrix + other.matrix, self.basis,
                            f"{self.label}+{other.label}")

    def __sub__(self, other):
        self._chk(other)
        return FockOperator(self.matrix - other.matrix, self.basis,
                            f"{self.label}-{other.label}")

    def __mul__(self, c):
        return FockOperator(c * self.matrix, self.basis, f"{c}*{self.label}")

    __rmul__ = __mul__

    @property
    def adjoint(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.basis, f"{self.label}*")

    @property
    def norm(self) -> float:
        """Operator (spectral) norm."""
        return float(np.linalg.norm(self.matrix, 2))

    def commutator(self, other: "FockOperator") -> "FockOperator":
        return self @ other - other @ self

    def anticommutator(self, other: "FockOperator") -> "FockOperator":
        return self @ other + other @ self

    def vacuum_expectation(self) -> complex:
        return complex(self.matrix[0, 0])


@dataclass(frozen=True)
class FockVector:
    components: np.ndarray
    basis: ModeBasis

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def vacuum(basis: ModeBasis) -> FockVector:
    """The Fock vacuum: unit vector in the zero-occupancy slot."""
    v = np.zeros(basis.dim, dtype=complex)
    v[0] = 1.0
    return FockVector(v, basis)


def build_modes(vectors, tol: float = 1e-9) -> ModeBasis:
    """Orthonormalize one-particle vectors by double-pass Gram-Schmidt.

    Inputs whose post-projection norm falls below ``tol`` (relative to the
    input norm) are dropped and logged.
    """
    vectors = list(vectors)
    if not vectors:
        raise EmptyBasisError("no input vectors")
    if tol <= 0:
        raise WedgelabError("tolerance must be positive")
    grid = vectors[0].grid
    modes: list[OneParticleVector] = []
    provenance = []
    drop_log = []
    for idx, v in enumerate(vectors):
        if v.grid is not grid:
            raise WedgelabError("all vectors must share one grid")
        r = v.values.copy()
        coeff = np.zeros(len(modes) + 1, dtype=complex)
        for _pass in range(2):
            for j, mo in enumerate(modes):
                c = np.sum(grid.weights * np.conj(mo.values) * r)
                coeff[j] += c
                r = r - c * mo.values
        rnorm = np.sqrt(max(np.sum(grid.weights * np.abs(r) ** 2).real, 0.0))
        vnorm = max(v.norm, 1e-300)
        if rnorm / vnorm < tol:
            drop_log.append({"index": idx, "residual": float(rnorm / vnorm),
                             "expansion": coeff[:-1].tolist()})
            provenance.append({"index": idx, "expansion": coeff[:-1],
                               "new_mode": None})
            continue
        if len(modes) >= MAX_MODES:
            raise CapacityError(
                f"mode count would exceed {MAX_MODES}; refusing dense "
                f"representation")
        modes.append(OneParticleVector(grid, r / rnorm))
        coeff[-1] = rnorm
        provenance.append({"index": idx, "expansion": coeff,
                           "new_mode": len(modes) - 1})
    if not modes:
        raise EmptyBasisError("all input vectors numerically dependent/null")
    return ModeBasis(modes, provenance, drop_log, tol, grid)


def _jw_ladders(M: int):
    """Jordan-Wigner creation matrices with the prepend sign convention.

    a^dag_i maps occupation set B (bitmask, mode j occupied iff bit j) to
    B | (1<<i) with sign (-1)^(number of occupied modes of index < i) --
    the sign produced by prepending a vector and anticommuting it into
    slot i of the ordered wedge product.
    """
    dim = 2 ** M
    adag = [np.zeros((dim, dim), dtype=complex) for _ in range(M)]
    for b in range(dim):
        for i in range(M):
            if not (b >> i) & 1:
                sign = (-1) ** bin(b & ((1 << i) - 1)).count("1")
                adag[i][b | (1 << i), b] = sign
    return adag


def creation(i: int, basis: ModeBasis) -> FockOperator:
    """Creation operator of mode i."""
    if not 0 <= i < basis.M:
        raise WedgelabError(f"mode index {i} out of range")
    return FockOperator(_jw_ladders(basis.M)[i], basis, f"a*[{i}]")


def annihilation(i: int, basis: ModeBasis) -> FockOperator:
    """Annihilation operator of mode i."""
    return FockOperator(creation(i, basis).matrix.conj().T, basis, f"a[{i}]")


def _label(f) -> str:
    return getattr(f, "label", "vec")


def _field_parts(f, basis: ModeBasis, grid: MassShellGrid):
    """Creation/annihilation parts of phi(f).

    ``f`` may be a TestFunction or a bare OneParticleVector; a bare vector
    is taken to represent a real function, so its conjugate one-particle
    vector is the vector itself.
    """
    if grid is not basis.grid:
        raise WedgelabError("grid does not match the basis grid")
    if isinstance(f, OneParticleVector):
        cf = basis.expand(f, "|v>")
        df = cf
    else:
        cf = basis.expand(restrict(f, grid), f"|{f.label}>")
        df = basis.expand(restrict(f.conjugate(), grid), f"|conj {f.label}>")
    adag = _jw_ladders(basis.M)
    dim = basis.dim
    plus = np.zeros((dim, dim), dtype=complex)
    minus = np.zeros((dim, dim), dtype=complex)
    for i in range(basis.M):
        plus += cf[i] * adag[i]
        minus += np.conj(df[i]) * adag[i].conj().T
    return plus, minus


def field_plus(f, basis: ModeBasis, grid: MassShellGrid) -> FockOperator:
    """Creation part: phi_plus(f) creates |f>."""
    plus, _ = _field_parts(f, basis, grid)
    return FockOperator(plus, basis, f"phi+({_label(f)})")


def field_minus(f, basis: ModeBasis, grid: MassShellGrid) -> FockOperator:
    """Annihilation part: phi_minus(f) annihilates via <fbar|.>."""
    _, minus = _field_parts(f, basis, grid)
    return FockOperator(minus, basis, f"phi-({_label(f)})")


def field(f, basis: ModeBasis, grid: MassShellGrid) -> FockOperator:
    """The smeared field phi(f) = phi_plus(f) + phi_minus(f)."""
    plus, minus = _field_parts(f, basis, grid)
    return FockOperator(plus + minus, basis, f"phi({_label(f)})")


def number_N(basis: ModeBasis) -> FockOperator:
    """Particle number operator (diagonal in occupation basis)."""
    n = np.array([bin(b).count("1") for b in range(basis.dim)], dtype=float)
    return FockOperator(np.diag(n.astype(complex)), basis, "N")


def parity_Z(basis: ModeBasis) -> FockOperator:
    """Klein parity Z = (-1)^N."""
    n = np.array([bin(b).count("1") for b in range(basis.dim)])
    return FockOperator(np.diag(((-1.0) ** n).astype(complex)), basis, "Z")


def klein_V(basis: ModeBasis) -> FockOperator:
    """Twist V = (-1)^(N(N-1)/2)."""
    n = np.array([bin(b).count("1") for b in range(basis.dim)])
    return FockOperator(np.diag(((-1.0) ** (n * (n - 1) // 2)).astype(complex)),
                        basis, "V")


def twisted_field(f, basis: ModeBasis, grid: MassShellGrid) -> FockOperator:
    """Twisted field phihat(f) = V phi(f) V^(-1) = (phi+ - phi-) Z.

    Computed by conjugation with V; the closed form with the parity factor
    is asserted to 1e-10 as an internal consistency check.
    """
    plus, minus = _field_parts(f, basis, grid)
    v = klein_V(basis).matrix
    phi = plus + minus
    twisted = v @ phi @ v  # V is an involution
    alt = (plus - minus) @ parity_Z(basis).matrix
    defect = np.linalg.norm(twisted - alt, 2)
    if defect > 1e-10:
        raise WedgelabError(
            f"twisted-field identity violated: defect {defect:.3e}")
    return FockOperator(twisted, basis, f"phihat({_label(f)})")


def parity_projectors(basis: ModeBasis):
    """Projectors onto even/odd particle number: (1 +- Z)/2."""
    z = parity_Z(basis).matrix
    eye = np.eye(basis.dim)
    return (FockOperator(0.5 * (eye + z), basis, "P_even"),
            FockOperator(0.5 * (eye - z), basis, "P_odd"))


def _pfaffian_expansion(A: np.ndarray) -> complex:
    """Pfaffian of the pairing matrix via recursive expansion.

    A[i][j] for i < j holds the contraction of slots i and j; the value is
    the signed sum over perfect matchings.
    """
    n = A.shape[0]
    if n == 0:
        return 1.0
    idx = list(range(n))

    def rec(slots):
        if not slots:
            return 1.0
        first = slots[0]
        total = 0.0
        for pos in range(1, len(slots)):
            j = slots[pos]
            rest = slots[1:pos] + slots[pos + 1:]
            sign = (-1) ** (pos - 1)
            total += sign * A[first, j] * rec(rest)
        return total

    return complex(rec(idx))


def vacuum_expectation_wick(fs, grid: MassShellGrid) -> complex:
    """Vacuum expectation <Omega, phi(f1)...phi(fn) Omega> by Wick pairing.

    Independent oracle: the value is the Pfaffian (signed sum over perfect
    matchings) of the two-point matrix A[i][j] = <fbar_i | f_j> for i < j;
    zero for odd n.
    """
    fs = list(fs)
    n = len(fs)
    if n == 0:
        return 1.0
    if n % 2 == 1:
        return 0.0
    restrictions = [restrict(f, grid) for f in fs]
    conj_restrictions = [restrict(f.conjugate(), grid) for f in fs]
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = inner_product(conj_restrictions[i], restrictions[j])
    return _pfaffian_expansion(A)

"""Relativistic one-particle kinematics on the positive mass shell.

Quadrature grids on the hyperboloid ``p0 = sqrt(|p|^2 + m^2)``, the
Lorentz-invariant inner product

    <f|g> = 2*pi * integral dp theta(p0) delta(p^2 - m^2) conj(f~(p)) g~(p),

and the smeared two-point functions (commutator / anticommutator values)
derived from it.

Fourier convention used throughout the package::

    f~(p) = (2*pi)^(-d/2) * integral dx f(x) exp(i*(p0*x0 - p.x))

so translation by ``a`` multiplies ``f~`` by ``exp(i*(p0*a0 - p.a))`` and the
complex conjugate function satisfies ``(fbar)~(p) = conj(f~(-p))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import WedgelabError


class GridConfigError(WedgelabError):
    """Invalid grid resolution or momentum cutoff."""


class GridMismatchError(WedgelabError):
    """Two vectors do not live on the same quadrature grid."""


class EvaluationError(WedgelabError):
    """A test-function evaluator failed at a grid node."""


@dataclass(frozen=True)
class ModelConfig:
    """Model parameters: spacetime dimension and mass.

    Parameters
    ----------
    d : int
        Spacetime dimension, >= 2.  The modular module requires d = 2;
        the rest of the package supports d in {2, 3, 4}.
    m : float
        Particle mass, > 0.
    """

    d: int = 2
    m: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 2):
            raise GridConfigError(f"dimension must be an integer >= 2, got {self.d}")
        if self.d > 4:
            raise GridConfigError(f"dimension {self.d} not supported (d in {{2,3,4}})")
        if not self.m > 0:
            raise GridConfigError(f"mass must be positive, got {self.m}")


@dataclass(frozen=True)
class MassShellGrid:
    """Quadrature grid on the positive mass shell.

    Attributes
    ----------
    config : ModelConfig
    nodes : ndarray, shape (n, d-1)
        Spatial momenta.
    weights : ndarray, shape (n,)
        Positive quadrature weights, including the invariant-measure factor
        1/(2*omega(p)) and the 2*pi normalization.
    parameterization : str
        "rapidity" for d = 2, "tensor" for d >= 3.
    """

    config: ModelConfig
    nodes: np.ndarray
    weights: np.ndarray
    parameterization: str
    theta: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise GridConfigError("all quadrature weights must be positive")

    @property
    def omega(self) -> np.ndarray:
        """On-shell energies sqrt(|p|^2 + m^2) at the nodes."""
        return np.sqrt(np.sum(self.nodes**2, axis=1) + self.config.m**2)

    def __len__(self):
        return self.nodes.shape[0]


@dataclass(frozen=True)
class OneParticleVector:
    """On-shell restriction of a Fourier transform: the model's ``|f>``."""

    grid: MassShellGrid
    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise EvaluationError("non-finite entries in one-particle vector")

    @property
    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def scaled(self, c: complex) -> "OneParticleVector":
        return OneParticleVector(self.grid, c * self.values)


def _rapidity_panels(theta_max: float, npanels: int, order: int = 16):
    """Composite Gauss-Legendre panels on [-theta_max, theta_max]."""
    x, w = leggauss(order)
    edges = np.linspace(-theta_max, theta_max, npanels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    theta = (mid[:, None] + half * x[None, :]).ravel()
    wt = (half * w)[None, :].repeat(npanels, 0).ravel()
    return theta, wt


def build_grid(config: ModelConfig, resolution: int = 256,
               theta_max: float = 7.0, cutoff: float | None = None) -> MassShellGrid:
    """Build a symmetric quadrature grid on the positive mass shell.

    Parameters
    ----------
    config : ModelConfig
    resolution : int
        Nodes per axis (d >= 3) or total rapidity nodes (d = 2); >= 8.
        For d = 2 the grid uses composite 16-point Gauss-Legendre panels,
        so the actual node count is rounded up to a multiple of 16.
    theta_max : float
        Rapidity span for d = 2; nodes are p1 = m*sinh(theta), |theta| <=
        theta_max, with weight pi * w (since 2*pi * dp1/(2*omega) = pi*dtheta).
    cutoff : float, optional
        Momentum cutoff per axis for d >= 3 (default 8*m); must exceed m.
    """
    if resolution < 8:
        raise GridConfigError(f"resolution must be >= 8, got {resolution}")
    m = config.m
    if config.d == 2:
        if theta_max <= 0:
            raise GridConfigError("theta_max must be positive")
        npanels = max(1, int(np.ceil(resolution / 16)))
        theta, wt = _rapidity_panels(theta_max, npanels)
        nodes = (m * np.sinh(theta))[:, None]
        weights = np.pi * wt
        return MassShellGrid(config, nodes, weights, "rapidity", theta=theta)
    if cutoff is None:
        cutoff = 8.0 * m
    if cutoff <= m:
        raise GridConfigError(f"cutoff must exceed the mass m={m}, got {cutoff}")
    x, w = leggauss(resolution)
    axis = cutoff * x
    axes = [axis] * (config.d - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in mesh], axis=1)
    wmesh = np.meshgrid(*([cutoff * w] * (config.d - 1)), indexing="ij")
    wprod = np.ones(nodes.shape[0])
    for g in wmesh:
        wprod = wprod * g.ravel()
    omega = np.sqrt(np.sum(nodes**2, axis=1) + m**2)
    weights = 2.0 * np.pi * wprod / (2.0 * omega)
    return MassShellGrid(config, nodes, weights, "tensor")


def restrict(f, grid: MassShellGrid) -> OneParticleVector:
    """Restrict a test function to the upper mass shell.

    ``values[i] = f~(omega(p_i), p_i)``.
    """
    omega = grid.omega
    try:
        vals = np.asarray(f.evaluator(omega, grid.nodes), dtype=complex)
    except Exception as exc:  # noqa: BLE001 - wrap with node context
        raise EvaluationError(f"evaluator of {getattr(f, 'label', f)!r} failed: {exc}") from exc
    if vals.shape != omega.shape:
        raise EvaluationError(
            f"evaluator of {getattr(f, 'label', f)!r} returned shape {vals.shape}, "
            f"expected {omega.shape}")
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        raise EvaluationError(
            f"evaluator of {getattr(f, 'label', f)!r} non-finite at node {bad} "
            f"(p={grid.nodes[bad]})")
    return OneParticleVector(grid, vals)


def inner_product(u: OneParticleVector, v: OneParticleVector) -> complex:
    """Invariant inner product <u|v> = sum_i w_i conj(u_i) v_i."""
    if u.grid is not v.grid:
        raise GridMismatchError("one-particle vectors live on different grids")
    return complex(np.sum(u.grid.weights * np.conj(u.values) * v.values))


def commutator_value(f, g, grid: MassShellGrid) -> complex:
    """Scalar commutator coefficient <fbar|g> - <gbar|f>.

    This is the coefficient of the Klein twist in the mixed commutator of
    the twisted and plain fields, and the Pauli-Jordan pairing of f and g.
    """
    fb = restrict(f.conjugate(), grid)
    gb = restrict(g.conjugate(), grid)
    return inner_product(fb, restrict(g, grid)) - inner_product(gb, restrict(f, grid))


def anticommutator_value(f, g, grid: MassShellGrid) -> complex:
    """Scalar anticommutator coefficient <gbar|f> + <fbar|g>."""
    fb = restrict(f.conjugate(), grid)
    gb = restrict(g.conjugate(), grid)
    return inner_product(gb, restrict(f, grid)) + inner_product(fb, restrict(g, grid))


def pauli_jordan_profile(h, points, grid: MassShellGrid) -> np.ndarray:
    """Anticommutator profile x -> {phi(h), phi(delta_x)} over spacetime points.

    ``delta_x`` is the (real) point-evaluation kernel with on-shell
    restriction ``(2*pi)^(-d/2) * exp(i*(omega*x0 - p.x))``; the result is
    the smeared two-point anticommutator function of h against it.

    Parameters
    ----------
    h : TestFunction
        Typically a time-zero-layer (string) function.
    points : sequence of spacetime points, each of length d.
    grid : MassShellGrid
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        raise GridConfigError("empty point list")
    d = grid.config.d
    if points.shape[1] != d:
        raise GridConfigError(f"points must have {d} components")
    omega = grid.omega
    w = grid.weights
    hv = restrict(h, grid).values
    hbv = restrict(h.conjugate(), grid).values
    c = (2.0 * np.pi) ** (-d / 2.0)
    out = np.empty(points.shape[0], dtype=complex)
    for i, x in enumerate(points):
        phase = np.exp(1j * (omega * x[0] - grid.nodes @ x[1:]))
        e = c * phase
        # <delta_bar_x|h> + <hbar|delta_x>; delta_x is real so its conjugate
        # has the same on-shell restriction
        out[i] = np.sum(w * (np.conj(e) * hv + np.conj(hbv) * e))
    return out

"""Boost flow, strip continuation, and the Tomita-conjugation identity.

Dimension-2 one-particle verification of the modular structure of the right
wedge: the boost acts on rapidity profiles f^(theta) = f~(m cosh theta,
m sinh theta) by translation; the modular square root corresponds to
analytic continuation by pi in imaginary rapidity, realized as a Fourier
multiplier e^{pi*lambda} in the conjugate variable; and the Tomita
conjugation S = J Delta^{1/2} must send |f> to |fbar> for wedge-supported f.

The continuation amplifies the spectral tail of the profile exponentially,
so for the quantitative checks the product-mollifier bump family is
re-sampled at extended precision (gmpy2) using the tabulated mollifier
cosine transform of :mod:`._mpmoll`.  Window sizing is driven by an
empirical spectral model: the continued profile's transform decays like a
stretched exponential exp(-2*sqrt(c*lambda/xc)) in the multiplier variable,
where c is the bump halfwidth and xc its distance from the wedge edge, so
the achievable residual is set by the window top lam_hi, and refinement
must widen the window, not merely add samples.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field as dfield

import numpy as np

import gmpy2
from gmpy2 import mpfr, mpc, get_context

from .errors import (WedgelabError, GridSpanError, SupportPreconditionError,
                     DomainViolationError, ConfigValidationError)
from .mass_shell import ModelConfig, GridConfigError
from .testfn import (TestFunction, Ball, RightWedge, LeftWedge, All,
                     region_in_right_wedge, region_in_left_wedge)
from ._mpmoll import get_table, fft_pow2

#: growth threshold (output norm / input norm) above which the continuation
#: reports a modular-domain violation
GROWTH_THRESHOLD = 1e3

#: spectral-window coefficient: lam_hi = WINDOW_COEFF * (xc + |a0|) / c gives
#: a predicted continuation residual ~ 0.5 * exp(-2*sqrt(WINDOW_COEFF))
WINDOW_COEFF = 23.5

#: window widening per refinement level (spacing halves per level as well)
WINDOW_STEP = 20.0

#: hard cap on the multiplier window (precision and table cost grow linearly)
WINDOW_MAX = 130.0

_LAM_NEG = 6.0
_OUT_POINTS = 161


@dataclass(frozen=True)
class RapidityProfile:
    """Samples of an on-shell wave function on a uniform rapidity grid.

    ``values`` is either a complex128 array or an object array of gmpy2
    complex numbers (extended-precision profiles built by
    :func:`mollifier_profile`).  ``metadata`` records provenance: source
    label, declared support, and - for continued profiles - the window,
    padding and precision used.
    """
    theta: np.ndarray
    values: np.ndarray
    label: str = ""
    metadata: dict = dfield(default_factory=dict)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 1 or th.size < 8:
            raise GridSpanError("profile needs at least 8 uniform nodes")
        d = np.diff(th)
        if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
            raise GridSpanError("rapidity nodes must be uniformly spaced")
        # symmetric up to one spacing (grids may omit the right endpoint)
        if abs(th[0] + th[-1]) > 1.5 * abs(d[0]):
            raise GridSpanError("rapidity grid must be symmetric about 0")
        if len(self.values) != th.size:
            raise GridSpanError("values/theta length mismatch")
        if self.values.dtype != object and not np.all(np.isfinite(self.values)):
            raise GridSpanError("non-finite profile values")

    @property
    def spacing(self) -> float:
        return float(self.theta[1] - self.theta[0])

    @property
    def is_extended(self) -> bool:
        return self.values.dtype == object

    def as_complex(self) -> np.ndarray:
        if self.values.dtype == object:
            return np.array([complex(v) for v in self.values])
        return self.values


def _enforce_end_decay(values, label, rel=1e-8):
    mags = np.abs(np.asarray(values, dtype=complex)) if values.dtype != object \
        else np.array([abs(complex(v)) for v in values])
    pk = mags.max()
    if pk <= 0:
        raise GridSpanError(f"profile {label!r} vanishes identically")
    end = max(mags[0], mags[-1])
    if end > rel * pk:
        raise GridSpanError(
            f"profile {label!r} does not decay at the grid ends "
            f"(end/peak = {end / pk:.2e} > {rel}); widen the span")


def rapidity_profile(f: TestFunction, span: float, count: int,
                     config: ModelConfig | None = None) -> RapidityProfile:
    """Sample f~ on the d=2 mass shell over theta in [-span, span].

    The invariant measure in rapidity is pi * dtheta, so
    pi * spacing * sum |values|^2 approximates <f|f>.
    """
    if config is None:
        config = ModelConfig(d=f.d)
    if config.d != 2:
        raise GridConfigError("rapidity profiles require d = 2")
    if span <= 0 or count < 8:
        raise GridSpanError("need positive span and at least 8 nodes")
    m = config.m
    theta = np.linspace(-span, span, count)
    p = (m * np.sinh(theta))[:, None]
    vals = np.asarray(f.evaluator(m * np.cosh(theta), p), dtype=complex)
    _enforce_end_decay(vals, f.label)
    return RapidityProfile(theta, vals, label=f.label,
                           metadata={"source": f.label, "support": f.support,
                                     "mass": m, "descriptor": f.descriptor})


def profile_norm(profile: RapidityProfile) -> float:
    """Invariant norm: sqrt(pi * spacing * sum |values|^2)."""
    v = profile.as_complex()
    return float(np.sqrt(np.pi * profile.spacing * np.sum(np.abs(v) ** 2)))


def boost_flow(profile: RapidityProfile, t: float) -> RapidityProfile:
    """Unitary boost action: the profile translated to f^(theta - t).

    Implemented by band-limited interpolation (Fourier shift) on the
    uniform grid; exact for profiles whose spectrum fits the grid band.
    Double-precision operation: extended profiles are flattened first.
    """
    v = profile.as_complex()
    n = v.size
    lam = 2.0 * np.pi * np.fft.fftfreq(n, d=profile.spacing)
    shifted = np.fft.ifft(np.fft.fft(v) * np.exp(-1j * lam * t))
    meta = dict(profile.metadata)
    meta["boosted_by"] = meta.get("boosted_by", 0.0) + t
    return RapidityProfile(profile.theta, shifted, label=profile.label, metadata=meta)


def theta_reflection(obj):
    """Reflection about the edge of the right wedge.

    On a test function this is the linear point reflection x -> -x, i.e.
    momentum evaluator p -> -p.  On a rapidity profile it is the antilinear
    building block of the modular conjugation J: since (fbar)~(-p) =
    conj(f~(p)), the combined reflect-and-conjugate action is pointwise
    complex conjugation in rapidity coordinates.
    """
    if isinstance(obj, RapidityProfile):
        vals = (np.array([gmpy2.mpc(v.real, -v.imag) for v in obj.values],
                         dtype=object)
                if obj.is_extended else np.conj(obj.values))
        meta = dict(obj.metadata)
        meta["reflected"] = not meta.get("reflected", False)
        return RapidityProfile(obj.theta, vals, label=f"reflect({obj.label})",
                               metadata=meta)
    if isinstance(obj, TestFunction):
        inner = obj.evaluator

        def ev(p0, p):
            return inner(-np.asarray(p0, dtype=float), -np.asarray(p, dtype=float))

        supp = obj.support
        if isinstance(supp, Ball):
            supp = Ball(tuple(-np.asarray(supp.center, dtype=float)), supp.radius)
        elif isinstance(supp, RightWedge):
            supp = LeftWedge(-supp.shift)
        elif isinstance(supp, LeftWedge):
            supp = RightWedge(-supp.shift)
        else:
            supp = All()
        return dataclasses.replace(obj, evaluator=ev, support=supp,
                                   label=f"reflect({obj.label})",
                                   descriptor={"family": "reflect",
                                               "inner": obj.descriptor})
    raise ConfigValidationError(f"cannot reflect {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Extended-precision profiles of the product-mollifier bump family
# ---------------------------------------------------------------------------
def _window_for(center, radius, level: int):
    a0, xc = float(center[0]), float(center[1])
    c = float(radius)
    if xc - abs(a0) <= 2.0 * c:
        raise SupportPreconditionError(
            f"bump support (center {tuple(center)}, halfwidth {c}) is not "
            "inside the open right wedge; the strip continuation is undefined")
    ratio = (xc + abs(a0)) / c
    lam_base = math.ceil(WINDOW_COEFF * ratio)
    lam_hi = lam_base + WINDOW_STEP * level
    if lam_hi > WINDOW_MAX:
        raise GridSpanError(
            f"required multiplier window {lam_hi:.0f} exceeds the supported "
            f"maximum {WINDOW_MAX:.0f}; the bump is too deep in the wedge "
            "relative to its width for the tabulated precision range")
    return lam_base, lam_hi


def _dps_for(lam_hi: float) -> int:
    return int(5 + lam_hi * math.pi / math.log(10) + 6)


def _theta_quarantine(ct, c, m, lam_hi):
    """Span at which the two-axis envelope reaches the window floor."""
    ln_target = math.log(3e-6) - math.pi * lam_hi

    def log_env2(th):
        return (ct.log_envelope(c * m * math.cosh(th))
                + ct.log_envelope(c * m * abs(math.sinh(th))))

    th_q = 3.0
    while log_env2(th_q) > ln_target:
        th_q += 0.05
    return th_q + 0.05


def mollifier_profile(f: TestFunction, level: int = 0,
                      config: ModelConfig | None = None) -> RapidityProfile:
    """Extended-precision rapidity profile of a product-mollifier bump.

    Only the :func:`~.testfn.wedge_bump` family at unit sharpness is
    supported: its on-shell restriction factorizes through the tabulated
    mollifier cosine transform, which is what makes deep re-sampling
    feasible.  ``level`` halves the sample spacing and widens the
    multiplier window per level (see module docstring).
    """
    if config is None:
        config = ModelConfig(d=f.d)
    if config.d != 2:
        raise GridConfigError("extended profiles require d = 2")
    desc = f.descriptor or {}
    if desc.get("family") != "wedge_bump" or desc.get("sharpness") != 1.0:
        raise ConfigValidationError(
            "extended-precision continuation is tabulated only for the "
            "product-mollifier bump family at unit sharpness")
    if not f.is_real:
        raise ConfigValidationError("continuation targets require a real bump")
    center = desc["center"]
    c = float(desc["radius"])
    m = config.m
    lam_base, lam_hi = _window_for(center, c, level)
    dps = _dps_for(lam_hi)
    ct, _ = get_table(lam_hi, dps)
    get_context().precision = ct.prec

    th_q = _theta_quarantine(ct, c, m, lam_hi)
    a0, xc = float(center[0]), float(center[1])
    rate0 = (abs(a0) + xc + 2 * c) * m * math.cosh(_theta_quarantine(ct, c, m, lam_base))
    lam_nyq0 = (rate0 + lam_base) / 2 * 1.02
    th_q0 = _theta_quarantine(ct, c, m, lam_base)
    nsamp0 = int(2 * th_q0 * lam_nyq0 / math.pi) + 1
    dth0 = 2 * th_q0 / nsamp0
    dth_f = dth0 / (2 ** level)
    nsamp = int(math.ceil(2 * th_q / dth_f))
    pad = 1
    while pad < nsamp:
        pad <<= 1

    mm = mpfr(str(m))
    cc = mpfr(str(c))
    a0g = mpfr(str(a0))
    xcg = mpfr(str(xc))
    dth = mpfr(2 * th_q) / nsamp
    thq_g = mpfr(th_q)
    vals = np.empty(nsamp, dtype=object)
    for jj in range(nsamp):
        th = -thq_g + dth * jj
        sh = gmpy2.sinh(th)
        chh = gmpy2.cosh(th)
        envv = ct(cc * mm * chh) * ct(cc * mm * sh)
        ph = a0g * mm * chh - xcg * mm * sh
        vals[jj] = mpc(envv * gmpy2.cos(ph), envv * gmpy2.sin(ph))
    theta = -th_q + (2 * th_q / nsamp) * np.arange(nsamp)
    meta = {"source": f.label, "support": f.support, "descriptor": desc,
            "mass": m, "mp": True, "dps": dps, "lam_hi": lam_hi,
            "level": level, "th_q": th_q, "nsamp": nsamp, "pad": pad,
            "center": [a0, xc], "halfwidth": c,
            "out_span": math.asinh(59.7 / (c * m)) + 0.2,
            "out_points": _OUT_POINTS}
    return RapidityProfile(theta, vals, label=f.label, metadata=meta)


def _mp_target_values(meta, out_theta, conjugate: bool):
    """Table-based samples of f^ (or its conjugate) on the output grid."""
    dps = meta["dps"]
    ct, _ = get_table(meta["lam_hi"], dps)
    get_context().precision = ct.prec
    mm = mpfr(str(meta["mass"]))
    cc = mpfr(str(meta["halfwidth"]))
    a0g = mpfr(str(meta["center"][0]))
    xcg = mpfr(str(meta["center"][1]))
    out = np.empty(len(out_theta), dtype=object)
    sgn = -1 if conjugate else 1
    for i, thf in enumerate(out_theta):
        th = mpfr(thf)
        sh = gmpy2.sinh(th)
        chh = gmpy2.cosh(th)
        envv = ct(cc * mm * chh) * ct(cc * mm * sh)
        ph = sgn * (a0g * mm * chh - xcg * mm * sh)
        out[i] = mpc(envv * gmpy2.cos(ph), envv * gmpy2.sin(ph))
    return out


# ---------------------------------------------------------------------------
# Strip continuation
# ---------------------------------------------------------------------------
def _continuation_modes(profile: RapidityProfile, lam_hi: float):
    """Windowed Fourier modes (lam_k, coefficient) of the profile."""
    if profile.is_extended:
        meta = profile.metadata
        get_context().precision = get_table(meta["lam_hi"], meta["dps"])[0].prec
        nsamp, pad = meta["nsamp"], meta["pad"]
        th_q = meta["th_q"]
        dth = mpfr(2 * th_q) / nsamp
        arr = [mpc(0)] * pad
        for jj in range(nsamp):
            arr[jj] = profile.values[jj]
        fft_pow2(arr)
        span_big = pad * dth
        two_pi = 2 * gmpy2.const_pi()
        dlam = float(two_pi / span_big)
        k_lo = -int(_LAM_NEG / dlam)
        k_hi = int(lam_hi / dlam)
        lam = [two_pi * k / span_big for k in range(k_lo, k_hi + 1)]
        coef = [arr[k % pad] / pad for k in range(k_lo, k_hi + 1)]
        return lam, coef, {"pad": pad, "dlam": dlam, "theta_origin": th_q}
    v = profile.as_complex()
    n = v.size
    pad = 1
    while pad < n:
        pad <<= 1
    buf = np.zeros(pad, dtype=complex)
    buf[:n] = v
    spec = np.fft.fft(buf)
    dlam = 2.0 * np.pi / (pad * profile.spacing)
    k_lo = -int(_LAM_NEG / dlam)
    k_hi = int(lam_hi / dlam)
    lam = [dlam * k for k in range(k_lo, k_hi + 1)]
    coef = [spec[k % pad] / pad for k in range(k_lo, k_hi + 1)]
    return lam, coef, {"pad": pad, "dlam": dlam, "theta_origin": -float(profile.theta[0])}


def _resum(lam, coef, theta_origin, out_theta, extended: bool):
    if extended:
        out = np.empty(len(out_theta), dtype=object)
        thq_g = mpfr(theta_origin)
        for i, thf in enumerate(out_theta):
            th = mpfr(thf)
            h = mpc(0)
            for lm, dk in zip(lam, coef):
                a_ = lm * (th + thq_g)
                h += dk * mpc(gmpy2.cos(a_), gmpy2.sin(a_))
            out[i] = h
        return out
    lam_a = np.asarray(lam, dtype=float)
    coef_a = np.asarray(coef, dtype=complex)
    phase = np.exp(1j * np.multiply.outer(np.asarray(out_theta) + theta_origin, lam_a))
    return phase @ coef_a


def half_continuation(profile: RapidityProfile, force: bool = False,
                      multiplier_sign: int = +1) -> RapidityProfile:
    """Analytic continuation of the profile by pi in imaginary rapidity.

    Computes f^(theta - i pi) as sum_k F(lam_k) e^{i lam_k theta} e^{pi lam_k}
    over a windowed mode set; the window, padding, and precision are
    recorded in the output metadata.  Requires support metadata inside the
    right wedge (pass ``force=True`` to probe the multiplier on other
    supports).  If the output norm exceeds the input norm by
    ``GROWTH_THRESHOLD`` the modular-domain violation is reported.
    """
    meta = profile.metadata
    supp = meta.get("support")
    if supp is None or not region_in_right_wedge(supp):
        if not force:
            raise SupportPreconditionError(
                f"profile {profile.label!r} support {supp!r} is not certified "
                "inside the right wedge; continuation undefined (use force "
                "to probe the multiplier anyway)")
    if profile.is_extended:
        lam_hi = meta["lam_hi"]
    else:
        # double-precision samples carry ~16 digits: the multiplier window
        # is capped where e^{pi lam} reaches the sample noise floor
        lam_hi = 10.0
    lam, coef, info = _continuation_modes(profile, lam_hi)
    pi_g = gmpy2.const_pi() if profile.is_extended else np.pi
    mult = [dk * gmpy2.exp(multiplier_sign * pi_g * lm) for lm, dk in zip(lam, coef)] \
        if profile.is_extended else \
        [dk * np.exp(multiplier_sign * np.pi * lm) for lm, dk in zip(lam, coef)]
    if profile.is_extended:
        out_span = meta["out_span"]
        n_out = meta["out_points"]
        out_theta = np.array([-out_span + 2 * out_span * i / (n_out - 1)
                              for i in range(n_out)])
    else:
        out_theta = profile.theta
    vals = _resum(lam, mult, info["theta_origin"], out_theta, profile.is_extended)
    out_meta = {"source": meta.get("source"), "support": supp,
                "continued": True, "window": [-_LAM_NEG, lam_hi],
                "pad": info["pad"], "mode_spacing": info["dlam"],
                "multiplier_sign": multiplier_sign,
                "modes": (lam, coef, info["theta_origin"])}
    for key in ("mp", "dps", "lam_hi", "level", "mass", "halfwidth", "center",
                "descriptor"):
        if key in meta:
            out_meta[key] = meta[key]
    if profile.is_extended:
        vals_arr = vals
    else:
        vals_arr = np.asarray(vals, dtype=complex)
    result = RapidityProfile(np.asarray(out_theta, dtype=float), vals_arr,
                             label=f"continued({profile.label})", metadata=out_meta)
    in_norm = _l2(profile.values)
    out_norm = _l2(vals)
    ratio = float(out_norm / in_norm) if in_norm > 0 else np.inf
    result.metadata["growth_ratio"] = ratio
    if ratio > GROWTH_THRESHOLD:
        raise DomainViolationError(
            f"continuation norm grew by {ratio:.3e} (> {GROWTH_THRESHOLD:.0e}): "
            f"profile {profile.label!r} is not in the domain of the modular "
            "square root (support not in the right wedge)")
    return result


def _l2(values) -> float:
    if isinstance(values, np.ndarray) and values.dtype != object:
        return float(np.sqrt(np.sum(np.abs(values) ** 2)))
    s = mpfr(0)
    for v in values:
        s += gmpy2.norm(v)
    return float(gmpy2.sqrt(s))


def delta_consistency_check(profile: RapidityProfile) -> float:
    """Composition of two half-multipliers vs the full 2 pi multiplier.

    Applies e^{pi lam} twice and e^{2 pi lam} once to the same windowed
    mode set and compares the resummed profiles (relative l2).
    """
    cont = half_continuation(profile, force=True)
    lam, coef, origin = cont.metadata["modes"]
    ext = profile.is_extended
    if ext:
        twice = [dk * gmpy2.exp(gmpy2.const_pi() * lm) ** 2
                 for lm, dk in zip(lam, coef)]
        once = [dk * gmpy2.exp(2 * gmpy2.const_pi() * lm)
                for lm, dk in zip(lam, coef)]
    else:
        twice = [dk * np.exp(np.pi * lm) ** 2 for lm, dk in zip(lam, coef)]
        once = [dk * np.exp(2 * np.pi * lm) for lm, dk in zip(lam, coef)]
    out_theta = cont.theta
    a = _resum(lam, twice, origin, out_theta, ext)
    b = _resum(lam, once, origin, out_theta, ext)
    if ext:
        diff = np.array([x - y for x, y in zip(a, b)], dtype=object)
        return _l2(diff) / max(_l2(b), 1e-300)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def flow_sign_calibration(profiles) -> dict:
    """Empirical pin of the modular-flow sign convention.

    For right-wedge-supported profiles the multiplier e^{+pi lam} is the
    contractive direction (the profile's spectral bulk sits at negative
    lam); the opposite sign blows up.  Returns the norm-growth ratios and
    the calibrated sign.
    """
    worst_plus = 0.0
    best_minus = np.inf
    for p in profiles:
        plus = half_continuation(p, multiplier_sign=+1)
        worst_plus = max(worst_plus, plus.metadata["growth_ratio"])
        try:
            ratio = half_continuation(p, multiplier_sign=-1).metadata["growth_ratio"]
        except DomainViolationError:
            ratio = np.inf
        best_minus = min(best_minus, ratio)
    if not (worst_plus < GROWTH_THRESHOLD <= best_minus or worst_plus < best_minus):
        raise ConfigValidationError(
            f"flow-sign calibration inconclusive: +pi ratio {worst_plus:.3e}, "
            f"-pi ratio {best_minus:.3e}")
    return {"sign": +1, "contractive_ratio": worst_plus,
            "explosive_ratio": best_minus}


# ---------------------------------------------------------------------------
# Tomita conjugation check
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TomitaResult:
    """Residual of the S = J Delta^{1/2} identity on one test function."""
    residual: float
    level: int
    window: float
    dps: int
    samples: int
    pad: int
    label: str


def tomita_S_check(f: TestFunction, config: ModelConfig | None = None,
                   level: int = 0) -> TomitaResult:
    """Relative residual of J Delta^{1/2} |f> = |fbar> on the one-particle
    level, for a real product-mollifier bump supported in the right wedge.

    The continuation J Delta^{1/2} is evaluated on a uniform output grid
    covering the region where the continued profile is above the window
    floor; ``level`` halves the sample spacing and widens the multiplier
    window (both are required for the residual to decrease).
    """
    if config is None:
        config = ModelConfig(d=f.d)
    if not region_in_right_wedge(f.support):
        raise SupportPreconditionError(
            f"{f.label!r}: support {f.support!r} not inside the right wedge")
    prof = mollifier_profile(f, level=level, config=config)
    cont = half_continuation(prof)
    refl = theta_reflection(cont)
    target = _mp_target_values(prof.metadata, refl.theta, conjugate=False)
    get_context().precision = get_table(prof.metadata["lam_hi"],
                                        prof.metadata["dps"])[0].prec
    num = mpfr(0)
    den = mpfr(0)
    for u, v in zip(refl.values, target):
        num += gmpy2.norm(u - v)
        den += gmpy2.norm(v)
    resid = float(gmpy2.sqrt(num / den))
    return TomitaResult(residual=resid, level=level,
                        window=prof.metadata["lam_hi"],
                        dps=prof.metadata["dps"],
                        samples=prof.metadata["nsamp"],
                        pad=prof.metadata["pad"], label=f.label)


def tomita_refinement(f: TestFunction, config: ModelConfig | None = None,
                      levels=(0, 1)):
    """Tomita residuals across refinement levels (halved spacing each)."""
    return [tomita_S_check(f, config=config, level=lv) for lv in levels]

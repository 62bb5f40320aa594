"""Extended-precision mollifier cosine transform and FFT primitives.

``MollifierCT`` evaluates C(y) = int_{-1}^{1} exp(-s/(1-t^2)) cos(y t) dt
(for sharpness s = 1) to hundreds of digits over a wide range of y by a
Taylor march of the fourth-order ODE it satisfies,

    y C'''' + 4 C''' + 2 y C'' + 6 C' + y C = 0,

seeded from deep tanh-sinh quadrature.  The march is carried out in raw
gmpy2 arithmetic for speed; ``fft_pow2`` is an in-place radix-2 FFT over
lists of gmpy2 complex numbers.

Accuracy notes (empirically calibrated):

* The ODE has solutions growing like exp(+sqrt(y)), so any error epsilon
  in the initial data is amplified along the march; the working precision
  must therefore exceed the deepest signal level by a growing margin.
* The quadrature for the initial conditions must be driven to the full
  working precision: the library default quadrature depth silently caps
  accuracy near 1e-105 independently of the precision setting, which
  would place a flat error floor across every downstream sample.
* The true large-y envelope is |C(y)| ~ sqrt(2*pi) (2y)^(-3/4) e^(-sqrt(y))
  with unit constant (saddle point at t = 1 - e^(-i pi/4)/sqrt(2 y)).
"""
from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpfr, mpc, get_context
from mpmath import mp, mpf, quad, exp as _mexp, cos as _mcos, sin as _msin


def _F(n: int, j: int) -> int:
    r = 1
    for i in range(1, j + 1):
        r *= (n + i)
    return r


class MollifierCT:
    """Taylor-march table for the mollifier cosine transform C(y)."""

    def __init__(self, ymax: float, dps: int, order: int | None = None):
        prec = int(dps * 3.3219281) + 12
        self.prec = prec
        self.dps = dps
        get_context().precision = prec
        if order is None:
            # per-step truncation must stay below the deepest signal level,
            # with margin for the exp(+sqrt(y)) error growth of the march
            need = dps * math.log(10) + 35 + math.log(ymax)
            order = 42
            while math.lgamma(order + 2) < need:
                order += 2
        self.order = order
        mp.dps = dps + 12
        # quadrature depth must scale with precision (default caps ~1e-105)
        mdeg = max(8, int(math.log2(dps)) + 4)
        chi = lambda t: _mexp(-1 / (1 - t * t))

        def q(f):
            v, err = quad(f, [-1, 0, 1], maxdegree=mdeg, error=True)
            if err > mpf(10) ** (-(dps + 4)):
                raise RuntimeError(f"initial-condition quadrature stalled: err={err}")
            return v

        nmom = 60
        self.gmom = [mpfr(str(q(lambda t: t ** (2 * j) * chi(t))))
                     for j in range(nmom)]
        self.gfact = [mpfr(math.factorial(2 * j)) for j in range(nmom)]
        y0 = mpf(2)
        ics = [q(lambda t: chi(t) * _mcos(y0 * t)),
               q(lambda t: -t * chi(t) * _msin(y0 * t)),
               q(lambda t: -t * t * chi(t) * _mcos(y0 * t)),
               q(lambda t: t ** 3 * chi(t) * _msin(y0 * t))]
        state = [mpfr(str(v)) for v in ics]
        self._f4 = [mpfr(_F(n, 4)) for n in range(order + 1)]
        self._f3 = [mpfr(_F(n, 3)) for n in range(order + 1)]
        self._f2 = [mpfr(_F(n, 2)) for n in range(order + 1)]
        self._f1 = [mpfr(_F(n, 1)) for n in range(order + 1)]
        self.nodes = []
        y = mpfr(2)
        one = mpfr(1)
        while y < ymax + 1:
            a = self._taylor(y, state)
            self.nodes.append((y, a))
            state = [self._ev(a, one, d) for d in range(4)]
            y += 1
        self.y0f = 2.0
        self.ymax = float(y)

    def _taylor(self, y0, state):
        a = [state[0], state[1], state[2] / 2, state[3] / 6]
        for n in range(self.order):
            t = 4 * self._f3[n] * a[n + 3] + 2 * y0 * self._f2[n] * a[n + 2] \
                + 6 * self._f1[n] * a[n + 1] + y0 * a[n]
            if n >= 1:
                t += self._f4[n - 1] * a[n + 3] + 2 * self._f2[n - 1] * a[n + 1] \
                     + a[n - 1]
            a.append(-t / (y0 * self._f4[n]))
        return a

    @staticmethod
    def _ev(a, u, der=0):
        s = mpfr(0)
        up = mpfr(1)
        for n in range(der, len(a)):
            f = 1
            for j in range(der):
                f *= (n - j)
            s += f * a[n] * up
            up *= u
        return s

    def __call__(self, y):
        if y < 0:
            y = -y
        if y < 2:
            s = mpfr(0)
            y2 = y * y
            up = mpfr(1)
            for j, m_ in enumerate(self.gmom):
                term = m_ * up / self.gfact[j]
                s = s + term if (j % 2 == 0) else s - term
                up *= y2
            return s
        idx = int(float(y) - self.y0f)
        if idx >= len(self.nodes):
            raise RuntimeError(f"transform table too short: y={float(y)} "
                               f"ymax={len(self.nodes) + 2}")
        yn, a = self.nodes[idx]
        u = y - yn
        s = mpfr(0)
        for c in reversed(a):
            s = s * u + c
        return s

    def log_envelope(self, y: float) -> float:
        """ln of the local oscillation envelope of |C|/C(0) near y.

        Maximizes over five samples spanning a pi window so the estimate
        cannot land on an oscillation zero.
        """
        pk = self(mpfr(0))
        best = None
        for k in range(5):
            v = abs(self(mpfr(y + k * math.pi / 4))) / pk
            if best is None or v > best:
                best = v
        return float(gmpy2.log(best)) if best > 0 else -1e99


_TABLE_CACHE: dict = {}


def get_table(lam_hi: float, dps: int) -> tuple:
    """Table + per-axis end-decay target for a given multiplier window.

    Returns ``(table, ln_axis)`` where ln_axis is half the two-axis sample
    floor ln(3e-6) - pi*lam_hi.  Tables are cached per dps and rebuilt if a
    wider window needs a longer march.
    """
    ln_axis = 0.5 * (math.log(3e-6) - math.pi * lam_hi)
    ylim = (abs(ln_axis) + 12.0) ** 2 + 200.0
    ct = _TABLE_CACHE.get(dps)
    if ct is None or ct.ymax < ylim:
        ct = MollifierCT(ylim, dps)
        _TABLE_CACHE[dps] = ct
    return ct, ln_axis


def fft_pow2(a: list) -> None:
    """In-place radix-2 FFT (negative-exponent convention) of a list of
    gmpy2 mpc values; length must be a power of two."""
    n = len(a)
    if n & (n - 1):
        raise ValueError("fft length must be a power of two")
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            a[i], a[j] = a[j], a[i]
    pi_hi = gmpy2.const_pi()
    length = 2
    while length <= n:
        ang = -2 * pi_hi / length
        half = length >> 1
        w = mpc(1)
        wl = mpc(gmpy2.cos(ang), gmpy2.sin(ang))
        tw = []
        for _ in range(half):
            tw.append(w)
            w = w * wl
        for start in range(0, n, length):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * tw[k]
                a[start + k] = u + v
                a[start + k + half] = u - v
        length <<= 1

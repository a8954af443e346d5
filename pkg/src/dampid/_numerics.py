"""Low-level kernels for exponential integrals and phase reduction.

Everything here is vectorised over numpy arrays and free of model knowledge.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import signal as sps

# Below this modulus the closed forms cancel badly; Taylor series are used instead.
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 24
_FRAC_BITS = 20
_CHUNK = 512


def cis_frac(K, u):
    """Return ``exp(2j*pi*K*u)`` with the product reduced modulo one exactly.

    ``K`` holds integers (possibly ~1e8) and ``u`` reals.  ``u`` is split into
    a dyadic head with ``_FRAC_BITS`` fractional bits and a small tail, so the
    head product is an exact int64 and only ``K * tail`` carries rounding.
    """
    K = np.asarray(K, dtype=np.int64)
    u = np.asarray(u, dtype=float)
    scale = 1 << _FRAC_BITS
    head = np.rint(u * scale)
    big = float(np.max(np.abs(K), initial=0)) * float(np.max(np.abs(head), initial=0))
    if big >= 2.0**62:
        frac = np.mod(K * u, 1.0)
    else:
        head = head.astype(np.int64)
        tail = u - head / scale
        frac = np.mod(K * head, scale) / scale + K * tail
        frac = frac - np.floor(frac)
    return np.exp(2j * np.pi * frac)


def phi1(w):
    """``expm1(w) / w`` with the removable singularity at zero filled in."""
    w = np.asarray(w, dtype=complex)
    out = np.ones_like(w)
    nz = w != 0
    out[nz] = np.expm1(w[nz]) / w[nz]
    return out


def exp_integral(z, a, b):
    """``integral_a^b exp(z t) dt`` for complex ``z`` (broadcasts)."""
    z = np.asarray(z, dtype=complex)
    return np.exp(z * a) * (b - a) * phi1(z * (b - a))


def _series(z, coeffs):
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    for c in reversed(coeffs):
        out = out * z + c
    return out


_EA_COEFFS = [1.0 / math.factorial(k + 2) for k in range(_SERIES_TERMS)]
_EB_COEFFS = [(k + 1) / math.factorial(k + 2) for k in range(_SERIES_TERMS)]


def linear_cell_weights(z):
    """Moments of the two hat halves on the unit cell.

    Returns ``(EA, EB)`` with ``EA = int_0^1 (1-s) e^{zs} ds`` and
    ``EB = int_0^1 s e^{zs} ds``; a linear function with end values
    ``(p, r)`` on a cell of length ``h`` starting at ``t0`` integrates
    against ``e^{zt}`` to ``h e^{z t0} (p EA(zh) + r EB(zh))``.
    """
    z = np.asarray(z, dtype=complex)
    ea = np.empty_like(z)
    eb = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    if np.any(small):
        ea[small] = _series(z[small], _EA_COEFFS)
        eb[small] = _series(z[small], _EB_COEFFS)
    big = ~small
    if np.any(big):
        zb = z[big]
        em1 = np.expm1(zb)
        ea[big] = (em1 - zb) / zb**2
        eb[big] = (zb * (em1 + 1.0) - em1) / zb**2
    return ea, eb


def _quadratic_moments(w):
    """``m_k = int_0^2 s^k e^{ws} ds`` for k = 0, 1, 2."""
    w = np.asarray(w, dtype=complex)
    m = [np.empty_like(w) for _ in range(3)]
    small = np.abs(w) < 1.0
    if np.any(small):
        ws = w[small]
        for k in range(3):
            coeffs = [2.0 ** (k + j + 1) / (math.factorial(j) * (k + j + 1)) for j in range(34)]
            m[k][small] = _series(ws, coeffs)
    big = ~small
    if np.any(big):
        wb = w[big]
        e2 = np.exp(2.0 * wb)
        m0 = np.expm1(2.0 * wb) / wb
        m1 = (2.0 * e2 - m0) / wb
        m2 = (4.0 * e2 - 2.0 * m1) / wb
        m[0][big], m[1][big], m[2][big] = m0, m1, m2
    return m


def filon_simpson(g, x0, h, z):
    """Integrate the piecewise-quadratic interpolant of ``g`` against ``e^{zx}``.

    ``g`` is sampled at ``x0 + j h`` for ``j = 0..2P``.  The rule is exact for
    every ``z`` when ``g`` is piecewise quadratic and collapses to composite
    Simpson at ``z = 0``, but unlike Simpson it stays accurate when ``|z| h``
    is large.
    """
    g = np.asarray(g, dtype=complex)
    if g.size < 3 or g.size % 2 == 0:
        raise ValueError("filon_simpson needs an odd number (>= 3) of samples")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    xp = x0 + 2.0 * h * np.arange((g.size - 1) // 2)
    g0, g1, g2 = g[0:-1:2], g[1::2], g[2::2]
    m0, m1, m2 = _quadratic_moments(z * h)
    w0 = 0.5 * (m2 - 3.0 * m1 + 2.0 * m0)
    w1 = 2.0 * m1 - m2
    w2 = 0.5 * (m2 - m1)
    out = np.empty(z.shape, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        E = np.exp(np.outer(z[sl], xp))
        out[sl] = w0[sl] * (E @ g0) + w1[sl] * (E @ g1) + w2[sl] * (E @ g2)
    return h * out


def composite_simpson(y, dx):
    """Composite Simpson on an odd number of equispaced samples."""
    y = np.asarray(y)
    if y.size < 3 or y.size % 2 == 0:
        raise ValueError("composite_simpson needs an odd number (>= 3) of samples")
    return dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def lag_autocorrelation(K, c):
    """Lags ``k`` and ``S_k = sum over K_m - K_n = k of c_m conj(c_n)``.

    ``K`` are integers; the sum is one FFT correlation over the dense range.
    """
    K = np.asarray(K, dtype=np.int64)
    c = np.asarray(c, dtype=complex)
    k0 = int(K.min())
    span = int(K.max()) - k0 + 1
    dense = np.zeros(span, dtype=complex)
    np.add.at(dense, K - k0, c)
    S = sps.correlate(dense, dense, mode="full", method="fft" if span > 64 else "direct")
    lags = np.arange(-(span - 1), span, dtype=np.int64)
    keep = np.abs(S) > 0
    return lags[keep], S[keep]


def sinhc_integral(z, X):
    """``int_0^X cosh(z x) dx = sinh(z X) / z`` (``X`` at ``z = 0``)."""
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, X, dtype=complex)
    small = np.abs(z * X) < 1e-3
    w = (z * X)[small]
    out[small] = X * (1 + w**2 / 6 + w**4 / 120)
    big = ~small
    out[big] = np.sinh(z[big] * X) / z[big]
    return out


def uniform_exp_sum(K, L, w, n_points, sign=1):
    """``sum_n w_n exp(sign 2 pi i K_n x_j / L)`` on ``x_j = j / (n_points - 1)``.

    Needs ``L (n_points - 1)`` to be an integer ``P``; the phases are then
    ``exp(2 pi i K_n j / P)`` and the sum is one inverse FFT of ``w`` bucketed
    by ``K_n mod P``.  Returns ``None`` when ``P`` is not an integer.
    """
    P = L * (n_points - 1)
    if abs(P - round(P)) > 1e-9 * P or round(P) < n_points - 1:
        return None
    P = int(round(P))
    buckets = np.zeros(P, dtype=complex)
    np.add.at(buckets, np.mod(sign * np.asarray(K, dtype=np.int64), P), w)
    return (np.fft.ifft(buckets) * P)[:n_points]


def is_unit_grid(x) -> bool:
    """True for ``linspace(0, 1, n)`` up to rounding."""
    x = np.asarray(x, dtype=float)
    return x.size >= 3 and np.allclose(x, np.linspace(0.0, 1.0, x.size), rtol=0, atol=1e-13)

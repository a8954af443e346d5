"""Two strings joined at x=1/2 with joint (anti-)damping, observed by ``u_x(0, t)``.

For ``q > 2``: ``lambda_n = atanh(2/q) + i n pi`` and
``Phi_n = (phi_n, lambda_n phi_n)`` with the piecewise profile

    phi_n(x) = sqrt(2)/lambda_n cosh(lambda_n/2) sinh(lambda_n x)      0 <= x <= 1/2
    phi_n(x) = sqrt(2)/lambda_n sinh(lambda_n/2) cosh(lambda_n (1-x))  1/2 < x <= 1

so ``kappa_n = phi_n'(0) = sqrt(2) cosh(lambda_n / 2)``.  The two branches
agree at x = 1/2; the left one is used there.
"""

from __future__ import annotations

import math

import numpy as np

from .._numerics import filon_simpson, lag_autocorrelation, sinhc_integral
from ..core import GrowthMap, Interval, ModalState, SpectralModel
from ..errors import DomainError

ABOVE_TWO = Interval(2.0, math.inf)
SQRT2 = math.sqrt(2.0)


def _inverse(f):
    return 2.0 / np.tanh(f)


class StringsModel(SpectralModel):
    name = "strings"
    index_kind = "Z"
    components = 2

    def __init__(self, prior: Interval = ABOVE_TWO):
        if not prior.within(ABOVE_TWO):
            raise DomainError("only the q > 2 branch of the coupled strings is supported")
        self.prior = prior
        self.L = 2.0
        self.growth = GrowthMap(lambda q: np.arctanh(2.0 / q), _inverse, prior, singular=(2.0,))

    def K(self, n):
        return np.asarray(n, dtype=np.int64)

    def kappa(self, q, n):
        return SQRT2 * np.cosh(self.eigenvalue(q, n) / 2)

    def kappa_bounds(self, q):
        self.growth.validate(q)
        r = ((q + 2) / (q - 2)) ** 0.25
        return (SQRT2 / 2 * (r - 1 / r), SQRT2 / 2 * (r + 1 / r))

    def eigenfunction(self, q, n, x, energy=False):
        lam = np.atleast_1d(self.eigenvalue(q, n))
        x = self._check_x(x)
        left = (x <= 0.5)[:, None]
        ch, sh = np.cosh(lam / 2), np.sinh(lam / 2)
        # exp(lambda (1 - x)) = exp(lambda) / exp(lambda x)
        E = np.exp(np.outer(x, lam))
        Ei = 1.0 / E
        ER, ERi = np.exp(lam) * Ei, np.exp(-lam) * E
        lphi = np.where(left, SQRT2 * ch * 0.5 * (E - Ei), SQRT2 * sh * 0.5 * (ER + ERi))
        if energy:
            dphi = np.where(left, SQRT2 * ch * 0.5 * (E + Ei), -SQRT2 * sh * 0.5 * (ER - ERi))
            return dphi, lphi
        return lphi / lam, lphi

    def _fast_profiles(self, q, state, x, energy):
        lam = self.eigenvalue(q, state.indices)
        b = state.coeffs
        wl = SQRT2 * np.cosh(lam / 2) * b
        wr = SQRT2 * np.sinh(lam / 2) * b
        # right branch: cosh(lam (1-x)) = (e^lam e^{-lam x} + e^{-lam} e^{lam x}) / 2
        weights = [wl, wr * np.exp(lam), wr * np.exp(-lam)]
        if not energy:
            weights = [w / lam for w in weights] + weights
        sums = self.exp_sums(q, self.K(state.indices), weights, x.size)
        if sums is None:
            return None
        left = x <= 0.5

        def lphi(s):
            (lp, lm), (_, r1m), (r2p, _) = s
            return np.where(left, 0.5 * (lp - lm), 0.5 * (r1m + r2p))

        if energy:
            (lp, lm), (_, r1m), (r2p, _) = sums
            dphi = np.where(left, 0.5 * (lp + lm), -0.5 * (r1m - r2p))
            return dphi, lphi(sums)
        return lphi(sums[:3]), lphi(sums[3:])

    def state_norm(self, q, state, n_points=None):
        """Closed form; on each half the energy density is a ``cosh`` double sum."""
        if not np.any(state.coeffs):
            return 0.0
        lam = self.eigenvalue(q, state.indices)
        K = self.K(state.indices)
        total = 0.0
        for w in (np.cosh(lam / 2), np.sinh(lam / 2)):
            lags, S = lag_autocorrelation(K, SQRT2 * w * state.coeffs)
            z = 2 * self.f(q) + 2j * np.pi * lags / self.L
            total += np.real(np.sum(S * sinhc_integral(z, 0.5)))
        return float(np.sqrt(max(total, 0.0)))

    def project(self, q, data, indices, n_points=4097):
        if n_points < 5 or (n_points - 1) % 4:
            raise ValueError("n_points - 1 must be divisible by 4 (x = 1/2 must split panels)")
        idx = np.asarray(indices, dtype=np.int64)
        lam = self.eigenvalue(q, idx)
        x = np.linspace(0.0, 1.0, n_points)
        _, du0, u1 = data.samples(x)
        if u1 is None:
            raise DomainError("the strings model needs an initial velocity u1")
        h = x[1] - x[0]
        m = (n_points - 1) // 2
        # a_n = int u0' phi_n' - lambda_n u1 phi_n, split at the joint
        gl_m, gl_p = (du0 - u1)[: m + 1], (du0 + u1)[: m + 1]
        left = SQRT2 * np.cosh(lam / 2) * 0.5 * (
            filon_simpson(gl_m, 0.0, h, lam) + filon_simpson(gl_p, 0.0, h, -lam)
        )
        gr_p, gr_m = (du0 + u1)[m:], (u1 - du0)[m:]
        right = -SQRT2 * np.sinh(lam / 2) * 0.5 * (
            np.exp(lam) * filon_simpson(gr_p, 0.5, h, -lam)
            + np.exp(-lam) * filon_simpson(gr_m, 0.5, h, lam)
        )
        return ModalState(idx, left + right)

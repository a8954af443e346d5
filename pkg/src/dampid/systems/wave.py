"""String fixed at x=0 with (anti-)damping ``u_x(1) = q u_t(1)``, observed by ``u_x(0, t)``.

State space ``H_E^1(0,1) x L^2(0,1)`` with energy inner product.  The
spectrum solves ``tanh(lambda) = 1/q``:

* ``|q| > 1``: ``lambda_n = atanh(1/q) + i n pi``, period ``L = 2``;
* ``|q| < 1``: ``lambda_n = atanh(q) + i (2n+1) pi / 2``, period ``L = 4``.

Eigenvectors are ``Phi_n = (sinh(lambda_n x)/lambda_n, sinh(lambda_n x))`` and
every ``kappa_n = Phi_n'(0) = 1``.
"""

from __future__ import annotations

import math

import numpy as np

from .._numerics import filon_simpson, lag_autocorrelation, sinhc_integral
from ..core import GrowthMap, Interval, ModalState, SpectralModel
from ..errors import DomainError

ANTI = Interval(1.0, math.inf)
STABLE = Interval(-math.inf, -1.0)
SUB = Interval(-1.0, 1.0)


def _inv_tanh_recip(f):
    return 1.0 / np.tanh(f)


class WaveModel(SpectralModel):
    name = "wave"
    index_kind = "Z"
    components = 2

    def __init__(self, prior: Interval = ANTI):
        if prior.within(ANTI):
            self.branch = "q>1"
        elif prior.within(STABLE):
            self.branch = "q<-1"
        elif prior.within(SUB):
            self.branch = "|q|<1"
        else:
            raise DomainError(f"prior {prior} straddles a singular value q=+-1")
        if self.branch == "|q|<1":
            self.L = 4.0
            self.growth = GrowthMap(np.arctanh, np.tanh, prior, singular=(-1.0, 1.0))
        else:
            self.L = 2.0
            self.growth = GrowthMap(lambda q: np.arctanh(1.0 / q), _inv_tanh_recip, prior,
                                    singular=(-1.0, 1.0))
        self.prior = prior

    def K(self, n):
        n = np.asarray(n, dtype=np.int64)
        return 2 * n + 1 if self.branch == "|q|<1" else n

    def kappa(self, q, n):
        self.growth.validate(q)
        return np.ones(np.shape(n), dtype=complex)

    def kappa_bounds(self, q):
        return (1.0, 1.0)

    def eigenfunction(self, q, n, x, energy=False):
        lam = np.atleast_1d(self.eigenvalue(q, n))
        E = np.exp(np.outer(self._check_x(x), lam))
        Ei = 1.0 / E
        s = 0.5 * (E - Ei)
        if energy:
            return 0.5 * (E + Ei), s
        return s / lam, s

    def _fast_profiles(self, q, state, x, energy):
        lam = self.eigenvalue(q, state.indices)
        b = state.coeffs
        sums = self.exp_sums(q, self.K(state.indices), [b, b / lam], x.size)
        if sums is None:
            return None
        (bp, bm), (lp, lm) = sums
        u1 = 0.5 * (bp - bm)
        if energy:
            return 0.5 * (bp + bm), u1
        return 0.5 * (lp - lm), u1

    def state_norm(self, q, state, n_points=None):
        """Closed form: the energy density of ``sum b_n Phi_n`` is
        ``sum b_m conj(b_n) cosh((lambda_m + conj(lambda_n)) x)``."""
        if not np.any(state.coeffs):
            return 0.0
        lags, S = lag_autocorrelation(self.K(state.indices), state.coeffs)
        z = 2 * self.f(q) + 2j * np.pi * lags / self.L
        return float(np.sqrt(max(np.real(np.sum(S * sinhc_integral(z, 1.0))), 0.0)))

    def project(self, q, data, indices, n_points=4097):
        if n_points < 3 or (n_points - 1) % 2:
            raise ValueError("n_points must be odd")
        idx = np.asarray(indices, dtype=np.int64)
        lam = self.eigenvalue(q, idx)
        x = np.linspace(0.0, 1.0, n_points)
        _, du0, u1 = data.samples(x)
        if u1 is None:
            raise DomainError("the wave model needs an initial velocity u1")
        h = x[1] - x[0]
        # u0' cosh(lx) - u1 sinh(lx) = (u0' - u1) e^{lx} / 2 + (u0' + u1) e^{-lx} / 2
        a = 0.5 * filon_simpson(du0 - u1, 0.0, h, lam) + 0.5 * filon_simpson(du0 + u1, 0.0, h, -lam)
        return ModalState(idx, a)

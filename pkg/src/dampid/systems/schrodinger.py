"""Schrodinger equation ``u_t = -i u_xx + q u`` with ``u_x(0) = u(1) = 0``, observed by ``u(0, t)``.

``lambda_n = q + i (n - 1/2)^2 pi^2`` for ``n >= 1`` and the eigenfunctions
``sqrt(2) cos((n - 1/2) pi x)`` are orthonormal in ``L^2(0, 1)``.  With
``L = 8 / pi`` every ``mu_n L / 2 pi = (2n - 1)^2`` is an integer.
"""

from __future__ import annotations

import math

import numpy as np

from .._numerics import filon_simpson
from ..core import GrowthMap, Interval, ModalState, SpectralModel
from ..errors import DomainError

POSITIVE = Interval(0.0, math.inf)
SQRT2 = math.sqrt(2.0)


def _identity(v):
    return v


class SchrodingerModel(SpectralModel):
    name = "schrodinger"
    index_kind = "N"
    components = 1

    def __init__(self, prior: Interval = POSITIVE):
        if not prior.within(POSITIVE):
            raise DomainError("the anti-damping potential must be positive")
        self.prior = prior
        self.L = 8.0 / math.pi
        self.growth = GrowthMap(_identity, _identity, prior)

    def K(self, n):
        n = np.asarray(n, dtype=np.int64)
        if np.any(n < 1):
            raise DomainError("Schrodinger modes are indexed from n = 1")
        return (2 * n - 1) ** 2

    def kappa(self, q, n):
        self.growth.validate(q)
        return np.full(np.shape(n), SQRT2, dtype=complex)

    def kappa_bounds(self, q):
        return (SQRT2, SQRT2)

    @staticmethod
    def wavenumber(n):
        return (np.asarray(n, dtype=float) - 0.5) * np.pi

    def eigenfunction(self, q, n, x, energy=False):
        self.growth.validate(q)
        k = np.atleast_1d(self.wavenumber(n))
        return (SQRT2 * np.cos(np.outer(self._check_x(x), k)),)

    def state_norm(self, q, state, n_points=None):
        """The eigenfunctions are orthonormal, so this is the l2 norm."""
        self.growth.validate(q)
        return state.norm()

    def project(self, q, data, indices, n_points=4097):
        if n_points < 3 or (n_points - 1) % 2:
            raise ValueError("n_points must be odd")
        self.growth.validate(q)
        idx = np.asarray(indices, dtype=np.int64)
        k = self.wavenumber(idx)
        x = np.linspace(0.0, 1.0, n_points)
        u0, _, _ = data.samples(x)
        h = x[1] - x[0]
        a = (SQRT2 / 2) * (filon_simpson(u0, 0.0, h, 1j * k) + filon_simpson(u0, 0.0, h, -1j * k))
        return ModalState(idx, a)

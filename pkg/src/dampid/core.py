"""Spectral-system contract shared by every model.

A model exposes eigenvalues of the form ``lambda_n = f(q) + i mu_n`` where the
growth rate ``f`` depends only on the coefficient ``q`` and the frequencies
``mu_n = 2 pi K_n / L`` are integer multiples of ``2 pi / L``.  Signals built
from such a spectrum are ``e^{f t}`` times an ``L``-periodic function, which is
what the estimators in :mod:`dampid.identify` exploit.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, NumericalError, SingularParameterError

SINGULAR_MARGIN = 1e-9
_PROFILE_CHUNK = 2048


@dataclass(frozen=True)
class Interval:
    """Prior set ``Q``; either end may be infinite, open or closed."""

    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"empty prior interval ({self.lower}, {self.upper})")

    def contains(self, q: float) -> bool:
        lo_ok = q >= self.lower if self.lower_closed else q > self.lower
        hi_ok = q <= self.upper if self.upper_closed else q < self.upper
        return bool(lo_ok and hi_ok)

    def within(self, other: "Interval") -> bool:
        """True when every point of ``self`` lies in ``other``."""
        lo = self.lower > other.lower or (
            self.lower == other.lower and (other.lower_closed or not self.lower_closed)
        )
        hi = self.upper < other.upper or (
            self.upper == other.upper and (other.upper_closed or not self.upper_closed)
        )
        return lo and hi

    def sample(self, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Interior points: uniform on finite intervals, log-spread on infinite ones."""
        if rng is None:
            u = (np.arange(n) + 0.5) / n
        else:
            u = rng.uniform(0.0, 1.0, n)
        u = np.clip(u, 1e-6, 1 - 1e-6)
        lo, hi = self.lower, self.upper
        if math.isfinite(lo) and math.isfinite(hi):
            return lo + (hi - lo) * u
        if math.isfinite(lo):
            return lo + np.expm1(8.0 * u) / 50.0
        if math.isfinite(hi):
            return hi - np.expm1(8.0 * u) / 50.0
        return np.tan(np.pi * (u - 0.5)) * 5.0

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_closed": self.lower_closed,
            "upper_closed": self.upper_closed,
        }


@dataclass(frozen=True)
class GrowthMap:
    """The map ``q -> f(q)`` (common real part of the spectrum) and its inverse."""

    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    prior: Interval
    singular: Tuple[float, ...] = ()
    margin: float = SINGULAR_MARGIN

    def validate(self, q: float) -> float:
        q = float(q)
        for s in self.singular:
            if abs(q - s) <= self.margin * max(1.0, abs(s)):
                raise SingularParameterError(f"q={q} is at the singular value {s}")
        if not self.prior.contains(q):
            raise DomainError(f"q={q} outside prior set {self.prior}")
        return q

    def __call__(self, q: float) -> float:
        return float(self.forward(self.validate(q)))

    def image(self) -> Interval:
        """Range of ``forward`` over the prior set (``forward`` is monotone)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            a = float(self.forward(self.prior.lower))
            b = float(self.forward(self.prior.upper))
        a_closed, b_closed = self.prior.lower_closed, self.prior.upper_closed
        if a > b:
            a, b, a_closed, b_closed = b, a, b_closed, a_closed
        # an endpoint mapping to +-inf is never attained
        return Interval(a, b, a_closed and math.isfinite(a), b_closed and math.isfinite(b))

    def invert(self, f_hat: float) -> float:
        return float(self.inverse(f_hat))

    def check_monotone(self, samples: int = 1000) -> bool:
        q = self.prior.sample(samples)
        q = q[[all(abs(v - s) > 1e3 * self.margin for s in self.singular) for v in q]]
        fv = np.array([self.forward(v) for v in q])
        d = np.diff(fv)
        return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class EigenStructure:
    """Frequencies and observation coefficients over a finite index window."""

    L: float
    indices: np.ndarray
    mu: np.ndarray
    K: np.ndarray
    kappa: np.ndarray
    kappa_bounds: Tuple[float, float] = (0.0, math.inf)
    growth_rate: float = 0.0

    def __post_init__(self):
        if self.indices.size == 0:
            raise DomainError("empty index set")
        if self.indices.size > 1 and not np.all(np.diff(self.mu) > 0):
            raise DomainError("frequencies must be strictly increasing in n")
        kmin, kmax = self.kappa_bounds
        mod = np.abs(self.kappa)
        slack = 1e-12 * max(1.0, kmax if math.isfinite(kmax) else 1.0)
        if np.any(mod < kmin - slack) or np.any(mod > kmax + slack):
            raise DomainError("observation coefficient outside its declared bounds")

    @classmethod
    def from_frequencies(cls, L, mu, indices=None, kappa=None, growth_rate=0.0):
        """Build from arbitrary frequencies; ``K`` is the nearest integer of ``mu L / 2 pi``."""
        mu = np.asarray(mu, dtype=float)
        if indices is None:
            indices = np.arange(mu.size)
        if kappa is None:
            kappa = np.ones(mu.size, dtype=complex)
        K = np.rint(mu * L / (2 * np.pi)).astype(np.int64)
        return cls(L, np.asarray(indices), mu, K, np.asarray(kappa, dtype=complex),
                   growth_rate=growth_rate)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.growth_rate + 1j * self.mu


class GapReport(NamedTuple):
    max_integer_deviation: float
    min_gap: float


def check_gap_condition(eigen: EigenStructure) -> GapReport:
    """How far ``mu_n L / 2 pi`` is from integers, and the smallest frequency gap.

    Compare ``min_gap`` against ``2 pi / L``; both being satisfied makes the
    output an exact ``e^{f t}`` times ``L``-periodic signal.
    """
    if eigen.indices.size == 0:
        raise DomainError("empty index set")
    r = eigen.mu * eigen.L / (2 * np.pi)
    dev = float(np.max(np.abs(r - np.rint(r))))
    gap = float(np.min(np.diff(eigen.mu))) if eigen.mu.size > 1 else math.inf
    return GapReport(dev, gap)


@dataclass(frozen=True)
class ModalState:
    """Modal amplitudes ``a_n = <x0, psi_n>``; indices not listed are zero."""

    indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        c = np.asarray(self.coeffs, dtype=complex)
        if idx.shape != c.shape:
            raise ValueError("indices and coeffs must have the same shape")
        if not np.all(np.isfinite(c)):
            raise NumericalError("non-finite modal coefficient")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, indices) -> "ModalState":
        idx = np.asarray(indices, dtype=np.int64)
        return cls(idx, np.zeros(idx.size, dtype=complex))

    @classmethod
    def single(cls, indices, n: int, value: complex = 1.0) -> "ModalState":
        st = cls.zeros(indices)
        c = st.coeffs.copy()
        c[st.indices == n] = value
        return cls(st.indices, c)

    def coefficient(self, n: int) -> complex:
        hit = np.nonzero(self.indices == n)[0]
        return complex(self.coeffs[hit[0]]) if hit.size else 0j

    def on(self, indices) -> "ModalState":
        """Re-express on another index window (missing entries become zero)."""
        idx = np.asarray(indices, dtype=np.int64)
        lookup = dict(zip(self.indices.tolist(), self.coeffs))
        return ModalState(idx, np.array([lookup.get(int(n), 0j) for n in idx], dtype=complex))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def __sub__(self, other: "ModalState") -> "ModalState":
        idx = np.union1d(self.indices, other.indices)
        return ModalState(idx, self.on(idx).coeffs - other.on(idx).coeffs)


class SpectralModel(abc.ABC):
    """A PDE whose spectrum satisfies ``lambda_n = f(q) + i 2 pi K_n / L``.

    Concrete models provide the integer frequency labels ``K_n``, the
    observation coefficients ``kappa_n = C phi_n``, closed-form eigenfunctions
    and the projection of initial data onto the biorthogonal family.
    """

    name: str = "abstract"
    #: "Z" for windows [-N, N], "N" for windows [1, N]
    index_kind: str = "Z"
    #: number of state components (2 for (displacement, velocity), 1 otherwise)
    components: int = 2
    growth: GrowthMap
    L: float

    # -- spectrum ---------------------------------------------------------
    def indices(self, N: int) -> np.ndarray:
        if N < 0:
            raise ValueError("truncation must be non-negative")
        if self.index_kind == "Z":
            return np.arange(-N, N + 1, dtype=np.int64)
        return np.arange(1, N + 1, dtype=np.int64)

    @abc.abstractmethod
    def K(self, n) -> np.ndarray:
        """Integer labels with ``mu_n = 2 pi K_n / L``."""

    def mu(self, n) -> np.ndarray:
        return 2 * np.pi * np.asarray(self.K(n), dtype=float) / self.L

    def f(self, q: float) -> float:
        return self.growth(q)

    def eigenvalue(self, q: float, n) -> np.ndarray:
        return self.f(q) + 1j * self.mu(n)

    @abc.abstractmethod
    def kappa(self, q: float, n) -> np.ndarray:
        """Observation coefficients ``C phi_n``."""

    @abc.abstractmethod
    def kappa_bounds(self, q: float) -> Tuple[float, float]:
        """Uniform bounds ``kmin <= |kappa_n| <= kmax``."""

    def eigen(self, q: float, indices) -> EigenStructure:
        idx = np.asarray(indices, dtype=np.int64)
        return EigenStructure(
            L=self.L,
            indices=idx,
            mu=self.mu(idx),
            K=np.asarray(self.K(idx), dtype=np.int64),
            kappa=np.asarray(self.kappa(q, idx), dtype=complex),
            kappa_bounds=self.kappa_bounds(q),
            growth_rate=self.f(q),
        )

    # -- eigenfunctions ---------------------------------------------------
    @abc.abstractmethod
    def eigenfunction(self, q: float, n, x, energy: bool = False):
        """Evaluate ``Phi_n(x)`` on the outer grid ``x[:, None]`` x ``n[None, :]``.

        Returns a tuple with one array per state component.  With
        ``energy=True`` the components are those whose squared moduli add up
        to the state-space energy density (for H^1 x L^2 models the first
        component is differentiated).
        """

    @abc.abstractmethod
    def project(self, q: float, data, indices, n_points: int = 4097) -> ModalState:
        """``a_n = <x0, psi_n>`` in the state-space inner product."""

    def _check_x(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("spatial points must lie in [0, 1]")
        return x

    def exp_sums(self, q: float, K, weights, n_points: int):
        """``sum w_n exp(lambda_n x)`` and ``sum w_n exp(-lambda_n x)`` on a unit grid.

        ``weights`` is a list of coefficient arrays; returns ``None`` when the
        grid does not fit the period (the caller then falls back to direct sums).
        """
        from ._numerics import uniform_exp_sum

        x = np.linspace(0.0, 1.0, n_points)
        f = self.f(q)
        out = []
        for w in weights:
            plus = uniform_exp_sum(K, self.L, w, n_points, 1)
            if plus is None:
                return None
            minus = uniform_exp_sum(K, self.L, w, n_points, -1)
            out.append((np.exp(f * x) * plus, np.exp(-f * x) * minus))
        return out

    def _fast_profiles(self, q, state, x, energy):
        """Model hook for FFT synthesis on a unit grid; ``None`` means unsupported."""
        return None

    def profiles(self, q: float, state: ModalState, x, energy: bool = False):
        """Synthesize ``sum_n a_n phi_n(x)``; one array per state component."""
        x = self._check_x(x)
        from ._numerics import is_unit_grid

        if is_unit_grid(x) and state.indices.size > 64:
            fast = self._fast_profiles(q, state, x, energy)
            if fast is not None:
                return fast
        out = [np.zeros(x.size, dtype=complex) for _ in range(self.components)]
        for lo in range(0, x.size, _PROFILE_CHUNK):
            sl = slice(lo, lo + _PROFILE_CHUNK)
            parts = self.eigenfunction(q, state.indices, x[sl], energy=energy)
            for k, P in enumerate(parts):
                out[k][sl] = P @ state.coeffs
        return tuple(out)

    def state_norm(self, q: float, state: ModalState, n_points: int = 20001) -> float:
        """State-space norm of ``sum a_n Phi_n``, by Simpson on a uniform grid."""
        from ._numerics import composite_simpson

        x = np.linspace(0.0, 1.0, n_points)
        parts = self.profiles(q, state, x, energy=True)
        dens = sum(np.abs(p) ** 2 for p in parts)
        return float(np.sqrt(composite_simpson(dens, x[1] - x[0])))


def eigenvalue(model: SpectralModel, q: float, n) -> np.ndarray:
    """``f(q) + i mu_n``; raises for ``q`` outside the prior set or at a singular value."""
    out = model.eigenvalue(q, n)
    return out if np.ndim(n) else complex(out)


def as_index_array(n: Sequence[int] | int) -> np.ndarray:
    return np.atleast_1d(np.asarray(n, dtype=np.int64))

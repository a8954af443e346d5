"""Boundary outputs: exact modal sums, sampled grids and disturbed measurements.

A noise-free output is ``y(t) = sum_n c_n exp(lambda_n t)`` with
``c_n = a_n kappa_n`` and ``lambda_n = f + 2 pi i K_n / L``.  Window norms and
weighted integrals of such sums are evaluated in closed form.

Disturbed outputs keep the modal part exact and carry the disturbance as a
piecewise-linear record on a uniform grid ``t_j = j h`` with ``h = L / M``.
Because ``h`` divides the period, ``exp(i mu_n t_j)`` is ``M``-periodic in
``j`` and every cross integral between the record and the modes reduces to
one length-``M`` FFT.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy import signal as sps

from ._numerics import cis_frac, lag_autocorrelation, linear_cell_weights, phi1
from .core import ModalState, SpectralModel
from .errors import DomainError, NumericalError

EXP_LIMIT = 700.0
POINTS_PER_WINDOW = 2048
BOUND_SAMPLES = 100_000
# dense autocorrelation is used while the K-range stays below this
_DENSE_SPAN = 1 << 21
_ROW_CHUNK = 256
_SNAP = 1e-9


def _check_growth(f, t_max):
    if f * t_max > EXP_LIMIT:
        raise OverflowError(f"exp(f t) overflows: f*t = {f * t_max:.4g} > {EXP_LIMIT}")


# ---------------------------------------------------------------------------
# exact modal signals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModalSignal:
    """``y(t) = exp(f t) sum_n c_n exp(i mu_n t)``.

    ``K`` holds the integer labels ``mu_n L / 2 pi`` when the spectrum is
    commensurate with ``L``; phases are then reduced exactly.  ``K=None``
    means arbitrary real ``mu`` and plain floating-point phases.
    """

    f: float
    L: float
    c: np.ndarray
    K: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None
    q: Optional[float] = None
    model_name: str = ""

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=complex))
        object.__setattr__(self, "c", c)
        if self.K is not None:
            K = np.atleast_1d(np.asarray(self.K, dtype=np.int64))
            if K.shape != c.shape:
                raise ValueError("K and c must have the same shape")
            object.__setattr__(self, "K", K)
            object.__setattr__(self, "mu", 2 * np.pi * K / self.L)
        elif self.mu is None:
            raise ValueError("either K or mu is required")
        else:
            mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
            if mu.shape != c.shape:
                raise ValueError("mu and c must have the same shape")
            object.__setattr__(self, "mu", mu)
        if not np.all(np.isfinite(c)):
            raise NumericalError("non-finite modal amplitude")

    @classmethod
    def from_state(cls, model: SpectralModel, q: float, state: ModalState) -> "ModalSignal":
        kappa = np.asarray(model.kappa(q, state.indices), dtype=complex)
        return cls(
            f=model.f(q),
            L=model.L,
            c=state.coeffs * kappa,
            K=model.K(state.indices),
            q=float(q),
            model_name=model.name,
        )

    @classmethod
    def from_frequencies(cls, mu, c, f=0.0, L=1.0) -> "ModalSignal":
        return cls(f=float(f), L=float(L), c=c, mu=mu)

    @property
    def exact_phase(self) -> bool:
        return self.K is not None

    def _phase(self, t):
        """``exp(i mu_n t)`` on the outer grid ``t[:, None]`` x ``n[None, :]``."""
        t = np.asarray(t, dtype=float)[:, None]
        if self.exact_phase:
            return cis_frac(self.K[None, :], t / self.L)
        return np.exp(1j * self.mu[None, :] * t)

    def __call__(self, t):
        return synthesize(self, t)

    def scaled(self, factor: complex) -> "ModalSignal":
        return ModalSignal(self.f, self.L, self.c * factor, K=self.K,
                           mu=None if self.exact_phase else self.mu, q=self.q,
                           model_name=self.model_name)

    def periodic_part(self, t):
        """``P_L(t) = exp(-f t) y(t)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.size, dtype=complex)
        for lo in range(0, t.size, _ROW_CHUNK):
            sl = slice(lo, lo + _ROW_CHUNK)
            out[sl] = self._phase(t[sl]) @ self.c
        return out


def synthesize(sig: ModalSignal, t):
    """Evaluate the modal sum at ``t`` (scalar or array)."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(t)):
        raise DomainError("time must be finite")
    _check_growth(sig.f, float(np.max(t)) if t.size else 0.0)
    out = np.exp(sig.f * t) * sig.periodic_part(t)
    return complex(out[0]) if scalar else out


def _exp_window(rate, k, L, a, b):
    """``int_a^b exp((rate + 2 pi i k / L) t) dt`` with exactly reduced phases.

    ``k`` is integer, ``rate`` real; all arguments broadcast.
    """
    k = np.asarray(k, dtype=np.int64)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rate = np.asarray(rate, dtype=float)
    z = rate + 2j * np.pi * k / L
    d = b - a
    zd = z * d
    Ea = np.exp(rate * a) * cis_frac(k, a / L)
    small = np.abs(zd) < 0.5
    out = np.where(small, Ea * d * phi1(np.where(small, zd, 0.0)), 0j)
    if np.any(~small):
        Eb = np.exp(rate * b) * cis_frac(k, b / L)
        zs = np.where(small, 1.0, z)
        out = np.where(small, out, (Eb - Ea) / zs)
    return out


def _float_window(z, a, b):
    """``int_a^b exp(z t) dt`` for arbitrary complex ``z`` (broadcasts)."""
    z = np.asarray(z, dtype=complex)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.exp(z * a) * (b - a) * phi1(z * (b - a))


def _sq_norms_arith(sig, a, b):
    lags, S = lag_autocorrelation(sig.K, sig.c)
    out = np.empty(a.size)
    for i in range(a.size):
        J = _exp_window(2 * sig.f, lags, sig.L, a[i], b[i])
        out[i] = float(np.real(np.sum(S * J)))
    return out


def _sq_norms_cauchy(sig, a, b):
    """Double sum through ``exp(z b) - exp(z a)`` over ``z_mn = 2f + i(mu_m - mu_n)``.

    Off-diagonal terms factor as ``w_m(t) G_mn conj(w_n(t))`` with
    ``w = c exp(i mu t)`` and a window-independent ``G``, so all window
    endpoints share one matrix product.
    """
    f = sig.f
    ends, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    W = (sig._phase(ends) * sig.c[None, :]).T  # modes x endpoints
    Wc = np.conj(W)
    V = np.zeros(ends.size, dtype=complex)
    n = sig.c.size
    for lo in range(0, n, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, n)
        if sig.exact_phase:
            dK = sig.K[lo:hi, None] - sig.K[None, :]
            denom = 2 * f + 2j * np.pi * dK / sig.L
        else:
            denom = 2 * f + 1j * (sig.mu[lo:hi, None] - sig.mu[None, :])
        rows = np.arange(lo, hi)
        denom[rows - lo, rows] = 1.0
        G = 1.0 / denom
        G[rows - lo, rows] = 0.0
        V += np.sum(W[lo:hi] * (G @ Wc), axis=0)
    V = V * np.exp(2 * f * ends)
    Va, Vb = V[inv[: a.size]], V[inv[a.size:]]
    diag = float(np.sum(np.abs(sig.c) ** 2)) * _float_window(2 * f, a, b)
    return np.real(diag + Vb - Va)


def window_sq_norms(sig: ModalSignal, a, b) -> np.ndarray:
    """``int_a^b |y|^2`` for arrays of windows (exact engine)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape or np.any(b <= a):
        raise DomainError("windows need a < b")
    # the squared norm carries exp(2 f t)
    _check_growth(2 * sig.f, float(np.max(b)))
    if sig.c.size == 0 or not np.any(sig.c):
        return np.zeros(a.size)
    if sig.exact_phase and int(sig.K.max()) - int(sig.K.min()) < _DENSE_SPAN:
        out = _sq_norms_arith(sig, a, b)
    else:
        out = _sq_norms_cauchy(sig, a, b)
    return np.maximum(out, 0.0)


def modal_weighted_integrals(sig: ModalSignal, rate: float, Kn, a: float, b: float) -> np.ndarray:
    """``int_a^b y(t) exp(-(rate + 2 pi i K_n / L) t) dt`` for every ``K_n`` (exact phases)."""
    Kn = np.atleast_1d(np.asarray(Kn, dtype=np.int64))
    k0 = int(sig.K.min())
    span = int(sig.K.max()) - k0 + 1
    if span + int(Kn.max()) - int(Kn.min()) < _DENSE_SPAN and Kn.size > 16:
        # the kernel depends on K_m - K_n only: one FFT correlation
        kmin = k0 - int(Kn.max())
        g = _exp_window(sig.f - rate, np.arange(kmin, int(sig.K.max()) - int(Kn.min()) + 1),
                        sig.L, a, b)
        dense = np.zeros(span, dtype=complex)
        np.add.at(dense, sig.K - k0, sig.c)
        conv = sps.fftconvolve(g, dense[::-1])
        return conv[k0 - Kn - kmin + span - 1]
    out = np.empty(Kn.size, dtype=complex)
    for lo in range(0, Kn.size, _ROW_CHUNK):
        sl = slice(lo, lo + _ROW_CHUNK)
        J = _exp_window(sig.f - rate, sig.K[None, :] - Kn[sl, None], sig.L, a, b)
        out[sl] = J @ sig.c
    return out


def _integer_label(lam, L):
    k = lam.imag * L / (2 * np.pi)
    kr = np.rint(k)
    if np.all(np.abs(k - kr) <= 1e-9 * np.maximum(1.0, np.abs(k))):
        return kr.astype(np.int64)
    return None


def _modal_weighted(sig: ModalSignal, lam, a, b):
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if sig.exact_phase and np.all(lam.real == lam.real[0]):
        K = _integer_label(lam, sig.L)
        if K is not None:
            return modal_weighted_integrals(sig, float(lam.real[0]), K, a, b)
    out = np.empty(lam.size, dtype=complex)
    for lo in range(0, lam.size, _ROW_CHUNK):
        sl = slice(lo, lo + _ROW_CHUNK)
        z = sig.f + 1j * sig.mu[None, :] - lam[sl, None]
        out[sl] = _float_window(z, a, b) @ sig.c
    return out


# ---------------------------------------------------------------------------
# disturbances
# ---------------------------------------------------------------------------


def _wave_example(t):
    return 2.0 * np.sin(1.0 / (1.0 + t)) + 3.0 * np.cos(10.0 * t)


def _schrodinger_example(t):
    return 2.0 * np.sin(t / (10.0 + t)) + 3j * np.cos(20.0 * t)


def _strings_example(t):
    return np.sin(t**2 / (10.0 + t)) + np.cos(10.0 * t)


# closed-form sup bounds over t >= 0
_EXAMPLES: Dict[str, tuple] = {
    "wave_example": (_wave_example, 2.0 * math.sin(1.0) + 3.0),
    "schrodinger_example": (_schrodinger_example, math.sqrt(4.0 * math.sin(1.0) ** 2 + 9.0)),
    "strings_example": (_strings_example, 2.0),
}

_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "abs", "pi")
}

KINDS = ("none", "constant", "wave_example", "schrodinger_example", "strings_example",
         "custom", "multiplicative_noise")


@dataclass(frozen=True)
class DisturbanceSpec:
    """What corrupts the measurement.

    ``custom`` takes either a Python callable ``func`` or a numpy expression
    in ``t`` (``expr``, e.g. ``"sin(t) + 0.5j*cos(3*t)"``).
    ``multiplicative_noise`` multiplies each grid sample by ``1 + level*xi``
    with ``xi`` uniform on ``[-1, 1]``.
    """

    kind: str = "none"
    level: float = 0.0
    seed: Optional[int] = None
    value: complex = 0.0
    expr: Optional[str] = None
    func: Optional[Callable] = field(default=None, compare=False)
    M: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}; known: {KINDS}")
        if self.kind == "multiplicative_noise" and self.seed is None:
            raise ValueError("multiplicative noise needs a seed")
        if self.kind == "custom" and self.func is None and not self.expr:
            raise ValueError("custom disturbance needs func or expr")

    # -- constructors --------------------------------------------------------
    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def constant(cls, value):
        return cls("constant", value=complex(value))

    @classmethod
    def example(cls, system: str):
        return cls(f"{system}_example")

    @classmethod
    def noise(cls, level, seed):
        return cls("multiplicative_noise", level=float(level), seed=int(seed))

    @property
    def deterministic(self) -> bool:
        return self.kind != "multiplicative_noise"

    @property
    def is_zero(self) -> bool:
        return (self.kind == "none" or (self.kind == "constant" and self.value == 0)
                or (self.kind == "multiplicative_noise" and self.level == 0))

    def __call__(self, t):
        """Value of a deterministic disturbance at ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "none":
            return np.zeros(t.shape, dtype=complex)
        if self.kind == "constant":
            return np.full(t.shape, self.value, dtype=complex)
        if self.kind in _EXAMPLES:
            return np.asarray(_EXAMPLES[self.kind][0](t), dtype=complex)
        if self.kind == "custom":
            if self.func is not None:
                v = self.func(t)
            else:
                v = eval(self.expr, {"__builtins__": {}}, dict(_EXPR_NAMES, t=t, np=np))
            return np.asarray(v, dtype=complex) * np.ones(t.shape)
        raise DomainError("multiplicative noise depends on the signal; use disturb()")

    def bound(self, horizon: float, clean: Optional[np.ndarray] = None) -> float:
        """Sup bound ``M``: supplied, closed form, or dense-sample estimate."""
        if self.M is not None:
            return float(self.M)
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind in _EXAMPLES:
            return _EXAMPLES[self.kind][1]
        if self.kind == "multiplicative_noise":
            if clean is None:
                raise DomainError("noise bound needs the clean samples")
            return self.level * float(np.max(np.abs(clean), initial=0.0))
        t = np.linspace(0.0, horizon, BOUND_SAMPLES)
        return float(np.max(np.abs(self(t))))

    def check_bound(self, horizon: float) -> bool:
        """``|d| <= M`` on a dense sample of ``[0, horizon]``."""
        if not self.deterministic:
            return True
        t = np.linspace(0.0, horizon, BOUND_SAMPLES)
        return bool(np.max(np.abs(self(t))) <= self.bound(horizon) * (1 + 1e-12))

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "multiplicative_noise":
            d.update(level=self.level, seed=self.seed)
        if self.kind == "constant":
            d.update(value=[self.value.real, self.value.imag])
        if self.kind == "custom":
            if self.expr is None:
                raise ValueError("callable disturbances cannot be serialized")
            d.update(expr=self.expr)
        if self.M is not None:
            d.update(M=self.M)
        return d

    @classmethod
    def from_dict(cls, d) -> "DisturbanceSpec":
        d = dict(d)
        if "value" in d:
            v = d["value"]
            d["value"] = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        return cls(**d)


def noise_draws(seed: int, size: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size)


# ---------------------------------------------------------------------------
# sampled signals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSignal:
    """Uniform samples ``y(t_start + k dt)``, ``k = 0..n-1``."""

    t_start: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        s = np.atleast_1d(np.asarray(self.samples, dtype=complex))
        if s.size < 2:
            raise DomainError("a grid signal needs at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def t_end(self) -> float:
        return self.t_start + (self.samples.size - 1) * self.dt

    @property
    def t(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.samples.size)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.samples
        return np.interp(t, self.t, s.real) + 1j * np.interp(t, self.t, s.imag)

    def _restrict(self, a, b):
        """Nodes of ``[a, b]`` with linearly interpolated end values."""
        tol = _SNAP * self.dt
        if a < self.t_start - tol or b > self.t_end + tol or not b > a:
            raise DomainError(f"window ({a}, {b}) outside grid [{self.t_start}, {self.t_end}]")
        a, b = max(a, self.t_start), min(b, self.t_end)
        u = (np.array([a, b]) - self.t_start) / self.dt
        ia = int(math.ceil(u[0] - _SNAP))
        ib = int(math.floor(u[1] + _SNAP))
        t = self.t[ia: ib + 1]
        y = self.samples[ia: ib + 1]
        if t.size == 0 or t[0] - a > tol:
            t = np.concatenate([[a], t])
            y = np.concatenate([self([a]), y])
        if b - t[-1] > tol:
            t = np.concatenate([t, [b]])
            y = np.concatenate([y, self([b])])
        return t, y

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re", "im"])
            for tk, yk in zip(self.t, self.samples):
                w.writerow([f"{tk:.17g}", f"{yk.real:.17g}", f"{yk.imag:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "GridSignal":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = data[:, 0]
        dt = np.diff(t)
        if t.size < 2 or np.any(dt <= 0):
            raise DomainError("time column must be strictly increasing")
        h = (t[-1] - t[0]) / (t.size - 1)
        if np.max(np.abs(dt - h)) > 1e-9 * max(h, 1.0):
            raise DomainError("signal CSV must be uniformly sampled")
        return cls(float(t[0]), float(h), data[:, 1] + 1j * data[:, 2])


def grid_nodes(sig: ModalSignal, h_steps: int, n_nodes: int) -> np.ndarray:
    """Exact ``y(j L / M)`` for ``j = 0..n_nodes-1`` with ``M = h_steps``.

    Bucketing ``K_n mod M`` and one inverse FFT; valid for any truncation.
    """
    M = int(h_steps)
    h = sig.L / M
    _check_growth(sig.f, h * (n_nodes - 1))
    if not sig.exact_phase:
        t = h * np.arange(n_nodes)
        return synthesize(sig, t)
    periodic = _periodic_synthesis(sig.K, sig.c, M)
    j = np.arange(n_nodes)
    return np.exp(sig.f * h * j) * periodic[j % M]


def _periodic_synthesis(K, weights, M):
    """``sum_n w_n exp(2 pi i K_n j / M)`` for ``j = 0..M-1``."""
    buckets = np.zeros(M, dtype=complex)
    np.add.at(buckets, np.mod(K, M), weights)
    return np.fft.ifft(buckets) * M


def steps_per_period(L: float, window: float, points: int = POINTS_PER_WINDOW) -> int:
    """Grid resolution ``M`` with ``h = L / M <= min(L, window) / points``."""
    return int(math.ceil(L / (min(L, window) / points) - 1e-9))


def sample_grid(sig: ModalSignal, t_end: float, M: int) -> GridSignal:
    h = sig.L / M
    n = int(math.floor(t_end / h + _SNAP)) + 1
    if (n - 1) * h < t_end - _SNAP * h:
        n += 1
    return GridSignal(0.0, h, grid_nodes(sig, M, n))


def apply_disturbance(sig: GridSignal, spec: DisturbanceSpec) -> GridSignal:
    """Add ``d(t_k)``, or multiply by ``1 + level xi_k`` for seeded noise."""
    if spec.kind == "none":
        return sig
    if spec.kind == "multiplicative_noise":
        xi = noise_draws(spec.seed, sig.samples.size)
        return GridSignal(sig.t_start, sig.dt, sig.samples * (1.0 + spec.level * xi))
    return GridSignal(sig.t_start, sig.dt, sig.samples + spec(sig.t))


# ---------------------------------------------------------------------------
# exact modal part plus a piecewise-linear disturbance record
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DisturbedSignal:
    """``y = y_e + d`` with ``d`` linear between the nodes ``t_j = j L / M``."""

    clean: ModalSignal
    M: int
    record: np.ndarray
    spec: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    bound_M: float = 0.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def h(self) -> float:
        return self.clean.L / self.M

    @property
    def t_end(self) -> float:
        return (self.record.size - 1) * self.h

    @property
    def L(self):
        return self.clean.L

    @property
    def f(self):
        return self.clean.f

    def disturbance(self, t):
        t = np.asarray(t, dtype=float)
        nodes = self.h * np.arange(self.record.size)
        d = self.record
        return np.interp(t, nodes, d.real) + 1j * np.interp(t, nodes, d.imag)

    def __call__(self, t):
        return synthesize(self.clean, t) + self.disturbance(t)

    def to_grid(self) -> GridSignal:
        clean = grid_nodes(self.clean, self.M, self.record.size)
        return GridSignal(0.0, self.h, clean + self.record)

    # -- prefix sums over full cells -----------------------------------------
    def _prefix(self):
        if "prefix" in self._cache:
            return self._cache["prefix"]
        sig, M, h = self.clean, self.M, self.h
        d = self.record
        ncell = d.size - 1
        j = np.arange(ncell)
        if sig.exact_phase:
            lam_h = (sig.f + 1j * sig.mu) * h
            EA, EB = linear_cell_weights(lam_h)
            A = _periodic_synthesis(sig.K, sig.c * EA, M)[j % M]
            B = _periodic_synthesis(sig.K, sig.c * EB, M)[j % M]
            cell = h * np.exp(sig.f * h * j) * (A * np.conj(d[:-1]) + B * np.conj(d[1:]))
        else:
            cell = np.array([self._partial_cross(k * h, (k + 1) * h) for k in j], dtype=complex)
        sq = h / 3.0 * (np.abs(d[:-1]) ** 2 + np.real(d[:-1] * np.conj(d[1:])) + np.abs(d[1:]) ** 2)
        out = (np.concatenate([[0j], np.cumsum(cell)]), np.concatenate([[0.0], np.cumsum(sq)]))
        self._cache["prefix"] = out
        return out

    def _partial_cross(self, s, e):
        """``int_s^e y_e conj(d)`` inside a single cell."""
        sig = self.clean
        p, r = np.conj(self.disturbance(np.array([s, e])))
        lam = sig.f + 1j * sig.mu
        EA, EB = linear_cell_weights(lam * (e - s))
        ph = sig._phase(np.array([s]))[0]
        return (e - s) * np.exp(sig.f * s) * np.sum(sig.c * ph * (p * EA + r * EB))

    def _partial_sq(self, s, e):
        p, r = self.disturbance(np.array([s, e]))
        return (e - s) / 3.0 * (abs(p) ** 2 + (p * np.conj(r)).real + abs(r) ** 2)

    def _split(self, a, b):
        """Full-cell node range plus the partial pieces of ``[a, b]``."""
        tol = _SNAP
        if a < -tol * self.h or b > self.t_end + tol * self.h or not b > a:
            raise DomainError(f"window ({a}, {b}) outside record [0, {self.t_end}]")
        ua, ub = a / self.h, b / self.h
        ja = int(math.ceil(ua - tol)) if abs(ua - round(ua)) > tol else int(round(ua))
        jb = int(math.floor(ub + tol)) if abs(ub - round(ub)) > tol else int(round(ub))
        pieces = []
        if jb < ja:  # inside one cell
            return ja, ja, [(a, b)]
        if ja * self.h - a > tol * self.h:
            pieces.append((a, ja * self.h))
        if b - jb * self.h > tol * self.h:
            pieces.append((jb * self.h, b))
        return ja, jb, pieces

    def disturbance_parts(self, a, b):
        """``(int y_e conj(d), int |d|^2)`` over ``[a, b]``."""
        cross_cum, sq_cum = self._prefix()
        ja, jb, pieces = self._split(a, b)
        cross = cross_cum[jb] - cross_cum[ja]
        sq = sq_cum[jb] - sq_cum[ja]
        for s, e in pieces:
            cross += self._partial_cross(s, e)
            sq += self._partial_sq(s, e)
        return complex(cross), float(sq)

    def record_weighted(self, lam, a, b):
        """``int_a^b d(t) exp(-lambda t) dt`` for an array of ``lambda``."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        ja, jb, pieces = self._split(a, b)
        h = self.h
        out = np.zeros(lam.size, dtype=complex)
        K = None
        if self.clean.exact_phase and np.all(lam.real == lam.real[0]):
            K = _integer_label(lam, self.L)
        if jb > ja and K is not None:
            # exp(-2 pi i K j / M) is M-periodic in j: fold and take one FFT
            rate = float(lam.real[0])
            j = np.arange(ja, jb)
            damp = np.exp(-rate * h * j)
            u = np.zeros(self.M, dtype=complex)
            v = np.zeros(self.M, dtype=complex)
            np.add.at(u, j % self.M, damp * self.record[ja:jb])
            np.add.at(v, j % self.M, damp * self.record[ja + 1: jb + 1])
            U, V = np.fft.fft(u), np.fft.fft(v)
            EA, EB = linear_cell_weights(-lam * h)
            r = np.mod(K, self.M)
            out += h * (EA * U[r] + EB * V[r])
        elif jb > ja:
            j = np.arange(ja, jb)
            tj = h * j
            d0, d1 = self.record[ja:jb], self.record[ja + 1: jb + 1]
            EA, EB = linear_cell_weights(-lam * h)
            for lo in range(0, lam.size, _ROW_CHUNK):
                sl = slice(lo, lo + _ROW_CHUNK)
                E = np.exp(-np.outer(lam[sl], tj))
                out[sl] = h * (EA[sl] * (E @ d0) + EB[sl] * (E @ d1))
        for s, e in pieces:
            p, r = self.disturbance(np.array([s, e]))
            EA, EB = linear_cell_weights(-lam * (e - s))
            out += (e - s) * np.exp(-lam * s) * (p * EA + r * EB)
        return out


def disturb(sig: ModalSignal, spec: DisturbanceSpec, horizon: float, M: int) -> DisturbedSignal:
    """Attach a disturbance record on ``[0, horizon]`` with ``h = L / M``."""
    h = sig.L / M
    n = int(math.ceil(horizon / h - _SNAP)) + 1
    t = h * np.arange(n)
    if spec.kind == "multiplicative_noise":
        clean = grid_nodes(sig, M, n)
        record = spec.level * noise_draws(spec.seed, n) * clean
        bound = spec.bound(horizon, clean)
    else:
        record = np.asarray(spec(t), dtype=complex)
        bound = spec.bound(horizon)
    if not np.all(np.isfinite(record)):
        raise NumericalError("disturbance is not finite on the horizon")
    return DisturbedSignal(sig, int(M), record, spec, bound)


# ---------------------------------------------------------------------------
# engine-independent entry points
# ---------------------------------------------------------------------------


def window_sq_norm_many(sig, a, b) -> np.ndarray:
    """Squared window norms ``int_a^b |y|^2`` for arrays of windows."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if isinstance(sig, ModalSignal):
        return window_sq_norms(sig, a, b)
    if isinstance(sig, DisturbedSignal):
        base = window_sq_norms(sig.clean, a, b)
        out = np.empty(a.size)
        for i in range(a.size):
            cross, sq = sig.disturbance_parts(a[i], b[i])
            out[i] = base[i] + 2.0 * cross.real + sq
        return np.maximum(out, 0.0)
    if isinstance(sig, GridSignal):
        out = np.empty(a.size)
        for i in range(a.size):
            t, y = sig._restrict(a[i], b[i])
            out[i] = _simpson(np.abs(y) ** 2, t).real
        return np.maximum(out, 0.0)
    raise TypeError(f"not a signal: {type(sig).__name__}")


def _simpson(y, t):
    if t.size == 2:
        return 0.5 * (t[1] - t[0]) * (y[0] + y[1])
    return integrate.simpson(y, x=t)


def window_l2_norm(sig, a: float, b: float) -> float:
    """``sqrt(int_a^b |y(t)|^2 dt)``."""
    return float(np.sqrt(window_sq_norm_many(sig, [a], [b])[0]))


def window_l2_norms(sig, a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    return np.sqrt(window_sq_norm_many(sig, a, b))


def weighted_exponential_integral(sig, lam, a: float, b: float):
    """``int_a^b y(t) exp(-lambda t) dt``; ``lam`` may be an array."""
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if not b > a:
        raise DomainError("window needs a < b")
    if isinstance(sig, ModalSignal):
        _check_growth(sig.f, b)
        out = _modal_weighted(sig, lam, a, b)
    elif isinstance(sig, DisturbedSignal):
        _check_growth(sig.f, b)
        out = _modal_weighted(sig.clean, lam, a, b) + sig.record_weighted(lam, a, b)
    elif isinstance(sig, GridSignal):
        t, y = sig._restrict(a, b)
        out = np.empty(lam.size, dtype=complex)
        for lo in range(0, lam.size, _ROW_CHUNK):
            sl = slice(lo, lo + _ROW_CHUNK)
            out[sl] = _simpson(y[None, :] * np.exp(-np.outer(lam[sl], t)), t)
    else:
        raise TypeError(f"not a signal: {type(sig).__name__}")
    return complex(out[0]) if scalar else out


def signal_domain(sig):
    """``(t_start, t_end)``; modal signals are defined everywhere."""
    if isinstance(sig, GridSignal):
        return sig.t_start, sig.t_end
    if isinstance(sig, DisturbedSignal):
        return 0.0, sig.t_end
    return -math.inf, math.inf

"""Coefficient and initial-state identification from one boundary output.

The output of a model with spectrum ``f(q) + 2 pi i K_n / L`` is
``exp(f t)`` times an ``L``-periodic function, so the L2 norms over two
windows shifted by ``L`` differ by exactly ``exp(f L)``.  That ratio gives
``f`` and hence ``q``; the modal integrals over one period then give the
initial state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import signal as sg
from ._numerics import composite_simpson
from .core import EigenStructure, ModalState, SpectralModel
from .errors import (
    BoundUnavailable,
    CoefficientDegeneracyError,
    DampidError,
    DomainError,
    GapWindowError,
    PriorSetError,
    ZeroSignalError,
)

ZERO_RATIO = 1e-13
INGHAM_SLACK = 1e-10
_TOL = 1e-12


@dataclass(frozen=True)
class WindowSpec:
    """Near window ``(T1, T2)``; the far window is the same shifted back by ``L``."""

    T1: float
    T2: float

    def __post_init__(self):
        if not (math.isfinite(self.T1) and math.isfinite(self.T2)):
            raise DomainError("window ends must be finite")
        if self.T1 <= 0:
            raise DomainError("T1 must be positive")
        if self.T2 <= self.T1:
            raise DomainError("T2 must exceed T1")

    @property
    def length(self) -> float:
        return self.T2 - self.T1

    def far(self, L: float):
        return self.T1 - L, self.T2 - L

    def check(self, L: float):
        # only T1 >= L is enforced; T2 - T1 may be shorter than L
        if self.T1 < L * (1 - _TOL):
            raise DomainError(f"T1={self.T1} must be at least L={L}")

    def strict(self, L: float) -> bool:
        """Whether ``L < T1 < T2 - L`` holds (the unrelaxed condition)."""
        return L < self.T1 < self.T2 - L


@dataclass
class EstimationReport:
    q_hat: float
    f_hat: float
    norm_near: float
    norm_far: float
    window: WindowSpec
    L: float
    M: Optional[float] = None
    epsilon: Optional[float] = None
    snr: Optional[float] = None
    f_error_bound: Optional[float] = None
    state: Optional[ModalState] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self):
        d = {
            "q_hat": self.q_hat,
            "f_hat": self.f_hat,
            "norm_near": self.norm_near,
            "norm_far": self.norm_far,
            "T1": self.window.T1,
            "T2": self.window.T2,
            "L": self.L,
            "M": self.M,
            "epsilon": self.epsilon,
            "snr": _json_float(self.snr),
            "f_error_bound": self.f_error_bound,
            "warnings": list(self.warnings),
        }
        if self.state is not None:
            d["state"] = {
                "indices": self.state.indices.tolist(),
                "re": self.state.coeffs.real.tolist(),
                "im": self.state.coeffs.imag.tolist(),
            }
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _json_float(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf"
    return v


def _check_domain(y, a, b):
    lo, hi = sg.signal_domain(y)
    if a < lo - 1e-9 or b > hi + 1e-9:
        raise DomainError(f"window ({a}, {b}) outside the signal domain [{lo}, {hi}]")


def _finish(model, window, near, far, M):
    """Turn two window norms into a report; raises on degenerate input."""
    L = model.L
    if far <= 0 or far < ZERO_RATIO * near or near <= 0:
        raise ZeroSignalError("the output vanishes on the window; it carries no information")
    f_hat = math.log(near / far) / L
    if not model.growth.image().contains(f_hat):
        raise PriorSetError(f"f_hat={f_hat} is outside f(Q)", f_hat)
    rep = EstimationReport(
        q_hat=model.growth.invert(f_hat), f_hat=f_hat, norm_near=near, norm_far=far,
        window=window, L=L, M=M,
    )
    if not window.strict(L):
        rep.warnings.append("relaxed window: L < T1 < T2 - L does not hold")
    if M is not None:
        rep.epsilon, rep.snr = epsilon_snr(M, window, far)
        try:
            rep.f_error_bound = error_bound_f(M, window, far, L)
        except BoundUnavailable as exc:
            rep.warnings.append(str(exc))
    return rep


def estimate_q(y, model: SpectralModel, window: WindowSpec, M: Optional[float] = None,
               ) -> EstimationReport:
    """``q_hat = f^{-1}(ln(||y||_(T1,T2) / ||y||_(T1-L,T2-L)) / L)``.

    ``M`` is the sup bound of the disturbance when known; the report then
    carries ``epsilon`` and the bound on ``|f_hat - f(q)|``.
    """
    L = model.L
    window.check(L)
    a, b = window.far(L)
    _check_domain(y, a, window.T2)
    norms = sg.window_l2_norms(y, [window.T1, a], [window.T2, b])
    return _finish(model, window, float(norms[0]), float(norms[1]), M)


@dataclass
class SweepPoint:
    window: WindowSpec
    report: Optional[EstimationReport]
    norm_near: float
    norm_far: float
    f_hat: float = math.nan
    error: str = ""

    @property
    def q_hat(self) -> float:
        return self.report.q_hat if self.report else math.nan


def estimate_sweep(y, model: SpectralModel, windows: Sequence[WindowSpec],
                   M: Optional[float] = None) -> List[SweepPoint]:
    """``estimate_q`` over many windows with batched norms.

    Estimator failures are recorded on the point instead of raised.
    """
    L = model.L
    windows = list(windows)
    if not windows:
        return []
    for w in windows:
        w.check(L)
        _check_domain(y, w.T1 - L, w.T2)
    a = [w.T1 for w in windows] + [w.T1 - L for w in windows]
    b = [w.T2 for w in windows] + [w.T2 - L for w in windows]
    norms = sg.window_l2_norms(y, a, b)
    n = len(windows)
    out = []
    for i, w in enumerate(windows):
        near, far = float(norms[i]), float(norms[n + i])
        pt = SweepPoint(w, None, near, far)
        try:
            pt.report = _finish(model, w, near, far, M)
            pt.f_hat = pt.report.f_hat
        except PriorSetError as exc:
            pt.f_hat, pt.error = exc.f_hat, str(exc)
        except DampidError as exc:
            pt.error = str(exc)
        out.append(pt)
    return out


# -- reconstruction ----------------------------------------------------------


@dataclass
class Reconstruction:
    model: SpectralModel
    q: float
    T1: float
    state: ModalState

    def profiles(self, x, energy=False):
        return self.model.profiles(self.q, self.state, x, energy=energy)

    def to_csv(self, path, n_points: int = 101):
        x = np.linspace(0.0, 1.0, n_points)
        write_profile_csv(path, x, self.profiles(x))


def write_profile_csv(path, x, parts):
    names = ["x", "re_u0", "im_u0"] + (["re_u1", "im_u1"] if len(parts) > 1 else [])
    cols = [np.asarray(x, dtype=float)]
    for p in parts:
        cols += [p.real, p.imag]
    data = np.column_stack(cols)
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def reconstruct_initial(y, model: SpectralModel, q_hat: float, T1: float, indices,
                        ) -> Reconstruction:
    """``a_n = (1 / (L kappa_n)) int_{T1}^{T1+L} y(t) exp(-lambda_n t) dt``.

    ``lambda_n`` and ``kappa_n`` are evaluated at ``q_hat``.  For ``T1 > 0``
    the result approximates ``x(T1)`` pulled back to time zero.
    """
    L = model.L
    idx = np.asarray(indices, dtype=np.int64)
    _check_domain(y, T1, T1 + L)
    # checked before the eigenstructure, whose own validation is stricter
    kmin = model.kappa_bounds(q_hat)[0]
    if np.any(np.abs(model.kappa(q_hat, idx)) < kmin / 2):
        raise CoefficientDegeneracyError("observation coefficient below half its lower bound")
    eig = model.eigen(q_hat, idx)
    integrals = sg.weighted_exponential_integral(y, eig.eigenvalues, T1, T1 + L)
    coeffs = np.atleast_1d(integrals) / (L * eig.kappa)
    return Reconstruction(model, float(q_hat), float(T1), ModalState(idx, coeffs))


# -- error metrics -----------------------------------------------------------


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def profile_errors(model: SpectralModel, q: float, state: ModalState, data, n_points: int = 101,
                   rule: str = "trapezoid"):
    """L2 distances between synthesized and true profiles on a uniform grid.

    ``rule="trapezoid"`` on 101 points is the coarse table metric; use
    ``rule="simpson"`` with many points for the continuous norm.
    """
    x = np.linspace(0.0, 1.0, n_points)
    parts = model.profiles(q, state, x)
    u0, _, u1 = data.samples(x)
    truth = [u0] + ([u1] if len(parts) > 1 else [])
    out = {}
    for name, p, t in zip(("u0", "u1"), parts, truth):
        dens = np.abs(p - t) ** 2
        if rule == "trapezoid":
            val = _trapezoid(dens, x)
        elif rule == "simpson":
            val = float(composite_simpson(dens, x[1] - x[0]))
        else:
            raise ValueError(f"unknown rule {rule!r}")
        out[name] = math.sqrt(max(val, 0.0))
    return out


def state_error(model: SpectralModel, q: float, estimate: ModalState, reference: ModalState,
                n_points: int = 20001) -> float:
    """State-space norm of ``sum (a_hat_n - a_n) Phi_n``."""
    return model.state_norm(q, estimate - reference, n_points=n_points)


# -- error bounds ------------------------------------------------------------


def error_bound_f(M: float, window: WindowSpec, norm_far: float, L: float) -> float:
    """``(4/L) M sqrt(T2-T1) / (||y||_far - M sqrt(T2-T1))``."""
    e = M * math.sqrt(window.length)
    den = norm_far - e
    if M == 0:
        return 0.0
    if den <= 0:
        raise BoundUnavailable("disturbance energy reaches the far-window norm; no bound")
    return 4.0 / L * e / den


def epsilon_snr(M: float, window: WindowSpec, norm: float):
    """``(epsilon, 1/epsilon)`` with ``epsilon = M sqrt(T2-T1) / norm``."""
    if not norm > 0:
        raise ZeroSignalError("zero reference norm")
    eps = M * math.sqrt(window.length) / norm
    return eps, (math.inf if eps == 0 else 1.0 / eps)


# -- Ingham diagnostics ------------------------------------------------------


class InghamConstants(NamedTuple):
    gamma: float
    T: float
    C1: float
    C2: float

    @property
    def valid(self) -> bool:
        return self.C1 > 0


def ingham_constants(gamma: float, T: float) -> InghamConstants:
    if not (gamma > 0 and T > 0):
        raise DomainError("gamma and T must be positive")
    s = 4 * math.pi**2 / (T**2 * gamma**2)
    return InghamConstants(gamma, T, 2 * T / math.pi * (1 - s), 8 * T / math.pi * (1 + s))


class InghamCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    constants: InghamConstants


def ingham_lower_bound_check(state: ModalState, eigen: EigenStructure, window: WindowSpec,
                             ) -> InghamCheck:
    """Compare ``int |sum a_n exp(i mu_n t)|^2`` with ``C1 sum |a_n|^2``."""
    gap = _min_gap(eigen)
    T = window.length
    if not T > 2 * math.pi / gap:
        raise GapWindowError(f"window length {T} does not exceed 2 pi / gamma = {2 * math.pi / gap}")
    const = ingham_constants(gap, T)
    coeffs = state.on(eigen.indices).coeffs
    sig = sg.ModalSignal(0.0, eigen.L, coeffs, K=eigen.K)
    lhs = float(sg.window_sq_norm_many(sig, [window.T1], [window.T2])[0])
    rhs = const.C1 * float(np.sum(np.abs(coeffs) ** 2))
    return InghamCheck(lhs, rhs, lhs >= rhs - INGHAM_SLACK * rhs, const)


def _min_gap(eigen: EigenStructure) -> float:
    if eigen.mu.size < 2:
        return math.inf
    return float(np.min(np.diff(eigen.mu)))

"""Initial data: closed-form profiles and sampled profiles loaded from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np

from .._numerics import composite_simpson
from ..errors import NumericalError

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InitialData:
    """Initial state ``(u0, u1)``, or a single complex ``u0`` for first-order models.

    ``du0`` is the x-derivative of ``u0``; when absent it is taken from
    centred differences on the quadrature grid.
    """

    u0: Profile
    u1: Optional[Profile] = None
    du0: Optional[Profile] = None
    name: str = "custom"
    params: Dict = field(default_factory=dict)

    def samples(self, x):
        x = np.asarray(x, dtype=float)
        u0 = np.asarray(self.u0(x), dtype=complex) * np.ones_like(x)
        if self.du0 is not None:
            du0 = np.asarray(self.du0(x), dtype=complex) * np.ones_like(x)
        else:
            du0 = np.gradient(u0, x, edge_order=2)
        u1 = None
        if self.u1 is not None:
            u1 = np.asarray(self.u1(x), dtype=complex) * np.ones_like(x)
        for arr in (u0, du0, u1):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise NumericalError(f"initial data {self.name!r} is not finite on [0, 1]")
        return u0, du0, u1

    def energy(self, n_points: int = 4097, first_order: bool = False) -> float:
        """``int |u0'|^2 + |u1|^2`` (or ``int |u0|^2`` for first-order models)."""
        x = np.linspace(0.0, 1.0, n_points)
        u0, du0, u1 = self.samples(x)
        dens = np.abs(u0) ** 2 if first_order else np.abs(du0) ** 2
        if not first_order and u1 is not None:
            dens = dens + np.abs(u1) ** 2
        e = float(composite_simpson(dens, x[1] - x[0]))
        if not np.isfinite(e):
            raise NumericalError("initial data has infinite energy")
        return e

    def to_dict(self):
        if self.name == "sampled":
            return dict(self.params)
        return {"kind": "closed_form", "name": self.name, "params": dict(self.params)}


def _sin_cos(amp0=1.0, freq0=np.pi, amp1=0.0, freq1=np.pi):
    return InitialData(
        u0=lambda x: amp0 * np.sin(freq0 * x),
        du0=lambda x: amp0 * freq0 * np.cos(freq0 * x),
        u1=lambda x: amp1 * np.cos(freq1 * x),
        name="sin_cos",
        params=dict(amp0=amp0, freq0=freq0, amp1=amp1, freq1=freq1),
    )


def _sin_plus_i_cos(re_amp=1.0, im_amp=1.0, freq=np.pi):
    return InitialData(
        u0=lambda x: re_amp * np.sin(freq * x) + 1j * im_amp * np.cos(freq * x),
        du0=lambda x: freq * (re_amp * np.cos(freq * x) - 1j * im_amp * np.sin(freq * x)),
        name="sin_plus_i_cos",
        params=dict(re_amp=re_amp, im_amp=im_amp, freq=freq),
    )


def _zero(first_order=False):
    z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return InitialData(u0=z, du0=z, u1=None if first_order else z, name="zero",
                       params=dict(first_order=first_order))


def _schrodinger_mode(n=1):
    k = (n - 0.5) * np.pi
    return InitialData(
        u0=lambda x: np.sqrt(2.0) * np.cos(k * x),
        du0=lambda x: -np.sqrt(2.0) * k * np.sin(k * x),
        name="schrodinger_mode",
        params=dict(n=n),
    )


CLOSED_FORMS: Dict[str, Callable[..., InitialData]] = {
    "sin_cos": _sin_cos,
    "sin_plus_i_cos": _sin_plus_i_cos,
    "zero": _zero,
    "schrodinger_mode": _schrodinger_mode,
}


def closed_form(name: str, **params) -> InitialData:
    try:
        factory = CLOSED_FORMS[name]
    except KeyError:
        raise KeyError(f"unknown initial profile {name!r}; known: {sorted(CLOSED_FORMS)}") from None
    return factory(**params)


def sampled(x, u0, u1=None) -> InitialData:
    """Linear interpolation of tabulated profiles on [0, 1]."""
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(u0, dtype=complex)
    if np.any(np.diff(x) <= 0):
        raise ValueError("sample abscissae must be strictly increasing")
    du = np.gradient(u0, x, edge_order=2 if x.size > 2 else 1)

    def interp(vals):
        return lambda t: (np.interp(t, x, vals.real) + 1j * np.interp(t, x, vals.imag))

    u1_fn = None
    if u1 is not None:
        u1_fn = interp(np.asarray(u1, dtype=complex))
    table = {"kind": "sampled", "x": x.tolist(), "u0": u0.real.tolist(), "u0_im": u0.imag.tolist()}
    if u1 is not None:
        u1 = np.asarray(u1, dtype=complex)
        table.update(u1=u1.real.tolist(), u1_im=u1.imag.tolist())
    return InitialData(u0=interp(u0), du0=interp(du), u1=u1_fn, name="sampled", params=table)


def from_dict(spec: dict) -> InitialData:
    """Build from ``{"kind": "closed_form", "name", "params"}`` or a ``"sampled"`` table.

    Sampled tables take ``x``, ``u0`` and optional ``u1``; imaginary parts go
    in ``u0_im`` / ``u1_im``.
    """
    kind = spec.get("kind", "closed_form")
    if kind == "closed_form":
        return closed_form(spec["name"], **spec.get("params", {}))
    if kind == "sampled":
        u0 = np.asarray(spec["u0"], dtype=float) + 1j * np.asarray(spec.get("u0_im", 0.0))
        u1 = None
        if "u1" in spec:
            u1 = np.asarray(spec["u1"], dtype=float) + 1j * np.asarray(spec.get("u1_im", 0.0))
        return sampled(spec["x"], u0, u1)
    raise ValueError(f"unknown initial-data kind {kind!r}")


def load(path) -> InitialData:
    return from_dict(json.loads(Path(path).read_text()))

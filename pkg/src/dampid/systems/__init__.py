"""Concrete spectral models and their initial data."""

from __future__ import annotations

import math

from ..core import Interval
from ..errors import DomainError
from .initial import InitialData, closed_form, from_dict, sampled
from .schrodinger import SchrodingerModel
from .strings import StringsModel
from .wave import WaveModel

MODELS = {"wave": WaveModel, "schrodinger": SchrodingerModel, "strings": StringsModel}


def default_prior(system: str, q: float) -> Interval:
    """The maximal prior set of the branch that contains ``q``."""
    if system == "wave":
        if q > 1:
            return Interval(1.0, math.inf)
        if q < -1:
            return Interval(-math.inf, -1.0)
        return Interval(-1.0, 1.0)
    if system == "schrodinger":
        return Interval(0.0, math.inf)
    if system == "strings":
        return Interval(2.0, math.inf)
    raise DomainError(f"unknown system {system!r}")


def make_model(system: str, prior: Interval | None = None, q: float | None = None):
    try:
        cls = MODELS[system]
    except KeyError:
        raise DomainError(f"unknown system {system!r}; known: {sorted(MODELS)}") from None
    if prior is None and q is not None:
        prior = default_prior(system, q)
    return cls(prior) if prior is not None else cls()


def project_initial(model, q, data, index_set, n_points=4097):
    return model.project(q, data, index_set, n_points=n_points)


def evaluate_eigenfunction(model, q, n, x):
    """Value of ``Phi_n(x)`` at scalar ``n`` and ``x``; a pair or a scalar."""
    parts = model.eigenfunction(q, [n], [x])
    vals = tuple(complex(p[0, 0]) for p in parts)
    return vals if len(vals) > 1 else vals[0]


def observation_coefficient(model, q, n):
    return complex(model.kappa(q, [n])[0])


__all__ = [
    "InitialData",
    "SchrodingerModel",
    "StringsModel",
    "WaveModel",
    "closed_form",
    "default_prior",
    "evaluate_eigenfunction",
    "from_dict",
    "make_model",
    "observation_coefficient",
    "project_initial",
    "sampled",
]

"""Experiment runner: configs, the built-in registry and artifact writing.

A config is a JSON object; the schema is the field list of
:class:`ExperimentConfig` (see the README).  ``run_experiment`` writes

* ``table.csv``   one row per noise level or per reconstruction time,
* ``sweep.csv``   one row per sweep window (header only when there is none),
* ``profile_T1=<v>.csv`` reconstructed profiles on a 101-point grid,
* ``report.json`` config echo, environment and summary values.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import scipy

from . import signal as sg
from .core import Interval, ModalState
from .errors import DampidError, DomainError
from .identify import (
    WindowSpec,
    estimate_q,
    estimate_sweep,
    profile_errors,
    reconstruct_initial,
    state_error,
)
from .systems import from_dict, make_model

FINE_POINTS = 4001
TABLE_POINTS = 101
TABLE_COLUMNS = ["label", "T1", "noise", "q_used", "q_hat", "abs_err", "l2_u0", "l2_u1",
                 "l2_u0_fine", "l2_u1_fine", "state_error", "n_seeds", "warning"]
SWEEP_COLUMNS = ["T1", "q_hat", "abs_err", "f_bound", "epsilon", "T2", "norm_near", "norm_far",
                 "f_hat", "warning"]


def fmt(v) -> str:
    """17 significant digits; blanks for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.17g}"
    return str(v)


@dataclass
class ExperimentConfig:
    name: str
    system: str
    q: float
    initial: Dict
    disturbance: Dict = field(default_factory=lambda: {"kind": "none"})
    prior: Optional[Dict] = None
    noise_levels: List[float] = field(default_factory=list)
    n_seeds: int = 20
    n_syn: int = 5000
    n_rec: int = 1000
    window: Optional[List[float]] = None
    sweep_T1: List[float] = field(default_factory=list)
    sweep_delta: Optional[float] = None
    recon_T1: List[float] = field(default_factory=lambda: [0.0])
    # "estimate": q from the fixed window, else the last sweep estimate; "true": q itself
    recon_q: str = "estimate"
    engine: str = "exact"
    seed: int = 0
    out_dir: Optional[str] = None
    description: str = ""

    def __post_init__(self):
        if self.n_rec > self.n_syn:
            raise DomainError("n_rec must not exceed n_syn")
        if self.engine not in ("exact", "grid"):
            raise DomainError(f"unknown engine {self.engine!r}")
        if self.recon_q not in ("estimate", "true"):
            raise DomainError(f"recon_q must be 'estimate' or 'true', not {self.recon_q!r}")
        if self.sweep_T1 and self.sweep_delta is None:
            raise DomainError("a T1 sweep needs sweep_delta")
        if self.window is not None:
            WindowSpec(*self.window)
        if self.n_seeds < 1:
            raise DomainError("n_seeds must be positive")

    # -- serialization -------------------------------------------------------
    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        d = dict(d)
        sw = d.get("sweep_T1")
        if isinstance(sw, dict):  # {"start", "stop", "step"}
            n = int(round((sw["stop"] - sw["start"]) / sw["step"])) + 1
            d["sweep_T1"] = [round(sw["start"] + k * sw["step"], 12) for k in range(n)]
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        missing = {"name", "system", "q", "initial"} - set(d)
        if missing:
            raise DomainError(f"missing config keys: {sorted(missing)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    # -- derived -------------------------------------------------------------
    def model(self):
        prior = Interval(**self.prior) if self.prior else None
        return make_model(self.system, prior=prior, q=self.q)

    def windows(self) -> List[WindowSpec]:
        return [WindowSpec(t, t + self.sweep_delta) for t in self.sweep_T1]

    def horizon(self, L: float) -> float:
        ends = [t + L for t in self.recon_T1]
        if self.window is not None:
            ends.append(self.window[1])
        ends += [w.T2 for w in self.windows()]
        return max(ends) if ends else L

    def window_length(self, L: float) -> float:
        lengths = [L]
        if self.window is not None:
            lengths.append(self.window[1] - self.window[0])
        if self.sweep_T1:
            lengths.append(self.sweep_delta)
        return min(lengths)


@dataclass
class ResultTable:
    rows: List[Dict] = field(default_factory=list)
    sweep: List[Dict] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    profiles: Dict = field(default_factory=dict, repr=False)

    def column(self, name, source="rows"):
        return [r.get(name) for r in getattr(self, source)]


def _noise_seed(base: int, level_index: int, rep: int) -> int:
    return int(np.random.SeedSequence([base, level_index, rep]).generate_state(1)[0])


class _Runner:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.model = cfg.model()
        self.data = from_dict(cfg.initial)
        self.truth = self.model.project(cfg.q, self.data, self.model.indices(cfg.n_syn))
        self.clean = sg.ModalSignal.from_state(self.model, cfg.q, self.truth)
        L = self.model.L
        self.horizon = cfg.horizon(L)
        self.steps = sg.steps_per_period(L, cfg.window_length(L))
        self.rec_idx = self.model.indices(cfg.n_rec)
        self.reference = self.truth.on(self.rec_idx)

    def measured(self, spec: sg.DisturbanceSpec):
        """The measurement in the configured engine, plus the disturbance bound."""
        if self.cfg.engine == "exact":
            if spec.is_zero:
                return self.clean, 0.0
            y = sg.disturb(self.clean, spec, self.horizon, self.steps)
            return y, y.bound_M
        g = sg.sample_grid(self.clean, self.horizon, self.steps)
        bound = spec.bound(self.horizon, g.samples) if not spec.is_zero else 0.0
        return sg.apply_disturbance(g, spec), bound

    def reconstruct(self, y, q_used, T1):
        rc = reconstruct_initial(y, self.model, q_used, T1, self.rec_idx)
        coarse = profile_errors(self.model, q_used, rc.state, self.data, TABLE_POINTS)
        fine = profile_errors(self.model, q_used, rc.state, self.data, FINE_POINTS, "simpson")
        return rc, coarse, fine

    def state_err(self, rc):
        return state_error(self.model, self.cfg.q, rc.state, self.reference)


def _median(vals):
    vals = [v for v in vals if v is not None and not math.isnan(v)]
    return float(np.median(vals)) if vals else math.nan


def _noise_rows(run: _Runner, out: ResultTable, profiles: Dict):
    cfg = run.cfg
    if cfg.window is None:
        raise DomainError("noise-level experiments need a fixed window")
    win = WindowSpec(*cfg.window)
    T1r = cfg.recon_T1[0] if cfg.recon_T1 else None
    for li, level in enumerate(cfg.noise_levels):
        reps = 1 if level == 0 else cfg.n_seeds
        acc = {k: [] for k in ("q_hat", "abs_err", "q_used", "l2_u0", "l2_u1", "l2_u0_fine",
                               "l2_u1_fine")}
        warn = []
        for rep in range(reps):
            spec = (sg.DisturbanceSpec.none() if level == 0
                    else sg.DisturbanceSpec.noise(level, _noise_seed(cfg.seed, li, rep)))
            y, _ = run.measured(spec)
            try:
                rep_q = estimate_q(y, run.model, win)
            except DampidError as exc:
                warn.append(str(exc))
                continue
            acc["q_hat"].append(rep_q.q_hat)
            acc["abs_err"].append(abs(rep_q.q_hat - cfg.q))
            if T1r is None:
                continue
            q_used = rep_q.q_hat if cfg.recon_q == "estimate" else cfg.q
            rc, coarse, fine = run.reconstruct(y, q_used, T1r)
            acc["q_used"].append(q_used)
            acc["l2_u0"].append(coarse["u0"])
            acc["l2_u1"].append(coarse.get("u1"))
            acc["l2_u0_fine"].append(fine["u0"])
            acc["l2_u1_fine"].append(fine.get("u1"))
            if rep == 0 and li == 0:
                profiles[T1r] = rc
        row = {"label": f"noise={level:g}", "T1": T1r, "noise": level, "n_seeds": reps}
        row.update({k: _median(v) for k, v in acc.items()})
        row["warning"] = "; ".join(sorted(set(warn)))
        out.rows.append(row)


def _sweep_rows(run: _Runner, y, bound, out: ResultTable):
    cfg = run.cfg
    pts = estimate_sweep(y, run.model, cfg.windows(), M=bound)
    for p in pts:
        rep = p.report
        out.sweep.append({
            "T1": p.window.T1,
            "q_hat": p.q_hat,
            "abs_err": abs(p.q_hat - cfg.q) if rep else math.nan,
            "f_bound": rep.f_error_bound if rep else None,
            "epsilon": rep.epsilon if rep else None,
            "T2": p.window.T2,
            "norm_near": p.norm_near,
            "norm_far": p.norm_far,
            "f_hat": p.f_hat,
            "warning": p.error or ("; ".join(rep.warnings) if rep else ""),
        })
    good = [p for p in pts if p.report]
    return good[-1].report.q_hat if good else None


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ResultTable:
    """Simulate, identify and reconstruct; write artifacts when ``out_dir`` is set."""
    out_dir = out_dir if out_dir is not None else cfg.out_dir
    run = _Runner(cfg)
    out = ResultTable()
    profiles = out.profiles
    spec = sg.DisturbanceSpec.from_dict(cfg.disturbance)
    out.summary["f_true"] = run.model.f(cfg.q)
    out.summary["L"] = run.model.L
    out.summary["grid_steps_per_period"] = run.steps

    if cfg.noise_levels:
        _noise_rows(run, out, profiles)
    else:
        y, bound = run.measured(spec)
        out.summary["M"] = bound
        q_est = None
        if cfg.window is not None:
            try:
                r = estimate_q(y, run.model, WindowSpec(*cfg.window), M=bound)
                q_est = r.q_hat
                out.rows.append({"label": "window", "T1": cfg.window[0], "q_hat": r.q_hat,
                                 "abs_err": abs(r.q_hat - cfg.q), "warning": "; ".join(r.warnings)})
            except DampidError as exc:
                out.rows.append({"label": "window", "T1": cfg.window[0], "warning": str(exc)})
        if cfg.sweep_T1:
            last = _sweep_rows(run, y, bound, out)
            q_est = last if q_est is None else q_est
        for T1 in cfg.recon_T1:
            row = {"label": f"T1={T1:g}", "T1": T1}
            q_used = cfg.q if cfg.recon_q == "true" else q_est
            if q_used is None:
                row["warning"] = "no estimate of q available for reconstruction"
                out.rows.append(row)
                continue
            try:
                rc, coarse, fine = run.reconstruct(y, q_used, T1)
            except DampidError as exc:
                row["warning"] = str(exc)
                out.rows.append(row)
                continue
            profiles[T1] = rc
            row.update(q_used=q_used, q_hat=q_est, abs_err=(abs(q_est - cfg.q) if q_est else None),
                       l2_u0=coarse["u0"], l2_u1=coarse.get("u1"), l2_u0_fine=fine["u0"],
                       l2_u1_fine=fine.get("u1"), state_error=run.state_err(rc))
            out.rows.append(row)

    if out_dir is not None:
        write_artifacts(cfg, out, out_dir)
    return out


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])


def environment():
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def write_artifacts(cfg: ExperimentConfig, out: ResultTable, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "table.csv", TABLE_COLUMNS, out.rows)
    _write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, out.sweep)
    for T1, rc in out.profiles.items():
        rc.to_csv(out_dir / f"profile_T1={T1:g}.csv", TABLE_POINTS)
    report = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "environment": environment(),
        "summary": out.summary,
        "table": out.rows,
        "sweep_points": len(out.sweep),
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, default=_json_default,
                                                    allow_nan=True))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# -- registry ----------------------------------------------------------------


def _grid(start, stop, step):
    n = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def builtin_experiments() -> List[ExperimentConfig]:
    pi = math.pi
    return [
        ExperimentConfig(
            name="wave-noisy",
            system="wave",
            q=-3.0,
            initial={"kind": "closed_form", "name": "sin_cos",
                     "params": {"amp0": -3.0, "freq0": pi, "amp1": pi, "freq1": pi}},
            noise_levels=[0.0, 0.01, 0.03],
            window=[2.0, 2.5],
            recon_T1=[0.0],
            description="stable wave, multiplicative noise, fixed window (2, 2.5)",
        ),
        ExperimentConfig(
            name="wave-disturbed",
            system="wave",
            q=3.0,
            initial={"kind": "closed_form", "name": "sin_cos",
                     "params": {"amp0": 3.0, "freq0": pi, "amp1": pi, "freq1": pi}},
            disturbance={"kind": "wave_example"},
            sweep_T1=_grid(2.0, 10.0, 0.05),
            sweep_delta=3.0,
            recon_T1=[0.0, 3.0, 7.0],
            description="anti-stable wave, bounded disturbance, T2 = T1 + 3",
        ),
        ExperimentConfig(
            name="schrodinger",
            system="schrodinger",
            q=0.7,
            initial={"kind": "closed_form", "name": "sin_plus_i_cos",
                     "params": {"re_amp": 1.0, "im_amp": 1.0, "freq": pi}},
            disturbance={"kind": "schrodinger_example"},
            sweep_T1=_grid(2.55, 10.0, 0.05),
            sweep_delta=1.0,
            recon_T1=[0.0, 3.0, 7.0],
            description="anti-damped Schrodinger, complex disturbance, T2 = T1 + 1",
        ),
        ExperimentConfig(
            name="strings",
            system="strings",
            q=3.0,
            initial={"kind": "closed_form", "name": "sin_cos",
                     "params": {"amp0": 1.0, "freq0": 1.0, "amp1": 1.0, "freq1": 1.0}},
            disturbance={"kind": "strings_example"},
            sweep_T1=_grid(2.0, 8.0, 0.05),
            sweep_delta=1.0,
            recon_T1=[0.0, 3.0, 7.0],
            description="coupled strings with joint anti-damping, T2 = T1 + 1",
        ),
    ]


def get_experiment(name: str) -> ExperimentConfig:
    for cfg in builtin_experiments():
        if cfg.name == name:
            return cfg
    raise KeyError(f"unknown experiment {name!r}; known: {[c.name for c in builtin_experiments()]}")

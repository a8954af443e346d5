"""Command line: ``python -m dampid {list,experiment,simulate,identify}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from . import harness
from . import signal as sg
from .errors import DampidError
from .identify import WindowSpec, estimate_q, reconstruct_initial

log = logging.getLogger("dampid")


def _load_config(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.ExperimentConfig.load(args.config)
    elif getattr(args, "name", None):
        cfg = harness.get_experiment(args.name)
    else:
        raise ValueError("give an experiment name or --config")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_syn is not None:
        overrides["n_syn"] = args.n_syn
    if args.n_rec is not None:
        overrides["n_rec"] = args.n_rec
    if args.engine is not None:
        overrides["engine"] = args.engine
    if overrides:
        d = cfg.to_dict()
        d.update(overrides)
        if d["n_rec"] > d["n_syn"] and "n_rec" not in overrides:
            d["n_rec"] = d["n_syn"]
        cfg = harness.ExperimentConfig.from_dict(d)
    return cfg


def cmd_list(args):
    for cfg in harness.builtin_experiments():
        print(f"{cfg.name:16s} {cfg.description}")
    return 0


def cmd_experiment(args):
    cfg = _load_config(args)
    out = args.out or cfg.out_dir or f"runs/{cfg.name}"
    res = harness.run_experiment(cfg, out)
    for row in res.rows:
        print(",".join(f"{k}={harness.fmt(v)}" for k, v in row.items() if v not in (None, "")))
    print(f"artifacts written to {out}")
    return 0


def cmd_simulate(args):
    cfg = _load_config(args)
    run = harness._Runner(cfg)
    spec = sg.DisturbanceSpec.from_dict(cfg.disturbance)
    if args.noise:
        spec = sg.DisturbanceSpec.noise(args.noise, harness._noise_seed(cfg.seed, 0, 0))
    g = sg.sample_grid(run.clean, run.horizon, run.steps)
    g = sg.apply_disturbance(g, spec)
    out = Path(args.out or "y.csv")
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "y.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    g.to_csv(out)
    print(f"{g.samples.size} samples on [0, {g.t_end:.6g}] written to {out}")
    return 0


def cmd_identify(args):
    cfg = _load_config(args)
    model = cfg.model()
    y = sg.GridSignal.from_csv(args.signal)
    if args.window:
        win = WindowSpec(*args.window)
    elif cfg.window is not None:
        win = WindowSpec(*cfg.window)
    elif cfg.sweep_T1:
        win = cfg.windows()[-1]
    else:
        raise ValueError("no identification window: pass --window T1 T2")
    rep = estimate_q(y, model, win, M=args.bound)
    T1 = args.recon_T1 if args.recon_T1 is not None else (cfg.recon_T1[0] if cfg.recon_T1 else 0.0)
    rc = reconstruct_initial(y, model, rep.q_hat, T1, model.indices(cfg.n_rec))
    rep.state = rc.state
    out = Path(args.out or "identify")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(rep.to_json(indent=2))
    rc.to_csv(out / f"profile_T1={T1:g}.csv")
    print(f"q_hat={rep.q_hat:.17g} f_hat={rep.f_hat:.17g}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="dampid", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, name_arg=True):
        if name_arg:
            sp.add_argument("name", nargs="?", help="built-in experiment name")
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--out", help="output directory (or .csv file for simulate)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--n-syn", dest="n_syn", type=int)
        sp.add_argument("--n-rec", dest="n_rec", type=int)
        sp.add_argument("--engine", choices=["exact", "grid"])

    sub.add_parser("list", help="list built-in experiments").set_defaults(func=cmd_list)
    sp = sub.add_parser("experiment", help="run an experiment and write artifacts")
    common(sp)
    sp.set_defaults(func=cmd_experiment)
    sp = sub.add_parser("simulate", help="write the measured output as t,re,im CSV")
    common(sp)
    sp.add_argument("--noise", type=float, help="multiplicative noise level instead of the config disturbance")
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("identify", help="estimate q and x0 from a t,re,im CSV")
    common(sp)
    sp.add_argument("--signal", required=True, help="measured output CSV")
    sp.add_argument("--window", type=float, nargs=2, metavar=("T1", "T2"))
    sp.add_argument("--recon-T1", dest="recon_T1", type=float)
    sp.add_argument("--bound", type=float, help="disturbance sup bound M")
    sp.set_defaults(func=cmd_identify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (DampidError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

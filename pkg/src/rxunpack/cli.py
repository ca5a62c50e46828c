"""Command-line entry point.

Exit codes: 0 success, 1 input error (missing file, syntax, validation),
2 computation error or failed tolerance check.
"""
from __future__ import annotations

import argparse
import csv
import os
import shlex
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (BindingCurvePoint, detect_period, initial_rate, summarize_binding_curve)
from .core import ReactionNetwork, validate_network
from .errors import (AssumptionError, DomainError, ExpansionError, ModelSyntaxError,
                     NumericalError, RxError)
from .experiments import REPRODUCERS
from .modeldsl import (UnpackStmt, apply_directives, build_network, document_from_network,
                       parse_model, serialize_model)
from .models import BUILTINS, corpus_texts
from .sim import SsaConfig, Trajectory, run_ensemble, simulate_ode
from .sim.io import atomic_write, ensemble_summary_csv, to_json, trajectory_csv

OUT_ENV = "RXUNPACK_OUT"
DEFAULT_OUT = "rxunpack-out"
DEFAULT_SEED = 0


class InputError(Exception):
    """Bad command-line input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class CheckFailed(Exception):
    """A computation finished but failed its tolerance checks; exit code 2."""


# -- helpers ---------------------------------------------------------------------------

def _source(model: str) -> tuple[str, str]:
    """``(stem, text)`` for a ``.rxn`` path or a bundled model name."""
    path = Path(model)
    if path.is_file():
        try:
            return path.stem, path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {model}: {exc}") from exc
    corpus = corpus_texts()
    if f"{model}.rxn" in corpus:
        return model, corpus[f"{model}.rxn"]
    if model in BUILTINS:
        net = BUILTINS[model]()
        return model, serialize_model(document_from_network(net))
    raise InputError(f"no such model file or built-in: {model}")


def _network(model: str, unpack: bool = True) -> tuple[str, ReactionNetwork]:
    stem, text = _source(model)
    doc = parse_model(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        net = apply_directives(doc) if unpack else build_network(doc)
    report = validate_network(net)
    if not report.ok:
        raise InputError(f"{model}: invalid network\n{report}")
    return stem, net


def _out_dir(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT)) / default_name


def _command(argv: list[str]) -> str:
    return shlex.join(["rxunpack", *argv])


def _metadata(args, argv, **extra) -> dict:
    settings = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {"command": _command(argv), "settings": settings, "version": __version__, **extra}


def _read_table(path: str) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise InputError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric cell ({exc})") from exc
    return rows[0], data


def _column(header: list[str], name: str, path: str) -> int:
    for candidate in (name, f"{name}_mean"):
        if candidate in header:
            return header.index(candidate)
    raise InputError(f"{path}: no column {name!r} (have {', '.join(header)})")


# -- subcommands ------------------------------------------------------------------------

def cmd_simulate(args, argv) -> int:
    stem, net = _network(args.model, not args.no_unpack)
    dt = args.dt if args.dt is not None else args.t_end / 500.0
    cfg = SsaConfig(args.t_end, seed=args.seed, dt=dt, max_events=args.max_events)
    ens = run_ensemble(net, cfg, args.runs, workers=args.workers)
    out = _out_dir(args, f"simulate-{stem}")
    if args.runs >= 2:
        atomic_write(out / "summary.csv", ensemble_summary_csv(ens))
    if args.trajectories or args.runs == 1:
        width = len(str(args.runs - 1))
        for i in range(args.runs):
            atomic_write(out / f"replicate_{i:0{width}d}.csv", trajectory_csv(ens.replicate(i)))
    conservation = {}
    for c in net.conservations:
        total = sum(k * ens[s] for s, k in c.coefficients)
        conservation[c.label()] = {"total": c.total,
                                   "max_deviation": int(np.abs(total - c.total).max())}
    truncated = [i for i, t in enumerate(ens.terminated) if t == "event-limit"]
    meta = _metadata(args, argv, model=net.name, fingerprint=ens.fingerprint, rng=ens.rng,
                     dt=dt, conservation=conservation, terminated=ens.terminated,
                     events=ens.n_events)
    atomic_write(out / "metadata.json", to_json(meta))
    print(f"wrote {out}")
    if truncated:
        raise CheckFailed(f"{len(truncated)} replicate(s) hit the event limit")
    if any(v["max_deviation"] for v in conservation.values()):
        raise CheckFailed("a conservation law drifted")
    return 0


def cmd_ode(args, argv) -> int:
    stem, net = _network(args.model, not args.no_unpack)
    dt = args.dt if args.dt is not None else args.t_end / 500.0
    tr = simulate_ode(net, args.t_end, rel_tol=args.rtol, abs_tol=args.atol, dt=dt)
    out = _out_dir(args, f"ode-{stem}")
    atomic_write(out / "trajectory.csv", trajectory_csv(tr))
    atomic_write(out / "metadata.json", to_json(_metadata(
        args, argv, model=net.name, fingerprint=net.fingerprint(), dt=dt,
        integrator="scipy RK45 (Dormand-Prince 5(4))")))
    print(f"wrote {out}")
    return 0


def cmd_unpack(args, argv) -> int:
    stem, text = _source(args.model)
    doc = parse_model(text)
    if not any(isinstance(d, UnpackStmt) for d in doc.directives):
        raise InputError(f"{args.model}: no unpack directive")
    out = Path(args.out) if args.out else _out_dir(args, f"unpack-{stem}") / f"{stem}_unpacked.rxn"
    report_path = out.with_name(out.stem + ".report.json")
    expansions: list = []
    report = _metadata(args, argv, model=doc.name)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            net = apply_directives(doc, expansions)
    except (AssumptionError, ExpansionError) as exc:
        report.update(error=type(exc).__name__, message=str(exc),
                      expansions=[e.to_dict() for e in expansions])
        atomic_write(report_path, to_json(report))
        raise
    flat = document_from_network(net, doc.alpha)
    atomic_write(out, serialize_model(flat))
    validation = validate_network(net)
    report.update(expansions=[e.to_dict() for e in expansions],
                  warnings=sorted({str(w.message) for w in caught}),
                  validation=str(validation), fingerprint=net.fingerprint())
    atomic_write(report_path, to_json(report))
    for e in expansions:
        checks = ", ".join(f"{c.name} {'ok' if c.passed else 'FAILED'}"
                           for c in e.assumption_report)
        print(f"{e.replaced_reaction}: {e.template} -> {len(e.introduced_reactions)} reactions"
              f" ({checks})")
    print(f"wrote {out}")
    return 0


def cmd_analyze(args, argv) -> int:
    header, data = _read_table(args.file)
    if args.kind == "hill":
        x = data[:, _column(header, "tf_total", args.file)]
        y = data[:, _column(header, "bound_fraction", args.file)]
        fit = summarize_binding_curve([BindingCurvePoint(a, b) for a, b in zip(x, y)],
                                      args.n, args.j)
        result = {"n_prime": fit.n_prime, "J_prime": fit.j_prime,
                  "rmse_estimated": fit.rmse_estimated,
                  "rmse_theoretical": fit.rmse_theoretical, "R": fit.R,
                  "n_from_R": fit.n_from_R}
    else:
        t = data[:, _column(header, "time", args.file)]
        name = args.product if args.kind == "rate" else args.species
        if name is None:
            raise InputError(f"analyze {args.kind} needs --{'product' if args.kind == 'rate' else 'species'}")
        y = data[:, _column(header, name, args.file)]
        tr = Trajectory(t, y[:, None], (name,))
        if args.kind == "rate":
            if args.s0 is None:
                raise InputError("analyze rate needs --s0")
            rate, se = initial_rate(tr, name, args.cap, s0=args.s0)
            result = {"rate": rate, "se": se}
        else:
            p = detect_period(tr, name, args.window, args.t_start)
            result = {"period": p.period, "amplitude": p.amplitude, "n_peaks": p.n_peaks,
                      "peak_times": p.peak_times, "peak_heights": p.peak_heights}
    text = to_json(result)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        atomic_write(out / "analysis.json", text)
        atomic_write(out / "metadata.json", to_json(_metadata(args, argv)))
    return 0


def cmd_reproduce(args, argv) -> int:
    rep = REPRODUCERS[args.target](runs=args.runs, seed=args.seed)
    out = _out_dir(args, args.target)
    rep.settings["command"] = _command(argv)
    rep.write(out)
    for c in rep.checks:
        if not c.passed or args.verbose:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value} ({c.tolerance})")
    n_fail = sum(not c.passed for c in rep.checks)
    print(f"{args.target}: {len(rep.checks) - n_fail}/{len(rep.checks)} checks passed; wrote {out}")
    if n_fail:
        raise CheckFailed(f"{n_fail} check(s) failed")
    return 0


def cmd_validate(args, argv) -> int:
    _, text = _source(args.model)
    doc = parse_model(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        net = apply_directives(doc) if not args.no_unpack else build_network(doc)
    report = validate_network(net)
    print(report)
    if not report.ok:
        raise InputError(f"{args.model}: {len(report.errors)} error(s)")
    return 0


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rxunpack", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rxunpack {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_cmd(name, helptext):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("model", help=".rxn file or built-in model name")
        p.add_argument("--no-unpack", action="store_true",
                       help="ignore unpack directives and use the network as written")
        return p

    p = model_cmd("simulate", "SSA ensemble")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, help="sampling interval (default t_end/500)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-events", type=int, default=10**8)
    p.add_argument("--trajectories", action="store_true", help="also write every replicate")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = model_cmd("ode", "deterministic reference")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float)
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--atol", type=float, default=1e-6)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("unpack", help="apply unpack directives, write the elementary model")
    p.add_argument("model")
    p.add_argument("--out", help="output .rxn file (report goes next to it)")
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("analyze", help="initial rate, period or Hill fit from a CSV")
    p.add_argument("kind", choices=("rate", "period", "hill"))
    p.add_argument("file")
    p.add_argument("--product")
    p.add_argument("--s0", type=float)
    p.add_argument("--cap", type=float, default=0.1)
    p.add_argument("--species")
    p.add_argument("--window", type=float, default=360.0)
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--n", type=float, default=2.0, help="reference Hill order")
    p.add_argument("--j", type=float, default=599.0, help="reference half-saturation")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", help="benchmark runs with pass/fail checks")
    p.add_argument("target", choices=tuple(REPRODUCERS))
    p.add_argument("--runs", type=int, help="replicates (default depends on target)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true", help="print every check")
    p.set_defaults(func=cmd_reproduce)

    p = model_cmd("validate", "structural checks")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (InputError, ModelSyntaxError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CheckFailed, AssumptionError, ExpansionError, NumericalError, RxError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

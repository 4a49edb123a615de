"""Command-line front end.

Commands
--------
``simulate CONFIG``
    Integrate the orbit described by a ``key = value`` config file and write
    a CSV trajectory plus a JSON summary.
``classify MODEL B I A EPS``
    Print the orbit class, radial quadratic and shift-covariant parameters.
``verify [--suite S] [--seed N] [--cases N] [--json]``
    Run the cross-check sweeps.

Exit codes: 0 success, 1 invalid input, 2 integration aborted at a
singularity (partial output written), 3 a verification check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytic as an
from . import verify as vf
from .dynamics import (
    Adaptive,
    CylState,
    FixedStep,
    StepControl,
    Trajectory,
    effective_relativistic_B,
    integrate_many,
    invariants_array,
    invariants_of,
)
from .errors import CurvedMagError
from .geometry import SpaceModel

OUTPUT_DIR_ENV = "CURVEDMAG_OUTPUT_DIR"
CSV_HEADER = "t,r,phi,z,vr,vphi,vz,eps,I,A"

EXIT_OK, EXIT_INPUT, EXIT_SINGULAR, EXIT_CHECK = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    model: SpaceModel
    b_field: float
    initial: CylState
    t_end: float
    step: StepControl
    lam: Optional[float] = None
    stride: int = 1
    output: Optional[Path] = None

    @property
    def effective_B(self) -> float:
        if self.lam is None:
            return self.b_field
        return effective_relativistic_B(self.b_field, self.lam)


_KEYS = {"model", "b", "lambda", "r0", "phi0", "z0", "vr0", "vphi0", "vz0", "t_end",
         "step", "h", "rel_tol", "abs_tol", "h_max", "h_min", "stride", "output"}


def read_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def _num(cfg: dict, key: str, default: Optional[float] = None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        value = float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def parse_config(text: str, base_dir: Optional[Path] = None) -> SimConfig:
    """Build a :class:`SimConfig` from config file text.

    Relative output paths resolve against ``$CURVEDMAG_OUTPUT_DIR`` when it
    is set, otherwise against ``base_dir``.
    """
    cfg = read_config_text(text)
    try:
        model = SpaceModel.parse(cfg.get("model", ""))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    B = _num(cfg, "b")
    state = CylState.of(_num(cfg, "r0"), _num(cfg, "phi0", 0.0), _num(cfg, "z0", 0.0),
                        _num(cfg, "vr0", 0.0), _num(cfg, "vphi0", 0.0), _num(cfg, "vz0", 0.0))
    t_end = _num(cfg, "t_end")
    if t_end <= 0.0:
        raise ConfigError("t_end must be positive")
    kind = cfg.get("step", "adaptive").lower()
    if kind == "adaptive":
        d = Adaptive()
        step: StepControl = Adaptive(_num(cfg, "rel_tol", d.rel_tol), _num(cfg, "abs_tol", d.abs_tol),
                                     _num(cfg, "h_min", d.h_min), _num(cfg, "h_max", d.h_max))
    elif kind == "fixed":
        h = _num(cfg, "h")
        if h <= 0.0:
            raise ConfigError("h must be positive")
        step = FixedStep(h)
    else:
        raise ConfigError(f"step must be 'adaptive' or 'fixed', got {kind!r}")
    lam = None
    if "lambda" in cfg:
        lam = _num(cfg, "lambda")
        if not 0.0 < lam < 1.0:
            raise ConfigError(f"lambda={lam} outside (0, 1)")
        try:
            eps = invariants_of(model, B, state).epsilon
        except CurvedMagError as exc:
            raise ConfigError(str(exc)) from None
        if not eps < 1.0:
            raise ConfigError(f"relativistic run needs eps < 1, got {eps}")
    stride = int(_num(cfg, "stride", 1.0))
    if stride < 1:
        raise ConfigError("stride must be at least 1")
    output = None
    if "output" in cfg:
        output = Path(cfg["output"])
        if not output.is_absolute():
            root = os.environ.get(OUTPUT_DIR_ENV)
            output = Path(root) / output if root else (base_dir or Path.cwd()) / output
    return SimConfig(model, B, state, t_end, step, lam, stride, output)


def _sample_rows(tr: Trajectory, stride: int) -> np.ndarray:
    n = len(tr.t)
    keep = np.arange(0, n, stride)
    if keep[-1] != n - 1:
        keep = np.append(keep, n - 1)
    inv = np.asarray(invariants_array(tr.model, tr.B, tr.states[keep].T)).T
    return np.column_stack([tr.t[keep], tr.states[keep], inv])


def write_csv(path: Path, rows: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header=CSV_HEADER, comments="")


def run_simulation(cfg: SimConfig):
    """Integrate ``cfg``; returns ``(trajectory, rows, summary)``."""
    B = cfg.effective_B
    (tr,) = integrate_many(cfg.model, B, [cfg.initial], cfg.t_end, cfg.step)
    rows = _sample_rows(tr, cfg.stride)
    first, last = rows[0, 7:], rows[-1, 7:]
    inv0 = invariants_of(cfg.model, B, cfg.initial)
    try:
        cls = an.classify(cfg.model, B, inv0.i_phi, inv0.a_transverse, inv0.epsilon,
                          cfg.initial.point.z)
        cls_text = cls.radial.value + (f"/{cls.axial.value}" if cls.axial else "")
    except CurvedMagError as exc:
        cls_text = f"unavailable ({exc})"
    names = ("epsilon", "i_phi", "a_transverse")
    summary = {
        "model": cfg.model.value,
        "B": cfg.b_field,
        "B_effective": B,
        "lambda": cfg.lam,
        "samples": int(rows.shape[0]),
        "t_final": float(rows[-1, 0]),
        "initial_constants": dict(zip(names, map(float, first))),
        "final_constants": dict(zip(names, map(float, last))),
        "drift": tr.drift,
        "classification": cls_text,
        "reason": tr.reason,
        "partial": tr.reason != "completed",
    }
    return tr, rows, summary


def format_summary(summary: dict) -> str:
    lines = [f"model           {summary['model']}",
             f"B               {summary['B']:.17g}"]
    if summary["lambda"] is not None:
        lines.append(f"lambda          {summary['lambda']:.17g} (B_eff = {summary['B_effective']:.17g})")
    lines += [f"samples         {summary['samples']}",
              f"t_final         {summary['t_final']:.17g}",
              f"classification  {summary['classification']}",
              f"reason          {summary['reason']}"]
    for key in ("epsilon", "i_phi", "a_transverse"):
        lines.append(f"{key:<15} initial {summary['initial_constants'][key]:.17g}  "
                     f"final {summary['final_constants'][key]:.17g}  "
                     f"drift {summary['drift'][key]:.3e}")
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    path = Path(args.config)
    try:
        cfg = parse_config(path.read_text(), path.parent)
    except (OSError, ConfigError, CurvedMagError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = cfg.output
    if out is None:
        root = os.environ.get(OUTPUT_DIR_ENV)
        out = (Path(root) if root else path.parent) / (path.stem + ".csv")
    try:
        tr, rows, summary = run_simulation(cfg)
    except CurvedMagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_csv(out, rows)
    summary_path = out.with_suffix(".summary.json")
    summary_path.write_text(json.dumps({**summary, "csv": str(out)}, indent=2) + "\n")
    print(format_summary(summary))
    print(f"wrote {out}")
    if summary["partial"]:
        print(f"error: integration aborted ({tr.reason}); output is partial", file=sys.stderr)
        return EXIT_SINGULAR
    return EXIT_OK


def classify_report(model: SpaceModel, B: float, I: float, A: float, eps: float) -> str:
    cls = an.classify(model, B, I, A, eps)
    rq = an.radial_quadratic(model, B, I, A)
    axial = cls.axial.value if cls.axial else "n/a"
    lines = [f"radial class    {cls.radial.value}",
             f"axial class     {axial}",
             f"physical        {cls.physical}",
             f"quadratic       a={rq.a:.17g} b={rq.b:.17g} c={rq.c:.17g}",
             f"discriminant    {rq.disc:.17g}"]
    if rq.roots is None:
        lines.append("roots           none")
    else:
        lines.append(f"roots           {rq.roots[0]:.17g} {rq.roots[1]:.17g}")
    try:
        cp = an.canonical_parameters(model, B, I, A)
        lines.append(f"canonical       J={cp.j:.17g} C={cp.c_par:.17g}")
        inv = cp.invariant_value
    except CurvedMagError as exc:
        lines.append(f"canonical       unavailable ({exc})")
        inv = B * B - A if model is SpaceModel.HYPERBOLIC else A + B * B
    label = "B^2 - A" if model is SpaceModel.HYPERBOLIC else "A + B^2"
    lines.append(f"invariant       {label} = {inv:.17g}")
    return "\n".join(lines)


def cmd_classify(args) -> int:
    try:
        model = SpaceModel.parse(args.model)
        values = [float(v) for v in (args.B, args.I, args.A, args.eps)]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("arguments must be finite")
        if not model.curved:
            raise ValueError("classification is defined for curved models")
        print(classify_report(model, *values))
    except (ValueError, CurvedMagError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


SUITES = ("conservation", "closed-form", "symmetry", "convergence", "all")
_CURVED = (SpaceModel.HYPERBOLIC, SpaceModel.SPHERICAL)


def run_suite(suite: str, seed: int, cases: int):
    """Reports of one verification suite (``all`` runs every suite)."""
    names = SUITES[:-1] if suite == "all" else (suite,)
    reports = []
    for name in names:
        for model in _CURVED:
            if name == "conservation":
                reports.append(vf.run_conservation_sweep(model, cases, seed=seed))
            elif name == "closed-form":
                reports.append(vf.run_closed_form_sweep(model, cases, seed=seed))
            elif name == "symmetry":
                reports.append(vf.run_symmetry_sweep(model, cases, seed=seed))
            elif name == "convergence":
                reports.append(vf.convergence_report(model))
                reports.append(vf.flat_limit_report(model))
            else:
                raise ValueError(f"unknown suite {name!r}")
    return reports


def cmd_verify(args) -> int:
    if args.cases < 1:
        print("error: --cases must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    reports = run_suite(args.suite, args.seed, args.cases)
    for rep in reports:
        if args.json:
            print(json.dumps(rep.to_record()))
        else:
            print(rep.to_text())
            if rep.details and "order" in rep.details:
                print(f"  fitted order {rep.details['order']:.4f}")
    ok = all(rep.passed for rep in reports)
    if not args.json:
        print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvedmag",
        description="Charged-particle motion in a uniform magnetic field on H3, S3 and E3.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate an orbit from a config file")
    p.add_argument("config", help="key = value config file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="classify a parameter set")
    p.add_argument("model")
    p.add_argument("B")
    p.add_argument("I")
    p.add_argument("A")
    p.add_argument("eps")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run the verification sweeps")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--json", action="store_true", help="one JSON record per report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

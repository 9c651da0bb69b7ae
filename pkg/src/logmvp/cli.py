"""Command-line entry point.

Subcommands::

    logmvp verify               # run the check suite, exit 0 iff every verdict passes
    logmvp sweep                # residual vs radial order, or vs mu
    logmvp bessel               # table of I0(t) and a(t)
    logmvp solve                # walk-on-spheres / walk-on-balls Dirichlet estimates
    logmvp explore-subharmonic  # margins for |x|^2 + c, no verdict

Exit status: 0 success, 1 a check failed, 2 invalid configuration.
A JSON config file (``--config``) may supply any option; flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import mvp
from .errors import LogMVPError
from .fields import (
    HARMONIC,
    HARMONIC_FAMILIES,
    PANHARMONIC,
    PANHARMONIC_FAMILIES,
    counterexample_field,
    field_from_label,
    make_panharmonic,
)
from .montecarlo import WalkConfig, wob_solve, wos_solve
from .quadrature import BallSpec, default_rule, make_rule
from .reports import reports_to_csv, reports_to_json, rows_to_csv, rows_to_json
from .specfun import bessel_i0, coeff_a_eval

CHECKS = ("lemma", "theorem1", "corollary", "a_monotone", "mu_limit")
COMMANDS = ("verify", "sweep", "bessel", "solve", "explore-subharmonic")
SUBHARMONIC_BANNER = "NO VERDICT: open question for strictly subharmonic u; margins are reported, not judged"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    checks: List[str] = field(default_factory=lambda: list(CHECKS))
    fields: Optional[List[str]] = None
    dims: List[int] = field(default_factory=lambda: [2, 3, 4])
    radial_order: Optional[List[int]] = None
    angular_order: Optional[int] = None
    tol: Optional[float] = None
    mu: Optional[List[float]] = None
    seed: int = 0
    walks: int = 10_000
    eps: Optional[float] = None
    samples: int = 3
    x: Optional[List[List[float]]] = None
    boundary: str = "exp_sin"
    workers: int = 1
    t: Optional[List[float]] = None
    out: Optional[str] = None
    format: str = "csv"

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown check id(s): {', '.join(bad)}")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ConfigError(f"dimensions must be >= 2, got {self.dims}")
        if self.radial_order is not None:
            if not self.radial_order:
                raise ConfigError("empty radial order list")
            if any(n < 8 for n in self.radial_order):
                raise ConfigError("radial orders must be >= 8")
        if self.angular_order is not None and self.angular_order < 4:
            raise ConfigError("angular order must be >= 4")
        if self.tol is not None and not self.tol >= 0:
            raise ConfigError("tolerance must be nonnegative")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.walks < 1 or self.samples < 1 or self.workers < 1:
            raise ConfigError("walks, samples and workers must be >= 1")
        if self.mu is not None and any(not math.isfinite(m) or m == 0 for m in self.mu):
            raise ConfigError("mu values must be finite and nonzero")
        for label in self.fields or []:
            try:
                field_from_label(label, 2, mu=1.0)
            except LogMVPError as exc:
                raise ConfigError(str(exc)) from None
        try:
            field_from_label(self.boundary, 2)
        except LogMVPError as exc:
            raise ConfigError(f"boundary: {exc}") from None


def _csv_list(cast):
    def parse(text):
        items = [s for s in text.split(",") if s.strip()]
        try:
            return [cast(s) for s in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse {text!r}") from None
    return parse


def _points(text):
    try:
        return [[float(v) for v in p.split(",")] for p in text.split(";") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse points {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig values")
    common.add_argument("--check", dest="checks", type=_csv_list(str), help="check ids, comma separated")
    common.add_argument("--fields", type=_csv_list(str), help="catalog labels, comma separated")
    common.add_argument("--dims", type=_csv_list(int))
    common.add_argument("--radial-order", dest="radial_order", type=_csv_list(int))
    common.add_argument("--angular-order", dest="angular_order", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--mu", type=_csv_list(float))
    common.add_argument("--seed", type=int)
    common.add_argument("--walks", type=int)
    common.add_argument("--eps", type=float)
    common.add_argument("--samples", type=int, help="random balls per field and dimension")
    common.add_argument("--x", type=_points, help="query points 'x1,x2;x1,x2'")
    common.add_argument("--boundary", help="catalog label whose trace is the boundary data")
    common.add_argument("--workers", type=int)
    common.add_argument("--t", type=_csv_list(float), help="arguments for the bessel table")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="logmvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    known = {f.name for f in dc_fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for k, v in vars(args).items():
        if k in known and v is not None:
            values[k] = v
    values["command"] = args.command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _rule(cfg: RunConfig, d: int, radial_order: Optional[int] = None):
    n = radial_order or (cfg.radial_order[0] if cfg.radial_order else None)
    if n is None and cfg.angular_order is None:
        return default_rule(d)
    return make_rule(d, n or 64, cfg.angular_order)


def _selected(cfg: RunConfig, classification: str, mu: float = 1.0):
    if cfg.fields is None:
        return None
    return [lab for lab in cfg.fields if field_from_label(lab, 2, mu).classification == classification]


def collect_reports(cfg: RunConfig) -> List[mvp.VerificationReport]:
    rng = np.random.default_rng(cfg.seed)
    reports = []
    if "lemma" in cfg.checks:
        labels = _selected(cfg, HARMONIC)
        if labels is None:
            labels = list(HARMONIC_FAMILIES) + ["exp_sin+3"]
        for d in cfg.dims:
            rule = _rule(cfg, d)
            for lab in labels:
                if lab == "counterexample":
                    continue
                f = field_from_label(lab, d)
                for ball in mvp.random_balls(rng, d, cfg.samples):
                    reports.append(mvp.check_lemma(f, ball, cfg.tol, rule))
    if "theorem1" in cfg.checks:
        labels = _selected(cfg, PANHARMONIC)
        if labels is None:
            labels = list(PANHARMONIC_FAMILIES)
        rule = _rule(cfg, 2)
        for mu in cfg.mu or [0.5, 1.0, 2.0, 5.0]:
            for lab in labels:
                f = make_panharmonic(mu, lab, 2)
                for ball in mvp.random_balls(rng, 2, cfg.samples):
                    reports.append(mvp.check_theorem1(f, ball, cfg.tol, rule))
    if "corollary" in cfg.checks:
        u = counterexample_field("unit_disc")
        rule = _rule(cfg, 2)
        tol = 1e-8 if cfg.tol is None else cfg.tol
        for ball in mvp.corollary_balls():
            reports.append(mvp.corollary_report(u, ball, tol, rule))
        reports.append(mvp.nonnegativity_report(u))
    if "a_monotone" in cfg.checks:
        reports.append(mvp.check_a_monotone(np.linspace(0.0, 20.0, 2000)))
    if "mu_limit" in cfg.checks:
        mus = [m for m in (cfg.mu or []) if 0 < m <= 0.1] or [1e-1, 1e-2, 1e-3]
        reports.append(mvp.check_mu_limit(mus, rule=_rule(cfg, 2)))
    return mvp.sort_reports(reports)


def run_verify(cfg: RunConfig) -> int:
    reports = collect_reports(cfg)
    text = reports_to_json(reports) if cfg.format == "json" else reports_to_csv(reports)
    _emit(text, cfg)
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} checks passed", file=sys.stderr)
    return 0 if failed == 0 else 1


SWEEP_BALL = BallSpec((0.1, -0.2), 0.6)


def sweep_rows(cfg: RunConfig) -> List[dict]:
    rows = []
    if "mu_limit" in cfg.checks and "lemma" not in cfg.checks:
        mus = cfg.mu or [1e-1, 1e-2, 1e-3]
        res = mvp.mu_limit_residuals(mus, rule=_rule(cfg, 2))
        for m, r in zip(mus, res):
            rows.append({"sweep": "mu", "parameter": m, "residual": r, "ratio": r / m**2})
        return rows
    orders = cfg.radial_order or [8, 16, 32, 64, 128]
    label = (cfg.fields or ["exp_sin"])[0]
    d = cfg.dims[0]
    f = field_from_label(label, d)
    ball = SWEEP_BALL if d == 2 else BallSpec(list(SWEEP_BALL.center) + [0.0] * (d - 2), SWEEP_BALL.radius)
    for n in orders:
        rep = mvp.check_lemma(f, ball, rule=make_rule(d, n, cfg.angular_order))
        rows.append({"sweep": "radial_order", "parameter": n, "residual": rep.residual,
                     "ratio": None})
    return rows


def run_sweep(cfg: RunConfig) -> int:
    rows = sweep_rows(cfg)
    cols = ("sweep", "parameter", "residual", "ratio")
    _emit(rows_to_json(rows) if cfg.format == "json" else rows_to_csv(rows, cols), cfg)
    return 0


def run_bessel(cfg: RunConfig) -> int:
    ts = cfg.t if cfg.t is not None else [0.5 * k for k in range(41)]
    if any(t < 0 or not math.isfinite(t) for t in ts):
        raise ConfigError("bessel arguments must be finite and >= 0")
    rows = []
    for t in ts:
        ev = coeff_a_eval(t)
        rows.append({"t": float(t), "i0": bessel_i0(t), "a": ev.value, "method": ev.method})
    cols = ("t", "i0", "a", "method")
    _emit(rows_to_json(rows) if cfg.format == "json" else rows_to_csv(rows, cols), cfg)
    return 0


def solve_rows(cfg: RunConfig) -> List[dict]:
    d = cfg.dims[0]
    domain = BallSpec([0.0] * d, 1.0)
    g = field_from_label(cfg.boundary, d)
    wcfg = WalkConfig(n_walks=cfg.walks, eps_shell=cfg.eps, seed=cfg.seed, workers=cfg.workers)
    points = cfg.x or [[0.3, 0.2] + [0.0] * (d - 2)]
    rows = []
    for x in points:
        if len(x) != d:
            raise ConfigError(f"query point {x} does not have {d} coordinates")
        for name, solver in (("wos", wos_solve), ("wob", wob_solve)):
            est = solver(domain, g.evaluate, x, wcfg)
            rows.append({"estimator": name, "x": [float(v) for v in x], "value": est.value,
                         "std_error": est.std_error, "mean_steps": est.mean_steps,
                         "truncated": est.walks_truncated})
    return rows


def run_solve(cfg: RunConfig) -> int:
    rows = solve_rows(cfg)
    cols = ("estimator", "x", "value", "std_error", "mean_steps", "truncated")
    _emit(rows_to_json(rows) if cfg.format == "json" else rows_to_csv(rows, cols), cfg)
    return 0


def run_explore(cfg: RunConfig) -> int:
    print(SUBHARMONIC_BANNER, file=sys.stderr if cfg.out is None else sys.stdout)
    rows = mvp.explore_subharmonic(rule=_rule(cfg, 2))
    cols = ("label", "x", "r", "margin")
    _emit(rows_to_json(rows) if cfg.format == "json" else rows_to_csv(rows, cols), cfg)
    return 0


RUNNERS = {
    "verify": run_verify,
    "sweep": run_sweep,
    "bessel": run_bessel,
    "solve": run_solve,
    "explore-subharmonic": run_explore,
}


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
        return RUNNERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"logmvp: configuration error: {exc}", file=sys.stderr)
        return 2
    except LogMVPError as exc:
        print(f"logmvp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())

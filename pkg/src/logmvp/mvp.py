"""Verification of weighted and unweighted mean-value identities.

For harmonic ``u`` in R^d the log-weighted ball mean

    (1 / (omega_d r^d)) int_{D_r(x)} u(y) log(r / |x - y|) dy

equals ``u(x) / d``.  For 2D panharmonic ``u`` (``Lap u = mu^2 u``) it equals
``a(mu r) u(x)``.  The checks here compute the left side by quadrature and
compare with the predicted right side, producing :class:`VerificationReport`
records.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, MisuseError
from .fields import HARMONIC, PANHARMONIC, ScalarField, make_general, make_harmonic, make_panharmonic
from .quadrature import (
    BallSpec,
    QuadratureRule,
    ball_measure,
    grid_points,
    integrate_ball,
    integrate_ball_with_error,
)
from .specfun import weight_coeff_a

DEFAULT_RTOL = 1e-9
PROVENANCES = ("lemma", "theorem1", "normalization", "oracle")

UNIT_DISC = BallSpec((0.0, 0.0), 1.0)


@dataclass(frozen=True)
class VerificationReport:
    check_id: str
    label: str
    x: tuple
    r: Optional[float]
    d: Optional[int]
    mu: Optional[float]
    observed: float
    expected: float
    residual: float
    tolerance: float
    verdict: str
    expected_provenance: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["x"] = list(self.x)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        data = dict(data)
        data["x"] = tuple(float(v) for v in data.get("x") or ())
        return cls(**data)

    def sort_key(self):
        return (self.check_id, self.label, self.d or 0, self.mu or 0.0, self.x, self.r or 0.0)


def make_report(check_id, label, observed, expected, tolerance, provenance,
                x=(), r=None, d=None, mu=None) -> VerificationReport:
    if provenance not in PROVENANCES:
        raise ConfigurationError(f"unknown provenance {provenance!r}")
    observed, expected = float(observed), float(expected)
    residual = abs(observed - expected)
    return VerificationReport(
        check_id=check_id, label=label, x=tuple(float(v) for v in x),
        r=None if r is None else float(r), d=d, mu=None if mu is None else float(mu),
        observed=observed, expected=expected, residual=residual,
        tolerance=float(tolerance),
        verdict="pass" if residual <= tolerance else "fail",
        expected_provenance=provenance,
    )


def _admissible(field: ScalarField, ball: BallSpec):
    if field.dimension != ball.dimension:
        raise ConfigurationError(
            f"field {field.label} lives in R^{field.dimension}, ball in R^{ball.dimension}"
        )
    hint = field.domain_hint
    if hint is not None and not hint.contains_ball(ball):
        raise DomainError(f"closed ball {ball} is not inside the domain of {field.label}")


def weighted_log_mean(field: ScalarField, ball: BallSpec, rule: Optional[QuadratureRule] = None) -> float:
    _admissible(field, ball)
    return integrate_ball(field, ball, rule, log_weighted=True) / ball_measure(ball)


def _weighted_log_mean_with_error(field, ball, rule):
    _admissible(field, ball)
    value, err = integrate_ball_with_error(field, ball, rule, log_weighted=True)
    m = ball_measure(ball)
    return value / m, err / m


def volume_mean(field: ScalarField, ball: BallSpec, rule: Optional[QuadratureRule] = None) -> float:
    _admissible(field, ball)
    return integrate_ball(field, ball, rule) / ball_measure(ball)


def log_mean_split(field: ScalarField, ball: BallSpec, rule: Optional[QuadratureRule] = None) -> float:
    """The log-weighted mean as ``log(r) * volume mean - mean of u log|x - y|``."""
    _admissible(field, ball)
    m = ball_measure(ball)
    log_abs = integrate_ball(field, ball, rule, radial_weight=np.log) / m
    return math.log(ball.radius) * volume_mean(field, ball, rule) - log_abs


def _default_tol(u_x: float) -> float:
    return DEFAULT_RTOL * (1.0 + abs(u_x))


def check_lemma(field: ScalarField, ball: BallSpec, tol: Optional[float] = None,
                rule: Optional[QuadratureRule] = None) -> VerificationReport:
    """Compare the log-weighted mean with ``u(x) / d`` for harmonic ``u``."""
    if field.classification != HARMONIC:
        raise MisuseError(f"{field.label} is {field.classification}, not harmonic")
    d = ball.dimension
    u_x = field(ball.x)
    observed, err = _weighted_log_mean_with_error(field, ball, rule)
    if tol is None:
        tol = _default_tol(u_x)
    tol = max(tol, 4.0 * err)  # quasi-random sphere rules only
    return make_report("lemma", field.label, observed, u_x / d, tol, "lemma",
                       x=ball.center, r=ball.radius, d=d)


def check_theorem1(field: ScalarField, ball: BallSpec, tol: Optional[float] = None,
                   rule: Optional[QuadratureRule] = None) -> VerificationReport:
    """Compare the log-weighted disc mean with ``a(mu r) u(x)`` for panharmonic ``u``."""
    if field.classification != PANHARMONIC or not field.mu:
        raise MisuseError(f"{field.label} is not panharmonic with nonzero mu")
    if ball.dimension != 2:
        raise MisuseError("the panharmonic identity is only available in 2D")
    u_x = field(ball.x)
    expected = weight_coeff_a(abs(field.mu) * ball.radius) * u_x
    observed = weighted_log_mean(field, ball, rule)
    if tol is None:
        tol = _default_tol(u_x)
    return make_report("theorem1", field.label, observed, expected, tol, "theorem1",
                       x=ball.center, r=ball.radius, d=2, mu=field.mu)


def check_inequality1(field: ScalarField, ball: BallSpec, rule: Optional[QuadratureRule] = None) -> float:
    """Margin ``log-weighted mean - u(x)/2`` in 2D.

    Positive: the strict inequality ``u(x)/2 < mean`` holds at (x, r).
    Zero up to quadrature error: equality, so the strict inequality fails.
    """
    if ball.dimension != 2:
        raise MisuseError("the inequality is stated for discs in R^2")
    return weighted_log_mean(field, ball, rule) - 0.5 * field(ball.x)


def corollary_report(field: ScalarField, ball: BallSpec, tol: float = 1e-8,
                     rule: Optional[QuadratureRule] = None) -> VerificationReport:
    """Equality check: passes when |margin| <= tol, i.e. the strict inequality fails.

    ``observed`` is the raw log-weighted mean, so a small positive margin stays
    visible as ``observed - expected``.
    """
    margin = check_inequality1(field, ball, rule)
    half = 0.5 * field(ball.x)
    return make_report("corollary", field.label, half + margin, half, tol, "lemma",
                       x=ball.center, r=ball.radius, d=2)


def nonnegativity_report(field: ScalarField, domain: BallSpec = UNIT_DISC, n: int = 200) -> VerificationReport:
    """Grid minimum of u over a closed disc.

    ``observed`` is ``min(grid minimum, 0)`` so the residual is the size of
    any negative excursion and the tolerance is zero.
    """
    vals = field.evaluate(grid_points(domain, n))
    m = float(vals.min())
    return make_report("nonnegative", field.label, min(m, 0.0), 0.0, 0.0, "oracle",
                       x=domain.center, r=domain.radius, d=2)


def check_a_monotone(t_grid: Sequence[float]) -> VerificationReport:
    """Strict increase of a(t) along an ascending grid and a(t) > 1/2 for t > 0.

    The residual counts violations; it must be zero.
    """
    t = np.asarray(list(t_grid), dtype=float)
    if t.size == 0:
        raise ConfigurationError("empty grid")
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("t grid must be strictly ascending")
    if np.any(t < 0):
        raise ConfigurationError("t grid must be nonnegative")
    a = weight_coeff_a(t)
    violations = int(np.sum(np.diff(a) <= 0)) + int(np.sum(a[t > 0] <= 0.5))
    if t[0] == 0 and a[0] != 0.5:
        violations += 1
    label = f"a(t) on {t.size} points, a({t[0]:g})={float(a[0])!r}"
    return make_report("a_monotone", label, violations, 0, 0, "oracle",
                       x=(float(t[0]), float(t[-1])))


def mu_limit_residuals(mu_list: Iterable[float], ball: BallSpec = UNIT_DISC,
                       rule: Optional[QuadratureRule] = None) -> List[float]:
    """|log-weighted mean - u(x)/2| for ``u = exp(mu x1)`` at each mu."""
    out = []
    for mu in mu_list:
        if mu == 0:
            raise ConfigurationError("mu = 0 is the harmonic case; use check_lemma")
        u = make_panharmonic(mu, "exp_plane", 2)
        out.append(abs(check_inequality1(u, ball, rule)))
    return out


def check_mu_limit(mu_list: Sequence[float], ball: BallSpec = UNIT_DISC, rel_tol: float = 0.2,
                   rule: Optional[QuadratureRule] = None) -> VerificationReport:
    """Quadratic vanishing of the panharmonic correction as mu -> 0.

    For ``u = exp(mu x1)`` the residual ``|mean - u(x)/2|`` equals
    ``(a(mu r) - 1/2) u(x) ~ u(x) r^2 mu^2 / 32``.  Each normalised ratio
    ``residual / (u(x) mu^2)`` must lie within ``rel_tol`` of ``r^2 / 32``;
    ``observed`` is the ratio farthest from it.  A list of exact zeros is the
    harmonic case and is routed to :func:`check_lemma` on ``u = 1``.
    """
    mus = np.asarray(list(mu_list), dtype=float)
    if mus.size == 0:
        raise ConfigurationError("empty mu list")
    if np.all(mus == 0):
        return check_lemma(make_harmonic("const", 2), ball, rule=rule)
    if np.any((mus <= 0) | (mus > 0.1)):
        raise ConfigurationError("mu values must lie in (0, 0.1]")
    res = np.asarray(mu_limit_residuals(mus, ball, rule))
    u_x = np.exp(mus * ball.center[0])
    ratios = res / (u_x * mus**2)
    expected = ball.radius**2 / 32.0
    worst = float(ratios[np.argmax(np.abs(ratios - expected))])
    return make_report("mu_limit", "exp_plane", worst, expected, rel_tol * expected, "theorem1",
                       x=ball.center, r=ball.radius, d=2, mu=float(mus.min()))


def random_balls(rng: np.random.Generator, d: int, n: int) -> List[BallSpec]:
    """Admissible balls in the unit ball: |x| <= 0.5, r in [0.1, 0.45 (1 - |x|)]."""
    out = []
    for _ in range(n):
        g = rng.standard_normal(d)
        x = g / np.linalg.norm(g) * 0.5 * rng.random() ** (1.0 / d)
        r = rng.uniform(0.1, 0.45 * (1.0 - np.linalg.norm(x)))
        out.append(BallSpec(tuple(x), r))
    return out


def corollary_balls(n_x: int = 5, n_r: int = 5) -> List[BallSpec]:
    """n_x by n_x grid of centres in [-0.5, 0.5]^2, n_r radii strictly inside D_1(0)."""
    out = []
    grid = np.linspace(-0.5, 0.5, n_x)
    for x1 in grid:
        for x2 in grid:
            room = 1.0 - math.hypot(x1, x2)
            for k in range(n_r):
                out.append(BallSpec((x1, x2), room * (k + 0.5) / n_r))
    return out


def explore_subharmonic(offsets: Sequence[float] = (0.0, 1.0, 3.0),
                        balls: Optional[Sequence[BallSpec]] = None,
                        rule: Optional[QuadratureRule] = None) -> List[dict]:
    """Margins of ``|x|^2 + c`` (strictly subharmonic) on sample discs.

    Exploratory only: returns raw margins, never a verdict.
    """
    if balls is None:
        balls = corollary_balls(3, 3)
    rows = []
    for c in offsets:
        f = make_general("norm_sq", 2, offset=c)
        for b in balls:
            rows.append({"label": f.label, "x": list(b.center), "r": b.radius,
                         "margin": check_inequality1(f, b, rule)})
    return rows


def sort_reports(reports: Iterable[VerificationReport]) -> List[VerificationReport]:
    return sorted(reports, key=VerificationReport.sort_key)

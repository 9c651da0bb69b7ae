"""Catalog of analytic test fields with known classification.

Every field evaluates on an ``(n, d)`` array of points and returns ``(n,)``
values; calling it on a single point returns a float.  Harmonic and
panharmonic families that only involve ``x1, x2`` are extended to ``d > 2``
by constancy in the remaining coordinates, which keeps their class.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, DomainError
from .quadrature import BallSpec
from .specfun import bessel_i0

HARMONIC = "harmonic"
PANHARMONIC = "panharmonic"
GENERAL = "general"

HARMONIC_FAMILIES = (
    "const",
    "linear_x1",
    "linear_x2",
    "x1^2-x2^2",
    "x1*x2",
    "re_z^3",
    "im_z^3",
    "re_z^4",
    "exp_sin",
    "exp_cos",
)
PANHARMONIC_FAMILIES = ("exp_plane", "cosh_x1", "radial_i0")
GENERAL_FAMILIES = ("norm_sq",)


@dataclass(frozen=True)
class ScalarField:
    evaluate: Callable[[np.ndarray], np.ndarray]
    dimension: int
    label: str
    classification: str = GENERAL
    mu: Optional[float] = None
    analytic_laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain_hint: Optional[BallSpec] = None

    def __post_init__(self):
        if self.classification not in (HARMONIC, PANHARMONIC, GENERAL):
            raise ConfigurationError(f"unknown classification {self.classification!r}")
        if self.classification == PANHARMONIC and not self.mu:
            raise DomainError("panharmonic fields need a nonzero mu")

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            return float(self.evaluate(pts[None, :])[0])
        return self.evaluate(pts)

    @property
    def screening(self) -> float:
        """mu**2 for panharmonic fields, 0 otherwise."""
        return self.mu**2 if self.classification == PANHARMONIC else 0.0


def _zero(p):
    return np.zeros(len(p))


def _harmonic_base(family: str, d: int, value: float):
    if family == "const":
        return lambda p: np.full(len(p), value)
    m = re.fullmatch(r"linear_x(\d+)", family)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= d:
            raise ConfigurationError(f"{family} needs d >= {k}")
        return lambda p: p[:, k - 1].copy()
    if family == "x1^2-x2^2":
        return lambda p: p[:, 0] ** 2 - p[:, 1] ** 2
    if family == "x1*x2":
        return lambda p: p[:, 0] * p[:, 1]
    m = re.fullmatch(r"(re|im)_z\^(\d+)", family)
    if m:
        part, n = m.group(1), int(m.group(2))
        if n < 1:
            raise ConfigurationError(f"power must be >= 1 in {family}")
        take = np.real if part == "re" else np.imag
        return lambda p: take((p[:, 0] + 1j * p[:, 1]) ** n)
    if family == "exp_sin":
        return lambda p: np.exp(p[:, 0]) * np.sin(p[:, 1])
    if family == "exp_cos":
        return lambda p: np.exp(p[:, 0]) * np.cos(p[:, 1])
    raise ConfigurationError(f"unknown harmonic family {family!r}")


def make_harmonic(family: str, d: int = 2, offset: float = 0.0, value: float = 1.0) -> ScalarField:
    """A harmonic catalog field, optionally shifted by a constant ``offset``.

    ``value`` is the constant for the ``const`` family; the label ``const+5``
    parses to ``value=5``.
    """
    if d < 2:
        raise DomainError(f"harmonic catalog fields need d >= 2, got {d}")
    base = _harmonic_base(family, d, value)
    label = family if offset == 0 else f"{family}{offset:+g}"
    if family == "const" and value != 1.0:
        label = f"const{value:+g}"
    if offset:
        fn = lambda p: base(p) + offset  # noqa: E731
    else:
        fn = base
    return ScalarField(fn, d, label, HARMONIC, analytic_laplacian=_zero)


def make_panharmonic(mu: float, family: str, d: int = 2, theta=None, x0=None) -> ScalarField:
    """Solutions of ``Lap u = mu^2 u``.

    ``exp_plane``: ``exp(mu x . theta)`` for a unit vector theta (default e1).
    ``cosh_x1``: ``cosh(mu x1)``.  ``radial_i0``: ``I0(mu |x - x0|)``, 2D only.
    """
    if not math.isfinite(mu) or mu == 0:
        raise DomainError(f"mu must be a finite nonzero real, got {mu!r}")
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if family == "exp_plane":
        th = np.zeros(d) if theta is None else np.asarray(theta, dtype=float)
        if theta is None:
            th[0] = 1.0
        if th.shape != (d,) or abs(np.linalg.norm(th) - 1.0) > 1e-12:
            raise ConfigurationError(f"theta must be a unit vector in R^{d}")
        fn = lambda p: np.exp(mu * (p @ th))  # noqa: E731
    elif family == "cosh_x1":
        fn = lambda p: np.cosh(mu * p[:, 0])  # noqa: E731
    elif family == "radial_i0":
        if d != 2:
            raise ConfigurationError("radial_i0 is panharmonic only in 2D")
        c = np.zeros(2) if x0 is None else np.asarray(x0, dtype=float)
        fn = lambda p: bessel_i0(mu * np.linalg.norm(p - c, axis=1))  # noqa: E731
    else:
        raise ConfigurationError(f"unknown panharmonic family {family!r}")
    return ScalarField(
        fn, d, family, PANHARMONIC, mu=float(mu),
        analytic_laplacian=lambda p: mu * mu * fn(p),
    )


def make_general(family: str, d: int = 2, offset: float = 0.0) -> ScalarField:
    """Non-harmonic fields; only ``norm_sq`` (``|x|^2 + offset``, Laplacian 2d)."""
    if family != "norm_sq":
        raise ConfigurationError(f"unknown general family {family!r}")
    label = family if offset == 0 else f"{family}{offset:+g}"
    return ScalarField(
        lambda p: np.sum(p * p, axis=1) + offset, d, label, GENERAL,
        analytic_laplacian=lambda p: np.full(len(p), 2.0 * d),
    )


def min_exp_sin(omega: BallSpec, grid: int = 4096, tol: float = 1e-10) -> float:
    """Minimum of ``exp(x1) sin(x2)`` over the closed ball ``omega``.

    The function is harmonic, so the minimum sits on the boundary; it depends
    on ``x1, x2`` only, so the boundary circle of the projected disc suffices.
    Dense search over the angle, then bounded Brent refinement.
    """
    c1, c2 = omega.center[0], omega.center[1]
    R = omega.radius

    def h(theta):
        return math.exp(c1 + R * math.cos(theta)) * math.sin(c2 + R * math.sin(theta))

    thetas = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = np.exp(c1 + R * np.cos(thetas)) * np.sin(c2 + R * np.sin(thetas))
    i = int(np.argmin(vals))
    step = 2 * np.pi / grid
    res = minimize_scalar(
        h, bounds=(thetas[i] - step, thetas[i] + step), method="bounded",
        options={"xatol": tol},
    )
    return float(min(res.fun, vals[i]))


def counterexample_field(mode: str = "unit_disc", c: Optional[float] = None,
                         omega: Optional[BallSpec] = None) -> ScalarField:
    """Nonnegative harmonic field for which the strict log-mean inequality fails.

    ``unit_disc``: ``exp(x1) sin(x2) + 3`` on the unit disc.
    ``half_space``: ``exp(x1) sin(x2) - min_omega exp(x1) sin(x2)`` on a
    bounded ball ``omega`` lying in ``{x1 < c}``.
    """
    if mode == "unit_disc":
        f = make_harmonic("exp_sin", 2, offset=3.0)
        return ScalarField(f.evaluate, 2, "counterexample", HARMONIC,
                           analytic_laplacian=_zero, domain_hint=BallSpec((0.0, 0.0), 1.0))
    if mode != "half_space":
        raise ConfigurationError(f"unknown counterexample mode {mode!r}")
    if c is None or omega is None:
        raise ConfigurationError("half_space mode needs both c and omega")
    if omega.center[0] + omega.radius > c:
        raise ConfigurationError(f"omega reaches x1 = {omega.center[0] + omega.radius} >= c = {c}")
    shift = min_exp_sin(omega)
    d = omega.dimension
    return ScalarField(
        lambda p: np.exp(p[:, 0]) * np.sin(p[:, 1]) - shift, d, "counterexample_shifted",
        HARMONIC, analytic_laplacian=_zero, domain_hint=omega,
    )


def laplacian_residual(field: ScalarField, x, h: float = 1e-4) -> float:
    """Centred second-difference Laplacian minus ``mu^2 u(x)`` (mu = 0 unless panharmonic)."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    d = len(x)
    offsets = h * np.eye(d)
    stencil = np.concatenate([x[None, :], x + offsets, x - offsets])
    if field.domain_hint is not None and not field.domain_hint.contains(stencil).all():
        raise DomainError(f"stencil around {x.tolist()} with h={h} leaves the field's domain")
    u = field.evaluate(stencil)
    lap = (np.sum(u[1 : d + 1]) + np.sum(u[d + 1 :]) - 2 * d * u[0]) / (h * h)
    return float(lap - field.screening * u[0])


_LABEL = re.compile(r"^(?P<family>[a-z0-9_^*\-]+?)(?P<offset>[+-]\d+(\.\d*)?([eE][+-]?\d+)?)?$")


def field_from_label(label: str, d: int = 2, mu: Optional[float] = None) -> ScalarField:
    """Build a catalog field from its CLI label, e.g. ``exp_sin+3`` or ``cosh_x1``."""
    if label == "counterexample":
        return counterexample_field("unit_disc")
    # "x1^2-x2^2" contains a minus, so try exact family names first
    if label in HARMONIC_FAMILIES or re.fullmatch(r"(re|im)_z\^\d+|linear_x\d+", label):
        return make_harmonic(label, d)
    if label in PANHARMONIC_FAMILIES:
        if mu is None:
            raise ConfigurationError(f"{label} needs mu")
        return make_panharmonic(mu, label, d)
    if label in GENERAL_FAMILIES:
        return make_general(label, d)
    m = _LABEL.match(label)
    if m and m.group("offset"):
        fam, off = m.group("family"), float(m.group("offset"))
        if fam in GENERAL_FAMILIES:
            return make_general(fam, d, offset=off)
        if fam == "const":
            return make_harmonic("const", d, value=off)
        return make_harmonic(fam, d, offset=off)
    raise ConfigurationError(f"unknown field label {label!r}")

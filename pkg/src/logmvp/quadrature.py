"""Ball and sphere quadrature in R^d.

A ball integral is split into polar coordinates around the centre,

    int_{D_r(x)} u(y) W(|x - y|) dy
        = int_0^r s^(d-1) W(s) int_{S^(d-1)} u(x + s phi) dsigma(phi) ds,

and discretised by a radial rule on [0, r] times an angular rule on the unit
sphere.  The radial rule is composite Gauss-Legendre on panels graded
geometrically towards s = 0, where ``s log s`` has unbounded derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConfigurationError, DomainError, EvaluationError
from .specfun import ball_volume, sphere_area

DEFAULT_RADIAL_ORDER = 64
RADIAL_PANELS = 4
RADIAL_GRADING = 0.5
# innermost panel [0, h] is mapped by s = h v**3 before Gauss-Legendre
INNER_PANEL_POWER = 3
# points evaluated per field call in integrate_ball
_CHUNK = 1 << 18


@dataclass(frozen=True)
class BallSpec:
    """Closed ball ``D_r(x)`` in R^d."""

    center: tuple
    radius: float
    dimension: int = dc_field(default=None)

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.center))
        object.__setattr__(self, "center", c)
        if self.dimension is None:
            object.__setattr__(self, "dimension", len(c))
        if len(c) != self.dimension:
            raise ConfigurationError(
                f"center has {len(c)} coordinates but dimension is {self.dimension}"
            )
        if self.dimension < 2:
            raise DomainError(f"dimension must be >= 2, got {self.dimension}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"radius must be positive and finite, got {self.radius}")
        if not all(math.isfinite(v) for v in c):
            raise DomainError(f"center must be finite, got {c}")

    @property
    def x(self) -> np.ndarray:
        return np.array(self.center)

    def contains(self, points, closed=True) -> np.ndarray:
        pts = np.atleast_2d(points)
        dist = np.linalg.norm(pts - self.x, axis=1)
        return dist <= self.radius if closed else dist < self.radius

    def contains_ball(self, other: "BallSpec") -> bool:
        """True if ``other`` (closed) lies inside this ball."""
        gap = self.radius - np.linalg.norm(other.x - self.x)
        return bool(gap >= other.radius)


@dataclass(frozen=True)
class SphereRule:
    """Nodes and weights on the unit sphere S^(d-1) in R^d.

    ``random`` rules are quasi-Monte Carlo point sets with equal weights;
    integrals computed with them carry a statistical error estimate.
    """

    nodes: np.ndarray  # (M, d) unit vectors
    weights: np.ndarray  # (M,)
    dimension: int
    random: bool = False


@dataclass(frozen=True)
class QuadratureRule:
    """Radial rule on the reference interval [0, 1] times a sphere rule.

    Radial nodes and weights are scaled by the ball radius at integration
    time, so a single rule serves every ball of a given dimension.
    """

    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere: SphereRule

    @property
    def dimension(self) -> int:
        return self.sphere.dimension

    @property
    def angular_nodes(self) -> np.ndarray:
        return self.sphere.nodes

    @property
    def angular_weights(self) -> np.ndarray:
        return self.sphere.weights

    def radial_for(self, r: float):
        """Radial nodes and weights on [0, r]."""
        return r * self.radial_nodes, r * self.radial_weights


def _gauss_legendre01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def radial_rule(n: int, panels: int = RADIAL_PANELS, ratio: float = RADIAL_GRADING):
    """Composite Gauss-Legendre rule on [0, 1] with n nodes in total.

    Panel breakpoints are ``ratio**k``; the innermost panel [0, ratio**(panels-1)]
    uses the substitution ``s = h v**3`` so that ``s**(d-1) log s`` becomes
    smooth enough for Gauss-Legendre.
    """
    if n < 2 * panels:
        raise ConfigurationError(f"radial order must be >= {2 * panels}, got {n}")
    breaks = [0.0] + [ratio**k for k in range(panels - 1, -1, -1)]
    counts = [n // panels] * panels
    for i in range(n % panels):
        counts[-1 - i] += 1
    nodes, weights = [], []
    for i, (a, b) in enumerate(zip(breaks[:-1], breaks[1:])):
        v, wv = _gauss_legendre01(counts[i])
        if i == 0:
            p = INNER_PANEL_POWER
            nodes.append(b * v**p)
            weights.append(b * p * v ** (p - 1) * wv)
        else:
            nodes.append(a + (b - a) * v)
            weights.append((b - a) * wv)
    return np.concatenate(nodes), np.concatenate(weights)


def _circle_rule(m: int):
    theta = 2.0 * np.pi * np.arange(m) / m
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    return nodes, np.full(m, 2.0 * np.pi / m)


def _tensor_sphere(d: int, order: int):
    if d == 2:
        return _circle_rule(order)
    # S^(d-1) = {(t, sqrt(1 - t^2) psi)}, dsigma = (1 - t^2)^((d-3)/2) dt dsigma_(d-2)
    alpha = 0.5 * (d - 3)
    t, wt = roots_jacobi(max(order // 2, 2), alpha, alpha)
    sub_nodes, sub_w = _tensor_sphere(d - 1, order)
    scale = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [np.column_stack([np.full(len(sub_w), ti), si * sub_nodes]) for ti, si in zip(t, scale)]
    )
    weights = np.concatenate([wi * sub_w for wi in wt])
    return nodes, weights


def _qmc_sphere(d: int, order: int, seed: int = 0):
    from scipy.stats import norm, qmc

    m = max(2, math.ceil(math.log2(order)))
    u = qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)
    g = norm.ppf(u)
    nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
    return nodes, np.full(len(nodes), sphere_area(d) / len(nodes))


def sphere_quadrature(d: int, order: int) -> SphereRule:
    """Angular rule on the unit sphere in R^d.

    d = 2: ``order`` equispaced points.  3 <= d <= 6: Gauss-Jacobi in the
    polar cosines (``order // 2`` nodes per level) tensored down to an
    equispaced circle of ``order`` points.  d > 6: scrambled Sobol points
    pushed to the sphere, at least ``order`` of them, equal weights.
    """
    if d < 2:
        raise DomainError(f"sphere rules need d >= 2, got {d}")
    if order < 4:
        raise ConfigurationError(f"angular order must be >= 4, got {order}")
    if d <= 6:
        nodes, weights = _tensor_sphere(d, order)
        return SphereRule(nodes, weights, d)
    nodes, weights = _qmc_sphere(d, order)
    return SphereRule(nodes, weights, d, random=True)


def default_angular_order(d: int) -> int:
    if d <= 3:
        return 64
    if d <= 6:
        return 16
    return 4096


def make_rule(d: int, radial_order: int = DEFAULT_RADIAL_ORDER, angular_order: Optional[int] = None):
    if angular_order is None:
        angular_order = default_angular_order(d)
    s, w = radial_rule(radial_order)
    return QuadratureRule(s, w, sphere_quadrature(d, angular_order))


_RULE_CACHE: dict = {}


def default_rule(d: int) -> QuadratureRule:
    """Rule at the default orders, cached per dimension."""
    if d not in _RULE_CACHE:
        _RULE_CACHE[d] = make_rule(d)
    return _RULE_CACHE[d]


def radial_log_moment(d: int, r: float) -> float:
    """Closed form of ``int_0^r s^(d-1) log(s) ds = r^d log(r) / d - r^d / d^2``."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d!r}")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    rd = r**d
    return rd * math.log(r) / d - rd / (d * d)


def log_weight(r: float) -> Callable:
    """Radial weight ``s -> log(r / s)``."""
    return lambda s: np.log(r / s)


def _evaluate(field, points: np.ndarray) -> np.ndarray:
    vals = np.asarray(field(points), dtype=float)
    if vals.shape != (len(points),):
        vals = np.broadcast_to(vals, (len(points),))
    bad = ~np.isfinite(vals)
    if bad.any():
        p = points[np.argmax(bad)]
        raise EvaluationError(f"field is not finite at {p.tolist()}", point=tuple(p))
    return vals


def _check_dims(ball: BallSpec, rule: QuadratureRule):
    if ball.dimension != rule.dimension:
        raise ConfigurationError(
            f"ball has dimension {ball.dimension} but the rule has {rule.dimension}"
        )


def _shell_means(field, ball: BallSpec, rule: QuadratureRule, s: np.ndarray) -> np.ndarray:
    # weighted integrand on the (radius, direction) grid, shape (len(s), M)
    phi = rule.angular_nodes
    w = rule.angular_weights
    x = ball.x
    m = len(w)
    step = max(1, _CHUNK // m)
    out = np.empty((len(s), m))
    for i0 in range(0, len(s), step):
        si = s[i0 : i0 + step]
        pts = (x[None, None, :] + si[:, None, None] * phi[None, :, :]).reshape(-1, ball.dimension)
        out[i0 : i0 + step] = _evaluate(field, pts).reshape(len(si), m)
    return out * w


def _radial_factor(rule, ball, weight):
    s, ws = rule.radial_for(ball.radius)
    factor = ws * s ** (ball.dimension - 1)
    if weight is not None:
        factor = factor * weight(s)
    return s, factor


def integrate_ball(
    field,
    ball: BallSpec,
    rule: Optional[QuadratureRule] = None,
    log_weighted: bool = False,
    radial_weight: Optional[Callable] = None,
) -> float:
    """``int_{D_r(x)} u(y) W(|x - y|) dy``.

    W is 1, ``log(r / |x - y|)`` when ``log_weighted``, or an arbitrary
    ``radial_weight(s)``.
    """
    value, _ = integrate_ball_with_error(field, ball, rule, log_weighted, radial_weight)
    return value


def integrate_ball_with_error(field, ball, rule=None, log_weighted=False, radial_weight=None):
    """As :func:`integrate_ball`, also returning a standard-error estimate.

    The error is 0.0 for deterministic rules.  For quasi-random sphere rules
    it is the sample standard error over angular directions.
    """
    if rule is None:
        rule = default_rule(ball.dimension)
    _check_dims(ball, rule)
    if log_weighted and radial_weight is not None:
        raise ConfigurationError("give either log_weighted or radial_weight, not both")
    weight = log_weight(ball.radius) if log_weighted else radial_weight
    s, factor = _radial_factor(rule, ball, weight)
    vals = _shell_means(field, ball, rule, s)  # (n_rad, M), angular weights applied
    per_shell = vals.sum(axis=1)
    value = float(np.sum(factor * per_shell))
    if not rule.sphere.random:
        return value, 0.0
    # radial integral along each direction, then spread over directions
    per_dir = (factor[:, None] * vals).sum(axis=0) * len(rule.angular_weights)
    err = float(np.std(per_dir, ddof=1) / math.sqrt(len(per_dir)))
    return value, err


def angular_mean(func, rule: QuadratureRule) -> float:
    """Average of ``func(phi)`` over the unit sphere, phi given as (M, d) array."""
    phi = rule.angular_nodes
    vals = _evaluate(func, phi)
    return float(np.sum(vals * rule.angular_weights)) / sphere_area(rule.dimension)


def sphere_mean(field, ball: BallSpec, rule: Optional[QuadratureRule] = None) -> float:
    """Mean of u over the sphere of radius r about x, via the rescaled unit sphere."""
    if rule is None:
        rule = default_rule(ball.dimension)
    _check_dims(ball, rule)
    pts = ball.x + ball.radius * rule.angular_nodes
    vals = _evaluate(field, pts)
    return float(np.sum(vals * rule.angular_weights)) / sphere_area(ball.dimension)


def ball_measure(ball: BallSpec) -> float:
    """Lebesgue measure ``omega_d r^d``."""
    return ball_volume(ball.dimension) * ball.radius**ball.dimension


def grid_points(ball: BallSpec, n: int) -> np.ndarray:
    """Points of an n x n grid over the closed disc (2D balls only)."""
    if ball.dimension != 2:
        raise ConfigurationError("grid_points is defined for 2D balls")
    t = np.linspace(-ball.radius, ball.radius, n)
    g = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1).reshape(-1, 2)
    g = g[np.linalg.norm(g, axis=1) <= ball.radius]
    return g + ball.x


__all__: Sequence[str] = [
    "BallSpec",
    "QuadratureRule",
    "SphereRule",
    "angular_mean",
    "ball_measure",
    "default_rule",
    "integrate_ball",
    "integrate_ball_with_error",
    "make_rule",
    "radial_log_moment",
    "radial_rule",
    "sphere_mean",
    "sphere_quadrature",
]

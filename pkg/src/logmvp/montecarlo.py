"""Monte Carlo estimators built on mean-value identities.

Rewriting the harmonic log-weighted identity as ``u(x) = E[u(Y)]`` with
density ``p(y) = d / (omega_d r^d) * log(r / |x - y|)`` on ``D_r(x)`` gives an
exact sampling measure.  Its radial law has the closed-form CDF

    F(s) = (s/r)^d (1 + d log(r/s)),

inverted numerically.  Two Dirichlet solvers on balls are provided: classical
walk-on-spheres (uniform jumps to the largest inscribed sphere) and a walk on
balls whose jumps are drawn from ``p`` inside the largest inscribed ball.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, LogMVPError, MisuseError
from .fields import HARMONIC, ScalarField
from .quadrature import BallSpec
from .rng import CounterRNG

CHUNK = 8192
DEFAULT_EPS_FACTOR = 1e-4
_INVERSE_TOL = 1e-12
_INVERSE_MAXITER = 200


@dataclass(frozen=True)
class WalkConfig:
    n_walks: int = 10_000
    eps_shell: Optional[float] = None  # default 1e-4 * domain radius
    max_steps: int = 10_000
    seed: int = 0
    fixed_radius: Optional[float] = None  # None: jump to distance-to-boundary
    workers: int = 1

    def __post_init__(self):
        if self.n_walks < 1:
            raise ConfigurationError("n_walks must be >= 1")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if self.eps_shell is not None and not self.eps_shell > 0:
            raise ConfigurationError("eps_shell must be positive")
        if self.fixed_radius is not None and not self.fixed_radius > 0:
            raise ConfigurationError("fixed_radius must be positive")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def eps_for(self, domain: BallSpec) -> float:
        eps = DEFAULT_EPS_FACTOR * domain.radius if self.eps_shell is None else self.eps_shell
        if eps >= domain.radius:
            raise ConfigurationError(f"eps_shell {eps} must be below the domain radius {domain.radius}")
        return eps


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_effective: int
    walks_truncated: int = 0
    mean_steps: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def radial_cdf(d: int, r: float, s):
    """P(|Y - x| <= s) under the log-weighted ball measure."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > r):
        raise DomainError(f"s must lie in [0, {r}]")
    t = s_arr / r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(t > 0, t**d * (1.0 - d * np.log(np.where(t > 0, t, 1.0))), 0.0)
    return float(out) if np.ndim(s) == 0 else out


def radial_density(d: int, r: float, s):
    """dF/ds = d^2 s^(d-1) log(r/s) / r^d."""
    s = np.asarray(s, dtype=float)
    return d * d * s ** (d - 1) * np.log(r / s) / r**d


_TABLES: dict = {}


def _bracket_table(d: int):
    if d not in _TABLES:
        t = np.linspace(0.0, 1.0, 2049)
        _TABLES[d] = (t, radial_cdf(d, 1.0, t))
    return _TABLES[d]


def inverse_radial_cdf(d: int, u) -> np.ndarray:
    """Solve ``t^d (1 - d log t) = u`` for t in (0, 1), elementwise.

    A tabulated F gives a starting bracket; Newton steps that leave the
    bracket fall back to bisection (F' vanishes at t = 1, so plain Newton is
    unsafe there).
    """
    u = np.asarray(u, dtype=float)
    tt, ft = _bracket_table(d)
    i = np.clip(np.searchsorted(ft, u) - 1, 0, len(tt) - 2)
    lo, hi = tt[i], tt[i + 1]
    t = lo + (hi - lo) * (u - ft[i]) / (ft[i + 1] - ft[i])
    t = np.where((t > lo) & (t < hi), t, 0.5 * (lo + hi))
    todo = np.arange(u.size)
    t, lo, hi, u_flat = t.ravel().copy(), lo.ravel().copy(), hi.ravel().copy(), u.ravel()
    for _ in range(_INVERSE_MAXITER):
        tk, uk = t[todo], u_flat[todo]
        logt = np.log(tk)
        td = tk**d
        f = td * (1.0 - d * logt) - uk
        below = f < 0
        lo_k = np.where(below, tk, lo[todo])
        hi_k = np.where(below, hi[todo], tk)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / (-d * d * td / tk * logt)
        newton = tk - step
        ok = np.isfinite(newton) & (newton >= lo_k) & (newton <= hi_k)
        t[todo] = np.where(ok, newton, 0.5 * (lo_k + hi_k))
        lo[todo], hi[todo] = lo_k, hi_k
        done = (ok & (np.abs(step) <= _INVERSE_TOL)) | (hi_k - lo_k <= _INVERSE_TOL)
        todo = todo[~done]
        if todo.size == 0:
            return t.reshape(u.shape)
    raise LogMVPError("inverse radial CDF did not converge")


def _log_ball_offsets(stream: CounterRNG, ids, step: int, d: int, r) -> np.ndarray:
    phi, extra = stream.directions(ids, step, d, extra=1)
    t = inverse_radial_cdf(d, extra[:, 0])
    return (np.asarray(r, dtype=float) * t)[:, None] * phi


def sample_log_ball(d: int, r: float, stream: CounterRNG, n: int = 1, step: int = 0) -> np.ndarray:
    """n points of the log-weighted measure on D_r(0), shape (n, d).

    Point i uses the stream of walk index i at the given step.
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    return _log_ball_offsets(stream, np.arange(n, dtype=np.uint64), step, d, r)


def _summarise(values: np.ndarray, truncated: int = 0, mean_steps: float = 1.0) -> Estimate:
    n = len(values)
    ref = values[0]
    dev = values - ref
    value = float(ref + np.sum(dev) / n)
    se = float(np.std(dev, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(value, se, n, int(truncated), float(mean_steps))


def _map_chunks(fn, n: int, workers: int):
    bounds = [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    if workers == 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    return [np.concatenate(k) for k in zip(*parts)]


def estimate_onestep(field: ScalarField, ball: BallSpec, cfg: WalkConfig) -> Estimate:
    """Average of u(Y) with Y drawn from the log-weighted measure on the ball."""
    if field.classification != HARMONIC:
        raise MisuseError(f"{field.label} is not harmonic; the estimator would be biased")
    hint = field.domain_hint
    if hint is not None and not hint.contains_ball(ball):
        raise DomainError(f"{ball} is not inside the domain of {field.label}")
    stream = CounterRNG(cfg.seed)
    x = ball.x

    def run(a, b):
        ids = np.arange(a, b, dtype=np.uint64)
        y = x + _log_ball_offsets(stream, ids, 0, ball.dimension, ball.radius)
        return (np.asarray(field.evaluate(y), dtype=float),)

    (values,) = _map_chunks(run, cfg.n_walks, cfg.workers)
    return _summarise(values)


def _project(domain: BallSpec, pts: np.ndarray) -> np.ndarray:
    rel = pts - domain.x
    norm = np.linalg.norm(rel, axis=1, keepdims=True)
    e1 = np.zeros(domain.dimension)
    e1[0] = 1.0
    unit = np.where(norm > 0, rel / np.where(norm > 0, norm, 1.0), e1)
    return domain.x + domain.radius * unit


def _walk(domain: BallSpec, boundary_data: Callable, x, cfg: WalkConfig, interior: bool) -> Estimate:
    x = np.asarray(x, dtype=float)
    if x.shape != (domain.dimension,):
        raise ConfigurationError(f"x must have {domain.dimension} coordinates")
    if np.linalg.norm(x - domain.x) >= domain.radius:
        raise DomainError(f"x = {x.tolist()} is not inside the domain")
    eps = cfg.eps_for(domain)
    stream = CounterRNG(cfg.seed)
    d, c, R = domain.dimension, domain.x, domain.radius

    def run(a, b):
        n = b - a
        ids = np.arange(a, b, dtype=np.uint64)
        pos = np.tile(x, (n, 1))
        steps = np.zeros(n, dtype=np.int64)
        scores = np.empty(n)
        active = np.arange(n)
        for step in range(cfg.max_steps):
            dist = R - np.linalg.norm(pos[active] - c, axis=1)
            hit = dist < eps
            if hit.any():
                idx = active[hit]
                scores[idx] = boundary_data(_project(domain, pos[idx]))
                active, dist = active[~hit], dist[~hit]
            if active.size == 0:
                break
            rho = dist if cfg.fixed_radius is None else np.minimum(dist, cfg.fixed_radius)
            if interior:
                jump = _log_ball_offsets(stream, ids[active], step, d, rho)
            else:
                phi, _ = stream.directions(ids[active], step, d)
                jump = rho[:, None] * phi
            pos[active] += jump
            steps[active] += 1
        truncated = np.zeros(n, dtype=bool)
        if active.size:
            truncated[active] = True
            scores[active] = boundary_data(_project(domain, pos[active]))
        return scores, steps, truncated

    scores, steps, truncated = _map_chunks(run, cfg.n_walks, cfg.workers)
    if not np.all(np.isfinite(scores)):
        raise LogMVPError("boundary data returned non-finite values")
    return _summarise(scores, int(truncated.sum()), float(np.mean(steps)))


def wos_solve(domain: BallSpec, boundary_data: Callable, x, cfg: WalkConfig) -> Estimate:
    """Walk-on-spheres estimate of the harmonic extension of ``boundary_data`` at x.

    ``boundary_data`` takes an ``(n, d)`` array of boundary points.  Walks stop
    inside the eps shell and score the data at the radial projection; walks
    still running after ``max_steps`` are scored the same way and counted as
    truncated.
    """
    return _walk(domain, boundary_data, x, cfg, interior=False)


def wob_solve(domain: BallSpec, boundary_data: Callable, x, cfg: WalkConfig) -> Estimate:
    """Walk-on-balls variant: each jump is drawn from the log-weighted ball measure."""
    return _walk(domain, boundary_data, x, cfg, interior=True)

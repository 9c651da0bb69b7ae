import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from logmvp import BallSpec, ConfigurationError, DomainError, MisuseError, make_harmonic, make_panharmonic
from logmvp.montecarlo import (
    Estimate,
    WalkConfig,
    estimate_onestep,
    inverse_radial_cdf,
    radial_cdf,
    radial_density,
    sample_log_ball,
    wob_solve,
    wos_solve,
)
from logmvp.rng import CounterRNG, philox4x32
from logmvp.specfun import ball_volume

DISC = BallSpec((0.0, 0.0), 1.0)


def exp_sin_trace(p):
    return np.exp(p[:, 0]) * np.sin(p[:, 1])


TARGET = math.exp(0.3) * math.sin(0.2)


# Philox known-answer vectors ---------------------------------------------

@pytest.mark.parametrize(
    "ctr, key, expected",
    [
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
        (
            (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
            (0xA4093822, 0x299F31D0),
            (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
        ),
    ],
)
def test_philox_known_answers(ctr, key, expected):
    assert tuple(int(w) for w in philox4x32(ctr, key)) == expected


def test_stream_is_pure_function_of_walk_and_step():
    rng = CounterRNG(7)
    a = rng.uniforms(np.arange(10, dtype=np.uint64), 3, 5)
    b = rng.uniforms(np.array([4, 9], dtype=np.uint64), 3, 5)
    np.testing.assert_array_equal(a[[4, 9]], b)
    assert not np.array_equal(a, rng.uniforms(np.arange(10, dtype=np.uint64), 4, 5))
    assert np.all((a > 0) & (a < 1))


def test_seed_range():
    with pytest.raises(ConfigurationError):
        CounterRNG(2**64)
    with pytest.raises(ConfigurationError):
        CounterRNG(-1)


# radial CDF --------------------------------------------------------------

def test_radial_cdf_examples():
    assert radial_cdf(3, 2.0, 2.0) == 1.0
    assert radial_cdf(2, 1.0, 0.0) == 0.0
    assert radial_cdf(2, 2.0, 1.0) == pytest.approx(0.25 * (1 + 2 * math.log(2)), rel=1e-15)
    assert radial_cdf(2, 1.0, 0.5) == pytest.approx(0.596574, abs=1e-6)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_radial_cdf_against_integrated_density(d):
    # integrate the normalised weight over the ball of radius s directly
    r, s = 1.3, 0.55
    norm = d / (ball_volume(d) * r**d)
    area = d * ball_volume(d)
    with mpmath.workdps(30):
        ref = float(mpmath.quad(lambda q: norm * area * q ** (d - 1) * mpmath.log(r / q), [0, s]))
    assert radial_cdf(d, r, s) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_radial_cdf_strictly_increasing(d):
    s = np.linspace(0, 1, 1000)
    assert np.all(np.diff(radial_cdf(d, 1.0, s)) > 0)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_radial_cdf_derivative_is_density(d):
    r, h = 1.5, 1e-6
    s = np.linspace(0.05, 1.45, 50)
    fd = (radial_cdf(d, r, s + h) - radial_cdf(d, r, s - h)) / (2 * h)
    np.testing.assert_allclose(fd, radial_density(d, r, s), atol=1e-6)


@pytest.mark.parametrize("s", [-1e-9, 1.0 + 1e-9])
def test_radial_cdf_domain(s):
    with pytest.raises(DomainError):
        radial_cdf(2, 1.0, s)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_inverse_cdf_roundtrip(d):
    u = np.concatenate([np.linspace(0, 1, 1001), [1e-300, 1 - 1e-16]])
    t = inverse_radial_cdf(d, u)
    assert np.all((t >= 0) & (t <= 1))
    np.testing.assert_allclose(radial_cdf(d, 1.0, t), u, atol=1e-11)


# sampler -----------------------------------------------------------------

def test_sampler_mean_radius():
    n = 10**6
    s = np.linalg.norm(sample_log_ball(2, 1.0, CounterRNG(11), n), axis=1)
    se = s.std(ddof=1) / math.sqrt(n)
    assert abs(s.mean() - 4 / 9) <= 4 * se


def test_sampler_ks():
    n = 10**5
    s = np.linalg.norm(sample_log_ball(3, 0.8, CounterRNG(12), n), axis=1)
    ks = stats.kstest(s, lambda q: radial_cdf(3, 0.8, np.clip(q, 0, 0.8))).statistic
    assert ks <= 1.95 / math.sqrt(n)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_sampler_direction_means(d):
    n = 10**6
    y = sample_log_ball(d, 1.0, CounterRNG(13), n)
    phi = y / np.linalg.norm(y, axis=1, keepdims=True)
    assert np.all(np.abs(phi.mean(axis=0)) <= 4 / math.sqrt(n / d))


def test_sampler_domain():
    with pytest.raises(DomainError):
        sample_log_ball(2, 0.0, CounterRNG(0))
    with pytest.raises(DomainError):
        sample_log_ball(1, 1.0, CounterRNG(0))


# one-step estimator ------------------------------------------------------

def test_onestep_constant_exact():
    est = estimate_onestep(make_harmonic("const", 3, value=2.75), BallSpec((0, 0, 0), 0.4), WalkConfig(n_walks=5000))
    assert est.value == 2.75 and est.std_error == 0.0


def test_onestep_exp_sin():
    est = estimate_onestep(make_harmonic("exp_sin", 2, offset=3.0), BallSpec((0, 0), 0.5), WalkConfig(n_walks=10**5, seed=3))
    assert abs(est.value - 3.0) <= 4 * est.std_error


def test_onestep_odd_field():
    est = estimate_onestep(make_harmonic("linear_x1", 2), BallSpec((0, 0), 0.7), WalkConfig(n_walks=10**5, seed=4))
    assert abs(est.value) <= 4 * est.std_error


def test_onestep_re_z3():
    est = estimate_onestep(make_harmonic("re_z^3"), BallSpec((0.2, 0.1), 0.3), WalkConfig(n_walks=10**5, seed=5))
    assert abs(est.value - 0.002) <= 4 * est.std_error
    assert est.n_effective == 10**5


def test_onestep_unbiased_over_repetitions():
    u = make_harmonic("re_z^3")
    ball = BallSpec((0.2, 0.1), 0.3)
    vals = np.array([estimate_onestep(u, ball, WalkConfig(n_walks=4000, seed=1000 + k)).value for k in range(50)])
    z = (vals.mean() - 0.002) / (vals.std(ddof=1) / math.sqrt(len(vals)))
    assert -4 <= z <= 4


def test_onestep_misuse():
    with pytest.raises(MisuseError):
        estimate_onestep(make_panharmonic(1.0, "exp_plane"), DISC, WalkConfig(n_walks=10))


# walk solvers ------------------------------------------------------------

@pytest.mark.parametrize("solver", [wos_solve, wob_solve])
def test_constant_boundary_exact(solver):
    est = solver(DISC, lambda p: np.full(len(p), 5.0), (0.1, 0.4), WalkConfig(n_walks=3000))
    assert est.value == 5.0 and est.std_error == 0.0


@pytest.fixture(scope="module")
def exp_sin_estimates():
    cfg = WalkConfig(n_walks=10**5, eps_shell=1e-4, seed=42)
    return wos_solve(DISC, exp_sin_trace, (0.3, 0.2), cfg), wob_solve(DISC, exp_sin_trace, (0.3, 0.2), cfg)


def test_wos_exp_sin(exp_sin_estimates):
    wos, _ = exp_sin_estimates
    assert abs(wos.value - TARGET) <= 4 * wos.std_error
    assert wos.walks_truncated == 0


def test_wob_exp_sin(exp_sin_estimates):
    _, wob = exp_sin_estimates
    assert abs(wob.value - TARGET) <= 4 * wob.std_error


def test_wos_wob_agree(exp_sin_estimates):
    wos, wob = exp_sin_estimates
    assert abs(wos.value - wob.value) <= 4 * math.hypot(wos.std_error, wob.std_error)


def test_wob_walks_longer(exp_sin_estimates):
    wos, wob = exp_sin_estimates
    assert wob.mean_steps > wos.mean_steps


@pytest.mark.parametrize("solver", [wos_solve, wob_solve])
def test_cos2theta_at_centre(solver):
    def g(p):
        th = np.arctan2(p[:, 1], p[:, 0])
        return np.cos(2 * th)

    est = solver(DISC, g, (0.0, 0.0), WalkConfig(n_walks=20000, seed=8))
    assert abs(est.value) <= 4 * est.std_error


@pytest.mark.parametrize("solver", [wos_solve, wob_solve])
def test_three_dimensional_problem(solver):
    ball = BallSpec((0, 0, 0), 1.0)
    u = make_harmonic("x1^2-x2^2", 3)
    x = (0.2, -0.3, 0.1)
    est = solver(ball, u.evaluate, x, WalkConfig(n_walks=20000, seed=9))
    assert abs(est.value - u(x)) <= 4 * est.std_error


@pytest.mark.parametrize("solver", [wos_solve, wob_solve])
def test_reproducible_across_workers(solver):
    cfg1 = WalkConfig(n_walks=20000, seed=77, workers=1)
    cfg4 = WalkConfig(n_walks=20000, seed=77, workers=4)
    a = solver(DISC, exp_sin_trace, (0.3, 0.2), cfg1)
    b = solver(DISC, exp_sin_trace, (0.3, 0.2), cfg4)
    c = solver(DISC, exp_sin_trace, (0.3, 0.2), cfg1)
    assert a.to_json() == b.to_json() == c.to_json()


def test_different_seeds_differ():
    a = wos_solve(DISC, exp_sin_trace, (0.3, 0.2), WalkConfig(n_walks=1000, seed=1))
    b = wos_solve(DISC, exp_sin_trace, (0.3, 0.2), WalkConfig(n_walks=1000, seed=2))
    assert a.value != b.value


def test_truncated_walks_are_scored_and_counted():
    est = wos_solve(DISC, exp_sin_trace, (0.3, 0.2), WalkConfig(n_walks=500, max_steps=1, seed=3))
    assert est.walks_truncated == 500
    assert est.n_effective == 500 and math.isfinite(est.value)


def test_fixed_radius_policy_unbiased():
    est = wos_solve(DISC, exp_sin_trace, (0.3, 0.2), WalkConfig(n_walks=20000, fixed_radius=0.1, seed=5))
    assert abs(est.value - TARGET) <= 4 * est.std_error
    assert est.mean_steps > 20


def test_solver_errors():
    with pytest.raises(DomainError):
        wos_solve(DISC, exp_sin_trace, (1.0, 0.0), WalkConfig(n_walks=10))
    with pytest.raises(ConfigurationError):
        wos_solve(DISC, exp_sin_trace, (0.0, 0.0), WalkConfig(n_walks=10, eps_shell=2.0))
    with pytest.raises(ConfigurationError):
        wos_solve(DISC, exp_sin_trace, (0.0, 0.0, 0.0), WalkConfig(n_walks=10))


@pytest.mark.parametrize("kwargs", [{"n_walks": 0}, {"max_steps": 0}, {"eps_shell": 0.0}, {"workers": 0}])
def test_walk_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        WalkConfig(**kwargs)


def test_estimate_json_fields():
    est = Estimate(1.0, 0.1, 10, 0, 3.5)
    assert set(est.to_dict()) == {"value", "std_error", "n_effective", "walks_truncated", "mean_steps"}

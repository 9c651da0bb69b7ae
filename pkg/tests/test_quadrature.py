import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from logmvp import (
    BallSpec,
    ConfigurationError,
    DomainError,
    EvaluationError,
    ball_volume,
    integrate_ball,
    make_harmonic,
    make_rule,
    radial_log_moment,
    sphere_mean,
    sphere_quadrature,
)
from logmvp.quadrature import angular_mean, default_rule, integrate_ball_with_error, radial_rule
from logmvp.specfun import sphere_area


def const(c, d):
    return make_harmonic("const", d, value=c)


# radial_log_moment ---------------------------------------------------------

def test_radial_log_moment_examples():
    assert radial_log_moment(2, 1.0) == pytest.approx(-0.25, abs=1e-16)
    assert radial_log_moment(3, 1.0) == pytest.approx(-1 / 9, abs=1e-16)
    assert radial_log_moment(2, math.e) == pytest.approx(math.e**2 / 4, rel=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, math.e])
def test_radial_log_moment_against_adaptive(d, r):
    # adaptive tanh-sinh at 30 digits copes with the endpoint log singularity
    with mpmath.workdps(30):
        ref = float(mpmath.quad(lambda s: s ** (d - 1) * mpmath.log(s), [0, 1, r] if r > 1 else [0, r]))
    assert radial_log_moment(d, r) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("d, r", [(0, 1.0), (2, 0.0), (2, -1.0)])
def test_radial_log_moment_domain(d, r):
    with pytest.raises(DomainError):
        radial_log_moment(d, r)


# sphere rules --------------------------------------------------------------

def test_circle_rule_constant():
    rule = sphere_quadrature(2, 8)
    assert rule.weights.sum() == pytest.approx(2 * math.pi, rel=1e-15)


def test_circle_rule_cos_squared():
    rule = sphere_quadrature(2, 16)
    val = np.sum(rule.weights * rule.nodes[:, 0] ** 2)
    assert abs(val - math.pi) <= 1e-14


def test_sphere3_rule_x3_squared():
    rule = sphere_quadrature(3, 8)
    val = np.sum(rule.weights * rule.nodes[:, 2] ** 2)
    assert abs(val - 4 * math.pi / 3) <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_sphere_rule_invariants(d):
    rule = sphere_quadrature(d, 16)
    assert rule.weights.sum() == pytest.approx(sphere_area(d), rel=1e-13)
    assert np.all(rule.weights > 0)
    np.testing.assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_sphere_rule_second_moments(d):
    # int phi_k^2 dsigma = |S^(d-1)| / d by symmetry, all k
    rule = sphere_quadrature(d, 12)
    moments = rule.weights @ rule.nodes**2
    np.testing.assert_allclose(moments, sphere_area(d) / d, rtol=1e-13)


def test_high_dimension_rule_is_random_and_normalised():
    rule = sphere_quadrature(8, 1024)
    assert rule.random
    assert len(rule.weights) >= 1024
    assert rule.weights.sum() == pytest.approx(sphere_area(8), rel=1e-13)
    np.testing.assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-14)


def test_sphere_order_too_small():
    with pytest.raises(ConfigurationError):
        sphere_quadrature(2, 3)


# radial rule ---------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("r", [0.3, 1.0, 2.0])
def test_radial_weights_integrate_constant_field(d, r):
    s, w = default_rule(2).radial_for(r)
    assert np.sum(w * s ** (d - 1)) == pytest.approx(r**d / d, rel=1e-12)


def test_radial_nodes_inside_interval():
    s, w = radial_rule(64)
    assert np.all((s > 0) & (s < 1)) and np.all(w > 0)


def test_radial_order_too_small():
    with pytest.raises(ConfigurationError):
        radial_rule(4)


# integrate_ball ------------------------------------------------------------

def test_log_weighted_constant_disc():
    val = integrate_ball(const(1.0, 2), BallSpec((0, 0), 1.0), log_weighted=True)
    assert val == pytest.approx(math.pi / 2, rel=1e-13)


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_log_weighted_odd_field_vanishes(r):
    val = integrate_ball(make_harmonic("linear_x1", 2), BallSpec((0, 0), r), log_weighted=True)
    assert abs(val) <= 1e-14


def test_unweighted_constant_ball3():
    val = integrate_ball(const(1.0, 3), BallSpec((0, 0, 0), 2.0))
    assert val == pytest.approx(32 * math.pi / 3, rel=1e-13)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_log_weighted_constant_matches_closed_form(d, r):
    ball = BallSpec([0.0] * d, r)
    val = integrate_ball(const(1.0, d), ball, log_weighted=True)
    # int log(r/|y|) dy = d omega_d ((r^d/d) log r - int_0^r s^(d-1) log s ds)
    expected = d * ball_volume(d) * (r**d / d * math.log(r) - radial_log_moment(d, r))
    assert val == pytest.approx(expected, rel=1e-11)


def test_log_weighted_against_polar_dblquad():
    # independent route: scipy adaptive 2D quadrature in polar coordinates
    u = make_harmonic("exp_cos", 2)
    x, r = np.array([0.2, -0.1]), 0.7

    def integrand(s, th):
        y = x + s * np.array([math.cos(th), math.sin(th)])
        return u(y) * math.log(r / s) * s if s > 0 else 0.0

    ref, _ = integrate.dblquad(integrand, 0, 2 * math.pi, 0, r, epsabs=1e-13, epsrel=1e-13)
    val = integrate_ball(u, BallSpec(x, r), log_weighted=True)
    assert val == pytest.approx(ref, rel=1e-10)


def test_convergence_with_radial_order():
    u = make_harmonic("exp_sin", 2, offset=0.0)
    ball = BallSpec((0.1, -0.2), 0.6)
    orders = [8, 16, 32, 64, 128]
    ref = integrate_ball(u, ball, make_rule(2, 256), log_weighted=True)
    res = [abs(integrate_ball(u, ball, make_rule(2, n), log_weighted=True) - ref) for n in orders]
    floor = 1e-13
    for a, b in zip(res, res[1:]):
        assert b < a or b <= floor


def test_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        integrate_ball(const(1.0, 2), BallSpec((0, 0), 1.0), make_rule(3))


def test_nonfinite_field_reports_node():
    f = make_harmonic("const", 2)
    bad = type(f)(lambda p: np.where(p[:, 0] > 0.5, np.nan, 1.0), 2, "bad")
    with pytest.raises(EvaluationError) as info:
        integrate_ball(bad, BallSpec((0, 0), 1.0))
    assert info.value.point[0] > 0.5


def test_deterministic_error_estimate_is_zero():
    _, err = integrate_ball_with_error(const(1.0, 3), BallSpec((0, 0, 0), 1.0))
    assert err == 0.0


def test_random_rule_error_estimate_positive():
    u = make_harmonic("exp_cos", 7)
    _, err = integrate_ball_with_error(u, BallSpec([0.1] * 7, 0.3), make_rule(7, 32, 512), log_weighted=True)
    assert err > 0


# sphere_mean ---------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4])
def test_sphere_mean_constant(d):
    assert sphere_mean(const(2.5, d), BallSpec([0.3] + [0.0] * (d - 1), 0.4)) == pytest.approx(2.5, rel=1e-14)


def test_sphere_mean_odd():
    assert abs(sphere_mean(make_harmonic("linear_x1", 3), BallSpec((0, 0, 0), 0.8))) <= 1e-15


def test_sphere_mean_norm_squared():
    from logmvp import make_general

    assert sphere_mean(make_general("norm_sq", 2), BallSpec((0, 0), 0.7)) == pytest.approx(0.49, rel=1e-14)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_sphere_mean_rescaling_bit_identical(d):
    u = make_harmonic("exp_sin", d)
    ball = BallSpec(np.linspace(0.1, 0.3, d), 0.45)
    rule = default_rule(d)
    a = sphere_mean(u, ball, rule)
    b = angular_mean(lambda phi: u.evaluate(ball.x + ball.radius * phi), rule)
    assert a == b


@pytest.mark.parametrize("d", [2, 3, 4])
def test_harmonic_sphere_mean_property(d):
    u = make_harmonic("exp_cos", d)
    ball = BallSpec(np.full(d, 0.1), 0.5)
    assert sphere_mean(u, ball) == pytest.approx(u(ball.x), rel=1e-13)


def test_ballspec_validation():
    with pytest.raises(DomainError):
        BallSpec((0, 0), 0.0)
    with pytest.raises(DomainError):
        BallSpec((0,), 1.0)
    with pytest.raises(ConfigurationError):
        BallSpec((0, 0), 1.0, dimension=3)


def test_convergence_exp_y1_against_doubled_order():
    u = type(make_harmonic("const"))(lambda p: np.exp(p[:, 0]), 2, "exp_y1")
    ball = BallSpec((0.2, 0.1), 0.5)
    res = []
    for n in [8, 16, 32, 64, 128]:
        val = integrate_ball(u, ball, make_rule(2, n), log_weighted=True)
        ref = integrate_ball(u, ball, make_rule(2, 2 * n), log_weighted=True)
        res.append(abs(val - ref))
    for a, b in zip(res, res[1:]):
        assert b < a or b <= 1e-13

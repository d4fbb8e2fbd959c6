# -*- coding: utf-8 -*-
import math

import pytest

from src.expdyn.data_models import TAU, ExpParameter, MisiurewiczCertificate
from src.expdyn.exceptions import EscapeRight, ExpDynError, PreconditionViolation, VerificationFailed
from src.expdyn.misiurewicz_solver import MisiurewiczSolver
from src.expdyn.orbit_engine import OrbitEngine
from src.expdyn.sampling import STREAM_CONSTANTS, disk_points

TWO_PI_I = complex(0.0, TAU)
FOUR_PI_I = complex(0.0, 2 * TAU)


@pytest.fixture
def solver(config):
    return MisiurewiczSolver(config)


@pytest.fixture
def cert_2pi():
    return MisiurewiczCertificate(
        lam=ExpParameter(lam=TWO_PI_I), preperiod=1, period=1, residual=0.0,
        cycle_mult_log_mod=math.log(TAU), postsingular_bound=TAU,
    )


def test_xi_orbit_first_step(solver):
    for lam in (0.3, -1.0 + 2.0j, TWO_PI_I):
        orbit = solver.xi_orbit(lam, 1)
        assert orbit.xi[1] == lam
        assert orbit.dxi[1] == 1


def test_xi_orbit_fixed_point(solver):
    assert solver.xi_orbit(TWO_PI_I, 3).xi == [0j, TWO_PI_I, TWO_PI_I, TWO_PI_I]


def test_xi_orbit_derivative_example(solver):
    orbit = solver.xi_orbit(1.0, 2)
    assert orbit.xi[2] == pytest.approx(math.e)
    assert orbit.dxi[2] == pytest.approx(2 * math.e)


def test_xi_orbit_escape(solver):
    with pytest.raises(EscapeRight) as info:
        solver.xi_orbit(1.0, 10)
    assert info.value.index == 4
    orbit = solver.xi_orbit(1.0, 10, truncate=True)
    assert orbit.escaped_at == 4
    assert orbit.n == 4


def test_xi_orbit_matches_orbit_engine(solver, config):
    trace = OrbitEngine(config).iterate_orbit(0.5 + 0.5j, 0j, 30)
    assert solver.xi_orbit(0.5 + 0.5j, 30).xi == trace.points


@pytest.mark.parametrize("lam", [0.3, -1.0, 0.5 + 0.5j, -2.0 + 0.1j])
def test_dxi_matches_finite_differences(solver, lam):
    h = 1e-9
    base = solver.xi_orbit(lam, 20)
    shifted = solver.xi_orbit(lam + h, 20)
    for n in range(1, 21):
        if abs(base.dxi[n]) < 1e-3:
            continue
        numeric = (shifted.xi[n] - base.xi[n]) / h
        assert abs(base.dxi[n] - numeric) / abs(base.dxi[n]) < 1e-5


@pytest.mark.parametrize("seed, expected", [(6.0j, TWO_PI_I), (12.3j, FOUR_PI_I)])
def test_solve_misiurewicz_fixed_points(solver, seed, expected):
    cert = solver.solve_misiurewicz(seed, 1, 1, 1e-12)
    assert cert.lam.lam == pytest.approx(expected, abs=1e-12)
    assert (cert.preperiod, cert.period) == (1, 1)
    assert cert.cycle_mult_log_mod == pytest.approx(math.log(abs(expected)), abs=1e-12)
    assert cert.postsingular_bound == pytest.approx(abs(expected))


def test_solve_relabels_to_minimal_pair(solver):
    cert = solver.solve_misiurewicz(6.25j, 2, 2, 1e-12)
    assert (cert.preperiod, cert.period) == (1, 1)


def test_solve_from_grid_seeds(solver):
    found = []
    for re in (1.0, 2.0, 3.0, 4.0):
        for im in (1.0, 2.0, 3.0, 4.0):
            try:
                found.append(solver.solve_misiurewicz(complex(re, im), 2, 1, 1e-12))
            except ExpDynError:
                continue
    assert found
    for cert in found:
        xi = solver.xi_orbit(cert.lam, cert.preperiod + cert.period).xi
        scale = max(1.0, abs(xi[cert.preperiod]))
        assert abs(xi[-1] - xi[cert.preperiod]) < 1e-12 * scale
        assert cert.cycle_mult_log_mod > 0
        assert abs(cert.lam.lam) > 1 / math.e


def test_newton_quadratic_tail(solver):
    history = []
    solver.solve_misiurewicz(6.0j, 1, 1, 1e-12, history=history)
    assert history[-1] <= 1e-12 * TAU
    for before, after in zip(history, history[1:]):
        if before < 1e-4:
            assert after <= max(100 * before ** 2, 1e-14)


def test_solve_rejects_bad_indices(solver):
    with pytest.raises(PreconditionViolation):
        solver.solve_misiurewicz(6.0j, 0, 1)


@pytest.mark.parametrize("seed", [6.0j, 12.3j])
def test_verify_misiurewicz(solver, seed):
    cert = solver.solve_misiurewicz(seed, 1, 1, 1e-12)
    report = solver.verify_misiurewicz(cert, 100)
    assert report.verified
    assert report.periods_checked == 99


def test_verify_exact_fixed_point_has_no_drift(solver, cert_2pi):
    report = solver.verify_misiurewicz(cert_2pi, 100)
    assert report.max_drift == 0.0
    assert report.drift_per_period == 0.0


def test_verify_rejects_perturbed_certificate(solver, cert_2pi):
    perturbed = cert_2pi.model_copy(update={"lam": ExpParameter(lam=cert_2pi.lam.lam + 1e-6)})
    with pytest.raises(VerificationFailed) as info:
        solver.verify_misiurewicz(perturbed, 100)
    assert info.value.index is not None
    assert info.value.index <= 10


def test_verify_rejects_short_horizon(solver, cert_2pi):
    with pytest.raises(PreconditionViolation):
        solver.verify_misiurewicz(cert_2pi, 1)


def test_postsingular_expansion(solver, cert_2pi):
    constants = solver.estimate_constants(cert_2pi, samples=200, k_max=20, seed=1)
    assert constants.n0_hat == 1
    assert constants.alpha_hat == pytest.approx(math.log(TAU), rel=1e-12)


def test_min_derivative_bound_holds_on_samples(solver, cert_2pi, config):
    # orbits agree with the vectorized sampler to round-off only over the first steps
    constants = solver.estimate_constants(cert_2pi, samples=200, k_max=20, seed=4)
    assert 0 < constants.beta1_hat <= 1.0 + 1e-12
    engine = OrbitEngine(config)
    for z in disk_points(4, STREAM_CONSTANTS, 20, 0j, config.misiurewicz.region_radius):
        trace = engine.iterate_orbit(cert_2pi.lam, complex(z), 3)
        for k in range(1, trace.n + 1):
            if trace.points[k - 1].real > config.orbit.x_escape_re:
                break
            min_mod = min(abs(w) for w in trace.points[1:k + 1])
            assert trace.log_mods[k] >= math.log(constants.beta1_hat) + math.log(min_mod) - 1e-9


def test_estimate_constants_mdev_scan(solver, cert_2pi):
    constants = solver.estimate_constants(cert_2pi, samples=2000, k_max=50, seed=0)
    assert math.isfinite(constants.M_hat)
    assert constants.violations == []
    assert not constants.degenerate
    assert constants.N_hat >= 1


def test_estimate_constants_is_deterministic(solver, cert_2pi):
    first = solver.estimate_constants(cert_2pi, samples=300, k_max=30, seed=9)
    second = solver.estimate_constants(cert_2pi, samples=300, k_max=30, seed=9)
    assert first == second


@pytest.mark.slow
def test_estimate_constants_full_scan(solver, cert_2pi):
    constants = solver.estimate_constants(cert_2pi, samples=10_000, k_max=50, seed=0)
    assert math.isfinite(constants.M_hat)
    assert constants.violations == []

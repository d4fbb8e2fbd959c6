# -*- coding: utf-8 -*-
import cmath
import math

import pytest

from src.expdyn.data_models import TAU, BackwardOrbit, ExpParameter
from src.expdyn.exceptions import (
    DeviationBlowup, NoConvergence, PreconditionViolation, ZeroPoint,
)
from src.expdyn.orbit_engine import OrbitEngine
from src.expdyn.transfer_engine import TransferEngine

TWO_PI_I = complex(0.0, TAU)


@pytest.fixture
def transfer(config):
    return TransferEngine(config)


def inverse_branch_orbit(n: int, start: complex = TWO_PI_I + 0.1) -> BackwardOrbit:
    """Backward orbit of 2 pi i pulled toward its repelling fixed point."""
    z = [start]
    for _ in range(n):
        z.append(cmath.log(z[-1] / TWO_PI_I) + TWO_PI_I)
    return BackwardOrbit(lambda1=ExpParameter(lam=TWO_PI_I), z=z)


def shifted(beta: complex) -> complex:
    """lambda2 with Log(lambda1 / lambda2) = beta."""
    return TWO_PI_I * cmath.exp(-beta)


def test_identity_transfer_is_exact(transfer):
    b = inverse_branch_orbit(20)
    result = transfer.transfer_backward_orbit(b, TWO_PI_I)
    assert result.max_dev == 0.0
    assert result.y == b.z
    assert result.log_deriv_ratio == 0


def test_tiny_shift_conjugacy(transfer):
    b = inverse_branch_orbit(20)
    lam2 = shifted(1e-14)
    result = transfer.transfer_backward_orbit(b, lam2)
    assert result.beta == pytest.approx(1e-14, rel=1e-2)
    assert result.max_dev <= 1e-10
    for k in range(1, len(result.y)):
        residual = abs(lam2 * cmath.exp(result.y[k]) - result.y[k - 1])
        assert residual <= 1e-12 * max(1.0, abs(result.y[k - 1]))


def test_log_derivative_ratio_bounded_by_deviations(transfer):
    result = transfer.transfer_backward_orbit(inverse_branch_orbit(30), shifted(1e-4 + 2e-5j))
    assert abs(result.log_deriv_ratio) <= 2 * sum(result.rel_devs)
    assert result.log_deriv_ratio != 0


def test_cocycle_ratio_matches_log_derivative_ratio(transfer):
    b = inverse_branch_orbit(25)
    result = transfer.transfer_backward_orbit(b, shifted(1e-4 - 3e-5j))
    ratio = transfer.cocycle_log_ratio(b, result)
    assert abs(ratio - result.log_deriv_ratio) <= 1e-10


def test_deviation_is_linear_in_shift(transfer):
    b = inverse_branch_orbit(20)
    big = transfer.transfer_backward_orbit(b, shifted(1e-6)).max_dev
    small = transfer.transfer_backward_orbit(b, shifted(5e-7)).max_dev
    assert big / small == pytest.approx(2.0, rel=0.1)


def test_deviation_stays_near_fixed_point_contraction(transfer):
    # near 2 pi i each backward step contracts the deviation by about 1/(2 pi)
    result = transfer.transfer_backward_orbit(inverse_branch_orbit(40), shifted(1e-5))
    assert result.max_dev <= 1e-5 / (1 - 1 / 6.0)


def test_large_shift_is_rejected(transfer):
    with pytest.raises(PreconditionViolation):
        transfer.transfer_backward_orbit(inverse_branch_orbit(5), shifted(0.2))


def test_deviation_blowup_on_small_points(transfer, config):
    # backward orbit of -1 near the attracting point -0.567 amplifies deviations
    b = transfer.backward_orbit_from(-1.0, -0.5 + 0j, 60)
    with pytest.raises(DeviationBlowup) as info:
        transfer.transfer_backward_orbit(b, -1.0 * cmath.exp(-0.05))
    assert info.value.index is not None


def test_build_backward_orbit_rejects_zero(transfer, config):
    trace = OrbitEngine(config).iterate_orbit(TWO_PI_I, 0j, 5)
    with pytest.raises(ZeroPoint) as info:
        transfer.build_backward_orbit(TWO_PI_I, trace)
    assert info.value.index == 0


def test_backward_orbit_reindexes_forward_trace(transfer, config):
    start = -0.5 + 0.1j
    trace = OrbitEngine(config).iterate_orbit(-1.0, start, 10)
    b = transfer.backward_orbit_from(-1.0, start, 10)
    assert b.n == 10
    assert b.z[-1] == start
    assert b.z[0] == trace.points[-1]


def test_min_segment_log_derivative_on_fixed_point():
    b = BackwardOrbit(lambda1=ExpParameter(lam=TWO_PI_I), z=[TWO_PI_I] * 6)
    assert TransferEngine.min_segment_log_derivative(b) == pytest.approx(math.log(TAU))


def test_check_bounds(transfer):
    b = inverse_branch_orbit(20)
    result = transfer.transfer_backward_orbit(b, shifted(1e-14))
    check = transfer.check_bounds(b, result, 2.0)
    assert check.dev_ok
    assert check.deriv_ok
    assert check.precondition_ok
    assert check.deriv_bound == pytest.approx(math.exp(-math.exp(2.0)))
    assert check.precondition_floor_log == pytest.approx(-math.exp(3.0))


def test_check_bounds_rejects_large_level(transfer):
    b = inverse_branch_orbit(5)
    result = transfer.transfer_backward_orbit(b, TWO_PI_I)
    with pytest.raises(PreconditionViolation):
        transfer.check_bounds(b, result, 4.0)


def test_solve_xi_inverse_first_step(transfer):
    lam = transfer.solve_xi_inverse(6.0j, 1, TWO_PI_I, 1e-12)
    assert lam.lam == pytest.approx(TWO_PI_I, abs=1e-11)


def test_solve_xi_inverse_second_step(transfer):
    lam = transfer.solve_xi_inverse(TWO_PI_I * 1.001, 2, TWO_PI_I, 1e-12)
    assert lam.lam == pytest.approx(TWO_PI_I, abs=1e-10)
    xi = transfer.solver.xi_orbit(lam, 2).xi
    assert abs(xi[2] - TWO_PI_I) <= 1e-12 * TAU


def test_solve_xi_inverse_escaping_seed(transfer):
    with pytest.raises(NoConvergence):
        transfer.solve_xi_inverse(1.0, 50, 0.5 + 0j)


def test_solve_xi_inverse_rejects_bad_n(transfer):
    with pytest.raises(PreconditionViolation):
        transfer.solve_xi_inverse(1.0, 0, 0.5 + 0j)

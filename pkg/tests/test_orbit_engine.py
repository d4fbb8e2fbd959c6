# -*- coding: utf-8 -*-
import cmath
import math

import numpy as np
import pytest

from src.expdyn.data_models import TAU, GridSquare, HalfPlane, TerminationReason
from src.expdyn.exceptions import EscapeRight
from src.expdyn.orbit_engine import OrbitEngine, exp_step, square_of

EPS = np.finfo(float).eps
TWO_PI_I = complex(0.0, TAU)


@pytest.fixture
def engine(config):
    return OrbitEngine(config)


@pytest.mark.parametrize("lam, z, expected", [
    (TWO_PI_I, 0j, TWO_PI_I),
    (TWO_PI_I, TWO_PI_I, TWO_PI_I),
    (1.0, 1 + 0j, math.e),
])
def test_step_examples(engine, lam, z, expected):
    assert engine.step(lam, z) == pytest.approx(expected, rel=1e-15, abs=1e-15)


def test_step_rejects_points_right_of_threshold(engine):
    with pytest.raises(EscapeRight):
        engine.step(1.0, 50.5 + 0j)


def test_step_rejects_invalid_parameter(engine):
    with pytest.raises(ValueError):
        engine.step(0.0, 0j)


def test_modulus_law(config):
    engine = OrbitEngine(config.with_overrides(x_escape_re=100.0))
    rng = np.random.default_rng(11)
    n = 100_000
    lam_mod = np.exp(rng.uniform(-3.0, 3.0, n))
    lam_arg = rng.uniform(-math.pi, math.pi, n)
    xs = rng.uniform(-100.0, 100.0, n)
    ys = rng.uniform(-50.0, 50.0, n)
    worst = 0.0
    for r, a, x, y in zip(lam_mod, lam_arg, xs, ys):
        lam = cmath.rect(float(r), float(a))
        w = engine.step(lam, complex(x, y))
        expected = abs(lam) * math.exp(x)
        worst = max(worst, abs(abs(w) - expected) / expected)
    assert worst <= 4 * EPS


@pytest.mark.parametrize("y", [0.0, 0.5, 1.0, -1.5])
def test_step_is_periodic_in_imaginary_direction(engine, y):
    for lam in (1.0, -2.0, 0.3 + 1.7j, TWO_PI_I):
        for x in (-3.0, 0.0, 2.5):
            assert engine.step(lam, complex(x, y)) == engine.step(lam, complex(x, y + TAU))


def test_iterate_orbit_fixed_point(engine):
    trace = engine.iterate_orbit(TWO_PI_I, 0j, 5)
    assert trace.points == [0j] + [TWO_PI_I] * 5
    assert trace.termination is TerminationReason.BUDGET_EXHAUSTED
    assert trace.n == 5
    assert trace.min_mod == pytest.approx(TAU)


def test_cocycle_examples(engine):
    trace = engine.iterate_orbit(TWO_PI_I, 0j, 2)
    assert trace.cocycle(2).log_mod == pytest.approx(2 * math.log(TAU), rel=1e-14)
    assert trace.cocycle(2).log_mod == pytest.approx(3.6757, abs=1e-4)

    trace = engine.iterate_orbit(1.0, 0j, 3)
    assert trace.cocycle(3).log_mod == pytest.approx(1.0 + math.e, rel=1e-14)
    assert trace.cocycle(3).to_complex() == pytest.approx(math.e * math.exp(math.e), rel=1e-13)


def test_cocycle_matches_finite_differences(engine):
    rng = np.random.default_rng(3)
    h = 1e-7
    checked = 0
    for _ in range(400):
        lam = cmath.rect(float(rng.uniform(0.3, 1.5)), float(rng.uniform(-math.pi, math.pi)))
        z = cmath.rect(float(rng.uniform(0.0, 3.0)), float(rng.uniform(-math.pi, math.pi)))
        n = int(rng.integers(1, 11))
        trace = engine.iterate_orbit(lam, z, n)
        if trace.n != n or max(abs(p) for p in trace.points) > 50:
            continue
        cocycle = trace.cocycle(n)
        if not -math.log(10.0) <= cocycle.log_mod <= 4 * math.log(10.0):
            continue

        def orbit_end(w):
            for _ in range(n):
                w = exp_step(lam, w)
            return w

        numeric = (orbit_end(z + h) - orbit_end(z - h)) / (2 * h)
        exact = cocycle.to_complex()
        assert abs(exact - numeric) / abs(exact) < 1e-5
        checked += 1
    assert checked >= 50


def test_cocycle_argument_is_reduced(engine):
    trace = engine.iterate_orbit(-1.0 + 3.0j, 0.2j, 40)
    assert all(0.0 <= a < TAU for a in trace.args)


def test_min_mod_is_monotone(engine):
    lam = 0.9 + 2.1j
    previous = math.inf
    for n in range(1, 30):
        trace = engine.iterate_orbit(lam, 0j, n)
        assert trace.min_mod <= previous
        previous = trace.min_mod


def test_iterate_orbit_escapes_right(engine):
    trace = engine.iterate_orbit(1.0, 0j, 100)
    assert trace.termination is TerminationReason.ESCAPED_RIGHT
    assert trace.points[-1].real > 50
    assert all(p.real <= 50 for p in trace.points[:-1])


def test_iterate_orbit_stops_on_predicate(engine):
    trace = engine.iterate_orbit(1.0, 0j, 100, stop=HalfPlane.right(2.0))
    assert trace.termination is TerminationReason.PREDICATE_HIT
    assert trace.n == 2


def test_iterate_orbit_underflow(engine):
    trace = engine.iterate_orbit(-1000.0, 0j, 10)
    assert trace.termination is TerminationReason.UNDERFLOWED
    assert trace.points[-1] == 0
    assert trace.n == 2


def test_zero_budget(engine):
    trace = engine.iterate_orbit(1.0, 0.5j, 0)
    assert trace.points == [0.5j]
    assert trace.min_mod == math.inf


@pytest.mark.parametrize("lam, target, t_max, n, landing", [
    (1.0, HalfPlane.right(2.0), 10, 2, math.e),
    (-1.0, HalfPlane.left(-0.5), 10, 1, -1.0),
])
def test_first_entry_examples(engine, lam, target, t_max, n, landing):
    record = engine.first_entry(lam, 0j, target, t_max)
    assert record.n == n
    assert record.landing == pytest.approx(landing)


def test_first_entry_none_for_fixed_singular_orbit(engine):
    assert engine.first_entry(TWO_PI_I, 0j, HalfPlane.right(1.0), 10_000) is None


def test_first_entry_none_when_escape_precedes_entry(engine):
    assert engine.first_entry(1.0, 0j, HalfPlane.left(-1.0), 100) is None


def test_first_entry_is_minimal(engine):
    target = HalfPlane.right(1.0)
    rng = np.random.default_rng(5)
    for _ in range(50):
        z0 = complex(*rng.uniform(-3.0, 3.0, 2))
        record = engine.first_entry(0.7 + 0.9j, z0, target, 200)
        if record is None:
            continue
        trace = engine.iterate_orbit(0.7 + 0.9j, z0, record.n)
        assert target.contains(trace.points[record.n])
        assert not any(target.contains(p) for p in trace.points[:record.n])


@pytest.mark.parametrize("z, square", [
    (0j, GridSquare(j=0, k=0)),
    (-0.1 + 0j, GridSquare(j=0, k=-1)),
    (7 + 7j, GridSquare(j=1, k=1)),
])
def test_square_of(z, square):
    assert square_of(z) == square
    assert square.contains(z)

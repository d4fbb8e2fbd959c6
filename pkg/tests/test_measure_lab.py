# -*- coding: utf-8 -*-
import cmath
import math

import numpy as np
import pytest

from src.expdyn.data_models import (
    TAU, Disk, DyadicSquare, EntryStatsConfig, GridSquare, HalfPlane,
)
from src.expdyn.exceptions import CascadeStuck, PreconditionViolation
from src.expdyn.measure_lab import MeasureLab
from src.expdyn.orbit_engine import OrbitEngine, square_of

TWO_PI_I = complex(0.0, TAU)
UNIT_DISK = Disk(center=0j, radius=1.0)


@pytest.fixture
def lab(config):
    return MeasureLab(config)


def entry_config(x=3.0, grid=30, t_max=2000):
    return EntryStatsConfig(x=x, grid=grid, t_max=t_max)


def test_entry_config_default_cap():
    assert entry_config(x=3.0).deriv_cap_log == pytest.approx(600.0)
    assert entry_config(x=1.5).deriv_cap_log == pytest.approx(1.5 ** 9)


def test_grid_points_on_dyadic_square():
    square = DyadicSquare(scale_exp=2, lattice=(1, -3))
    points = MeasureLab.grid_points(square, 10)
    assert points.size == 100
    assert all(square.contains(complex(z)) for z in points)


def test_grid_points_on_disk():
    points = MeasureLab.grid_points(Disk(center=1 + 1j, radius=0.5), 40)
    assert 0 < points.size < 1600
    assert np.all(np.abs(points - (1 + 1j)) <= 0.5)


def test_subdivide_partitions_area():
    square = DyadicSquare(scale_exp=3, lattice=(-2, 5))
    children = MeasureLab.subdivide(square)
    assert len(children) == 4
    assert sum(c.area for c in children) == square.area
    assert len({c.lattice for c in children}) == 4
    for child in children:
        assert square.contains(child.origin)
        assert square.contains(child.origin + complex(child.side, child.side) * 0.999)


@pytest.mark.parametrize("lam, target, n, landing", [
    (1.0, HalfPlane.right(2.0), 2, math.e),
    (-1.0, HalfPlane.left(-0.5), 1, -1.0),
])
def test_first_entries_examples(lab, lam, target, n, landing):
    batch = lab.first_entries(lam, np.array([0j]), target, 10)
    assert batch.n[0] == n
    assert batch.landing[0] == pytest.approx(landing)


def test_first_entries_misses_on_imaginary_axis(lab):
    batch = lab.first_entries(TWO_PI_I, np.array([0j]), HalfPlane.right(1.0), 10_000)
    assert batch.n[0] == -1
    assert not batch.entered.any()


def test_first_entries_match_scalar_engine(lab, config):
    engine = OrbitEngine(config)
    points = MeasureLab.grid_points(UNIT_DISK, 12)
    batch = lab.first_entries(TWO_PI_I, points, HalfPlane.right(1.0), 5)
    for i, z in enumerate(points):
        record = engine.first_entry(TWO_PI_I, complex(z), HalfPlane.right(1.0), 5)
        if record is None:
            assert batch.n[i] == -1
        else:
            assert batch.n[i] == record.n
            assert batch.landing[i] == pytest.approx(record.landing, rel=1e-9)
            assert batch.log_deriv[i] == pytest.approx(record.cocycle.log_mod, abs=1e-9)


def test_entry_stats_positive_fraction(lab):
    report = lab.entry_stats(TWO_PI_I, UNIT_DISK, entry_config())
    assert report.fraction > 0
    assert report.entered <= report.total
    assert report.fraction == report.entered / report.total
    assert report.within_paper_bounds <= report.entered
    assert report.n_quantiles == sorted(report.n_quantiles)


def test_entry_stats_monotone_in_level(lab):
    low = lab.entry_stats(TWO_PI_I, UNIT_DISK, entry_config(x=3.0))
    high = lab.entry_stats(TWO_PI_I, UNIT_DISK, entry_config(x=4.0))
    assert high.fraction <= low.fraction


def test_entry_stats_monotone_in_budget(lab):
    short = lab.entry_stats(TWO_PI_I, UNIT_DISK, entry_config(t_max=50))
    long = lab.entry_stats(TWO_PI_I, UNIT_DISK, entry_config(t_max=2000))
    assert short.entered <= long.entered


def test_entry_ball_radius(lab):
    cfg = entry_config(x=4.0)
    ball = lab.entry_ball(0.3 + 0.2j, cfg)
    assert ball.center == 0.3 + 0.2j
    assert ball.radius == pytest.approx(cfg.delta0 / 64.0)
    with pytest.raises(PreconditionViolation):
        lab.entry_ball(5.0, cfg)


def test_entry_stats_on_a_ball(lab):
    cfg = entry_config(grid=20, t_max=500)
    report = lab.entry_stats(TWO_PI_I, 0.3 + 0.2j, cfg)
    assert report.total == MeasureLab.grid_points(lab.entry_ball(0.3 + 0.2j, cfg), 20).size > 0
    assert report == lab.entry_stats(TWO_PI_I, lab.entry_ball(0.3 + 0.2j, cfg), cfg)


def test_entry_stats_is_deterministic(lab):
    cfg = entry_config(grid=20, t_max=500)
    assert lab.entry_stats(TWO_PI_I, UNIT_DISK, cfg) == lab.entry_stats(TWO_PI_I, UNIT_DISK, cfg)


def test_entry_frame_columns(lab):
    batch = lab.entry_batch(TWO_PI_I, UNIT_DISK, entry_config(grid=10, t_max=200))
    frame = batch.to_frame()
    assert list(frame.columns) == ["z_re", "z_im", "n", "log_deriv", "landing_re"]
    assert len(frame) == batch.n.size


def test_deep_left_stats(lab):
    x = 3.0
    thresholds = (-math.exp(x), -math.exp(x + math.sqrt(x)))
    report = lab.deep_left_stats(TWO_PI_I, Disk(center=TWO_PI_I, radius=0.9), x, thresholds,
                                 entry_config(grid=40, t_max=5000))
    assert report.entered_left > 0
    assert report.fraction_S0 > 0
    assert report.overshoot <= report.entered_left <= report.total
    assert report.floor_ok <= report.entered_left


def test_deep_left_degenerate_thresholds(lab):
    level = -math.exp(3.0)
    report = lab.deep_left_stats(TWO_PI_I, Disk(center=TWO_PI_I, radius=0.9), 3.0, (level, level),
                                 entry_config(grid=20, t_max=2000))
    assert report.overshoot == report.entered_left


def test_deep_left_rejects_bad_thresholds(lab):
    with pytest.raises(PreconditionViolation):
        lab.deep_left_stats(TWO_PI_I, UNIT_DISK, 3.0, (-100.0, -20.0), entry_config())


def test_min_segment_floor_matches_brute_force(lab, config):
    engine = OrbitEngine(config)
    points = MeasureLab.grid_points(UNIT_DISK, 10)
    batch = lab.first_entries(TWO_PI_I, points, HalfPlane.right(3.0), 8)
    checked = 0
    for i in np.flatnonzero(batch.n >= 1):
        trace = engine.iterate_orbit(TWO_PI_I, complex(points[i]), int(batch.n[i]))
        logs = [math.log(abs(z)) for z in trace.points[1:]]
        brute = min(sum(logs[k:j]) for k in range(len(logs)) for j in range(k + 1, len(logs) + 1))
        assert batch.min_segment_log[i] == pytest.approx(brute, abs=1e-6)
        checked += 1
    assert checked > 0


def test_refinement_rounds(lab):
    square = DyadicSquare(scale_exp=1, lattice=(0, 0))
    report = lab.refinement_rounds(TWO_PI_I, square, 3.0, 4, entry_config(grid=20, t_max=400))
    assert report.total == 400
    assert len(report.round_fractions) == 4
    assert report.uncaptured_direct == pytest.approx(report.uncaptured_product, abs=1e-12)
    assert report.uncaptured_direct <= report.uncaptured_bound + 1e-12
    assert report.holds


def test_cascade_reaches_level(lab):
    q = square_of(20.0 + 0j)
    trace = lab.cascade_to_right(TWO_PI_I, q, 100.0, 10)
    assert 1 <= trace.entry_index <= 3
    assert trace.y_levels[-1] >= 100.0
    assert lab.growth_chain_holds(trace)
    assert q.contains(trace.witness)
    assert trace.squares[1].contains(TWO_PI_I * cmath.exp(trace.witness))


def test_cascade_already_past_level(lab):
    q = square_of(20.0 + 0j)
    trace = lab.cascade_to_right(TWO_PI_I, q, 15.0, 10)
    assert trace.entry_index == 0
    assert trace.squares == [q]


def test_cascade_rejects_square_left_of_working_level(lab):
    with pytest.raises(PreconditionViolation):
        lab.cascade_to_right(TWO_PI_I, square_of(10.0 + 0j), 100.0, 10)


def test_cascade_stuck_beyond_double_range(lab):
    with pytest.raises(CascadeStuck) as info:
        lab.cascade_to_right(TWO_PI_I, GridSquare(j=0, k=3), 1e12, 10)
    assert info.value.square is not None

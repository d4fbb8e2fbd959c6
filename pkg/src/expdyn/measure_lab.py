# -*- coding: utf-8 -*-
"""
Measure Lab - grid experiments on first entries into half-planes.

Covers the rightward square cascade, first-entry proportions over dyadic
squares and disks, deep-left landing statistics and the round-by-round
refinement bookkeeping. Sampling is a deterministic grid; orbits of the
whole grid are advanced together with numpy.
"""
import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .config import ExpDynConfig, get_config
from .console import say
from .data_models import (
    TAU, CascadeTrace, DeepLeftReport, Disk, DyadicSquare, EntryStatsConfig, EntryStatsReport,
    ExpParameter, GridSquare, HalfPlane, RefinementReport, Side,
)
from .exceptions import CascadeStuck, PreconditionViolation
from .orbit_engine import ParamLike, square_of

Domain = Union[DyadicSquare, Disk]
EntryDomain = Union[DyadicSquare, Disk, complex]

QUANTILES = (0.5, 0.9, 0.99)
# interior probe of a square, per side
PROBE = 5
GROWTH_SLACK_LOG = 7.0


@dataclass
class EntryBatch:
    """Per-point first-entry data for a sample grid."""
    z0: np.ndarray
    n: np.ndarray              # entry time, -1 when there was none
    log_deriv: np.ndarray      # log|Df^n(z)| at entry
    landing: np.ndarray        # f^n(z) at entry
    min_segment_log: np.ndarray  # min over segments of log|Df^j(f^k(z))|

    @property
    def entered(self) -> np.ndarray:
        return self.n >= 0

    def to_frame(self) -> pd.DataFrame:
        entered = self.entered
        return pd.DataFrame({
            "z_re": self.z0.real,
            "z_im": self.z0.imag,
            "n": self.n,
            "log_deriv": np.where(entered, self.log_deriv, np.nan),
            "landing_re": np.where(entered, self.landing.real, np.nan),
        })


def _reduce_imag(y: np.ndarray) -> np.ndarray:
    return y - TAU * np.rint(y / TAU)


def _quantiles(values: np.ndarray) -> List[float]:
    if values.size == 0:
        return []
    return [float(q) for q in np.quantile(values, QUANTILES)]


class MeasureLab:
    """First-entry experiments for f_lambda on deterministic sample grids."""

    def __init__(self, config: Optional[ExpDynConfig] = None):
        self.config = config or get_config()
        self.settings = self.config.measure
        self.x_escape = self.config.orbit.x_escape_re

    # ---------- sample grids ----------

    @staticmethod
    def grid_points(domain: Domain, grid: int) -> np.ndarray:
        """
        Cell centers of a grid x grid lattice over the domain.

        For a disk the lattice covers the bounding square and only centers
        inside the disk are kept.
        """
        if grid < 1:
            raise PreconditionViolation(f"grid must be >= 1, got {grid}")
        offsets = (np.arange(grid) + 0.5) / grid
        if isinstance(domain, DyadicSquare):
            o, side = domain.origin, domain.side
            re, im = np.meshgrid(o.real + side * offsets, o.imag + side * offsets)
            return (re + 1j * im).ravel()
        c, r = domain.center, domain.radius
        re, im = np.meshgrid(c.real - r + 2 * r * offsets, c.imag - r + 2 * r * offsets)
        points = (re + 1j * im).ravel()
        return points[np.abs(points - c) <= r]

    @staticmethod
    def subdivide(square: DyadicSquare) -> List[DyadicSquare]:
        """The four children of a dyadic square, row by row from the lower left."""
        a, b = square.lattice
        k = square.scale_exp + 1
        return [DyadicSquare(scale_exp=k, lattice=(2 * a + i, 2 * b + j)) for j in (0, 1) for i in (0, 1)]

    # ---------- batched first entry ----------

    def first_entries(self, p: ParamLike, z0: np.ndarray, target: HalfPlane, t_max: int) -> EntryBatch:
        """
        Vectorized first_entry over an array of starting points.

        Per point the stopping rules are those of OrbitEngine.first_entry:
        the target is checked before the escape threshold, an exact zero
        ends the orbit, and the start itself may already be in the target.
        """
        if t_max < 1:
            raise PreconditionViolation(f"t_max must be >= 1, got {t_max}")
        lam = ExpParameter.of(p).lam
        log_lam = math.log(abs(lam))
        z0 = np.asarray(z0, dtype=complex)
        count = z0.size

        def hits(w: np.ndarray) -> np.ndarray:
            return w.real > target.level if target.side is Side.RIGHT else w.real <= target.level

        n = np.full(count, -1, dtype=np.int64)
        log_deriv = np.zeros(count)
        landing = np.zeros(count, dtype=complex)
        min_segment = np.full(count, np.inf)

        inside = hits(z0)
        n[inside] = 0
        landing[inside] = z0[inside]

        idx = np.flatnonzero(~inside & (z0.real <= self.x_escape))
        z = z0[idx]
        log_mod = np.zeros(idx.size)
        running_max = np.zeros(idx.size)
        best = np.full(idx.size, np.inf)

        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            for t in range(1, t_max + 1):
                if idx.size == 0:
                    break
                log_mod = log_mod + (log_lam + z.real)
                best = np.minimum(best, log_mod - running_max)
                running_max = np.maximum(running_max, log_mod)
                z = lam * np.exp(z.real + 1j * _reduce_imag(z.imag))

                entered = hits(z)
                if entered.any():
                    where = idx[entered]
                    n[where] = t
                    log_deriv[where] = log_mod[entered]
                    landing[where] = z[entered]
                    min_segment[where] = best[entered]
                keep = ~entered & (z.real <= self.x_escape) & (z != 0)
                idx, z = idx[keep], z[keep]
                log_mod, running_max, best = log_mod[keep], running_max[keep], best[keep]

        return EntryBatch(z0=z0, n=n, log_deriv=log_deriv, landing=landing, min_segment_log=min_segment)

    # ---------- statistics ----------

    @staticmethod
    def entry_ball(z: complex, cfg: EntryStatsConfig) -> Disk:
        """The ball B(z, delta0 / x^3) around a point left of the entry level."""
        z = complex(z)
        if z.real > cfg.x:
            raise PreconditionViolation(f"ball centre {z!r} already lies in Re z > {cfg.x}")
        return Disk(center=z, radius=cfg.delta0 / cfg.x ** 3)

    def entry_batch(self, p: ParamLike, domain: EntryDomain, cfg: EntryStatsConfig) -> EntryBatch:
        if not isinstance(domain, (DyadicSquare, Disk)):
            domain = self.entry_ball(domain, cfg)
        return self.first_entries(p, self.grid_points(domain, cfg.grid), HalfPlane.right(cfg.x), cfg.t_max)

    def entry_stats(self, p: ParamLike, domain: EntryDomain, cfg: EntryStatsConfig) -> EntryStatsReport:
        """
        Proportion of the grid whose orbit enters Re z > cfg.x within cfg.t_max.

        A bare point as domain samples entry_ball around it.

        within_paper_bounds counts entries with n <= min(e^(2x), t_max) and
        log|Df^n| <= deriv_cap_log.
        """
        say(f"🧭 Entry stats: x={cfg.x} grid={cfg.grid} t_max={cfg.t_max}", self.config)
        batch = self.entry_batch(p, domain, cfg)
        return self.entry_report(batch, cfg)

    @staticmethod
    def entry_report(batch: EntryBatch, cfg: EntryStatsConfig) -> EntryStatsReport:
        entered = batch.entered
        total = int(batch.n.size)
        count = int(entered.sum())
        n_cap = min(math.exp(min(2.0 * cfg.x, 700.0)), cfg.t_max)
        within = entered & (batch.n <= n_cap) & (batch.log_deriv <= cfg.deriv_cap_log)
        return EntryStatsReport(
            total=total,
            entered=count,
            fraction=count / total if total else 0.0,
            n_quantiles=_quantiles(batch.n[entered].astype(float)),
            deriv_quantiles=_quantiles(batch.log_deriv[entered]),
            within_paper_bounds=int(within.sum()),
        )

    def deep_left_batch(self, p: ParamLike, domain: Disk, level: float, cfg: EntryStatsConfig) -> EntryBatch:
        return self.first_entries(p, self.grid_points(domain, cfg.grid), HalfPlane.left(level), cfg.t_max)

    def deep_left_stats(self, p: ParamLike, domain: Disk, x: float, thresholds: Tuple[float, float],
                        cfg: EntryStatsConfig, floor_log: Optional[float] = None) -> DeepLeftReport:
        """
        Landing statistics for first entries into Re z <= L1.

        Args:
            thresholds: (L1, L2) with L2 <= L1 < 0; landings with Re <= L2
                count as overshoot.
            floor_log: floor for the minimum segment derivative,
                default -e^(x+1).

        Returns:
            DeepLeftReport; fraction_S0 is the share of grid points that
            overshoot, fall in the derivative window (x, cap) and clear the
            floor.
        """
        level1, level2 = thresholds
        if not level2 <= level1 < 0:
            raise PreconditionViolation(f"thresholds need L2 <= L1 < 0, got {thresholds}")
        floor_log = -math.exp(x + 1.0) if floor_log is None else floor_log
        say(f"🧭 Deep-left stats: x={x} L1={level1:.4g} L2={level2:.4g} grid={cfg.grid}", self.config)

        batch = self.deep_left_batch(p, domain, level1, cfg)
        entered = batch.entered
        overshoot = entered & (batch.landing.real <= level2)
        window = entered & (batch.log_deriv > x) & (batch.log_deriv < cfg.deriv_cap_log)
        floor_ok = entered & (batch.min_segment_log > floor_log)
        total = int(batch.n.size)
        s0 = overshoot & window & floor_ok
        return DeepLeftReport(
            total=total,
            entered_left=int(entered.sum()),
            overshoot=int(overshoot.sum()),
            deriv_window=int(window.sum()),
            floor_ok=int(floor_ok.sum()),
            fraction_S0=int(s0.sum()) / total if total else 0.0,
        )

    def refinement_rounds(self, p: ParamLike, domain: DyadicSquare, x: float, rounds: int,
                          cfg: EntryStatsConfig) -> RefinementReport:
        """
        Splits the budget t_max into equal rounds and checks the inductive capture bound.

        round_fractions[r] is the share of points not yet in Re z > x that
        enter during round r. With q the smallest such share, the points
        never captured must number at most (1 - q)^rounds of the grid, and
        the product of the per-round survival shares must equal the direct
        count.
        """
        if rounds < 1 or cfg.t_max < rounds:
            raise PreconditionViolation(f"need 1 <= rounds <= t_max, got rounds={rounds}, t_max={cfg.t_max}")
        batch = self.first_entries(p, self.grid_points(domain, cfg.grid), HalfPlane.right(x), cfg.t_max)
        total = int(batch.n.size)
        step = cfg.t_max // rounds
        remaining = total
        fractions: List[float] = []
        product = 1.0
        for r in range(rounds):
            hi = cfg.t_max if r == rounds - 1 else (r + 1) * step
            lo = -1 if r == 0 else r * step
            captured = int(((batch.n > lo) & (batch.n <= hi)).sum())
            share = captured / remaining if remaining else 1.0
            fractions.append(share)
            product *= 1.0 - share
            remaining -= captured

        direct = remaining / total if total else 0.0
        bound = (1.0 - min(fractions)) ** rounds
        holds = direct <= bound + 1e-12 and abs(direct - product) <= 1e-12
        return RefinementReport(
            total=total, round_fractions=fractions, uncaptured_direct=direct,
            uncaptured_product=product, uncaptured_bound=bound, holds=holds,
        )

    # ---------- rightward cascade ----------

    def _probe_points(self, q: GridSquare) -> List[complex]:
        offsets = [(i + 0.5) / PROBE * TAU for i in range(PROBE)]
        return [q.center] + [complex(q.left + a, q.bottom + b) for b in offsets for a in offsets]

    @staticmethod
    def _inside_image(lam: complex, q: GridSquare, s: GridSquare) -> bool:
        """Whether s lies in f(q) away from the image of q's lower edge."""
        half_diag = s.diameter / 2
        c = s.center
        inner = abs(lam) * math.exp(q.left)
        outer = abs(lam) * math.exp(q.left + TAU)
        if not inner < abs(c) - half_diag or not abs(c) + half_diag < outer:
            return False
        ray = cmath.exp(1j * (cmath.phase(lam) + q.bottom))
        along = max(0.0, (c * ray.conjugate()).real)
        return abs(c - along * ray) > half_diag

    def _pull_back(self, lam: complex, squares: List[GridSquare], point: complex) -> complex:
        """Follows the inverse branches of f from the last square back to the first."""
        w = point
        for q in reversed(squares[:-1]):
            pre = cmath.log(w / lam)
            shift = math.floor((pre.imag - q.bottom) / TAU)
            w = complex(pre.real, pre.imag - TAU * shift)
            if not q.contains(w):
                raise CascadeStuck(f"pull-back left the cascade square at level {q.left:.4g}", square=q)
        return w

    def cascade_to_right(self, p: ParamLike, q: GridSquare, x: float, k_max: int) -> CascadeTrace:
        """
        Follows grid squares to the right until the level x is passed.

        From each square Q_k a probe point is pushed forward; the grid square
        of its image is accepted as Q_(k+1) when it sits inside f(Q_k) and
        its level satisfies e^(y_k / 2) < y_(k+1) < e^7 |lambda| e^(y_k).

        Raises:
            PreconditionViolation: if q is not right of the working level
                or x does not exceed it.
            CascadeStuck: if no probe point of a square qualifies.
        """
        param = ExpParameter.of(p)
        lam = param.lam
        m_work = self.settings.m_work
        if not q.left > m_work:
            raise PreconditionViolation(f"square at level {q.left:.4g} is not right of M_work={m_work}")
        if not x > m_work:
            raise PreconditionViolation(f"x={x} must exceed M_work={m_work}")

        squares = [q]
        levels = [q.left]
        while levels[-1] < x and len(squares) <= k_max:
            current = squares[-1]
            y = levels[-1]
            if y / 2 > 700.0:
                raise CascadeStuck(f"level {y:.4g} is beyond double range", square=current)
            low = math.exp(y / 2)
            high_log = GROWTH_SLACK_LOG + math.log(abs(lam)) + y
            chosen = None
            for w in self._probe_points(current):
                image = lam * cmath.exp(w)
                if not cmath.isfinite(image):
                    continue
                s = square_of(image)
                if low < s.left and math.log(s.left) < high_log and self._inside_image(lam, current, s):
                    chosen = s
                    break
            if chosen is None:
                raise CascadeStuck(f"no probe point of square ({current.j}, {current.k}) qualifies",
                                   square=current)
            squares.append(chosen)
            levels.append(chosen.left)

        witness = self._pull_back(lam, squares, squares[-1].center)
        return CascadeTrace(
            lambda0=param, squares=squares, y_levels=levels,
            witness=witness, entry_index=len(squares) - 1,
        )

    @staticmethod
    def growth_chain_holds(trace: CascadeTrace) -> bool:
        """e^(y_k / 2) < y_(k+1) < e^7 |lambda| e^(y_k) for every consecutive pair."""
        log_lam = trace.lambda0.log_abs
        for y, y_next in zip(trace.y_levels, trace.y_levels[1:]):
            if not (y / 2 < math.log(y_next) < GROWTH_SLACK_LOG + log_lam + y):
                return False
        return True

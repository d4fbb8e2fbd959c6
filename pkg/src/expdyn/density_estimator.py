# -*- coding: utf-8 -*-
"""
Density Estimator - Monte Carlo estimates of the share of certified
hyperbolic parameters in balls and annuli around a base parameter.

Every sample draws from its own (seed, stream, index) generator and results
are merged by index, so reports do not depend on n_jobs.
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from .certifier import CycleCertifier
from .config import ExpDynConfig, get_config
from .console import say
from .data_models import (
    AnnulusImageStats, AnnulusSpec, Classification, DensityReport, DensitySample,
    DensitySweepConfig, ExpParameter, MisiurewiczCertificate, ProofSweepReport,
    RadiusStats, TrapBallCertificate, Verdict,
)
from .exceptions import NoSuchN, PreconditionViolation
from .misiurewicz_solver import MisiurewiczSolver
from .orbit_engine import ParamLike
from .sampling import STREAM_PROOF, sample_generator, uniform_in_annulus, uniform_in_disk

CONFIDENCE = 0.95


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    The interval is widened to contain the point estimate exactly, which
    round-off can otherwise miss at 0 and 1.
    """
    if trials < 1:
        raise PreconditionViolation(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise PreconditionViolation(f"successes must lie in [0, {trials}], got {successes}")
    z = float(stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z / (1.0 + z2n) * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    lo = max(0.0, min(center - half, p))
    hi = min(1.0, max(center + half, p))
    return lo, hi


def _sector_diameter(inner: float, outer: float, angle: float) -> float:
    if angle >= math.pi:
        return 2.0 * outer
    return max(abs(outer * complex(math.cos(angle), math.sin(angle)) - inner),
               2.0 * outer * math.sin(angle / 2.0), outer - inner)


def _classify_batch(config: ExpDynConfig, lams: Sequence[complex], budget: int,
                    p_max: int) -> List[Classification]:
    certifier = CycleCertifier(config)
    return [certifier.classify(lam, budget, p_max) for lam in lams]


def _proof_batch(config: ExpDynConfig, lams: Sequence[complex], x_work: float,
                 budget: int) -> List[Tuple[bool, Optional[TrapBallCertificate]]]:
    certifier = CycleCertifier(config)
    results = []
    for lam in lams:
        param = ExpParameter(lam=lam)
        points, log_mods, _, _, _ = certifier.engine.run(lam, 0j, budget)
        if not certifier.trap_candidates(lam, points, log_mods, depth=x_work):
            results.append((False, None))
            continue
        cert, _ = certifier.trap_from_orbit(param, points, log_mods, depth=x_work)
        results.append((True, cert))
    return results


class DensityEstimator:
    """Sampling, classification and annulus diagnostics around a base parameter."""

    def __init__(self, config: Optional[ExpDynConfig] = None, n_jobs: Optional[int] = None):
        self.config = config or get_config()
        self.settings = self.config.density
        self.n_jobs = self.config.runtime.n_jobs if n_jobs is None else n_jobs
        self.certifier = CycleCertifier(self.config)
        self.solver = MisiurewiczSolver(self.config, self.certifier.engine)

    # ---------- sampling ----------

    def sample_annulus(self, spec: AnnulusSpec, count: int, seed: int, sector: Optional[int] = None,
                       stream: int = 0) -> List[ExpParameter]:
        """Area-uniform parameters in A(center; gamma r, r), optionally in one sector."""
        if count < 1:
            raise PreconditionViolation(f"count must be >= 1, got {count}")
        if sector is not None and not 0 <= sector < spec.sectors:
            raise PreconditionViolation(f"sector must lie in [0, {spec.sectors}), got {sector}")
        center = spec.center.lam
        return [
            ExpParameter(lam=uniform_in_annulus(sample_generator(seed, stream, i), center,
                                                spec.inner, spec.r, sector, spec.sectors))
            for i in range(count)
        ]

    def _sample_radius(self, center: complex, cfg: DensitySweepConfig, index: int, r: float) -> List[complex]:
        if cfg.annulus is not None:
            spec = cfg.annulus.model_copy(update={"center": ExpParameter(lam=center), "r": r})
            return [p.lam for p in self.sample_annulus(spec, cfg.samples, cfg.seed, stream=index)]
        return [uniform_in_disk(sample_generator(cfg.seed, index, i), center, r) for i in range(cfg.samples)]

    def _map_ordered(self, task, items: List, *args) -> List:
        """Runs task over contiguous chunks of items and concatenates in order."""
        jobs = max(1, self.n_jobs)
        if jobs == 1 or len(items) < 2:
            return task(self.config, items, *args)
        size = math.ceil(len(items) / jobs)
        chunks = [items[i:i + size] for i in range(0, len(items), size)]
        parts = Parallel(n_jobs=jobs)(delayed(task)(self.config, chunk, *args) for chunk in chunks)
        return [result for part in parts for result in part]

    # ---------- density sweep ----------

    def density_sweep(self, center: ParamLike, cfg: DensitySweepConfig) -> DensityReport:
        """
        Classifies cfg.samples parameters per radius and reports the certified share.

        Only certificate-backed verdicts count as hyperbolic, so each
        fraction is a lower bound for the true density.
        """
        param = ExpParameter.of(center)
        per_radius: List[RadiusStats] = []
        rows: List[DensitySample] = []
        shape = "annulus" if cfg.annulus is not None else "ball"
        say(f"🎯 Density sweep around {param.lam:.6g}: {len(cfg.radii)} radii x {cfg.samples} samples ({shape})",
            self.config)

        for index, r in enumerate(cfg.radii):
            lams = self._sample_radius(param.lam, cfg, index, r)
            results = self._map_ordered(_classify_batch, lams, cfg.budget, cfg.p_max)
            counts = {verdict: 0 for verdict in Verdict}
            for i, (lam, result) in enumerate(zip(lams, results)):
                counts[result.verdict] += 1
                period_or_n = result.period if result.verdict is Verdict.HYPERBOLIC else result.iterations_used
                rows.append(DensitySample(radius_index=index, index=i, lam=lam, verdict=result.verdict,
                                          period_or_n=period_or_n, iterations=result.iterations_used))
            hyperbolic = counts[Verdict.HYPERBOLIC]
            lo, hi = wilson_interval(hyperbolic, cfg.samples)
            stats_row = RadiusStats(
                radius=r, samples=cfg.samples, hyperbolic=hyperbolic,
                escape_suspect=counts[Verdict.ESCAPE_SUSPECT], undecided=counts[Verdict.UNDECIDED],
                fraction=hyperbolic / cfg.samples, wilson_lo=lo, wilson_hi=hi,
            )
            per_radius.append(stats_row)
            say(f"   r={r:.3g}: {hyperbolic}/{cfg.samples} hyperbolic [{lo:.3f}, {hi:.3f}]", self.config)

        return DensityReport(center=param, per_radius=per_radius, seed=cfg.seed, budget=cfg.budget,
                             p_max=cfg.p_max, annulus=cfg.annulus is not None, samples=rows)

    # ---------- annulus image diagnostics ----------

    def _sector_grid(self, center: complex, r: float, grid: int) -> np.ndarray:
        gamma, sectors = self.settings.gamma, self.settings.sectors
        offsets = (np.arange(grid) + 0.5) / grid
        radii = gamma * r + offsets * (1.0 - gamma) * r
        angles = offsets * (2.0 * math.pi / sectors)
        rho, theta = np.meshgrid(radii, angles)
        return (center + rho * np.exp(1j * theta)).ravel()

    def annulus_image_stats(self, base: MisiurewiczCertificate, r: float, delta_target: float,
                            grid: int, n_max: Optional[int] = None) -> AnnulusImageStats:
        """
        First n at which xi_n spreads one annulus sector over delta_target.

        The sector is sampled on a grid x grid polar lattice. With a single
        grid point the image diameter is estimated as |xi_n'| times the
        sector diameter and the distortion is 1.

        Raises:
            NoSuchN: if no n <= n_max qualifies before some xi_n escapes.
        """
        if r <= 0 or delta_target <= 0 or grid < 1:
            raise PreconditionViolation("r, delta_target and grid must be positive")
        n_max = self.settings.annulus_n_max if n_max is None else n_max
        lam0 = base.lam.lam
        lam = self._sector_grid(lam0, r, grid)
        sector_diam = _sector_diameter(self.settings.gamma * r, r, 2.0 * math.pi / self.settings.sectors)
        x_escape = self.config.orbit.x_escape_re

        xi = np.zeros_like(lam)
        dxi = np.zeros_like(lam)
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(1, n_max + 1):
                if np.any(xi.real > x_escape):
                    raise NoSuchN(f"xi escaped at step {n - 1} before reaching diameter {delta_target}")
                w = np.exp(xi)
                xi = lam * w
                dxi = w + xi * dxi
                if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(dxi))):
                    raise NoSuchN(f"xi left double range at step {n}")
                if lam.size > 1:
                    diam = float(np.max(np.abs(xi[:, None] - xi[None, :])))
                else:
                    diam = float(np.abs(dxi[0])) * sector_diam
                if diam >= delta_target:
                    return self._image_stats(base, n, xi, dxi, r, diam)
        raise NoSuchN(f"image diameter stays below {delta_target} for n <= {n_max}")

    def _image_stats(self, base: MisiurewiczCertificate, n: int, xi: np.ndarray, dxi: np.ndarray,
                     r: float, diam: float) -> AnnulusImageStats:
        mods = np.abs(dxi)
        distortion = float(mods.max() / mods.min()) if mods.size > 1 else 1.0
        ps_count = base.preperiod + base.period
        ps = np.array(self.solver.xi_orbit(base.lam, ps_count).xi[:ps_count])
        gaps = np.min(np.abs(xi[:, None] - ps[None, :]), axis=1)
        return AnnulusImageStats(
            n=n, distortion=max(1.0, distortion), min_dxi_times_r=float(mods.min()) * r,
            image_diam=diam, contains_in_PS_ball=bool(np.all(gaps < self.settings.delta0)),
        )

    # ---------- deep-left proof pipeline ----------

    def find_hyperbolic_via_proof(self, base: MisiurewiczCertificate, spec: AnnulusSpec, x_work: float,
                                  count: int, seed: int, budget: Optional[int] = None) -> ProofSweepReport:
        """
        Samples the annulus, screens singular orbits for landings with
        Re xi_n <= -x_work and moderate derivative, and keeps the parameters
        whose trap ball certifies.
        """
        if count < 1:
            raise PreconditionViolation(f"count must be >= 1, got {count}")
        budget = self.settings.proof_budget if budget is None else budget
        if spec.center.lam != base.lam.lam:
            spec = spec.model_copy(update={"center": base.lam})
        say(f"🪤 Proof sweep: {count} samples, x_work={x_work}, budget={budget}", self.config)

        lams = [p.lam for p in self.sample_annulus(spec, count, seed, stream=STREAM_PROOF)]
        results = self._map_ordered(_proof_batch, lams, x_work, budget)
        hits = [cert for _, cert in results if cert is not None]
        screened = sum(1 for flagged, _ in results if flagged)
        say(f"✅ {len(hits)} certified of {screened} screened", self.config)
        return ProofSweepReport(hits=hits, sampled=count, screened=screened, certified=len(hits))

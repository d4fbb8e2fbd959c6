# -*- coding: utf-8 -*-
"""
Misiurewicz Solver - locates parameters whose singular orbit is preperiodic
to a repelling cycle, verifies them by re-iteration, and estimates the
expansion constants of the dynamics near them.
"""
import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .config import ExpDynConfig, get_config
from .console import say
from .data_models import (
    TAU, ConstantsViolation, EstimatedConstants, ExpParameter, MisiurewiczCertificate,
    ParameterOrbit, VerificationReport,
)
from .exceptions import (
    BelowModulusBound, EscapeRight, NoConvergence, NotRepelling, PreconditionViolation,
    SingularDerivative, VerificationFailed,
)
from .orbit_engine import OrbitEngine, ParamLike, exp_step
from .sampling import STREAM_CONSTANTS, disk_points

LOG3 = math.log(3.0)
# drift allowed after resynchronizing, relative to the cycle scale
RESYNC_LEVEL = 1e-6


@dataclass
class _ShadowScan:
    """Result of a resynchronized re-iteration along a certified cycle."""
    ok: bool
    failed_at: Optional[int]
    periods: int
    resyncs: int
    max_drift: float
    growth: float
    max_modulus: float


class MisiurewiczSolver:
    """Newton solver and verifier for Misiurewicz parameters."""

    def __init__(self, config: Optional[ExpDynConfig] = None, engine: Optional[OrbitEngine] = None):
        self.config = config or get_config()
        self.engine = engine or OrbitEngine(self.config)
        self.settings = self.config.misiurewicz
        self.x_escape = self.config.orbit.x_escape_re

    # ---------- singular orbit in parameter space ----------

    def xi_orbit(self, p: ParamLike, n: int, truncate: bool = False) -> ParameterOrbit:
        """
        xi_k = f^k(0) and its lambda-derivative for k = 0..n.

        Args:
            p: The parameter lambda.
            n: Number of steps (>= 0).
            truncate: On escape return the orbit up to the escaping index
                (with escaped_at set) instead of raising EscapeRight.
        """
        if n < 0:
            raise PreconditionViolation(f"n must be >= 0, got {n}")
        param = ExpParameter.of(p)
        xi, dxi, escaped_at = self._xi_lists(param.lam, n)
        if escaped_at is not None and not truncate:
            raise EscapeRight(f"xi_{escaped_at} escapes right of {self.x_escape}", index=escaped_at,
                              point=xi[escaped_at])
        return ParameterOrbit(lam=param, xi=xi, dxi=dxi, escaped_at=escaped_at)

    def _xi_lists(self, lam: complex, n: int) -> Tuple[List[complex], List[complex], Optional[int]]:
        xi = [0j]
        dxi = [0j]
        z, dz = 0j, 0j
        for k in range(n):
            if z.real > self.x_escape:
                return xi, dxi, k
            w = cmath.exp(complex(z.real, math.remainder(z.imag, TAU)))
            z_next = lam * w
            # d/dlambda (lambda e^z) = e^z + lambda e^z dz
            dz = w + z_next * dz
            z = z_next
            xi.append(z)
            dxi.append(dz)
        return xi, dxi, None

    def _g(self, lam: complex, k: int, p: int) -> Tuple[complex, complex, List[complex]]:
        """G = xi_(k+p) - xi_k with G' and the orbit."""
        xi, dxi, escaped_at = self._xi_lists(lam, k + p)
        if escaped_at is not None:
            raise EscapeRight(f"xi_{escaped_at} escapes", index=escaped_at)
        return xi[k + p] - xi[k], dxi[k + p] - dxi[k], xi

    # ---------- Newton ----------

    def solve_misiurewicz(self, seed: ParamLike, k: int, p: int, tol: Optional[float] = None,
                          history: Optional[List[float]] = None) -> MisiurewiczCertificate:
        """
        Solves xi_(k+p)(lambda) = xi_k(lambda) by damped Newton from `seed`.

        Args:
            seed: Starting parameter.
            k: Preperiod (>= 1).
            p: Period (>= 1).
            tol: Residual tolerance, relative to max(1, |xi_k|).
            history: If given, receives |G| after every accepted step.

        Returns:
            MisiurewiczCertificate relabeled with the minimal (preperiod, period).
        """
        if k < 1 or p < 1:
            raise PreconditionViolation(f"preperiod and period must be >= 1, got k={k}, p={p}")
        tol = self.config.certify.newton_tol if tol is None else tol
        lam = ExpParameter.of(seed).lam

        try:
            g, dg, xi = self._g(lam, k, p)
        except EscapeRight as e:
            raise NoConvergence(f"seed orbit escapes at index {e.index}", steps=0) from e
        residual = abs(g)
        if history is not None:
            history.append(residual)

        steps = 0
        while residual > tol * max(1.0, abs(xi[k])):
            if steps >= self.settings.misiurewicz_max_steps:
                raise NoConvergence(f"no convergence after {steps} Newton steps", steps=steps, residual=residual)
            if dg == 0:
                raise SingularDerivative(f"G' vanishes at lambda = {lam!r}")
            delta = g / dg
            t = 1.0
            accepted = None
            for _ in range(self.settings.damping_halvings + 1):
                candidate = lam - t * delta
                try:
                    cg, cdg, cxi = self._g(candidate, k, p)
                    if abs(cg) < residual:
                        accepted = (candidate, cg, cdg, cxi)
                        break
                except EscapeRight:
                    pass
                t *= 0.5
            if accepted is None:
                raise NoConvergence(f"damped Newton stalled at residual {residual:.3g}",
                                    steps=steps, residual=residual)
            lam, g, dg, xi = accepted
            residual = abs(g)
            steps += 1
            if history is not None:
                history.append(residual)

        if lam == 0 or not cmath.isfinite(lam):
            raise NoConvergence("Newton left the parameter domain", steps=steps, residual=residual)

        k, p = self._minimal_pair(xi, k, p, tol)
        mult_log_mod = sum(math.log(abs(lam)) + xi[j].real for j in range(k, k + p))
        if not mult_log_mod > 0:
            raise NotRepelling(f"cycle multiplier log-modulus {mult_log_mod:.6g} is not positive")
        if not abs(lam) > math.exp(-1.0):
            raise BelowModulusBound(f"|lambda| = {abs(lam):.6g} <= 1/e")

        residual = abs(xi[k + p] - xi[k])
        scan = self._shadow_scan(lam, xi[:k + p + 1], k, p, mult_log_mod, residual, self.settings.horizon)
        bound = scan.max_modulus if scan.ok else max(abs(z) for z in xi)
        return MisiurewiczCertificate(
            lam=ExpParameter(lam=lam), preperiod=k, period=p, residual=residual,
            cycle_mult_log_mod=mult_log_mod, postsingular_bound=bound,
        )

    @staticmethod
    def _minimal_pair(xi: List[complex], k: int, p: int, tol: float) -> Tuple[int, int]:
        """Smallest (preperiod, period) whose equation also holds; multiples solve it too."""
        for kk in range(1, k + 1):
            for pp in range(1, p + 1):
                if p % pp:
                    continue
                if abs(xi[kk + pp] - xi[kk]) <= tol * max(1.0, abs(xi[kk])):
                    return kk, pp
        return k, p

    # ---------- verification ----------

    def _shadow_scan(self, lam: complex, xi: List[complex], k: int, p: int, mult_log_mod: float,
                     residual: float, horizon: int) -> _ShadowScan:
        """
        Re-iterates one period at a time from xi_k, comparing each return with
        xi_k against 10 * residual * |multiplier|^j; resynchronizes onto xi_k
        once the allowance reaches RESYNC_LEVEL.
        """
        anchor = xi[k]
        scale = max(1.0, abs(anchor))
        log_base = math.log(10.0 * max(residual, 1e-15 * scale))
        log_resync = math.log(RESYNC_LEVEL * scale)
        max_modulus = max(abs(z) for z in xi[:k + p + 1])

        z = xi[k + p]
        j = 1
        index = k + p
        periods = resyncs = 0
        max_drift = 0.0
        ratios: List[float] = []
        previous = None
        while index <= horizon:
            drift = abs(z - anchor)
            if drift > 0 and math.log(drift) > log_base + j * mult_log_mod:
                return _ShadowScan(False, index, periods, resyncs, max_drift, 0.0, max_modulus)
            periods += 1
            max_drift = max(max_drift, drift)
            if previous is not None and previous > 0 and drift > 0:
                ratios.append(math.log(drift / previous))
            previous = drift
            if log_base + (j + 1) * mult_log_mod > log_resync:
                z = anchor
                j = 0
                resyncs += 1
                previous = None
            for _ in range(p):
                if z.real > self.x_escape:
                    return _ShadowScan(False, index, periods, resyncs, max_drift, 0.0, max_modulus)
                z = exp_step(lam, z)
                max_modulus = max(max_modulus, abs(z))
            j += 1
            index += p

        growth = math.exp(sum(ratios) / len(ratios)) if ratios else 0.0
        return _ShadowScan(True, None, periods, resyncs, max_drift, growth, max_modulus)

    def verify_misiurewicz(self, cert: MisiurewiczCertificate, horizon: Optional[int] = None) -> VerificationReport:
        """
        Re-iterates the singular orbit from scratch and checks that it returns
        to xi_k every period within the allowance implied by the certificate.

        Raises:
            VerificationFailed: with the first failing orbit index.
        """
        horizon = self.settings.horizon if horizon is None else horizon
        k, p = cert.preperiod, cert.period
        if horizon < k + p:
            raise PreconditionViolation(f"horizon {horizon} is shorter than preperiod + period = {k + p}")
        lam = cert.lam.lam
        xi, _, escaped_at = self._xi_lists(lam, k + p)
        if escaped_at is not None:
            raise VerificationFailed(f"singular orbit escapes at index {escaped_at}", index=escaped_at)

        scan = self._shadow_scan(lam, xi, k, p, cert.cycle_mult_log_mod, cert.residual, horizon)
        if not scan.ok:
            raise VerificationFailed(f"orbit left the certified cycle at index {scan.failed_at}",
                                     index=scan.failed_at)
        return VerificationReport(
            verified=True, horizon=horizon, periods_checked=scan.periods, resyncs=scan.resyncs,
            max_drift=scan.max_drift, drift_per_period=scan.growth,
        )

    # ---------- expansion constants ----------

    def _postsingular_expansion(self, lam: complex, points: List[complex],
                                k_max: int) -> Tuple[int, float]:
        """Smallest n0 with min over points of log|Df^n0| > 0, and that minimum."""
        log_lam = math.log(abs(lam))
        for n0 in range(1, k_max + 1):
            worst = math.inf
            for zeta in points:
                z, log_mod = zeta, 0.0
                for _ in range(n0):
                    if z.real > self.x_escape:
                        log_mod = math.inf
                        break
                    log_mod += log_lam + z.real
                    z = exp_step(lam, z)
                worst = min(worst, log_mod)
            if worst > 0:
                return n0, worst
        return 0, 0.0

    def estimate_constants(self, base: MisiurewiczCertificate, samples: int,
                           region_radius: Optional[float] = None, k_max: int = 50,
                           seed: Optional[int] = None) -> EstimatedConstants:
        """
        Fits the expansion constants on orbits sampled in B(0, region_radius).

        M_hat:     smallest M with |f^k(z)| >= M  =>  |Df^k(z)| > 3.
        beta1_hat: largest beta with |Df^k(z)| >= beta * min_(1<=j<=k) |f^j(z)|.
        N_hat, c_hat: some j <= N + c |log|f(z)|| has |Df^j(z)| > 3.
        n0_hat, alpha_hat: |Df^n0| > e^alpha on the postsingular set (0 included).
        """
        if samples < 1:
            raise PreconditionViolation(f"samples must be >= 1, got {samples}")
        radius = self.settings.region_radius if region_radius is None else region_radius
        seed = self.config.density.seed if seed is None else seed
        lam = base.lam.lam
        log_lam = math.log(abs(lam))
        say(f"📐 Estimating constants for lambda={lam:.6g} ({samples} samples, k_max={k_max})", self.config)

        z0 = disk_points(seed, STREAM_CONSTANTS, samples, 0j, radius)
        z = z0.copy()
        n = len(z)
        alive = np.ones(n, dtype=bool)
        log_mod = np.zeros(n)
        min_mod = np.full(n, np.inf)
        first_expansion = np.full(n, -1, dtype=np.int64)
        first_mod = np.abs(lam * np.exp(z0))
        mdev_max = 0.0
        beta_log = np.inf

        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            for k in range(1, k_max + 1):
                active = alive & (z.real <= self.x_escape)
                if not active.any():
                    break
                log_mod[active] += log_lam + z.real[active]
                z = np.where(active, lam * np.exp(np.where(active, z, 0)), z)
                alive = active
                mod = np.abs(z)
                min_mod = np.where(alive, np.minimum(min_mod, mod), min_mod)

                weak = alive & (log_mod <= LOG3)
                if weak.any():
                    mdev_max = max(mdev_max, float(mod[weak].max()))
                ok = alive & (min_mod > 0)
                if ok.any():
                    beta_log = min(beta_log, float((log_mod[ok] - np.log(min_mod[ok])).min()))
                newly = alive & (first_expansion < 0) & (log_mod > LOG3)
                first_expansion[newly] = k

        violations: List[ConstantsViolation] = []
        for i in np.flatnonzero(first_expansion < 0):
            violations.append(ConstantsViolation(index=int(i), z=complex(z0[i]),
                                                 reason=f"no |Df^j| > 3 within {k_max} steps"))

        expanded = (first_expansion > 0) & (first_mod > 0)
        degenerate = not expanded.any() or not np.isfinite(beta_log)
        if expanded.any():
            u = np.abs(np.log(first_mod[expanded]))
            j = first_expansion[expanded].astype(float)
            c_hat = 0.0
            if np.ptp(u) > 0:
                c_hat = max(float(np.polyfit(u, j, 1)[0]), 0.0)
            n_hat = int(max(0.0, float(np.ceil(np.max(j - c_hat * u)))))
        else:
            c_hat, n_hat = 0.0, 0

        ps_points = self._xi_lists(lam, base.preperiod + base.period)[0][:base.preperiod + base.period]
        n0_hat, alpha_hat = self._postsingular_expansion(lam, ps_points, k_max)
        if n0_hat == 0:
            violations.append(ConstantsViolation(index=-1, z=0j,
                                                 reason=f"postsingular set not expanding within {k_max} steps"))

        constants = EstimatedConstants(
            M_hat=float(np.nextafter(mdev_max, np.inf)) if mdev_max > 0 else 0.0,
            beta1_hat=math.exp(beta_log) if np.isfinite(beta_log) else 0.0,
            N_hat=n_hat, c_hat=c_hat, alpha_hat=alpha_hat, n0_hat=n0_hat,
            violations=violations, samples_used=int(n), degenerate=bool(degenerate),
        )
        say(f"✅ M={constants.M_hat:.4g} beta1={constants.beta1_hat:.4g} N={n_hat} c={c_hat:.4g} "
            f"n0={n0_hat} alpha={alpha_hat:.4g} ({len(violations)} violations)", self.config)
        return constants

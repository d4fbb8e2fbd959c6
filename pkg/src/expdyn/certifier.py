# -*- coding: utf-8 -*-
"""
Cycle Certifier - detects, refines and certifies attracting cycles.

Two certification paths produce a Hyperbolic verdict:
  * cycle certificates: Newton-refined cycle point plus a disk that f^p maps
    strictly into itself;
  * trap-ball certificates: the singular orbit lands deep in the left
    half-plane, so a small ball around 0 is mapped into itself by f^(n+1).
Disk images are exact for the exponential up to a fixed round-off inflation.
"""
import cmath
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from .config import ExpDynConfig, get_config
from .data_models import (
    LOG_MOD_LIMIT, TAU, Classification, CycleCertificate, Disk, ExpParameter, OrbitTrace,
    TerminationReason, TrapBallCertificate, Verdict,
)
from .exceptions import (
    ContainmentFailed, DerivativeOverflow, EscapeRight, ExpDynError, NoConvergence,
    NoDeepLeftEntry, NotContractive, PreconditionViolation, SingularDerivative,
)
from .orbit_engine import OrbitEngine, ParamLike, exp_step, reduce_angle


def divisors(n: int) -> List[int]:
    """Divisors of n in increasing order."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


class CycleCertifier:
    """Certifies hyperbolicity of parameters of the exponential family."""

    def __init__(self, config: Optional[ExpDynConfig] = None, engine: Optional[OrbitEngine] = None):
        self.config = config or get_config()
        self.engine = engine or OrbitEngine(self.config)
        self.settings = self.config.certify
        self.x_escape = self.config.orbit.x_escape_re
        self.inflation = 1.0 + 2.0 ** -self.settings.radius_inflation_exp

    # ---------- disk arithmetic ----------

    def propagate_disk(self, p: ParamLike, d: Disk) -> Disk:
        """
        Image enclosure of a disk under f_lambda.

        f(B(c, rho)) is contained in B(f(c), |f(c)| (e^rho - 1)) because
        |e^(w-c) - 1| <= e^|w-c| - 1.
        """
        lam = ExpParameter.of(p).lam
        if d.center.real + d.radius > self.x_escape:
            raise EscapeRight(
                f"disk reaches Re = {d.center.real + d.radius:.6g} beyond {self.x_escape}",
                point=d.center,
            )
        image = exp_step(lam, d.center)
        radius = abs(image) * math.expm1(d.radius) * self.inflation
        return Disk(center=image, radius=radius)

    def _propagate(self, lam: complex, d: Disk, steps: int) -> Disk:
        for _ in range(steps):
            d = self.propagate_disk(lam, d)
        return d

    # ---------- cycle path ----------

    def detect_cycle(self, trace: OrbitTrace, eps_rel: Optional[float] = None,
                     transient: Optional[int] = None,
                     p_max: Optional[int] = None) -> Optional[Tuple[int, complex]]:
        """
        Brent cycle detection on the tail of a trace.

        Args:
            trace: Orbit trace; escaped traces never yield a cycle.
            eps_rel: Relative closeness tolerance (config eps_cycle_rel by default).
            transient: Points skipped before detection
                (default min(config transient, len(points) // 2)).
            p_max: Largest period reported.

        Returns:
            (period, point) with the period minimized over its divisors, or None.
        """
        eps_rel = self.settings.eps_cycle_rel if eps_rel is None else eps_rel
        p_max = self.settings.p_max if p_max is None else p_max
        points = trace.points
        if transient is None:
            transient = min(self.settings.transient, len(points) // 2)
        if len(points) < transient + 2:
            raise PreconditionViolation(
                f"trace has {len(points)} points, detection needs at least transient + 2 = {transient + 2}"
            )
        if trace.termination is TerminationReason.ESCAPED_RIGHT:
            return None

        def close(a: complex, b: complex) -> bool:
            return abs(b - a) <= eps_rel * max(1.0, abs(a))

        end = len(points)
        tortoise = transient
        hare = transient + 1
        power = lam = 1
        while not close(points[tortoise], points[hare]):
            if power == lam:
                if power > p_max:
                    return None
                tortoise = hare
                power *= 2
                lam = 0
            hare += 1
            lam += 1
            if hare >= end:
                return None
        if lam > p_max:
            return None

        for d in divisors(lam):
            if close(points[tortoise], points[tortoise + d]):
                return d, points[tortoise]
        return lam, points[tortoise]

    def _period_map(self, lam: complex, z: complex, period: int) -> Tuple[complex, float, float]:
        """f^period(z) with the log-scale multiplier (log|Df^period(z)|, arg)."""
        log_lam = math.log(abs(lam))
        arg_lam = cmath.phase(lam)
        log_mod = 0.0
        arg = 0.0
        for k in range(period):
            if z.real > self.x_escape:
                raise EscapeRight(f"cycle orbit escapes at step {k}", index=k, point=z)
            log_mod += log_lam + z.real
            arg = reduce_angle(arg + arg_lam + math.remainder(z.imag, TAU))
            z = exp_step(lam, z)
        return z, log_mod, arg

    def refine_cycle(self, p: ParamLike, z_guess: complex, period: int,
                     tol: Optional[float] = None) -> complex:
        """
        Newton refinement of a cycle point on F(z) = f^period(z) - z.

        Returns:
            z* with |f^period(z*) - z*| <= tol * max(1, |z*|).
        """
        if period < 1:
            raise PreconditionViolation(f"period must be >= 1, got {period}")
        lam = ExpParameter.of(p).lam
        tol = self.settings.newton_tol if tol is None else tol
        z = complex(z_guess)
        residual = math.inf
        for step in range(self.settings.newton_max_steps + 1):
            image, log_mod, arg = self._period_map(lam, z, period)
            value = image - z
            residual = abs(value)
            if residual <= tol * max(1.0, abs(z)):
                return z
            if step == self.settings.newton_max_steps:
                break
            if log_mod > LOG_MOD_LIMIT:
                raise DerivativeOverflow(f"cycle multiplier log-modulus {log_mod:.6g} exceeds {LOG_MOD_LIMIT}")
            slope = cmath.rect(math.exp(log_mod), arg) - 1.0
            if slope == 0:
                raise SingularDerivative(f"Df^{period} - 1 vanishes at {z!r}")
            z = z - value / slope
            if not cmath.isfinite(z):
                break
        raise NoConvergence(
            f"Newton did not converge for period {period} (residual {residual:.3g})",
            steps=self.settings.newton_max_steps, residual=residual,
        )

    def certify_attracting(self, p: ParamLike, z_star: complex, period: int) -> CycleCertificate:
        """Finds the largest radius in the schedule whose disk f^period maps strictly into itself."""
        param = ExpParameter.of(p)
        lam = param.lam
        _, mult_log_mod, _ = self._period_map(lam, z_star, period)
        if mult_log_mod > -self.settings.indifferent_margin:
            raise NotContractive(
                f"multiplier log-modulus {mult_log_mod:.6g} is not below -{self.settings.indifferent_margin:g}"
            )

        for exponent in range(1, self.settings.rho_min_exp + 1):
            disk = Disk(center=z_star, radius=2.0 ** -exponent)
            try:
                final = self._propagate(lam, disk, period)
            except EscapeRight:
                continue
            if disk.strictly_contains(final):
                return CycleCertificate(
                    lam=param, period=period, disk=disk, final_disk=final,
                    multiplier_log_mod=mult_log_mod,
                )
        raise NotContractive(f"no radius down to 2^-{self.settings.rho_min_exp} certifies period {period}")

    # ---------- trap-ball path ----------

    def trap_candidates(self, lam: complex, points: List[complex], log_mods: List[float],
                        start: int = 1, depth: Optional[float] = None) -> List[int]:
        """Indices n >= start with Re f^n(0) <= -depth and a small enough derivative."""
        depth = self.settings.trap_min_depth if depth is None else depth
        if len(points) <= start:
            return []
        re = np.array([z.real for z in points[start:]])
        lm = np.array(log_mods[start:])
        mask = (re <= -depth) & (re + lm + math.log(abs(lam)) < -2.0)
        return [start + int(i) for i in np.flatnonzero(mask)]

    def _trap_attempt(self, param: ExpParameter, n: int, P: float, log_mod: float) -> Optional[TrapBallCertificate]:
        rho = min(1.0, self.settings.trap_rho_factor * math.exp(-log_mod))
        if rho <= 0.0:
            return None
        ball = Disk(center=0j, radius=rho)
        try:
            final = self._propagate(param.lam, ball, n + 1)
        except EscapeRight:
            return None
        if not ball.strictly_contains(final):
            return None
        return TrapBallCertificate(lam=param, n=n, P=P, rho=rho, final_disk=final, log_mod=log_mod)

    def trap_from_orbit(self, param: ExpParameter, points: List[complex], log_mods: List[float],
                        start: int = 1, attempts: int = 0,
                        depth: Optional[float] = None) -> Tuple[Optional[TrapBallCertificate], int]:
        """Tries screened indices in order; returns (certificate or None, attempts used)."""
        for n in self.trap_candidates(param.lam, points, log_mods, start, depth):
            if attempts >= self.settings.trap_max_attempts:
                break
            attempts += 1
            cert = self._trap_attempt(param, n, points[n].real, log_mods[n])
            if cert is not None:
                return cert, attempts
        return None, attempts

    def certify_trap_ball(self, p: ParamLike, budget: int) -> TrapBallCertificate:
        """
        Trap-ball certification around the singular value 0.

        Scans f^n(0) for n <= budget for a deep-left landing with small
        derivative, then checks f^(n+1)(B(0, rho)) strictly inside B(0, rho).
        """
        if budget < 1:
            raise PreconditionViolation(f"budget must be >= 1, got {budget}")
        param = ExpParameter.of(p)
        points, log_mods, _, _, _ = self.engine.run(param.lam, 0j, budget)
        candidates = self.trap_candidates(param.lam, points, log_mods)
        if not candidates:
            raise NoDeepLeftEntry(f"singular orbit of {param.lam!r} never lands deep left within {budget} steps")
        cert, attempts = self.trap_from_orbit(param, points, log_mods)
        if cert is None:
            raise ContainmentFailed(f"{attempts} screened landing(s) failed trap-ball containment")
        return cert

    # ---------- classification ----------

    def _try_cycle(self, param: ExpParameter, trace: OrbitTrace, p_max: int) -> Optional[CycleCertificate]:
        # detection looks at the newest 4 * p_max + 2 points
        window = 4 * p_max + 2
        transient = max(min(self.settings.transient, len(trace.points) // 2), len(trace.points) - window)
        found = self.detect_cycle(trace, transient=transient, p_max=p_max)
        if found is None:
            return None
        period, point = found
        # Brent can return a multiple of the true period
        for d in divisors(period):
            try:
                z_star = self.refine_cycle(param, point, d)
                return self.certify_attracting(param, z_star, d)
            except ExpDynError:
                continue
        return None

    def classify(self, p: ParamLike, budget: Optional[int] = None,
                 p_max: Optional[int] = None) -> Classification:
        """
        Classifies a parameter from its singular orbit.

        Args:
            p: The parameter lambda.
            budget: Orbit budget (config n_max by default).
            p_max: Largest cycle period considered.

        Returns:
            Classification; Hyperbolic carries a cycle or trap-ball certificate.
        """
        param = ExpParameter.of(p)
        budget = self.settings.n_max if budget is None else budget
        p_max = self.settings.p_max if p_max is None else p_max
        if budget < 1 or p_max < 1:
            raise PreconditionViolation("budget and p_max must be >= 1")
        lam = param.lam

        first_stage = min(budget, self.settings.transient + 4 * p_max)
        points, log_mods, args, min_mod, reason = self.engine.run(lam, 0j, first_stage)
        attempts = 0
        scanned = 1
        while True:
            if reason is TerminationReason.ESCAPED_RIGHT:
                return Classification(lam=param, verdict=Verdict.ESCAPE_SUSPECT,
                                      iterations_used=len(points) - 1)

            trap, attempts = self.trap_from_orbit(param, points, log_mods, start=scanned, attempts=attempts)
            scanned = len(points)
            if trap is not None:
                return Classification(lam=param, verdict=Verdict.HYPERBOLIC, period=trap.period_bound,
                                      certificate=trap, iterations_used=len(points) - 1)

            if len(points) >= 3:
                trace = OrbitTrace(lam=param, points=points, log_mods=log_mods, args=args,
                                   min_mod=min_mod, termination=reason)
                cert = self._try_cycle(param, trace, p_max)
                if cert is not None:
                    return Classification(lam=param, verdict=Verdict.HYPERBOLIC, period=cert.period,
                                          certificate=cert, iterations_used=len(points) - 1)

            remaining = budget - (len(points) - 1)
            if reason is not TerminationReason.BUDGET_EXHAUSTED or remaining <= 0:
                return Classification(lam=param, verdict=Verdict.UNDECIDED,
                                      iterations_used=len(points) - 1)

            more, more_lm, more_args, more_min, reason = self.engine.run(lam, points[-1], remaining)
            base_lm, base_arg = log_mods[-1], args[-1]
            points = points + more[1:]
            log_mods = log_mods + [base_lm + v for v in more_lm[1:]]
            args = args + [reduce_angle(base_arg + v) for v in more_args[1:]]
            min_mod = min(min_mod, more_min)

    # ---------- re-verification ----------

    def reverify(self, certificate: Union[CycleCertificate, TrapBallCertificate]) -> bool:
        """Re-runs disk propagation; True when the stored final disk is reproduced and contained."""
        lam = certificate.lam.lam
        if isinstance(certificate, CycleCertificate):
            start, steps = certificate.disk, certificate.period
        else:
            start, steps = Disk(center=0j, radius=certificate.rho), certificate.n + 1
        try:
            final = self._propagate(lam, start, steps)
        except EscapeRight:
            return False
        return final == certificate.final_disk and start.strictly_contains(final)

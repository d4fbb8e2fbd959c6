# -*- coding: utf-8 -*-
"""
Transfer Engine - moves backward orbits between nearby parameters.

Given z_0..z_n with lambda1 * exp(z_(j+1)) = z_j, the recursion

    y_0 = z_0,    y_k = z_k + Log(lambda1 / lambda2) + Log(y_(k-1) / z_(k-1))

produces points with lambda2 * exp(y_k) = y_(k-1) exactly (up to round-off),
so y_n shadows z_n under the second parameter. The engine also inverts
xi_n(lambda) = target by Newton.
"""
import cmath
import math
from typing import List, Optional

from .config import ExpDynConfig, get_config
from .data_models import (
    TAU, BackwardOrbit, ExpParameter, OrbitTrace, TransferBoundCheck, TransferResult,
)
from .exceptions import (
    BranchViolation, DeviationBlowup, EscapeRight, NoConvergence, PreconditionViolation,
    SingularDerivative, ZeroPoint,
)
from .misiurewicz_solver import MisiurewiczSolver
from .orbit_engine import OrbitEngine, ParamLike

MAX_BETA = 0.1
MAX_REL_DEV = 0.5
# x above this makes exp(e^(x+2)) overflow
MAX_BOUND_LEVEL = 3.0


class TransferEngine:
    """Parametric shadowing of backward orbits and xi_n inversion."""

    def __init__(self, config: Optional[ExpDynConfig] = None, engine: Optional[OrbitEngine] = None):
        self.config = config or get_config()
        self.engine = engine or OrbitEngine(self.config)
        self.solver = MisiurewiczSolver(self.config, self.engine)

    def build_backward_orbit(self, p: ParamLike, trace: OrbitTrace) -> BackwardOrbit:
        """Reindexes a forward trace so that z_n is its start and z_0 its end."""
        for index, point in enumerate(trace.points):
            if point == 0:
                raise ZeroPoint(f"orbit point {index} is zero", index=index)
        return BackwardOrbit(lambda1=ExpParameter.of(p), z=list(reversed(trace.points)))

    def backward_orbit_from(self, p: ParamLike, start: complex, n: int) -> BackwardOrbit:
        """Backward orbit whose z_n is `start`, from n forward steps of lambda1."""
        trace = self.engine.iterate_orbit(p, start, n)
        if trace.n < n:
            raise EscapeRight(f"forward orbit of {start!r} stops after {trace.n} of {n} steps",
                              index=trace.n, point=trace.points[-1])
        return self.build_backward_orbit(p, trace)

    def transfer_backward_orbit(self, b: BackwardOrbit, lambda2: ParamLike) -> TransferResult:
        """
        Shadows a lambda1 backward orbit under lambda2.

        Raises:
            PreconditionViolation: if |Log(lambda1 / lambda2)| >= 0.1.
            BranchViolation: if some |Log(y_(k-1) / z_(k-1))| >= pi/2.
            DeviationBlowup: if some |y_k - z_k| / |z_k| >= 0.5.
        """
        param2 = ExpParameter.of(lambda2)
        shift = cmath.log(b.lambda1.lam / param2.lam)
        beta = abs(shift)
        if beta >= MAX_BETA:
            raise PreconditionViolation(f"|Log(lambda1/lambda2)| = {beta:.3g} must be below {MAX_BETA}")

        z = b.z
        y: List[complex] = [z[0]]
        rel_devs = [0.0]
        log_deriv_ratio = 0j
        for k in range(1, len(z)):
            ratio_log = cmath.log(y[k - 1] / z[k - 1])
            if abs(ratio_log) >= math.pi / 2:
                raise BranchViolation(f"Log(y/z) left the principal strip at index {k - 1}", index=k - 1)
            log_deriv_ratio += ratio_log
            y_k = z[k] + shift + ratio_log
            rel = abs(y_k - z[k]) / abs(z[k])
            if rel >= MAX_REL_DEV:
                raise DeviationBlowup(f"relative deviation {rel:.3g} at index {k}", index=k)
            y.append(y_k)
            rel_devs.append(rel)

        max_dev = max(abs(yk - zk) for yk, zk in zip(y, z))
        return TransferResult(
            lambda2=param2, y=y, beta=beta, max_dev=max_dev,
            log_deriv_ratio=log_deriv_ratio, rel_devs=rel_devs,
        )

    def cocycle_log_ratio(self, b: BackwardOrbit, result: TransferResult) -> complex:
        """
        log Dg2^n(y_n) - log Dg1^n(z_n) from the two derivative cocycles.

        The real part is exact in log scale; the imaginary part is reduced
        to (-pi, pi].
        """
        lam1, lam2 = b.lambda1.lam, result.lambda2.lam
        log_mod = 0.0
        arg = 0.0
        for k in range(1, len(b.z)):
            log_mod += (math.log(abs(lam2)) + result.y[k].real) - (math.log(abs(lam1)) + b.z[k].real)
            arg += (cmath.phase(lam2) + result.y[k].imag) - (cmath.phase(lam1) + b.z[k].imag)
        return complex(log_mod, math.remainder(arg, TAU))

    @staticmethod
    def min_segment_log_derivative(b: BackwardOrbit) -> float:
        """
        min over j >= 1, j + k <= n of log|Dg1^j(g1^k(z_n))|.

        Dg1^j(z_m) is the product of the next j forward points, so this is
        the minimum sum of log|z| over contiguous runs of z_0..z_(n-1).
        """
        best = math.inf
        running_max = 0.0
        prefix = 0.0
        # walking forward in time: z_(n-1), ..., z_0
        for z in reversed(b.z[:-1]):
            prefix += math.log(abs(z))
            best = min(best, prefix - running_max)
            running_max = max(running_max, prefix)
        return best

    def check_bounds(self, b: BackwardOrbit, result: TransferResult, x: float) -> TransferBoundCheck:
        """Compares a transfer run with the asymptotic deviation and derivative bounds at level x."""
        if x > MAX_BOUND_LEVEL:
            raise PreconditionViolation(f"bound check needs x <= {MAX_BOUND_LEVEL}, got {x}")
        dev_bound = result.beta * math.exp(math.exp(x + 2.0))
        deriv_bound = math.exp(-math.exp(x))
        floor_log = -math.exp(x + 1.0)
        return TransferBoundCheck(
            x=x,
            dev_bound=dev_bound,
            dev_ok=result.max_dev < dev_bound or result.max_dev == 0.0,
            deriv_bound=deriv_bound,
            deriv_ok=abs(result.log_deriv_ratio) < deriv_bound,
            precondition_floor_log=floor_log,
            precondition_ok=self.min_segment_log_derivative(b) > floor_log,
        )

    def solve_xi_inverse(self, seed: ParamLike, n: int, target: complex,
                         tol: Optional[float] = None) -> ExpParameter:
        """
        Newton on xi_n(lambda) - target.

        Returns:
            lambda with |xi_n(lambda) - target| <= tol * max(1, |target|).
        """
        if n < 1:
            raise PreconditionViolation(f"n must be >= 1, got {n}")
        tol = self.config.certify.newton_tol if tol is None else tol
        max_steps = self.config.misiurewicz.misiurewicz_max_steps
        halvings = self.config.misiurewicz.damping_halvings
        scale = max(1.0, abs(target))

        def evaluate(lam: complex):
            orbit = self.solver.xi_orbit(lam, n, truncate=True)
            if orbit.escaped_at is not None:
                return None
            return orbit.xi[n] - target, orbit.dxi[n]

        lam = ExpParameter.of(seed).lam
        state = evaluate(lam)
        if state is None:
            raise NoConvergence(f"xi orbit of the seed escapes before step {n}", steps=0)
        value, slope = state
        if slope == 0:
            raise SingularDerivative(f"d xi_{n} / d lambda vanishes at the seed")

        residual = abs(value)
        steps = 0
        while residual > tol * scale:
            if steps >= max_steps:
                raise NoConvergence(f"no convergence after {steps} steps", steps=steps, residual=residual)
            if slope == 0:
                raise SingularDerivative(f"d xi_{n} / d lambda vanishes at {lam!r}")
            delta = value / slope
            t = 1.0
            accepted = None
            for _ in range(halvings + 1):
                candidate = lam - t * delta
                if candidate != 0:
                    trial = evaluate(candidate)
                    if trial is not None and abs(trial[0]) < residual:
                        accepted = (candidate, trial)
                        break
                t *= 0.5
            if accepted is None:
                raise NoConvergence(f"damped Newton stalled at residual {residual:.3g}",
                                    steps=steps, residual=residual)
            lam, (value, slope) = accepted
            residual = abs(value)
            steps += 1
        return ExpParameter(lam=lam)

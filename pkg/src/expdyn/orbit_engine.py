# -*- coding: utf-8 -*-
"""
Orbit Engine - overflow-safe iteration of f(z) = lambda * exp(z).

Keeps the derivative cocycle in log scale (Df = f for this family, so
|Df^n(z)| is the product of the orbit moduli) and provides the half-plane
and grid-square geometry used by the measure experiments.
"""
import cmath
import math
from typing import Callable, List, Optional, Tuple, Union

from .config import ExpDynConfig, get_config
from .data_models import (
    TAU, DerivativeCocycle, ExpParameter, FirstEntryRecord, GridSquare, HalfPlane,
    OrbitTrace, TerminationReason,
)
from .exceptions import EscapeRight, PreconditionViolation

ParamLike = Union[ExpParameter, complex, float, int]


def reduce_angle(theta: float) -> float:
    """Reduces an angle to [0, 2pi)."""
    a = theta % TAU
    # x % TAU rounds up to TAU for tiny negative x
    return 0.0 if a >= TAU else a


def exp_step(lam: complex, z: complex) -> complex:
    """lambda * exp(z) with the imaginary part reduced exactly modulo 2pi first."""
    return lam * cmath.exp(complex(z.real, math.remainder(z.imag, TAU)))


def square_of(z: complex) -> GridSquare:
    """Grid square containing z (floor on both coordinates)."""
    if not cmath.isfinite(z):
        raise PreconditionViolation(f"square_of needs a finite point, got {z!r}")
    return GridSquare(j=math.floor(z.imag / TAU), k=math.floor(z.real / TAU))


class OrbitEngine:
    """Iterates f_lambda and accumulates the derivative cocycle."""

    def __init__(self, config: Optional[ExpDynConfig] = None):
        self.config = config or get_config()
        self.x_escape = self.config.orbit.x_escape_re

    def step(self, p: ParamLike, z: complex) -> complex:
        """
        Applies f_lambda once.

        Args:
            p: The parameter lambda.
            z: A point with Re(z) <= x_escape_re.

        Returns:
            lambda * exp(z).
        """
        lam = ExpParameter.of(p).lam
        if z.real > self.x_escape:
            raise EscapeRight(f"Re(z) = {z.real:.6g} exceeds escape threshold {self.x_escape}", point=z)
        return exp_step(lam, z)

    def run(self, lam: complex, z0: complex, n_max: int,
            stop: Optional[Callable[[complex], bool]] = None,
            ) -> Tuple[List[complex], List[float], List[float], float, TerminationReason]:
        """
        Raw iteration loop shared by iterate_orbit, first_entry and the certifier.

        Returns (points, log_mods, args, min_mod, termination).
        """
        log_lam = math.log(abs(lam))
        arg_lam = cmath.phase(lam)
        x_escape = self.x_escape

        points = [z0]
        log_mods = [0.0]
        args = [0.0]
        min_mod = math.inf
        log_mod = 0.0
        arg = 0.0
        z = z0

        if stop is not None and stop(z):
            return points, log_mods, args, min_mod, TerminationReason.PREDICATE_HIT
        if z.real > x_escape:
            return points, log_mods, args, min_mod, TerminationReason.ESCAPED_RIGHT

        for _ in range(n_max):
            y_red = math.remainder(z.imag, TAU)
            log_mod += log_lam + z.real
            arg = reduce_angle(arg + arg_lam + y_red)
            z_next = lam * cmath.exp(complex(z.real, y_red))

            points.append(z_next)
            log_mods.append(log_mod)
            args.append(arg)
            modulus = abs(z_next)
            if modulus < min_mod:
                min_mod = modulus
            z = z_next

            if stop is not None and stop(z):
                return points, log_mods, args, min_mod, TerminationReason.PREDICATE_HIT
            if z.real > x_escape:
                return points, log_mods, args, min_mod, TerminationReason.ESCAPED_RIGHT
            if z == 0:
                # exp underflowed to an exact zero; the imaginary part is lost
                return points, log_mods, args, min_mod, TerminationReason.UNDERFLOWED

        return points, log_mods, args, min_mod, TerminationReason.BUDGET_EXHAUSTED

    def iterate_orbit(self, p: ParamLike, z0: complex, n_max: int,
                      stop: Optional[HalfPlane] = None) -> OrbitTrace:
        """
        Iterates up to n_max steps, stopping early on a half-plane hit or escape.

        Args:
            p: The parameter lambda.
            z0: Starting point.
            n_max: Step budget (>= 0).
            stop: Optional half-plane; iteration stops at the first point inside it.

        Returns:
            OrbitTrace with the termination reason set.
        """
        if n_max < 0:
            raise PreconditionViolation(f"n_max must be >= 0, got {n_max}")
        param = ExpParameter.of(p)
        predicate = stop.contains if stop is not None else None
        points, log_mods, args, min_mod, reason = self.run(param.lam, complex(z0), n_max, predicate)
        return OrbitTrace(
            lam=param, points=points, log_mods=log_mods, args=args,
            min_mod=min_mod, termination=reason,
        )

    def first_entry(self, p: ParamLike, z0: complex, target: HalfPlane,
                    t_max: int) -> Optional[FirstEntryRecord]:
        """
        First time n <= t_max at which the orbit of z0 lies in target.

        Returns None when the orbit does not enter within t_max steps or
        escapes right before entering.
        """
        if t_max < 1:
            raise PreconditionViolation(f"t_max must be >= 1, got {t_max}")
        param = ExpParameter.of(p)
        points, log_mods, args, _, reason = self.run(param.lam, complex(z0), t_max, target.contains)
        if reason is not TerminationReason.PREDICATE_HIT:
            return None
        n = len(points) - 1
        return FirstEntryRecord(
            n=n, landing=points[n],
            cocycle=DerivativeCocycle(log_mod=log_mods[n], arg=args[n]),
        )

    @staticmethod
    def square_of(z: complex) -> GridSquare:
        return square_of(z)

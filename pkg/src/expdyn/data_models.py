# -*- coding: utf-8 -*-
"""
expdyn data models.

Core data structures of the exponential family laboratory. All models are
frozen pydantic models; validators enforce the invariants of each type.
"""
import cmath
import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

TAU = 2.0 * math.pi
# |Df| factors are reconstructed as complex numbers only inside this log range
LOG_MOD_LIMIT = 600.0


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# ==================== orbit-core ====================

class ExpParameter(_Frozen):
    """The parameter lambda of f(z) = lambda * exp(z)."""
    lam: complex = Field(description="lambda, finite and nonzero")

    @field_validator("lam")
    @classmethod
    def _finite_nonzero(cls, value: complex) -> complex:
        if not cmath.isfinite(value):
            raise ValueError(f"lambda must be finite, got {value!r}")
        if value == 0:
            raise ValueError("lambda must be nonzero")
        return value

    @classmethod
    def of(cls, value: Union["ExpParameter", complex, float, int, Tuple[float, float]]) -> "ExpParameter":
        """Coerces a complex number, a (re, im) pair or an ExpParameter."""
        if isinstance(value, ExpParameter):
            return value
        if isinstance(value, (tuple, list)):
            value = complex(float(value[0]), float(value[1]))
        return cls(lam=complex(value))

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.lam))

    @property
    def arg(self) -> float:
        return cmath.phase(self.lam)


class TerminationReason(Enum):
    """Why an orbit iteration stopped."""
    BUDGET_EXHAUSTED = "BudgetExhausted"
    ESCAPED_RIGHT = "EscapedRight"
    PREDICATE_HIT = "PredicateHit"
    UNDERFLOWED = "Underflowed"


class DerivativeCocycle(_Frozen):
    """|Df^n(z)| in log scale plus its argument reduced to [0, 2pi)."""
    log_mod: float = Field(description="natural log of |Df^n(z)|")
    arg: float = Field(default=0.0, ge=0.0, lt=TAU, description="argument of Df^n(z), radians")

    def to_complex(self) -> complex:
        """Reconstructs Df^n(z); only defined for moderate log_mod."""
        if abs(self.log_mod) > LOG_MOD_LIMIT:
            from .exceptions import DerivativeOverflow
            raise DerivativeOverflow(f"log|Df| = {self.log_mod:.6g} outside [-{LOG_MOD_LIMIT}, {LOG_MOD_LIMIT}]")
        return cmath.rect(math.exp(self.log_mod), self.arg)


class Side(Enum):
    RIGHT = "Right"
    LEFT = "Left"


class HalfPlane(_Frozen):
    """Right: {Re z > level}; Left: the complement {Re z <= level}."""
    side: Side
    level: float

    @classmethod
    def right(cls, level: float) -> "HalfPlane":
        return cls(side=Side.RIGHT, level=level)

    @classmethod
    def left(cls, level: float) -> "HalfPlane":
        return cls(side=Side.LEFT, level=level)

    def contains(self, z: complex) -> bool:
        if self.side is Side.RIGHT:
            return z.real > self.level
        return z.real <= self.level


class GridSquare(_Frozen):
    """The square [2k*pi, (2k+2)*pi) x [2j*pi, (2j+2)*pi)."""
    j: int = Field(description="imaginary lattice index")
    k: int = Field(description="real lattice index")

    @property
    def left(self) -> float:
        return TAU * self.k

    @property
    def bottom(self) -> float:
        return TAU * self.j

    @property
    def center(self) -> complex:
        return complex(self.left + math.pi, self.bottom + math.pi)

    @property
    def diameter(self) -> float:
        return 2.0 * math.sqrt(2.0) * math.pi

    def contains(self, z: complex) -> bool:
        return self.left <= z.real < self.left + TAU and self.bottom <= z.imag < self.bottom + TAU


class DyadicSquare(_Frozen):
    """Square of side 2^-scale_exp at lattice position (a, b); scaling by 2*pi*2^k gives a GridSquare."""
    scale_exp: int = Field(ge=1, description="k, the square has side 2^-k")
    lattice: Tuple[int, int] = Field(description="(a, b): lower-left corner is (a + i b) * 2^-k")

    @property
    def side(self) -> float:
        return 2.0 ** -self.scale_exp

    @property
    def origin(self) -> complex:
        a, b = self.lattice
        return complex(a * self.side, b * self.side)

    @property
    def area(self) -> float:
        return self.side * self.side

    def to_grid_square(self) -> GridSquare:
        a, b = self.lattice
        return GridSquare(j=b, k=a)

    def contains(self, z: complex) -> bool:
        o = self.origin
        return o.real <= z.real < o.real + self.side and o.imag <= z.imag < o.imag + self.side


class OrbitTrace(_Frozen):
    """Orbit z_0..z_n of f_lambda with its derivative cocycle after each step."""
    lam: ExpParameter
    points: List[complex] = Field(description="z_0 .. z_n")
    log_mods: List[float] = Field(description="log|Df^k(z_0)| for k = 0..n")
    args: List[float] = Field(description="arg Df^k(z_0) in [0, 2pi) for k = 0..n")
    min_mod: float = Field(description="min |z_j| over 1 <= j <= n (inf for n = 0)")
    termination: TerminationReason

    @model_validator(mode="after")
    def _aligned(self) -> "OrbitTrace":
        if not self.points:
            raise ValueError("an orbit trace holds at least z_0")
        if not len(self.points) == len(self.log_mods) == len(self.args):
            raise ValueError("points and cocycle sequences must have equal length")
        return self

    @property
    def n(self) -> int:
        return len(self.points) - 1

    def cocycle(self, k: int) -> DerivativeCocycle:
        return DerivativeCocycle(log_mod=self.log_mods[k], arg=self.args[k])


class FirstEntryRecord(_Frozen):
    """First entry of an orbit into a half-plane."""
    n: int = Field(ge=0, description="first entry time n(z)")
    landing: complex = Field(description="f^n(z)")
    cocycle: DerivativeCocycle = Field(description="Df^n(z) in log scale")


# ==================== certify ====================

class Disk(_Frozen):
    """Closed disk B(center, radius)."""
    center: complex
    radius: float = Field(ge=0.0)

    @field_validator("radius")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("disk radius must be finite")
        return value

    def contains(self, w: complex) -> bool:
        return abs(w - self.center) <= self.radius

    def strictly_contains(self, other: "Disk") -> bool:
        return abs(other.center - self.center) + other.radius < self.radius


class CycleCertificate(_Frozen):
    """A disk mapped strictly into itself by f^period: an attracting cycle meets it."""
    kind: Literal["cycle"] = "cycle"
    lam: ExpParameter
    period: int = Field(ge=1)
    disk: Disk
    final_disk: Disk
    multiplier_log_mod: float = Field(description="log|(f^period)'| at the cycle point")

    @model_validator(mode="after")
    def _contracting(self) -> "CycleCertificate":
        if not self.disk.strictly_contains(self.final_disk):
            raise ValueError("final disk is not strictly inside the certified disk")
        if not self.multiplier_log_mod < 0:
            raise ValueError("multiplier of a certified cycle must have modulus < 1")
        return self


class TrapBallCertificate(_Frozen):
    """B(0, rho) with f^(n+1)(B) strictly inside B: an attracting cycle of period dividing n+1."""
    kind: Literal["trap"] = "trap"
    lam: ExpParameter
    n: int = Field(ge=1, description="index of the deep-left landing of the singular orbit")
    P: float = Field(description="Re f^n(0)")
    rho: float = Field(gt=0.0, le=1.0)
    final_disk: Disk
    log_mod: float = Field(default=0.0, description="log|Df^n(0)| at the landing")

    @model_validator(mode="after")
    def _trapped(self) -> "TrapBallCertificate":
        if not self.P < 0:
            raise ValueError("trap-ball landing must lie in the left half-plane")
        if not Disk(center=0j, radius=self.rho).strictly_contains(self.final_disk):
            raise ValueError("final disk is not strictly inside B(0, rho)")
        return self

    @property
    def period_bound(self) -> int:
        return self.n + 1


Certificate = Annotated[Union[CycleCertificate, TrapBallCertificate], Field(discriminator="kind")]


class Verdict(Enum):
    HYPERBOLIC = "Hyperbolic"
    ESCAPE_SUSPECT = "EscapeSuspect"
    UNDECIDED = "Undecided"


class Classification(_Frozen):
    """Classification of one parameter; Hyperbolic always carries a certificate."""
    lam: ExpParameter
    verdict: Verdict
    period: Optional[int] = Field(default=None, description="cycle period (trap: n+1, a multiple of it)")
    certificate: Optional[Certificate] = None
    iterations_used: int = Field(ge=0)

    @model_validator(mode="after")
    def _certified(self) -> "Classification":
        if self.verdict is Verdict.HYPERBOLIC and (self.certificate is None or self.period is None):
            raise ValueError("a Hyperbolic verdict requires a certificate and a period")
        return self


# ==================== misiurewicz ====================

class ParameterOrbit(_Frozen):
    """xi_k(lambda) = f^k(0) and d xi_k / d lambda."""
    lam: ExpParameter
    xi: List[complex]
    dxi: List[complex]
    escaped_at: Optional[int] = Field(default=None, description="index of the first escaping xi_k, if truncated")

    @property
    def n(self) -> int:
        return len(self.xi) - 1


class MisiurewiczCertificate(_Frozen):
    """Numerical evidence that the singular orbit is preperiodic to a repelling cycle."""
    lam: ExpParameter
    preperiod: int = Field(ge=1)
    period: int = Field(ge=1)
    residual: float = Field(ge=0.0, description="|xi_(k+p) - xi_k|")
    cycle_mult_log_mod: float
    postsingular_bound: float

    @model_validator(mode="after")
    def _repelling(self) -> "MisiurewiczCertificate":
        if not self.cycle_mult_log_mod > 0:
            raise ValueError("target cycle is not repelling")
        if not abs(self.lam.lam) > math.exp(-1.0):
            raise ValueError("|lambda| must exceed 1/e")
        if not math.isfinite(self.postsingular_bound):
            raise ValueError("postsingular bound must be finite")
        return self


class VerificationReport(_Frozen):
    """Outcome of re-iterating a Misiurewicz certificate."""
    verified: bool
    horizon: int
    periods_checked: int
    resyncs: int
    max_drift: float
    drift_per_period: float = Field(description="geometric mean growth of drift per period")


class ConstantsViolation(_Frozen):
    index: int
    z: complex
    reason: str


class EstimatedConstants(_Frozen):
    """Empirical stand-ins for the existential expansion constants."""
    M_hat: float
    beta1_hat: float
    N_hat: int
    c_hat: float
    alpha_hat: float
    n0_hat: int
    violations: List[ConstantsViolation] = Field(default_factory=list)
    samples_used: int = 0
    degenerate: bool = False


# ==================== transfer ====================

class BackwardOrbit(_Frozen):
    """z_0..z_n with lambda1 * exp(z_(j+1)) = z_j."""
    lambda1: ExpParameter
    z: List[complex]

    @model_validator(mode="after")
    def _chained(self) -> "BackwardOrbit":
        lam = self.lambda1.lam
        for j, zj in enumerate(self.z):
            if zj == 0:
                raise ValueError(f"backward orbit point z_{j} is zero")
        for j in range(len(self.z) - 1):
            image = lam * cmath.exp(self.z[j + 1])
            if abs(image - self.z[j]) > 1e-9 * max(1.0, abs(self.z[j])):
                raise ValueError(f"z_{j + 1} is not a preimage of z_{j}")
        return self

    @property
    def n(self) -> int:
        return len(self.z) - 1


class TransferResult(_Frozen):
    """Orbit y_0..y_n of lambda2 shadowing a backward orbit of lambda1."""
    lambda2: ExpParameter
    y: List[complex]
    beta: float = Field(ge=0.0, description="|Log(lambda1 / lambda2)|")
    max_dev: float = Field(ge=0.0, description="max_k |y_k - z_k|")
    log_deriv_ratio: complex = Field(description="sum_j Log(y_j / z_j)")
    rel_devs: List[float] = Field(default_factory=list, description="|y_k - z_k| / |z_k|")


class TransferBoundCheck(_Frozen):
    """Comparison of a transfer run against the asymptotic bounds at level x."""
    x: float
    dev_bound: float
    dev_ok: bool
    deriv_bound: float
    deriv_ok: bool
    precondition_floor_log: float
    precondition_ok: bool


# ==================== measure-lab ====================

class CascadeTrace(_Frozen):
    """Rightward cascade of grid squares."""
    lambda0: ExpParameter
    squares: List[GridSquare]
    y_levels: List[float]
    witness: complex
    entry_index: int = Field(ge=0)

    @model_validator(mode="after")
    def _increasing(self) -> "CascadeTrace":
        if any(b <= a for a, b in zip(self.y_levels, self.y_levels[1:])):
            raise ValueError("cascade y-levels must be strictly increasing")
        return self


class EntryStatsConfig(_Frozen):
    """Sampling configuration for first-entry statistics."""
    x: float = Field(gt=0.0, description="half-plane level")
    grid: int = Field(ge=2, description="samples per side")
    t_max: int = Field(ge=1)
    deriv_cap_log: Optional[float] = Field(default=None, description="cap on log|Df^n(z)|; default min(x^9, 600)")
    delta0: float = Field(default=0.5, gt=0.0, description="entry_ball radius is delta0 / x^3")

    @model_validator(mode="after")
    def _default_cap(self) -> "EntryStatsConfig":
        if self.deriv_cap_log is None:
            object.__setattr__(self, "deriv_cap_log", min(self.x ** 9, LOG_MOD_LIMIT))
        return self


class EntryStatsReport(_Frozen):
    total: int = Field(ge=0)
    entered: int = Field(ge=0)
    fraction: float
    n_quantiles: List[float] = Field(description="p50, p90, p99 of n(z)")
    deriv_quantiles: List[float] = Field(description="p50, p90, p99 of log|Df^n(z)(z)|")
    within_paper_bounds: int = Field(ge=0)

    @model_validator(mode="after")
    def _counts(self) -> "EntryStatsReport":
        if self.entered > self.total:
            raise ValueError("entered exceeds total")
        return self


class DeepLeftReport(_Frozen):
    total: int = Field(ge=0)
    entered_left: int = Field(ge=0)
    overshoot: int = Field(ge=0)
    deriv_window: int = Field(ge=0)
    floor_ok: int = Field(ge=0)
    fraction_S0: float

    @model_validator(mode="after")
    def _counts(self) -> "DeepLeftReport":
        if not self.overshoot <= self.entered_left <= self.total:
            raise ValueError("expected overshoot <= entered_left <= total")
        return self


class RefinementReport(_Frozen):
    """Per-round capture fractions of the inductive refinement."""
    total: int
    round_fractions: List[float]
    uncaptured_direct: float
    uncaptured_product: float
    uncaptured_bound: float
    holds: bool


# ==================== density ====================

class AnnulusSpec(_Frozen):
    """A(lambda0; gamma r, r), cut into `sectors` congruent sectors."""
    center: ExpParameter
    gamma: float = Field(gt=0.0, lt=1.0)
    r: float = Field(gt=0.0)
    sectors: int = Field(ge=1)

    @property
    def inner(self) -> float:
        return self.gamma * self.r


class DensitySweepConfig(_Frozen):
    radii: List[float]
    samples: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2 ** 64)
    budget: int = Field(ge=1)
    p_max: int = Field(ge=1)
    annulus: Optional[AnnulusSpec] = Field(default=None, description="gamma/sectors template; r is taken from radii")

    @field_validator("radii")
    @classmethod
    def _decreasing(cls, radii: List[float]) -> List[float]:
        if not radii:
            raise ValueError("at least one radius is required")
        if any(r <= 0 or not math.isfinite(r) for r in radii):
            raise ValueError("radii must be positive and finite")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        return radii


class RadiusStats(_Frozen):
    radius: float
    samples: int
    hyperbolic: int
    escape_suspect: int
    undecided: int
    fraction: float
    wilson_lo: float
    wilson_hi: float

    @model_validator(mode="after")
    def _consistent(self) -> "RadiusStats":
        if self.hyperbolic + self.escape_suspect + self.undecided != self.samples:
            raise ValueError("verdict counts must sum to samples")
        if not self.wilson_lo <= self.fraction <= self.wilson_hi:
            raise ValueError("Wilson interval must contain the fraction")
        return self


class DensitySample(_Frozen):
    """One classified sample of a sweep (CSV row)."""
    radius_index: int
    index: int
    lam: complex
    verdict: Verdict
    period_or_n: int
    iterations: int


class DensityReport(_Frozen):
    center: ExpParameter
    per_radius: List[RadiusStats]
    seed: int
    budget: int
    p_max: int
    annulus: bool = False
    samples: List[DensitySample] = Field(default_factory=list)


class AnnulusImageStats(_Frozen):
    n: int = Field(ge=0)
    distortion: float = Field(ge=1.0)
    min_dxi_times_r: float
    image_diam: float
    contains_in_PS_ball: bool


class ProofSweepReport(_Frozen):
    """Trap-ball certificates found by the deep-left screening pipeline."""
    hits: List[TrapBallCertificate] = Field(default_factory=list)
    sampled: int = 0
    screened: int = 0
    certified: int = 0


# ==================== cli-io ====================

RGB = Tuple[int, int, int]


def _default_palette() -> Dict[str, Any]:
    return {
        "EscapeSuspect": (250, 250, 250),
        "Undecided": (0, 0, 0),
        "Hyperbolic": [
            (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
            (148, 103, 189), (140, 86, 75), (227, 119, 194), (188, 189, 34),
        ],
    }


class RenderSpec(_Frozen):
    """Parameter-plane rectangle, pixel size and verdict palette."""
    rect: Tuple[float, float, float, float] = Field(description="x0, y0, x1, y1")
    px: Tuple[int, int] = Field(description="width, height")
    palette: Dict[str, Any] = Field(default_factory=_default_palette)

    @model_validator(mode="after")
    def _valid(self) -> "RenderSpec":
        x0, y0, x1, y1 = self.rect
        if not (x0 < x1 and y0 < y1):
            raise ValueError("rect must satisfy x0 < x1 and y0 < y1")
        if self.px[0] < 1 or self.px[1] < 1:
            raise ValueError("image must be at least 1x1")
        return self

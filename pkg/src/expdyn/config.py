# -*- coding: utf-8 -*-
"""
expdyn configuration management.

Centralizes numerical tolerances, budgets and runtime switches. Values come
from the defaults below, then the `key = value` file named by EXPDYN_CONFIG,
then EXPDYN_* environment variables. Command-line flags override all of them.
"""
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .exceptions import ConfigError


@dataclass
class OrbitConfig:
    """Orbit engine configuration."""
    x_escape_re: float = 50.0


@dataclass
class CertifyConfig:
    """Cycle detection / certification configuration."""
    n_max: int = 100_000          # orbit budget for classify
    p_max: int = 512
    transient: int = 10_000
    eps_cycle_rel: float = 1e-9
    newton_tol: float = 1e-12
    newton_max_steps: int = 64
    trap_rho_factor: float = 0.25
    trap_min_depth: float = 2.0
    trap_max_attempts: int = 8
    indifferent_margin: float = 1e-12
    rho_min_exp: int = 20         # radius schedule 2^-1 .. 2^-rho_min_exp
    radius_inflation_exp: int = 40


@dataclass
class MisiurewiczConfig:
    """Misiurewicz solver configuration."""
    horizon: int = 1000
    region_radius: float = 10.0
    damping_halvings: int = 8
    misiurewicz_max_steps: int = 100


@dataclass
class MeasureConfig:
    """Measure-lab configuration."""
    m_work: float = 10.0
    grid: int = 100
    t_max: int = 100_000


@dataclass
class DensityConfig:
    """Density sweep configuration."""
    seed: int = 0
    samples: int = 1000
    gamma: float = 0.5
    sectors: int = 8
    x_work: float = 20.0
    proof_budget: int = 5000
    delta0: float = 0.5
    annulus_n_max: int = 200


@dataclass
class RuntimeConfig:
    """Runtime configuration."""
    n_jobs: int = 1
    verbose: bool = False
    output_dir: str = "results"


@dataclass
class ExpDynConfig:
    """expdyn main configuration."""
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    certify: CertifyConfig = field(default_factory=CertifyConfig)
    misiurewicz: MisiurewiczConfig = field(default_factory=MisiurewiczConfig)
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    density: DensityConfig = field(default_factory=DensityConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    def with_overrides(self, **overrides: Any) -> "ExpDynConfig":
        """Returns a copy with flat-key overrides applied (CLI flags use this)."""
        sections = {name: replace(getattr(self, name)) for name in _SECTION_NAMES}
        new = ExpDynConfig(**sections)
        for key, value in overrides.items():
            if value is None:
                continue
            section, attr = _key_location(key)
            setattr(getattr(new, section), attr, value)
        _check_values(new)
        return new


_SECTION_NAMES = ("orbit", "certify", "misiurewicz", "measure", "density", "runtime")

# Flat key -> section. Key order here is the serialization order.
_KEY_TABLE: List[Tuple[str, str]] = [
    (f.name, section)
    for section, cls in (
        ("orbit", OrbitConfig),
        ("certify", CertifyConfig),
        ("misiurewicz", MisiurewiczConfig),
        ("measure", MeasureConfig),
        ("density", DensityConfig),
        ("runtime", RuntimeConfig),
    )
    for f in fields(cls)
]
_KEY_SECTIONS: Dict[str, str] = dict(_KEY_TABLE)

# Keys that may be zero (everything else must be strictly positive)
_NON_NEGATIVE = {"seed"}
# Keys exempt from the sign check
_UNSIGNED = {"verbose", "output_dir", "n_jobs"}


def _key_location(key: str) -> Tuple[str, str]:
    if key not in _KEY_SECTIONS:
        raise ConfigError(f"unknown config key: {key!r}")
    return _KEY_SECTIONS[key], key


def _coerce(key: str, raw: str) -> Any:
    section, attr = _key_location(key)
    default = getattr(ExpDynConfig(), section).__dict__[attr]
    text = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text.replace("_", ""))
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    return text


def _check_values(config: ExpDynConfig) -> None:
    for key, section in _KEY_TABLE:
        if key in _UNSIGNED:
            continue
        value = getattr(getattr(config, section), key)
        if key in _NON_NEGATIVE:
            if value < 0 or value >= 2 ** 64:
                raise ConfigError(f"{key} must be a 64-bit unsigned integer, got {value!r}")
        elif not value > 0:
            raise ConfigError(f"{key} must be positive, got {value!r}")
    if config.runtime.n_jobs == 0:
        raise ConfigError("n_jobs must be non-zero")
    if not 0.0 < config.density.gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {config.density.gamma!r}")


def parse_config_text(text: str, base: Optional[ExpDynConfig] = None) -> ExpDynConfig:
    """Parses `key = value` lines (with `#` comments) on top of `base`."""
    overrides: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        overrides[key] = _coerce(key, raw)
    return (base or ExpDynConfig()).with_overrides(**overrides)


def load_config(path: str, base: Optional[ExpDynConfig] = None) -> ExpDynConfig:
    """Loads a UTF-8 config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_config_text(text, base)


def dump_config(config: ExpDynConfig) -> str:
    """Serializes every key in fixed order; parse_config_text inverts it."""
    lines = ["# expdyn configuration"]
    for key, section in _KEY_TABLE:
        value = getattr(getattr(config, section), key)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


class ConfigManager:
    """Configuration manager."""

    _instance = None
    _config = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self._config is None:
            self._config = self._load_config()

    def _load_config(self) -> ExpDynConfig:
        """Loads defaults, the EXPDYN_CONFIG file, then environment overrides."""
        config = ExpDynConfig()

        config_path = os.getenv("EXPDYN_CONFIG")
        if config_path:
            config = load_config(config_path, config)

        env_overrides = {
            "x_escape_re": os.getenv("EXPDYN_ESCAPE_RE"),
            "n_max": os.getenv("EXPDYN_N_MAX"),
            "p_max": os.getenv("EXPDYN_P_MAX"),
            "seed": os.getenv("EXPDYN_SEED"),
            "samples": os.getenv("EXPDYN_SAMPLES"),
            "n_jobs": os.getenv("EXPDYN_N_JOBS"),
            "verbose": os.getenv("EXPDYN_VERBOSE"),
            "output_dir": os.getenv("EXPDYN_OUTPUT_DIR"),
        }
        parsed = {key: _coerce(key, raw) for key, raw in env_overrides.items() if raw}
        if parsed:
            config = config.with_overrides(**parsed)

        return config

    @property
    def config(self) -> ExpDynConfig:
        """Returns the configuration object."""
        return self._config

    def reload(self) -> ExpDynConfig:
        """Re-reads file and environment (tests and the CLI use this)."""
        self._config = self._load_config()
        return self._config

    def validate_config(self) -> List[str]:
        """Returns a list of configuration problems (empty when valid)."""
        problems = []
        try:
            _check_values(self.config)
        except ConfigError as e:
            problems.append(str(e))

        cert = self.config.certify
        if cert.transient >= cert.n_max:
            problems.append(
                f"transient ({cert.transient}) should be below n_max ({cert.n_max}); "
                "cycle detection will use half the trace instead"
            )
        if self.config.orbit.x_escape_re > 700:
            problems.append("x_escape_re above 700 overflows double precision exp()")
        return problems

    def print_config(self):
        """Prints a configuration summary."""
        print("expdyn configuration")
        print("=" * 50)

        problems = self.validate_config()
        if problems:
            print("⚠️  Configuration warnings:")
            for problem in problems:
                print(f"   - {problem}")
            print()

        print(dump_config(self.config), end="")


# Global configuration manager
config_manager = ConfigManager()


def get_config() -> ExpDynConfig:
    """Returns the global configuration."""
    return config_manager.config


def validate_config() -> bool:
    """Checks whether the global configuration is usable."""
    problems = config_manager.validate_config()
    if problems:
        print("Configuration check failed:")
        for problem in problems:
            print(f"  - {problem}")
        return False
    return True


if __name__ == "__main__":
    config_manager.print_config()

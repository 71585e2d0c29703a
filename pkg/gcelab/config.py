import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from gcelab.exceptions import ConfigurationError

load_dotenv()

PACKAGE_ROOT = Path(__file__).resolve().parent
DEFAULT_CATALOG_PATH = PACKAGE_ROOT / "data" / "catalog.json"


def _env_float(name: str, default: str) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: str) -> int:
    return int(os.getenv(name, default))


@dataclass
class ToleranceConfig:
    default: float = field(default_factory=lambda: _env_float("GCELAB_TOLERANCE", "1e-9"))
    jacobi: float = field(default_factory=lambda: _env_float("GCELAB_JACOBI_TOL", "1e-10"))
    lee_threshold: float = field(
        default_factory=lambda: _env_float("GCELAB_LEE_THRESHOLD", "1e-6")
    )
    eigen_cluster: float = field(
        default_factory=lambda: _env_float("GCELAB_EIGEN_CLUSTER_TOL", "1e-7")
    )

    @classmethod
    def from_env(cls) -> "ToleranceConfig":
        return cls()


@dataclass
class NumericsConfig:
    ode_steps: int = field(default_factory=lambda: _env_int("GCELAB_ODE_STEPS", "2048"))
    sample_points: int = field(
        default_factory=lambda: _env_int("GCELAB_SAMPLE_POINTS", "4096")
    )

    @classmethod
    def from_env(cls) -> "NumericsConfig":
        return cls()


@dataclass
class CatalogConfig:
    override_path: Optional[str] = field(default_factory=lambda: os.getenv("GCELAB_CATALOG"))

    @property
    def path(self) -> Path:
        if self.override_path:
            return Path(self.override_path).expanduser()
        return DEFAULT_CATALOG_PATH

    @classmethod
    def from_env(cls) -> "CatalogConfig":
        return cls()


@dataclass
class VerificationConfig:
    seed: int = field(default_factory=lambda: _env_int("GCELAB_SEED", "0"))
    fuzz_count: int = field(default_factory=lambda: _env_int("GCELAB_COUNT", "10"))
    modifications_per_model: int = field(
        default_factory=lambda: _env_int("GCELAB_MODIFICATIONS", "50")
    )
    workers: int = field(default_factory=lambda: _env_int("GCELAB_WORKERS", "4"))

    @classmethod
    def from_env(cls) -> "VerificationConfig":
        return cls()


@dataclass
class ApplicationConfig:
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig.from_env)
    numerics: NumericsConfig = field(default_factory=NumericsConfig.from_env)
    catalog: CatalogConfig = field(default_factory=CatalogConfig.from_env)
    verification: VerificationConfig = field(default_factory=VerificationConfig.from_env)

    log_level: str = field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))

    @classmethod
    def from_env(cls) -> "ApplicationConfig":
        return cls()

    def validate(self) -> "ApplicationConfig":
        if self.tolerance.default <= 0 or self.tolerance.jacobi <= 0:
            raise ConfigurationError("tolerances must be positive")
        if self.numerics.ode_steps < 16:
            raise ConfigurationError(
                f"GCELAB_ODE_STEPS={self.numerics.ode_steps} is too coarse (minimum 16)"
            )
        if self.verification.workers < 1:
            raise ConfigurationError("GCELAB_WORKERS must be at least 1")
        if self.log_level.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ConfigurationError(f"unknown LOG_LEVEL '{self.log_level}'")
        return self

    def get_tolerance_summary(self) -> dict:
        return {
            "default": self.tolerance.default,
            "jacobi": self.tolerance.jacobi,
            "lee_threshold": self.tolerance.lee_threshold,
            "eigen_cluster": self.tolerance.eigen_cluster,
        }


config = ApplicationConfig()

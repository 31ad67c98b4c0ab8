# symbench/config.py

"""Configuration management for the symbench simulator."""

from pathlib import Path
from typing import Literal

from pydantic import Field, ValidationInfo, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class SimulationConfig(BaseSettings):
    """Numerical tolerances, caps and parallelism of the simulator."""

    model_config = SettingsConfigDict(
        env_prefix="SIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Size limits
    max_qubits: int = Field(
        default=10,
        ge=8,
        le=12,
        description="Largest register accepted by sector construction (dense storage)",
    )
    enumeration_cap: int = Field(
        default=1_000_000,
        ge=1,
        description="Largest ensemble enumerated by the exact oracles",
    )

    # Tolerances
    hermitian_atol: float = Field(default=1e-12, gt=0, description="Max |rho - rho^dagger|")
    trace_atol: float = Field(default=1e-12, gt=0, description="Max |Tr rho - 1|")
    psd_atol: float = Field(
        default=1e-10,
        gt=0,
        description="Tolerated negative eigenvalue (accumulated rounding over long sequences)",
    )
    kraus_atol: float = Field(default=1e-10, gt=0, description="Kraus completeness tolerance")
    unitary_atol: float = Field(default=1e-10, gt=0, description="Max |U^dagger U - I|")
    block_atol: float = Field(
        default=1e-12, gt=0, description="Max off-block amplitude of a symmetry-preserving gate"
    )
    design_atol: float = Field(
        default=1e-10, gt=0, description="Pass threshold of the exact one-design check"
    )

    # Protocol defaults
    default_lengths: list[int] = Field(
        default=[1, 2, 4, 6, 8, 12, 16, 24, 32],
        description="Sequence-length grid used when a campaign does not give one",
    )
    fit_floor: float = Field(
        default=0.05,
        ge=0.0,
        lt=1.0,
        description="Lengths whose predicted survival falls below this are dropped",
    )

    # Performance
    max_workers: int = Field(
        default=4, ge=1, le=64, description="Maximum worker threads for sequence simulation"
    )

    @field_validator("default_lengths")
    @classmethod
    def check_lengths(cls, v: list[int]) -> list[int]:
        """Ensure the default grid is strictly increasing and positive."""
        if not v or v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("default_lengths must be strictly increasing and start at >= 1")
        return v


class FitConfig(BaseSettings):
    """Exponential-decay fitting configuration."""

    model_config = SettingsConfigDict(
        env_prefix="FIT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    max_order: Literal[1, 2] = Field(default=2, description="Highest number of exponentials")
    order2_improvement: float = Field(
        default=4.0,
        ge=1.0,
        description="Weighted residual reduction required to accept the two-exponential model",
    )
    start_decays: list[float] = Field(
        default=[0.5, 0.9, 0.99], description="Multi-start initial decay parameters"
    )
    offset_handling: Literal["include", "subtract"] = Field(
        default="include",
        description="Whether Gamma_1 includes the fitted steady-state floor B",
    )
    max_nfev: int = Field(default=5000, ge=10, description="Maximum optimizer function evaluations")
    tolerance: float = Field(
        default=1e-15, gt=0, description="ftol/xtol/gtol passed to the optimizer"
    )


class LoggingConfig(BaseSettings):
    """Logging configuration."""

    model_config = SettingsConfigDict(
        env_prefix="LOG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Log Level
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="WARNING", description="Logging level"
    )

    # Output
    format: Literal["json", "console"] = Field(default="console", description="Log output format")
    # stderr keeps stdout clean for `symbench fit`, which prints JSON
    output: Literal["stdout", "stderr", "file", "both"] = Field(
        default="stderr", description="Log output destination"
    )
    log_file: Path = Field(default=Path("logs/symbench.log"), description="Log file path")

    # Structured Logging
    include_timestamp: bool = Field(default=True, description="Include timestamp in logs")
    include_caller: bool = Field(default=False, description="Include caller info in logs")
    include_context: bool = Field(
        default=True, description="Include bound campaign context in logs"
    )

    @field_validator("log_file", mode="before")
    @classmethod
    def create_log_dir(cls, v: Path | str, info: ValidationInfo) -> Path:
        """Ensure log directory exists when logs go to a file."""
        path = Path(v) if isinstance(v, str) else v
        if info.data.get("output") in ("file", "both"):
            path.parent.mkdir(parents=True, exist_ok=True)
        return path


class Config(BaseSettings):
    """Main application configuration."""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=False, extra="ignore"
    )

    # Environment
    environment: Literal["development", "staging", "production"] = Field(
        default="production", description="Application environment"
    )
    debug: bool = Field(default=False, description="Enable debug mode")

    # Sub-configurations
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


# Global config instance
_config: Config | None = None


def get_config() -> Config:
    """Get global configuration instance.

    Returns:
        Config: Global configuration object

    Example:
        >>> config = get_config()
        >>> print(config.simulation.enumeration_cap)
        1000000
    """
    global _config
    if _config is None:
        _config = Config()
    return _config


def reload_config() -> Config:
    """Reload configuration from environment/file.

    Returns:
        Config: Reloaded configuration object
    """
    global _config
    _config = Config()
    return _config

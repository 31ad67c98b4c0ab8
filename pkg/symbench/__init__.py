# symbench/__init__.py

"""symbench - symmetry benchmarking of simulated qubit registers.

A conserved quantity splits the register into symmetry sectors. Random
sequences drawn from a unitary one-design on one sector, interleaved with the
noise under test, leak population out of it at a rate that can be read off an
exponential decay:

1. **Number conservation**: iSWAP permutation networks with random Z layers
   on excitation-number sectors
2. **Parity conservation**: per-sector benchmarking combined into the
   preservation of the even or odd parity subspace
3. **Stabilizer codespace**: logical Clifford sequences with syndrome-phase
   randomizers on the three-qubit repetition code

Basic Usage:
    >>> from symbench import ExperimentSpec, estimate_curve, fit_decay, number_design
    >>> spec = ExperimentSpec(number_design(4, 2), (1, 2, 4, 8), n_sequences=50, master_seed=7)
    >>> fit = fit_decay(estimate_curve(spec))
    >>> fit.mu

Campaigns:
    >>> from symbench import CampaignRunner, load_campaign_config
    >>> CampaignRunner(load_campaign_config("number.json")).run()
"""

__version__ = "1.0.0"

from symbench.campaign import CampaignConfig, CampaignRunner, load_campaign_config
from symbench.config import Config, FitConfig, LoggingConfig, SimulationConfig, get_config
from symbench.core.channels import (
    Channel,
    CompositeNoise,
    GateNoise,
    IdentityNoise,
    StepNoise,
    Superoperator,
    compose,
    depolarizing_channel,
    dilated_noise,
)
from symbench.core.eccbench import build_code, compare_randomizers, ecc_benchmark, gate_round, logical_error_bound
from symbench.core.fitting import FitResult, extract_mu, fit_decay, interleaved_estimate
from symbench.core.onedesign import (
    double_average_transition_matrix,
    exact_gamma,
    half_twirl,
    number_design,
    verify_one_design,
)
from symbench.core.parity import exact_parity_gamma1, parity_benchmark, parity_decomposition
from symbench.core.protocol import (
    BenchmarkEngine,
    DecayCurve,
    ExperimentSpec,
    InterleaveSpec,
    estimate_curve,
    exact_average_curve,
    interleaved_curve,
)
from symbench.core.qstate import DensityMatrix, SymmetrySector, sector_indices
from symbench.utils.exceptions import (
    CapabilityError,
    ConfigurationError,
    FitConvergenceError,
    InvalidParameterError,
    ReportError,
    SymbenchError,
    ValidationError,
)

# Setup logging on import
from symbench.utils.logging import setup_logging

try:
    setup_logging()
except Exception:
    # Don't fail if logging setup fails
    pass

__all__ = [
    "__version__",
    # States and sectors
    "DensityMatrix",
    "SymmetrySector",
    "sector_indices",
    # Channels and noise
    "Channel",
    "Superoperator",
    "compose",
    "dilated_noise",
    "depolarizing_channel",
    "IdentityNoise",
    "StepNoise",
    "GateNoise",
    "CompositeNoise",
    # Designs and oracles
    "number_design",
    "verify_one_design",
    "half_twirl",
    "exact_gamma",
    "double_average_transition_matrix",
    # Benchmarking
    "ExperimentSpec",
    "InterleaveSpec",
    "DecayCurve",
    "BenchmarkEngine",
    "estimate_curve",
    "interleaved_curve",
    "exact_average_curve",
    "FitResult",
    "fit_decay",
    "extract_mu",
    "interleaved_estimate",
    "parity_decomposition",
    "parity_benchmark",
    "exact_parity_gamma1",
    "build_code",
    "ecc_benchmark",
    "gate_round",
    "compare_randomizers",
    "logical_error_bound",
    # Campaigns
    "CampaignConfig",
    "CampaignRunner",
    "load_campaign_config",
    # Configuration
    "Config",
    "SimulationConfig",
    "FitConfig",
    "LoggingConfig",
    "get_config",
    # Exceptions
    "SymbenchError",
    "ConfigurationError",
    "InvalidParameterError",
    "ValidationError",
    "CapabilityError",
    "FitConvergenceError",
    "ReportError",
]

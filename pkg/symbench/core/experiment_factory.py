# symbench/core/experiment_factory.py

"""Factory selecting how a campaign kind is built and executed.

Usage:
    from symbench.core.experiment_factory import get_campaign_builder

    builder = get_campaign_builder(config.kind)
    outcome = builder(config, max_workers=4)
    outcome.curves["D"].to_frame()
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from symbench.campaign.models import CampaignConfig, InterleaveConfig, NoiseConfig
from symbench.core.channels import (
    Channel,
    Gate,
    GateNoise,
    IdentityNoise,
    NoiseModel,
    StepNoise,
    bitflip_channel,
    depolarizing_channel,
    dilated_noise,
    iswap_gate,
    xrotation_channel,
)
from symbench.core.eccbench import (
    LogicalRound,
    build_code,
    ecc_benchmark,
    gate_round,
    logical_t_gate,
    randomized_ensemble,
)
from symbench.core.fitting import FitResult, fit_decay, interleaved_estimate
from symbench.core.onedesign import DesignEnsemble, identity_design, number_design, permutations_design
from symbench.core.parity import pair_gate, parity_benchmark, parity_decomposition, parity_design
from symbench.core.protocol import (
    BenchmarkEngine,
    DecayCurve,
    ExperimentSpec,
    InterleaveSpec,
    default_lengths,
    exact_sequence_average,
    without_interleave,
)
from symbench.core.qstate import sector_indices
from symbench.utils.exceptions import CapabilityError, InvalidParameterError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

CampaignKind = Literal["number", "parity", "ecc"]


@dataclass(frozen=True)
class CampaignOutcome:
    """Curves, fits and a kind-specific summary of one executed campaign."""

    kind: CampaignKind
    curves: dict[str, DecayCurve]
    fits: dict[str, FitResult]
    summary: dict[str, object] = field(default_factory=dict)


CampaignBuilder = Callable[[CampaignConfig, int | None], CampaignOutcome]


def build_noise(cfg: NoiseConfig, n: int) -> NoiseModel:
    """Noise model of the design rounds."""
    if cfg.kind == "identity":
        return IdentityNoise()
    if cfg.kind == "dilated" and cfg.attach == "gate":
        return GateNoise(n, cfg.epsilon, cfg.seed)
    channel = build_channel(cfg, n, (0, 1))
    return IdentityNoise() if channel is None else StepNoise((channel,))


def build_channel(cfg: NoiseConfig | None, n: int, default_support: tuple[int, ...]) -> Channel | None:
    if cfg is None or cfg.kind == "identity":
        return None
    if cfg.kind == "dilated":
        support = tuple(cfg.support or default_support)
        if len(support) != 2:
            raise InvalidParameterError("Dilated noise acts on exactly two qubits")
        return dilated_noise(n, (support[0], support[1]), cfg.epsilon, cfg.seed)
    qubits = tuple(cfg.qubits) if cfg.qubits is not None else tuple(range(n))
    if cfg.kind == "depolarizing":
        return depolarizing_channel(n, cfg.p, cfg.support)
    if cfg.kind == "bitflip":
        return bitflip_channel(n, cfg.p, qubits)
    return xrotation_channel(n, cfg.theta, qubits)


def build_interleave(cfg: InterleaveConfig | None, config: CampaignConfig) -> InterleaveSpec | None:
    if cfg is None:
        return None
    n = config.n_qubits
    q1, q2 = cfg.qubits
    gate: Gate
    if cfg.gate == "identity":
        gate = Gate.full("identity", np.eye(2**n))
    elif cfg.gate == "iswap":
        gate = iswap_gate(q1, q2, n)
    elif cfg.gate == "pair":
        gate = pair_gate(q1, q2, cfg.theta, n)
    else:
        gate = logical_t_gate(build_code(config.ecc.code))
    return InterleaveSpec((gate,), build_channel(cfg.noise, n, (q1, q2)), cfg.gate)


def build_logical_round(config: CampaignConfig) -> LogicalRound | None:
    """L = F M G of an ecc campaign, G being its interleaved gate."""
    interleave = build_interleave(config.interleave, config)
    if interleave is None:
        return None
    code = build_code(config.ecc.code)
    return gate_round(code, interleave.gates[0], config.ecc.randomizer, interleave.noise)


def build_design(config: CampaignConfig) -> DesignEnsemble:
    """The ensemble a campaign samples from, also used by design verification."""
    n = config.n_qubits
    if config.kind == "number":
        factory = {
            "number": number_design,
            "permutations_only": permutations_design,
            "identity_only": identity_design,
        }[config.design]
        return factory(n, config.gamma)  # type: ignore[arg-type]
    if config.kind == "parity":
        decomp = parity_decomposition(n, config.parity)
        return parity_design(n, decomp.gammas[0])
    return randomized_ensemble(build_code(config.ecc.code), config.ecc.randomizer)


def campaign_lengths(config: CampaignConfig) -> tuple[int, ...]:
    """Configured lengths, or the default grid clipped for ``expected_mu``."""
    if config.lengths:
        return tuple(config.lengths)
    return default_lengths(config.expected_mu)


def build_number_spec(config: CampaignConfig) -> ExperimentSpec:
    n = config.n_qubits
    prep = depolarizing_channel(n, config.spam.prep) if config.spam.prep else None
    meas = depolarizing_channel(n, config.spam.meas) if config.spam.meas else None
    return ExperimentSpec(
        design=build_design(config),
        lengths=campaign_lengths(config),
        n_sequences=config.n_sequences,
        noise=build_noise(config.noise, n),
        shots=config.shots,
        master_seed=config.master_seed,
        interleave=build_interleave(config.interleave, config),
        prep=prep,
        meas=meas,
        measure_sector=sector_indices(n, config.gamma),  # type: ignore[arg-type]
        label="ID" if config.interleave is not None else "D",
    )


def _oracle_gamma1(spec: ExperimentSpec) -> float | None:
    """Exact one-step preservation without SPAM, when the design is small enough."""
    try:
        return exact_sequence_average(dataclasses.replace(spec, prep=None, meas=None), 1)
    except CapabilityError:
        return None


def run_number_campaign(config: CampaignConfig, max_workers: int | None = None) -> CampaignOutcome:
    engine = BenchmarkEngine(max_workers)
    spec = build_number_spec(config)
    reference = without_interleave(spec) if spec.interleaved else spec
    reference = dataclasses.replace(reference, label="D")
    curves = {"D": engine.estimate_curve(reference)}
    fits = {"D": fit_decay(curves["D"], config.fit.max_order, config.fit.offset_handling)}
    summary: dict[str, object] = {"mu_d": fits["D"].mu, "gamma1_ratio_d": fits["D"].gamma1_ratio}
    oracle = _oracle_gamma1(reference)
    if oracle is not None:
        summary["oracle_mu_d"] = 1.0 - oracle

    if spec.interleaved:
        curves["ID"] = engine.estimate_curve(spec)
        fits["ID"] = fit_decay(curves["ID"], config.fit.max_order, config.fit.offset_handling)
        estimate = interleaved_estimate(
            min(1.0, max(0.0, fits["ID"].mu)), min(1.0, max(0.0, fits["D"].mu)), spec.sector.dim
        )
        summary.update(mu_id=fits["ID"].mu, gamma1_ratio_id=fits["ID"].gamma1_ratio, estimate=estimate.to_dict())
        oracle_id = _oracle_gamma1(spec)
        if oracle_id is not None:
            summary["oracle_mu_id"] = 1.0 - oracle_id
    return CampaignOutcome("number", curves, fits, summary)


def run_parity_campaign(config: CampaignConfig, max_workers: int | None = None) -> CampaignOutcome:
    n = config.n_qubits
    decomp = parity_decomposition(n, config.parity)
    report = parity_benchmark(
        decomp,
        build_noise(config.noise, n),
        campaign_lengths(config),
        config.n_sequences,
        config.shots,
        config.master_seed,
        build_interleave(config.interleave, config),
        config.fit.max_order,
        max_workers,
    )
    curves: dict[str, DecayCurve] = {}
    fits: dict[str, FitResult] = {}
    for result in report.sectors:
        curves[result.reference.label] = result.reference
        fits[result.reference.label] = result.reference_fit
        if result.interleaved is not None and result.interleaved_fit is not None:
            curves[result.interleaved.label] = result.interleaved
            fits[result.interleaved.label] = result.interleaved_fit
    return CampaignOutcome("parity", curves, fits, report.to_dict())


def run_ecc_campaign(config: CampaignConfig, max_workers: int | None = None) -> CampaignOutcome:
    code = build_code(config.ecc.code)
    opts = config.ecc
    bound_rates = (opts.mu_f, opts.mu_m) if opts.mu_f is not None and opts.mu_m is not None else None
    report = ecc_benchmark(
        code,
        build_noise(config.noise, code.n_physical),
        opts.randomizer,
        campaign_lengths(config),
        config.n_sequences,
        config.shots,
        config.master_seed,
        mu_r=opts.mu_r,
        logical=build_logical_round(config),
        bound_rates=bound_rates,  # type: ignore[arg-type]
        max_order=config.fit.max_order,
        max_workers=max_workers,
    )
    curves = {report.curve.label: report.curve}
    fits = {report.curve.label: report.fit}
    if report.interleaved_curve is not None and report.interleaved_fit is not None:
        curves[report.interleaved_curve.label] = report.interleaved_curve
        fits[report.interleaved_curve.label] = report.interleaved_fit
    summary = report.to_dict()
    # Curves and fits are written to their own files
    for key in ("curve", "fit", "interleaved_curve", "interleaved_fit"):
        summary.pop(key)
    return CampaignOutcome("ecc", curves, fits, summary)


_BUILDERS: dict[str, CampaignBuilder] = {
    "number": run_number_campaign,
    "parity": run_parity_campaign,
    "ecc": run_ecc_campaign,
}


def get_campaign_builder(kind: CampaignKind) -> CampaignBuilder:
    """Builder executing campaigns of ``kind``.

    Raises:
        InvalidParameterError: If the kind is unknown
    """
    log.info("selecting_campaign_builder", kind=kind)
    try:
        return _BUILDERS[kind]
    except KeyError as e:
        raise InvalidParameterError(
            f"Invalid campaign kind: {kind}. Must be one of {sorted(_BUILDERS)}"
        ) from e

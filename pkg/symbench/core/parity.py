# symbench/core/parity.py

"""Parity-sector benchmarking for pairing-type interactions.

Operations that only conserve excitation parity are benchmarked one number
sector at a time: the permutation-and-phase design is a one-design on every
number sector, so each sector gets its own curve, read out on the whole parity
subspace, and the per-sector results are combined with weights d_gamma/2^(n-1).
"""

from __future__ import annotations

import dataclasses
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from math import comb
from typing import Literal

import numpy as np
import scipy.linalg

from symbench.core.channels import Channel, Gate, NoiseModel, as_noise_model
from symbench.core.fitting import FitResult, InterleavedEstimate, fit_decay, interleaved_estimate
from symbench.core.onedesign import DesignEnsemble, half_twirl, number_design
from symbench.core.protocol import (
    BenchmarkEngine,
    DecayCurve,
    ExperimentSpec,
    InterleaveSpec,
    without_interleave,
)
from symbench.core.qstate import (
    DensityMatrix,
    maximally_mixed,
    parity_labels,
    parity_sector,
    population,
    sector_indices,
)
from symbench.utils.exceptions import InvalidParameterError, ValidationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

ParityName = Literal["even", "odd"]
PARITY_BITS = {"even": 0, "odd": 1}


@dataclass(frozen=True)
class ParitySectorWeight:
    gamma: int
    dim: int
    weight: float


@dataclass(frozen=True)
class ParityDecomposition:
    """Number sectors making up one parity subspace."""

    n_qubits: int
    parity: ParityName
    sectors: tuple[ParitySectorWeight, ...]

    @property
    def parity_bit(self) -> int:
        return PARITY_BITS[self.parity]

    @property
    def gammas(self) -> list[int]:
        return [s.gamma for s in self.sectors]

    @property
    def subspace_dim(self) -> int:
        return 2 ** (self.n_qubits - 1)

    def weight(self, gamma: int) -> float:
        for s in self.sectors:
            if s.gamma == gamma:
                return s.weight
        raise InvalidParameterError(f"Sector {gamma} is not part of the {self.parity} subspace")


def _parity_name(parity: ParityName | int) -> ParityName:
    if parity in ("even", 0):
        return "even"
    if parity in ("odd", 1):
        return "odd"
    raise InvalidParameterError(f"parity must be 'even' or 'odd', got {parity!r}")


def parity_decomposition(n: int, parity: ParityName | int = "even") -> ParityDecomposition:
    """Number sectors of matching parity with weights d_gamma / 2^(n-1).

    Raises:
        InvalidParameterError: If ``n`` is odd or not positive

    Example:
        >>> [s.dim for s in parity_decomposition(4, "even").sectors]
        [1, 6, 1]
    """
    if n < 2 or n % 2:
        raise InvalidParameterError(f"Parity benchmarking needs an even qubit count, got {n}")
    name = _parity_name(parity)
    half = 2 ** (n - 1)
    sectors = tuple(
        ParitySectorWeight(gamma, comb(n, gamma), comb(n, gamma) / half)
        for gamma in range(PARITY_BITS[name], n + 1, 2)
    )
    return ParityDecomposition(n, name, sectors)


def parity_gamma1(
    per_sector: Mapping[int, float] | Sequence[tuple[int, float]], decomp: ParityDecomposition
) -> float:
    """Combined symmetry preservation sum_gamma (d_gamma / 2^(n-1)) Gamma_1^gamma.

    Raises:
        InvalidParameterError: If a sector is missing, repeated or foreign

    Example:
        >>> round(parity_gamma1({0: 1.0, 2: 0.99, 4: 1.0}, parity_decomposition(4)), 12)
        0.9925
    """
    items = list(per_sector.items()) if isinstance(per_sector, Mapping) else list(per_sector)
    gammas = [int(g) for g, _ in items]
    if sorted(gammas) != decomp.gammas:
        raise InvalidParameterError(
            f"Per-sector values must cover sectors {decomp.gammas} exactly once, got {sorted(gammas)}"
        )
    values = dict((int(g), float(v)) for g, v in items)
    return float(sum(s.weight * values[s.gamma] for s in decomp.sectors))


def pair_gate(q1: int, q2: int, theta: float = np.pi / 4, n_qubits: int | None = None) -> Gate:
    """exp(-i theta (s-_q1 s-_q2 + s+_q1 s+_q2)): a rotation between |00> and |11> of the pair.

    The gate changes the excitation number by 0 or 2 and so preserves parity.

    Raises:
        InvalidParameterError: If the qubits coincide
        ValidationError: If the result does not commute with the parity operator
    """
    if q1 == q2:
        raise InvalidParameterError("pair_gate needs two distinct qubits")
    n = max(q1, q2) + 1 if n_qubits is None else n_qubits
    generator = np.zeros((4, 4), dtype=np.complex128)
    # Local index bit(q1) + 2*bit(q2): |00> is 0 and |11> is 3
    generator[0, 3] = generator[3, 0] = 1.0
    gate = Gate("pair", (q1, q2), n, scipy.linalg.expm(-1j * theta * generator))
    parity = np.diag((-1.0) ** parity_labels(n))
    if np.max(np.abs(parity @ gate.matrix - gate.matrix @ parity)) > 1e-12:
        raise ValidationError("pair_gate does not preserve parity")
    return gate


def parity_design(n: int, gamma: int) -> DesignEnsemble:
    """Number design on sector ``gamma``, block-checked against parity only."""
    return dataclasses.replace(number_design(n, gamma), labels=parity_labels(n))


@dataclass(frozen=True)
class ParitySectorResult:
    gamma: int
    dim: int
    weight: float
    reference: DecayCurve
    reference_fit: FitResult
    interleaved: DecayCurve | None = None
    interleaved_fit: FitResult | None = None
    estimate: InterleavedEstimate | None = None

    def to_dict(self) -> dict[str, object]:
        return {
            "gamma": self.gamma,
            "dim": self.dim,
            "weight": self.weight,
            "reference": self.reference.to_dict(),
            "reference_fit": self.reference_fit.to_dict(),
            "interleaved": None if self.interleaved is None else self.interleaved.to_dict(),
            "interleaved_fit": None if self.interleaved_fit is None else self.interleaved_fit.to_dict(),
            "estimate": None if self.estimate is None else self.estimate.to_dict(),
        }


@dataclass(frozen=True)
class ParityReport:
    """Per-sector curves and fits with the combined parity-subspace values."""

    decomposition: ParityDecomposition
    sectors: tuple[ParitySectorResult, ...]
    gamma1_d: float
    gamma1_id: float | None
    estimate: InterleavedEstimate | None

    @property
    def mu_d(self) -> float:
        return 1.0 - self.gamma1_d

    @property
    def mu_id(self) -> float | None:
        return None if self.gamma1_id is None else 1.0 - self.gamma1_id

    def to_dict(self) -> dict[str, object]:
        return {
            "n_qubits": self.decomposition.n_qubits,
            "parity": self.decomposition.parity,
            "weights": {str(s.gamma): s.weight for s in self.decomposition.sectors},
            "sectors": [s.to_dict() for s in self.sectors],
            "combined": {
                "gamma1_d": self.gamma1_d,
                "mu_d": self.mu_d,
                "gamma1_id": self.gamma1_id,
                "mu_id": self.mu_id,
                "estimate": None if self.estimate is None else self.estimate.to_dict(),
            },
        }


def parity_sector_specs(
    decomp: ParityDecomposition,
    noise: Channel | NoiseModel | None,
    lengths: Sequence[int],
    n_sequences: int,
    shots: int = 0,
    master_seed: int = 0,
    interleave: InterleaveSpec | None = None,
) -> list[ExperimentSpec]:
    """One experiment per number sector, read out on the parity subspace.

    Sector campaigns share the master seed and use the sector label as stream tag.
    """
    n = decomp.n_qubits
    readout = parity_sector(n, decomp.parity_bit)
    model = as_noise_model(noise)
    return [
        ExperimentSpec(
            design=parity_design(n, s.gamma),
            lengths=tuple(lengths),
            n_sequences=n_sequences,
            noise=model,
            shots=shots,
            master_seed=master_seed,
            interleave=interleave,
            measure_sector=readout,
            streams=(s.gamma,),
            label=f"gamma{s.gamma}_{'ID' if interleave is not None else 'D'}",
        )
        for s in decomp.sectors
    ]


def parity_benchmark(
    decomp: ParityDecomposition,
    noise: Channel | NoiseModel | None,
    lengths: Sequence[int],
    n_sequences: int,
    shots: int = 0,
    master_seed: int = 0,
    interleave: InterleaveSpec | None = None,
    max_order: int | None = None,
    max_workers: int | None = None,
) -> ParityReport:
    """Run (interleaved) symmetry benchmarking on every sector of a parity subspace.

    Raises:
        FitConvergenceError: If a sector curve cannot be fitted
    """
    engine = BenchmarkEngine(max_workers)
    specs = parity_sector_specs(decomp, noise, lengths, n_sequences, shots, master_seed, interleave)
    results = []
    for weight, spec in zip(decomp.sectors, specs):
        reference_spec = without_interleave(spec) if interleave is not None else spec
        reference_spec = dataclasses.replace(reference_spec, label=f"gamma{weight.gamma}_D")
        reference = engine.estimate_curve(reference_spec)
        reference_fit = fit_decay(reference, max_order)
        interleaved = interleaved_fit = estimate = None
        if interleave is not None:
            interleaved = engine.estimate_curve(spec)
            interleaved_fit = fit_decay(interleaved, max_order)
            estimate = interleaved_estimate(
                min(1.0, max(0.0, interleaved_fit.mu)),
                min(1.0, max(0.0, reference_fit.mu)),
                weight.dim,
            )
        results.append(
            ParitySectorResult(
                weight.gamma, weight.dim, weight.weight, reference, reference_fit,
                interleaved, interleaved_fit, estimate,
            )
        )
        log.info("parity_sector_completed", gamma=weight.gamma, mu_d=reference_fit.mu)

    gamma1_d = parity_gamma1({r.gamma: r.reference_fit.gamma1 for r in results}, decomp)
    gamma1_id = estimate = None
    if interleave is not None:
        gamma1_id = parity_gamma1({r.gamma: r.interleaved_fit.gamma1 for r in results}, decomp)  # type: ignore[union-attr]
        estimate = interleaved_estimate(
            min(1.0, max(0.0, 1.0 - gamma1_id)),
            min(1.0, max(0.0, 1.0 - gamma1_d)),
            decomp.subspace_dim,
        )
    return ParityReport(decomp, tuple(results), gamma1_d, gamma1_id, estimate)


@dataclass(frozen=True)
class ParityOracle:
    """Exact one-step preservation of the parity subspace.

    ``combined`` is the weighted per-sector value, ``direct`` the value started
    from the mixed state of the whole parity subspace.
    """

    per_sector: dict[int, float]
    combined: float
    direct: float


def exact_parity_gamma1(
    noise: Channel | NoiseModel | None,
    decomp: ParityDecomposition,
    interleave: InterleaveSpec | None = None,
    initial: Literal["basis", "mixed"] = "basis",
) -> ParityOracle:
    """Exact Gamma_1 per sector and combined, from the half-twirl oracle.

    Each round is the half-twirled design round followed, when ``interleave``
    is given, by the uniform average of the interleaved gates and their noise.

    Raises:
        CapabilityError: If the design cannot be enumerated
    """
    n = decomp.n_qubits
    readout = parity_sector(n, decomp.parity_bit)
    step = half_twirl(noise, parity_design(n, decomp.gammas[0])).superop.matrix
    if interleave is not None:
        gate_average = sum(g.superoperator for g in interleave.gates) / len(interleave.gates)
        if interleave.noise is not None:
            gate_average = interleave.noise.superoperator_matrix @ gate_average
        step = gate_average @ step

    dim = 2**n

    def one_step(rho: DensityMatrix) -> float:
        out = (step @ rho.data.reshape(-1)).reshape(dim, dim)
        return population(out, readout.index_array)

    per_sector = {}
    for s in decomp.sectors:
        sector = sector_indices(n, s.gamma)
        rho = (
            DensityMatrix.basis_state(n, sector.indices[0])
            if initial == "basis"
            else maximally_mixed(sector)
        )
        per_sector[s.gamma] = one_step(rho)
    combined = parity_gamma1(per_sector, decomp)
    direct = one_step(maximally_mixed(readout))
    return ParityOracle(per_sector, combined, direct)

# symbench/core/eccbench.py

"""Symmetry benchmarking of logically encoded operations.

The conserved structure is the stabilizer codespace: the register splits into
syndrome sectors and the benchmark measures the population that stays in the
codespace (the trivial syndrome) after rounds of logical Clifford gate,
phase randomizer and noise.

Pauli strings use the register convention of the package: character ``k``
acts on qubit ``k``.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from symbench.config import get_config
from symbench.core.channels import (
    HADAMARD,
    PHASE_S,
    PHASE_T,
    Channel,
    Gate,
    NoiseModel,
    as_noise_model,
    compose,
    pauli_string_operator,
)
from symbench.core.fitting import FitResult, InterleavedEstimate, fit_decay, interleaved_estimate
from symbench.core.onedesign import DesignElement, DesignEnsemble, design_from_elements
from symbench.core.protocol import (
    BenchmarkEngine,
    DecayCurve,
    ExperimentSpec,
    InterleaveSpec,
    exact_average_curve,
)
from symbench.core.qstate import DensityMatrix, SymmetrySector, popcount
from symbench.utils.exceptions import CapabilityError, InvalidParameterError, ValidationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

RandomizerChoice = Literal["phase_layer", "measure_only", "measure_and_random_correct"]
RANDOMIZER_CHOICES: tuple[RandomizerChoice, ...] = (
    "phase_layer",
    "measure_only",
    "measure_and_random_correct",
)

KNOWN_CODES = {
    "three_qubit_bitflip": {
        "n_physical": 3,
        "generators": ("ZZI", "IZZ"),
        "distance": 3,
        "logical_x": ("XXX",),
        "logical_z": ("ZII",),
    },
}


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """A stabilizer code with Z-type generators.

    Attributes:
        name: Code identifier
        n_physical: Number of physical qubits
        generators: Stabilizer generators as Pauli strings
        distance: Code distance against the corrected error type
        logical_x: Logical X per logical qubit
        logical_z: Logical Z per logical qubit
    """

    name: str
    n_physical: int
    generators: tuple[str, ...]
    distance: int
    logical_x: tuple[str, ...]
    logical_z: tuple[str, ...]

    def __post_init__(self) -> None:
        for label in self.generators + self.logical_x + self.logical_z:
            if len(label) != self.n_physical:
                raise InvalidParameterError(f"Pauli string {label!r} does not have {self.n_physical} qubits")
        if any(set(g) - {"I", "Z"} for g in self.generators):
            raise CapabilityError("Only Z-type stabilizer generators are supported")
        ops = [pauli_string_operator(g) for g in self.generators]
        for a, b in combinations(ops, 2):
            if np.max(np.abs(a @ b - b @ a)) > 1e-12:
                raise ValidationError("Stabilizer generators must commute")
        p = self.projector
        if np.max(np.abs(p @ p - p)) > 1e-10:
            raise ValidationError("Codespace projector is not idempotent")
        for label in self.logical_x + self.logical_z:
            op = pauli_string_operator(label)
            if any(np.max(np.abs(op @ g - g @ op)) > 1e-12 for g in ops):
                raise ValidationError(f"Logical operator {label} does not commute with the stabilizers")

    @property
    def n_logical(self) -> int:
        return self.n_physical - len(self.generators)

    @property
    def dim(self) -> int:
        return 2**self.n_physical

    @cached_property
    def projector(self) -> NDArray[np.complex128]:
        p = np.eye(self.dim, dtype=np.complex128)
        for g in self.generators:
            p = p @ (np.eye(self.dim) + pauli_string_operator(g)) / 2
        return p

    @cached_property
    def syndrome_labels(self) -> NDArray[np.int64]:
        """Syndrome of every basis index, bit k set when generator k reads -1."""
        masks = [sum(1 << q for q, ch in enumerate(g) if ch == "Z") for g in self.generators]
        return np.array(
            [sum((popcount(i & m) % 2) << k for k, m in enumerate(masks)) for i in range(self.dim)],
            dtype=np.int64,
        )

    @cached_property
    def codespace(self) -> SymmetrySector:
        return syndrome_sectors(self)[0]

    @cached_property
    def encoder(self) -> NDArray[np.complex128]:
        """Isometry from the logical space onto the codespace, |k> -> |k_L>."""
        if self.n_logical != 1:
            raise CapabilityError("Only single-logical-qubit codes have an encoder")
        zero = self.codespace.indices[0]
        x_bar = pauli_string_operator(self.logical_x[0])
        v = np.zeros((self.dim, 2), dtype=np.complex128)
        v[zero, 0] = 1.0
        v[:, 1] = x_bar[:, zero]
        return v

    def logical_unitary(self, u: NDArray) -> NDArray[np.complex128]:
        """V u V^dagger on the codespace, identity on its complement."""
        v = self.encoder
        return v @ np.asarray(u, dtype=np.complex128) @ v.conj().T + (np.eye(self.dim) - self.projector)

    def describe(self) -> dict[str, object]:
        return {
            "name": self.name,
            "n_physical": self.n_physical,
            "generators": list(self.generators),
            "distance": self.distance,
            "logical_x": list(self.logical_x),
            "logical_z": list(self.logical_z),
        }


def build_code(name: str) -> StabilizerCode:
    """Construct a known code.

    Raises:
        InvalidParameterError: If the name is unknown

    Example:
        >>> build_code("three_qubit_bitflip").codespace.indices
        (0, 7)
    """
    try:
        params = KNOWN_CODES[name]
    except KeyError as e:
        raise InvalidParameterError(f"Unknown code {name!r}; known codes: {sorted(KNOWN_CODES)}") from e
    return StabilizerCode(name, **params)  # type: ignore[arg-type]


def syndrome_sectors(code: StabilizerCode) -> list[SymmetrySector]:
    """Syndrome sectors ordered by syndrome; index 0 is the codespace."""
    labels = code.syndrome_labels
    return [
        SymmetrySector(code.n_physical, int(s), tuple(int(i) for i in np.flatnonzero(labels == s)), "syndrome")
        for s in np.unique(labels)
    ]


def syndrome_projectors(code: StabilizerCode) -> dict[int, NDArray[np.complex128]]:
    out = {}
    for sector in syndrome_sectors(code):
        p = np.zeros((code.dim, code.dim), dtype=np.complex128)
        p[sector.index_array, sector.index_array] = 1.0
        out[sector.label] = p
    return out


def syndrome_measurement(code: StabilizerCode) -> Channel:
    """Non-selective syndrome measurement rho -> sum_s P_s rho P_s."""
    return Channel(code.n_physical, tuple(syndrome_projectors(code).values()), "syndrome_measurement")


def _x_string(mask: int, n: int) -> NDArray[np.complex128]:
    return pauli_string_operator("".join("X" if mask >> q & 1 else "I" for q in range(n)))


def decoder_table(code: StabilizerCode) -> dict[int, int]:
    """Syndrome -> X mask of the single-qubit flip it identifies; 0 for the codespace.

    Raises:
        CapabilityError: If single flips do not have distinct syndromes covering every syndrome
    """
    table = {0: 0}
    for q in range(code.n_physical):
        syndrome = int(code.syndrome_labels[1 << q])
        if syndrome in table:
            raise CapabilityError("Single-qubit flips are not uniquely identified by the syndrome")
        table[syndrome] = 1 << q
    if set(table) != set(syndrome_projectors(code)):
        raise CapabilityError("Some syndromes have no single-flip correction")
    return table


def correction_set(code: StabilizerCode) -> tuple[int, ...]:
    """X masks of the corrections F_j, one per syndrome outcome, ordered by syndrome."""
    table = decoder_table(code)
    return tuple(table[s] for s in sorted(table))


def majority_vote_correction(code: StabilizerCode) -> Channel:
    """Feedback that undoes the single-qubit flip identified by the syndrome.

    Raises:
        CapabilityError: If the syndrome does not identify single flips
    """
    projectors = syndrome_projectors(code)
    kraus = [
        _x_string(mask, code.n_physical) @ projectors[syndrome]
        for syndrome, mask in sorted(decoder_table(code).items())
    ]
    return Channel(code.n_physical, tuple(kraus), "majority_vote")


def _canonical_phase(u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    flat = u.reshape(-1)
    pivot = flat[np.flatnonzero(np.abs(flat) > 1e-9)[0]]
    return u * (abs(pivot) / pivot)


def single_qubit_cliffords() -> list[NDArray[np.complex128]]:
    """The 24 single-qubit Cliffords (modulo global phase), generated from H and S."""
    identity = np.eye(2, dtype=np.complex128)
    found = {np.round(identity, 8).tobytes(): identity}
    queue = deque([identity])
    while queue:
        u = queue.popleft()
        for g in (HADAMARD, PHASE_S):
            v = _canonical_phase(g @ u)
            key = np.round(v, 8).tobytes()
            if key not in found:
                found[key] = v
                queue.append(v)
    group = list(found.values())
    assert len(group) == 24
    return group


def logical_gate(code: StabilizerCode, u: NDArray, name: str = "logical") -> Gate:
    """A single-logical-qubit gate embedded as identity outside the codespace."""
    return Gate.full(name, code.logical_unitary(u))


def logical_clifford_ensemble(code: StabilizerCode) -> DesignEnsemble:
    """The 24 logical Cliffords as a design on the codespace.

    Raises:
        CapabilityError: For codes with more than one logical qubit
    """
    if code.n_logical != 1:
        raise CapabilityError("Logical Clifford ensembles need a single logical qubit")
    elements = [
        DesignElement(code.n_physical, (logical_gate(code, c, "clifford"),), 0, f"C{k}")
        for k, c in enumerate(single_qubit_cliffords())
    ]
    ensemble = design_from_elements("logical_clifford", code.codespace, elements, code.syndrome_labels)
    for element in elements:
        ensemble.validate_element(element)
    return ensemble


def randomized_ensemble(code: StabilizerCode, choice: RandomizerChoice) -> DesignEnsemble:
    """Logical Cliffords with the sampled part of the randomizer folded into each element.

    ``phase_layer`` appends one of the 2^n physical Z layers, giving 24 * 2^n
    elements; ``measure_and_random_correct`` appends one correction of the
    decoder's correction set drawn uniformly, whatever the syndrome (24 * 4 for
    the three-qubit code). The applied correction is known, so it is tracked as
    an X frame that shifts the readout sector. ``measure_only`` leaves the
    Cliffords as they are.
    """
    base = logical_clifford_ensemble(code)
    cliffords = [element for element, _ in base.elements()]
    n = code.n_physical
    if choice == "measure_only":
        return base
    if choice == "phase_layer":
        elements = [
            DesignElement(n, c.gates, mask, f"{c.label}Z{mask}")
            for c in cliffords
            for mask in range(2**n)
        ]
    elif choice == "measure_and_random_correct":
        elements = [
            DesignElement(n, c.gates, 0, f"{c.label}F{mask}", frame=mask)
            for c in cliffords
            for mask in correction_set(code)
        ]
    else:
        raise InvalidParameterError(f"Unknown randomizer {choice!r}")
    return design_from_elements(f"logical_clifford+{choice}", code.codespace, elements, code.syndrome_labels)


def randomizer(choice: RandomizerChoice, code: StabilizerCode) -> Channel:
    """The randomizer averaged over its random outcomes.

    For ``measure_and_random_correct`` this is the physical channel with the
    corrections left untracked: a codespace state is spread evenly over the
    sectors the corrections map it to.

    Raises:
        InvalidParameterError: For an unknown choice
    """
    n = code.n_physical
    if choice == "phase_layer":
        kraus = [
            np.diag([(-1.0) ** popcount(i & mask) for i in range(2**n)]).astype(np.complex128) / np.sqrt(2**n)
            for mask in range(2**n)
        ]
        return Channel(n, tuple(kraus), "phase_layer")
    if choice == "measure_only":
        return syndrome_measurement(code)
    if choice == "measure_and_random_correct":
        corrections = [_x_string(mask, n) for mask in correction_set(code)]
        measure = syndrome_measurement(code)
        kraus = [f @ k / np.sqrt(len(corrections)) for f in corrections for k in measure.kraus]
        return Channel(n, tuple(kraus), "measure_and_random_correct")
    raise InvalidParameterError(f"Unknown randomizer {choice!r}")


@dataclass(eq=False)
class MeasuredNoise(NoiseModel):
    """Round noise preceded by a non-selective syndrome measurement."""

    base: NoiseModel
    measurement: Channel

    def __post_init__(self) -> None:
        self.stationary = self.base.stationary

    def gate_channel(self, gate: Gate) -> Channel | None:
        return self.base.gate_channel(gate)

    def step_channel(self, round_index: int = 0) -> Channel | None:
        step = self.base.step_channel(round_index)
        return self.measurement if step is None else compose(step, self.measurement)

    def describe(self) -> dict[str, object]:
        return {"kind": "measured", "base": self.base.describe()}


def round_noise(
    code: StabilizerCode, noise: Channel | NoiseModel | None, choice: RandomizerChoice
) -> NoiseModel:
    """Noise model of one round for a randomizer choice."""
    model = as_noise_model(noise)
    if choice == "phase_layer":
        return model
    return MeasuredNoise(model, syndrome_measurement(code))


@dataclass(frozen=True, eq=False)
class LogicalRound:
    """One logical operation L = F M G together with its randomizer choice.

    Attributes:
        code: Code the gate acts on
        gate: Logical gate G, identity outside the codespace
        measurement: Syndrome measurement M
        feedback: Correction F conditioned on the syndrome
        randomizer: Randomizer the round is benchmarked with
        gate_noise: Error following G, also used when G is interleaved

    Raises:
        ValidationError: If the noiseless gate leaks out of the codespace
    """

    code: StabilizerCode
    gate: Gate
    measurement: Channel
    feedback: Channel
    randomizer: RandomizerChoice = "phase_layer"
    gate_noise: Channel | None = None

    def __post_init__(self) -> None:
        p = self.code.projector
        leak = float(np.linalg.norm((np.eye(self.code.dim) - p) @ self.gate.matrix @ p, 2))
        if leak > 1e-10:
            raise ValidationError(f"Gate {self.gate.name!r} maps the codespace outside itself ({leak:.3e})")
        if self.gate_noise is not None and self.gate_noise.n_qubits != self.code.n_physical:
            raise InvalidParameterError("Gate noise acts on another register")

    def channel(self) -> Channel:
        """F after M after G."""
        g = Channel(self.code.n_physical, (self.gate.matrix,), self.gate.name)
        if self.gate_noise is not None:
            g = compose(self.gate_noise, g)
        return compose(self.feedback, compose(self.measurement, g))

    def interleave(self) -> InterleaveSpec:
        """G as the interleaved gate of a codespace benchmark."""
        return InterleaveSpec((self.gate,), self.gate_noise, self.gate.name)

    def logical_error(self, noise: Channel | NoiseModel | None = None) -> float:
        """Probability that one noisy round leaves G|0_L> after correction.

        ``noise`` is the round error, applied between G and the measurement.
        """
        model = as_noise_model(noise)
        zero = self.code.codespace.indices[0]
        rho = np.zeros((self.code.dim, self.code.dim), dtype=np.complex128)
        rho[zero, zero] = 1.0
        rho = self.gate.matrix @ rho @ self.gate.matrix.conj().T
        if self.gate_noise is not None:
            rho = self.gate_noise.apply_array(rho)
        step = model.step_channel(0)
        if step is not None:
            rho = step.apply_array(rho)
        rho = self.feedback.apply_array(self.measurement.apply_array(rho))
        target = self.gate.matrix[:, zero]
        fidelity = float(np.real(target.conj() @ rho @ target))
        return min(1.0, max(0.0, 1.0 - fidelity))

    def describe(self) -> dict[str, object]:
        return {
            "gate": self.gate.name,
            "randomizer": self.randomizer,
            "gate_noise": None if self.gate_noise is None else self.gate_noise.label,
        }


def gate_round(
    code: StabilizerCode,
    gate: Gate,
    choice: RandomizerChoice = "phase_layer",
    gate_noise: Channel | None = None,
) -> LogicalRound:
    """L = F M G for ``gate`` with the syndrome measurement and majority-vote feedback."""
    return LogicalRound(
        code,
        gate,
        syndrome_measurement(code),
        majority_vote_correction(code),
        choice,
        gate_noise,
    )


def logical_t_gate(code: StabilizerCode) -> Gate:
    return logical_gate(code, PHASE_T, "logical_t")


def ecc_spec(
    code: StabilizerCode,
    noise: Channel | NoiseModel | None,
    choice: RandomizerChoice,
    lengths: Sequence[int],
    n_sequences: int,
    shots: int = 0,
    master_seed: int = 0,
    interleave: InterleaveSpec | None = None,
    label: str | None = None,
) -> ExperimentSpec:
    """Experiment starting in |0_L> and reading out the codespace population."""
    return ExperimentSpec(
        design=randomized_ensemble(code, choice),
        lengths=tuple(lengths),
        n_sequences=n_sequences,
        noise=round_noise(code, noise, choice),
        shots=shots,
        master_seed=master_seed,
        interleave=interleave,
        measure_sector=code.codespace,
        rho0=DensityMatrix.basis_state(code.n_physical, code.codespace.indices[0]),
        streams=(RANDOMIZER_CHOICES.index(choice), 0 if interleave is None else 1),
        label=label or ("RC" if interleave is None else "RCG"),
    )


def logical_error_bound(mu_f: float, mu_m: float, mu_g: float, d: int) -> float:
    """Upper bound (mu_F + mu_M + mu_G)^d on the logical fault rate.

    Raises:
        InvalidParameterError: For negative rates or d < 1

    Example:
        >>> round(logical_error_bound(0.004, 0.003, 0.003, 3), 15)
        1e-06
    """
    if min(mu_f, mu_m, mu_g) < 0:
        raise InvalidParameterError("Rates must be non-negative")
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    return float((mu_f + mu_m + mu_g) ** d)


@dataclass(frozen=True)
class ECCReport:
    code: StabilizerCode
    randomizer: RandomizerChoice
    curve: DecayCurve
    fit: FitResult
    mu_r: float | None = None
    clifford_estimate: InterleavedEstimate | None = None
    interleaved_curve: DecayCurve | None = None
    interleaved_fit: FitResult | None = None
    gate_estimate: InterleavedEstimate | None = None
    bound: dict[str, float] | None = field(default=None)
    logical: LogicalRound | None = None
    logical_error: float | None = None

    @property
    def mu_rc(self) -> float:
        return self.fit.mu

    def to_dict(self) -> dict[str, object]:
        return {
            "code": self.code.describe(),
            "randomizer": self.randomizer,
            "mu_rc": self.mu_rc,
            "mu_rc_stderr": self.fit.gamma1_stderr,
            "mu_r": self.mu_r,
            "clifford_estimate": None if self.clifford_estimate is None else self.clifford_estimate.to_dict(),
            "curve": self.curve.to_dict(),
            "fit": self.fit.to_dict(),
            "interleaved_curve": None if self.interleaved_curve is None else self.interleaved_curve.to_dict(),
            "interleaved_fit": None if self.interleaved_fit is None else self.interleaved_fit.to_dict(),
            "gate_estimate": None if self.gate_estimate is None else self.gate_estimate.to_dict(),
            "bound": self.bound,
            "logical_round": None if self.logical is None else self.logical.describe(),
            "logical_error": self.logical_error,
        }


def _clamp(value: float) -> float:
    return min(1.0, max(0.0, value))


def ecc_benchmark(
    code: StabilizerCode,
    noise: Channel | NoiseModel | None,
    choice: RandomizerChoice,
    lengths: Sequence[int],
    n_sequences: int,
    shots: int = 0,
    master_seed: int = 0,
    mu_r: float | None = None,
    logical: LogicalRound | None = None,
    bound_rates: tuple[float, float] | None = None,
    max_order: int | None = None,
    max_workers: int | None = None,
) -> ECCReport:
    """Benchmark codespace preservation of (logical Clifford, randomizer, noise) rounds.

    Args:
        mu_r: Externally estimated randomizer rate; enables mu_C = mu_RC - mu_R
        logical: Logical round whose gate is characterised by interleaving
        bound_rates: (mu_F, mu_M) used with the fitted gate rate in the logical bound

    Raises:
        InvalidParameterError: If the logical round was built for another code or randomizer
        FitConvergenceError: If a curve cannot be fitted
    """
    if logical is not None and (logical.code.name != code.name or logical.randomizer != choice):
        raise InvalidParameterError(
            f"Logical round {logical.gate.name!r} was built for another code or randomizer"
        )
    engine = BenchmarkEngine(max_workers)
    spec = ecc_spec(code, noise, choice, lengths, n_sequences, shots, master_seed)
    curve = engine.estimate_curve(spec)
    fit = fit_decay(curve, max_order)
    clifford = None
    if mu_r is not None:
        clifford = interleaved_estimate(_clamp(fit.mu), _clamp(mu_r), 2)

    icurve = ifit = gate_estimate = None
    bound = None
    round_error = None
    if logical is not None:
        ispec = ecc_spec(code, noise, choice, lengths, n_sequences, shots, master_seed, logical.interleave())
        icurve = engine.estimate_curve(ispec)
        ifit = fit_decay(icurve, max_order)
        gate_estimate = interleaved_estimate(_clamp(ifit.mu), _clamp(fit.mu), 2)
        round_error = logical.logical_error(noise)
        if bound_rates is not None:
            mu_f, mu_m = bound_rates
            bound = {
                "mu_f": mu_f,
                "mu_m": mu_m,
                "mu_g": gate_estimate.estimate,
                "distance": code.distance,
                "value": logical_error_bound(mu_f, mu_m, gate_estimate.estimate, code.distance),
            }
    log.info("ecc_benchmark_completed", code=code.name, randomizer=choice, mu_rc=fit.mu)
    return ECCReport(
        code, choice, curve, fit, mu_r, clifford, icurve, ifit, gate_estimate, bound, logical, round_error
    )


def ecc_exact_curve(
    code: StabilizerCode,
    noise: Channel | NoiseModel | None,
    choice: RandomizerChoice,
    lengths: Sequence[int],
    interleave: InterleaveSpec | None = None,
) -> NDArray[np.float64]:
    """Exact codespace population after each length, from ensemble-averaged rounds.

    Corrections applied by ``measure_and_random_correct`` are tracked as frames.
    """
    spec = ecc_spec(code, noise, choice, lengths, 1, interleave=interleave)
    return exact_average_curve(spec)


@dataclass(frozen=True)
class RandomizerComparison:
    """Exact Gamma_y per randomizer and their largest pairwise difference."""

    lengths: tuple[int, ...]
    values: dict[str, tuple[float, ...]]
    max_discrepancy: float

    def agree(self, atol: float = 1e-10) -> bool:
        return self.max_discrepancy <= atol

    def to_dict(self) -> dict[str, object]:
        return {
            "lengths": list(self.lengths),
            "values": {k: list(v) for k, v in self.values.items()},
            "max_discrepancy": self.max_discrepancy,
        }


def compare_randomizers(
    code: StabilizerCode, noise: Channel | NoiseModel | None, lengths: Sequence[int]
) -> RandomizerComparison:
    """Exact curves of all randomizer choices for the same noise.

    The choices agree for X-type Pauli noise, whose sector populations do not
    depend on coherences. Coherent noise that builds coherences inside an error
    sector separates them; the discrepancy is reported, not asserted.
    """
    values = {
        choice: tuple(float(v) for v in ecc_exact_curve(code, noise, choice, lengths))
        for choice in RANDOMIZER_CHOICES
    }
    stacked = np.array(list(values.values()))
    discrepancy = float(np.max(np.ptp(stacked, axis=0))) if len(lengths) else 0.0
    if discrepancy > get_config().simulation.design_atol:
        log.info("randomizers_disagree", code=code.name, max_discrepancy=discrepancy)
    return RandomizerComparison(tuple(lengths), values, discrepancy)

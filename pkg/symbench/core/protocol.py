# symbench/core/protocol.py

"""Monte-Carlo symmetry benchmarking engine.

A sequence of length y starts from a state in the initial sector, runs y rounds
of (sampled design element with its attached noise), optionally interleaving a
uniformly drawn gate of the interleave set after every element, and ends with
a readout of the population left in the measured sector.

Key functionality:
- Experiment descriptions with optional interleaving and SPAM channels
- Counter-based seeding: every (length, sequence) pair has its own stream
- Thread-parallel curve estimation with deterministic aggregation
- Full-enumeration oracle over all sequences for tiny cases
- Averaged-round oracle that tracks the X frames applied by the design
"""

from __future__ import annotations

import contextvars
import dataclasses
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from symbench.config import SimulationConfig, get_config
from symbench.core.channels import Channel, Gate, IdentityNoise, NoiseModel, as_noise_model
from symbench.core.onedesign import DesignElement, DesignEnsemble, frame_resolved_averages
from symbench.core.qstate import DensityMatrix, SymmetrySector, population
from symbench.utils.exceptions import (
    CapabilityError,
    InvalidParameterError,
    ReportError,
    SymbenchError,
    ValidationError,
)
from symbench.utils.logging import LoggerMixin, get_logger

log = get_logger(__name__)

CSV_COLUMNS = ("length", "mean", "stderr", "n_sequences", "shots")


def derive_rng(master_seed: int, y: int, index: int, *tags: int) -> np.random.Generator:
    """Independent generator for sequence ``index`` of length ``y``.

    ``tags`` separate campaigns that share a master seed (sector, curve kind).
    """
    return np.random.default_rng(np.random.SeedSequence([master_seed, *tags, y, index]))


@dataclass(frozen=True, eq=False)
class InterleaveSpec:
    """Gates interleaved after every design element, each followed by ``noise``."""

    gates: tuple[Gate, ...]
    noise: Channel | None = None
    name: str = "I"

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise InvalidParameterError("The interleave set needs at least one gate")


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """Everything needed to reproduce one decay curve.

    Attributes:
        design: Ensemble sampled every round; its sector is the initial sector
        lengths: Strictly increasing sequence lengths, min >= 1
        n_sequences: Random sequences per length
        noise: Errors attached to design rounds (a bare channel means per-round)
        shots: Binomial readout shots per sequence, 0 for the exact expectation
        master_seed: Root of every sequence stream
        interleave: Optional interleaved gate set with its own noise
        prep: Channel applied once after state preparation
        meas: Channel applied once before readout
        measure_sector: Sector read out at the end, the initial sector when None
        rho0: Initial state, the lowest-index basis state of the sector when None
        streams: Extra seed tags separating campaigns that share a master seed
        label: Curve name used in reports
    """

    design: DesignEnsemble
    lengths: tuple[int, ...]
    n_sequences: int
    noise: NoiseModel | Channel | None = field(default_factory=IdentityNoise)
    shots: int = 0
    master_seed: int = 0
    interleave: InterleaveSpec | None = None
    prep: Channel | None = None
    meas: Channel | None = None
    measure_sector: SymmetrySector | None = None
    rho0: DensityMatrix | None = None
    streams: tuple[int, ...] = ()
    label: str = "D"

    def __post_init__(self) -> None:
        lengths = tuple(int(y) for y in self.lengths)
        if not lengths or lengths[0] < 1 or any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise InvalidParameterError(
                f"lengths must be nonempty, strictly increasing and >= 1, got {list(lengths)}"
            )
        if self.n_sequences < 1:
            raise InvalidParameterError(f"n_sequences must be >= 1, got {self.n_sequences}")
        if self.shots < 0:
            raise InvalidParameterError(f"shots must be >= 0, got {self.shots}")
        if self.master_seed < 0:
            raise InvalidParameterError("master_seed must be a non-negative integer")
        n = self.design.n_qubits
        for name in ("prep", "meas"):
            channel = getattr(self, name)
            if channel is not None and channel.n_qubits != n:
                raise InvalidParameterError(f"{name} channel acts on {channel.n_qubits} qubits, expected {n}")
        if self.rho0 is not None and self.rho0.n_qubits != n:
            raise InvalidParameterError("Initial state and design act on different registers")
        if self.measure_sector is not None and self.measure_sector.n_qubits != n:
            raise InvalidParameterError("Readout sector and design act on different registers")
        if self.interleave is not None:
            self._validate_interleave(self.interleave)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "noise", as_noise_model(self.noise))

    def _validate_interleave(self, interleave: InterleaveSpec) -> None:
        n = self.design.n_qubits
        for gate in interleave.gates:
            if gate.n_qubits != n:
                raise InvalidParameterError(f"Interleaved gate {gate.name!r} acts on another register")
            amplitude = self.design.off_block_amplitude(DesignElement(n, (gate,)))
            if amplitude > get_config().simulation.block_atol:
                raise ValidationError(
                    f"Interleaved gate {gate.name!r} mixes symmetry sectors "
                    f"(off-block amplitude {amplitude:.3e})"
                )
        if interleave.noise is not None and interleave.noise.n_qubits != n:
            raise InvalidParameterError("Interleave noise acts on another register")

    @property
    def n_qubits(self) -> int:
        return self.design.n_qubits

    @property
    def sector(self) -> SymmetrySector:
        return self.design.sector

    @property
    def readout_sector(self) -> SymmetrySector:
        return self.measure_sector or self.design.sector

    @property
    def initial_state(self) -> DensityMatrix:
        if self.rho0 is not None:
            return self.rho0
        return DensityMatrix.basis_state(self.n_qubits, self.sector.indices[0])

    @property
    def interleaved(self) -> bool:
        return self.interleave is not None

    def describe(self) -> dict[str, object]:
        return {
            "label": self.label,
            "design": self.design.name,
            "n_qubits": self.n_qubits,
            "sector": {"symmetry": self.sector.symmetry, "label": self.sector.label},
            "readout_sector": {
                "symmetry": self.readout_sector.symmetry,
                "label": self.readout_sector.label,
            },
            "noise": self.noise.describe(),
            "interleave": None if self.interleave is None else self.interleave.name,
            "lengths": list(self.lengths),
            "n_sequences": self.n_sequences,
            "shots": self.shots,
            "master_seed": self.master_seed,
            "streams": list(self.streams),
            "prep": None if self.prep is None else self.prep.label,
            "meas": None if self.meas is None else self.meas.label,
        }


@dataclass(frozen=True)
class DecayCurve:
    """Mean survival and its standard error per sequence length."""

    lengths: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    n_sequences: tuple[int, ...]
    shots: tuple[int, ...]
    label: str = "curve"

    def __post_init__(self) -> None:
        sizes = {len(self.lengths), len(self.means), len(self.stderrs), len(self.n_sequences), len(self.shots)}
        if len(sizes) != 1:
            raise InvalidParameterError("All curve columns must have the same length")
        if any(not -1e-12 <= m <= 1 + 1e-12 for m in self.means):
            raise InvalidParameterError("Curve means must lie in [0, 1]")
        if any(s < 0 for s in self.stderrs):
            raise InvalidParameterError("Standard errors must be non-negative")

    @classmethod
    def exact(cls, lengths: Sequence[int], values: Sequence[float], label: str = "exact") -> DecayCurve:
        """Oracle curve: zero standard error, no sampling."""
        return cls(
            tuple(int(y) for y in lengths),
            tuple(float(v) for v in values),
            tuple(0.0 for _ in lengths),
            tuple(0 for _ in lengths),
            tuple(0 for _ in lengths),
            label,
        )

    @property
    def x(self) -> NDArray[np.float64]:
        return np.asarray(self.lengths, dtype=float)

    @property
    def y(self) -> NDArray[np.float64]:
        return np.asarray(self.means, dtype=float)

    @property
    def sigma(self) -> NDArray[np.float64]:
        return np.asarray(self.stderrs, dtype=float)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "length": list(self.lengths),
                "mean": list(self.means),
                "stderr": list(self.stderrs),
                "n_sequences": list(self.n_sequences),
                "shots": list(self.shots),
            },
            columns=list(CSV_COLUMNS),
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, label: str = "curve") -> DecayCurve:
        """Build a curve from a frame with at least ``length`` and ``mean`` columns.

        Missing ``stderr``, ``n_sequences`` or ``shots`` columns become zeros.

        Raises:
            ReportError: If required columns are missing or not numeric
        """
        missing = {"length", "mean"} - set(frame.columns)
        if missing:
            raise ReportError(f"Curve is missing columns: {sorted(missing)}")
        size = len(frame)

        def column(name: str, default: float) -> list[float]:
            if name not in frame.columns:
                return [default] * size
            return frame[name].astype(float).tolist()

        try:
            return cls(
                tuple(int(v) for v in column("length", 0)),
                tuple(column("mean", 0.0)),
                tuple(column("stderr", 0.0)),
                tuple(int(v) for v in column("n_sequences", 0)),
                tuple(int(v) for v in column("shots", 0)),
                label,
            )
        except (TypeError, ValueError) as e:
            raise ReportError(f"Curve columns are not numeric: {e}") from e

    def to_dict(self) -> dict[str, object]:
        return {"label": self.label, **{k: v for k, v in self.to_frame().to_dict(orient="list").items()}}


def _apply_gate(rho: NDArray, gate: Gate, channel: Channel | None) -> NDArray:
    u = gate.matrix
    rho = u @ rho @ u.conj().T
    return rho if channel is None else channel.apply_array(rho)


def _apply_frame(rho: NDArray, frame: int) -> NDArray:
    flipped = np.arange(rho.shape[0]) ^ frame
    return rho[np.ix_(flipped, flipped)]


def _apply_element(spec: ExperimentSpec, rho: NDArray, element: DesignElement) -> NDArray:
    noise: NoiseModel = spec.noise  # type: ignore[assignment]
    for gate in element.gates:
        rho = _apply_gate(rho, gate, noise.gate_channel(gate))
    if element.z_mask:
        rho = rho * np.outer(element.phases, element.phases)
    if element.frame:
        rho = _apply_frame(rho, element.frame)
    return rho


def _finish_round(spec: ExperimentSpec, rho: NDArray, round_index: int, interleaved: Gate | None) -> NDArray:
    step = spec.noise.step_channel(round_index)  # type: ignore[union-attr]
    if step is not None:
        rho = step.apply_array(rho)
    if interleaved is not None:
        rho = _apply_gate(rho, interleaved, spec.interleave.noise)  # type: ignore[union-attr]
    return rho


def _apply_round(
    spec: ExperimentSpec,
    rho: NDArray,
    element: DesignElement,
    round_index: int,
    interleaved: Gate | None = None,
) -> NDArray:
    return _finish_round(spec, _apply_element(spec, rho, element), round_index, interleaved)


def _prepare(spec: ExperimentSpec) -> NDArray:
    rho = spec.initial_state.data
    return rho if spec.prep is None else spec.prep.apply_array(rho)


def _survival(spec: ExperimentSpec, rho: NDArray, frame: int = 0) -> float:
    """Population of the readout sector shifted by the accumulated frame."""
    if spec.meas is not None:
        rho = spec.meas.apply_array(rho)
    return min(1.0, max(0.0, population(rho, spec.readout_sector.index_array ^ frame)))


def survival_of_sequence(
    spec: ExperimentSpec,
    elements: Sequence[DesignElement],
    interleaved: Sequence[Gate] | None = None,
) -> float:
    """Exact survival probability of one fixed sequence (no shot noise).

    Raises:
        InvalidParameterError: If the interleaved gate list does not match the sequence
    """
    if spec.interleave is not None and (interleaved is None or len(interleaved) != len(elements)):
        raise InvalidParameterError("Interleaved sequences need one interleaved gate per round")
    rho = _prepare(spec)
    frame = 0
    for r, element in enumerate(elements):
        rho = _apply_round(spec, rho, element, r, None if interleaved is None else interleaved[r])
        frame ^= element.frame
    return _survival(spec, rho, frame)


def run_sequence(spec: ExperimentSpec, y: int, rng: np.random.Generator) -> float:
    """Sample and run one random sequence of length ``y``; returns the survival estimate."""
    if y < 1:
        raise InvalidParameterError(f"Sequence length must be >= 1, got {y}")
    gates = spec.interleave.gates if spec.interleave is not None else ()
    rho = _prepare(spec)
    frame = 0
    for r in range(y):
        element = spec.design.sample(rng)
        chosen = None
        if gates:
            # A single interleaved gate consumes no randomness, keeping streams aligned
            chosen = gates[0] if len(gates) == 1 else gates[int(rng.integers(len(gates)))]
        rho = _apply_round(spec, rho, element, r, chosen)
        frame ^= element.frame
    p = _survival(spec, rho, frame)
    if spec.shots:
        return float(rng.binomial(spec.shots, p)) / spec.shots
    return p


def exact_sequence_average(spec: ExperimentSpec, y: int, cap: int | None = None) -> float:
    """Mean survival over every sequence of length ``y`` with its exact weight.

    The enumeration walks the sequence tree depth first, so rounds shared by
    sequences with a common prefix are simulated once.

    Raises:
        CapabilityError: If the number of sequences exceeds the enumeration cap
    """
    cap = get_config().simulation.enumeration_cap if cap is None else cap
    if spec.design.size is None:
        raise CapabilityError(f"Ensemble {spec.design.name!r} has no enumerator")
    gates = spec.interleave.gates if spec.interleave is not None else (None,)
    branching = spec.design.size * len(gates)
    if branching**y > cap:
        raise CapabilityError(f"{branching}^{y} sequences exceed the enumeration cap {cap}")
    weighted = spec.design.elements(cap)
    choices = [(element, gate, w / len(gates)) for (element, w), gate in product(weighted, gates)]

    def walk(rho: NDArray, depth: int, frame: int) -> float:
        if depth == y:
            return _survival(spec, rho, frame)
        return math.fsum(
            w * walk(_apply_round(spec, rho, element, depth, gate), depth + 1, frame ^ element.frame)
            for element, gate, w in choices
        )

    return walk(_prepare(spec), 0, 0)


def exact_average_curve(spec: ExperimentSpec) -> NDArray[np.float64]:
    """Mean survival at every length of ``spec`` from ensemble-averaged rounds.

    One averaged state is kept per accumulated frame, so the cost grows with
    the length instead of the number of sequences. Without frames this is the
    half-twirl oracle with the interleaved average appended to each round.

    Raises:
        CapabilityError: If the ensemble exceeds the enumeration cap
    """
    n = spec.n_qubits
    dim = 2**n
    averages = frame_resolved_averages(spec.noise, spec.design)
    interleave = None
    if spec.interleave is not None:
        gates = spec.interleave.gates
        interleave = sum(g.superoperator for g in gates) / len(gates)
        if spec.interleave.noise is not None:
            interleave = spec.interleave.noise.superoperator_matrix @ interleave

    states = {0: _prepare(spec).reshape(-1).astype(np.complex128)}
    out = np.empty(len(spec.lengths))
    done = 0
    for k, y in enumerate(spec.lengths):
        for r in range(done, y):
            step = spec.noise.step_channel(r)  # type: ignore[union-attr]
            merged: dict[int, NDArray] = {}
            for frame, vec in states.items():
                for applied, matrix in averages.items():
                    key = frame ^ applied
                    term = matrix @ vec
                    merged[key] = merged[key] + term if key in merged else term
            for key, vec in merged.items():
                if step is not None:
                    vec = step.superoperator_matrix @ vec
                if interleave is not None:
                    vec = interleave @ vec
                merged[key] = vec
            states = merged
        done = y
        value = math.fsum(_survival(spec, vec.reshape(dim, dim), frame) for frame, vec in states.items())
        out[k] = min(1.0, max(0.0, value))
    return out


class BenchmarkEngine(LoggerMixin):
    """Runs the random sequences of a spec on a thread pool.

    Every sequence draws from its own stream derived from the master seed, and
    results are aggregated in (length, index) order, so the curve does not
    depend on the number of workers.

    Example:
        >>> engine = BenchmarkEngine(max_workers=2)
        >>> curve = engine.estimate_curve(spec)
    """

    def __init__(self, max_workers: int | None = None, config: SimulationConfig | None = None):
        self.config = config or get_config().simulation
        self.max_workers = max_workers or self.config.max_workers
        if self.max_workers < 1:
            raise InvalidParameterError(f"max_workers must be >= 1, got {self.max_workers}")

    def _run_task(self, spec: ExperimentSpec, y: int, index: int) -> float:
        rng = derive_rng(spec.master_seed, y, index, *spec.streams)
        try:
            return run_sequence(spec, y, rng)
        except SymbenchError:
            raise
        except Exception as e:
            self.log.error("sequence_failed", length=y, index=index, error=str(e))
            raise

    def estimate_curve(self, spec: ExperimentSpec) -> DecayCurve:
        """Mean and standard error of the survival at every length of ``spec``."""
        tasks = [(y, k) for y in spec.lengths for k in range(spec.n_sequences)]
        self.log.info(
            "curve_estimation_started",
            label=spec.label,
            lengths=len(spec.lengths),
            n_sequences=spec.n_sequences,
            shots=spec.shots,
            workers=self.max_workers,
        )
        if self.max_workers == 1:
            results = [self._run_task(spec, y, k) for y, k in tasks]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                # Each task carries the caller's bound log context
                futures = [
                    pool.submit(contextvars.copy_context().run, self._run_task, spec, y, k)
                    for y, k in tasks
                ]
                results = [f.result() for f in futures]

        values = np.asarray(results, dtype=float).reshape(len(spec.lengths), spec.n_sequences)
        means = values.mean(axis=1)
        if spec.n_sequences > 1:
            stderrs = values.std(axis=1, ddof=1) / math.sqrt(spec.n_sequences)
        else:
            stderrs = np.zeros(len(spec.lengths))
        curve = DecayCurve(
            spec.lengths,
            tuple(float(min(1.0, max(0.0, m))) for m in means),
            tuple(float(s) for s in stderrs),
            tuple(spec.n_sequences for _ in spec.lengths),
            tuple(spec.shots for _ in spec.lengths),
            spec.label,
        )
        self.log.info("curve_estimated", label=spec.label, first=curve.means[0], last=curve.means[-1])
        return curve


def estimate_curve(spec: ExperimentSpec, max_workers: int | None = None) -> DecayCurve:
    return BenchmarkEngine(max_workers).estimate_curve(spec)


def interleaved_curve(spec: ExperimentSpec, max_workers: int | None = None) -> DecayCurve:
    """Curve of the interleaved sequences of ``spec``.

    Raises:
        InvalidParameterError: If ``spec`` has no interleave set
    """
    if spec.interleave is None:
        raise InvalidParameterError("interleaved_curve needs a spec with an interleave set")
    return BenchmarkEngine(max_workers).estimate_curve(spec)


def without_interleave(spec: ExperimentSpec) -> ExperimentSpec:
    """The plain reference experiment sharing every other setting of ``spec``."""
    return dataclasses.replace(spec, interleave=None, label=f"{spec.label}_reference")


def spam_channels(
    prep: Channel | None, meas: Channel | None
) -> Callable[[ExperimentSpec], ExperimentSpec]:
    """Decorator-style transform adding preparation and measurement errors.

    Example:
        >>> noisy = spam_channels(depolarizing_channel(4, 0.05), None)(spec)
    """

    def decorate(spec: ExperimentSpec) -> ExperimentSpec:
        return dataclasses.replace(spec, prep=prep, meas=meas)

    return decorate


def default_lengths(
    expected_mu: float | None = None,
    floor: float | None = None,
    grid: Sequence[int] | None = None,
    min_points: int = 3,
) -> tuple[int, ...]:
    """Length grid clipped where (1 - mu)^y would fall below the fit floor.

    At least ``min_points`` lengths are always kept.
    """
    config = get_config().simulation
    grid = tuple(config.default_lengths if grid is None else grid)
    floor = config.fit_floor if floor is None else floor
    if expected_mu is None or expected_mu <= 0:
        return grid
    if expected_mu >= 1:
        return grid[:min_points]
    kept = tuple(y for y in grid if (1.0 - expected_mu) ** y >= floor)
    return kept if len(kept) >= min_points else grid[:min_points]

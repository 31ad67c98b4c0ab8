# symbench/core/onedesign.py

"""One-design ensembles on conserved sectors and the exact twirl oracles.

An ensemble element is an ordered list of gates followed by a noiseless layer
of Z gates (a bit mask, one bit per qubit). Noise models attach their errors
to the gates and to the end of the round, never to the Z layer.

Exact oracles group the elements of an enumerated ensemble by their gate
sequence. All elements of a group share one (noisy) superoperator and differ
only by a diagonal phase superoperator, so each group costs one product of
gate superoperators regardless of how many Z layers it carries. Groups are
evaluated on a thread pool and summed pairwise in a fixed order.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Literal

import numpy as np
import scipy.stats
from numpy.typing import NDArray

from symbench.config import get_config
from symbench.core.channels import (
    Channel,
    Gate,
    NoiseModel,
    Superoperator,
    as_noise_model,
    iswap_gate,
    permutation_to_iswaps,
)
from symbench.core.qstate import (
    DensityMatrix,
    SymmetrySector,
    number_labels,
    popcount,
    population,
    sector_basis_operators,
    sector_indices,
    sectors_from_labels,
)
from symbench.utils.exceptions import CapabilityError, InvalidParameterError, ValidationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

CONDITION_OF_KIND = {"B": 1, "X": 2, "Y": 3}


def z_layer_phases(mask: int, n: int) -> NDArray[np.float64]:
    """Diagonal of the Z layer acting on the qubits set in ``mask``."""
    return np.array([(-1.0) ** popcount(i & mask) for i in range(2**n)])


@dataclass(frozen=True, eq=False)
class DesignElement:
    """Gates applied in order, then the noiseless Z layer ``z_mask``.

    A nonzero ``frame`` appends the noiseless X string on the qubits set in the
    mask. Frames are tracked: the readout sector of a sequence is shifted by
    the XOR of the frames it applied.
    """

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    z_mask: int = 0
    label: str = ""
    frame: int = 0

    @cached_property
    def phases(self) -> NDArray[np.float64]:
        return z_layer_phases(self.z_mask, self.n_qubits)

    @cached_property
    def superop_phases(self) -> NDArray[np.float64]:
        return np.outer(self.phases, self.phases).reshape(-1)

    @cached_property
    def gate_unitary(self) -> NDArray[np.complex128]:
        u = np.eye(2**self.n_qubits, dtype=np.complex128)
        for gate in self.gates:
            u = gate.matrix @ u
        return u

    @cached_property
    def unitary(self) -> NDArray[np.complex128]:
        return self.phases[:, None] * self.gate_unitary

    @property
    def gate_key(self) -> tuple[int, ...]:
        return tuple(id(g) for g in self.gates)

    def describe(self) -> dict[str, object]:
        return {
            "label": self.label,
            "gates": [g.describe() for g in self.gates],
            "z_mask": self.z_mask,
            "frame": self.frame,
        }


WeightedElement = tuple[DesignElement, float]


@dataclass(frozen=True, eq=False)
class DesignEnsemble:
    """A finite set of block-diagonal unitaries with a sampler and an optional enumerator.

    Attributes:
        name: Ensemble family, used in reports
        n_qubits: Register size
        sector: Sector the ensemble is meant to be a one-design on
        sampler: Draws one element from a seeded generator
        enumerator: Yields every element with its probability weight
        size: Number of elements, when finite and known
        labels: Conserved label of every basis index; elements must not
            connect basis states with different labels
    """

    name: str
    n_qubits: int
    sector: SymmetrySector
    sampler: Callable[[np.random.Generator], DesignElement]
    enumerator: Callable[[], Iterator[WeightedElement]] | None = None
    size: int | None = None
    labels: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        if self.sector.n_qubits != self.n_qubits:
            raise InvalidParameterError("Ensemble and sector are defined on different registers")
        if self.labels is None:
            object.__setattr__(self, "labels", number_labels(self.n_qubits))

    @property
    def enumerable(self) -> bool:
        cap = get_config().simulation.enumeration_cap
        return self.enumerator is not None and self.size is not None and self.size <= cap

    def sample(self, rng: np.random.Generator) -> DesignElement:
        return self.sampler(rng)

    def elements(self, cap: int | None = None) -> list[WeightedElement]:
        """Every element with its weight.

        Raises:
            CapabilityError: If there is no enumerator or the ensemble exceeds the cap
        """
        cap = get_config().simulation.enumeration_cap if cap is None else cap
        if self.enumerator is None or self.size is None:
            raise CapabilityError(f"Ensemble {self.name!r} has no enumerator")
        if self.size > cap:
            raise CapabilityError(
                f"Ensemble {self.name!r} has {self.size} elements, above the enumeration cap {cap}"
            )
        return list(self.enumerator())

    def off_block_amplitude(self, element: DesignElement) -> float:
        """Largest amplitude connecting basis states with different conserved labels."""
        mixing = self.labels[:, None] != self.labels[None, :]
        if not mixing.any():
            return 0.0
        return float(np.max(np.abs(element.unitary[mixing])))

    def validate_element(self, element: DesignElement, atol: float | None = None) -> DesignElement:
        atol = get_config().simulation.block_atol if atol is None else atol
        amplitude = self.off_block_amplitude(element)
        if amplitude > atol:
            raise ValidationError(
                f"Element {element.label!r} of {self.name!r} mixes symmetry sectors "
                f"(off-block amplitude {amplitude:.3e})"
            )
        return element

    def restricted_to(self, sector: SymmetrySector) -> DesignEnsemble:
        """Same elements, benchmarked on another sector of the same register."""
        return DesignEnsemble(
            self.name, self.n_qubits, sector, self.sampler, self.enumerator, self.size, self.labels
        )


def _pair_gate_cache(n: int) -> Callable[[tuple[int, int]], Gate]:
    # One Gate object per adjacent pair so identical sequences share superoperators
    gates = {(q, q + 1): iswap_gate(q, q + 1, n) for q in range(n - 1)}
    return gates.__getitem__


def _permutation_gates(perm: Sequence[int], pair_gate: Callable[[tuple[int, int]], Gate]) -> tuple[Gate, ...]:
    return tuple(pair_gate(pair) for pair in permutation_to_iswaps(perm))


def number_design(n: int, gamma: int) -> DesignEnsemble:
    """Random qubit permutations (as iSWAP networks) followed by random Z layers.

    The same ensemble is a one-design on every excitation-number sector; ``gamma``
    only selects the sector the benchmark runs on.

    Example:
        >>> number_design(3, 1).size
        48
    """
    sector = sector_indices(n, gamma)
    pair_gate = _pair_gate_cache(n)
    size = math.factorial(n) * 2**n

    def sampler(rng: np.random.Generator) -> DesignElement:
        perm = rng.permutation(n)
        bits = rng.integers(0, 2, size=n)
        mask = int(sum(int(b) << q for q, b in enumerate(bits)))
        return DesignElement(n, _permutation_gates(perm, pair_gate), mask, f"perm{tuple(perm.tolist())}")

    def enumerator() -> Iterator[WeightedElement]:
        weight = 1.0 / size
        for perm in permutations(range(n)):
            gates = _permutation_gates(perm, pair_gate)
            for mask in range(2**n):
                yield DesignElement(n, gates, mask, f"perm{perm}"), weight

    return DesignEnsemble("number", n, sector, sampler, enumerator, size)


def permutations_design(n: int, gamma: int) -> DesignEnsemble:
    """Qubit permutations without the phase layer (not a one-design)."""
    sector = sector_indices(n, gamma)
    pair_gate = _pair_gate_cache(n)
    size = math.factorial(n)

    def sampler(rng: np.random.Generator) -> DesignElement:
        perm = rng.permutation(n)
        return DesignElement(n, _permutation_gates(perm, pair_gate), 0, f"perm{tuple(perm.tolist())}")

    def enumerator() -> Iterator[WeightedElement]:
        for perm in permutations(range(n)):
            yield DesignElement(n, _permutation_gates(perm, pair_gate), 0, f"perm{perm}"), 1.0 / size

    return DesignEnsemble("permutations_only", n, sector, sampler, enumerator, size)


def identity_design(n: int, gamma: int) -> DesignEnsemble:
    sector = sector_indices(n, gamma)
    element = DesignElement(n, (), 0, "identity")
    return DesignEnsemble(
        "identity_only", n, sector, lambda rng: element, lambda: iter([(element, 1.0)]), 1
    )


def design_from_elements(
    name: str,
    sector: SymmetrySector,
    elements: Sequence[DesignElement],
    labels: NDArray[np.int64] | None = None,
) -> DesignEnsemble:
    """Uniform ensemble over an explicit element list."""
    elements = tuple(elements)
    if not elements:
        raise InvalidParameterError("An ensemble needs at least one element")
    weight = 1.0 / len(elements)

    def sampler(rng: np.random.Generator) -> DesignElement:
        return elements[int(rng.integers(len(elements)))]

    def enumerator() -> Iterator[WeightedElement]:
        return ((element, weight) for element in elements)

    return DesignEnsemble(
        name, sector.n_qubits, sector, sampler, enumerator, len(elements), labels
    )


def design_from_unitaries(
    name: str,
    sector: SymmetrySector,
    unitaries: Sequence[NDArray],
    labels: NDArray[np.int64] | None = None,
    gate_name: str = "custom",
) -> DesignEnsemble:
    """Uniform ensemble over full-register unitaries, one gate per element.

    Raises:
        ValidationError: If a unitary mixes sectors with different labels
    """
    n = sector.n_qubits
    elements = [
        DesignElement(n, (Gate.full(gate_name, u),), 0, f"{name}[{k}]")
        for k, u in enumerate(unitaries)
    ]
    ensemble = design_from_elements(name, sector, elements, labels)
    for element in elements:
        ensemble.validate_element(element)
    return ensemble


def _identity_superop(n: int) -> NDArray[np.complex128]:
    return np.eye(4**n, dtype=np.complex128)


def frame_superoperator(frame: int, n: int) -> NDArray[np.complex128]:
    """Row-major superoperator of the X string on the qubits set in ``frame``."""
    dim = 2**n
    flipped = np.arange(dim) ^ frame
    source = (flipped[:, None] * dim + flipped[None, :]).reshape(-1)
    s = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    s[np.arange(dim * dim), source] = 1.0
    return s


def _pairwise_sum(terms: list[NDArray[np.complex128]]) -> NDArray[np.complex128]:
    # Fixed pairing order keeps the sum independent of the worker count
    while len(terms) > 1:
        paired = [a + b for a, b in zip(terms[::2], terms[1::2])]
        if len(terms) % 2:
            paired.append(terms[-1])
        terms = paired
    return terms[0]


def _grouped_average(
    weighted: Sequence[WeightedElement],
    gate_superop: Callable[[Gate], NDArray[np.complex128]],
    n: int,
    max_workers: int | None = None,
) -> NDArray[np.complex128]:
    """Sum over elements of weight * phase layer * product of gate superoperators.

    Group terms are built on a thread pool and combined by a pairwise tree sum.
    """
    groups: dict[tuple[int, ...], tuple[tuple[Gate, ...], NDArray[np.float64]]] = {}
    for element, weight in weighted:
        key = element.gate_key
        if key not in groups:
            groups[key] = (element.gates, np.zeros(4**n))
        groups[key][1][:] += weight * element.superop_phases
    if not groups:
        return np.zeros((4**n, 4**n), dtype=np.complex128)

    def term(item: tuple[tuple[Gate, ...], NDArray[np.float64]]) -> NDArray[np.complex128]:
        gates, phase_sum = item
        s = _identity_superop(n)
        for gate in gates:
            s = gate_superop(gate) @ s
        return phase_sum[:, None] * s

    workers = max_workers or get_config().simulation.max_workers
    items = list(groups.values())
    if workers == 1 or len(items) == 1:
        terms = [term(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
            terms = list(pool.map(term, items))
    return _pairwise_sum(terms)


def frame_resolved_averages(
    noise: Channel | NoiseModel | None, ensemble: DesignEnsemble, max_workers: int | None = None
) -> dict[int, NDArray[np.complex128]]:
    """Noisy element average split by the tracked frame each element applies.

    The per-round error is not included. The values sum to the untracked
    average over the ensemble.

    Raises:
        CapabilityError: If the ensemble exceeds the enumeration cap
    """
    model = as_noise_model(noise)
    n = ensemble.n_qubits
    by_frame: dict[int, list[WeightedElement]] = {}
    for element, weight in ensemble.elements():
        by_frame.setdefault(element.frame, []).append((element, weight))
    superop = _noisy_gate_superop(model)
    out = {}
    for frame, weighted in sorted(by_frame.items()):
        matrix = _grouped_average(weighted, superop, n, max_workers)
        out[frame] = matrix if frame == 0 else frame_superoperator(frame, n) @ matrix
    return out


def _noisy_gate_superop(noise: NoiseModel) -> Callable[[Gate], NDArray[np.complex128]]:
    cache: dict[int, NDArray[np.complex128]] = {}

    def superop(gate: Gate) -> NDArray[np.complex128]:
        key = id(gate)
        if key not in cache:
            s = gate.superoperator
            channel = noise.gate_channel(gate)
            if channel is not None:
                s = channel.superoperator_matrix @ s
            cache[key] = s
        return cache[key]

    return superop


def average_superoperator(ensemble: DesignEnsemble) -> Superoperator:
    """Noiseless design average (1/#D) sum_D D as a superoperator.

    Raises:
        CapabilityError: If the ensemble cannot be enumerated
    """
    matrix = _pairwise_sum(list(frame_resolved_averages(None, ensemble).values()))
    return Superoperator(ensemble.n_qubits, matrix)


@dataclass(frozen=True, eq=False)
class HalfTwirl:
    """Dense superoperator of the noisy design average (1/#D) sum_D Lambda D."""

    superop: Superoperator
    ensemble: str
    n_elements: int

    @property
    def n_qubits(self) -> int:
        return self.superop.n_qubits

    @cached_property
    def eigenvalues(self) -> NDArray[np.complex128]:
        return self.superop.eigenvalues()

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


def half_twirl(
    noise: Channel | NoiseModel | None, ensemble: DesignEnsemble, round_index: int = 0
) -> HalfTwirl:
    """Exact half twirl of ``noise`` over an enumerable ensemble.

    Per-gate errors are attached to every gate of each element before the
    phase layer; the per-round error of ``round_index`` follows the element.

    Raises:
        CapabilityError: If the ensemble exceeds the enumeration cap or its
            elements apply tracked frames
    """
    model = as_noise_model(noise)
    n = ensemble.n_qubits
    averages = frame_resolved_averages(model, ensemble)
    if set(averages) != {0}:
        raise CapabilityError(
            f"Ensemble {ensemble.name!r} applies tracked frames; use the frame-resolved average"
        )
    matrix = averages[0]
    step = model.step_channel(round_index)
    if step is not None:
        matrix = step.superoperator_matrix @ matrix
    log.debug("half_twirl_built", ensemble=ensemble.name, elements=ensemble.size, n_qubits=n)
    return HalfTwirl(Superoperator(n, matrix), ensemble.name, ensemble.size or 0)


def _as_matrix(ht: HalfTwirl | Superoperator) -> NDArray[np.complex128]:
    return ht.superop.matrix if isinstance(ht, HalfTwirl) else ht.matrix


def exact_curve(
    ht: HalfTwirl | Superoperator,
    lengths: Sequence[int],
    rho0: DensityMatrix,
    sector: SymmetrySector,
) -> NDArray[np.float64]:
    """Sector population after each number of half-twirl steps in ``lengths``."""
    if any(y < 0 for y in lengths):
        raise InvalidParameterError("Sequence lengths must be non-negative")
    matrix = _as_matrix(ht)
    dim = rho0.dim
    vec = rho0.data.reshape(-1).astype(np.complex128)
    out = np.empty(len(lengths))
    done = 0
    for k, y in sorted(enumerate(lengths), key=lambda item: item[1]):
        for _ in range(y - done):
            vec = matrix @ vec
        done = y
        value = population(vec.reshape(dim, dim), sector.index_array)
        out[k] = min(1.0, max(0.0, value))
    return out


def exact_gamma(
    ht: HalfTwirl | Superoperator, y: int, rho0: DensityMatrix, sector: SymmetrySector
) -> float:
    """Gamma_y = Tr_sector[Lambda_ht^y(rho0)].

    Raises:
        InvalidParameterError: If ``y`` is negative
    """
    if y < 0:
        raise InvalidParameterError(f"y must be non-negative, got {y}")
    return float(exact_curve(ht, [y], rho0, sector)[0])


def decay_components(
    ht: HalfTwirl | Superoperator, rho0: DensityMatrix, sector: SymmetrySector
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Amplitudes and rates with Gamma_y = sum_i alpha_i lambda_i^y.

    Components with negligible amplitude are dropped.
    """
    matrix = _as_matrix(ht)
    dim = rho0.dim
    values, vectors = np.linalg.eig(matrix)
    coefficients = np.linalg.solve(vectors, rho0.data.reshape(-1))
    readout = np.zeros(dim * dim)
    readout[sector.index_array * dim + sector.index_array] = 1.0
    alphas = (readout @ vectors) * coefficients
    keep = np.abs(alphas) > 1e-14
    return alphas[keep], values[keep]


@dataclass(frozen=True)
class TransitionMatrix:
    """Population flow between sectors under the doubly averaged channel.

    ``matrix[a, b]`` is the population found in ``sectors[a]`` after one step
    started from the mixed state of ``sectors[b]``.
    """

    sectors: tuple[SymmetrySector, ...]
    matrix: NDArray[np.float64]
    double_average: Superoperator = field(repr=False)

    @property
    def labels(self) -> list[int]:
        return [s.label for s in self.sectors]

    def entry(self, to_label: int, from_label: int) -> float:
        labels = self.labels
        return float(self.matrix[labels.index(to_label), labels.index(from_label)])


def double_average_transition_matrix(
    noise: Channel | NoiseModel | None,
    ensemble: DesignEnsemble,
    sectors: Sequence[SymmetrySector] | None = None,
) -> TransitionMatrix:
    """Sector transition matrix of (1/#D^2) sum_{C,D} C Lambda D.

    Raises:
        CapabilityError: If the ensemble exceeds the enumeration cap
    """
    n = ensemble.n_qubits
    if sectors is None:
        sectors = sectors_from_labels(n, ensemble.labels, ensemble.sector.symmetry)
    ideal = average_superoperator(ensemble)
    ht = half_twirl(noise, ensemble)
    double = ideal.compose(ht.superop)
    dim = 2**n
    matrix = np.zeros((len(sectors), len(sectors)))
    for b, source in enumerate(sectors):
        start = np.zeros((dim, dim), dtype=np.complex128)
        start[source.index_array, source.index_array] = 1.0 / source.dim
        out = double.apply_array(start)
        for a, target in enumerate(sectors):
            matrix[a, b] = population(out, target.index_array)
    return TransitionMatrix(tuple(sectors), matrix, double)


@dataclass(frozen=True)
class ConditionCheck:
    """Result of one one-design condition for one sector basis operator."""

    condition: int
    operator_id: str
    violation: float
    threshold: float
    passed: bool
    stderr: float | None = None
    z_score: float | None = None

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "condition": self.condition,
            "operator_id": self.operator_id,
            "violation": self.violation,
            "threshold": self.threshold,
            "pass": self.passed,
        }
        if self.stderr is not None:
            out["stderr"] = self.stderr
            out["z_score"] = self.z_score
        return out


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of checking the first-moment design conditions on a sector.

    Violations are reported for the averaged twirl (1/#D) sum_D D(O); the
    corresponding sums are #D times larger.
    """

    ensemble: str
    mode: Literal["exact", "statistical"]
    sector_label: int
    sector_dim: int
    n_elements: int
    checks: tuple[ConditionCheck, ...]
    max_off_block: float
    block_threshold: float

    @property
    def block_diagonal(self) -> bool:
        return self.max_off_block <= self.block_threshold

    @property
    def passed(self) -> bool:
        return self.block_diagonal and all(c.passed for c in self.checks)

    @property
    def failed_conditions(self) -> list[int]:
        return sorted({c.condition for c in self.checks if not c.passed})

    def max_violation(self, condition: int) -> float:
        return max((c.violation for c in self.checks if c.condition == condition), default=0.0)

    def to_dict(self) -> dict[str, object]:
        return {
            "ensemble": self.ensemble,
            "mode": self.mode,
            "sector": {"label": self.sector_label, "dim": self.sector_dim},
            "n_elements": self.n_elements,
            "pass": self.passed,
            "failed_conditions": self.failed_conditions,
            "max_violation": {str(c): self.max_violation(c) for c in (1, 2, 3)},
            "block_diagonal": {"max_off_block": self.max_off_block, "pass": self.block_diagonal},
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _sector_operator_columns(sector: SymmetrySector) -> tuple[list[str], list[int], NDArray, NDArray]:
    """Vectorised {B, X, Y} operators on the sector block and their ideal twirl images."""
    position = {index: k for k, index in enumerate(sector.indices)}
    d0 = sector.dim
    ops = sector_basis_operators(sector)
    columns = np.zeros((d0 * d0, len(ops)), dtype=np.complex128)
    targets = np.zeros_like(columns)
    mixed = (np.eye(d0) / d0).reshape(-1)
    for c, op in enumerate(ops):
        block = np.zeros((d0, d0), dtype=np.complex128)
        i, j = position[op.i], position[op.j]
        if op.kind == "B":
            block[i, i] = 1.0
            targets[:, c] = mixed
        elif op.kind == "X":
            block[i, j] = block[j, i] = 1.0
        else:
            block[i, j], block[j, i] = -1j, 1j
        columns[:, c] = block.reshape(-1)
    return (
        [op.operator_id for op in ops],
        [CONDITION_OF_KIND[op.kind] for op in ops],
        columns,
        targets,
    )


def _block_superop(u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return np.kron(u, u.conj())


def verify_one_design(
    ensemble: DesignEnsemble,
    mode: Literal["exact", "statistical"] = "exact",
    samples: int | None = None,
    rng: np.random.Generator | None = None,
    level: float = 0.01,
    atol: float | None = None,
) -> VerificationReport:
    """Check the first-moment design conditions on the ensemble's sector.

    Exact mode averages over every element. Condition 1 compares the image of
    each B_i with the sector's mixed state; conditions 2 and 3 require the images
    of X_ij and Y_ij to vanish. Statistical mode estimates the same images from
    ``samples`` random elements and applies a two-sided z-test per matrix entry
    at family-wise ``level`` (Bonferroni).

    Raises:
        CapabilityError: If exact mode is requested for a non-enumerable ensemble
        InvalidParameterError: If statistical mode lacks a sample count
    """
    config = get_config().simulation
    atol = config.design_atol if atol is None else atol
    sector = ensemble.sector
    idx = sector.index_array
    ids, conditions, columns, targets = _sector_operator_columns(sector)
    d0 = sector.dim

    if mode == "exact":
        weighted = ensemble.elements()
        # Group by gate sequence; the Z layer only contributes block phases
        groups: dict[tuple[int, ...], tuple[DesignElement, NDArray[np.float64]]] = {}
        max_off_block = 0.0
        for element, weight in weighted:
            max_off_block = max(max_off_block, ensemble.off_block_amplitude(element))
            block_phase = element.phases[idx]
            phase = np.outer(block_phase, block_phase).reshape(-1)
            if element.gate_key not in groups:
                groups[element.gate_key] = (element, np.zeros(d0 * d0))
            groups[element.gate_key][1][:] += weight * phase
        average = np.zeros((d0 * d0, d0 * d0), dtype=np.complex128)
        for element, phase_sum in groups.values():
            g = element.gate_unitary[np.ix_(idx, idx)]
            average += phase_sum[:, None] * _block_superop(g)
        deviation = average @ columns - targets
        checks = tuple(
            ConditionCheck(
                condition=conditions[c],
                operator_id=ids[c],
                violation=float(np.max(np.abs(deviation[:, c]))),
                threshold=atol,
                passed=bool(np.max(np.abs(deviation[:, c])) <= atol),
            )
            for c in range(len(ids))
        )
        n_elements = len(weighted)
    else:
        if not samples or samples < 2:
            raise InvalidParameterError("Statistical verification needs samples >= 2")
        rng = np.random.default_rng() if rng is None else rng
        total = np.zeros((d0 * d0, len(ids)), dtype=np.complex128)
        square_re = np.zeros((d0 * d0, len(ids)))
        square_im = np.zeros((d0 * d0, len(ids)))
        max_off_block = 0.0
        for _ in range(samples):
            element = ensemble.sample(rng)
            max_off_block = max(max_off_block, ensemble.off_block_amplitude(element))
            images = _block_superop(element.unitary[np.ix_(idx, idx)]) @ columns
            total += images
            square_re += images.real**2
            square_im += images.imag**2
        mean = total / samples
        var_re = np.maximum(square_re / samples - mean.real**2, 0.0) * samples / (samples - 1)
        var_im = np.maximum(square_im / samples - mean.imag**2, 0.0) * samples / (samples - 1)
        se_re, se_im = np.sqrt(var_re / samples), np.sqrt(var_im / samples)
        deviation = mean - targets
        z_crit = float(scipy.stats.norm.ppf(1.0 - level / (2 * deviation.size * 2)))

        def z_scores(dev: NDArray, se: NDArray) -> NDArray:
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.abs(dev) / se
            return np.where(se > 0, z, np.where(np.abs(dev) > atol, np.inf, 0.0))

        z = np.maximum(z_scores(deviation.real, se_re), z_scores(deviation.imag, se_im))
        checks = tuple(
            ConditionCheck(
                condition=conditions[c],
                operator_id=ids[c],
                violation=float(np.max(np.abs(deviation[:, c]))),
                threshold=z_crit,
                passed=bool(np.max(z[:, c]) <= z_crit),
                stderr=float(np.max(np.hypot(se_re[:, c], se_im[:, c]))),
                z_score=float(np.max(z[:, c])),
            )
            for c in range(len(ids))
        )
        n_elements = samples

    report = VerificationReport(
        ensemble=ensemble.name,
        mode=mode,
        sector_label=sector.label,
        sector_dim=d0,
        n_elements=n_elements,
        checks=checks,
        max_off_block=max_off_block,
        block_threshold=config.block_atol,
    )
    log.info(
        "one_design_verified",
        ensemble=ensemble.name,
        mode=mode,
        passed=report.passed,
        failed_conditions=report.failed_conditions,
    )
    return report


def sampler_image_histogram(
    ensemble: DesignEnsemble, basis_index: int, samples: int, rng: np.random.Generator
) -> dict[int, int]:
    """Counts of the basis state each sampled element maps ``basis_index`` to.

    Only meaningful for monomial ensembles (permutations with phases).
    """
    counts: dict[int, int] = {int(i): 0 for i in ensemble.sector.indices}
    for _ in range(samples):
        column = ensemble.sample(rng).unitary[:, basis_index]
        image = int(np.argmax(np.abs(column)))
        counts[image] = counts.get(image, 0) + 1
    return counts

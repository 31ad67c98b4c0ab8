# symbench/core/channels.py

"""Gates and noise as CPTP maps.

Channels are stored as Kraus lists of full-register matrices. Superoperators
act on row-major vectorised density matrices, ``vec(rho) = rho.reshape(-1)``,
so the superoperator of a Kraus list is ``sum_k kron(K_k, conj(K_k))`` and the
trace functional is ``vec(I)``.

Key functionality:
- Standard gate matrices and LSB-first embedding into an n-qubit register
- iSWAP networks realising qubit permutations
- Dilated near-identity noise (unitary on system + two ancillas, ancillas traced out)
- Channel composition, application and superoperator conversion
- Noise models deciding where errors are attached within a benchmarking round
"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property, reduce
from itertools import product

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from symbench.config import get_config
from symbench.core.qstate import DensityMatrix, SymmetrySector
from symbench.utils.exceptions import InvalidParameterError, ValidationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

# Single-qubit matrices, basis order |0>, |1>
I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
PHASE_S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
PHASE_T = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128)

# Local index b = bit(q1) + 2*bit(q2); |01> <-> |10> pick up a factor i
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)

PAULIS = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def rx(theta: float) -> NDArray[np.complex128]:
    """Rotation exp(-i theta X / 2)."""
    return scipy.linalg.expm(-0.5j * theta * PAULI_X)


def _frozen(array: NDArray) -> NDArray[np.complex128]:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


def embed_operator(op: NDArray, qubits: Sequence[int], n: int) -> NDArray[np.complex128]:
    """Embed a k-qubit operator acting on ``qubits`` into an n-qubit register.

    ``qubits[0]`` is the least-significant bit of the operator's local index.

    Raises:
        InvalidParameterError: If the qubits are repeated, out of range or
            do not match the operator size
    """
    op = np.asarray(op, dtype=np.complex128)
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise InvalidParameterError(f"Operator of shape {op.shape} does not act on {k} qubits")
    if len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
        raise InvalidParameterError(f"Invalid target qubits {tuple(qubits)} for {n} qubits")

    dim = 2**n
    mask = sum(1 << q for q in qubits)
    rest = np.array([i for i in range(dim) if i & mask == 0], dtype=np.intp)
    # Full-register offset of every local index
    local = np.array(
        [sum(((b >> pos) & 1) << q for pos, q in enumerate(qubits)) for b in range(2**k)],
        dtype=np.intp,
    )
    full = np.zeros((dim, dim), dtype=np.complex128)
    rows = rest[:, None, None] + local[None, :, None]
    cols = rest[:, None, None] + local[None, None, :]
    full[rows, cols] = op[None, :, :]
    return full


def pauli_string_operator(label: str) -> NDArray[np.complex128]:
    """Operator of a Pauli string; character ``q`` acts on qubit ``q``."""
    try:
        factors = [PAULIS[ch] for ch in label.upper()]
    except KeyError as e:
        raise InvalidParameterError(f"Invalid Pauli string {label!r}") from e
    # kron places later factors on lower qubits, so reverse
    return reduce(np.kron, reversed(factors), np.eye(1, dtype=np.complex128))


def check_unitary(u: NDArray, atol: float | None = None) -> NDArray[np.complex128]:
    """Return ``u`` as a complex array, raising if it is not unitary."""
    atol = get_config().simulation.unitary_atol if atol is None else atol
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"Unitary must be a square matrix, got shape {u.shape}")
    deviation = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if deviation > atol:
        raise ValidationError(f"Matrix is not unitary (deviation {deviation:.3e})")
    return u


def _n_from_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if 2**n != dim or n < 1:
        raise InvalidParameterError(f"Dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class Gate:
    """A named gate acting on specific qubits of an n-qubit register.

    Attributes:
        name: Gate family, e.g. ``iswap``, ``clifford``, ``pair``, ``logical_t``
        qubits: Target qubits, LSB of ``local`` first
        n_qubits: Register size
        local: Unitary on the target qubits
    """

    name: str
    qubits: tuple[int, ...]
    n_qubits: int
    local: NDArray[np.complex128]

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "local", _frozen(check_unitary(self.local)))

    @cached_property
    def matrix(self) -> NDArray[np.complex128]:
        return _frozen(embed_operator(self.local, self.qubits, self.n_qubits))

    @cached_property
    def superoperator(self) -> NDArray[np.complex128]:
        u = self.matrix
        return np.kron(u, u.conj())

    @classmethod
    def full(cls, name: str, unitary: NDArray) -> Gate:
        """Gate given directly as a full-register unitary."""
        unitary = np.asarray(unitary, dtype=np.complex128)
        n = _n_from_dim(unitary.shape[0])
        return cls(name, tuple(range(n)), n, unitary)

    def describe(self) -> dict[str, object]:
        return {"name": self.name, "qubits": list(self.qubits)}


def iswap_gate(q1: int, q2: int, n: int) -> Gate:
    return Gate("iswap", (q1, q2), n, ISWAP)


def iswap_matrix(q1: int, q2: int, n: int) -> NDArray[np.complex128]:
    return embed_operator(ISWAP, (q1, q2), n)


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive trace-preserving map in Kraus form.

    Example:
        >>> ch = unitary_channel(PAULI_X)
        >>> ch.apply(DensityMatrix.basis_state(1, 0)).data[1, 1]
        (1+0j)
    """

    n_qubits: int
    kraus: tuple[NDArray[np.complex128], ...]
    label: str = "channel"

    def __post_init__(self) -> None:
        if not self.kraus:
            raise ValidationError("A channel needs at least one Kraus operator")
        dim = 2**self.n_qubits
        kraus = tuple(_frozen(k) for k in self.kraus)
        if any(k.shape != (dim, dim) for k in kraus):
            raise ValidationError(f"Kraus operators of a {self.n_qubits}-qubit channel must be {dim}x{dim}")
        completeness = sum(k.conj().T @ k for k in kraus)
        deviation = float(np.max(np.abs(completeness - np.eye(dim))))
        if deviation > get_config().simulation.kraus_atol:
            raise ValidationError(
                f"Kraus operators of {self.label!r} are not trace preserving "
                f"(completeness deviation {deviation:.3e})"
            )
        object.__setattr__(self, "kraus", kraus)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def is_unitary(self) -> bool:
        return len(self.kraus) == 1

    @cached_property
    def superoperator_matrix(self) -> NDArray[np.complex128]:
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def _prefers_superoperator(self) -> bool:
        # Kraus costs ~2*K*d^3, the dense superoperator d^4
        return self.dim <= 32 and 2 * len(self.kraus) > self.dim

    def apply_array(self, rho: NDArray) -> NDArray[np.complex128]:
        """Apply the channel to a raw density-matrix array."""
        if self._prefers_superoperator():
            return (self.superoperator_matrix @ rho.reshape(-1)).reshape(self.dim, self.dim)
        if self.is_unitary:
            k = self.kraus[0]
            return k @ rho @ k.conj().T
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        """Apply the channel to a density matrix.

        Raises:
            InvalidParameterError: If the qubit counts differ
        """
        if rho.n_qubits != self.n_qubits:
            raise InvalidParameterError(
                f"Channel acts on {self.n_qubits} qubits, state has {rho.n_qubits}"
            )
        out = self.apply_array(rho.data)
        return DensityMatrix(self.n_qubits, 0.5 * (out + out.conj().T))


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Dense d^2 x d^2 matrix acting on row-major vectorised density matrices."""

    n_qubits: int
    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        d2 = 4**self.n_qubits
        matrix = _frozen(self.matrix)
        if matrix.shape != (d2, d2):
            raise ValidationError(f"Superoperator must be {d2}x{d2}, got {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def apply_array(self, rho: NDArray) -> NDArray[np.complex128]:
        return (self.matrix @ np.asarray(rho).reshape(-1)).reshape(self.dim, self.dim)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.n_qubits != self.n_qubits:
            raise InvalidParameterError(
                f"Superoperator acts on {self.n_qubits} qubits, state has {rho.n_qubits}"
            )
        out = self.apply_array(rho.data)
        return DensityMatrix(self.n_qubits, 0.5 * (out + out.conj().T))

    def compose(self, other: Superoperator) -> Superoperator:
        """``self`` after ``other``."""
        if other.n_qubits != self.n_qubits:
            raise InvalidParameterError("Superoperators act on different registers")
        return Superoperator(self.n_qubits, self.matrix @ other.matrix)

    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.linalg.eigvals(self.matrix)

    def is_trace_preserving(self, atol: float | None = None) -> bool:
        atol = get_config().simulation.kraus_atol if atol is None else atol
        trace_row = np.eye(self.dim, dtype=np.complex128).reshape(-1)
        return bool(np.max(np.abs(trace_row @ self.matrix - trace_row)) <= atol)


def unitary_channel(u: NDArray, label: str = "unitary") -> Channel:
    """Single-Kraus channel rho -> U rho U^dagger.

    Raises:
        ValidationError: If ``u`` is not unitary
    """
    u = check_unitary(u)
    return Channel(_n_from_dim(u.shape[0]), (u,), label)


def identity_channel(n: int) -> Channel:
    return Channel(n, (np.eye(2**n, dtype=np.complex128),), "identity")


def _simplify(n: int, kraus: list[NDArray], label: str) -> Channel:
    """Drop vanishing Kraus operators and re-diagonalise long lists via the Choi matrix."""
    kept = [k for k in kraus if np.max(np.abs(k)) > 1e-15]
    dim = 2**n
    if len(kept) > dim * dim:
        # Choi matrix in the (out, in) x (out, in) ordering
        vecs = np.stack([k.reshape(-1) for k in kept], axis=1)
        choi = vecs @ vecs.conj().T
        values, vectors = np.linalg.eigh(choi)
        kept = [
            np.sqrt(v) * vectors[:, i].reshape(dim, dim)
            for i, v in enumerate(values)
            if v > 1e-14
        ]
    return Channel(n, tuple(kept or [np.zeros((dim, dim))]), label)


def compose(a: Channel, b: Channel) -> Channel:
    """Channel acting as ``a`` after ``b``.

    Raises:
        InvalidParameterError: If the channels act on different registers
    """
    if a.n_qubits != b.n_qubits:
        raise InvalidParameterError(
            f"Cannot compose channels on {a.n_qubits} and {b.n_qubits} qubits"
        )
    kraus = [ka @ kb for kb in b.kraus for ka in a.kraus]
    return _simplify(a.n_qubits, kraus, f"{a.label}*{b.label}")


def apply(c: Channel, rho: DensityMatrix) -> DensityMatrix:
    return c.apply(rho)


def to_superoperator(c: Channel) -> Superoperator:
    return Superoperator(c.n_qubits, c.superoperator_matrix)


def permutation_to_iswaps(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Adjacent-iSWAP network moving the content of qubit q to qubit ``perm[q]``.

    The network is a bubble sort, so it uses at most n(n-1)/2 gates. Basis
    states are permuted up to phases; the phases are left unconstrained.

    Raises:
        InvalidParameterError: If ``perm`` is not a permutation of range(n)

    Example:
        >>> permutation_to_iswaps([1, 0])
        [(0, 1)]
    """
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(len(perm))):
        raise InvalidParameterError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
    arrangement = list(range(len(perm)))
    swaps: list[tuple[int, int]] = []
    for sweep in range(len(perm)):
        changed = False
        for j in range(len(perm) - 1 - sweep):
            if perm[arrangement[j]] > perm[arrangement[j + 1]]:
                arrangement[j], arrangement[j + 1] = arrangement[j + 1], arrangement[j]
                swaps.append((j, j + 1))
                changed = True
        if not changed:
            break
    return swaps


def dilated_noise(
    n_sys: int, support: tuple[int, int], epsilon: float, seed: int
) -> Channel:
    """Near-identity error on a qubit pair from a unitary dilation.

    A random Hermitian H on the two support qubits plus two ancillas (standard
    normal real and imaginary parts, Hermitised, scaled to unit spectral norm)
    defines U = exp(-i epsilon H). With the ancillas starting in |00> and traced
    out afterwards this yields four Kraus operators on the pair, embedded as the
    identity on the remaining qubits. The result depends only on ``seed`` and
    ``epsilon``.

    Raises:
        InvalidParameterError: If ``epsilon`` is negative or the pair is invalid
    """
    if epsilon < 0:
        raise InvalidParameterError(f"epsilon must be non-negative, got {epsilon}")
    q1, q2 = support
    if q1 == q2 or not (0 <= q1 < n_sys and 0 <= q2 < n_sys):
        raise InvalidParameterError(f"Invalid support pair {support} for {n_sys} qubits")

    rng = np.random.default_rng(seed)
    a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    h = 0.5 * (a + a.conj().T)
    h /= np.linalg.norm(h, 2)
    u = scipy.linalg.expm(-1j * epsilon * h)

    # Local index: support bits 0-1, ancilla bits 2-3; ancilla prepared in |00>
    kraus = [embed_operator(u[4 * a_out : 4 * a_out + 4, 0:4], (q1, q2), n_sys) for a_out in range(4)]
    log.debug("dilated_noise_built", support=support, epsilon=epsilon, seed=seed)
    return _simplify(n_sys, kraus, f"dilated[{q1},{q2}]")


def depolarizing_channel(n: int, p: float, support: Sequence[int] | None = None) -> Channel:
    """rho -> (1 - p) rho + p Tr_S(rho) (x) I_S/d_S as a uniform Pauli mixture on ``support``.

    The whole register is depolarized when ``support`` is None.
    """
    if not 0 <= p <= 1:
        raise InvalidParameterError(f"Depolarizing probability must be in [0, 1], got {p}")
    qubits = tuple(range(n)) if support is None else tuple(support)
    k = len(qubits)
    labels = ["".join(s) for s in product("IXYZ", repeat=k)]
    weight_other = p / 4**k
    ops = [embed_operator(pauli_string_operator(label), qubits, n) for label in labels]
    kraus = [np.sqrt(1 - p + weight_other) * ops[0]]
    kraus += [np.sqrt(weight_other) * op for op in ops[1:]]
    return _simplify(n, kraus, f"depolarizing({p})")


def sector_depolarizing(sector: SymmetrySector, p: float) -> Channel:
    """Depolarize inside a sector only (Weyl-operator twirl of the sector block).

    Population never leaves the sector; states outside it are untouched apart
    from losing coherence with the sector.
    """
    if not 0 <= p <= 1:
        raise InvalidParameterError(f"Depolarizing probability must be in [0, 1], got {p}")
    n = sector.n_qubits
    dim, d0 = 2**n, sector.dim
    idx = np.asarray(sector.indices, dtype=np.intp)
    omega = np.exp(2j * np.pi / d0)
    shift = np.roll(np.eye(d0), 1, axis=0)
    clock = np.diag(omega ** np.arange(d0))
    kraus = [np.sqrt(1 - p + p / d0**2) * np.eye(dim, dtype=np.complex128)]
    for a, b in product(range(d0), repeat=2):
        if a == 0 and b == 0:
            continue
        w = np.eye(dim, dtype=np.complex128)
        w[np.ix_(idx, idx)] = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        kraus.append(np.sqrt(p / d0**2) * w)
    return _simplify(n, kraus, f"sector_depolarizing({p})")


def bitflip_channel(n: int, p: float, qubits: Iterable[int]) -> Channel:
    """Independent X flips with probability ``p`` on each listed qubit."""
    if not 0 <= p <= 1:
        raise InvalidParameterError(f"Flip probability must be in [0, 1], got {p}")
    channel = identity_channel(n)
    for q in qubits:
        flip = Channel(
            n,
            (
                np.sqrt(1 - p) * np.eye(2**n, dtype=np.complex128),
                np.sqrt(p) * embed_operator(PAULI_X, (q,), n),
            ),
            f"bitflip[{q}]",
        )
        channel = compose(flip, channel)
    return Channel(n, channel.kraus, f"bitflip({p})")


def xrotation_channel(n: int, theta: float, qubits: Iterable[int]) -> Channel:
    """Coherent RX(theta) over-rotation on each listed qubit."""
    u = np.eye(2**n, dtype=np.complex128)
    for q in qubits:
        u = embed_operator(rx(theta), (q,), n) @ u
    return unitary_channel(u, f"xrotation({theta})")


class NoiseModel:
    """Decides which error channels accompany a benchmarking round.

    ``gate_channel`` is applied right after a gate of the design element,
    ``step_channel`` once after the whole element (and its phase layer).
    """

    stationary: bool = True

    def gate_channel(self, gate: Gate) -> Channel | None:
        return None

    def step_channel(self, round_index: int = 0) -> Channel | None:
        return None

    def describe(self) -> dict[str, object]:
        return {"kind": "identity"}


class IdentityNoise(NoiseModel):
    """Noiseless rounds."""


@dataclass(eq=False)
class StepNoise(NoiseModel):
    """One channel after every round; several channels are cycled by round index."""

    channels: tuple[Channel, ...]

    def __post_init__(self) -> None:
        self.channels = tuple(self.channels)
        if not self.channels:
            raise InvalidParameterError("StepNoise needs at least one channel")
        self.stationary = len(self.channels) == 1

    def step_channel(self, round_index: int = 0) -> Channel | None:
        return self.channels[round_index % len(self.channels)]

    def describe(self) -> dict[str, object]:
        return {"kind": "step", "channels": [c.label for c in self.channels]}


@dataclass(eq=False)
class GateNoise(NoiseModel):
    """The same dilated error attached after every two-qubit gate of a family.

    One channel per qubit pair is built from the shared seed on first use.
    """

    n_qubits: int
    epsilon: float
    seed: int
    gate_names: frozenset[str] = frozenset({"iswap"})
    _cache: dict[tuple[int, int], Channel] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def gate_channel(self, gate: Gate) -> Channel | None:
        if gate.name not in self.gate_names or len(gate.qubits) != 2:
            return None
        pair = (gate.qubits[0], gate.qubits[1])
        with self._lock:
            if pair not in self._cache:
                self._cache[pair] = dilated_noise(self.n_qubits, pair, self.epsilon, self.seed)
            return self._cache[pair]

    def describe(self) -> dict[str, object]:
        return {
            "kind": "per_gate",
            "epsilon": self.epsilon,
            "seed": self.seed,
            "gates": sorted(self.gate_names),
        }


@dataclass(eq=False)
class CompositeNoise(NoiseModel):
    """Per-gate errors from one model and per-round errors from another."""

    gate: NoiseModel
    step: NoiseModel

    def __post_init__(self) -> None:
        self.stationary = self.gate.stationary and self.step.stationary

    def gate_channel(self, gate: Gate) -> Channel | None:
        return self.gate.gate_channel(gate)

    def step_channel(self, round_index: int = 0) -> Channel | None:
        return self.step.step_channel(round_index)

    def describe(self) -> dict[str, object]:
        return {"kind": "composite", "gate": self.gate.describe(), "step": self.step.describe()}


def as_noise_model(noise: Channel | NoiseModel | None) -> NoiseModel:
    """Treat a bare channel as a stationary per-round error."""
    if noise is None:
        return IdentityNoise()
    if isinstance(noise, Channel):
        return StepNoise((noise,))
    return noise

# symbench/core/qstate.py

"""Dense density matrices, symmetry sectors and sector populations.

Bit convention: qubit ``q`` is bit ``q`` of the computational-basis index, so
qubit 0 is the least-significant bit. Every module of the package follows it.
A Kronecker product ``np.kron(A, B)`` therefore places ``B`` on the low qubits.

All objects here are immutable once constructed and the functions are pure, so
they can be shared between worker threads without locking.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from symbench.config import get_config
from symbench.utils.exceptions import InvalidParameterError, ValidationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

SymmetryKind = Literal["number", "parity", "syndrome", "custom"]
OperatorKind = Literal["B", "X", "Y"]


def _freeze(array: NDArray) -> NDArray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


def popcount(index: int) -> int:
    """Number of excited qubits in a basis index."""
    return bin(index).count("1")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A 2^n x 2^n Hermitian, unit-trace, positive semidefinite matrix.

    Hermiticity, trace and shape are checked on construction. Positivity needs an
    eigendecomposition and is checked by :meth:`validate`.

    Example:
        >>> rho = DensityMatrix.basis_state(3, 0b110)
        >>> rho.dim
        8
    """

    n_qubits: int
    data: NDArray[np.complex128]

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise InvalidParameterError(f"n_qubits must be positive, got {self.n_qubits}")
        data = _freeze(self.data)
        dim = 2**self.n_qubits
        if data.shape != (dim, dim):
            raise ValidationError(
                f"Density matrix for {self.n_qubits} qubits must be {dim}x{dim}, "
                f"got {data.shape}"
            )
        sim = get_config().simulation
        asym = float(np.max(np.abs(data - data.conj().T)))
        if asym > sim.hermitian_atol:
            raise ValidationError(f"Density matrix is not Hermitian (deviation {asym:.3e})")
        trace_error = abs(np.trace(data) - 1.0)
        if trace_error > sim.trace_atol:
            raise ValidationError(f"Density matrix trace deviates from 1 by {trace_error:.3e}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> DensityMatrix:
        """Projector onto computational-basis state ``index``."""
        dim = 2**n_qubits
        if not 0 <= index < dim:
            raise InvalidParameterError(f"Basis index {index} out of range for {n_qubits} qubits")
        data = np.zeros((dim, dim), dtype=np.complex128)
        data[index, index] = 1.0
        return cls(n_qubits, data)

    @classmethod
    def from_pure(cls, n_qubits: int, amplitudes: Sequence[complex] | NDArray) -> DensityMatrix:
        """Projector onto a (normalised on the fly) state vector."""
        psi = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidParameterError("State vector must be nonzero")
        psi = psi / norm
        return cls(n_qubits, np.outer(psi, psi.conj()))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data)[0])

    def is_positive(self, atol: float | None = None) -> bool:
        atol = get_config().simulation.psd_atol if atol is None else atol
        return self.min_eigenvalue() >= -atol

    def validate(self, psd: bool = True) -> DensityMatrix:
        """Check positivity and return ``self``.

        Raises:
            ValidationError: If the smallest eigenvalue is below ``-psd_atol``
        """
        if psd and not self.is_positive():
            raise ValidationError(
                f"Density matrix is not positive semidefinite (min eigenvalue "
                f"{self.min_eigenvalue():.3e})"
            )
        return self

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))


@dataclass(frozen=True)
class SymmetrySector:
    """An eigenspace of the conserved operator as an ordered basis-index list.

    Attributes:
        n_qubits: Register size
        label: Conserved eigenvalue index (excitation number, parity bit, syndrome)
        indices: Strictly increasing computational-basis indices spanning the sector
        symmetry: Which conserved quantity the label refers to
    """

    n_qubits: int
    label: int
    indices: tuple[int, ...]
    symmetry: SymmetryKind = "number"
    _index_array: NDArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise InvalidParameterError("A symmetry sector needs at least one basis index")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidParameterError("Sector indices must be strictly increasing")
        if indices[0] < 0 or indices[-1] >= 2**self.n_qubits:
            raise InvalidParameterError(
                f"Sector indices must lie in [0, {2**self.n_qubits}) for {self.n_qubits} qubits"
            )
        if self.symmetry == "number" and any(popcount(i) != self.label for i in indices):
            raise InvalidParameterError(
                f"Number sector {self.label} contains indices of a different weight"
            )
        if self.symmetry == "parity" and any(popcount(i) % 2 != self.label for i in indices):
            raise InvalidParameterError(
                f"Parity sector {self.label} contains indices of the other parity"
            )
        object.__setattr__(self, "indices", indices)
        index_array = np.array(indices, dtype=np.intp)
        index_array.setflags(write=False)
        object.__setattr__(self, "_index_array", index_array)

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def index_array(self) -> NDArray[np.intp]:
        return self._index_array

    def contains(self, index: int) -> bool:
        return index in self.indices


@dataclass(frozen=True)
class SectorBasisOperator:
    """One element of the {B_i, X_ij, Y_ij} basis of operators on a sector.

    ``B_i = |i><i|``, ``X_ij = |i><j| + |j><i|`` and ``Y_ij = -i|i><j| + i|j><i|``.
    """

    kind: OperatorKind
    i: int
    j: int

    def __post_init__(self) -> None:
        if self.kind == "B" and self.i != self.j:
            raise InvalidParameterError("B operators are diagonal (i == j)")
        if self.kind in ("X", "Y") and not self.i < self.j:
            raise InvalidParameterError(f"{self.kind} operators need i < j")

    @property
    def operator_id(self) -> str:
        if self.kind == "B":
            return f"B[{self.i}]"
        return f"{self.kind}[{self.i},{self.j}]"

    def matrix(self, n_qubits: int) -> NDArray[np.complex128]:
        """Full-space matrix of the operator."""
        dim = 2**n_qubits
        op = np.zeros((dim, dim), dtype=np.complex128)
        if self.kind == "B":
            op[self.i, self.i] = 1.0
        elif self.kind == "X":
            op[self.i, self.j] = 1.0
            op[self.j, self.i] = 1.0
        else:
            op[self.i, self.j] = -1j
            op[self.j, self.i] = 1j
        return op


def _check_register(n: int) -> None:
    cap = get_config().simulation.max_qubits
    if not 1 <= n <= cap:
        raise InvalidParameterError(f"Qubit count must be in [1, {cap}], got {n}")


def sector_indices(n: int, gamma: int) -> SymmetrySector:
    """Basis indices with exactly ``gamma`` excited qubits.

    Args:
        n: Qubit count, at most ``SimulationConfig.max_qubits`` (default 10)
        gamma: Excitation number, ``0 <= gamma <= n``

    Returns:
        Number sector of dimension C(n, gamma)

    Raises:
        InvalidParameterError: If ``n`` or ``gamma`` is out of range

    Example:
        >>> sector_indices(3, 1).indices
        (1, 2, 4)
    """
    _check_register(n)
    if not 0 <= gamma <= n:
        raise InvalidParameterError(f"gamma must be in [0, {n}], got {gamma}")
    indices = sorted(sum(1 << q for q in qubits) for qubits in combinations(range(n), gamma))
    sector = SymmetrySector(n, gamma, tuple(indices), "number")
    assert sector.dim == comb(n, gamma)
    return sector


def number_sectors(n: int) -> list[SymmetrySector]:
    """All n+1 excitation-number sectors in increasing order."""
    return [sector_indices(n, gamma) for gamma in range(n + 1)]


def parity_sector(n: int, parity: int) -> SymmetrySector:
    """All basis indices of even (``parity=0``) or odd (``parity=1``) weight."""
    _check_register(n)
    if parity not in (0, 1):
        raise InvalidParameterError(f"parity must be 0 (even) or 1 (odd), got {parity}")
    indices = tuple(i for i in range(2**n) if popcount(i) % 2 == parity)
    return SymmetrySector(n, parity, indices, "parity")


def number_labels(n: int) -> NDArray[np.int64]:
    """Excitation number of every basis index."""
    return np.array([popcount(i) for i in range(2**n)], dtype=np.int64)


def parity_labels(n: int) -> NDArray[np.int64]:
    return number_labels(n) % 2


def sectors_from_labels(
    n: int, labels: Sequence[int] | NDArray, symmetry: SymmetryKind = "custom"
) -> list[SymmetrySector]:
    """Split the basis into sectors of equal conserved label, ordered by label."""
    labels = np.asarray(labels)
    if labels.shape != (2**n,):
        raise InvalidParameterError(f"Need one label per basis index ({2**n}), got {labels.shape}")
    return [
        SymmetrySector(n, int(label), tuple(int(i) for i in np.flatnonzero(labels == label)), symmetry)
        for label in np.unique(labels)
    ]


def as_array(rho: DensityMatrix | NDArray) -> NDArray[np.complex128]:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)


def population(rho: NDArray, indices: NDArray[np.intp]) -> float:
    """Unclamped diagonal weight of ``rho`` on ``indices``."""
    return float(np.real(np.sum(np.diagonal(rho)[indices])))


def sector_population(rho: DensityMatrix, sector: SymmetrySector) -> float:
    """Population of ``rho`` inside ``sector``, clamped to [0, 1].

    Raises:
        InvalidParameterError: If the qubit counts differ
    """
    if sector.n_qubits != rho.n_qubits:
        raise InvalidParameterError(
            f"Sector is defined on {sector.n_qubits} qubits, state on {rho.n_qubits}"
        )
    return min(1.0, max(0.0, population(rho.data, sector.index_array)))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every qubit not in ``keep``.

    The kept qubits are renumbered in increasing order, so the smallest kept
    qubit becomes qubit 0 of the result.

    Raises:
        InvalidParameterError: If ``keep`` is empty or names a missing qubit
    """
    n = rho.n_qubits
    kept = sorted(set(keep))
    if not kept:
        raise InvalidParameterError("partial_trace needs at least one qubit to keep")
    if kept[0] < 0 or kept[-1] >= n:
        raise InvalidParameterError(f"Qubits to keep must lie in [0, {n}), got {kept}")
    if len(kept) == n:
        return rho
    return DensityMatrix(len(kept), reduce_to_qubits(rho.data, n, kept))


def reduce_to_qubits(data: NDArray, n: int, kept: Sequence[int]) -> NDArray[np.complex128]:
    """Partial trace of a raw 2^n x 2^n array onto the sorted qubit list ``kept``."""
    # Tensor axis a of the row index is qubit n-1-a (most significant first)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = [letters[a] for a in range(n)]
    cols = [letters[n + a] if (n - 1 - a) in kept else rows[a] for a in range(n)]
    out_rows = [rows[n - 1 - q] for q in sorted(kept, reverse=True)]
    out_cols = [cols[n - 1 - q] for q in sorted(kept, reverse=True)]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out_rows) + "".join(out_cols)
    tensor = np.asarray(data, dtype=np.complex128).reshape([2] * (2 * n))
    dim = 2 ** len(kept)
    return np.einsum(spec, tensor).reshape(dim, dim)


def maximally_mixed(sector: SymmetrySector) -> DensityMatrix:
    """Uniform mixture of the sector's basis states, embedded in the full space."""
    dim = 2**sector.n_qubits
    data = np.zeros((dim, dim), dtype=np.complex128)
    data[sector.index_array, sector.index_array] = 1.0 / sector.dim
    return DensityMatrix(sector.n_qubits, data)


def embed_in_sector(block: NDArray, sector: SymmetrySector) -> DensityMatrix:
    """Place a d_gamma x d_gamma density matrix on the sector's basis states."""
    block = np.asarray(block, dtype=np.complex128)
    if block.shape != (sector.dim, sector.dim):
        raise InvalidParameterError(
            f"Block must be {sector.dim}x{sector.dim} for this sector, got {block.shape}"
        )
    dim = 2**sector.n_qubits
    data = np.zeros((dim, dim), dtype=np.complex128)
    data[np.ix_(sector.index_array, sector.index_array)] = block
    return DensityMatrix(sector.n_qubits, data)


def random_density_matrix(
    n_qubits: int, rng: np.random.Generator, rank: int | None = None, dim: int | None = None
) -> NDArray[np.complex128]:
    """Ginibre-distributed random density matrix as a raw array.

    Args:
        n_qubits: Register size (ignored when ``dim`` is given)
        rng: Random generator
        rank: Rank of the state, full rank when None
        dim: Explicit matrix dimension, e.g. a sector dimension
    """
    dim = 2**n_qubits if dim is None else dim
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


def sector_basis_operators(sector: SymmetrySector) -> list[SectorBasisOperator]:
    """The d^2 sector basis operators: B ascending, then X and Y lexicographic."""
    idx = sector.indices
    ops: list[SectorBasisOperator] = [SectorBasisOperator("B", i, i) for i in idx]
    pairs = list(combinations(idx, 2))
    ops.extend(SectorBasisOperator("X", i, j) for i, j in pairs)
    ops.extend(SectorBasisOperator("Y", i, j) for i, j in pairs)
    return ops


def basis_coefficients(
    operator: NDArray, sector: SymmetrySector
) -> dict[SectorBasisOperator, float]:
    """Real coefficients of a Hermitian sector operator in the {B, X, Y} basis."""
    operator = np.asarray(operator, dtype=np.complex128)
    coefficients: dict[SectorBasisOperator, float] = {}
    for op in sector_basis_operators(sector):
        entry = operator[op.i, op.j]
        if op.kind == "B":
            coefficients[op] = float(entry.real)
        elif op.kind == "X":
            coefficients[op] = float(entry.real)
        else:
            coefficients[op] = float(-entry.imag)
    return coefficients


def reconstruct_from_coefficients(
    coefficients: dict[SectorBasisOperator, float], n_qubits: int
) -> NDArray[np.complex128]:
    """Inverse of :func:`basis_coefficients`."""
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=np.complex128)
    for op, value in coefficients.items():
        out += value * op.matrix(n_qubits)
    return out

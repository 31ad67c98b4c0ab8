"""Unit tests for density matrices and symmetry sectors."""

from math import comb

import numpy as np
import pytest

from symbench.core.qstate import (
    DensityMatrix,
    SymmetrySector,
    basis_coefficients,
    embed_in_sector,
    maximally_mixed,
    number_sectors,
    parity_sector,
    partial_trace,
    popcount,
    random_density_matrix,
    reconstruct_from_coefficients,
    sector_basis_operators,
    sector_indices,
    sector_population,
    sectors_from_labels,
)
from symbench.utils.exceptions import InvalidParameterError, ValidationError


class TestDensityMatrix:
    """Test DensityMatrix construction and validation."""

    def test_basis_state(self):
        rho = DensityMatrix.basis_state(3, 0b110)
        assert rho.dim == 8
        assert rho.data[6, 6] == 1.0
        assert rho.purity() == pytest.approx(1.0)

    def test_basis_state_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix.basis_state(2, 4)

    def test_from_pure_normalises(self):
        rho = DensityMatrix.from_pure(1, [1.0, 1.0])
        np.testing.assert_allclose(rho.data, 0.5 * np.ones((2, 2)))

    def test_from_pure_rejects_zero_vector(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix.from_pure(1, [0.0, 0.0])

    def test_rejects_non_hermitian(self):
        data = np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValidationError, match="Hermitian"):
            DensityMatrix(1, data)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValidationError, match="trace"):
            DensityMatrix(1, np.eye(2, dtype=complex))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValidationError):
            DensityMatrix(2, np.eye(2, dtype=complex) / 2)

    def test_validate_rejects_negative_eigenvalue(self):
        data = np.diag([1.5, -0.5]).astype(complex)
        rho = DensityMatrix(1, data)
        with pytest.raises(ValidationError, match="positive"):
            rho.validate()

    def test_data_is_read_only(self):
        rho = DensityMatrix.basis_state(1, 0)
        with pytest.raises(ValueError):
            rho.data[0, 0] = 0.0


class TestSectors:
    """Test sector enumeration."""

    def test_sector_indices_n3_gamma1(self):
        assert sector_indices(3, 1).indices == (1, 2, 4)

    @pytest.mark.parametrize("n", [1, 2, 4, 6])
    def test_sector_dimensions(self, n):
        for gamma in range(n + 1):
            sector = sector_indices(n, gamma)
            assert sector.dim == comb(n, gamma)
            assert all(popcount(i) == gamma for i in sector.indices)
            assert list(sector.indices) == sorted(sector.indices)

    def test_number_sectors_partition_the_space(self):
        seen = sorted(i for sector in number_sectors(4) for i in sector.indices)
        assert seen == list(range(16))

    @pytest.mark.parametrize("n,gamma", [(0, 0), (11, 1), (3, 4), (3, -1)])
    def test_invalid_arguments(self, n, gamma):
        with pytest.raises(InvalidParameterError):
            sector_indices(n, gamma)

    def test_parity_sector(self):
        even = parity_sector(4, 0)
        odd = parity_sector(4, 1)
        assert even.dim == odd.dim == 8
        assert set(even.indices).isdisjoint(odd.indices)
        with pytest.raises(InvalidParameterError):
            parity_sector(4, 2)

    def test_sector_rejects_mixed_weights(self):
        with pytest.raises(InvalidParameterError):
            SymmetrySector(3, 1, (1, 3), "number")

    def test_sectors_from_labels(self):
        sectors = sectors_from_labels(2, [0, 1, 1, 0])
        assert [s.indices for s in sectors] == [(0, 3), (1, 2)]


class TestPopulations:
    """Test sector populations and partial traces."""

    def test_population_of_maximally_mixed(self, sector_n3_g1):
        rho = maximally_mixed(sector_n3_g1)
        assert sector_population(rho, sector_n3_g1) == pytest.approx(1.0)
        assert sector_population(rho, sector_indices(3, 2)) == pytest.approx(0.0)

    def test_population_qubit_mismatch(self, sector_n3_g1):
        with pytest.raises(InvalidParameterError):
            sector_population(DensityMatrix.basis_state(2, 1), sector_n3_g1)

    def test_partial_trace_of_product_state(self):
        # |1> on qubit 0, |0> on qubit 1, |1> on qubit 2
        rho = DensityMatrix.basis_state(3, 0b101)
        reduced = partial_trace(rho, [0, 2])
        np.testing.assert_allclose(reduced.data, DensityMatrix.basis_state(2, 0b11).data)
        single = partial_trace(rho, [1])
        np.testing.assert_allclose(single.data, DensityMatrix.basis_state(1, 0).data)

    def test_partial_trace_of_bell_pair(self):
        bell = DensityMatrix.from_pure(2, [1, 0, 0, 1])
        np.testing.assert_allclose(partial_trace(bell, [1]).data, np.eye(2) / 2, atol=1e-12)

    def test_partial_trace_keep_all_returns_self(self):
        rho = DensityMatrix.basis_state(2, 1)
        assert partial_trace(rho, [0, 1]) is rho

    def test_partial_trace_invalid(self):
        rho = DensityMatrix.basis_state(2, 1)
        with pytest.raises(InvalidParameterError):
            partial_trace(rho, [])
        with pytest.raises(InvalidParameterError):
            partial_trace(rho, [2])

    def test_embed_in_sector(self, sector_n3_g1, rng):
        block = random_density_matrix(3, rng, dim=3)
        rho = embed_in_sector(block, sector_n3_g1)
        assert sector_population(rho, sector_n3_g1) == pytest.approx(1.0)
        assert rho.is_positive()


class TestSectorBasis:
    """Test the {B, X, Y} operator basis."""

    def test_basis_size(self, sector_n4_g2):
        ops = sector_basis_operators(sector_n4_g2)
        assert len(ops) == sector_n4_g2.dim**2
        assert [op.kind for op in ops[:6]] == ["B"] * 6

    def test_coefficients_reconstruct_operator(self, sector_n3_g1, rng):
        block = random_density_matrix(3, rng, dim=3)
        rho = embed_in_sector(block, sector_n3_g1).data
        coefficients = basis_coefficients(rho, sector_n3_g1)
        np.testing.assert_allclose(reconstruct_from_coefficients(coefficients, 3), rho, atol=1e-12)

    def test_operator_ids(self, sector_n3_g1):
        ids = [op.operator_id for op in sector_basis_operators(sector_n3_g1)]
        assert ids[0] == "B[1]"
        assert "X[1,2]" in ids and "Y[2,4]" in ids

"""Unit tests for gates, channels and noise models."""

from functools import reduce

import numpy as np
import pytest

from symbench.core.channels import (
    PAULI_X,
    PAULI_Z,
    Channel,
    CompositeNoise,
    Gate,
    GateNoise,
    IdentityNoise,
    StepNoise,
    as_noise_model,
    bitflip_channel,
    compose,
    depolarizing_channel,
    dilated_noise,
    embed_operator,
    identity_channel,
    iswap_gate,
    iswap_matrix,
    pauli_string_operator,
    permutation_to_iswaps,
    sector_depolarizing,
    to_superoperator,
    unitary_channel,
    xrotation_channel,
)
from symbench.core.qstate import (
    DensityMatrix,
    maximally_mixed,
    random_density_matrix,
    sector_population,
)
from symbench.utils.exceptions import InvalidParameterError, ValidationError


class TestEmbedding:
    """Test LSB-first operator embedding."""

    def test_x_on_qubit_zero_flips_lowest_bit(self):
        x0 = embed_operator(PAULI_X, (0,), 3)
        assert x0[0b001, 0b000] == 1
        x2 = embed_operator(PAULI_X, (2,), 3)
        assert x2[0b100, 0b000] == 1

    def test_pauli_string_character_order(self):
        np.testing.assert_allclose(pauli_string_operator("XII"), embed_operator(PAULI_X, (0,), 3))
        np.testing.assert_allclose(pauli_string_operator("IIZ"), embed_operator(PAULI_Z, (2,), 3))

    def test_invalid_pauli_string(self):
        with pytest.raises(InvalidParameterError):
            pauli_string_operator("XQ")

    def test_invalid_targets(self):
        with pytest.raises(InvalidParameterError):
            embed_operator(PAULI_X, (3,), 3)
        with pytest.raises(InvalidParameterError):
            embed_operator(np.eye(4), (1, 1), 3)

    def test_iswap_swaps_adjacent_excitation(self):
        u = iswap_matrix(0, 1, 2)
        assert u[0b10, 0b01] == pytest.approx(1j)
        assert u[0b01, 0b10] == pytest.approx(1j)
        assert u[0b11, 0b11] == pytest.approx(1)

    def test_gate_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            Gate("bad", (0,), 1, np.array([[1, 1], [0, 1]]))

    def test_full_gate(self):
        gate = Gate.full("frame", pauli_string_operator("XXX"))
        assert gate.qubits == (0, 1, 2)
        assert gate.n_qubits == 3


class TestPermutationNetworks:
    """Test iSWAP networks for qubit permutations."""

    def test_single_swap(self):
        assert permutation_to_iswaps([1, 0]) == [(0, 1)]

    def test_identity_needs_no_gates(self):
        assert permutation_to_iswaps([0, 1, 2, 3]) == []

    @pytest.mark.parametrize("perm", [[1, 2, 0], [2, 0, 1], [3, 2, 1, 0], [1, 3, 0, 2]])
    def test_network_realises_permutation(self, perm):
        n = len(perm)
        swaps = permutation_to_iswaps(perm)
        assert len(swaps) <= n * (n - 1) // 2
        u = reduce(lambda acc, s: iswap_matrix(*s, n) @ acc, swaps, np.eye(2**n, dtype=complex))
        for q in range(n):
            column = u[:, 1 << q]
            target = 1 << perm[q]
            assert abs(column[target]) == pytest.approx(1.0)

    def test_rejects_non_permutation(self):
        with pytest.raises(InvalidParameterError):
            permutation_to_iswaps([0, 0, 1])


class TestChannels:
    """Test channel construction, composition and application."""

    def test_rejects_incomplete_kraus(self):
        with pytest.raises(ValidationError, match="trace preserving"):
            Channel(1, (0.5 * np.eye(2),))

    def test_unitary_channel_applies(self):
        ch = unitary_channel(PAULI_X)
        out = ch.apply(DensityMatrix.basis_state(1, 0))
        assert out.data[1, 1] == pytest.approx(1.0)

    def test_apply_qubit_mismatch(self):
        with pytest.raises(InvalidParameterError):
            identity_channel(2).apply(DensityMatrix.basis_state(1, 0))

    def test_compose_order(self):
        # a after b: X then Z on |0> gives Z X |0> = -|1>, population on |1>
        x = unitary_channel(PAULI_X)
        z = unitary_channel(PAULI_Z)
        out = compose(z, x).apply(DensityMatrix.basis_state(1, 0))
        assert out.data[1, 1] == pytest.approx(1.0)

    def test_superoperator_matches_kraus(self, noise_n3, rng):
        rho = random_density_matrix(3, rng)
        superop = to_superoperator(noise_n3)
        expected = sum(k @ rho @ k.conj().T for k in noise_n3.kraus)
        np.testing.assert_allclose(superop.apply_array(rho), expected, atol=1e-12)
        assert superop.is_trace_preserving()

    def test_depolarizing_full(self):
        ch = depolarizing_channel(1, 1.0)
        out = ch.apply(DensityMatrix.basis_state(1, 0))
        np.testing.assert_allclose(out.data, np.eye(2) / 2, atol=1e-12)

    def test_depolarizing_rejects_bad_probability(self):
        with pytest.raises(InvalidParameterError):
            depolarizing_channel(1, 1.5)

    def test_sector_depolarizing_preserves_sector(self, sector_n3_g1):
        ch = sector_depolarizing(sector_n3_g1, 1.0)
        out = ch.apply(DensityMatrix.basis_state(3, 0b010))
        assert sector_population(out, sector_n3_g1) == pytest.approx(1.0)
        np.testing.assert_allclose(out.data, maximally_mixed(sector_n3_g1).data, atol=1e-12)

    def test_bitflip_probability(self):
        out = bitflip_channel(2, 0.25, (0, 1)).apply(DensityMatrix.basis_state(2, 0))
        assert out.data[0, 0] == pytest.approx(0.75**2)
        assert out.data[3, 3] == pytest.approx(0.25**2)

    def test_xrotation_pi_flips(self):
        out = xrotation_channel(1, np.pi, (0,)).apply(DensityMatrix.basis_state(1, 0))
        assert out.data[1, 1] == pytest.approx(1.0)


class TestDilatedNoise:
    """Test the dilated near-identity error."""

    def test_four_kraus_trace_preserving(self, noise_n3):
        assert len(noise_n3.kraus) <= 4
        assert to_superoperator(noise_n3).is_trace_preserving()

    def test_deterministic_in_seed(self):
        a = dilated_noise(3, (0, 1), 0.1, 7)
        b = dilated_noise(3, (0, 1), 0.1, 7)
        c = dilated_noise(3, (0, 1), 0.1, 8)
        np.testing.assert_array_equal(a.superoperator_matrix, b.superoperator_matrix)
        assert not np.allclose(a.superoperator_matrix, c.superoperator_matrix)

    def test_zero_epsilon_is_identity(self):
        ch = dilated_noise(2, (0, 1), 0.0, 3)
        np.testing.assert_allclose(ch.superoperator_matrix, np.eye(16), atol=1e-12)

    def test_acts_only_on_support(self):
        ch = dilated_noise(3, (0, 1), 0.3, 5)
        out = ch.apply(DensityMatrix.basis_state(3, 0b100))
        # qubit 2 stays excited
        weight = sum(out.data[i, i].real for i in range(8) if i & 0b100)
        assert weight == pytest.approx(1.0)

    @pytest.mark.parametrize("support", [(0, 0), (0, 3)])
    def test_invalid_support(self, support):
        with pytest.raises(InvalidParameterError):
            dilated_noise(3, support, 0.1, 1)

    def test_negative_epsilon(self):
        with pytest.raises(InvalidParameterError):
            dilated_noise(3, (0, 1), -0.1, 1)


class TestNoiseModels:
    """Test where noise models attach errors."""

    def test_step_noise_cycles(self):
        a, b = identity_channel(1), unitary_channel(PAULI_X)
        noise = StepNoise((a, b))
        assert not noise.stationary
        assert noise.step_channel(0) is a
        assert noise.step_channel(3) is b

    def test_step_noise_needs_channel(self):
        with pytest.raises(InvalidParameterError):
            StepNoise(())

    def test_gate_noise_only_on_named_gates(self):
        noise = GateNoise(3, 0.1, 7)
        assert noise.gate_channel(iswap_gate(0, 1, 3)) is noise.gate_channel(iswap_gate(0, 1, 3))
        assert noise.gate_channel(Gate("clifford", (0,), 3, PAULI_X)) is None
        assert noise.step_channel() is None

    def test_composite_noise(self):
        gate = GateNoise(3, 0.1, 7)
        step = StepNoise((identity_channel(3),))
        noise = CompositeNoise(gate, step)
        assert noise.describe()["kind"] == "composite"
        assert noise.step_channel(0) is step.channels[0]

    def test_as_noise_model(self, noise_n3):
        assert isinstance(as_noise_model(None), IdentityNoise)
        wrapped = as_noise_model(noise_n3)
        assert isinstance(wrapped, StepNoise)
        assert wrapped.step_channel(5) is noise_n3

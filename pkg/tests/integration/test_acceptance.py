"""End-to-end checks of the benchmarking pipeline against the exact oracles."""

import numpy as np
import pytest

from symbench.core.channels import depolarizing_channel, dilated_noise
from symbench.core.fitting import fit_decay, interleaved_estimate
from symbench.core.onedesign import (
    decay_components,
    double_average_transition_matrix,
    exact_curve,
    exact_gamma,
    half_twirl,
    identity_design,
    number_design,
    permutations_design,
    verify_one_design,
)
from symbench.core.parity import exact_parity_gamma1, pair_gate, parity_decomposition
from symbench.core.protocol import DecayCurve, ExperimentSpec, InterleaveSpec, estimate_curve
from symbench.core.qstate import DensityMatrix, maximally_mixed, number_sectors, sector_indices

pytestmark = pytest.mark.integration


class TestDesignVerification:
    """Exact one-design checks and negative controls."""

    @pytest.mark.parametrize("n,gamma", [(3, g) for g in range(4)] + [(4, g) for g in range(5)])
    def test_number_design_is_exact(self, n, gamma):
        report = verify_one_design(number_design(n, gamma), "exact")
        assert report.passed
        for condition in (1, 2, 3):
            assert report.max_violation(condition) <= 1e-10

    def test_negative_controls_fail_clearly(self):
        identity = verify_one_design(identity_design(4, 2), "exact")
        assert identity.max_violation(1) >= 0.1
        permutations = verify_one_design(permutations_design(3, 1), "exact")
        assert permutations.max_violation(2) == pytest.approx(1 / 6)


class TestOracleStructure:
    """Spectral and transition-matrix structure of the exact channels."""

    def test_half_twirl_spectrum(self, noise_n4):
        ht = half_twirl(noise_n4, number_design(4, 2))
        assert np.max(np.abs(ht.eigenvalues)) <= 1.0 + 1e-10

    def test_curve_is_sum_of_exponentials(self, sector_n4_g2):
        """Test sum alpha_i lambda_i^y reproduces the oracle up to y = 20."""
        ht = half_twirl(depolarizing_channel(4, 0.05), number_design(4, 2))
        rho0 = DensityMatrix.basis_state(4, sector_n4_g2.indices[0])
        alphas, rates = decay_components(ht, rho0, sector_n4_g2)
        for y in range(1, 21):
            value = complex(np.sum(alphas * rates**y)).real
            assert value == pytest.approx(exact_gamma(ht, y, rho0, sector_n4_g2), abs=1e-8)

    def test_double_average_is_sector_convex(self, noise_n4, sector_n4_g2):
        """Test sector mixed states map to mixtures of sector mixed states."""
        sectors = number_sectors(4)
        transitions = double_average_transition_matrix(noise_n4, number_design(4, 2), sectors)
        for b, source in enumerate(sectors):
            out = transitions.double_average.apply(maximally_mixed(source)).data
            expected = sum(transitions.matrix[a, b] * maximally_mixed(s).data for a, s in enumerate(sectors))
            np.testing.assert_allclose(out, expected, atol=1e-10)
        ht = half_twirl(noise_n4, number_design(4, 2))
        rho0 = DensityMatrix.basis_state(4, sector_n4_g2.indices[0])
        assert transitions.entry(2, 2) == pytest.approx(exact_gamma(ht, 1, rho0, sector_n4_g2), abs=1e-10)


class TestSpamRobustness:
    """Preparation errors move the amplitude, not the rate."""

    def test_prep_error_changes_amplitude_only(self, sector_n4_g2):
        lengths = (1, 2, 4, 8, 16, 32)
        ht = half_twirl(depolarizing_channel(4, 0.02), number_design(4, 2))
        rho0 = DensityMatrix.basis_state(4, sector_n4_g2.indices[0])
        prepared = depolarizing_channel(4, 0.05).apply(rho0)
        clean = fit_decay(DecayCurve.exact(lengths, exact_curve(ht, lengths, rho0, sector_n4_g2)), 1)
        spam = fit_decay(DecayCurve.exact(lengths, exact_curve(ht, lengths, prepared, sector_n4_g2)), 1)
        assert abs(clean.decay - spam.decay) < 1e-3
        assert abs(clean.amplitudes[0] - spam.amplitudes[0]) > 1e-2


class TestInterleavedParity:
    """Interleaved pair gate on the even subspace of four qubits."""

    def test_noiseless_gate_adds_no_loss(self, noise_n4):
        decomp = parity_decomposition(4)
        reference = exact_parity_gamma1(noise_n4, decomp)
        gate = InterleaveSpec((pair_gate(0, 1, n_qubits=4),), name="pair")
        interleaved = exact_parity_gamma1(noise_n4, decomp, gate)
        assert interleaved.combined == pytest.approx(reference.combined, abs=1e-10)

    def test_bounds_contain_exact_gate_rate(self):
        """Test the interleaved estimate brackets the gate's own leakage."""
        decomp = parity_decomposition(4)
        step = dilated_noise(4, (1, 2), 0.05, 42)
        gate = InterleaveSpec((pair_gate(0, 1, n_qubits=4),), dilated_noise(4, (0, 1), 0.05, 7), name="pair")
        mu_d = 1.0 - exact_parity_gamma1(step, decomp).combined
        mu_id = 1.0 - exact_parity_gamma1(step, decomp, gate).combined
        mu_i = 1.0 - exact_parity_gamma1(None, decomp, gate).combined
        assert mu_i > 0
        result = interleaved_estimate(mu_id, mu_d, 8)
        assert result.lower <= mu_i <= result.upper
        assert 0.5 * mu_i <= result.estimate <= 2.0 * mu_i

    def test_combined_equals_direct(self, noise_n4):
        oracle = exact_parity_gamma1(noise_n4, parity_decomposition(4), initial="mixed")
        assert oracle.combined == pytest.approx(oracle.direct, abs=1e-10)


@pytest.mark.slow
class TestMonteCarloAgainstOracle:
    """Sampled curves agree with the half-twirl oracle."""

    def test_number_n4(self, noise_n4):
        lengths = tuple(range(1, 17))
        sector = sector_indices(4, 2)
        spec = ExperimentSpec(number_design(4, 2), lengths, n_sequences=400, noise=noise_n4, master_seed=2024)
        curve = estimate_curve(spec, 4)
        ht = half_twirl(noise_n4, spec.design)
        oracle = exact_curve(ht, lengths, spec.initial_state, sector)
        stderrs = np.maximum(np.asarray(curve.stderrs), 1e-12)
        assert np.all(np.abs(np.asarray(curve.means) - oracle) <= 4 * stderrs + 1e-12)
        exact_mu = 1.0 - exact_gamma(ht, 1, spec.initial_state, sector)
        assert fit_decay(curve).mu == pytest.approx(exact_mu, rel=0.1)

"""Unit tests for the benchmarking protocol and its engine."""

import numpy as np
import pandas as pd
import pytest

from symbench.core.channels import (
    PAULI_X,
    Gate,
    GateNoise,
    depolarizing_channel,
    iswap_gate,
)
from symbench.core.onedesign import (
    DesignElement,
    design_from_elements,
    exact_gamma,
    half_twirl,
    identity_design,
    number_design,
)
from symbench.core.protocol import (
    BenchmarkEngine,
    DecayCurve,
    ExperimentSpec,
    InterleaveSpec,
    default_lengths,
    derive_rng,
    estimate_curve,
    exact_average_curve,
    exact_sequence_average,
    interleaved_curve,
    run_sequence,
    spam_channels,
    survival_of_sequence,
    without_interleave,
)
from symbench.core.qstate import DensityMatrix, sector_indices
from symbench.utils.exceptions import CapabilityError, InvalidParameterError, ReportError, ValidationError


@pytest.fixture
def noisy_spec(noise_n3):
    """n=3, gamma=1 campaign with dilated per-round noise."""
    return ExperimentSpec(number_design(3, 1), (1, 2, 4, 8), n_sequences=20, noise=noise_n3, master_seed=99)


class TestSeeding:
    """Test per-sequence random streams."""

    def test_same_coordinates_same_stream(self):
        a = derive_rng(5, 4, 2).integers(0, 2**31, size=4)
        b = derive_rng(5, 4, 2).integers(0, 2**31, size=4)
        np.testing.assert_array_equal(a, b)

    def test_coordinates_and_tags_separate_streams(self):
        base = derive_rng(5, 4, 2).integers(0, 2**31, size=4)
        for other in (derive_rng(5, 4, 3), derive_rng(5, 8, 2), derive_rng(6, 4, 2), derive_rng(5, 4, 2, 1)):
            assert not np.array_equal(base, other.integers(0, 2**31, size=4))


class TestExperimentSpec:
    """Test spec validation."""

    @pytest.mark.parametrize("lengths", [(), (0, 1), (2, 1), (1, 1)])
    def test_invalid_lengths(self, lengths):
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(number_design(3, 1), lengths, n_sequences=1)

    @pytest.mark.parametrize(
        "kwargs", [{"n_sequences": 0}, {"n_sequences": 1, "shots": -1}, {"n_sequences": 1, "master_seed": -3}]
    )
    def test_invalid_counts(self, kwargs):
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(number_design(3, 1), (1, 2), **kwargs)

    def test_channel_register_mismatch(self):
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(number_design(3, 1), (1,), 1, prep=depolarizing_channel(2, 0.1))

    def test_interleaved_gate_must_preserve_symmetry(self):
        flip = Gate("flip", (0,), 3, PAULI_X)
        with pytest.raises(ValidationError, match="mixes"):
            ExperimentSpec(number_design(3, 1), (1,), 1, interleave=InterleaveSpec((flip,)))

    def test_default_initial_state(self):
        spec = ExperimentSpec(number_design(4, 2), (1,), 1)
        assert spec.initial_state.data[3, 3] == 1.0
        assert spec.describe()["sector"] == {"symmetry": "number", "label": 2}


class TestSequences:
    """Test single-sequence simulation."""

    def test_noiseless_sequence_survives(self):
        spec = ExperimentSpec(number_design(4, 2), (1,), 1)
        assert run_sequence(spec, 10, np.random.default_rng(1)) == pytest.approx(1.0)

    def test_rejects_zero_length(self):
        spec = ExperimentSpec(number_design(3, 1), (1,), 1)
        with pytest.raises(InvalidParameterError):
            run_sequence(spec, 0, np.random.default_rng(1))

    def test_shots_quantise_survival(self, noise_n3):
        spec = ExperimentSpec(number_design(3, 1), (1,), 1, noise=noise_n3, shots=100)
        value = run_sequence(spec, 8, np.random.default_rng(2))
        assert value * 100 == pytest.approx(round(value * 100))

    @pytest.mark.parametrize("y", [1, 2])
    def test_exact_average_matches_half_twirl(self, noise_n3, sector_n3_g1, y):
        spec = ExperimentSpec(number_design(3, 1), (1,), 1, noise=noise_n3)
        oracle = exact_gamma(half_twirl(noise_n3, spec.design), y, spec.initial_state, sector_n3_g1)
        assert exact_sequence_average(spec, y) == pytest.approx(oracle, abs=1e-12)

    def test_exact_average_with_gate_noise(self, sector_n3_g1):
        noise = GateNoise(3, 0.1, 7)
        spec = ExperimentSpec(number_design(3, 1), (1,), 1, noise=noise)
        oracle = exact_gamma(half_twirl(noise, spec.design), 2, spec.initial_state, sector_n3_g1)
        assert exact_sequence_average(spec, 2) == pytest.approx(oracle, abs=1e-12)

    def test_exact_average_cap(self, noise_n3):
        spec = ExperimentSpec(number_design(3, 1), (1,), 1, noise=noise_n3)
        with pytest.raises(CapabilityError):
            exact_sequence_average(spec, 3, cap=1000)

    def test_fixed_sequence(self, noise_n3):
        """Test a fixed element list runs without sampling."""
        elements = [element for element, _ in number_design(3, 1).elements()[:3]]
        clean = ExperimentSpec(number_design(3, 1), (1,), 1)
        noisy = ExperimentSpec(number_design(3, 1), (1,), 1, noise=noise_n3)
        assert survival_of_sequence(clean, elements) == pytest.approx(1.0)
        assert survival_of_sequence(noisy, elements) < 1.0

    def test_fixed_sequence_needs_interleaved_gates(self):
        design = number_design(3, 1)
        spec = ExperimentSpec(design, (1,), 1, interleave=InterleaveSpec((iswap_gate(0, 1, 3),)))
        elements = [element for element, _ in design.elements()[:2]]
        with pytest.raises(InvalidParameterError):
            survival_of_sequence(spec, elements)


class TestTrackedFrames:
    """Test sequences whose elements apply tracked X frames."""

    @pytest.fixture
    def flip_design(self):
        return design_from_elements(
            "flips",
            sector_indices(3, 0),
            [DesignElement(3, (), 0, "keep"), DesignElement(3, (), 0, "flip", frame=0b101)],
        )

    def test_noiseless_frames_survive(self, flip_design):
        spec = ExperimentSpec(flip_design, (1, 2, 3), 1)
        flip = flip_design.elements()[1][0]
        assert survival_of_sequence(spec, [flip]) == pytest.approx(1.0)
        assert survival_of_sequence(spec, [flip, flip, flip]) == pytest.approx(1.0)
        assert run_sequence(spec, 5, np.random.default_rng(3)) == pytest.approx(1.0)
        np.testing.assert_allclose(exact_average_curve(spec), 1.0, atol=1e-12)

    def test_averaged_rounds_match_enumeration(self, flip_design):
        spec = ExperimentSpec(flip_design, (1, 2, 3), 1, noise=depolarizing_channel(3, 0.1))
        enumerated = [exact_sequence_average(spec, y) for y in spec.lengths]
        np.testing.assert_allclose(exact_average_curve(spec), enumerated, atol=1e-12)
        assert enumerated[0] < 1.0

    def test_readout_sector_is_read_in_the_frame(self, flip_design):
        """Test a weight-2 readout misses |101> once the frame is undone."""
        flip = flip_design.elements()[1][0]
        spec = ExperimentSpec(flip_design, (1,), 1, measure_sector=sector_indices(3, 2))
        assert survival_of_sequence(spec, [flip]) == pytest.approx(0.0)


class TestBenchmarkEngine:
    """Test curve estimation on the thread pool."""

    def test_noiseless_curve(self):
        spec = ExperimentSpec(number_design(3, 1), (1, 4, 16), n_sequences=5, master_seed=1)
        curve = estimate_curve(spec, max_workers=2)
        assert curve.means == (1.0, 1.0, 1.0)
        assert curve.stderrs == pytest.approx((0.0, 0.0, 0.0))
        assert curve.n_sequences == (5, 5, 5)

    def test_results_independent_of_workers(self, noisy_spec):
        curves = [BenchmarkEngine(max_workers=w).estimate_curve(noisy_spec) for w in (1, 2, 8)]
        assert curves[0] == curves[1] == curves[2]

    def test_reruns_are_identical(self, noisy_spec):
        assert estimate_curve(noisy_spec, 4) == estimate_curve(noisy_spec, 4)

    def test_seed_changes_curve(self, noisy_spec, noise_n3):
        other = ExperimentSpec(noisy_spec.design, noisy_spec.lengths, 20, noise=noise_n3, master_seed=100)
        assert estimate_curve(noisy_spec, 2).means != estimate_curve(other, 2).means

    def test_monte_carlo_agrees_with_oracle(self, noise_n3, sector_n3_g1):
        spec = ExperimentSpec(number_design(3, 1), (4,), n_sequences=200, noise=noise_n3, master_seed=3)
        curve = estimate_curve(spec, 4)
        oracle = exact_gamma(half_twirl(noise_n3, spec.design), 4, spec.initial_state, sector_n3_g1)
        assert abs(curve.means[0] - oracle) <= 4 * curve.stderrs[0] + 1e-9

    def test_shot_noise_stderr_scales_with_shots(self):
        """Test the standard error falls like 1/sqrt(shots) when only shot noise varies."""
        noise = depolarizing_channel(3, 0.1)
        stderrs = {}
        for shots in (100, 10_000):
            spec = ExperimentSpec(
                identity_design(3, 1), (1, 4), n_sequences=200, noise=noise, shots=shots, master_seed=6
            )
            stderrs[shots] = np.asarray(estimate_curve(spec, 4).stderrs)
        exact = ExperimentSpec(identity_design(3, 1), (1,), 1, noise=noise)
        p = exact_sequence_average(exact, 1)
        expected = np.sqrt(p * (1 - p) / (10_000 * 200))
        assert stderrs[10_000][0] == pytest.approx(expected, rel=0.2)
        ratio = stderrs[100] / stderrs[10_000]
        assert np.all((ratio > 7.0) & (ratio < 13.0))

    def test_invalid_workers(self):
        with pytest.raises(InvalidParameterError):
            BenchmarkEngine(max_workers=-1)


class TestInterleaving:
    """Test interleaved and decorated experiments."""

    def test_noiseless_interleaved_iswap(self):
        spec = ExperimentSpec(
            number_design(3, 1), (1, 2, 4), 4, interleave=InterleaveSpec((iswap_gate(0, 1, 3),), name="iswap")
        )
        curve = interleaved_curve(spec, 2)
        np.testing.assert_allclose(curve.means, 1.0)
        assert without_interleave(spec).interleave is None
        assert without_interleave(spec).label == "D_reference"

    def test_interleaved_curve_needs_interleave(self):
        with pytest.raises(InvalidParameterError):
            interleaved_curve(ExperimentSpec(number_design(3, 1), (1,), 1))

    def test_interleaved_noise_lowers_survival(self, noise_n3):
        spec = ExperimentSpec(
            number_design(3, 1), (1, 2), 5, master_seed=4, interleave=InterleaveSpec((iswap_gate(0, 1, 3),), noise_n3)
        )
        assert interleaved_curve(spec, 1).means[-1] < 1.0

    def test_measurement_error(self):
        spec = spam_channels(None, depolarizing_channel(3, 0.3))(
            ExperimentSpec(number_design(3, 1), (1, 2), 3, master_seed=2)
        )
        curve = estimate_curve(spec, 1)
        # (1 - p) + p * d_sector / 2^n
        np.testing.assert_allclose(curve.means, 0.7 + 0.3 * 3 / 8)

    def test_initial_state_override(self, sector_n3_g1):
        rho0 = DensityMatrix.basis_state(3, 0)
        spec = ExperimentSpec(number_design(3, 1), (1,), 2, rho0=rho0, measure_sector=sector_n3_g1)
        assert estimate_curve(spec, 1).means == (0.0,)


class TestDecayCurve:
    """Test the curve container."""

    def test_exact_constructor(self):
        curve = DecayCurve.exact([1, 2], [0.9, 0.8])
        assert curve.stderrs == (0.0, 0.0)
        assert curve.label == "exact"

    def test_rejects_bad_means(self):
        with pytest.raises(InvalidParameterError):
            DecayCurve.exact([1], [1.5])

    def test_frame_columns(self):
        frame = DecayCurve.exact([1, 2], [0.9, 0.8]).to_frame()
        assert list(frame.columns) == ["length", "mean", "stderr", "n_sequences", "shots"]

    def test_from_frame_fills_optional_columns(self):
        curve = DecayCurve.from_frame(pd.DataFrame({"length": [1, 2], "mean": [0.9, 0.8]}), "mine")
        assert curve.stderrs == (0.0, 0.0)
        assert curve.label == "mine"

    def test_from_frame_missing_column(self):
        with pytest.raises(ReportError, match="mean"):
            DecayCurve.from_frame(pd.DataFrame({"length": [1]}))


class TestDefaultLengths:
    """Test the length-grid helper."""

    def test_no_expectation_keeps_grid(self):
        assert default_lengths(grid=[1, 2, 4, 8]) == (1, 2, 4, 8)

    def test_clips_below_floor(self):
        assert default_lengths(0.2, floor=0.3, grid=[1, 2, 4, 8, 16]) == (1, 2, 4)

    def test_keeps_minimum_points(self):
        assert default_lengths(0.9, floor=0.5, grid=[1, 2, 4, 8]) == (1, 2, 4)

"""Unit tests for campaign configuration, construction and execution."""

import json
from pathlib import Path

import pytest

from symbench.campaign import CampaignConfig, CampaignRunner, load_campaign_config, parse_campaign_config
from symbench.core.channels import GateNoise, IdentityNoise, StepNoise
from symbench.core.experiment_factory import (
    build_design,
    build_interleave,
    build_logical_round,
    build_noise,
    build_number_spec,
    campaign_lengths,
    get_campaign_builder,
    run_number_campaign,
)
from symbench.core.protocol import default_lengths
from symbench.utils.exceptions import ConfigurationError, InvalidParameterError


def campaign(**overrides):
    payload = {
        "schema_version": 1,
        "name": "unit",
        "kind": "number",
        "n_qubits": 3,
        "gamma": 1,
        "master_seed": 5,
        "lengths": [1, 2, 4, 8],
        "n_sequences": 4,
    }
    payload.update(overrides)
    return CampaignConfig.model_validate(payload)


class TestCampaignConfig:
    """Tests for campaign validation."""

    def test_minimal(self, minimal_number_campaign):
        """Test defaults of a minimal number campaign."""
        config = CampaignConfig.model_validate(minimal_number_campaign)
        assert config.noise.kind == "identity"
        assert config.shots == 0
        assert config.report_formats == ["csv", "json", "dat"]
        assert config.fit.max_order == 2

    def test_requires_master_seed(self, minimal_number_campaign):
        payload = dict(minimal_number_campaign)
        del payload["master_seed"]
        with pytest.raises(ConfigurationError, match="master_seed"):
            parse_campaign_config(json.dumps(payload))

    def test_rejects_unknown_field(self, minimal_number_campaign):
        """Test typos are reported with their field path."""
        payload = {**minimal_number_campaign, "noise": {"kind": "dilated", "epsilom": 0.1}}
        with pytest.raises(ConfigurationError, match="noise.epsilom"):
            parse_campaign_config(json.dumps(payload))

    def test_json_syntax_error_location(self):
        with pytest.raises(ConfigurationError, match="campaign.json:2:"):
            parse_campaign_config('{\n  "kind": }', "campaign.json")

    def test_schema_version(self, minimal_number_campaign):
        payload = {**minimal_number_campaign, "schema_version": 2}
        with pytest.raises(ConfigurationError, match="schema_version"):
            parse_campaign_config(json.dumps(payload))

    @pytest.mark.parametrize(
        "overrides",
        [
            {"gamma": None},
            {"gamma": 4},
            {"kind": "parity", "n_qubits": 3},
            {"kind": "ecc", "n_qubits": 4},
            {"kind": "parity", "n_qubits": 4, "design": "identity_only"},
            {"kind": "parity", "n_qubits": 4, "spam": {"meas": 0.1}},
            {"interleave": {"gate": "logical_t"}},
            {"interleave": {"gate": "iswap", "qubits": [1, 3]}},
            {"interleave": {"gate": "iswap", "qubits": [1, 1]}},
            {"noise": {"kind": "bitflip", "p": 0.1, "attach": "gate"}},
            {"noise": {"kind": "dilated", "support": [0, 5]}},
            {"lengths": [4, 2]},
            {"name": "has space"},
        ],
    )
    def test_rejects_inconsistent_campaigns(self, minimal_number_campaign, overrides):
        with pytest.raises(ConfigurationError):
            parse_campaign_config(json.dumps({**minimal_number_campaign, **overrides}))

    def test_load_from_file(self, write_campaign, minimal_number_campaign):
        config = load_campaign_config(write_campaign(minimal_number_campaign))
        assert config.name == "minimal"

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Cannot read"):
            load_campaign_config(tmp_path / "absent.json")

    @pytest.mark.parametrize(
        "path", sorted((Path(__file__).parents[2] / "campaigns").glob("*.json")), ids=lambda p: p.stem
    )
    def test_shipped_campaigns_are_valid(self, path):
        config = load_campaign_config(path)
        assert config.output_dir.parts[0] == "results"

    def test_json_echo_is_valid(self):
        config = campaign()
        assert CampaignConfig.model_validate_json(config.to_json()) == config


class TestExperimentFactory:
    """Tests for building experiments from campaigns."""

    def test_noise_models(self):
        assert isinstance(build_noise(campaign().noise, 3), IdentityNoise)
        gate = campaign(noise={"kind": "dilated", "epsilon": 0.1, "seed": 1, "attach": "gate"})
        assert isinstance(build_noise(gate.noise, 3), GateNoise)
        step = campaign(noise={"kind": "depolarizing", "p": 0.01})
        assert isinstance(build_noise(step.noise, 3), StepNoise)

    def test_designs(self):
        assert build_design(campaign()).size == 48
        assert build_design(campaign(design="permutations_only")).size == 6
        assert build_design(campaign(design="identity_only")).size == 1
        assert build_design(campaign(kind="ecc", gamma=None)).size == 192
        parity = build_design(campaign(kind="parity", n_qubits=4, gamma=None))
        assert parity.sector.label == 0

    def test_interleave(self):
        config = campaign(interleave={"gate": "iswap", "qubits": [1, 2]})
        interleave = build_interleave(config.interleave, config)
        assert interleave.name == "iswap"
        assert interleave.gates[0].qubits == (1, 2)
        assert build_interleave(None, config) is None

    def test_number_spec(self):
        spec = build_number_spec(campaign(spam={"prep": 0.01, "meas": 0.02}))
        assert spec.prep is not None and spec.meas is not None
        assert spec.readout_sector.indices == (1, 2, 4)
        assert spec.label == "D"

    def test_default_lengths(self):
        assert campaign_lengths(campaign(lengths=None)) == (1, 2, 4, 6, 8, 12, 16, 24, 32)

    def test_default_lengths_clipped_by_expected_mu(self, mocker):
        """Test the fallback grid goes through the fit-floor clipping."""
        spy = mocker.patch("symbench.core.experiment_factory.default_lengths", wraps=default_lengths)
        assert campaign_lengths(campaign(lengths=None, expected_mu=0.2)) == (1, 2, 4, 6, 8, 12)
        spy.assert_called_once_with(0.2)
        assert campaign_lengths(campaign(expected_mu=0.2)) == (1, 2, 4, 8)

    def test_logical_round(self):
        config = campaign(
            kind="ecc",
            gamma=None,
            interleave={"gate": "logical_t"},
            ecc={"randomizer": "measure_and_random_correct"},
        )
        logical = build_logical_round(config)
        assert logical.gate.name == "logical_t"
        assert logical.randomizer == "measure_and_random_correct"
        assert logical.interleave().gates == (logical.gate,)
        assert build_logical_round(campaign(kind="ecc", gamma=None)) is None

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError, match="Invalid campaign kind"):
            get_campaign_builder("tomography")

    def test_number_campaign_summary(self):
        """Test the summary carries fitted and exact rates."""
        config = campaign(
            noise={"kind": "dilated", "epsilon": 0.1, "seed": 7, "support": [0, 1]},
            interleave={"gate": "iswap", "qubits": [0, 1]},
            n_sequences=10,
            fit={"max_order": 1},
        )
        outcome = run_number_campaign(config, max_workers=2)
        assert set(outcome.curves) == {"D", "ID"}
        assert {"mu_d", "oracle_mu_d", "mu_id", "oracle_mu_id", "estimate"} <= set(outcome.summary)
        assert outcome.summary["oracle_mu_d"] > 0


class TestCampaignRunner:
    """Tests for CampaignRunner."""

    def test_run_writes_reports(self, tmp_path):
        """Test every curve gets CSV, fit JSON and plot data next to report.json."""
        config = campaign(noise={"kind": "depolarizing", "p": 0.02})
        result = CampaignRunner(config, max_workers=2, output_dir=tmp_path / "out").run()
        names = sorted(p.name for p in result.files)
        assert names == ["D.dat", "D_curve.csv", "D_fit.json", "report.json"]
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["master_seed"] == 5
        assert report["kind"] == "number"
        assert "environment" in report
        assert report["config"]["name"] == "unit"

    def test_fit_json_echoes_config(self, tmp_path):
        """Test every fit file is reproducible on its own."""
        config = campaign(noise={"kind": "depolarizing", "p": 0.02})
        CampaignRunner(config, output_dir=tmp_path).run()
        payload = json.loads((tmp_path / "D_fit.json").read_text())
        assert payload["master_seed"] == 5
        assert payload["config"] == config.model_dump(mode="json")
        assert payload["label"] == "D"
        assert "mu" in payload

    def test_report_formats(self, tmp_path):
        config = campaign(report_formats=["json"])
        result = CampaignRunner(config, output_dir=tmp_path).run()
        assert sorted(p.name for p in result.files) == ["D_fit.json", "report.json"]

    def test_outputs_do_not_depend_on_workers(self, tmp_path):
        """Test reruns with different thread counts are byte-identical."""
        config = campaign(noise={"kind": "dilated", "epsilon": 0.2, "seed": 3}, n_sequences=6)
        contents = []
        for workers in (1, 2, 8):
            out = tmp_path / f"w{workers}"
            CampaignRunner(config, max_workers=workers, output_dir=out).run()
            contents.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert contents[0] == contents[1] == contents[2]

    def test_verify_exact(self, tmp_path):
        report = CampaignRunner(campaign(), output_dir=tmp_path).verify("exact")
        assert report.passed
        payload = json.loads((tmp_path / "verification.json").read_text())
        assert payload["verification"]["pass"] is True

    def test_verify_negative_control(self, tmp_path):
        report = CampaignRunner(campaign(design="identity_only"), output_dir=tmp_path).verify("exact", write=False)
        assert 1 in report.failed_conditions
        assert not (tmp_path / "verification.json").exists()

    def test_verify_statistical_is_seeded(self, tmp_path):
        runner = CampaignRunner(campaign(), output_dir=tmp_path)
        a = runner.verify("statistical", samples=200, write=False)
        b = runner.verify("statistical", samples=200, write=False)
        assert a.to_json() == b.to_json()

    def test_run_logs_failure(self, tmp_path, mocker):
        """Test library failures propagate after being logged."""
        mocker.patch(
            "symbench.campaign.runner.get_campaign_builder",
            side_effect=InvalidParameterError("boom"),
        )
        runner = CampaignRunner(campaign(), output_dir=tmp_path)
        runner._log = mocker.MagicMock()
        with pytest.raises(InvalidParameterError):
            runner.run()
        runner._log.error.assert_called_once()
        assert runner._log.error.call_args.args[0] == "campaign_failed"

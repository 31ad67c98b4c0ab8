# symbench/campaign/runner.py

"""Campaign orchestration: run a configured campaign and write its reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from symbench.campaign.models import CampaignConfig
from symbench.core.experiment_factory import CampaignOutcome, build_design, get_campaign_builder
from symbench.core.onedesign import VerificationReport, verify_one_design
from symbench.core.protocol import derive_rng
from symbench.utils.logging import LoggerMixin, bind_context, unbind_context
from symbench.utils.reports import environment_metadata, save_curve_csv, save_json, save_plot_data

# Seed tag of the statistical verification stream
VERIFY_STREAM = 1_000_003


@dataclass(frozen=True)
class CampaignResult:
    outcome: CampaignOutcome
    output_dir: Path
    files: list[Path] = field(default_factory=list)


class CampaignRunner(LoggerMixin):
    """Executes one campaign and writes curve CSV, fit JSON, plot data and report.json.

    The number of workers never changes the results; it is not recorded in
    the reports so reruns with different thread counts stay byte-identical.

    Example:
        >>> runner = CampaignRunner(load_campaign_config("number.json"), max_workers=4)
        >>> result = runner.run()
        >>> result.outcome.fits["D"].mu
    """

    def __init__(
        self,
        config: CampaignConfig,
        max_workers: int | None = None,
        output_dir: Path | None = None,
    ):
        self.config = config
        self.max_workers = max_workers
        self.output_dir = Path(output_dir) if output_dir is not None else config.output_dir

    def _context(self) -> dict[str, object]:
        return {
            "campaign_id": self.config.name,
            "kind": self.config.kind,
            "master_seed": self.config.master_seed,
        }

    def run(self) -> CampaignResult:
        """Execute the campaign.

        Raises:
            SymbenchError: Any library failure, after logging it
        """
        context = self._context()
        bind_context(**context)
        try:
            self.log.info("campaign_started", output_dir=str(self.output_dir))
            builder = get_campaign_builder(self.config.kind)
            outcome = builder(self.config, self.max_workers)
            files = self._write(outcome)
            self.log.info("campaign_completed", curves=sorted(outcome.curves), files=len(files))
            return CampaignResult(outcome, self.output_dir, files)
        except Exception as e:
            self.log.error("campaign_failed", error=str(e), error_type=type(e).__name__)
            raise
        finally:
            unbind_context(*context)

    def _write(self, outcome: CampaignOutcome) -> list[Path]:
        formats = set(self.config.report_formats)
        echo = self.config.model_dump(mode="json")
        files: list[Path] = []
        for name, curve in sorted(outcome.curves.items()):
            if "csv" in formats:
                files.append(save_curve_csv(curve, self.output_dir / f"{name}_curve.csv"))
            if "json" in formats:
                payload = {
                    **outcome.fits[name].to_dict(),
                    "config": echo,
                    "master_seed": self.config.master_seed,
                }
                files.append(save_json(payload, self.output_dir / f"{name}_fit.json"))
            if "dat" in formats:
                files.append(save_plot_data(curve, self.output_dir / f"{name}.dat"))
        report = {
            "config": echo,
            "master_seed": self.config.master_seed,
            "environment": environment_metadata(),
            "kind": outcome.kind,
            "summary": outcome.summary,
            "fits": {name: fit.to_dict() for name, fit in sorted(outcome.fits.items())},
            "files": [p.name for p in files],
        }
        files.append(save_json(report, self.output_dir / "report.json"))
        return files

    def verify(
        self,
        mode: Literal["exact", "statistical"] = "exact",
        samples: int | None = None,
        level: float = 0.01,
        write: bool = True,
    ) -> VerificationReport:
        """Check that the campaign's ensemble is a one-design on its sector.

        Raises:
            CapabilityError: If exact mode is requested for a non-enumerable ensemble
        """
        context = self._context()
        bind_context(**context)
        try:
            ensemble = build_design(self.config)
            rng = derive_rng(self.config.master_seed, 0, 0, VERIFY_STREAM)
            report = verify_one_design(ensemble, mode, samples, rng, level)
            if write:
                payload = {
                    "config": self.config.model_dump(mode="json"),
                    "environment": environment_metadata(),
                    "verification": report.to_dict(),
                }
                save_json(payload, self.output_dir / "verification.json")
            return report
        finally:
            unbind_context(*context)

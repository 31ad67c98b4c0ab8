# symbench/campaign/models.py

"""Campaign configuration models.

A campaign file is a single JSON document validated by :class:`CampaignConfig`.
Every field has an explicit default except ``kind``, ``n_qubits`` and
``master_seed``; a campaign never draws entropy from the environment.

Example campaign::

    {
      "schema_version": 1,
      "name": "number_n4",
      "kind": "number",
      "n_qubits": 4,
      "gamma": 2,
      "master_seed": 7,
      "lengths": [1, 2, 4, 8, 16],
      "n_sequences": 100,
      "noise": {"kind": "dilated", "epsilon": 0.15, "seed": 42, "attach": "step", "support": [0, 1]}
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from symbench.utils.exceptions import ConfigurationError
from symbench.utils.logging import get_logger

log = get_logger(__name__)

SCHEMA_VERSION = 1

ReportFormat = Literal["csv", "json", "dat"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NoiseConfig(_Strict):
    """Noise attached to every round (``attach="step"``) or to every pair gate (``attach="gate"``).

    ``dilated`` uses ``epsilon``/``seed``/``support``; ``depolarizing`` and
    ``bitflip`` use ``p``; ``xrotation`` uses ``theta``; ``qubits`` selects the
    qubits of single-qubit noise (all qubits when omitted).
    """

    kind: Literal["identity", "dilated", "depolarizing", "bitflip", "xrotation"] = "identity"
    attach: Literal["step", "gate"] = "step"
    epsilon: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)
    support: list[int] | None = None
    p: float = Field(default=0.0, ge=0.0, le=1.0)
    theta: float = 0.0
    qubits: list[int] | None = None

    @model_validator(mode="after")
    def check_attach(self) -> NoiseConfig:
        if self.attach == "gate" and self.kind != "dilated":
            raise ValueError("Only dilated noise can be attached to pair gates")
        return self


class InterleaveConfig(_Strict):
    """Gate interleaved after every design element."""

    gate: Literal["identity", "iswap", "pair", "logical_t"]
    qubits: list[int] = Field(default_factory=lambda: [0, 1])
    theta: float = Field(default=0.7853981633974483, description="Rotation angle of the pair gate")
    noise: NoiseConfig | None = None

    @field_validator("qubits")
    @classmethod
    def check_qubits(cls, v: list[int]) -> list[int]:
        if len(v) != 2 or v[0] == v[1]:
            raise ValueError("Interleaved two-qubit gates need two distinct qubits")
        return v


class SpamConfig(_Strict):
    """Depolarizing strength of the preparation and measurement channels."""

    prep: float = Field(default=0.0, ge=0.0, le=1.0)
    meas: float = Field(default=0.0, ge=0.0, le=1.0)


class FitOptions(_Strict):
    max_order: Literal[1, 2] = 2
    offset_handling: Literal["include", "subtract"] = "include"


class EccOptions(_Strict):
    code: Literal["three_qubit_bitflip"] = "three_qubit_bitflip"
    randomizer: Literal["phase_layer", "measure_only", "measure_and_random_correct"] = "phase_layer"
    mu_r: float | None = Field(default=None, ge=0.0, le=1.0, description="Externally estimated randomizer rate")
    mu_f: float | None = Field(default=None, ge=0.0, le=1.0)
    mu_m: float | None = Field(default=None, ge=0.0, le=1.0)


class CampaignConfig(_Strict):
    """A complete, reproducible benchmarking campaign.

    Attributes:
        schema_version: Must equal 1
        name: Prefix of every output file
        kind: number, parity or ecc
        n_qubits: Register size (3 for the ecc code)
        gamma: Initial excitation-number sector of number campaigns
        parity: Parity subspace of parity campaigns
        design: Ensemble of number campaigns; the negative controls are for verify
        lengths: Strictly increasing sequence lengths, the configured default grid when omitted
        expected_mu: Anticipated symmetry breaking per step; clips the default grid
            where the decay would fall below the fit floor
        n_sequences: Random sequences per length
        shots: Readout shots per sequence, 0 for exact expectation values
        master_seed: Root of every random stream
        output_dir: Directory receiving the reports
        report_formats: Subset of csv, json, dat
    """

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = Field(default="campaign", pattern=r"^[A-Za-z0-9_.-]+$")
    kind: Literal["number", "parity", "ecc"]
    n_qubits: int = Field(ge=1, le=10)
    gamma: int | None = Field(default=None, ge=0)
    parity: Literal["even", "odd"] = "even"
    design: Literal["number", "permutations_only", "identity_only"] = "number"
    lengths: list[int] | None = None
    expected_mu: float | None = Field(default=None, ge=0.0, le=1.0)
    n_sequences: int = Field(default=50, ge=1)
    shots: int = Field(default=0, ge=0)
    master_seed: int = Field(ge=0)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    interleave: InterleaveConfig | None = None
    spam: SpamConfig = Field(default_factory=SpamConfig)
    fit: FitOptions = Field(default_factory=FitOptions)
    ecc: EccOptions = Field(default_factory=EccOptions)
    output_dir: Path = Path("results")
    report_formats: list[ReportFormat] = Field(default_factory=lambda: ["csv", "json", "dat"])

    @field_validator("lengths")
    @classmethod
    def check_lengths(cls, v: list[int] | None) -> list[int] | None:
        if v is not None and (not v or v[0] < 1 or any(b <= a for a, b in zip(v, v[1:]))):
            raise ValueError("lengths must be nonempty, strictly increasing and >= 1")
        return v

    @model_validator(mode="after")
    def check_kind(self) -> CampaignConfig:
        n = self.n_qubits
        if self.kind == "number":
            if self.gamma is None:
                raise ValueError("number campaigns need gamma")
            if self.gamma > n:
                raise ValueError(f"gamma must lie in [0, {n}]")
        if self.kind == "parity" and n % 2:
            raise ValueError("parity campaigns need an even number of qubits")
        if self.kind == "ecc" and n != 3:
            raise ValueError("the three_qubit_bitflip code uses 3 qubits")
        if self.kind != "number" and self.design != "number":
            raise ValueError("negative-control designs only exist for number campaigns")
        if self.kind != "number" and (self.spam.prep or self.spam.meas):
            raise ValueError("SPAM channels are only supported in number campaigns")
        if self.interleave is not None:
            if self.interleave.gate == "logical_t" and self.kind != "ecc":
                raise ValueError("logical_t can only be interleaved in ecc campaigns")
            if self.interleave.gate in ("iswap", "pair") and max(self.interleave.qubits) >= n:
                raise ValueError("interleaved gate qubits exceed the register")
        for name, qubits in (("noise.support", self.noise.support), ("noise.qubits", self.noise.qubits)):
            if qubits is not None and any(not 0 <= q < n for q in qubits):
                raise ValueError(f"{name} exceeds the register")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def _format_errors(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def parse_campaign_config(text: str, source: str = "<string>") -> CampaignConfig:
    """Validate a campaign document.

    Raises:
        ConfigurationError: With the line/column of a JSON syntax error or the
            dotted field path of every schema violation
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        log.error("campaign_config_unparseable", source=source, line=e.lineno, column=e.colno)
        raise ConfigurationError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e
    if isinstance(data, dict) and data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{source}: unsupported schema_version {data['schema_version']!r}, expected {SCHEMA_VERSION}"
        )
    try:
        return CampaignConfig.model_validate(data)
    except ValidationError as e:
        details = _format_errors(e)
        log.error("campaign_config_invalid", source=source, errors=details)
        raise ConfigurationError(f"{source}: invalid campaign config\n{details}") from e


def load_campaign_config(path: str | Path) -> CampaignConfig:
    """Read and validate a campaign file.

    Raises:
        ConfigurationError: If the file is unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read campaign config {path}: {e}") from e
    return parse_campaign_config(text, str(path))

"""Pytest configuration and fixtures."""

import json

import numpy as np
import pytest
import structlog

from symbench.core.channels import dilated_noise
from symbench.core.qstate import sector_indices


@pytest.fixture(autouse=True)
def _reset_structlog():
    """Keep one test's logging configuration (and its captured stream) from leaking into the next."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def rng():
    """Seeded generator for property tests."""
    return np.random.default_rng(20240611)


@pytest.fixture
def sector_n3_g1():
    """Weight-1 sector of three qubits: indices 1, 2, 4."""
    return sector_indices(3, 1)


@pytest.fixture
def sector_n4_g2():
    """Six-dimensional half-filling sector of four qubits."""
    return sector_indices(4, 2)


@pytest.fixture
def noise_n3():
    """Dilated error on qubits (0, 1) of a 3-qubit register, seed 7, epsilon 0.1."""
    return dilated_noise(3, (0, 1), 0.1, 7)


@pytest.fixture
def noise_n4():
    """Dilated error on qubits (1, 2) of a 4-qubit register, seed 42, epsilon 0.15."""
    return dilated_noise(4, (1, 2), 0.15, 42)


@pytest.fixture
def test_output_dir(tmp_path):
    """Create a temporary output directory for tests."""
    output_dir = tmp_path / "test_outputs"
    output_dir.mkdir(exist_ok=True)
    return output_dir


@pytest.fixture
def write_campaign(tmp_path):
    """Write a campaign dict as JSON and return its path."""

    def write(payload, name="campaign.json"):
        path = tmp_path / name
        payload = dict(payload)
        payload.setdefault("output_dir", str(tmp_path / "results"))
        path.write_text(json.dumps(payload, indent=2))
        return path

    return write


@pytest.fixture
def minimal_number_campaign():
    """n=3, gamma=1, noiseless number campaign."""
    return {
        "schema_version": 1,
        "name": "minimal",
        "kind": "number",
        "n_qubits": 3,
        "gamma": 1,
        "master_seed": 11,
        "lengths": [1, 2, 4, 8],
        "n_sequences": 5,
    }

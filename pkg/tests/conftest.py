"""pytest fixtures and configuration."""

import json
import logging

import numpy as np
import pytest
from loguru import logger

from heralded_fock.config import MAX_WORKERS_ENV, TRANSMITTANCE_ENV
from heralded_fock.decompose import TargetSpec


@pytest.fixture
def env(monkeypatch):
    """Clear the environment variables that change run defaults."""
    monkeypatch.delenv(TRANSMITTANCE_ENV, raising=False)
    monkeypatch.delenv(MAX_WORKERS_ENV, raising=False)
    yield monkeypatch


@pytest.fixture
def rng():
    """Seeded generator so random suites are reproducible."""
    return np.random.default_rng(20211026)


@pytest.fixture
def datafx():
    """Load an external JSON file as data fixture."""

    def _load_json_file(filename):
        with open(f"tests/data/{filename}.json", "rb") as file:
            return json.loads(file.read())

    return _load_json_file


@pytest.fixture
def caplog(caplog):
    """Capture loguru log fixture"""

    class PropogateHandler(logging.Handler):
        def emit(self, record):
            logging.getLogger(record.name).handle(record)

    handler_id = logger.add(PropogateHandler(), format="{message}")
    yield caplog
    logger.remove(handler_id)


@pytest.fixture
def make_target(rng):
    """Random normalized target with complex normal coefficients."""

    def _make(n_total, zero_first=False, zero_last=False):
        coefficients = rng.normal(size=n_total + 1) + 1j * rng.normal(size=n_total + 1)
        if zero_first:
            coefficients[0] = 0.0
        if zero_last:
            coefficients[-1] = 0.0
        coefficients /= np.linalg.norm(coefficients)
        return TargetSpec(n_total=n_total, coefficients=list(coefficients))

    return _make

import logging

import pytest
from hypothesis import HealthCheck, settings

from stages.IngestStage.stage import IngestStage
from tests.graph_factory import ONTO_NT

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(autouse=True)
def _quiet_esg_logs(caplog):
    caplog.set_level(logging.WARNING, logger="esg")


@pytest.fixture
def onto_store():
    return IngestStage.ingest_text(ONTO_NT)

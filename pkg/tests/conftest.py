"""Shared test fixtures and configuration"""

import logging
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

# Set test environment variables BEFORE importing anything else
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.pop("GCELAB_CATALOG", None)
os.environ["GCELAB_MODIFICATIONS"] = "5"
os.environ["GCELAB_COUNT"] = "3"

from gcelab.services.models import (  # noqa: E402
    flat_frame,
    hopf_frame,
    line_kahler_frame,
    sasakian_model,
    sasakian_product,
)
from tests.frames import heisenberg_line_frame  # noqa: E402

logger = logging.getLogger(__name__)


@pytest.fixture
def rng():
    """Seeded generator so random checks are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def hopf():
    return hopf_frame("sphere")


@pytest.fixture(scope="session")
def sphere_product():
    return sasakian_product(sasakian_model("sphere"), sasakian_model("sphere"), name="su2xsu2")


@pytest.fixture(scope="session")
def nil_sl2_product():
    return sasakian_product(sasakian_model("nil"), sasakian_model("sl2"), name="nilxsl2")


@pytest.fixture(scope="session")
def flat():
    return flat_frame(2, name="flat_c2")


@pytest.fixture(scope="session")
def line_kahler():
    return line_kahler_frame("nil")


@pytest.fixture(scope="session")
def vaisman_heisenberg():
    return heisenberg_line_frame(1.0)


@pytest.fixture(scope="session")
def mixed_heisenberg():
    return heisenberg_line_frame(-1.0)


@pytest.fixture(autouse=True)
def reset_shared_services():
    """Drop cached catalog/service instances between tests."""
    from gcelab.dependencies import reset_services

    reset_services()
    yield
    reset_services()

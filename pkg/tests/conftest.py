"""Pytest glue: import path for the package plus shared fixtures."""

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from xz24.core.config import get_settings  # noqa: E402
from xz24.services.hamiltonian import parse_hamiltonian  # noqa: E402

# 0.2 I + Z0 + 0.5 X0: E = 0.2 +/- sqrt(1.25), weights on |0> of 0.947.. and 0.052..
FIXTURE_TEXT = "# two-level fixture\n0.2\n1.0 Z0\n0.5 X0\n"
FIXTURE_ENERGIES = (0.2 - 1.25**0.5, 0.2 + 1.25**0.5)
FIXTURE_WEIGHTS = ((1 - 1 / 1.25**0.5) / 2, (1 + 1 / 1.25**0.5) / 2)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Drop the cached Settings so monkeypatched XZ24_* variables take effect."""

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def fixture_hamiltonian():
    return parse_hamiltonian(FIXTURE_TEXT)


@pytest.fixture
def hamiltonian_file(tmp_path: Path) -> Path:
    path = tmp_path / "fixture.ham"
    path.write_text(FIXTURE_TEXT, encoding="utf-8")
    return path

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lsentangle import spectra

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]


@st.composite
def spectrum_st(draw, max_dim: int = 6, min_dim: int = 1):
    """Random exact spectrum; repeated entries are allowed so multiplicities occur."""
    n = draw(st.integers(min_dim, max_dim))
    raw = draw(st.lists(st.sampled_from([1, 2, 3, 5, 7, 0.5, 0.25, 1.7, 4.2, 9.0]), min_size=n, max_size=n))
    return spectra.make_spectrum(raw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


SOURCE = ROOT / "paper.md"


@pytest.fixture(scope="session")
def source_text() -> str:
    """Reference text that anchored values are quoted from (whitespace collapsed)."""
    return " ".join(SOURCE.read_text(encoding="utf-8").split())


def assert_quoted(text: str, snippet: str) -> None:
    assert " ".join(snippet.split()) in text, f"anchor not found: {snippet!r}"


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import make_golden_pdf, make_pdf  # noqa: E402

FIXED_INSTANT = datetime(2000, 1, 1, tzinfo=timezone.utc)


def fixed_clock() -> datetime:
    return FIXED_INSTANT


@pytest.fixture(scope="session")
def golden_pdf() -> bytes:
    return make_golden_pdf()


@pytest.fixture(scope="session")
def small_pdf() -> bytes:
    return make_pdf(
        [
            "Quick Intro",
            "Agenda\nFirst part\nSecond part",
            "Topic A\nHow the first mechanism operates in practice.",
            "Topic B\nHow the second mechanism differs from the first.",
        ]
    )

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

# filled in by test_acceptance as each criterion runs
ACCEPTANCE_LINES: dict[str, str] = {}


def pmf_strategy(min_size: int = 1, max_size: int = 12, allow_zeros: bool = True):
    """Normalized nonnegative vectors; some entries may be exactly zero."""
    weight = st.floats(0.0, 1.0, allow_nan=False) if allow_zeros else st.floats(1e-3, 1.0)
    return (
        st.lists(weight, min_size=min_size, max_size=max_size)
        .filter(lambda v: sum(v) > 1e-3)
        .map(lambda v: np.array(v) / sum(v))
    )


def joint_strategy(max_x: int = 6, max_y: int = 6):
    @st.composite
    def build(draw):
        nx = draw(st.integers(1, max_x))
        ny = draw(st.integers(1, max_y))
        cells = draw(
            st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=nx * ny, max_size=nx * ny).filter(
                lambda v: sum(v) > 1e-3
            )
        )
        m = np.array(cells).reshape(nx, ny)
        return m / m.sum()

    return build()


@pytest.fixture
def acceptance():
    """Record one summary line for an acceptance criterion."""

    def record(key: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES[key] = f"{'PASS' if ok else 'FAIL'}  {key:<4} {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

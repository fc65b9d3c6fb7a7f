from __future__ import annotations

import pytest

from uavplace.scenario import scenario_from_dict

_ACCEPTANCE_LINES: list[str] = []


def scenario_dict(users, buildings=(), venue=None, radio=None, **extra) -> dict:
    """Scenario document from ``(x, y, demand_mbps)`` users and ``(corners, height)`` buildings."""
    doc = {
        "users": [{"id": i + 1, "x": x, "y": y, "demand_mbps": d} for i, (x, y, d) in enumerate(users)],
        "buildings": [
            {"id": i + 1, "bottom_corners": [list(c) for c in corners], "height": h}
            for i, (corners, h) in enumerate(buildings)
        ],
    }
    if venue is not None:
        doc["venue"] = venue
    if radio is not None:
        doc["radio"] = radio
    doc.update(extra)
    return doc


def make_scenario(users, buildings=(), venue=None, radio=None, **extra):
    return scenario_from_dict(scenario_dict(users, buildings, venue, radio, **extra))


@pytest.fixture
def acceptance_line():
    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import pathlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = pathlib.Path(__file__).parent / "data"

_ACCEPTANCE = {}


def load_golden():
    """{N: polynomial text} from the golden expansion file."""
    blocks, current = {}, None
    for line in (DATA / "delta_golden.txt").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if line.startswith("N = "):
            current = int(line[4:])
            blocks[current] = ""
        else:
            blocks[current] += " " + line.strip()
    return blocks


@pytest.fixture(scope="session")
def acceptance_record():
    def record(number, title, ok, detail):
        _ACCEPTANCE[number] = (title, ok, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")

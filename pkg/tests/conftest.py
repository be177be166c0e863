import pytest

from beurling import build_system, enumerate_integers, mobius

# acceptance verdicts, filled by test_acceptance.py and echoed at the end of the run
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def classical_1e6():
    system = build_system({"kind": "classical", "limit": 1e6})
    return system, enumerate_integers(system, 1e6)


@pytest.fixture(scope="session")
def classical_1e5():
    system = build_system({"kind": "classical", "limit": 1e5})
    return system, enumerate_integers(system, 1e5)


@pytest.fixture(scope="session")
def li_1e5():
    system = build_system({"kind": "li_spaced", "limit": 1e5})
    return system, enumerate_integers(system, 1e5)


@pytest.fixture(scope="session")
def mobius_1e6(classical_1e6):
    return mobius(classical_1e6[1])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

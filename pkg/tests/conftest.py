import pytest

from cascade_bandits.core import ArmParams

PAPER_MU = (0.85, 0.9, 0.95, 0.92, 0.87)
PAPER_P = (0.1, 0.25, 0.4, 0.55, 0.7)
# r(identity) for the reference instance, from outcome enumeration (oracle.exhaustive_reward)
PAPER_REWARD = 0.87512616


@pytest.fixture
def paper():
    return ArmParams(PAPER_MU, PAPER_P)


# criterion -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {detail}")

from pathlib import Path

import pytest

from baybfed.config import ExperimentConfig, parse_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# acceptance lines, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def s1_config(**changes) -> ExperimentConfig:
    return parse_config(CONFIG_DIR / "s1.yaml").replace(**changes)


@pytest.fixture(scope="session")
def s1() -> ExperimentConfig:
    return s1_config()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

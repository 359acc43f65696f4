import numpy as np
import pytest

from stokesdrop.evolve import ScenarioConfig, run

ACCEPTANCE_LINES: list[str] = []


def report_line(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def annulus_run():
    """Annulus l=1, L=2 to t=1.17 with N=128 per ring."""
    cfg = ScenarioConfig(shape={"type": "annulus", "inner": 1.0, "outer": 2.0}, N=128, t_end=1.17,
                         fixed_dt=0.005, r_min=1e-3)
    return run(cfg)


@pytest.fixture(scope="session")
def perturbed_run():
    cfg = ScenarioConfig(shape={"type": "perturbed_circle", "amplitude": 0.05, "mode": 3}, N=128,
                         t_end=8.0, dt_max=0.05, record_every=5)
    return run(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

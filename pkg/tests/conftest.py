"""Shared fixtures and values frozen from tests/oracles/golden.py (60-digit mpmath)."""

import math
import time

import pytest

from qsd_mminf import ModelParams, SimConfig, run

# theta* by 60-digit bisection on the series.
THETA_STAR = {
    0.01: 0.9900985285345859091142753,
    0.1: 0.9087393580966909031152362,
    0.5: 0.651162342899571228033979,
    1.0: 0.4502650274959811847923733,
    2.0: 0.2251653732315627003844147,
    5.0: 0.02605756622061924371774956,
    10.0: 0.0004016895467479480367546817,
    20.0: 3.903863588426695603697459e-8,
}
TS11 = THETA_STAR[1.0]

BARGAMMA_M05_M1 = 0.4140433267106359644956194
GAMMA_LOWER_SCALED_05_2 = 1.196288013322608202931424
BIG_F_M045_M1 = 0.9996279343169238012002982
SERIES_11_AT_04 = -0.4430634074874596405203953
SERIES_11_AT_06 = 1.27436139145689792838306
MAP_11_AT_05 = 1.076159013825536838272775
MGF_11_AT_099TS = 71.56769975037913351062817
MGF_11_AT_05TS = 1.746913245583196763062337
MGF_11_AT_1EM8 = 1.0000000171828186428
MGF_11_AT_M05 = 0.57076929417224904004
MGF_3_2_AT_03 = 1.642243541110248824
# Taylor coefficients 1..8 of the generating function at (a, q, theta) = (1, 1, theta*).
NU_STAR_11 = [
    0.45026502749598118479,
    0.34889573000300283861,
    0.1464422056833316101,
    0.042733822240436540557,
    0.0095970719745505122955,
    0.001754563955060772726,
    0.00027069384620085720845,
    0.000036137855305432883582,
]

E_MINUS_1 = math.e - 1

BIG_N = 1_000_000
BIG_PROBES = (5.0, 10.0, 15.0, 20.0)


@pytest.fixture(scope="session")
def unit():
    return ModelParams(1.0, 1.0)


@pytest.fixture(scope="session")
def big_run_timed(unit):
    """10^6 trajectories at a = q = 1, seed 42, t_max 200, with wall time in seconds."""
    start = time.perf_counter()
    stats = run(SimConfig(unit, 1, BIG_N, 200.0, seed=42, probes=BIG_PROBES))
    return stats, time.perf_counter() - start


@pytest.fixture(scope="session")
def big_run(big_run_timed):
    return big_run_timed[0]


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

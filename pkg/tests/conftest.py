import math

import numpy as np
import pytest

from domain_metrics import make_domain

ACCEPTANCE = {}

SPECS = {
    "disk": {"kind": "ball", "n": 2, "center": [0, 0], "radius": 1},
    "halfplane": {"kind": "half_space", "n": 2, "normal": [0, 1], "offset": 0},
    "square": {"kind": "convex_polygon", "n": 2, "vertices": [[0, 0], [2, 0], [2, 1], [0, 1]]},
    "slit": {"kind": "slit_disk", "n": 2, "center": [0, 0], "radius": 1, "slit": [[0, 0], [1, 0]]},
    "cusp": {"kind": "tangent_disk_cusp", "n": 2, "radius": 1, "inner_radius": 0.5,
             "direction": [1, 0], "depth": 1e-3},
    "punctured": {"kind": "punctured_disk", "n": 2},
    "plane": {"kind": "punctured_disk", "n": 2, "radius": math.inf},
    "ball3": {"kind": "ball", "n": 3},
}


@pytest.fixture(scope="session")
def domains():
    return {k: make_domain(v) for k, v in SPECS.items()}


@pytest.fixture(scope="session")
def atlases(domains):
    return {k: D.boundary_samples(10_000) for k, D in domains.items() if k != "cusp"}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from amrlab.amr import AMRDataset, AMRLevel, IndexBox, Patch, build_amr_from_tags, sphere_field

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SPHERE_CENTER = (16.3, 15.7, 16.1)
SPHERE_RADIUS = 9.3


@pytest.fixture
def quadrant_dataset():
    """Coarse 2x2x1 grid (cells A, B, C, D) with a 2x2 fine patch over D."""
    coarse = np.array([[10.0, 20.0], [30.0, 40.0]]).reshape(2, 2, 1)  # A=(0,0) B=(0,1) C=(1,0) D=(1,1)
    fine = np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(2, 2, 1)
    # fine index space is 4x4x2; quadrant D covers fine cells i,j in {2,3}, k in {0,1}
    fine3 = np.concatenate([fine, fine + 4], axis=2)
    return AMRDataset((2, 2, 1), [
        AMRLevel(0, [Patch(IndexBox((0, 0, 0), (1, 1, 0)), coarse)]),
        AMRLevel(1, [Patch(IndexBox((2, 2, 0), (3, 3, 1)), fine3)]),
    ])


def two_level_sphere():
    """Sphere crossing a refinement interface: coarse 32^3, fine shell on x >= 16."""
    fine = sphere_field((64, 64, 64), SPHERE_CENTER, SPHERE_RADIUS, cell_size=0.5)
    coarse = sphere_field((32, 32, 32), SPHERE_CENTER, SPHERE_RADIUS)
    tags = np.abs(coarse.values) < 1.5
    tags[:16] = False
    return build_amr_from_tags(fine, tags, tile=4)


@pytest.fixture(scope="session")
def sphere_dataset():
    return two_level_sphere()


# criterion number -> list of (ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(("" if ok else "FAILED ") + d for ok, d in parts)
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")

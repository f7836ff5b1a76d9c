import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cfuav.config import load_config, load_config_path

REPO = Path(__file__).resolve().parent.parent

SMALL_DOC = """
area_x_m = 1000.0
area_y_m = 1000.0
n_max_users = 3
oru_positions = [
    [200.0, 200.0, 25.0],
    [800.0, 200.0, 25.0],
    [200.0, 800.0, 25.0],
    [800.0, 800.0, 25.0],
]
episode_len = 50

[[zones]]
x_range_m = [400.0, 600.0]
y_range_m = [400.0, 600.0]
eps_max = 1.0e-5
"""


@pytest.fixture(scope="session")
def k19_cfg():
    return load_config_path(REPO / "configs" / "uav_3km_k19.toml")


@pytest.fixture()
def small_cfg():
    return load_config(SMALL_DOC)


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}", flush=True)

import shlex
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
SMOKE_SCENARIO = DATA / "smoke_scenario.toml"


def serve_endpoint(scenario=SMOKE_SCENARIO) -> str:
    """Command line that serves the environment protocol on stdio."""
    return (f"{shlex.quote(sys.executable)} -m cfuav.cli serve "
            f"--config {shlex.quote(str(scenario))}")


def runner_base() -> str:
    return f"{shlex.quote(sys.executable)} -m cfuav.cli"


@pytest.fixture()
def smoke_endpoint():
    return serve_endpoint()


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}", flush=True)

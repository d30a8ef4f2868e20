import subprocess
import sys

import pytest


def run_cli(*args, check=True):
    """Invoke the benchmark CLI as a subprocess (its external interface)."""
    result = subprocess.run(
        ["opsbench", *map(str, args)], capture_output=True, text=True
    )
    if check and result.returncode != 0:
        raise AssertionError(
            f"opsbench {' '.join(map(str, args))} failed "
            f"({result.returncode}):\n{result.stdout}\n{result.stderr}"
        )
    return result


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cases")
    run_cli("forge", "--all", "--seed", 7, "--out", root)
    return root


@pytest.fixture(scope="session")
def agent_cmd():
    return [sys.executable, "-m", "opsbench_sdk.demo"]

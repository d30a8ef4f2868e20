import pytest

from opsbench.cases import load_case
from opsbench.forge import BaseClusterConfig, build_all, load_shipped_templates, synthesize_base
from opsbench.model import load_snapshot
from opsbench.verify import case_dirs


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cases")
    build_all(root, seed=7)
    return root


@pytest.fixture(scope="session")
def bundles(suite_dir):
    return [load_case(d / "case.json", check_answerability=False) for d in case_dirs(suite_dir)]


@pytest.fixture(scope="session")
def templates():
    return {t.template_id: t for t in load_shipped_templates()}


@pytest.fixture(scope="session")
def base_snapshot():
    return synthesize_base(BaseClusterConfig())


@pytest.fixture(scope="session")
def taint_dir(suite_dir):
    return suite_dir / "sched-taint-001-s7"


@pytest.fixture(scope="session")
def taint_bundle(taint_dir):
    return load_case(taint_dir / "case.json", check_answerability=False)


@pytest.fixture(scope="session")
def taint_snapshot(taint_dir):
    return load_snapshot(taint_dir / "snapshot.json")

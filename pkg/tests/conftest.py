import numpy as np
import pytest

from netreach import _kernels_py, build_aggregate, load_fixture

try:
    from netreach import _kernels as _kernels_ext
except ImportError:  # extension not built
    _kernels_ext = None

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fig3():
    return load_fixture("fig3")


@pytest.fixture(scope="session")
def fig4():
    return load_fixture("fig4")


@pytest.fixture(scope="session")
def fig3_agg(fig3):
    return build_aggregate(fig3)


@pytest.fixture(scope="session")
def fig4_agg(fig4):
    return build_aggregate(fig4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = [pytest.param(_kernels_py, id="python")]
BACKENDS.append(
    pytest.param(_kernels_ext, id="cython", marks=pytest.mark.skipif(_kernels_ext is None, reason="extension not built"))
)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

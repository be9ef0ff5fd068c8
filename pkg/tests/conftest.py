import numpy as np
import pytest

from topopt import _backend, _pykernels
from topopt.grid_fem import ElastParams
from topopt.presets import build_preset


@pytest.fixture(params=["native", "python"])
def backend(request, monkeypatch):
    """Run a test against both the selected backend and the NumPy fallback."""
    if request.param == "python":
        monkeypatch.setattr(_backend, "kernels", _pykernels)
    return request.param


@pytest.fixture
def small_cantilever():
    mesh, lc = build_preset("cantilever", 4, 3)
    return mesh, lc


@pytest.fixture
def params():
    return ElastParams(E0=1.0, nu=0.3, p=3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

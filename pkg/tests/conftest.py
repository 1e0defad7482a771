import numpy as np
import pytest

from orbitmatch import kernels

BACKENDS = [kernels.python_backend]
if kernels.compiled_backend is not None:
    BACKENDS.append(kernels.compiled_backend)


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.line(mod.RESULTS[key])

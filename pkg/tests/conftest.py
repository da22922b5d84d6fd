import pytest

from mprsampling import Budget, MprChannel, Scenario, SourceParams, kernels

# budget-sweep setting: fast source 1 (lambda < 0), slow source 2 (lambda > 0), weak MPR
SRC_A1 = SourceParams(0.8, 0.6, weight=0.5)
SRC_A2 = SourceParams(0.3, 0.2, weight=0.5)
CH_A = MprChannel(0.9, 0.85, 0.6, 0.55)

# weight-sweep setting: both sources lambda > 0, strong MPR
SRC_B1 = SourceParams(0.8, 0.1)
SRC_B2 = SourceParams(0.4, 0.2)
CH_B = MprChannel(0.9, 0.85, 0.82, 0.78)


@pytest.fixture
def scenario_a():
    return Scenario(SRC_A1, SRC_A2, CH_A, Budget(0.5, 0.5))


@pytest.fixture
def scenario_b():
    return Scenario(SRC_B1, SRC_B2, CH_B, Budget(0.9, 0.9))


@pytest.fixture(params=[b for b in kernels.BACKENDS if b != "numba" or kernels.HAVE_NUMBA])
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param

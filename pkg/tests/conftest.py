import pytest

from morse_susy.morse import derive_params

# (V0, alpha, gamma): D = 1.5, 3.5, 2.0, and a non-truncating D = 3.5 case
SWEEP = [(2.0, 1.0, 0.25), (8.0, 1.0, 0.0), (12.5, 2.0, -0.25)]
EXTRA = [(8.0, 1.0, 0.3)]


@pytest.fixture
def default_params():
    return derive_params(8.0, 1.0, 0.0)


@pytest.fixture
def generic_params():
    """D = 3.5 with a basis parameter that avoids every natural truncation."""
    return derive_params(8.0, 1.0, 0.3)


@pytest.fixture(params=SWEEP + EXTRA, ids=lambda t: "V0={}-alpha={}-gamma={}".format(*t))
def any_params(request):
    return derive_params(*request.param)

import numpy as np
import pytest

from pdcomp import _core
from pdcomp.instances import (
    build_bilinear_toy,
    build_max_toy,
    default_classification,
    default_cone_qp,
    default_game,
)


@pytest.fixture(scope="session")
def toy():
    return build_bilinear_toy()


@pytest.fixture(scope="session")
def toy_max():
    return build_max_toy()


@pytest.fixture(scope="session")
def game():
    return default_game()


@pytest.fixture(scope="session")
def classification():
    return default_classification()


@pytest.fixture(scope="session")
def cone_qp():
    return default_cone_qp()


def _backends():
    impls = [("pure-python", _core.kernels_py)]
    if _core.HAVE_EXTENSION:
        impls.append(("compiled", _core._kernels))
    return impls


@pytest.fixture(params=[name for name, _ in _backends()])
def kernel_impl(request):
    return dict(_backends())[request.param]


def rng(seed=0):
    return np.random.default_rng(seed)

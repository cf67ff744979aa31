"""Shared, session-cached experiment runs.

Toy runs over [1, 20] take several seconds each, so every run used by more
than one test is computed once per session.
"""

import functools

import numpy as np
import pytest

from saddleflow.dynamics import APDD, HanNoTikhonov
from saddleflow.experiments import example1_config, example2_config, run
from saddleflow.problems import quadratic_minmax_problem
from saddleflow.schedules import PowerTikhonov

REGRESSION_KAPPA = 200.0


@functools.lru_cache(maxsize=None)
def cached_run(name):
    if name == "toy_slow":
        return run(example1_config())
    if name == "toy_fast":
        return run(example1_config(eps=PowerTikhonov(7.0, 4.0), label="fast"))
    if name == "toy_zero":
        return run(example1_config(variant=HanNoTikhonov()))
    if name.startswith("toy_r="):
        r = float(name.split("=")[1])
        return run(example1_config(eps=PowerTikhonov(7.0, r)))
    if name.startswith("apdd="):
        return run(example1_config(variant=APDD(float(name.split("=")[1]))))
    if name == "reg_default":
        return run(example2_config(kappa=REGRESSION_KAPPA))
    if name == "reg_zero":
        return run(example2_config(kappa=REGRESSION_KAPPA, variant=HanNoTikhonov()))
    if name.startswith("reg_r="):
        r = float(name.split("=")[1])
        return run(example2_config(kappa=REGRESSION_KAPPA, eps=PowerTikhonov(1.0, r)))
    raise KeyError(name)


@pytest.fixture(scope="session")
def runs():
    return cached_run


@pytest.fixture(scope="session")
def toy():
    return quadratic_minmax_problem(1, 6, 4, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

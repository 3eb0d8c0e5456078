import time

import pytest

from clineshoot import IntegratorConfig, find_all_clines, proposition_1, proposition_2


@pytest.fixture(scope="session")
def default_cfg():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def prop1():
    return proposition_1()


@pytest.fixture(scope="session")
def prop2():
    return proposition_2()


# The two full searches are the expensive shared artifacts of the suite;
# run each once and keep the wall time for the runtime criteria.

@pytest.fixture(scope="session")
def prop1_search(prop1, default_cfg):
    t0 = time.perf_counter()
    result = find_all_clines(prop1.problem, default_cfg)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def prop2_search(prop2, default_cfg):
    t0 = time.perf_counter()
    result = find_all_clines(prop2.problem, default_cfg)
    return result, time.perf_counter() - t0

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus5():
    from proofsynth.datasetgen import small_proof_gen
    return small_proof_gen(5)


@pytest.fixture(scope="session")
def corpus6():
    from proofsynth.datasetgen import small_proof_gen
    return small_proof_gen(6)

import os

import pytest
from hypothesis import HealthCheck, settings

from ganitha import corpus_io, synth
from ganitha.pipeline import load_bundle

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MODELS = os.path.join(ROOT, "models")
SAMPLES = os.path.join(ROOT, "data", "samples.txt")

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def bundle():
    return load_bundle(MODELS)


@pytest.fixture(scope="session")
def samples():
    return corpus_io.parse_problem_file(corpus_io.read_text(SAMPLES))


@pytest.fixture(scope="session")
def corpus():
    return synth.generate(100, 100, 42)

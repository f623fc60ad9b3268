import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from corrdep.audio_io import CorpusManifest, compute_priors
from corrdep.synth_corpus import SynthParams, generate_corpus, generate_recordings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_corpus():
    """10 recordings (5 per class), k=5, kept in memory."""
    p = SynthParams(n_per_class=5, duration_stable_s=15.0, duration_drifting_s=15.0,
                    duration_spread_s=1.0, seed=7)
    entries, data = [], {}
    for e, fs in generate_recordings(p, k=5):
        entries.append(e)
        data[e.id] = fs.values
    return CorpusManifest(entries, 5, compute_priors(entries)), data


@pytest.fixture(scope="session")
def feature_corpus_dir(tmp_path_factory):
    """The default 40-recording feature-level corpus written to disk."""
    out = tmp_path_factory.mktemp("synth_features")
    generate_corpus(SynthParams(), out, k=5, mode="features")
    return out

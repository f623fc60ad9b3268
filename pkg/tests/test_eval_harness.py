import numpy as np
import pytest

from corrdep import eval_harness as eh
from corrdep.audio_io import CONTROL, DEPRESSED, CorpusManifest, RecordingEntry, compute_priors
from corrdep.config import ExperimentConfig, TrainConfig
from corrdep.errors import DataError, InvalidPriors, LengthMismatch, PerfectBaseline


class OracleStub:
    name, L = "oracle", None

    def represent(self, entry, features):
        return entry.y

    def fit(self, reps, y, seed):
        return None

    def predict(self, model, reps):
        return np.array(reps), np.array(reps, dtype=float)


class ConstantStub(OracleStub):
    name = "always-depressed"

    def predict(self, model, reps):
        return np.ones(len(reps), dtype=int), np.ones(len(reps))


def manifest_112():
    entries = []
    for i in range(112):
        label = DEPRESSED if i < 58 else CONTROL
        entries.append(RecordingEntry(f"r{i}", f"s{i}", label, i % 5, "x"))
    return CorpusManifest(entries, 5, compute_priors(entries))


def test_metrics_perfect():
    m = eh.compute_metrics([1, 0, 1], [1, 0, 1])
    assert (m.accuracy, m.precision, m.recall, m.f1) == (100, 100, 100, 100)


def test_metrics_hand_table():
    m = eh.compute_metrics([DEPRESSED, CONTROL, DEPRESSED, CONTROL],
                           [DEPRESSED, DEPRESSED, CONTROL, CONTROL])
    assert (m.tp, m.fn, m.fp, m.tn) == (1, 1, 1, 1)
    assert (m.accuracy, m.precision, m.recall, m.f1) == (50, 50, 50, 50)


def test_metrics_all_control():
    m = eh.compute_metrics([0, 0, 0], [1, 0, 1])
    assert m.recall == 0 and m.precision == 0 and m.f1 == 0
    assert "precision" in m.undefined
    with pytest.raises(LengthMismatch):
        eh.compute_metrics([1], [1, 0])


def test_random_baseline_table_row():
    m = eh.random_baseline(54 / 112, 58 / 112)
    assert round(m.accuracy, 1) == 50.1
    assert round(m.precision, 1) == round(m.recall, 1) == round(m.f1, 1) == 51.8
    half = eh.random_baseline(0.5, 0.5)
    assert (half.accuracy, half.f1) == (50.0, 50.0)
    one = eh.random_baseline(0.0, 1.0)
    assert (one.accuracy, one.precision, one.recall, one.f1) == (100, 100, 100, 100)
    with pytest.raises(InvalidPriors):
        eh.random_baseline(0.6, 0.6)


def test_relative_error_reduction():
    assert round(eh.relative_error_reduction(69.6, 77.7), 1) == 26.6
    assert round(eh.relative_error_reduction(84.4, 88.0), 1) == 23.1
    assert eh.relative_error_reduction(80.0, 80.0) == 0.0
    with pytest.raises(PerfectBaseline):
        eh.relative_error_reduction(100.0, 100.0)


def test_protocol_oracle_stub():
    rep = eh.run_protocol(OracleStub(), manifest_112(), {}, R=10)
    assert rep.R == 10
    assert rep.mean("accuracy") == 100 and rep.std("accuracy") == 0


def test_protocol_constant_stub():
    rep = eh.run_protocol(ConstantStub(), manifest_112(), {}, R=3)
    # 58 TP, 54 FP, no negatives predicted
    assert round(rep.mean("accuracy"), 1) == 51.8
    assert rep.mean("recall") == 100
    assert round(rep.mean("precision"), 1) == 51.8
    for m in rep.runs:
        assert m.n == 112 and (m.tp, m.fp) == (58, 54)


def test_macro_pooling_option():
    rep = eh.run_protocol(ConstantStub(), manifest_112(), {}, R=1, pooling="macro")
    per_fold = rep.fold_runs[0]
    assert rep.mean("precision") == pytest.approx(np.mean([m.precision for m in per_fold]))


def test_speaker_disjoint_guard():
    a = RecordingEntry("a", "s1", CONTROL, 0, "x")
    b = RecordingEntry("b", "s1", DEPRESSED, 1, "x")
    with pytest.raises(DataError):
        eh.check_speaker_disjoint([a], [b])


def test_protocol_never_mixes_speakers(small_corpus):
    manifest, data = small_corpus
    seen = []

    class Spy(OracleStub):
        def fit(self, reps, y, seed):
            seen.append(seed)

    eh.run_protocol(Spy(), manifest, data, R=2, seed_base=40)
    assert seen == [40] * manifest.k + [41] * manifest.k


def test_svm_approaches_deterministic(small_corpus):
    manifest, data = small_corpus
    for name, L in (("BL1", None), ("Approach1", 100)):
        rep = eh.run_protocol(eh.make_approach(name, L), manifest, data, R=3)
        assert rep.std("accuracy") == 0.0
        assert all(m.n == len(manifest.entries) for m in rep.runs)


def test_sweep_singleton_equals_protocol(small_corpus):
    manifest, data = small_corpus
    cfg = ExperimentConfig()
    sweep = eh.sweep_L("Approach1", manifest, data, [100], cfg, R=2)
    single = eh.run_protocol(eh.make_approach("Approach1", 100, cfg), manifest, data, R=2)
    assert len(sweep) == 1 and sweep[0].best_L
    assert [m.accuracy for m in sweep[0].runs] == [m.accuracy for m in single.runs]


def test_sem_formula():
    runs = [eh.Metrics(a, 0, 0, f, 0, 0, 0, 0) for a, f in zip(range(10), np.linspace(60, 80, 10))]
    rep = eh.MetricsReport("x", 100, runs)
    f1 = np.linspace(60, 80, 10)
    assert rep.sem("f1") == pytest.approx(np.std(f1, ddof=1) / np.sqrt(10))
    assert eh.sweep_table([rep]) == [(100, pytest.approx(70.0), pytest.approx(rep.sem("f1")))]


def test_lstm_approaches_run(small_corpus):
    manifest, data = small_corpus
    cfg = ExperimentConfig(train=TrainConfig(epochs=2))
    for name in ("BL2", "Approach2"):
        rep = eh.run_protocol(eh.make_approach(name, 100, cfg), manifest, data, R=1)
        assert rep.runs[0].n == len(manifest.entries)
        assert len(rep.train_seconds) == manifest.k


def test_parallel_jobs_match_serial(small_corpus):
    manifest, data = small_corpus
    cfg = ExperimentConfig(train=TrainConfig(epochs=1))
    a = eh.run_protocol(eh.make_approach("Approach2", 100, cfg), manifest, data, R=1, jobs=1)
    b = eh.run_protocol(eh.make_approach("Approach2", 100, cfg), manifest, data, R=1, jobs=2)
    assert [m.accuracy for m in a.runs] == [m.accuracy for m in b.runs]


def test_timing_stub_ratio(small_corpus):
    manifest, _ = small_corpus
    import time

    class Sleeper(OracleStub):
        def __init__(self, length):
            self.length = length

        def fit(self, reps, y, seed):
            time.sleep(self.length * 1e-4)

    long = eh.timing_report(Sleeper(100), manifest, {}, folds=[0, 1])
    short = eh.timing_report(Sleeper(25), manifest, {}, folds=[0, 1])
    assert long.mean_seconds / short.mean_seconds == pytest.approx(4.0, rel=0.5)
    assert "cpus=" in long.hardware


def test_report_format(tmp_path):
    runs = [eh.Metrics(70.0, 71.0, 72.0, 71.5)] * 2
    rep = eh.MetricsReport("BL1", None, runs)
    eh.write_report(tmp_path / "r.tsv", [rep])
    lines = (tmp_path / "r.tsv").read_text().splitlines()
    assert lines[0] == "approach\tL\tmetric\tmean\tstd"
    assert lines[1] == "BL1\tNA\taccuracy\t70.0000\t0.0000"
    assert len(lines) == 5


def test_make_approach_validation():
    with pytest.raises(DataError):
        eh.make_approach("Approach1", 101)
    with pytest.raises(DataError):
        eh.make_approach("nope")
    assert eh.make_approach("bl1", 300).L is None

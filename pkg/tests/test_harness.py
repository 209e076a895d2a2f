import json

import numpy as np
import pytest

from spate import data, harness
from spate.errors import InvalidArgumentError
from spate.numerics import RngStream

SMALL_GRID = {"gain": [1.0, 4.0], "sigma": [0.0, 0.1], "v_th": [0.5], "tau": [0.05, 0.2]}


def small_cfg(**kw):
    base = {"dataset": {"name": "moons", "n": 120}, "grid": SMALL_GRID, "n_folds": 3}
    base.update(kw)
    return harness.ExperimentConfig.from_dict(base)


def test_default_grid():
    g = harness.TuningGrid()
    cands = g.candidates()
    assert len(cands) == len(g) == 54
    assert cands[0] == {"gain": 1.0, "sigma": 0.0, "v_th": 0.25, "tau": 0.05}
    assert cands[1]["tau"] == 0.1 and cands[-1] == {"gain": 4.0, "sigma": 0.1, "v_th": 1.0, "tau": 0.2}


@pytest.mark.parametrize("bad", [{"gain": []}, {"tau": [0.0]}, {"sigma": [-0.1]}, {"v_th": [-1.0]}])
def test_grid_validation(bad):
    with pytest.raises(InvalidArgumentError):
        harness.TuningGrid(**bad)
    assert harness.TuningGrid(sigma=[0.0]).sigma == [0.0]


def test_config_validation_and_roundtrip():
    with pytest.raises(InvalidArgumentError):
        harness.ExperimentConfig(n_folds=1)
    with pytest.raises(InvalidArgumentError):
        harness.ExperimentConfig(encoders=["basis"])
    with pytest.raises(InvalidArgumentError):
        harness.ExperimentConfig(study="other")
    with pytest.raises(InvalidArgumentError):
        harness.ExperimentConfig.from_dict({"grid": {"gain": [1.0], "bogus": 1}})
    with pytest.raises(InvalidArgumentError):
        harness.ExperimentConfig.from_dict({"unknown": 1})
    cfg = small_cfg(study="qnn", train={"steps": 7})
    again = harness.ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg and again.train.steps == 7


def moons_train(n=80, seed=1):
    ds = data.gen_moons(n, 0.1, seed)
    tf = harness.fit_transform(ds.X, 8, minmax=True)
    return tf.apply(ds.X), ds.y, harness.sample_streams(0, range(n))


def test_tune_single_candidate():
    X, y, streams = moons_train()
    grid = harness.TuningGrid(gain=[2.0], sigma=[0.1], v_th=[0.5], tau=[0.1])
    theta, scores = harness.tune_spate_fold(X, y, grid, harness.SpateSettings(), streams)
    assert theta == grid.candidates()[0] and len(scores) == 1


def test_tune_picks_dominant_candidate():
    # with gain 1 and v_th 1 the neuron never fires: every sample maps to one point
    X, y, streams = moons_train()
    grid = harness.TuningGrid(gain=[1.0, 4.0], sigma=[0.0], v_th=[1.0], tau=[0.1])
    theta, scores = harness.tune_spate_fold(X, y, grid, harness.SpateSettings(), streams)
    assert theta["gain"] == 4.0 and scores[1] > scores[0]
    again = harness.tune_spate_fold(X, y, grid, harness.SpateSettings(), streams)
    assert again[0] == theta and again[1] == scores


def test_tune_ties_go_to_first():
    X, y, streams = moons_train()
    grid = harness.TuningGrid(gain=[1.0], sigma=[0.0], v_th=[1.0, 2.0], tau=[0.1])
    theta, scores = harness.tune_spate_fold(X, y, grid, harness.SpateSettings(), streams)
    assert scores[0] == scores[1] and theta["v_th"] == 1.0


def test_tune_needs_two_classes():
    X, y, streams = moons_train()
    with pytest.raises(InvalidArgumentError):
        harness.tune_spate_fold(X, np.zeros_like(y), harness.TuningGrid(), harness.SpateSettings(), streams)


def test_fit_transform_pca_only_above_cap():
    X = np.random.default_rng(0).normal(size=(30, 10))
    assert harness.fit_transform(X, 8).pca.k == 8
    assert harness.fit_transform(X[:, :5], 8).pca is None
    out = harness.fit_transform(X, 8, minmax=True).apply(X)
    assert out.shape == (30, 8) and out.min() >= 0 and out.max() <= 1


class Recorder:
    """Wraps fit_transform and tune_spate_fold to capture everything fitted per fold."""

    def __init__(self, monkeypatch):
        self.fitted, self.tuned = [], []
        fit, tune = harness.fit_transform, harness.tune_spate_fold

        def fit_rec(*a, **k):
            tf = fit(*a, **k)
            self.fitted.append(tf)
            return tf

        def tune_rec(*a, **k):
            out = tune(*a, **k)
            self.tuned.append(out)
            return out

        monkeypatch.setattr(harness, "fit_transform", fit_rec)
        monkeypatch.setattr(harness, "tune_spate_fold", tune_rec)


def _same_transform(a, b):
    parts = [(a.scaler.a, b.scaler.a), (a.scaler.b, b.scaler.b)]
    if a.pca is not None or b.pca is not None:
        parts.append((a.pca.components, b.pca.components))
    if a.minmax is not None:
        parts += [(a.minmax.a, b.minmax.a), (a.minmax.b, b.minmax.b)]
    return all(np.array_equal(u, v) for u, v in parts)


@pytest.mark.parametrize("study", ["quality", "qnn"])
def test_leakage_audit(monkeypatch, study):
    """Perturbing test-fold rows leaves every fitted scaler, PCA model and tuned theta unchanged."""
    cfg = small_cfg(study=study, dataset={"name": "blobs", "n": 60, "d": 9}, train={"steps": 2})
    ds = cfg.dataset.load(cfg.seed)
    plan = data.stratified_kfold(ds.y, cfg.n_folds, cfg.seed)
    tr, te = next(plan.splits())
    worker = harness.quality_fold if study == "quality" else harness.qnn_fold

    rec_a = Recorder(monkeypatch)
    out_a = worker(ds, tr, te, cfg, 0)
    monkeypatch.undo()
    noisy = data.Dataset(ds.X.copy(), ds.y, ds.name, ds.n_classes)
    noisy.X[te] = noisy.X[te] * 7.0 + np.random.default_rng(0).normal(0, 50, noisy.X[te].shape)
    rec_b = Recorder(monkeypatch)
    out_b = worker(noisy, tr, te, cfg, 0)

    assert len(rec_a.fitted) == len(rec_b.fitted) > 0
    assert any(tf.pca is not None for tf in rec_a.fitted)
    assert all(_same_transform(a, b) for a, b in zip(rec_a.fitted, rec_b.fitted))
    assert [t[0] for t in rec_a.tuned] == [t[0] for t in rec_b.tuned]
    assert [t[1] for t in rec_a.tuned] == [t[1] for t in rec_b.tuned]
    assert out_a["spate"]["info"].get("theta") == out_b["spate"]["info"].get("theta")
    # the test-split scores do move, so the perturbation was real
    assert out_a["angle"]["values"] != out_b["angle"]["values"]


@pytest.fixture(scope="module")
def quality_reports():
    cfg = small_cfg()
    return cfg, harness.run_quality_study(cfg)


def test_report_structure_and_aggregates(quality_reports):
    cfg, reports = quality_reports
    assert [r.encoder for r in reports] == ["spate", "angle", "amplitude"]
    for r in reports:
        assert set(r.per_fold) == set(harness.QUALITY_COLUMNS)
        assert all(len(v) == cfg.n_folds for v in r.per_fold.values())
        for k, agg in r.aggregate().items():
            assert agg["mean"] == float(np.mean(r.per_fold[k]))
            assert agg["std"] == float(np.std(r.per_fold[k])) and agg["std"] >= 0
    assert reports[0].n_qubits == 5 and reports[1].n_qubits == 2


def test_json_and_csv(quality_reports):
    cfg, reports = quality_reports
    doc = json.loads(harness.reports_to_json(reports, cfg))
    assert doc["manifest"]["config"] == cfg.to_dict()
    assert doc["provenance"]["tvpair_pairs"] == 200
    rep = doc["reports"][0]
    assert rep["per_fold"]["CKTA"] == reports[0].per_fold["CKTA"]
    assert np.isclose(rep["aggregate"]["CKTA"]["mean"], np.mean(rep["per_fold"]["CKTA"]))
    text = harness.reports_to_csv(reports, cfg)
    assert text.startswith("# manifest: ")
    rows = harness.read_report_csv(text)
    assert [r["encoder"] for r in rows] == ["spate", "angle", "amplitude"]
    expect = ["dataset", "encoder", "n_qubits", "folds"]
    for c in ("CKTA", "Fisher", "Inter/Intra", "Sil", "H_norm", "TVpair", "TVpair_norm"):
        expect += [f"{c}_mean", f"{c}_std"]
    assert list(rows[0]) == expect
    assert np.isclose(float(rows[0]["CKTA_mean"]), reports[0].aggregate()["CKTA"]["mean"], rtol=1e-9)


def test_determinism_and_worker_count(quality_reports):
    cfg, reports = quality_reports
    again = harness.run_quality_study(cfg, jobs=2)
    assert harness.reports_to_json(again, cfg) == harness.reports_to_json(reports, cfg)


def test_qnn_study_schema_and_determinism():
    cfg = small_cfg(study="qnn", n_folds=2, encoders=["spate", "amplitude"], train={"steps": 3})
    a = harness.run_qnn_study(cfg)
    b = harness.run_qnn_study(cfg)
    assert harness.reports_to_json(a, cfg) == harness.reports_to_json(b, cfg)
    assert set(a[0].per_fold) == {"accuracy", "precision", "recall", "auc"}
    assert a[1].n_qubits == 6
    assert a[0].fold_info[0]["d_enc"] == 2 and "theta" in a[0].fold_info[0]


def test_qnn_angle_uses_six_wires():
    cfg = small_cfg(study="qnn", dataset={"name": "blobs", "n": 60, "d": 9})
    ds = cfg.dataset.load(cfg.seed)
    tf, enc, _ = harness.qnn_encoder_setup("angle", ds.X, ds.y, np.arange(60), cfg)
    assert enc.n_qubits == 6 and tf.pca.k == 6


def test_spate_feature_count_selection():
    cfg = small_cfg(study="qnn", dataset={"name": "blobs", "n": 90, "d": 5})
    ds = cfg.dataset.load(cfg.seed)
    _, _, info = harness.qnn_encoder_setup("spate", ds.X, ds.y, np.arange(90), cfg)
    assert info["d_enc"] in (2, 3)
    untuned = harness.ExperimentConfig.from_dict({**cfg.to_dict(), "tune": False})
    tf, _, info = harness.qnn_encoder_setup("spate", ds.X, ds.y, np.arange(90), untuned)
    assert info["d_enc"] == 3 and tf.pca.k == 3
    with pytest.raises(InvalidArgumentError):
        harness.qnn_encoder_setup("spate", ds.X[:, :1], ds.y, np.arange(90), cfg)


def test_csv_dataset_spec(tmp_path):
    from conftest import write_csv
    ds = data.gen_blobs(40, 3, 2, 1.0, 0)
    path = write_csv(tmp_path / "b.csv", ds.X, ds.y)
    loaded = harness.DatasetSpec(name="b", csv=str(path)).load()
    assert np.allclose(loaded.X, ds.X) and np.array_equal(loaded.y, ds.y)


def test_sample_streams_keyed_by_global_index():
    a = harness.sample_streams(42, [3, 7])
    assert a[1] == RngStream(42, (harness.TAG_SPIKES, 7))

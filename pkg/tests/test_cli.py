import json

import numpy as np
import pytest

from spate import cli, data, harness

FAST = ["--grid", '{"gain": [2.0, 4.0], "sigma": [0.0], "v_th": [0.5], "tau": [0.1]}']

QUALITY_HEADER = ("dataset,encoder,n_qubits,folds,CKTA_mean,CKTA_std,Fisher_mean,Fisher_std,"
                  "Inter/Intra_mean,Inter/Intra_std,Sil_mean,Sil_std,H_norm_mean,H_norm_std,"
                  "TVpair_mean,TVpair_std,TVpair_norm_mean,TVpair_norm_std")
QNN_HEADER = ("dataset,encoder,n_qubits,folds,accuracy_mean,accuracy_std,precision_mean,precision_std,"
              "recall_mean,recall_std,auc_mean,auc_std")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timestamp(text):
    return "\n".join(ln for ln in text.replace('"timestamp":', "\n\"timestamp\":").splitlines()
                     if not ln.lstrip().startswith('"timestamp"'))


def test_generate(tmp_path, capsys):
    path = tmp_path / "moons.csv"
    assert run(capsys, "generate", "--dataset", "moons", "--seed", "3", "--out", str(path))[0] == 0
    ds = data.load_csv(path)
    ref = data.gen_moons(300, data.MOONS_NOISE, 3)
    assert np.array_equal(ds.X, ref.X) and np.array_equal(ds.y, ref.y)


def test_encode_spate(capsys):
    code, out, _ = run(capsys, "encode", "--dataset", "moons", "--encoder", "spate", "--sample-index", "0")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["p"]) == 32 and doc["n_qubits"] == 5
    assert abs(sum(doc["p"]) - 1) < 1e-9
    sp = doc["spate_params"][0]
    assert len(sp["alpha"]) == 2 and np.array(sp["bins"]).shape == (2, 3)
    assert doc["manifest"]["config"]["seed"] == 42


def test_encode_amplitude_wine(real_data_dir, capsys):
    code, out, _ = run(capsys, "encode", "--encoder", "amplitude", "--csv", str(real_data_dir / "wine.csv"),
                       "--sample-index", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["d_enc"] == 8 and len(doc["p"]) == 256


def test_encode_real_dataset_from_data_dir(real_data_dir, capsys, monkeypatch, tmp_path):
    monkeypatch.setenv(data.DATA_DIR_ENV, str(real_data_dir))
    out_path = tmp_path / "e.json"
    code, _, _ = run(capsys, "encode", "--dataset", "iris", "--encoder", "angle", "--out", str(out_path))
    assert code == 0 and len(json.loads(out_path.read_text())["p"]) == 16


@pytest.mark.parametrize("argv,code", [
    (["encode", "--dataset", "moons", "--encoder", "basis"], 2),
    (["encode", "--dataset", "moons", "--encoder", "angle", "--sample-index", "999"], 2),
    (["quality", "--dataset", "moons", "--folds", "1"], 2),
    (["quality", "--dataset", "moons", "--encoders", "spate,foo"], 2),
    (["quality", "--dataset", "nope"], 2),
    (["frobnicate"], 2),
    (["quality", "--csv", "/nonexistent/file.csv"], 3),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_missing_real_dataset_exit_3(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv(data.DATA_DIR_ENV, str(tmp_path))
    assert run(capsys, "qnn", "--dataset", "iris")[0] == 3


def test_capacity_exit_4(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spate": {"n_t": 11}}))
    assert run(capsys, "encode", "--dataset", "moons", "--encoder", "spate", "--config", str(cfg))[0] == 4


def test_quality_outputs_and_determinism(tmp_path, capsys):
    args = ["quality", "--dataset", "moons", "--folds", "3", *FAST]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--jobs", "2")[0] == 0
    a_csv, b_csv = (tmp_path / "a.csv").read_text(), (tmp_path / "b.csv").read_text()
    a_json, b_json = (tmp_path / "a.json").read_text(), (tmp_path / "b.json").read_text()
    # only the timestamp and the output paths may differ
    norm = lambda s, stem: strip_timestamp(s).replace(str(tmp_path / stem), "OUT")
    assert norm(a_csv, "a") == norm(b_csv, "b")
    assert norm(a_json, "a") == norm(b_json, "b")
    body = [ln for ln in a_csv.splitlines() if not ln.startswith("#")]
    assert body[0] == QUALITY_HEADER and len(body) == 4
    doc = json.loads(a_json)
    assert doc["manifest"]["version"] and doc["manifest"]["outputs"][0].endswith("a.csv")
    assert "provenance" in doc and len(doc["reports"][0]["per_fold"]["CKTA"]) == 3


def test_rerun_from_manifest(tmp_path, capsys):
    first = tmp_path / "r1.json"
    assert run(capsys, "quality", "--dataset", "circles", "--folds", "2", "--encoders", "angle",
               "--format", "json", "--out", str(first))[0] == 0
    second = tmp_path / "r2.json"
    assert run(capsys, "quality", "--config", str(first), "--format", "json", "--out", str(second))[0] == 0
    a, b = json.loads(first.read_text()), json.loads(second.read_text())
    assert a["reports"] == b["reports"] and a["manifest"]["config"] == b["manifest"]["config"]


def test_qnn_schema(tmp_path, capsys):
    cfg = tmp_path / "fast.json"
    cfg.write_text(json.dumps({"train": {"steps": 2}, "dataset": {"n": 60}}))
    code, out, _ = run(capsys, "qnn", "--dataset", "moons", "--encoders", "spate", "--folds", "2",
                       "--config", str(cfg), *FAST, "--format", "csv")
    assert code == 0
    rows = harness.read_report_csv(out)
    assert len(rows) == 1 and ",".join(rows[0]) == QNN_HEADER


def test_table_output(capsys):
    code, out, _ = run(capsys, "quality", "--dataset", "moons", "--folds", "2", "--encoders", "angle")
    assert code == 0 and "angle" in out and "CKTA" in out

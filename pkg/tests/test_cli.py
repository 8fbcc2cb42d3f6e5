import csv
import json

import numpy as np
import pytest

from sdcil import cil
from sdcil.cli import EXIT_INPUT, EXIT_OK, EvalReport, TrialResult, main, map_grid
from sdcil.dataset import load_csv, make_toy, save_csv

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


@pytest.fixture(scope="module")
def blobs_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "blobs.csv"
    save_csv(make_toy("blobs", 60, seed=8), p)
    return p


def run(*argv):
    return main([str(a) for a in argv])


class TestTrain:
    def test_train_writes_model(self, blobs_csv, tmp_path, capsys):
        out = tmp_path / "model.json"
        assert run("train", blobs_csv, "--out", out, "--nu", "0.2") == EXIT_OK
        model = cil.load(out)
        assert len(model.classes) == 3 and len(model.pair_table) == 3
        text = capsys.readouterr().out
        assert "sv_fraction" in text and "3 classes, 3 pairwise" in text

    def test_order_reversed_identical_payloads(self, blobs_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run("train", blobs_csv, "--out", a) == EXIT_OK
        assert run("train", blobs_csv, "--out", b, "--order", "2,1,0") == EXIT_OK
        ma, mb = cil.load(a), cil.load(b)
        pa = {c.class_label: cil.class_payload(c) for c in ma.classes}
        pb = {c.class_label: cil.class_payload(c) for c in mb.classes}
        assert pa == pb
        assert {k: cil.pair_payload(v) for k, v in ma.pair_table.items()} == {
            k: cil.pair_payload(v) for k, v in mb.pair_table.items()
        }

    def test_missing_file_is_input_error(self, tmp_path):
        assert run("train", tmp_path / "nope.csv", "--out", tmp_path / "m.json") == EXIT_INPUT


class TestAddClass:
    def test_incremental_equals_from_scratch(self, blobs_csv, tmp_path):
        ds = load_csv(blobs_csv)
        partial = tmp_path / "partial.json"
        full = tmp_path / "full.json"
        newcls = tmp_path / "class2.csv"
        with open(newcls, "w", newline="") as f:
            w = csv.writer(f)
            for row in ds.rows_of(2):
                w.writerow([repr(float(v)) for v in row])

        # scaler comes from the full file in both paths; only classes differ
        assert run("train", blobs_csv, "--out", partial, "--order", "0,1") == EXIT_OK
        assert len(cil.load(partial).classes) == 2
        assert run("add-class", partial, newcls, "--label", "2") == EXIT_OK
        assert run("train", blobs_csv, "--out", full) == EXIT_OK

        m_inc, m_full = cil.load(partial), cil.load(full)
        assert {c.class_label: cil.class_payload(c) for c in m_inc.classes} == {
            c.class_label: cil.class_payload(c) for c in m_full.classes
        }
        assert {k: cil.pair_payload(v) for k, v in m_inc.pair_table.items()} == {
            k: cil.pair_payload(v) for k, v in m_full.pair_table.items()
        }

    def test_add_keeps_prior_bytes_and_counts(self, blobs_csv, tmp_path, capsys):
        model_p = tmp_path / "m.json"
        assert run("train", blobs_csv, "--out", model_p, "--order", "0,1") == EXIT_OK
        before = json.loads(model_p.read_text())
        ds = load_csv(blobs_csv)
        newcls = tmp_path / "c2.csv"
        with open(newcls, "w", newline="") as f:
            csv.writer(f).writerows([[repr(float(v)) for v in r] for r in ds.rows_of(2)])
        out2 = tmp_path / "m2.json"
        assert run("add-class", model_p, newcls, "--label", "2", "--out", out2) == EXIT_OK
        after = json.loads(out2.read_text())
        assert len(after["classes"]) == 3 and len(after["pairs"]) == 3
        assert after["classes"][:2] == before["classes"]
        assert after["pairs"][0] == before["pairs"][0]
        assert "added class 2" in capsys.readouterr().out

    def test_duplicate_label_exit_code(self, blobs_csv, tmp_path):
        model_p = tmp_path / "m.json"
        run("train", blobs_csv, "--out", model_p)
        ds = load_csv(blobs_csv)
        newcls = tmp_path / "dup.csv"
        with open(newcls, "w", newline="") as f:
            csv.writer(f).writerows([[repr(float(v)) for v in r] for r in ds.rows_of(0)])
        assert run("add-class", model_p, newcls, "--label", "0") == EXIT_INPUT


class TestPredictCmd:
    def test_labeled_file_reports_accuracy(self, blobs_csv, tmp_path, capsys):
        model_p = tmp_path / "m.json"
        run("train", blobs_csv, "--out", model_p)
        assert run("predict", model_p, blobs_csv) == EXIT_OK
        err = capsys.readouterr().err
        assert "accuracy" in err


class TestEvaluate:
    def test_deterministic_given_seed(self, blobs_csv, tmp_path, capsys):
        r1 = tmp_path / "r1.csv"
        r2 = tmp_path / "r2.csv"
        assert run("evaluate", blobs_csv, "--method", "knn", "--trials", "3",
                   "--seed", "5", "--out", r1) == EXIT_OK
        assert run("evaluate", blobs_csv, "--method", "knn", "--trials", "3",
                   "--seed", "5", "--out", r2) == EXIT_OK
        strip_timing = lambda p: [row[:-1] for row in csv.reader(open(p))]
        assert strip_timing(r1) == strip_timing(r2)

    def test_report_csv_schema(self, blobs_csv, tmp_path):
        out = tmp_path / "rep.csv"
        run("evaluate", blobs_csv, "--method", "sdcil", "--trials", "2", "--out", out)
        with open(out) as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["method", "dataset", "trial", "seed", "accuracy",
                           "unique_pos", "multi_pos", "none_pos", "train_seconds"]
        assert len(rows) == 3
        accs = [float(r[4]) for r in rows[1:]]
        assert all(0.0 <= a <= 1.0 for a in accs)

    def test_mean_std_recomputable(self):
        trials = tuple(
            TrialResult(seed=i, accuracy=a, unique_pos=0, multi_pos=0, none_pos=0,
                        train_seconds=0.0)
            for i, a in enumerate([0.5, 0.75, 1.0])
        )
        rep = EvalReport(method="knn", dataset="x", trials=trials)
        assert abs(rep.mean_accuracy - np.mean([0.5, 0.75, 1.0])) < 1e-12
        assert abs(rep.std_accuracy - np.std([0.5, 0.75, 1.0], ddof=1)) < 1e-12


class TestMap:
    @pytest.fixture(scope="class")
    def model_path(self, blobs_csv, tmp_path_factory):
        p = tmp_path_factory.mktemp("map") / "m.json"
        assert run("train", blobs_csv, "--out", p) == EXIT_OK
        return p

    def test_raster_outputs(self, model_path, tmp_path):
        prefix = tmp_path / "map"
        assert run("map", model_path, "--bounds=-3,9,-3,9", "--res", "40,30",
                   "--out", prefix) == EXIT_OK
        labels = (tmp_path / "map_labels.pgm").read_text().split()
        assert labels[0] == "P2"
        assert labels[1:3] == ["40", "30"]
        vals = set(map(int, labels[4:]))
        assert vals == {0, 1, 2}  # every class appears on this window
        regions = (tmp_path / "map_regions.pgm").read_text().split()
        assert set(map(int, regions[4:])) <= {0, 1, 2}
        with open(tmp_path / "map_svs.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["x", "y", "label"]
        assert len(rows) > 3

    def test_grid_agrees_with_predict(self, model_path):
        model = cil.load(model_path)
        bounds, res = (-3.0, 9.0, -3.0, 9.0), (25, 20)
        labels, regions, xs, ys = map_grid(model, bounds, res)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            r = int(rng.integers(0, res[1]))
            c = int(rng.integers(0, res[0]))
            detail = cil.predict_detail(model, np.array([xs[c], ys[r]]))
            assert labels[r, c] == detail.label

    def test_deep_centroid_cell(self, model_path, blobs_csv):
        model = cil.load(model_path)
        ds = load_csv(blobs_csv)
        from sdcil.ocsvm import decision_values

        rows = ds.rows_of(0)
        deep = rows[int(np.argmax(decision_values(model.class_model(0),
                                                  model.scaler.transform(rows))))]
        labels, _, xs, ys = map_grid(model, (deep[0] - .1, deep[0] + .1, deep[1] - .1, deep[1] + .1), (3, 3))
        assert labels[1, 1] == 0

    def test_single_cell_raster(self, model_path, tmp_path):
        prefix = tmp_path / "one"
        assert run("map", model_path, "--bounds", "0,1,0,1", "--res", "1,1",
                   "--out", prefix) == EXIT_OK
        assert (tmp_path / "one_labels.pgm").exists()

    def test_wrong_dimension_exit(self, tmp_path):
        p = tmp_path / "hi_d.csv"
        rng = np.random.default_rng(0)
        with open(p, "w", newline="") as f:
            w = csv.writer(f)
            for i in range(60):
                w.writerow([repr(float(v)) for v in rng.normal(size=3)] + [i % 2])
        model_p = tmp_path / "m3.json"
        assert run("train", p, "--out", model_p) == EXIT_OK
        assert run("map", model_p, "--bounds", "0,1,0,1", "--res", "4,4",
                   "--out", tmp_path / "x") == EXIT_INPUT


class TestBenchAndGenerate:
    def test_generate_shapes(self, tmp_path):
        out = tmp_path / "rings.csv"
        assert run("generate", "--shape", "rings", "--n-per-class", "50",
                   "--seed", "3", "--out", out) == EXIT_OK
        ds = load_csv(out)
        assert ds.n == 100 and len(ds.class_ids) == 2

    def test_bench_skips_missing_datasets(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        # only knn on the always-available datasets; missing CSVs are skipped
        assert run("bench", "--datasets", tmp_path, "--methods", "knn",
                   "--trials", "2", "--out", out) == EXIT_OK
        captured = capsys.readouterr()
        assert "skipping seeds" in captured.err
        assert "skipping pima" in captured.err
        assert "skipping transfusion" in captured.err
        with open(out) as f:
            rows = list(csv.reader(f))
        datasets = {r[0] for r in rows[1:]}
        assert datasets == {"iris", "waveform"}
        for r in rows[1:]:
            assert r[1] == "knn"
            assert 0.0 <= float(r[2]) <= 100.0

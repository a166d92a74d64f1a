import json

import numpy as np
import pytest

from otdistill import io as fio
from otdistill.cli import main
from otdistill.core import validate_distribution


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("OTDISTILL_SEED", raising=False)
    return tmp_path


def gen(workdir, name="pts.csv", geometry="gaussian", n=60, classes=2, seed=3):
    path = workdir / name
    assert main(["gen-data", "--geometry", geometry, "--n", str(n), "--classes", str(classes),
                 "--seed", str(seed), "--out", str(path)]) == 0
    return path


def single(workdir, name, points, weights=None):
    path = workdir / name
    fio.write_points_csv(path, [validate_distribution(points, weights, 0)])
    return path


def last_float(capsys):
    return float(capsys.readouterr().out.strip().splitlines()[-1])


class TestGenData:
    def test_layout(self, workdir):
        path = gen(workdir)
        header = path.read_text().splitlines()[0]
        assert header == "label,weight,x0,x1"
        groups = fio.read_labeled_csv(path)
        assert [g.label for g in groups] == [0, 1] and all(g.n == 30 for g in groups)
        assert (workdir / "pts.csv.manifest.json").exists()

    def test_unknown_geometry(self, workdir, capsys):
        assert main(["gen-data", "--geometry", "spiral", "--out", "x.csv"]) == 3
        assert "--geometry" in capsys.readouterr().err

    def test_bad_flag(self, workdir):
        assert main(["gen-data", "--n", "oops", "--out", "x.csv"]) == 3
        assert main(["no-such-command"]) == 3

    def test_missing_input(self, workdir):
        assert main(["distance", "--source", "nope.csv", "--target", "nope.csv"]) == 2


class TestDistance:
    def test_value_and_plan(self, workdir, capsys):
        a = single(workdir, "a.csv", [[0.0, 0.0]])
        b = single(workdir, "b.csv", [[3.0, 4.0]])
        assert main(["distance", "--source", str(a), "--target", str(b), "--p", "2",
                     "--emit-plan", "plan.csv"]) == 0
        assert last_float(capsys) == pytest.approx(5.0)
        assert (workdir / "plan.csv").read_text().splitlines() == ["i,j,mass", "0,0,1"]

    def test_plan_marginals(self, workdir, rng, capsys):
        a = single(workdir, "a.csv", rng.normal(size=(6, 2)), rng.dirichlet(np.ones(6)))
        b = single(workdir, "b.csv", rng.normal(size=(4, 2)), rng.dirichlet(np.ones(4)))
        assert main(["distance", "--source", str(a), "--target", str(b), "--emit-plan", "plan.csv"]) == 0
        rows = np.loadtxt(workdir / "plan.csv", delimiter=",", skiprows=1, ndmin=2)
        assert np.all(rows[:, 2] > 0)
        src = fio.read_points_csv(a)
        out = np.zeros(6)
        np.add.at(out, rows[:, 0].astype(int), rows[:, 2])
        np.testing.assert_allclose(out, src.weights, atol=1e-9)


class TestMetric:
    def test_equal_mean_linear(self, workdir, capsys):
        a = single(workdir, "a.csv", [[1.0, 0.0], [-1.0, 0.0]])
        b = single(workdir, "b.csv", [[0.0, 3.0], [0.0, -3.0]])
        assert main(["metric", "--kind", "mmd-linear", "--source", str(a), "--target", str(b)]) == 0
        assert abs(last_float(capsys)) <= 1e-10
        assert main(["metric", "--kind", "mmd-rbf", "--source", str(a), "--target", str(b)]) == 0
        assert last_float(capsys) > 1e-6
        assert main(["metric", "--kind", "w2", "--source", str(a), "--target", str(b)]) == 0
        assert last_float(capsys) > 1e-3
        assert (workdir / "otdistill-metric.manifest.json").exists()

    def test_bad_gamma(self, workdir):
        a = single(workdir, "a.csv", [[0.0, 0.0]])
        assert main(["metric", "--kind", "mmd-rbf", "--gamma", "-1", "--source", str(a), "--target", str(a)]) == 3

    def test_seed_env(self, workdir, rng, capsys, monkeypatch):
        a = single(workdir, "a.csv", rng.normal(size=(8, 3)))
        b = single(workdir, "b.csv", rng.normal(size=(8, 3)) + 1)
        base = ["metric", "--kind", "sw1", "--projections", "5", "--source", str(a), "--target", str(b)]
        assert main(base + ["--seed", "11"]) == 0
        explicit = last_float(capsys)
        monkeypatch.setenv("OTDISTILL_SEED", "11")
        assert main(base) == 0
        assert last_float(capsys) == explicit
        assert main(base + ["--seed", "12"]) == 0
        assert last_float(capsys) != explicit


class TestBarycenter:
    def test_json(self, workdir):
        pts = gen(workdir)
        assert main(["barycenter", "--input", str(pts), "--per-label", "--m", "4", "--k", "5",
                     "--seed", "7", "--out", "bary.json"]) == 0
        out = json.loads((workdir / "bary.json").read_text())
        assert [o["label"] for o in out] == [0, 1]
        for o in out:
            assert len(o["atoms"]) == 4 and len(o["objective_trace"]) == 5
            assert abs(sum(o["weights"]) - 1) <= 1e-9


class TestCompareMetrics:
    def test_grids(self, workdir):
        pts = gen(workdir, geometry="circles-crosses", n=80)
        assert main(["compare-metrics", "--input", str(pts), "--grid", "16", "--out", "grids"]) == 0
        for name in ("kl_forward", "mmd_mixture", "wasserstein", "input_label_0", "input_label_1"):
            lines = (workdir / "grids" / f"{name}.csv").read_text().splitlines()
            assert lines[0] == "x,y,density" and len(lines) == 257
            assert fio.read_grid_csv(workdir / "grids" / f"{name}.csv").sum() == pytest.approx(1.0)

    def test_zero_grid(self, workdir):
        pts = gen(workdir)
        assert main(["compare-metrics", "--input", str(pts), "--grid", "0", "--out", "g"]) == 3

    def test_single_label(self, workdir):
        pts = gen(workdir, classes=1, n=20)
        assert main(["compare-metrics", "--input", str(pts), "--grid", "8", "--out", "g"]) == 1


def write_config(workdir, **kw):
    cfg = {"lambda": 0.0, "lr": 0.1, "steps": 300, "m_per_class": 1, "seed": 5,
           "encoder": {"kind": "identity"}}
    cfg.update(kw)
    path = workdir / "distill.json"
    path.write_text(json.dumps(cfg))
    return path


class TestDistill:
    def test_mean(self, workdir):
        pts = gen(workdir, n=40)
        cfg = write_config(workdir)
        assert main(["distill", "--input", str(pts), "--config", str(cfg), "--out", "d.json"]) == 0
        out = json.loads((workdir / "d.json").read_text())
        for cls, g in zip(out["classes"], fio.read_labeled_csv(pts)):
            np.testing.assert_allclose(cls["synthetic"][0], g.mean(), atol=1e-4)

    def test_seed_override(self, workdir):
        pts = gen(workdir, n=40)
        cfg = write_config(workdir, m_per_class=3, steps=5, encoder={"d_f": 3, "seed": 1})
        assert main(["distill", "--input", str(pts), "--config", str(cfg), "--out", "a.json"]) == 0
        assert json.loads((workdir / "a.json").read_text())["seed"] == 5
        assert main(["distill", "--input", str(pts), "--config", str(cfg), "--seed", "9", "--out", "b.json"]) == 0
        assert json.loads((workdir / "b.json").read_text())["seed"] == 9


def test_check_bounds(workdir):
    assert main(["check-bounds", "--trials", "10", "--seed", "2", "--out", "b.csv"]) == 0
    lines = (workdir / "b.csv").read_text().splitlines()
    assert lines[0] == "W1,MMD_rbf,gap,L_bound,rkhs_bound,ratio" and len(lines) == 11


def test_manifest_replay(workdir):
    pts = gen(workdir)
    first = pts.read_bytes()
    pts.unlink()
    assert main(["--from-manifest", "pts.csv.manifest.json"]) == 0
    assert pts.read_bytes() == first


def test_barycenter_two_point(workdir):
    path = single(workdir, "two.csv", [[0.0], [2.0]])
    assert main(["barycenter", "--input", str(path), "--m", "1", "--k", "3", "--out", "b.json"]) == 0
    (out,) = json.loads((workdir / "b.json").read_text())
    assert out["atoms"] == [[1.0]] and out["weights"] == [1.0]


def test_compare_metrics_identical_groups(workdir, rng):
    pts = rng.normal(size=(25, 2))
    path = workdir / "same.csv"
    fio.write_points_csv(path, [validate_distribution(pts, None, 0), validate_distribution(pts, None, 1)])
    assert main(["compare-metrics", "--input", str(path), "--grid", "20", "--out", "g"]) == 0
    common = fio.read_grid_csv(workdir / "g" / "input_label_0.csv")
    for name in ("kl_forward", "mmd_mixture", "wasserstein"):
        np.testing.assert_allclose(fio.read_grid_csv(workdir / "g" / f"{name}.csv"), common, atol=1e-6)

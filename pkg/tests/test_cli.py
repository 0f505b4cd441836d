import json

import numpy as np
import pytest

from eaclust import cli, mixture
from eaclust.data import Dataset, fixture_path, sample_mixture, write_csv, x2_like_spec
from eaclust.experiments import RunReport

WINE = str(fixture_path("wine"))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    report = json.loads(out)
    assert (code == 0) == ("error" not in report)
    return code, report


@pytest.fixture(scope="module")
def wine_ea_report():
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["fit", "ea", "--data", WINE, "--g", "3", "--clones", "10", "--stagnation", "3",
                         "--seed", "1", "--scale"])
    assert code == 0
    return json.loads(buf.getvalue())


def test_fit_ea_wine(wine_ea_report):
    r = wine_ea_report
    assert r["misclassified"] == 1
    assert round(r["ari"], 3) == 0.982
    assert r["free_params"] == 314
    assert r["config"]["clones"] == 10 and r["config"]["stagnation"] == 3


def test_fit_ea_loglik_self_consistent(wine_ea_report):
    from eaclust.data import load_fixture

    data = load_fixture("wine", standardize=True)
    from eaclust import kernels

    labels = np.array(wine_ea_report["final_labels"], dtype=np.intp)
    f = kernels.labelled_fitness(np.ascontiguousarray(data.observations), labels, 3)
    assert wine_ea_report["log_likelihood"] == f
    assert f == pytest.approx(mixture.fitness(data, labels, 3), rel=1e-12)
    assert wine_ea_report["bic"] == mixture.bic(f, 314, 178)


def test_fit_report_round_trip(wine_ea_report):
    rep = RunReport.from_dict(wine_ea_report)
    assert json.loads(rep.to_json()) == wine_ea_report
    assert RunReport.from_json(rep.to_json()) == rep


def test_fit_deterministic(capsys):
    argv = ["fit", "ea", "--data", "wine", "--g", "3", "--seed", "4", "--scale"]
    _, a = run_json(capsys, *argv)
    _, b = run_json(capsys, *argv, "--threads", "3")
    a.pop("wall_time_ms"), b.pop("wall_time_ms")
    a["config"].pop("threads", None), b["config"].pop("threads", None)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


@pytest.mark.parametrize("method", ["em", "kmeans", "kmedoids", "cem"])
def test_fit_other_methods(capsys, method):
    code, r = run_json(capsys, "fit", method, "--data", "wine", "--g", "3", "--scale", "--seed", "2")
    assert code == 0 and len(r["final_labels"]) == 178 and r["ari"] > 0.7


def test_fit_kmeans_banknote(capsys):
    code, r = run_json(capsys, "fit", "kmeans", "--data", "banknote", "--g", "2")
    if code == 0:
        assert r["confusion"]["counts"] in ([[100, 0], [8, 92]], [[0, 100], [92, 8]])
        assert round(r["ari"], 3) == 0.846
    else:
        assert code == 3 and r["error"]["type"] == "DataError"


def test_fit_infeasible_init(capsys, tmp_path):
    # n=8 < G(p+1)=9 for p=2, G=3: no labeling is feasible
    X = np.random.default_rng(0).normal(size=(8, 2))
    path = tmp_path / "tiny.csv"
    write_csv(Dataset(X), path)
    code, r = run_json(capsys, "fit", "ea", "--data", str(path), "--g", "3")
    assert code == 4 and r["error"]["type"] == "InfeasibleLabelingError"


def test_fit_missing_file(capsys):
    code, r = run_json(capsys, "fit", "em", "--data", "/nonexistent.csv", "--g", "2")
    assert code == 3


def test_fit_table_format(capsys):
    code, out = run(capsys, "fit", "kmeans", "--data", "wine", "--g", "3", "--scale", "--format", "table")
    assert code == 0 and "confusion:" in out and "ari:" in out


def test_fit_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout = run(capsys, "fit", "kmedoids", "--data", "wine", "--g", "3", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["method"] == "kmedoids"


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["fit", "bogus"])
    assert e.value.code == 2
    code, r = run_json(capsys, "fit", "ea", "--data", "wine", "--g", "1")
    assert code == 2


def test_bic_single_component_prefers_g1(capsys, tmp_path):
    wins = 0
    for seed in range(10):
        path = tmp_path / f"n{seed}.csv"
        write_csv(Dataset(np.random.default_rng(seed).normal(size=(500, 1))), path)
        code, r = run_json(capsys, "bic", "--data", str(path), "--g-min", "1", "--g-max", "3", "--method", "em")
        assert code == 0
        best = [row for row in r["rows"] if row["best"]]
        assert len(best) == 1 and best[0] is r["rows"][0]
        wins += best[0]["G"] == 1
        bics = [row["bic"] for row in r["rows"] if row["bic"] is not None]
        assert bics == sorted(bics, reverse=True)
    assert wins >= 8


def test_bic_single_row_matches_fit(capsys):
    _, sweep = run_json(capsys, "bic", "--data", "wine", "--scale", "--g-min", "3", "--g-max", "3", "--seed", "1")
    _, fit = run_json(capsys, "fit", "em", "--data", "wine", "--scale", "--g", "3", "--seed", "1")
    assert len(sweep["rows"]) == 1
    assert sweep["rows"][0]["bic"] == fit["bic"]


def test_bic_wine_free_params(capsys):
    _, r = run_json(capsys, "bic", "--data", "wine", "--scale", "--g-min", "2", "--g-max", "4", "--seed", "1")
    rho = {row["G"]: row["free_params"] for row in r["rows"] if row["error"] is None}
    for G, v in rho.items():
        assert v == (G - 1) + 13 * G + 91 * G
    assert rho.get(3) == 314


def test_bic_records_per_g_failure(capsys, tmp_path):
    X = np.random.default_rng(1).normal(size=(9, 2))
    path = tmp_path / "small.csv"
    write_csv(Dataset(X), path)
    code, r = run_json(capsys, "bic", "--data", str(path), "--g-min", "1", "--g-max", "4")
    assert code == 0
    assert r["rows"][0]["G"] == 1 and r["rows"][0]["best"]
    assert any(row["error"] for row in r["rows"])


def test_evaluate(capsys, tmp_path, wine_ea_report):
    rep = tmp_path / "ea.json"
    rep.write_text(json.dumps(wine_ea_report))
    code, r = run_json(capsys, "evaluate", "--labels", str(rep), "--data", "wine")
    assert code == 0 and round(r["ari"], 3) == 0.982 and r["misclassified"] == 1

    labels = np.array(wine_ea_report["final_labels"])
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("\n".join(map(str, labels)))
    b.write_text("\n".join(map(str, (labels + 1) % 3)))
    _, same = run_json(capsys, "evaluate", "--labels", str(a), "--truth", str(a))
    assert same["ari"] == 1.0
    _, shuffled = run_json(capsys, "evaluate", "--labels", str(b), "--data", "wine")
    assert shuffled["ari"] == r["ari"]


def test_evaluate_length_mismatch(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("0\n1\n1\n")
    b.write_text("0\n1\n")
    code, r = run_json(capsys, "evaluate", "--labels", str(a), "--truth", str(b))
    assert code == 2


def test_plot(capsys, tmp_path):
    ds = sample_mixture(x2_like_spec(n=300, seed=0))
    path = tmp_path / "x2.csv"
    write_csv(Dataset(ds.observations, ds.truth.astype(str), ["x1", "x2"]), path)
    code, _ = run(capsys, "fit", "ea", "--data", str(path), "--g", "3", "--seed", "0", "--out", str(tmp_path / "fit.json"))
    assert code == 0
    svgs = []
    for k in range(2):
        svg = tmp_path / f"p{k}.svg"
        code, r = run_json(capsys, "plot", "--data", str(path), "--labels", str(tmp_path / "fit.json"),
                           "--x", "x1", "--y", "x2", "--svg", str(svg))
        assert code == 0 and r["groups"] == 3
        svgs.append(svg.read_bytes())
    assert svgs[0] == svgs[1]
    assert b"<svg" in svgs[0] and b'version="1.1"' in svgs[0]

    one = tmp_path / "one.txt"
    one.write_text("0\n" * 300)
    code, r = run_json(capsys, "plot", "--data", str(path), "--labels", str(one), "--x", "x1", "--y", "x2",
                       "--svg", str(tmp_path / "one.svg"))
    assert code == 0 and r["groups"] == 1

    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, r = run_json(capsys, "plot", "--data", str(path), "--labels", str(empty), "--x", "x1", "--y", "x2",
                       "--svg", str(tmp_path / "e.svg"))
    assert code == 3
    code, r = run_json(capsys, "plot", "--data", str(path), "--x", "nope", "--y", "x2", "--svg",
                       str(tmp_path / "b.svg"))
    assert code == 3


def test_reproduce_small_grid(capsys):
    code, r = run_json(capsys, "reproduce", "--data", "wine", "--scale", "--g", "3", "--seed", "1",
                       "--stagnation-grid", "3", "--clones-grid", "10,20")
    assert code == 0 and len(r["runs"]) == 2
    assert all(run["misclassified"] == 1 for run in r["runs"])
    assert all(run["log_likelihood"] >= r["em"]["log_likelihood"] for run in r["runs"])

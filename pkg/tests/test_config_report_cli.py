import json
import subprocess
import sys

import numpy as np
import pytest

from modelchoice import __version__, cli
from modelchoice.config import Config, ConfigError, shipped_config
from modelchoice.joint import ModelPairConfig
from modelchoice.models import ModelSpec, PriorSpec
from modelchoice.report import ComparisonReport, HistogramData, compare, emit, shared_histograms

SHIPPED = ["fig2", "fig2_datacentered", "embedded", "consistency", "consistency_null"]


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_config_round_trip(name):
    cfg = Config.load(shipped_config(name))
    text = cfg.to_text()
    again = Config.from_text(text)
    assert again.raw == cfg.raw and again.to_text() == text


def test_fig2_config_contents():
    cfg = Config.load(shipped_config("fig2"))
    pair = cfg.pair()
    assert pair.model1.prior == PriorSpec.beta(1, 1) and pair.model1.family.trials == 5
    assert pair.model2.prior == PriorSpec.gamma(1, 1)
    assert cfg.dataset().observations == (3.0,)
    assert cfg.seed == 42


def test_config_errors():
    with pytest.raises(ConfigError):
        Config.from_text("bogus: 1\n")
    with pytest.raises(ConfigError):
        Config.from_text("- a\n- b\n")
    with pytest.raises(ConfigError):
        Config.from_text("seed: [1\n")
    with pytest.raises(ConfigError):
        Config.from_text("models:\n  - family: poisson\n").pair()
    with pytest.raises(ConfigError):
        Config.from_text("models:\n  - {family: weibull, prior: {kind: gamma, shape: 1, rate: 1}}\n")
    cfg = Config.from_text(
        "truth: {family: gaussian, mean: 0.5, variance: 1}\n"
        "models:\n"
        "  - {family: gaussian, variance: 1, prior: {kind: gaussian, mean: 0, variance: 10}}\n"
        "  - {family: gaussian, variance: 1, prior: {kind: point_mass, value: 0}}\n"
        "n_grid: []\n"
    )
    with pytest.raises(ConfigError):
        cfg.scenario()


def test_embedded_cases():
    cases = Config.load(shipped_config("embedded")).embedded_cases()
    assert [m["xbar"] for _, _, m in cases] == [0.2, 0.5, 1.0]
    assert all(d.n == 10 for _, d, _ in cases)


PAIR = ModelPairConfig(ModelSpec.binomial(5, PriorSpec.beta(1, 1), "binomial"),
                       ModelSpec.poisson(PriorSpec.gamma(1, 1), "poisson"))


def test_compare_report_fields():
    report, product, joint = compare(PAIR, [3], 5000, 1)
    assert report.bayes_factor == pytest.approx(8 / 3)
    assert report.post_prob1 + report.post_prob2 == pytest.approx(1.0)
    assert report.decision["prob_f1_beats_f2"] == report.pr_lr_gt1_joint
    assert report.wall_time is None and report.version == __version__
    assert len(product) == len(joint) == 5000


def test_emit_report_json_field_set(tmp_path):
    report, _, _ = compare(PAIR, [3], 2000, 2)
    path = emit(report, tmp_path / "r", "json")
    record = json.loads(path.read_text())
    expected = {f for f in ComparisonReport.__dataclass_fields__}
    assert set(record) == expected
    assert next(iter(record)) == "version"


def test_emit_report_csv(tmp_path):
    report, _, _ = compare(PAIR, [3], 2000, 2)
    text = emit(report, tmp_path / "r", "csv").read_text()
    assert text.startswith(f"# version: {__version__}\n")
    assert "dic1.p_d," in text


def test_emit_float_formatting(tmp_path):
    path = emit((["x"], [(1 / 3,)]), tmp_path / "t", "csv")
    assert path.read_text().splitlines()[-1] == "0.333333333333"
    with pytest.raises(ValueError):
        emit({}, tmp_path / "t", "xml")


def test_histograms_share_bins(tmp_path):
    rng = np.random.default_rng(0)
    hists = shared_histograms({"a": rng.normal(size=10_000), "b": rng.normal(1, 2, size=10_000)})
    assert len(hists[0].edges) == 201
    assert np.array_equal(hists[0].edges, hists[1].edges)
    for h in hists:
        assert h.total + h.below + h.above == 10_000
    lines = emit(hists[0], tmp_path / "h").read_text().splitlines()
    assert lines[0].startswith("# version")
    header = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    assert lines[header] == "edge,count" and len(lines) - header - 1 == 200


def test_histogram_validation():
    with pytest.raises(ValueError):
        HistogramData("x", np.array([0.0, 1.0]), np.array([3]), 4)
    with pytest.raises(ValueError):
        HistogramData("x", np.array([1.0, 0.0]), np.array([3]), 3)


def test_degenerate_histogram_range():
    [h] = shared_histograms({"c": np.zeros(10)})
    assert h.total == 10


# CLI ----------------------------------------------------------------------

def test_cli_fig2_outputs_and_failed_direction(tmp_path, capsys):
    code = cli.main(["fig2", "--draws", "20000", "--out", str(tmp_path)])
    assert code == 1  # joint < product under the shipped priors
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig2_direction.json", "fig2_hist_joint.csv", "fig2_hist_product.csv", "fig2_report.json"]
    direction = json.loads((tmp_path / "fig2_direction.json").read_text())
    assert direction["verdict"] == "FAIL"
    assert "check failed" in capsys.readouterr().err


def test_cli_fig2_passes_with_favourable_config(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "data: [3]\nmodels:\n"
        "  - {name: binomial, family: binomial, trials: 5, prior: {kind: beta, a: 2, b: 2}}\n"
        "  - {name: poisson, family: poisson, prior: {kind: gamma, shape: 1, rate: 1}}\n"
    )
    assert cli.main(["fig2", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0


def test_cli_fig2_csv_format(tmp_path):
    cli.main(["fig2", "--draws", "2000", "--format", "csv", "--out", str(tmp_path)])
    assert (tmp_path / "fig2_report.csv").exists()


def test_cli_usage_errors(tmp_path):
    assert cli.main(["fig2", "--draws", "999", "--out", str(tmp_path)]) == 2
    assert cli.main(["lindley", "--tau", "", "--out", str(tmp_path)]) == 2
    assert cli.main(["lindley", "--tau", "1,1", "--out", str(tmp_path)]) == 2
    assert cli.main(["fig2", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["nosuch"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["embedded", "--draws", "0"])
    assert exc.value.code == 2


def test_cli_empty_grid_config(tmp_path):
    cfg = tmp_path / "c.yaml"
    text = shipped_config("consistency").read_text()
    cfg.write_text(text.replace("n_grid: [10, 50, 200, 500]", "n_grid: []"))
    assert "n_grid: []" in cfg.read_text()
    assert cli.main(["consistency", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["predcheck", "--out", str(blocker / "sub")]) == 1


def test_cli_predcheck(tmp_path):
    assert cli.main(["predcheck", "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "predcheck.json").read_text())
    assert rec["probability"] == "0.447481" and rec["verdict"] == "PASS"
    cli.main(["predcheck", "--threshold", "20", "--out", str(tmp_path)])
    assert json.loads((tmp_path / "predcheck.json").read_text())["probability"] == "1.000000"
    cli.main(["predcheck", "--prior-a", "2", "--prior-b", "2", "--out", str(tmp_path)])
    rec = json.loads((tmp_path / "predcheck.json").read_text())
    assert rec["probability"] == "0.294633" and "verdict" not in rec


def test_cli_lindley(tmp_path):
    cli.main(["lindley", "--tau", "100,1,10", "--out", str(tmp_path)])
    lines = (tmp_path / "lindley.csv").read_text().splitlines()
    assert "# monotone: increasing" in lines
    rows = [line for line in lines if not line.startswith("#")][1:]
    assert [r.split(",")[0] for r in rows] == ["1", "10", "100"]
    assert rows[0].split(",")[1].startswith("1.1013906")
    cli.main(["lindley", "--tau", "5", "--out", str(tmp_path)])
    assert "# monotone: n/a" in (tmp_path / "lindley.csv").read_text()


def test_cli_embedded(tmp_path):
    assert cli.main(["embedded", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "embedded.csv").read_text()
    row = [line for line in text.splitlines() if line.startswith("10,0.5,")][0].split(",")
    assert float(row[3]) == pytest.approx(0.1138, abs=0.006)
    assert row[-1] == "PASS"


def test_cli_module_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "modelchoice.cli", "predcheck", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    res = subprocess.run([sys.executable, "-m", "modelchoice.cli", "--version"], capture_output=True, text=True)
    assert __version__ in res.stdout

import csv
import io
import json
import shutil

import numpy as np
import pytest

from wordadj.cli import (FIT_TABLE_SCHEMA, METRICS_SCHEMA, REPORT_SCHEMA, RunConfig, main,
                         validate_config)
from wordadj.growthcurve import GrowthCurve
from wordadj.model import FitParams, l_fit


def rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


def run(argv):
    err = io.StringIO()
    rc = main(argv, stderr=err)
    return rc, [json.loads(x) for x in err.getvalue().splitlines() if x.strip()]


def test_validate_missing_input(tmp_path):
    missing = tmp_path / "nope.txt"
    probs = validate_config(RunConfig("curve", texts=[missing], out_dir=tmp_path))
    assert len(probs) == 1 and str(missing) in probs[0]


def test_validate_bands_not_ascending(fixtures_dir, tmp_path):
    cfg = RunConfig("curve", texts=[fixtures_dir / "alice29.txt"], out_dir=tmp_path,
                    dtau_bands="100000:1000,10000:100")
    probs = validate_config(cfg)
    assert probs and all("shift" in p for p in probs)


def test_validate_ok(fixtures_dir, tmp_path):
    cfg = RunConfig("report", manifest=fixtures_dir / "manifest.jsonl", out_dir=tmp_path / "new")
    assert validate_config(cfg) == []
    assert cfg == RunConfig("report", manifest=fixtures_dir / "manifest.jsonl",
                            out_dir=tmp_path / "new")


def test_validate_synth_and_no_input(tmp_path):
    assert validate_config(RunConfig("curve", out_dir=tmp_path))
    assert validate_config(RunConfig("synth", out_dir=tmp_path, delta=1.5))
    assert validate_config(RunConfig("synth", out_dir=tmp_path)) == []


def test_config_error_exit(tmp_path):
    rc, errs = run(["curve", "--text", str(tmp_path / "missing.txt"), "--out-dir", str(tmp_path)])
    assert rc == 2 and errs[0]["error"] == "config"


def test_curve_both_modes_share_grid(fixtures_dir, tmp_path):
    rc, errs = run(["curve", "--text", str(fixtures_dir / "alice29.txt"), "--mode", "both",
                    "--max-n", "120", "--out-dir", str(tmp_path)])
    assert rc == 0 and errs == []
    a = GrowthCurve.from_csv(tmp_path / "curves" / "alice29.tokens.csv")
    b = GrowthCurve.from_csv(tmp_path / "curves" / "alice29.words.csv")
    assert a.n.tolist() == b.n.tolist() and a.n[-1] == 120
    assert (tmp_path / "curves" / "alice29.tokens.csv").read_text().startswith("# wordadj-curve")


def test_warm_cache_rerun_is_byte_identical(fixtures_dir, tmp_path):
    argv = ["curve", "--text", str(fixtures_dir / "alice29.txt"), "--max-n", "80",
            "--out-dir", str(tmp_path)]
    assert run(argv)[0] == 0
    out = tmp_path / "curves" / "alice29.tokens.csv"
    first = out.read_bytes()
    assert any((tmp_path / "cache").iterdir())
    out.unlink()
    assert run(argv)[0] == 0
    assert out.read_bytes() == first
    shutil.rmtree(tmp_path / "cache")
    assert run(argv + ["--no-cache"])[0] == 0
    assert out.read_bytes() == first and not (tmp_path / "cache").exists()


def test_module_error_keeps_partial_results(fixtures_dir, tmp_path):
    (tmp_path / "tiny.txt").write_text("one two three.\n", encoding="utf-8")
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(
        json.dumps({"id": "alice29", "path": str(fixtures_dir / "alice29.txt"), "language": "en"})
        + "\n" + json.dumps({"id": "tiny", "path": "tiny.txt", "language": "en"})
        + "\n", encoding="utf-8")
    rc, errs = run(["curve", "--manifest", str(manifest), "--checkpoints", "2,5,10,40",
                    "--out-dir", str(tmp_path / "out")])
    assert rc == 1
    assert [e["text_id"] for e in errs] == ["tiny"] and "error" in errs[0]
    assert (tmp_path / "out" / "curves" / "alice29.tokens.csv").is_file()


def test_missing_manifest_entry_is_an_io_error(tmp_path):
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(json.dumps({"id": "gone", "path": "gone.txt"}) + "\n", encoding="utf-8")
    rc, errs = run(["curve", "--manifest", str(manifest), "--out-dir", str(tmp_path)])
    assert rc == 1 and errs[0]["type"] == "CorpusIOError"


def test_unreachable_max_n_is_reported(fixtures_dir, tmp_path):
    rc, errs = run(["curve", "--text", str(fixtures_dir / "zh_sample.txt"), "--language", "zh",
                    "--checkpoints", "2,10,100000", "--out-dir", str(tmp_path)])
    assert rc == 1 and errs and errs[0]["text_id"] == "zh_sample"


def test_fit_curve_csv_round_trip(tmp_path):
    true = FitParams(c0=2.0, growth_alpha=0.4, n0=30.0, theta=2.5)
    n = np.unique(np.round(np.logspace(np.log10(2), 4, 80))).astype(int)
    GrowthCurve("model", "tokens", n, l_fit(n.astype(float), true),
                [1] * len(n)).to_csv(tmp_path / "model.csv")
    rc, errs = run(["fit", "--curve", str(tmp_path / "model.csv"), "--out-dir", str(tmp_path)])
    assert rc == 0 and errs == []
    got = json.loads((tmp_path / "fits" / "model.tokens.json").read_text())
    for key in ("c0", "growth_alpha", "n0", "theta"):
        assert got[key] == pytest.approx(getattr(true, key), rel=0.05)
    assert (tmp_path / "fits" / "model.tokens.csv").read_text().startswith(FIT_TABLE_SCHEMA)


def test_fit_too_short_curve_fails(tmp_path):
    GrowthCurve("short", "tokens", [2, 3, 4], [1.0, 1.3, 1.7], [1, 1, 1]).to_csv(tmp_path / "s.csv")
    rc, errs = run(["fit", "--curve", str(tmp_path / "s.csv"), "--out-dir", str(tmp_path)])
    assert rc == 1 and "short" in json.dumps(errs)


def test_analyze_metrics_csv(fixtures_dir, tmp_path):
    rc, _ = run(["analyze", "--text", str(fixtures_dir / "alice29.txt"), "--mode", "both",
                 "--export-edges", "--out-dir", str(tmp_path)])
    assert rc == 0
    header, table = rows(tmp_path / "metrics.csv")
    assert header == METRICS_SCHEMA
    assert [r["mode"] for r in table] == ["tokens", "words"]
    tok = table[0]
    assert (int(tok["N"]), int(tok["E"])) == (2691, 13957)
    edges = (tmp_path / "networks" / "alice29.tokens.edges").read_text().splitlines()
    assert sum(1 for ln in edges if ln and not ln.startswith("#")) == 13957


def test_tokenize_and_build(fixtures_dir, tmp_path):
    rc, _ = run(["tokenize", "--text", str(fixtures_dir / "alice29.txt"), "--out-dir", str(tmp_path)])
    assert rc == 0 and (tmp_path / "tokens" / "alice29.tokens.txt").is_file()
    rc, _ = run(["build", "--text", str(fixtures_dir / "alice29.txt"), "--out-dir", str(tmp_path)])
    assert rc == 0 and (tmp_path / "networks" / "alice29.tokens.edges").is_file()


def test_synth_command(tmp_path):
    rc, errs = run(["synth", "--steps", "3000", "--realizations", "3", "--max-n", "200",
                    "--out-dir", str(tmp_path)])
    assert rc == 0 and errs == []
    summary = json.loads((tmp_path / "synth.json").read_text())
    assert summary["steps"] == 3000 and summary["realizations"] == 3
    c = GrowthCurve.from_csv(tmp_path / "curves" / "synth.tokens.csv")
    assert c.n[-1] <= 200 and np.all(c.realizations == 3)


@pytest.fixture(scope="module")
def report_dir(fixtures_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("report")
    rc, errs = run(["report", "--manifest", str(fixtures_dir / "manifest.jsonl"),
                    "--mode", "both", "--max-n", "300", "--jobs", "2", "--out-dir", str(out)])
    assert (rc, errs) == (0, [])
    return out


def test_report_rows_per_mode(report_dir):
    header, table = rows(report_dir / "report.csv")
    assert header == REPORT_SCHEMA
    assert list(table[0]) == ["text_id", "mode", "N_tot", "L_N_tot", "L_max", "argmax_N",
                              "asymptote"]
    for mode in ("tokens", "words"):
        assert sorted(r["text_id"] for r in table if r["mode"] == mode) == [
            "alice29", "asyoulik", "plrabn12"]
    for r in table:
        assert int(r["N_tot"]) == 300 and float(r["L_max"]) >= float(r["L_N_tot"])


def test_report_artifacts(report_dir):
    for mode in ("tokens", "words"):
        assert (report_dir / "curves" / f"group.{mode}.csv").is_file()
        group = GrowthCurve.from_csv(report_dir / "curves" / f"group.{mode}.csv")
        assert np.all(group.realizations == 3)
        for text in ("alice29", "asyoulik", "plrabn12"):
            fit = json.loads((report_dir / "fits" / f"{text}.{mode}.json").read_text())
            assert fit["text_id"] == text and fit["mode"] == mode

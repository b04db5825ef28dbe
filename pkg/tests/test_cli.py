import json
import math

import numpy as np
import pytest

from modelcred.cli import (
    InputError,
    build_parser,
    csv_to_curve,
    curve_to_csv,
    ingest_sample,
    ingest_table,
    main,
    run,
)
from modelcred.distributions import Normal, SeedSpec, sample

HAIR_EYE_CSV = "68,119,26,7\n20,84,17,94\n15,54,14,10\n5,29,14,16\n"
CHILDREN_INCOME_CSV = (
    "2161,3577,2184,1636\n2755,5081,2222,1052\n936,1753,640,306\n"
    "225,419,96,38\n39,98,31,14\n"
)


@pytest.fixture()
def schema():
    from importlib import resources

    return json.loads(
        resources.files("modelcred.data").joinpath("report_schema.json").read_text()
    )


def _validate(report, schema):
    import jsonschema

    jsonschema.validate(report, schema)


# ------------------------------------------------------------------ ingestion

def test_ingest_sample_plain(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0\n2.5\n-3\n")
    assert ingest_sample(str(p)).tolist() == [1.0, 2.5, -3.0]


def test_ingest_sample_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("value\n1\n2\n")
    assert ingest_sample(str(p)).tolist() == [1.0, 2.0]


def test_ingest_sample_bad_row_reports_line(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1\nabc\n")
    with pytest.raises(InputError, match=":2"):
        ingest_sample(str(p))


def test_ingest_sample_empty(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("")
    with pytest.raises(InputError):
        ingest_sample(str(p))


def test_ingest_table_examples(tmp_path):
    p = tmp_path / "t6.csv"
    p.write_text(HAIR_EYE_CSV)
    assert ingest_table(str(p)).n == 592
    p7 = tmp_path / "t7.csv"
    p7.write_text(CHILDREN_INCOME_CSV)
    assert ingest_table(str(p7)).n == 25263


def test_ingest_table_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,0\n0,0\n")
    with pytest.raises(InputError, match="margin"):
        ingest_table(str(p))
    p.write_text("1,2\n3\n")
    with pytest.raises(InputError, match="ragged"):
        ingest_table(str(p))
    p.write_text("1,2\n3,-4\n")
    with pytest.raises(InputError, match="negative"):
        ingest_table(str(p))
    p.write_text("1,2\n3,x\n")
    with pytest.raises(InputError, match="non-integer"):
        ingest_table(str(p))


# ------------------------------------------------------------------ reports

def test_table_report_values(tmp_path, schema):
    p = tmp_path / "t6.csv"
    p.write_text(HAIR_EYE_CSV)
    args = build_parser().parse_args(
        ["table", "--input", str(p), "--alpha", "0.05", "--seed", "7"]
    )
    report = run(args)
    _validate(report, schema)
    res = report["results"]
    assert res["g2"] == pytest.approx(146.444, abs=0.001)
    assert res["nstar_asy"] == pytest.approx(34.2, abs=1.0)
    assert 29 <= res["estimate"]["n_star"] <= 35


def test_json_determinism(tmp_path):
    p = tmp_path / "t6.csv"
    p.write_text(HAIR_EYE_CSV)
    reports = []
    for _ in range(2):
        args = build_parser().parse_args(["table", "--input", str(p), "--seed", "3"])
        r = run(args)
        r.pop("elapsed_seconds")
        reports.append(json.dumps(r, sort_keys=True))
    assert reports[0] == reports[1]


def test_power_report_and_csv_round_trip(tmp_path, schema):
    p = tmp_path / "d.csv"
    np.savetxt(p, sample(Normal(0, 1), 500, SeedSpec(1)))
    args = build_parser().parse_args(
        [
            "power", "--input", str(p), "--test", "shapiro-wilk",
            "--m-grid", "50,100,200", "--replicates", "100", "--seed", "2",
            "--jobs", "1",
        ]
    )
    report = run(args)
    _validate(report, schema)
    curve = report["results"]["curve"]
    assert len(curve) == 3
    from modelcred.resampling import PowerCurve, PowerPoint

    points = PowerCurve(points=tuple(
        PowerPoint(m=c["m"], replicates=c["replicates"], rejections=c["rejections"])
        for c in curve
    ))
    text = curve_to_csv(points)
    assert text.splitlines()[0] == "m,beta_hat,std_error,replicates,rejections"
    assert csv_to_curve(text) == points


def test_nstar_infinite_on_null_data(tmp_path, schema, capsys):
    p = tmp_path / "d.csv"
    np.savetxt(p, sample(Normal(0, 1), 600, SeedSpec(5)))
    rc = main(
        [
            "nstar", "--input", str(p), "--test", "shapiro-wilk",
            "--seed", "1", "--jobs", "1",
            "--replicates-coarse", "200", "--replicates-fine", "300",
        ]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    _validate(report, schema)
    assert report["results"]["estimate"]["n_star"] == "infinite"


def test_eiss_report(schema, capsys):
    rc = main(["eiss", "--phi-inv", "2,100", "--draws", "50000", "--seed", "1"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    _validate(report, schema)
    entries = {e["phi_inv"]: e for e in report["results"]["entries"]}
    assert entries[2.0]["eiss"] == pytest.approx(4.2, rel=0.15)
    assert "error" in entries[100.0]


def test_simulate_table5_preset(schema, capsys):
    rc = main(
        ["simulate", "--preset", "table5", "--phi-inv", "2", "--draws", "50000"]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    _validate(report, schema)
    assert report["results"]["entries"][0]["eiss"] == pytest.approx(4.2, rel=0.15)


# ------------------------------------------------------------------ exit codes

def test_exit_code_input_error(tmp_path, capsys):
    assert main(["nstar", "--input", str(tmp_path / "missing.csv")]) == 1
    assert "input error" in capsys.readouterr().err


def test_exit_code_bad_flag_value(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("1\n2\n3\n4\n5\n")
    rc = main(["nstar", "--input", str(p), "--alpha", "0.7"])
    assert rc == 1


def test_csv_format_requires_curve(capsys):
    rc = main(["eiss", "--phi-inv", "2", "--draws", "50000", "--format", "csv"])
    assert rc == 1


def test_out_file(tmp_path):
    rc = main(
        [
            "eiss", "--phi-inv", "2", "--draws", "50000",
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert rc == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["report_version"] == 1


def test_env_seed_default(monkeypatch, tmp_path):
    monkeypatch.setenv("MODELCRED_SEED", "42")
    args = build_parser().parse_args(["eiss"])
    assert args.seed == 42
    # the flag always overrides the environment
    args = build_parser().parse_args(["eiss", "--seed", "7"])
    assert args.seed == 7

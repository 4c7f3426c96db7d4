import json

import pytest
from click.testing import CliRunner

from fractalframes.cli import main

QUARTER_TOWER = {
    "levels": [{"R": [[4]], "B": [0, 2], "L": [0, 1]}],
    "kind": "frame",
    "mode": "periodic",
}


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args, env=None):
    return runner.invoke(main, args, env=env, catch_exceptions=False)


def test_check_triple_exit0(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "check-triple",
            "--inline",
            json.dumps({"triple": {"R": [[3]], "B": [0, 1, 3], "L": [0, 1, 2]}}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["classification"] == "Neither"
    assert doc["result"]["rank"] == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "check-triple"
    assert len(manifest["input_hash"]) == 64


def test_precondition_exit2(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "check-triple",
            "--inline",
            json.dumps({"triple": {"R": [[1]], "B": [0], "L": [0]}}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 2
    err = json.loads((out / "error.json").read_text())
    assert err["kind"] == "precondition"


def test_malformed_json_exit2(runner, tmp_path):
    res = _invoke(
        runner,
        ["check-triple", "--inline", "{not json", "--out", str(tmp_path / "o")],
    )
    assert res.exit_code == 2


def test_requires_one_payload_source(runner, tmp_path):
    res = runner.invoke(main, ["check-triple", "--out", str(tmp_path / "o")])
    assert res.exit_code != 0


def test_tower_report_riesz_basis(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "tower-report",
            "--inline",
            json.dumps({"tower": QUARTER_TOWER, "levels": 4}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["verdict"]["verdict"] == "RieszBasis"


def test_spectrum_level0(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "spectrum",
            "--inline",
            json.dumps({"tower": QUARTER_TOWER, "up_to_level": 0}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["points"] == [[0]]
    assert (out / "table.csv").exists()


def test_spectrum_from_input_file(runner, tmp_path):
    payload = tmp_path / "job.json"
    payload.write_text(json.dumps({"tower": QUARTER_TOWER, "up_to_level": 2}))
    out = tmp_path / "out"
    res = _invoke(
        runner, ["spectrum", "--input", str(payload), "--out", str(out)]
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert sorted(p[0] for p in doc["result"]["points"]) == [0, 1, 4, 5]


def test_determinism_byte_identical(runner, tmp_path):
    args = lambda out: [
        "tail-delta",
        "--inline",
        json.dumps({"tower": QUARTER_TOWER, "max_level": 3}),
        "--out",
        str(out),
    ]
    assert _invoke(runner, args(tmp_path / "a")).exit_code == 0
    assert _invoke(runner, args(tmp_path / "b")).exit_code == 0
    assert (tmp_path / "a/result.json").read_bytes() == (
        tmp_path / "b/result.json"
    ).read_bytes()


def test_spectrum_cache_round_trip(runner, tmp_path):
    cache = tmp_path / "cache"
    payload = json.dumps({"tower": QUARTER_TOWER, "up_to_level": 3})
    env = {"FRACTAL_FRAMES_CACHE": str(cache)}
    a = _invoke(
        runner, ["spectrum", "--inline", payload, "--out", str(tmp_path / "a")], env=env
    )
    assert a.exit_code == 0
    assert list(cache.glob("*.json"))
    b = _invoke(
        runner, ["spectrum", "--inline", payload, "--out", str(tmp_path / "b")], env=env
    )
    assert b.exit_code == 0
    assert (tmp_path / "a/result.json").read_bytes() == (
        tmp_path / "b/result.json"
    ).read_bytes()
    manifest_b = json.loads((tmp_path / "b/manifest.json").read_text())
    assert manifest_b.get("cache_hit") is True


def test_muhat_csv(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "muhat",
            "--inline",
            json.dumps({"tower": QUARTER_TOWER, "xis": [0.0, 0.5]}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    lines = (out / "table.csv").read_text().strip().splitlines()
    assert lines[0] == "xi,re,im,error_bound"
    assert len(lines) == 3


def test_search_riesz_flag_override(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "search-riesz",
            "--inline",
            json.dumps({"R": [[4]], "B": [0, 2], "epsilon": 0.9}),
            "--epsilon",
            "0.1",
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["epsilon"] == 0.1


def test_schedule_57_cli(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "schedule-57",
            "--inline",
            json.dumps({"R": [[3]], "B": [0, 2], "max_k": 2}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert len(doc["result"]["groups"]) == 2


def test_beurling_cli_with_flags(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "beurling",
            "--inline",
            json.dumps({"points": [0, 1, 4, 5], "alpha_grid": [1.0], "radii": [2.0]}),
            "--alpha-grid",
            "0.5,1.0",
            "--radii",
            "1.4,5.4",
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["counts"] == [2, 4]
    assert len(doc["result"]["densities"]) == 2


def test_witness_cli(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "witness",
            "--inline",
            json.dumps(
                {
                    "tower": QUARTER_TOWER,
                    "witness_kind": "exactness",
                    "level": 1,
                    "lam0": 1,
                }
            ),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0


def test_validate_cli(runner, tmp_path):
    out = tmp_path / "out"
    res = _invoke(
        runner,
        [
            "validate",
            "search-riesz",
            "--inline",
            json.dumps({"R": [[4]], "B": [0, 2], "epsilon": 1.5}),
            "--out",
            str(out),
        ],
    )
    assert res.exit_code == 0
    doc = json.loads((out / "diagnostics.json").read_text())
    assert doc["diagnostics"]


def test_result_json_round_trips(runner, tmp_path):
    out = tmp_path / "out"
    _invoke(
        runner,
        [
            "muhat",
            "--inline",
            json.dumps({"tower": QUARTER_TOWER, "xis": [0.3]}),
            "--out",
            str(out),
        ],
    )
    doc = json.loads((out / "result.json").read_text())
    again = json.loads(json.dumps(doc))
    assert again == doc

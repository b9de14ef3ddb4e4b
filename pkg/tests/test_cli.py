import csv
import io
import json
import math
from pathlib import Path

import pytest

from ricci_pinch.cli import (
    CLIFFORD_COLUMNS,
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EXIT_USAGE,
    PINCH_COLUMNS,
    ConfigError,
    cmd_bochner_scan,
    cmd_clifford_sweep,
    cmd_pinch_table,
    cmd_tube_verify,
    main,
    render,
)

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestPinchTable:
    def test_worked_value(self):
        rep = cmd_pinch_table([4], [2], [0.0])
        (row,) = rep.records
        assert row["b"] == pytest.approx(2.0, abs=1e-15)
        assert row["lambda"] == pytest.approx(1.0, abs=1e-15)
        assert row["residual"] <= 1e-15
        assert rep.exit_code == EXIT_OK

    def test_special_columns(self):
        rep = cmd_pinch_table([8, 9], None, [0.0, 1.5])
        by_nk = {(r["n"], r["k"], r["H"]): r for r in rep.records}
        assert "special_bound" in by_nk[(8, 4, 1.5)]
        assert "special_bound" in by_nk[(9, 4, 1.5)]
        assert "special_bound" not in by_nk[(9, 3, 1.5)]
        assert all(r["special_residual"] <= 1e-12 for r in rep.records if "special_residual" in r)

    def test_invalid_rows_are_flagged(self):
        rep = cmd_pinch_table([6], [1, 2, 4], [0.0])
        assert [r["status"] for r in rep.records] == ["invalid", "pass", "invalid"]
        assert rep.summary["invalid"] == 2
        assert rep.exit_code == EXIT_OK

    @pytest.mark.parametrize("n", [3, 13])
    def test_n_out_of_range(self, n):
        with pytest.raises(ConfigError):
            cmd_pinch_table([n])

    def test_negative_h(self):
        with pytest.raises(ConfigError):
            cmd_pinch_table([6], None, [-1.0])

    def test_csv_header(self):
        text = render(cmd_pinch_table([5, 6]), "csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == PINCH_COLUMNS
        assert len(rows) == 1 + 3  # (5, 2), (6, 2), (6, 3)


class TestCliffordSweep:
    def test_minimal_pair(self):
        rep = cmd_clifford_sweep(4, 2)
        interior = [r for r in rep.records if r["location"] == "interior"]
        assert len(interior) == 1 and interior[0]["verdict"] == "Equality"
        assert interior[0]["r2"] == pytest.approx(0.5)
        assert rep.exit_code == EXIT_OK

    def test_range_and_exterior(self):
        rep = cmd_clifford_sweep(8, 3, count=20)
        interior = [r for r in rep.records if r["location"] == "interior"]
        exterior = [r for r in rep.records if r["location"] == "exterior"]
        assert len(interior) == 20 and len(exterior) == 2
        assert all(abs(r["margin"]) <= 1e-9 for r in interior)
        assert all(r["verdict"] == "Violated" for r in exterior)
        assert all(r["lambda"] == pytest.approx(r["lambda_torus"], abs=1e-10) for r in interior)

    def test_csv_columns(self):
        rows = list(csv.DictReader(io.StringIO(render(cmd_clifford_sweep(6, 2), "csv"))))
        assert list(rows[0]) == CLIFFORD_COLUMNS

    def test_other_first_factor_is_exploratory(self):
        rep = cmd_clifford_sweep(8, 3, count=6, p=2)
        assert {r["location"] for r in rep.records} == {"exploratory"}
        assert all(r["p"] == 2 for r in rep.records)
        assert rep.exit_code == EXIT_OK and rep.summary["failed"] == 0
        assert sum(rep.summary["verdicts"].values()) == 6

    @pytest.mark.parametrize("p", [1, 7])
    def test_first_factor_range(self, p):
        with pytest.raises(ConfigError):
            cmd_clifford_sweep(8, 3, p=p)

    @pytest.mark.parametrize("n,k", [(6, 4), (6, 1)])
    def test_bad_pair(self, n, k):
        with pytest.raises(ConfigError):
            cmd_clifford_sweep(n, k)


class TestBochnerScan:
    def test_zero_operator_sample(self):
        rep = cmd_bochner_scan(4, 2, 20, seed=7)
        zero = rep.records[0]
        assert zero["strategy"] == "zero"
        assert zero["min_value"] == pytest.approx(4.0)
        assert zero["min_exact"] == pytest.approx(4.0)
        assert rep.exit_code == EXIT_OK
        assert all(rep.summary["checks"].values())

    def test_deterministic(self):
        a = render(cmd_bochner_scan(6, 2, 10, seed=3), timestamp=False)
        b = render(cmd_bochner_scan(6, 2, 10, seed=3), timestamp=False)
        assert a == b

    def test_seed_changes_result(self):
        a = cmd_bochner_scan(6, 2, 5, seed=3).records[1]["min_value"]
        b = cmd_bochner_scan(6, 2, 5, seed=4).records[1]["min_value"]
        assert a != b

    def test_parallel_matches_serial(self):
        serial = render(cmd_bochner_scan(6, 3, 8, seed=1, jobs=1), timestamp=False)
        parallel = render(cmd_bochner_scan(6, 3, 8, seed=1, jobs=2), timestamp=False)
        assert serial == parallel

    def test_bad_arguments(self):
        with pytest.raises(ConfigError):
            cmd_bochner_scan(6, 2, 0, seed=0)
        with pytest.raises(ConfigError):
            cmd_bochner_scan(6, 2, 5, seed=0, tol=-1.0)


class TestTubeVerify:
    @pytest.mark.parametrize("name", ["great_sphere_constant", "great_sphere_bump", "small_sphere_focal"])
    def test_bundled_specs_pass(self, name):
        spec = json.loads((SPECS / f"{name}.json").read_text())
        rep = cmd_tube_verify(spec, density=2, fibers=2)
        assert rep.exit_code == EXIT_OK
        assert rep.summary["fail"] == 0

    def test_oracle_column(self):
        spec = json.loads((SPECS / "great_sphere_constant.json").read_text())
        rep = cmd_tube_verify(spec, density=1, fibers=2)
        assert all(r["oracle_error"] <= 1e-6 for r in rep.records)

    def test_singular_fibre_reported(self):
        spec = json.loads((SPECS / "small_sphere_focal.json").read_text())
        rep = cmd_tube_verify(spec, density=1, fibers=3)
        assert rep.summary["singular"] == 1
        assert rep.exit_code == EXIT_OK

    def test_near_collision_is_inconclusive(self):
        spec = json.loads((SPECS / "near_collision.json").read_text())
        rep = cmd_tube_verify(spec, density=1, fibers=3)
        assert rep.summary["inconclusive"] == 1
        assert rep.exit_code == EXIT_INCONCLUSIVE

    def test_steep_radius_rejected(self):
        spec = {
            "kind": "great_sphere",
            "dims": {"n": 4, "ell": 2},
            "tau": {"kind": "cosine_bump", "parameters": {"tau0": 0.7, "amplitude": 0.5, "frequency": [3.0, 0.0]}},
        }
        with pytest.raises(ConfigError):
            cmd_tube_verify(spec, density=3)


class TestMain:
    def test_json_to_stdout(self, capsys):
        code, out, _ = run(capsys, "pinch-table", "--n", "4", "--k", "2", "--H", "0")
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["schema"] == "ricci-pinch/pinch-table/1"
        assert "generated_at" in payload

    def test_reruns_are_byte_identical(self, tmp_path, capsys):
        outs = []
        for i in range(2):
            path = tmp_path / f"run{i}.json"
            argv = ["bochner-scan", "--n", "6", "--k", "2", "--samples", "5", "--seed", "9"]
            assert main(argv + ["--no-timestamp", "--jobs", "1", "--out", str(path)]) == EXIT_OK
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_config_overrides_flags(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": [5], "H": [0.0, 1.0], "format": "csv"}))
        code, out, _ = run(capsys, "pinch-table", "--config", str(cfg))
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK and len(rows) == 2 and rows[0]["n"] == "5"

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"colour": 1}')
        code, _, err = run(capsys, "pinch-table", "--config", str(cfg))
        assert code == EXIT_USAGE and "colour" in err

    def test_usage_error_leaves_no_file(self, tmp_path, capsys):
        path = tmp_path / "out.json"
        code, _, err = run(capsys, "clifford-sweep", "--n", "13", "--k", "2", "--out", str(path))
        assert code == EXIT_USAGE and "n must satisfy" in err
        assert not path.exists()
        assert list(tmp_path.iterdir()) == []

    def test_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["bochner-scan", "--n", "six"])
        assert info.value.code == EXIT_USAGE

    def test_malformed_spec_names_line_and_field(self, tmp_path, capsys):
        spec = tmp_path / "bad.json"
        spec.write_text('{\n  "kind": "great_sphere",\n  "dims": {"n": 4, "ell": 2},\n  "tau": {"kind": 3}\n}\n')
        code, _, err = run(capsys, "tube-verify", str(spec))
        assert code == EXIT_USAGE
        assert "line 4" in err and "tau.kind" in err

    def test_missing_spec(self, tmp_path, capsys):
        code, _, err = run(capsys, "tube-verify", str(tmp_path / "nope.json"))
        assert code == EXIT_USAGE

    def test_inconclusive_exit_code(self, capsys):
        argv = ["tube-verify", str(SPECS / "near_collision.json"), "--density", "1", "--fibers", "3", "--jobs", "1"]
        code, out, _ = run(capsys, *argv)
        assert code == EXIT_INCONCLUSIVE
        assert json.loads(out)["summary"]["inconclusive"] == 1

    def test_failure_exit_code(self, capsys):
        # a tolerance of 1e-30 cannot be met by any finite-difference estimate
        argv = ["tube-verify", str(SPECS / "great_sphere_bump.json"), "--density", "1", "--tol", "1e-30"]
        code, out, _ = run(capsys, *argv, "--jobs", "1")
        assert code == EXIT_FAIL
        assert json.loads(out)["summary"]["fail"] >= 1

    def test_csv_output(self, capsys):
        code, out, _ = run(capsys, "clifford-sweep", "--n", "8", "--k", "3", "--format", "csv", "--count", "3")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == EXIT_OK and len(rows) == 5
        assert math.isclose(float(rows[0]["r2"]), 1 / 3)

import json

import pytest

from bequest_opt import solve
from bequest_opt.cli import main

from cases import ref_params

REF_FLAGS = ["--r", "0.03", "--mu", "0.06", "--sigma", "0.20",
             "--lambda", "0.04", "--h", "0.05", "--b", "1"]


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_reference_point(self, capsys):
        code, out, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.02"])
        assert code == 0
        assert "BuyLevelBelowBequestCLow" in out
        w_b = float([l for l in out.splitlines() if l.startswith("w_b")][0].split()[1])
        w_s = float([l for l in out.splitlines() if l.startswith("w_s")][0].split()[1])
        assert w_b == pytest.approx(0.354, abs=5e-4)
        assert w_s == pytest.approx(0.875, abs=5e-4)

    def test_zero_consumption(self, capsys):
        code, out, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0"])
        assert code == 0
        assert "ZeroConsumption" in out
        w_b = float([l for l in out.splitlines() if l.startswith("w_b")][0].split()[1])
        assert w_b == pytest.approx(0.375, abs=5e-4)

    def test_validation_exit_code_names_field(self, capsys):
        code, _, err = run(capsys, ["solve", *REF_FLAGS[:4], "--sigma", "0", "--c", "0"])
        assert code == 2
        assert "sigma" in err

    def test_json_schema(self, capsys):
        code, out, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.02",
                                    "--format", "json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["solution"]["regime"] == "BuyLevelBelowBequestCLow"

    def test_json_round_trips_byte_identically(self, capsys):
        _, out, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.02",
                                 "--format", "json"])
        doc = json.loads(out)
        again = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
        assert again == out

    def test_repeat_invocations_identical(self, capsys):
        _, out1, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.05", "--format", "json"])
        _, out2, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.05", "--format", "json"])
        assert out1 == out2


class TestEval:
    def test_matches_library_bit_exactly(self, capsys):
        sol = solve(ref_params(c=0.02))
        w = 0.5 * sol.w_s
        code, out, _ = run(capsys, ["eval", *REF_FLAGS, "--c", "0.02",
                                    "--w", repr(w), "--format", "json"])
        assert code == 0
        row = json.loads(out)["rows"][0]
        ev = sol.eval(w)
        assert row["phi"] == ev.phi
        assert row["pi"] == ev.pi_star

    def test_reference_cell(self, capsys):
        code, out, _ = run(capsys, ["eval", *REF_FLAGS, "--c", "0.02",
                                    "--w", "0.1", "--format", "json"])
        assert json.loads(out)["rows"][0]["pi"] == pytest.approx(1.407, abs=5e-4)

    def test_safe_level_row(self, capsys):
        code, out, _ = run(capsys, ["eval", *REF_FLAGS, "--c", "0.02",
                                    "--w", "0.875", "--format", "json"])
        assert json.loads(out)["rows"][0]["phi"] == pytest.approx(1.0, abs=1e-12)

    def test_partial_domain_errors_still_exit_zero(self, capsys):
        code, out, _ = run(capsys, ["eval", *REF_FLAGS, "--c", "0.02",
                                    "--w", "0.3", "--w", "5.0", "--format", "json"])
        assert code == 0
        rows = json.loads(out)["rows"]
        assert rows[0]["error"] is None
        assert rows[1]["error"] is not None

    def test_all_rows_failing_exits_two(self, capsys):
        code, _, _ = run(capsys, ["eval", *REF_FLAGS, "--c", "0.02", "--w", "5.0"])
        assert code == 2


class TestTable:
    def test_tables_render(self, capsys):
        code, out, _ = run(capsys, ["table", "--fd-grid", "500"])
        assert code == 0
        assert "0.375" in out  # zero-consumption buy level
        assert "fd-oracle" in out

    def test_diff_reports_max_deviation(self, capsys):
        code, out, _ = run(capsys, ["table", "--fd-grid", "500", "--diff",
                                    "--format", "json"])
        assert code == 0
        doc = json.loads(out)
        # known defects in the published cells put the honest diff near 0.071
        assert 0.06 < doc["max_deviation"] < 0.08

    def test_csv_has_header(self, capsys):
        code, out, _ = run(capsys, ["table", "--fd-grid", "500", "--format", "csv"])
        assert out.splitlines()[0].startswith("table,label,w_b,w_s")


class TestVerify:
    def test_passes_on_reference_case(self, capsys):
        code, out, _ = run(capsys, ["verify", *REF_FLAGS, "--c", "0.02",
                                    "--seed", "42", "--mc-paths", "4000",
                                    "--mc-dt", "0.01", "--fd-grid", "500"])
        assert code == 0
        assert "PASS" in out

    def test_zero_consumption_case_passes(self, capsys):
        code, out, _ = run(capsys, ["verify", *REF_FLAGS, "--c", "0",
                                    "--seed", "7", "--mc-paths", "4000",
                                    "--mc-dt", "0.01", "--fd-grid", "500"])
        assert code == 0

    def test_injected_fault_fails_pasting(self, capsys):
        code, out, _ = run(capsys, ["verify", *REF_FLAGS, "--c", "0.02",
                                    "--seed", "42", "--mc-paths", "2000",
                                    "--mc-dt", "0.01", "--fd-grid", "500",
                                    "--perturb-yb", "1e-3"])
        assert code == 1
        assert "smooth-pasting" in out


class TestSweep:
    def test_consumption_sweep_unimodal_buy_level(self, capsys):
        code, out, _ = run(capsys, ["sweep", *REF_FLAGS, "--axis", "c",
                                    "--grid", "0:0.0629:20", "--format", "json"])
        assert code == 0
        rows = json.loads(out)["rows"]
        assert len(rows) == 20
        w_b = [r["w_b"] for r in rows]
        peak = w_b.index(max(w_b))
        assert 0 < peak < len(w_b) - 1
        assert all(a <= b + 1e-12 for a, b in zip(w_b[:peak], w_b[1:peak + 1]))
        assert all(a >= b - 1e-12 for a, b in zip(w_b[peak:], w_b[peak + 1:]))

    def test_premium_sweep_value_decreasing(self, capsys):
        code, out, _ = run(capsys, ["sweep", *REF_FLAGS, "--c", "0.02",
                                    "--axis", "h", "--grid", "0:0.5:10",
                                    "--format", "json"])
        assert code == 0
        rows = json.loads(out)["rows"]
        for a, b in zip(rows, rows[1:]):
            for w, pa, pb in zip((0.1, 0.3, 0.5, 0.7, 0.9), a["phi"], b["phi"]):
                if w < min(a["w_s"], b["w_s"]):
                    assert pb <= pa + 1e-10

    def test_malformed_grid_exits_two(self, capsys):
        code, _, err = run(capsys, ["sweep", "--axis", "c", "--grid", "0:0.06"])
        assert code == 2
        code, _, err = run(capsys, ["sweep", "--axis", "c", "--grid", "0.06:0:5"])
        assert code == 2

    def test_csv_stream(self, capsys):
        code, out, _ = run(capsys, ["sweep", *REF_FLAGS, "--c", "0.02",
                                    "--axis", "h", "--grid", "0:0.2:3",
                                    "--format", "csv"])
        lines = out.splitlines()
        assert lines[0].startswith("h,regime,w_b,w_s")
        assert len(lines) == 4


class TestConfigFile:
    def test_file_supplies_params_and_flags_override(self, tmp_path, capsys):
        cfg = tmp_path / "market.cfg"
        cfg.write_text(
            "r = 0.03\nmu = 0.06\nsigma = 0.20\nlambda = 0.04\n"
            "h = 0.05\nb = 1\nc = 0.05\n# comment line\n"
        )
        code, out, _ = run(capsys, ["solve", "--config", str(cfg), "--format", "json"])
        assert code == 0
        assert json.loads(out)["solution"]["regime"] == "BuyLevelAboveRb"
        code, out, _ = run(capsys, ["solve", "--config", str(cfg), "--c", "0.02",
                                    "--format", "json"])
        assert json.loads(out)["solution"]["regime"] == "BuyLevelBelowBequestCLow"

    def test_missing_file_exits_two(self, capsys):
        code, _, err = run(capsys, ["solve", "--config", "/nonexistent/x.cfg"])
        assert code == 2

    def test_output_file(self, tmp_path, capsys):
        out_path = tmp_path / "row.json"
        code, out, _ = run(capsys, ["solve", *REF_FLAGS, "--c", "0.02",
                                    "--format", "json", "--out", str(out_path)])
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["schema_version"] == 1

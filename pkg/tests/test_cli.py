import csv
import io
import json

import pytest

from qseal import cli
from qseal.seal import canonical_scheme, load_scheme, save_scheme, schemes_close
from qseal.theory import minmax_avg_fidelity


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def bit_scheme(tmp_path):
    path = tmp_path / "bit.json"
    save_scheme(canonical_scheme(2, 0.9), path)
    return str(path)


class TestSweep:
    def test_header_and_rows(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n", "4", "--pmax", "0.6", "--pmax", "0.9", "--points", "5")
        assert code == 0
        assert out.splitlines()[0] == ",".join(cli.CSV_HEADER)
        rows = parse(out)
        assert len(rows) == 2 * 5 * 2
        assert {r["metric"] for r in rows} == {"avg_fidelity", "cond_fidelity_bound"}

    def test_endpoint_value(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "2", "--pmax", "0.9", "--points", "2", "--metrics", "avg_fidelity")
        last = parse(out)[-1]
        assert float(last["p"]) == 0.9 and float(last["nu"]) == 1.0
        assert abs(float(last["value"]) - 0.82) < 1e-12

    def test_deterministic(self, capsys, tmp_path):
        args = ["sweep", "--n", "3", "--pmax", "0.7", "--points", "7", "--metrics", ",".join(cli.METRICS)]
        outs = []
        for jobs in ("1", "4"):
            path = tmp_path / f"out{jobs}.csv"
            assert cli.main(args + ["--jobs", jobs, "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_simulated_matches_closed_form(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", "4", "--pmax", "0.8", "--points", "9",
                        "--metrics", "avg_fidelity,simulated_avg_fidelity,cond_fidelity_bound,simulated_cond_fidelity")
        vals = {(r["p"], r["metric"]): float(r["value"]) for r in parse(out)}
        for (p, metric), v in vals.items():
            if metric == "simulated_avg_fidelity":
                assert abs(v - vals[(p, "avg_fidelity")]) < 1e-9
                assert abs(v - minmax_avg_fidelity(float(p), 0.8, 4)) < 1e-9
            if metric == "simulated_cond_fidelity":
                assert abs(v - vals[(p, "cond_fidelity_bound")]) < 1e-9

    @pytest.mark.parametrize("argv", [
        ["sweep", "--n", "1", "--pmax", "0.9"],
        ["sweep", "--n", "4", "--pmax", "0.2"],
        ["sweep", "--n", "4", "--pmax", "0.8", "--points", "1"],
        ["sweep", "--n", "4", "--pmax", "0.8", "--metrics", "bogus"],
        ["sweep", "--n", "4"],
        ["sweep", "--n", "20", "--pmax", "0.8", "--metrics", "simulated_avg_fidelity"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and "error" in err


class TestAttack:
    def test_half_strength(self, capsys, bit_scheme):
        code, out, _ = run(capsys, "attack", "--scheme", bit_scheme, "--p", "0.7")
        assert code == 0
        rep = json.loads(out)
        assert abs(rep["p_max"] - 0.9) < 1e-9
        assert abs(rep["report"]["avg_fidelity"] - 0.975885) < 1e-6
        assert abs(rep["report"]["mutual_information_bits"] - 0.118709) < 1e-6
        assert abs(rep["report"]["p"] - 0.7) < 1e-9

    def test_random_guess(self, capsys, bit_scheme):
        _, out, _ = run(capsys, "attack", "--scheme", bit_scheme, "--p", "0.5")
        rep = json.loads(out)["report"]
        assert abs(rep["avg_fidelity"] - 1) < 1e-9 and abs(rep["cond_fidelity"] - 1) < 1e-9
        assert abs(rep["mutual_information_bits"]) < 1e-9

    def test_unattainable(self, capsys, bit_scheme):
        code, _, err = run(capsys, "attack", "--scheme", bit_scheme, "--p", "0.95")
        assert code == 2 and "unattainable" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "attack", "--scheme", str(tmp_path / "nope.json"), "--p", "0.5")
        assert code == 2

    def test_malformed_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run(capsys, "attack", "--scheme", str(bad), "--p", "0.5")
        assert code == 2 and "parse error" in err

    def test_output_file(self, capsys, bit_scheme, tmp_path):
        out = tmp_path / "rep.json"
        assert cli.main(["attack", "--scheme", bit_scheme, "--p", "0.8", "--out", str(out)]) == 0
        assert abs(json.loads(out.read_text())["report"]["p"] - 0.8) < 1e-9


class TestVerify:
    def test_single_check_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "qcore")
        assert code == 0 and "PASS qcore" in out

    def test_zero_tolerance_fails(self, capsys, tmp_path):
        path = tmp_path / "v.json"
        code, out, _ = run(capsys, "verify", "--tol-profile", "zero", "--only", "discrimination", "--json", str(path))
        assert code == 1 and "FAIL discrimination" in out
        summary = json.loads(path.read_text())
        assert summary

    def test_unknown_check(self, capsys):
        code, _, _ = run(capsys, "verify", "--only", "nonexistent")
        assert code == 2


class TestCounterexample:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "counterexample")
        assert code == 0 and "symmetric  F_cond = 0.980204" in out

    def test_json(self, capsys):
        _, out, _ = run(capsys, "counterexample", "--json")
        rep = json.loads(out)
        assert abs(rep["symmetric_cond_fidelity"] - 0.980204) < 1e-6
        assert abs(rep["asymmetric_success_probability"] - 0.3) < 1e-9
        assert rep["asymmetric_completeness_residual"] < 1e-12


class TestSchemeGen:
    def test_round_trip(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        assert cli.main(["scheme-gen", "--n", "3", "--pmax", "0.7", "--out", str(path)]) == 0
        assert schemes_close(load_scheme(path), canonical_scheme(3, 0.7), atol=0.0)

    def test_stdout(self, capsys):
        _, out, _ = run(capsys, "scheme-gen", "--n", "2", "--pmax", "1.0")
        assert schemes_close(load_scheme(out), canonical_scheme(2, 1.0), atol=0.0)

    def test_needs_one_pmax(self, capsys):
        assert run(capsys, "scheme-gen", "--n", "2")[0] == 2

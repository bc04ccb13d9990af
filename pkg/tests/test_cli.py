import json

import secalign as sa
from secalign.cli import main

BENCH = "Ma=12 Nb=2 da=3 K=4 Mk=9 Nk=4 dk=2 L=16"


class TestFeasibilityCommand:
    def test_prints_admissible_range(self, capsys):
        assert main(["feasibility", "--config", BENCH]) == 0
        out = capsys.readouterr().out
        assert "LM da <= 5" in out
        assert "MEB da <= 4" in out

    def test_json_output(self, tmp_path, capsys):
        out_file = tmp_path / "table.json"
        assert main(["feasibility", "--config", BENCH, "--out", str(out_file)]) == 0
        rows = json.loads(out_file.read_text())
        assert rows[0]["da"] == 1
        assert rows[0]["lm_ok"] is True
        assert any(not r["meb_ok"] for r in rows)

    def test_bad_config_exits_nonzero(self, capsys):
        assert main(["feasibility", "--config", "Ma=12 Nb=2"]) == 2
        assert "error" in capsys.readouterr().err


class TestSolverCommands:
    def test_solve_meb_writes_solution(self, tmp_path, capsys):
        out_file = tmp_path / "sol.json"
        code = main([
            "solve-meb", "--config", BENCH.replace("da=3", "da=4"),
            "--seed", "1", "--max-iter", "4000", "--tol", "1e-11",
            "--out", str(out_file),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "converged: True" in out
        assert "cancelled: False" in out
        sol = sa.solution_from_json(out_file.read_text())
        assert sol.scheme == "MEB"
        assert sol.leakage < 1e-6

    def test_solve_lm_reports_cancellation(self, capsys):
        code = main([
            "solve-lm", "--config", BENCH.replace("da=3", "da=4"),
            "--seed", "1", "--max-iter", "5000", "--tol", "1e-13",
        ])
        assert code == 0
        assert "cancelled: True" in capsys.readouterr().out

    def test_seed_taken_from_config_text(self, capsys):
        assert main(["solve-meb", "--config", BENCH + " seed=3", "--max-iter", "300"]) == 0
        assert "seed: 3" in capsys.readouterr().out


class TestSecrecyCommands:
    def test_sop_closed_form_only(self, capsys):
        code = main([
            "sop", "--config", BENCH.replace("da=3", "da=4"),
            "--theta", "0.5", "--rb", "4", "--rs", "2",
            "--pa-db", "20", "--pk-db", "0",
        ])
        assert code == 0
        assert "closed-form outage probability" in capsys.readouterr().out

    def test_sop_with_monte_carlo(self, tmp_path, capsys):
        out_file = tmp_path / "sop.json"
        code = main([
            "sop", "--config", BENCH.replace("da=3", "da=4"),
            "--theta", "0.5", "--rb", "4", "--rs", "2",
            "--pa-db", "20", "--pk-db", "0",
            "--samples", "20000", "--seed", "1", "--out", str(out_file),
        ])
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert 0.0 <= payload["eps_mc"] <= 1.0
        assert abs(payload["eps_closed"] - payload["eps_mc"]) < 5 * payload["stderr"] + 1e-3

    def test_srm_with_given_gain(self, tmp_path, capsys):
        out_file = tmp_path / "srm.json"
        code = main([
            "srm", "--config", BENCH.replace("da=3", "da=4"),
            "--pa-db", "30", "--pk-db", "20", "--sigma2", "16",
            "--out", str(out_file),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "theta*" in out
        payload = json.loads(out_file.read_text())
        assert 0.0 <= payload["theta_star"] <= 1.0
        assert payload["Rs_star"] >= 0.0

    def test_srm_solves_for_gain_when_omitted(self, capsys):
        code = main([
            "srm", "--config", BENCH.replace("da=3", "da=4"),
            "--pa-db", "20", "--pk-db", "20", "--seed", "2",
        ])
        assert code == 0
        assert "sigma2" in capsys.readouterr().out


class TestExperimentCommand:
    def test_named_recipe_writes_files(self, tmp_path, capsys):
        code = main([
            "experiment", "rate-vs-theta", "--out", str(tmp_path), "--seeds", "0",
        ])
        assert code == 0
        assert (tmp_path / "rate-vs-theta.csv").exists()
        assert (tmp_path / "rate-vs-theta.json").exists()

    def test_spec_file(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({
            "name": "rate-vs-theta",
            "configs": ["Ma=12 Nb=2 da=4 K=4 Mk=9 Nk=4 dk=2 L=16"],
            "seeds": [0],
            "theta_grid": [0.3, 0.6],
            "sigma2": 16.0,
        }))
        assert main(["experiment", str(spec_path), "--out", str(tmp_path / "res")]) == 0
        assert (tmp_path / "res" / "rate-vs-theta.csv").exists()

    def test_unknown_recipe_fails(self, capsys):
        assert main(["experiment", "not-a-recipe"]) == 2

"""CLI driver: exit codes, config validation, dry runs, reproducible
output across parallelism hints."""

import json

import pytest

from polyrand.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_PASS,
    SUITES,
    main,
)


def run_cli(tmp_path, suite, config=None, extra=(), out_name="report.csv"):
    argv = ["--suite", suite]
    if config is not None:
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps(config))
        argv += ["--config", str(cfg)]
    out = tmp_path / out_name
    argv += ["--out", str(out), *extra]
    code = main(argv)
    return code, out.read_text() if out.exists() else None


class TestConfigHandling:
    def test_unknown_key_rejected(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, "jk-count", {"bogus": 1})
        assert code == EXIT_CONFIG
        assert "unknown config keys" in capsys.readouterr().err

    def test_malformed_json_rejected(self, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text("{not json")
        assert main(["--suite", "jk-count", "--config", str(cfg)]) == EXIT_CONFIG

    def test_non_object_config_rejected(self, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text("[1, 2]")
        assert main(["--suite", "jk-count", "--config", str(cfg)]) == EXIT_CONFIG

    def test_bad_distribution_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "cp-test", {"dist1": "no_such_law"})
        assert code == EXIT_CONFIG


class TestExitCodes:
    def test_jk_count_passes_and_prints(self, tmp_path, capsys):
        code, text = run_cli(tmp_path, "jk-count")
        assert code == EXIT_PASS
        assert capsys.readouterr().out.strip() == "15"
        assert text.startswith("# envelope-report v1")

    def test_infeasible_is_exit_3(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, "jk-count", {"P": 50, "k": 4, "method": "enumerate"})
        assert code == EXIT_INFEASIBLE
        err = capsys.readouterr().err
        assert "infeasible" in err

    def test_dry_run_never_executes(self, tmp_path, capsys):
        code, text = run_cli(
            tmp_path, "jk-count", {"P": 50, "k": 4, "method": "enumerate"}, ("--dry-run",)
        )
        assert code == EXIT_PASS
        assert text is None  # no report written
        est = json.loads(capsys.readouterr().out)
        assert est["feasible"] is False
        assert est["est_ops"] == pytest.approx(50.0**8)

    def test_dry_run_mc_linear(self, tmp_path, capsys):
        run_cli(tmp_path, "ik", {"n_mc": 1000}, ("--dry-run",))
        est1 = json.loads(capsys.readouterr().out)
        run_cli(tmp_path, "ik", {"n_mc": 2000}, ("--dry-run",))
        est2 = json.loads(capsys.readouterr().out)
        assert est2["est_seconds"] == pytest.approx(2 * est1["est_seconds"])


class TestReproducibility:
    CASES = [
        ("cantor-scan", {"t_max": 40.0}),
        ("weyl", {"P": 30, "n_alpha": 6}),
        ("jk-count", None),
        ("qf-density", None),
        ("ik", {"n_mc": 2000}),
        ("cp-test", {"n_samples": 5000, "n_t": 6}),
        ("stability", {"n_samples": 4000, "N_grid": [1, 4]}),
        ("qf-sandwich", {"u_grid": [360.0, 400.0], "spec": {"k": 4, "head_sigma_sq": 1.0}}),
        ("qf-tail", {"n_points": 3}),
    ]

    @pytest.mark.parametrize("suite,config", CASES)
    def test_jobs_do_not_change_bytes(self, tmp_path, suite, config):
        _, a = run_cli(tmp_path, suite, config, ("--seed", "11", "--jobs", "1"), "a.csv")
        _, b = run_cli(tmp_path, suite, config, ("--seed", "11", "--jobs", "8"), "b.csv")
        assert a == b

    def test_json_format(self, tmp_path):
        code, text = run_cli(tmp_path, "jk-count", None, ("--format", "json"))
        obj = json.loads(text)
        assert obj["summary"]["all_pass"] is True
        assert obj["summary"]["count"] == 15


class TestSuiteDefaults:
    def test_all_suites_registered(self):
        assert set(SUITES) == {
            "cantor-scan",
            "weyl",
            "jk-count",
            "ik",
            "vinogradov-verify",
            "qf-density",
            "qf-sandwich",
            "qf-tail",
            "cp-test",
            "stability",
        }

    def test_qf_sandwich_empty_tail_statistic_one(self, tmp_path):
        code, text = run_cli(
            tmp_path,
            "qf-sandwich",
            {"spec": {"k": 4, "head_sigma_sq": 1.0}, "u_grid": [360.0, 500.0]},
        )
        assert code == EXIT_PASS
        for line in text.splitlines()[2:]:
            stat = float(line.split(",")[1])
            assert stat == pytest.approx(1.0, abs=1e-8)

"""Configuration validation, the suite driver, report rendering, and the CLI."""

import json

import pytest

from zfcheck.cli import main
from zfcheck.errors import ConfigError, GridValidationError
from zfcheck.harness import (
    SUITE_ORDER,
    SUITE_RELATIONS,
    RunConfig,
    build_reflection,
    build_sample_plan,
    config_from_dict,
    emit_report,
    load_config,
    render_json,
    render_text,
    resolve_suites,
    run_suites,
)

SMALL = {
    "grid": [-1.0, 1.0],
    "n_max": 2,
    "samples_per_sector": {"1": 1, "2": 1},
    "rmatrix_samples": 5,
}


def small_cfg(**overrides):
    return config_from_dict({**SMALL, **overrides})


@pytest.fixture(scope="module")
def small_report():
    return run_suites(small_cfg())


class TestConfigValidation:
    def test_empty_object_gives_defaults(self):
        cfg = config_from_dict({})
        assert cfg.to_dict() == RunConfig().to_dict()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys.*momenta"):
            config_from_dict({"momenta": [1.0]})

    def test_root_must_be_object(self):
        with pytest.raises(ConfigError, match="JSON object"):
            config_from_dict([1, 2, 3])

    @pytest.mark.parametrize("bad", ["2", True, 0, -1, 2.5])
    def test_bad_N_rejected(self, bad):
        with pytest.raises(ConfigError, match="N must be"):
            config_from_dict({"N": bad})

    @pytest.mark.parametrize("bad", [0, 1.0, -1e-3, "tight"])
    def test_bad_tolerance_rejected(self, bad):
        with pytest.raises(ConfigError, match="tolerance"):
            config_from_dict({"tolerance": bad})

    @pytest.mark.parametrize("bad", [-1, 2**64, 1.5])
    def test_bad_seed_rejected(self, bad):
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict({"seed": bad})

    def test_bad_grid_rejected(self):
        with pytest.raises(ConfigError, match="grid"):
            config_from_dict({"grid": [1.0, "x"]})

    def test_samples_per_sector_validation(self):
        with pytest.raises(ConfigError, match="not an integer sector"):
            config_from_dict({"samples_per_sector": {"abc": 1}})
        with pytest.raises(ConfigError, match="outside 1..n_max"):
            config_from_dict({"samples_per_sector": {"7": 1}, "n_max": 3})
        with pytest.raises(ConfigError, match="nonnegative"):
            config_from_dict({"samples_per_sector": {"1": -2}})

    def test_prune_band(self):
        with pytest.raises(ConfigError, match="prune"):
            config_from_dict({"prune": 1e-9})
        assert config_from_dict({"prune": 0}).prune == 0.0

    def test_rmatrix_samples_positive(self):
        with pytest.raises(ConfigError, match="rmatrix_samples"):
            config_from_dict({"rmatrix_samples": 0})

    def test_suites_validation(self):
        with pytest.raises(ConfigError, match="nonempty list"):
            config_from_dict({"suites": []})
        with pytest.raises(ConfigError, match="unknown suite"):
            config_from_dict({"suites": ["fock", "bogus"]})

    def test_suites_resolved_in_dependency_order(self):
        cfg = config_from_dict({"suites": ["hierarchy", "rmatrix"]})
        assert cfg.suites == ("rmatrix", "hierarchy")
        assert resolve_suites(["all"]) == SUITE_ORDER

    def test_reflection_families(self):
        for refl in (
            {"family": "identity"},
            {"family": "constant-diagonal", "entries": [1.0, "0.6+0.8j"]},
            {"family": "constant-diagonal", "entries": [[0.0, 1.0], 1]},
            {"family": "k-dependent-diagonal", "c": 0.5},
            {"family": "k-dependent-diagonal", "c": 0.5, "signs": [1, -1]},
        ):
            cfg = config_from_dict({"reflection": refl})
            assert build_reflection(cfg).N == 2

    def test_reflection_validation_errors(self):
        cases = [
            ({"family": "mirror"}, "reflection.family"),
            ({"family": "identity", "entries": [1, 1]}, "unknown keys"),
            ({"family": "constant-diagonal", "entries": [1.0]}, "list of 2"),
            ({"family": "constant-diagonal", "entries": [1.0, "pi"]}, "cannot parse"),
            ({"family": "k-dependent-diagonal"}, "reflection.c"),
            (
                {"family": "k-dependent-diagonal", "c": 1.0, "signs": [1, 2]},
                "signs",
            ),
            ({"family": "table"}, "reflection.path"),
            ("identity", "must be an object"),
        ]
        for refl, pattern in cases:
            with pytest.raises(ConfigError, match=pattern):
                config_from_dict({"reflection": refl})

    def test_config_echo_normalizes_complex_entries(self):
        cfg = config_from_dict(
            {"reflection": {"family": "constant-diagonal", "entries": ["1j", 1.0]}}
        )
        echoed = cfg.to_dict()["reflection"]["entries"]
        assert echoed == [[0.0, 1.0], [1.0, 0.0]]


class TestLoadConfig:
    def test_parse_error_carries_position(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text('{\n  "N": 2,\n  oops\n}\n')
        with pytest.raises(ConfigError, match=r"broken\.json:3:3"):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_relative_table_path_resolves_against_config_dir(self, tmp_path):
        table = tmp_path / "refl.tab"
        rows = []
        for k in (-1.0, 1.0):
            rows.append(f"{k} 1.0 0.0 0.0 1.0")
        table.write_text("\n".join(rows) + "\n")
        cfgfile = tmp_path / "run.json"
        cfgfile.write_text(
            json.dumps(
                {**SMALL, "reflection": {"family": "table", "path": "refl.tab"}}
            )
        )
        cfg = load_config(cfgfile)
        spec = build_reflection(cfg)
        assert spec.family == "table"

    def test_grid_structure_checked_at_run_time(self):
        cfg = small_cfg(grid=[1.0, 2.0])  # not negation-closed
        with pytest.raises(GridValidationError, match="negation"):
            run_suites(cfg)


class TestSamplePlan:
    def test_plan_is_seed_deterministic(self):
        cfg = small_cfg()
        from zfcheck.fock import FockSpace, SpectralGrid
        from zfcheck.rmatrix import rational_r

        space = FockSpace(SpectralGrid(cfg.grid), rational_r(cfg.N, cfg.g), cfg.n_max)
        a = build_sample_plan(cfg, space)
        b = build_sample_plan(cfg, space)
        assert a.ybe_triples == b.ybe_triples
        assert a.unitarity_pairs == b.unitarity_pairs
        assert [n for n, _ in a.up_to(2)] == [n for n, _ in b.up_to(2)]

    def test_seed_changes_the_draws(self):
        cfg1, cfg2 = small_cfg(), small_cfg(seed=7)
        from zfcheck.fock import FockSpace, SpectralGrid
        from zfcheck.rmatrix import rational_r

        space = FockSpace(
            SpectralGrid(cfg1.grid), rational_r(cfg1.N, cfg1.g), cfg1.n_max
        )
        assert (
            build_sample_plan(cfg1, space).ybe_triples
            != build_sample_plan(cfg2, space).ybe_triples
        )


class TestRunSuites:
    def test_default_small_run_is_green(self, small_report):
        assert not small_report.failed
        counts = small_report.counts
        assert counts["fail"] == 0
        assert counts["checks"] == len(small_report.records)
        assert counts["pass"] + counts["skip"] == counts["checks"]
        assert small_report.max_residual < small_report.config.tolerance

    def test_every_selected_relation_is_covered(self, small_report):
        seen: dict[str, set] = {}
        for r in small_report.records:
            seen.setdefault(r.suite, set()).add(r.relation)
        for suite in SUITE_ORDER:
            missing = set(SUITE_RELATIONS[suite]) - seen.get(suite, set())
            assert not missing, f"{suite} lost coverage for {missing}"

    def test_capacity_skips_carry_a_cause(self, small_report):
        # n_max=2 forces the double-creation relations off two-particle
        # samples; those must surface as skips, not silent gaps.
        skips = [r for r in small_report.records if r.status == "skip"]
        assert skips
        assert all(r.cause for r in skips)
        assert any("headroom" in r.cause for r in skips)
        assert any(r.relation == "AN-2" for r in skips)

    def test_suite_subset_runs_alone(self):
        report = run_suites(small_cfg(), suites=("fock",))
        assert {r.suite for r in report.records} == {"fock"}
        assert not report.failed

    def test_dependent_suite_pulls_in_whitelist_prepass(self):
        report = run_suites(small_cfg(), suites=("boundary",))
        suites = {r.suite for r in report.records}
        assert suites == {"rmatrix", "boundary"}
        prepass = [r for r in report.records if r.suite == "rmatrix"]
        assert {r.relation for r in prepass} <= {"B-unitarity", "RBRB"}

    def test_momentum_metadata_round_trips(self, small_report):
        for r in small_report.records:
            assert isinstance(r.momenta, tuple)
            assert all(isinstance(k, float) for k in r.momenta)


@pytest.fixture(scope="module")
def bad_report():
    cfg = small_cfg(
        reflection={"family": "constant-diagonal", "entries": [2.0, 1.0]}
    )
    return run_suites(cfg)


class TestFailurePath:
    def test_failure_is_flagged(self, bad_report):
        assert bad_report.failed
        assert bad_report.counts["fail"] > 0

    def test_rmatrix_suite_carries_the_failures(self, bad_report):
        failing_suites = {r.suite for r in bad_report.records if r.status == "fail"}
        assert failing_suites == {"rmatrix"}
        failed_relations = {
            r.relation for r in bad_report.records if r.status == "fail"
        }
        assert "B-unitarity" in failed_relations

    def test_dependent_layers_skip_with_cause(self, bad_report):
        boundary = [r for r in bad_report.records if r.suite == "boundary"]
        hierarchy = [r for r in bad_report.records if r.suite == "hierarchy"]
        assert boundary and hierarchy
        assert all(r.status == "skip" for r in boundary + hierarchy)
        assert all("whitelist" in r.cause for r in boundary + hierarchy)

    def test_vertex_t_layer_still_measured(self, bad_report):
        vertex = [r for r in bad_report.records if r.suite == "vertex"]
        measured = {r.relation for r in vertex if r.status == "pass"}
        assert {"TOmega", "defT-a", "defT-adag", "rtt", "T-inverse"} <= measured
        skipped = {r.relation for r in vertex if r.status == "skip"}
        assert {"b-vacuum", "eq:ab", "eq:bad", "eq:bb", "rbrb"} <= skipped

    def test_coverage_still_complete_under_failure(self, bad_report):
        seen: dict[str, set] = {}
        for r in bad_report.records:
            seen.setdefault(r.suite, set()).add(r.relation)
        for suite in SUITE_ORDER:
            assert set(SUITE_RELATIONS[suite]) <= seen[suite]


class TestReportRendering:
    def test_json_is_byte_stable_across_runs(self, tmp_path):
        cfg = small_cfg()
        a = render_json(run_suites(cfg))
        b = render_json(run_suites(cfg))
        assert a == b
        out = tmp_path / "report.json"
        emitted = emit_report(run_suites(cfg), path=out, fmt="json")
        assert out.read_text() == emitted == a

    def test_json_shape(self, small_report):
        doc = json.loads(render_json(small_report))
        assert doc["provenance"]["package"] == "zfcheck"
        assert doc["provenance"]["seed"] == small_report.config.seed
        assert doc["summary"]["overall"]["checks"] == len(small_report.records)
        assert len(doc["records"]) == len(small_report.records)
        statuses = {r["status"] for r in doc["records"]}
        assert statuses <= {"pass", "fail", "skip"}

    def test_summary_counts_are_consistent(self, small_report):
        summary = small_report.summary()
        per_suite = summary["suites"]
        assert sum(s["checks"] for s in per_suite.values()) == len(
            small_report.records
        )
        for s in per_suite.values():
            assert s["pass"] + s["fail"] + s["skip"] == s["checks"]

    def test_text_rendering(self, small_report):
        text = render_text(small_report)
        assert "result: PASS" in text
        for suite in SUITE_ORDER:
            assert f"suite {suite}:" in text

    def test_unknown_format_rejected(self, small_report):
        with pytest.raises(ConfigError, match="format"):
            emit_report(small_report, fmt="yaml")


class TestCLI:
    def write_cfg(self, tmp_path, extra=None):
        payload = dict(SMALL)
        if extra:
            payload.update(extra)
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(payload))
        return str(p)

    def test_default_config_prints_json(self, capsys):
        assert main(["default-config"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["N"] == 2
        assert doc["suites"] == list(SUITE_ORDER)

    def test_default_config_out_file(self, tmp_path, capsys):
        out = tmp_path / "default.json"
        assert main(["default-config", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["seed"] == 2026

    def test_verify_green_run(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path)
        code = main(["verify", "--config", cfgfile])
        out = capsys.readouterr().out
        assert code == 0
        assert "result: PASS" in out

    def test_verify_json_report_file(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path)
        report = tmp_path / "out.json"
        code = main(
            [
                "verify",
                "--config",
                cfgfile,
                "--report",
                str(report),
                "--format",
                "json",
            ]
        )
        assert code == 0
        line = capsys.readouterr().out
        assert line.startswith(f"wrote {report}:")
        doc = json.loads(report.read_text())
        assert doc["summary"]["overall"]["fail"] == 0

    def test_verify_failing_family_exits_1(self, tmp_path, capsys):
        cfgfile = self.write_cfg(
            tmp_path,
            {"reflection": {"family": "constant-diagonal", "entries": [2.0, 1.0]}},
        )
        code = main(["verify", "--config", cfgfile, "--format", "text"])
        out = capsys.readouterr().out
        assert code == 1
        assert "result: FAIL" in out

    def test_verify_suite_and_seed_flags(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path)
        code = main(
            ["verify", "--config", cfgfile, "--suite", "fock", "--seed", "99"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "suite fock:" in out
        assert "suite vertex:" not in out

    def test_bad_config_file_exits_2(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text("{nope")
        code = main(["verify", "--config", str(p)])
        err = capsys.readouterr().err
        assert code == 2
        assert err.startswith("zfcheck: error:")

    def test_bad_flag_values_exit_2(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path)
        assert main(["verify", "--config", cfgfile, "--tol", "2.0"]) == 2
        assert main(["verify", "--config", cfgfile, "--seed", "-3"]) == 2
        capsys.readouterr()

    def test_unknown_suite_flag_exits_2(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path)
        assert main(["verify", "--config", cfgfile, "--suite", "bogus"]) == 2
        assert "unknown suite" in capsys.readouterr().err

    def test_asymmetric_grid_exits_2(self, tmp_path, capsys):
        cfgfile = self.write_cfg(tmp_path, {"grid": [1.0, 2.0]})
        assert main(["verify", "--config", cfgfile]) == 2
        assert "negation" in capsys.readouterr().err

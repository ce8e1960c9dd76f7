"""Experiment harness: prompt codes, scoring oracle, records file contract."""

from __future__ import annotations

import pytest

from bimspeak.experiment import (
    ALL_CODES,
    PromptCode,
    compliant_spec,
    compute_accuracy,
    expand_prompt_code,
    parse_code_list,
    run_experiment,
    score_spec,
    violating_spec,
)
from bimspeak.experiment.harness import CSV_COLUMNS, RunRecord, derive_run_seed, percent
from bimspeak.kernel import spec_from_dict

CE1 = PromptCode.parse("CE1")

CE1_SENTENCE = (
    "Propose a wall detail using a reinforced concrete structure and exterior "
    "insulation method, ensuring a minimum thickness of 140 mm."
)


class TestPromptCodes:
    def test_ce1_expands_to_exact_sentence(self):
        assert expand_prompt_code(CE1) == CE1_SENTENCE

    def test_eight_codes_total(self):
        assert len(ALL_CODES) == 8
        assert sorted(c.code for c in ALL_CODES) == [
            "CE1", "CE2", "CI1", "CI2", "TE1", "TE2", "TI1", "TI2",
        ]

    @pytest.mark.parametrize(
        "code,material,insulation,thickness",
        [
            ("CE1", "reinforced concrete", "exterior", 140),
            ("CE2", "reinforced concrete", "exterior", 190),
            ("CI1", "reinforced concrete", "interior", 140),
            ("CI2", "reinforced concrete", "interior", 190),
            ("TE1", "timber", "exterior", 140),
            ("TE2", "timber", "exterior", 184),
            ("TI1", "timber", "interior", 140),
            ("TI2", "timber", "interior", 184),
        ],
    )
    def test_legend(self, code, material, insulation, thickness):
        parsed = PromptCode.parse(code)
        sentence = expand_prompt_code(parsed)
        assert f"a {material} structure" in sentence
        assert f"{insulation} insulation method" in sentence
        assert f"minimum thickness of {thickness} mm" in sentence

    def test_parse_is_case_insensitive(self):
        assert PromptCode.parse("te2").code == "TE2"

    @pytest.mark.parametrize("bad", ["XX1", "CE3", "C1", "", "CEE1"])
    def test_bad_codes_rejected(self, bad):
        with pytest.raises(ValueError):
            PromptCode.parse(bad)

    def test_parse_code_list(self):
        assert [c.code for c in parse_code_list("ce1, TI2")] == ["CE1", "TI2"]


class TestSeeds:
    def test_same_inputs_same_seed(self):
        assert derive_run_seed(0, "CE1", 1) == derive_run_seed(0, "CE1", 1)

    def test_distinct_runs_get_distinct_seeds(self):
        seeds = {derive_run_seed(0, c.code, r) for c in ALL_CODES for r in range(1, 31)}
        assert len(seeds) == 240


class TestScoring:
    def test_compliant_spec_passes_both(self):
        for code in ALL_CODES:
            spec = spec_from_dict(compliant_spec(code))
            assert score_spec(spec, code) == (True, True), code.code

    def test_concrete_violation_fails_thickness_only(self):
        spec = spec_from_dict(violating_spec(CE1))
        assert score_spec(spec, CE1) == (True, False)

    def test_timber_violation_fails_material_only(self):
        te1 = PromptCode.parse("TE1")
        spec = spec_from_dict(violating_spec(te1))
        assert score_spec(spec, te1) == (False, True)


class TestAccuracy:
    def test_half_up_rounding(self):
        assert percent(222, 240) == "92.50%"
        assert percent(220, 240) == "91.67%"  # never the truncated 91.66%
        assert percent(240, 240) == "100.00%"
        assert percent(174, 240) == "72.50%"
        assert percent(0, 240) == "0.00%"

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            compute_accuracy([])

    def test_table_aggregates_per_code(self):
        records = [
            RunRecord("CE1", 1, True, True, 1, 5.0, "a"),
            RunRecord("CE1", 2, True, False, 2, 5.0, "b"),
            RunRecord("TE1", 1, False, True, 1, 5.0, "c"),
        ]
        table = compute_accuracy(records)
        assert table.total == 3
        assert table.material_accuracy == "66.67%"
        assert table.thickness_accuracy == "66.67%"
        assert table.per_code["CE1"] == (2, 2, 1)
        assert table.per_code["TE1"] == (1, 0, 1)


class TestRunExperiment:
    def run(self, tmp_path, name, **kwargs):
        out = tmp_path / name
        defaults = dict(
            codes=[CE1, PromptCode.parse("TE1")], runs_per_code=3,
            out_dir=out, seed=0, violation_p=0.0,
        )
        defaults.update(kwargs)
        records = run_experiment(**defaults)
        return out, records

    def test_outputs_and_all_pass_at_p_zero(self, tmp_path):
        out, records = self.run(tmp_path, "clean")
        assert len(records) == 6
        assert all(r.material_pass and r.thickness_pass for r in records)
        assert all(r.attempts == 1 for r in records)

        lines = (out / "records.csv").read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 7
        assert lines[1].startswith("CE1,1,true,true,1,")
        assert (out / "script.json").exists()
        assert (out / "specs" / "CE1-run001.json").exists()
        summary = (out / "summary.md").read_text()
        assert "| structural material | 6 | 6 | 100.00% |" in summary
        assert "91.67%" in summary  # rounding note

    def test_specs_on_disk_rescore_clean(self, tmp_path):
        import json

        out, records = self.run(tmp_path, "rescore")
        for record in records:
            data = json.loads((out / record.spec_file).read_text())
            spec = spec_from_dict(data, location=record.spec_file)
            code = PromptCode.parse(record.code)
            assert score_spec(spec, code) == (record.material_pass, record.thickness_pass)

    def test_byte_identical_across_job_counts(self, tmp_path):
        out1, _ = self.run(tmp_path, "serial", violation_p=0.3, jobs=1)
        out2, _ = self.run(tmp_path, "parallel", violation_p=0.3, jobs=3)
        assert (out1 / "records.csv").read_bytes() == (out2 / "records.csv").read_bytes()
        assert (out1 / "summary.md").read_bytes() == (out2 / "summary.md").read_bytes()

    def test_resume_skips_finished_runs_and_heals_torn_tail(self, tmp_path):
        out, _ = self.run(tmp_path, "resume", violation_p=0.3)
        full = (out / "records.csv").read_bytes()

        lines = (out / "records.csv").read_text().splitlines()
        torn = "\n".join(lines[:4]) + "\nTE1,2,tr"  # crash mid-write
        (out / "records.csv").write_text(torn, encoding="utf-8")

        _, records = self.run(tmp_path, "resume", violation_p=0.3, resume=True)
        assert len(records) == 6
        assert (out / "records.csv").read_bytes() == full

    def test_disabled_check_records_single_attempts(self, tmp_path):
        out, records = self.run(
            tmp_path, "nocheck", violation_p=1.0, check_enabled=False, runs_per_code=2,
        )
        assert all(r.attempts == 1 for r in records)
        ce1 = [r for r in records if r.code == "CE1"]
        assert all(r.material_pass and not r.thickness_pass for r in ce1)
        te1 = [r for r in records if r.code == "TE1"]
        assert all(not r.material_pass and r.thickness_pass for r in te1)
        assert "check loop disabled" in (out / "summary.md").read_text()

    def test_rejects_empty_plan(self, tmp_path):
        with pytest.raises(ValueError):
            run_experiment(codes=[], runs_per_code=3, out_dir=tmp_path / "x")
        with pytest.raises(ValueError):
            run_experiment(codes=[CE1], runs_per_code=0, out_dir=tmp_path / "x")


class TestCsvRoundTrip:
    def test_row_round_trips(self):
        record = RunRecord("TI2", 30, False, True, 5, 42.125, "specs/TI2-run030.json")
        assert RunRecord.from_csv_row(record.csv_row()) == record

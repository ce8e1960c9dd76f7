"""Engine behavior: step plans, retry loop, questions, events, determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from bimspeak.errors import ProtocolError
from bimspeak.experiment.codes import ALL_CODES, PromptCode, expand_prompt_code
from bimspeak.experiment.mockdata import compliant_spec, experiment_script, violating_spec
from bimspeak.gateway import FailureSpec, MockRule, MockScript
from bimspeak.kernel import Baseline, WallInstance, create_wall_type, spec_from_dict
from bimspeak.nlu import TaskClass
from bimspeak.orchestrator import Engine, EngineConfig, plan_steps

CE1 = PromptCode.parse("CE1")
CE1_PROMPT = expand_prompt_code(CE1)

GOLDEN_DIR = Path(__file__).parent / "golden"


def make_engine(script: MockScript, **overrides) -> Engine:
    config = EngineConfig(backend="mock", **overrides)
    return Engine(config, script=script)


def ce1_script(structure_rules=None) -> MockScript:
    """Minimal deterministic script for one CE1 turn."""
    rules = [
        MockRule(tag="classify", substring="request: propose a wall detail", response="CreateWallDetail"),
        MockRule(tag="classify", response="Unknown"),
        MockRule(
            tag="extract",
            response=json.dumps(
                {
                    "slots": {
                        "structural_material": {"value": "reinforced concrete", "span": "reinforced concrete structure"},
                        "insulation_method": {"value": "exterior", "span": "exterior insulation method"},
                        "min_thickness": {"value": "140 mm", "span": "minimum thickness of 140 mm"},
                    }
                }
            ),
        ),
        MockRule(tag="fill", response=json.dumps({"layer_composition": "render, wool, concrete, plaster"})),
    ]
    rules += structure_rules or [
        MockRule(tag="structure", response=json.dumps(compliant_spec(CE1))),
    ]
    return MockScript(rules=rules)


class TestPlanSteps:
    def test_wall_tasks_run_all_six(self):
        for task in (TaskClass.CREATE_WALL_DETAIL, TaskClass.MODIFY_WALL):
            plan = plan_steps(task)
            assert [p.step for p in plan] == ["Interpret", "Fill", "Match", "Structure", "Execute", "Check"]
            assert not any(p.skipped for p in plan)

    def test_simple_transform_skips(self):
        plan = {p.step: p for p in plan_steps(TaskClass.SIMPLE_TRANSFORM)}
        assert plan["Fill"].skipped and plan["Fill"].reason
        assert plan["Match"].skipped
        assert plan["Check"].skipped and plan["Check"].reason
        assert not plan["Interpret"].skipped
        assert not plan["Execute"].skipped

    def test_stub_tasks_keep_fill(self):
        for task in (TaskClass.PLACE_WINDOW, TaskClass.DELETE_COLUMN):
            plan = {p.step: p for p in plan_steps(task)}
            assert not plan["Fill"].skipped
            assert plan["Check"].skipped

    def test_unknown_has_no_plan(self):
        with pytest.raises(ValueError):
            plan_steps(TaskClass.UNKNOWN)


class TestCreateWallTurn:
    def test_ce1_completes_with_six_executed_steps(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Completed"
        assert out.trace.attempts == 1
        assert [r.step for r in out.trace.executed_steps()] == [
            "Interpret", "Fill", "Match", "Structure", "Execute", "Check",
        ]
        assert out.trace.check_invariants() == []
        assert out.check is not None and out.check.overall

    def test_wall_lands_in_project(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        engine.handle_utterance(session, CE1_PROMPT)
        names = [wt.spec.wall_detail_name for wt in session.project.wall_types.values()]
        assert names == ["CE1 Wall Detail"]

    def test_unknown_task_fails_listing_supported(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, "What's the weather like?")
        assert out.status == "Failed"
        assert "CreateWallDetail" in out.reason
        assert [r.step for r in out.trace.steps] == ["Interpret"]

    def test_empty_utterance_rejected(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        with pytest.raises(ProtocolError):
            engine.handle_utterance(session, "   ")

    def test_session_isolation(self):
        engine = make_engine(ce1_script())
        s1 = engine.create_session(seed=1)
        s2 = engine.create_session(seed=2)
        engine.handle_utterance(s1, CE1_PROMPT)
        assert len(s1.project.wall_types) == 1
        assert len(s2.project.wall_types) == 0

    def test_dialogue_turns_recorded(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        engine.handle_utterance(session, CE1_PROMPT)
        assert [t.speaker for t in session.turns] == ["User", "System"]
        assert session.turns[0].seq == 1 and session.turns[1].seq == 2


class TestRetryLoop:
    def test_violate_once_then_comply(self):
        # the retry prompt carries check feedback; first attempt does not
        rules = [
            MockRule(
                tag="structure", substring="failed these compliance checks",
                response=json.dumps(compliant_spec(CE1)),
            ),
            MockRule(tag="structure", response=json.dumps(violating_spec(CE1))),
        ]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Completed"
        assert out.trace.attempts == 2
        assert out.check.attempt == 2
        checks = [r for r in out.trace.steps if r.step == "Check"]
        assert [c.attempt for c in checks] == [1, 2]
        assert out.trace.check_invariants() == []

    def test_always_violating_exhausts_budget(self):
        rules = [MockRule(tag="structure", response=json.dumps(violating_spec(CE1)))]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Failed"
        assert out.trace.attempts == 5
        assert len([r for r in out.trace.steps if r.step == "Check"]) == 5
        wall_type = next(iter(session.project.wall_types.values()))
        assert wall_type.non_compliant

    def test_retry_budget_configurable(self):
        rules = [MockRule(tag="structure", response=json.dumps(violating_spec(CE1)))]
        engine = make_engine(ce1_script(structure_rules=rules), retry_budget=2)
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Failed"
        assert out.trace.attempts == 2

    def test_completed_never_lies_under_injection(self):
        # the central guarantee, exercised at p in {0, 0.3, 1}
        for p, seeds in ((0.0, range(3)), (0.3, range(40)), (1.0, range(3))):
            engine = Engine(
                EngineConfig(backend="mock", mock_seed=0), script=experiment_script(violation_p=p)
            )
            completed = failed = 0
            for seed in seeds:
                session = engine.create_session(seed=seed)
                out = engine.handle_utterance(session, CE1_PROMPT)
                if out.status == "Completed":
                    completed += 1
                    assert out.check is not None and out.check.overall
                else:
                    failed += 1
            if p == 0.0:
                assert failed == 0
            if p == 1.0:
                assert completed == 0

    def test_timeout_injection_fails_turn(self):
        rules = [
            MockRule(
                tag="structure", response="{}",
                failure=FailureSpec(mode="Timeout", probability=1.0),
            ),
        ]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Failed"
        assert "BackendUnreachableError" in out.reason

    def test_malformed_then_repaired(self):
        # seed 1: first draw < 0.5 mangles, second >= 0.5 passes through
        rules = [
            MockRule(
                tag="structure", response=json.dumps(compliant_spec(CE1)),
                failure=FailureSpec(mode="MalformedJson", probability=0.5),
            ),
        ]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=1)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Completed"
        structure = next(r for r in out.trace.steps if r.step == "Structure")
        assert len(structure.exchange_ids) == 2
        assert "repair" in structure.output_summary

    def test_repair_exhaustion_fails_turn(self):
        rules = [MockRule(tag="structure", response="not json at all")]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Failed"
        assert "RepairExhausted" in out.reason

    def test_check_disabled_completes_without_report(self):
        rules = [MockRule(tag="structure", response=json.dumps(violating_spec(CE1)))]
        engine = make_engine(ce1_script(structure_rules=rules), check_enabled=False)
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, CE1_PROMPT)
        assert out.status == "Completed"
        assert out.check is None
        check_records = [r for r in out.trace.steps if r.step == "Check"]
        assert len(check_records) == 1 and check_records[0].skipped


def transform_script() -> MockScript:
    return MockScript(
        rules=[
            MockRule(tag="classify", substring="request: rotate", response="SimpleTransform"),
            MockRule(tag="classify", response="Unknown"),
            MockRule(
                tag="extract",
                substring="rotate a model 90 degrees on the x axis",
                response=json.dumps(
                    {"slots": {"axis": {"value": "X", "span": "X axis"}, "degrees": {"value": 90, "span": "90"}}}
                ),
            ),
            MockRule(tag="extract", response=json.dumps({"slots": {}})),
        ]
    )


class TestSimpleTransform:
    def test_fill_and_check_skipped(self):
        engine = make_engine(transform_script())
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, "Rotate a model 90 degrees on the X axis")
        assert out.status == "Completed"
        by_step = {r.step: r for r in out.trace.steps}
        assert by_step["Fill"].skipped and by_step["Fill"].skip_reason
        assert by_step["Check"].skipped and by_step["Check"].skip_reason
        assert by_step["Match"].skipped
        assert not by_step["Structure"].skipped
        assert out.check is None

    def test_incomplete_transform_asks_despite_plan(self):
        engine = make_engine(transform_script())
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, "Rotate the model a bit")
        assert out.status == "NeedsAnswer"
        assert out.question.slot in ("axis", "degrees")
        fill_records = [r for r in out.trace.steps if r.step == "Fill"]
        assert len(fill_records) == 1 and not fill_records[0].skipped


def window_script() -> MockScript:
    return MockScript(
        rules=[
            MockRule(tag="classify", substring="request: place a window", response="PlaceWindow"),
            MockRule(tag="classify", response="Unknown"),
            MockRule(tag="extract", response=json.dumps({"slots": {}})),
        ]
    )


class TestClarification:
    def place_wall(self, session):
        spec = spec_from_dict(compliant_spec(CE1))
        type_id = create_wall_type(session.project, spec)
        session.project.wall_instances["wi-0001"] = WallInstance(
            id="wi-0001", wall_type=type_id, baseline=Baseline(start=(0, 0), end=(5000, 0)), height=2700
        )
        return type_id

    def test_question_chain_completes(self):
        engine = make_engine(window_script())
        session = engine.create_session(seed=5)
        self.place_wall(session)
        out = engine.handle_utterance(session, "Place a window in the north wall")
        assert out.status == "NeedsAnswer" and out.question.slot == "target_wall"
        out = engine.answer_question(session, "wi-0001")
        assert out.status == "NeedsAnswer" and out.question.slot == "width_mm"
        out = engine.answer_question(session, "1200")
        assert out.status == "NeedsAnswer" and out.question.slot == "height_mm"
        out = engine.answer_question(session, "900")
        assert out.status == "Completed"
        assert session.pending is None
        fill_records = [r for r in out.trace.steps if r.step == "Fill"]
        assert len(fill_records) == 1  # resumed, not duplicated
        assert out.trace.check_invariants() == []

    def test_unparseable_answer_reasks_with_attempt_bump(self):
        engine = make_engine(window_script())
        session = engine.create_session(seed=5)
        self.place_wall(session)
        engine.handle_utterance(session, "Place a window in the north wall")
        engine.answer_question(session, "wi-0001")
        out = engine.answer_question(session, "about yay wide")
        assert out.status == "NeedsAnswer"
        assert out.question.slot == "width_mm"
        assert out.question.attempt == 2
        assert "width_mm" not in session.pending.frame.slots
        out = engine.answer_question(session, "1200")
        assert out.question.slot == "height_mm"

    def test_answer_without_question_is_protocol_error(self):
        engine = make_engine(window_script())
        session = engine.create_session(seed=5)
        with pytest.raises(ProtocolError):
            engine.answer_question(session, "140")

    def test_utterance_with_pending_question_is_protocol_error(self):
        engine = make_engine(window_script())
        session = engine.create_session(seed=5)
        self.place_wall(session)
        engine.handle_utterance(session, "Place a window in the north wall")
        with pytest.raises(ProtocolError):
            engine.handle_utterance(session, "Place a window in the south wall")


def modify_script() -> MockScript:
    new_spec = {
        "wall_detail_name": "Upgraded Wall",
        "layers": [
            {"material": "Cement Render", "layer_type": "Finish", "thermal_conductivity": 1.0, "thickness": 10},
            {"material": "Reinforced Concrete", "layer_type": "Structure", "thermal_conductivity": 2.3, "thickness": 200},
        ],
    }
    return MockScript(
        rules=[
            MockRule(tag="classify", substring="request: upgrade", response="ModifyWall"),
            MockRule(tag="classify", response="Unknown"),
            MockRule(
                tag="extract",
                response=json.dumps({"slots": {"target_instance": {"value": "wi-0001", "span": "wi-0001"}}}),
            ),
            MockRule(tag="fill", response=json.dumps({"layer_composition": "render over concrete"})),
            MockRule(tag="structure", response=json.dumps(new_spec)),
        ]
    )


class TestModifyWall:
    def test_instance_repointed(self):
        engine = make_engine(modify_script())
        session = engine.create_session(seed=5)
        spec = spec_from_dict(compliant_spec(CE1))
        old_type = create_wall_type(session.project, spec)
        session.project.wall_instances["wi-0001"] = WallInstance(
            id="wi-0001", wall_type=old_type, baseline=Baseline(start=(0, 0), end=(5000, 0)), height=2700
        )
        out = engine.handle_utterance(session, "Upgrade wi-0001 with a thicker concrete core")
        assert out.status == "Completed"
        assert out.trace.check_invariants() == []
        instance = session.project.wall_instances["wi-0001"]
        new_type = session.project.wall_type_by_name("Upgraded Wall")
        assert instance.wall_type == new_type.id
        assert old_type in session.project.wall_types  # old type untouched

    def test_missing_target_fails_cleanly(self):
        engine = make_engine(modify_script())
        session = engine.create_session(seed=5)
        out = engine.handle_utterance(session, "Upgrade wi-0001 with a thicker concrete core")
        assert out.status == "Failed"
        assert "NotFoundError" in out.reason


class TestEvents:
    def test_ce1_emits_six_step_completed(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        sub = engine.subscribe_events(session)
        engine.handle_utterance(session, CE1_PROMPT)
        events = sub.drain()
        types = [e["type"] for e in events]
        assert types[0] == "turn_started"
        assert types[-1] == "turn_completed"
        assert types.count("step_completed") == 6
        assert "question_pending" not in types
        assert "check_report" in types and "model_updated" in types

    def test_needs_answer_turn_ends_with_question(self):
        engine = make_engine(window_script())
        session = engine.create_session(seed=5)
        sub = engine.subscribe_events(session)
        engine.handle_utterance(session, "Place a window in the north wall")
        types = [e["type"] for e in sub.drain()]
        assert types[-1] == "question_pending"
        assert "turn_completed" not in types

    def test_two_subscribers_see_identical_sequences(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        sub1 = engine.subscribe_events(session)
        sub2 = engine.subscribe_events(session)
        engine.handle_utterance(session, CE1_PROMPT)
        assert sub1.drain() == sub2.drain()

    def test_failed_turn_emits_turn_failed(self):
        rules = [MockRule(tag="structure", response=json.dumps(violating_spec(CE1)))]
        engine = make_engine(ce1_script(structure_rules=rules))
        session = engine.create_session(seed=5)
        sub = engine.subscribe_events(session)
        engine.handle_utterance(session, CE1_PROMPT)
        types = [e["type"] for e in sub.drain()]
        assert types[-1] == "turn_failed"
        assert types.count("check_report") == 5

    def test_subscribe_after_close_rejected(self):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=5)
        engine.close_session(session)
        from bimspeak.errors import SessionClosedError

        with pytest.raises(SessionClosedError):
            engine.subscribe_events(session)


class TestDeterminism:
    def run_trace(self, seed=9):
        engine = make_engine(ce1_script())
        session = engine.create_session(seed=seed)
        out = engine.handle_utterance(session, CE1_PROMPT)
        return out.trace.to_json_dict()

    def test_same_seed_same_trace(self):
        assert self.run_trace() == self.run_trace()

    def test_ce1_trace_matches_golden(self):
        got = json.dumps(self.run_trace(), indent=2, sort_keys=True) + "\n"
        golden = (GOLDEN_DIR / "ce1_trace.json").read_text(encoding="utf-8")
        assert got == golden

    def test_durations_are_synthetic_ticks(self):
        trace = self.run_trace()
        for step in trace["steps"]:
            assert step["duration_ms"] >= 0
            assert step["duration_ms"] == round(step["duration_ms"], 3)


class TestAudio:
    def test_transcription_feeds_pipeline(self):
        from bimspeak.experiment.mockdata import ALASKA_AUDIO, demo_script

        engine = Engine(EngineConfig(backend="mock"), script=demo_script())
        session = engine.create_session(seed=5)
        transcript = engine.transcribe(session, ALASKA_AUDIO, "audio/wav")
        assert transcript.text == "Create an exterior wall for Alaska."
        out = engine.handle_utterance(session, transcript.text)
        assert out.status == "Completed"


class TestConfig:
    def test_from_file_roundtrip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "backend": "mock",
                    "mock_script_path": "script.json",
                    "theta": 0.9,
                    "retry_budget": 3,
                    "mode": "split",
                    "custom_key": 42,
                }
            ),
            encoding="utf-8",
        )
        config = EngineConfig.from_file(path)
        assert config.theta == 0.9
        assert config.retry_budget == 3
        assert config.mode == "split"
        assert config.extra == {"custom_key": 42}

    @pytest.mark.parametrize(
        "bad",
        [
            {"backend": "oracle"},
            {"mode": "both"},
            {"theta": 1.5},
            {"retry_budget": 0},
            {"context_turns": -1},
        ],
    )
    def test_invalid_values_rejected(self, bad):
        with pytest.raises(ValueError):
            config = EngineConfig(**bad)
            config.validate()

    def test_mock_engine_requires_some_script(self):
        with pytest.raises(ValueError):
            Engine(EngineConfig(backend="mock"))

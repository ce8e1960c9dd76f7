"""The dialogue engine: six pipeline steps per turn, retry loop, events.

One Engine serves many Sessions. Turns within a session are serialized by the
session lock; steps themselves run sequentially (they share no hidden state,
so a parallel scheduler would be legal, just pointless at this scale).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from ..clock import TickClock, wall_clock
from ..compliance import (
    CheckReport,
    RequirementContext,
    Rule,
    builtin_registry,
    load_rule_params,
    run_checks,
)
from ..errors import (
    GatewayError,
    KernelError,
    ProtocolError,
    RepairExhaustedError,
    SessionClosedError,
    UnparseableAnswerError,
)
from ..gateway import (
    ChatRequest,
    LlmGateway,
    Message,
    MockChatBackend,
    MockScript,
    OpenAIChatBackend,
    ResponseHint,
    Transcript,
)
from ..grounding import (
    Mode,
    RepairState,
    build_structuring_prompt,
    load_alias_table,
    repair,
    resolve_frame,
    validate_payload,
)
from ..kernel import (
    ExecutionResult,
    Project,
    WallDetailSpec,
    apply_transform,
    apply_wall_detail,
    delete_column_stub,
    new_project,
    place_window_stub,
    total_thickness,
)
from ..nlu import (
    ClarificationQuestion,
    SlotSpec,
    TaskClass,
    TaskFrame,
    apply_answer,
    classify_task,
    extract_slots,
    fill_missing,
    load_slot_schemas,
)
from .config import EngineConfig
from .events import Subscription
from .session import DialogueTurn, PendingState, Session
from .trace import PipelineTrace, StepRecord

WALL_TASKS = (TaskClass.CREATE_WALL_DETAIL, TaskClass.MODIFY_WALL)


@dataclass
class PlannedStep:
    step: str
    skipped: bool = False
    reason: str = ""


def plan_steps(task: TaskClass) -> list[PlannedStep]:
    """Static step plan per task; Unknown has no plan."""
    if task is TaskClass.UNKNOWN:
        raise ValueError("Unknown task has no step plan")
    if task in WALL_TASKS:
        return [PlannedStep(s) for s in ("Interpret", "Fill", "Match", "Structure", "Execute", "Check")]
    if task is TaskClass.SIMPLE_TRANSFORM:
        return [
            PlannedStep("Interpret"),
            PlannedStep("Fill", skipped=True, reason="transform parameters come straight from the utterance"),
            PlannedStep("Match", skipped=True, reason="no material vocabulary involved"),
            PlannedStep("Structure"),
            PlannedStep("Execute"),
            PlannedStep("Check", skipped=True, reason="no compliance rules apply to transforms"),
        ]
    # PlaceWindow / DeleteColumn: clarification-heavy stubs, nothing to ground or check
    return [
        PlannedStep("Interpret"),
        PlannedStep("Fill"),
        PlannedStep("Match", skipped=True, reason="no material terms to ground"),
        PlannedStep("Structure"),
        PlannedStep("Execute"),
        PlannedStep("Check", skipped=True, reason="no compliance rules for this task"),
    ]


@dataclass
class TurnOutcome:
    status: str  # "Completed" | "NeedsAnswer" | "Failed"
    result: Optional[ExecutionResult] = None
    check: Optional[CheckReport] = None
    question: Optional[ClarificationQuestion] = None
    reason: str = ""
    trace: Optional[PipelineTrace] = None
    turn: int = 0

    def __post_init__(self):
        if self.status == "Completed" and self.check is not None:
            assert self.check.overall, "Completed outcome with failing checks"


@dataclass
class _TurnState:
    trace: PipelineTrace
    user_turn: int
    task: TaskClass = TaskClass.UNKNOWN
    frame: Optional[TaskFrame] = None
    schema: list = field(default_factory=list)
    fill_record: Optional[StepRecord] = None


class Engine:
    def __init__(
        self,
        config: EngineConfig,
        registry: Optional[list[Rule]] = None,
        script: Optional[MockScript] = None,
    ):
        config.validate()
        self.config = config
        self.schemas = load_slot_schemas(config.slot_schema_path)
        self.aliases = load_alias_table(config.alias_path)
        params = load_rule_params(config.rule_params_path) if config.rule_params_path else None
        self.registry = registry if registry is not None else builtin_registry(
            params, strict_rc=config.strict_rc_threshold
        )
        self.mode = Mode.FUSED if config.mode == "fused" else Mode.SPLIT
        self._script: Optional[MockScript] = None
        if config.backend == "mock":
            if script is not None:
                script.validate()
                self._script = script
            elif config.mock_script_path:
                self._script = MockScript.load(config.mock_script_path)
            else:
                raise ValueError("mock backend requires a script (mock_script_path or script=)")
        self._sessions: dict[str, Session] = {}
        self._counter = 0
        self._registry_lock = threading.Lock()
        self.audio_store: dict[str, bytes] = {}

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, project: Optional[Project] = None, seed: Optional[int] = None) -> Session:
        with self._registry_lock:
            self._counter += 1
            counter = self._counter
        seed = self.config.mock_seed + counter if seed is None else seed
        if self.config.backend == "mock":
            backend = MockChatBackend(self._script, seed=seed, clock=TickClock())
            gateway = LlmGateway(backend, sleep=lambda _s: None)  # synthetic time only
        else:
            backend = OpenAIChatBackend(
                base_url=self.config.base_url,
                chat_model=self.config.chat_model,
                transcription_model=self.config.transcription_model,
                api_key_env=self.config.api_key_env,
            )
            gateway = LlmGateway(backend)
        clock = TickClock() if self.config.backend == "mock" else wall_clock
        session = Session(
            id=f"s-{counter:04d}",
            project=project if project is not None else new_project(),
            gateway=gateway,
            clock=clock,
            seed=seed,
        )
        self._sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None or session.closed:
            raise SessionClosedError(f"no open session {session_id!r}")
        return session

    def close_session(self, session: Session) -> None:
        session.closed = True
        session.bus.close()
        self._sessions.pop(session.id, None)

    def subscribe_events(self, session: Session) -> Subscription:
        if session.closed:
            raise SessionClosedError(f"session {session.id} is closed")
        return session.bus.subscribe()

    def transcribe(self, session: Session, audio: bytes, media_type: str = "audio/wav") -> Transcript:
        return session.gateway.transcribe(audio, media_type)

    # -- turn entry points ----------------------------------------------------

    def handle_utterance(self, session: Session, text: str) -> TurnOutcome:
        if not text or not text.strip():
            raise ProtocolError("utterance must be non-empty")
        if session.pending is not None:
            raise ProtocolError("a clarification question is pending; call answer_question")
        with session.lock:
            context = session.context_lines(self.config.context_turns)
            user_turn = session.append_turn("User", text)
            trace = PipelineTrace(turn=user_turn.seq, utterance=text)
            session.traces.append(trace)
            state = _TurnState(trace=trace, user_turn=user_turn.seq)
            session.bus.emit("turn_started", turn=user_turn.seq, speaker="User", text=text)

            try:
                outcome = self._interpret(session, state, text, context)
                if outcome is not None:
                    return outcome
                questions = self._fill(session, state)
                if questions:
                    return self._park_on_question(session, state, questions[0])
                return self._grounded_phase(session, state)
            except (GatewayError, KernelError, RepairExhaustedError) as exc:
                return self._fail(session, state, f"{type(exc).__name__}: {exc}")

    def answer_question(self, session: Session, answer: str) -> TurnOutcome:
        pending = session.pending
        if pending is None:
            raise ProtocolError("no clarification question is pending")
        with session.lock:
            session.append_turn("User", answer)
            session.bus.emit(
                "turn_started", turn=pending.user_turn, speaker="User", text=answer, answering=pending.question.slot
            )
            state = _TurnState(
                trace=pending.trace, user_turn=pending.user_turn, task=pending.task,
                frame=pending.frame, schema=pending.schema,
            )
            try:
                apply_answer(pending.frame, pending.question, answer, pending.schema)
            except UnparseableAnswerError as exc:
                pending.question.attempt += 1
                return self._ask(session, state, pending.question, note=str(exc))

            if pending.fill_record is not None:
                pending.fill_record.output_summary += f"; answered {pending.question.slot}"
            remaining = self._questions_for(pending.frame, pending.schema)
            if remaining:
                session.pending = PendingState(
                    question=remaining[0], frame=pending.frame, schema=pending.schema,
                    task=pending.task, trace=pending.trace, fill_record=pending.fill_record,
                    user_turn=pending.user_turn,
                )
                return self._ask(session, state, remaining[0])

            session.pending = None
            try:
                return self._grounded_phase(session, state)
            except (GatewayError, KernelError, RepairExhaustedError) as exc:
                return self._fail(session, state, f"{type(exc).__name__}: {exc}")

    # -- pipeline steps --------------------------------------------------------

    def _start_step(self, session: Session, state: _TurnState, step: str, attempt: int = 1) -> tuple[StepRecord, float]:
        record = StepRecord(step=step, attempt=attempt)
        state.trace.steps.append(record)
        session.bus.emit("step_started", turn=state.user_turn, step=step, attempt=attempt)
        return record, session.clock()

    def _end_step(self, session: Session, state: _TurnState, record: StepRecord, started: float) -> None:
        record.duration_ms = (session.clock() - started) * 1000.0
        session.bus.emit("step_completed", turn=state.user_turn, **record.to_dict())

    def _skip_step(self, session: Session, state: _TurnState, planned: PlannedStep, attempt: int = 1) -> None:
        record = StepRecord(step=planned.step, attempt=attempt, skipped=True, skip_reason=planned.reason)
        state.trace.steps.append(record)
        session.bus.emit("step_completed", turn=state.user_turn, **record.to_dict())

    def _interpret(self, session: Session, state: _TurnState, text: str, context: list[str]) -> Optional[TurnOutcome]:
        """Classify + extract. Returns a Failed outcome for Unknown, else None."""
        record, started = self._start_step(session, state, "Interpret")
        record.input_summary = text
        task, confidence = classify_task(
            session.gateway, text, context, confidence_floor=self.config.confidence_floor
        )
        self._capture_exchanges(session, state, record)
        if task is TaskClass.UNKNOWN:
            record.output_summary = f"task=Unknown confidence={confidence:.2f}"
            self._end_step(session, state, record, started)
            supported = ", ".join(t.value for t in TaskClass if t is not TaskClass.UNKNOWN)
            return self._fail(
                session, state,
                f"could not map the request to a supported task (confidence {confidence:.2f}); "
                f"supported tasks: {supported}",
            )
        state.task = task
        state.schema = self.schemas.get(task, [])
        state.trace.task = task.value
        frame = extract_slots(session.gateway, text, task, state.schema, context=context)
        frame.dialogue_context = context
        state.frame = frame
        self._capture_exchanges(session, state, record)
        stated = ", ".join(f"{k}={v.value!r}" for k, v in frame.slots.items()) or "none"
        record.output_summary = f"task={task.value} confidence={confidence:.2f}; stated: {stated}"
        self._end_step(session, state, record, started)
        return None

    def _fill(self, session: Session, state: _TurnState) -> list[ClarificationQuestion]:
        planned = {p.step: p for p in plan_steps(state.task)}
        fill_plan = planned["Fill"]
        frame = state.frame
        if fill_plan.skipped and frame.ready:
            self._skip_step(session, state, fill_plan)
            return []
        # A skipped-by-plan Fill still runs when required slots are absent:
        # inventing transform parameters is worse than asking.
        record, started = self._start_step(session, state, "Fill")
        record.input_summary = f"missing: {', '.join(frame.missing) or 'nothing'}"
        frame, questions = fill_missing(
            session.gateway, frame, state.schema, temperature=self.config.fill_temperature
        )
        state.frame = frame
        self._capture_exchanges(session, state, record)
        inferred = [n for n, s in frame.slots.items() if s.provenance.value == "Inferred"]
        record.output_summary = (
            f"inferred: {', '.join(inferred) or 'nothing'}; open questions: {len(questions)}"
        )
        self._end_step(session, state, record, started)
        state.fill_record = record
        return questions

    def _questions_for(self, frame, schema: list[SlotSpec]) -> list[ClarificationQuestion]:
        """Rebuild the question queue from what is still missing, schema order."""
        by_name = {s.name: s for s in schema}
        out = []
        for spec in schema:
            if spec.name in frame.missing and by_name[spec.name].required:
                out.append(
                    ClarificationQuestion(
                        slot=spec.name,
                        text=spec.question or f"Please provide a value for {spec.name}.",
                        suggested=tuple(spec.suggested),
                    )
                )
        return out

    def _grounded_phase(self, session: Session, state: _TurnState) -> TurnOutcome:
        """Match, then the Structure → Execute → Check loop (or the stub path)."""
        planned = {p.step: p for p in plan_steps(state.task)}

        match_plan = planned["Match"]
        if match_plan.skipped:
            self._skip_step(session, state, match_plan)
        else:
            record, started = self._start_step(session, state, "Match")
            record.input_summary = ", ".join(
                f"{k}={v.value!r}" for k, v in state.frame.slots.items() if isinstance(v.value, str)
            )
            frame, report = resolve_frame(
                state.frame, session.project.materials(), theta=self.config.theta, aliases=self.aliases
            )
            state.frame = frame
            resolved = ", ".join(f"{slot}: {term!r} -> {canon!r}" for slot, term, canon in report.resolved) or "nothing"
            unmatched = ", ".join(f"{slot} ({term!r})" for slot, term in report.unmatched)
            record.output_summary = f"resolved: {resolved}" + (f"; unmatched: {unmatched}" if unmatched else "")
            self._end_step(session, state, record, started)

        if state.task in WALL_TASKS:
            return self._wall_detail_loop(session, state)
        return self._simple_structure_execute(session, state, planned)

    def _simple_structure_execute(self, session: Session, state: _TurnState, planned: dict) -> TurnOutcome:
        frame = state.frame
        record, started = self._start_step(session, state, "Structure")
        args = {name: slot.value for name, slot in frame.slots.items()}
        record.input_summary = frame.source_utterance
        record.output_summary = f"op={state.task.value} args={args}"
        self._end_step(session, state, record, started)

        record, started = self._start_step(session, state, "Execute")
        if state.task is TaskClass.SIMPLE_TRANSFORM:
            result = apply_transform(session.project, frame.value("axis"), frame.value("degrees"))
        elif state.task is TaskClass.PLACE_WINDOW:
            result = place_window_stub(
                session.project, frame.value("target_wall"),
                frame.value("width_mm"), frame.value("height_mm"),
            )
        else:
            result = delete_column_stub(session.project, frame.value("target_column"))
        record.output_summary = result.summary
        self._end_step(session, state, record, started)
        session.bus.emit(
            "model_updated", turn=state.user_turn, mutated_ids=list(result.mutated_ids),
            summary=result.summary, wall_types=self._wall_type_snapshot(session.project),
        )
        self._skip_step(session, state, planned["Check"])
        return self._complete(session, state, result, check=None)

    def _wall_detail_loop(self, session: Session, state: _TurnState) -> TurnOutcome:
        frame = state.frame
        ctx = RequirementContext.build(
            frame.value("structural_material"),
            frame.value("min_thickness"),
            library=session.project.materials(),
            aliases=self.aliases,
            theta=self.config.theta,
        )
        target = frame.value("target_instance") if state.task is TaskClass.MODIFY_WALL else None
        base_prompt = build_structuring_prompt(frame, mode=self.mode, library=session.project.materials())
        feedback: list[str] = []
        result: Optional[ExecutionResult] = None
        report: Optional[CheckReport] = None

        for attempt in range(1, self.config.retry_budget + 1):
            state.trace.attempts = attempt
            spec = self._structure_attempt(session, state, base_prompt, feedback, attempt)

            record, started = self._start_step(session, state, "Execute", attempt)
            result = apply_wall_detail(session.project, spec, target=target)
            record.input_summary = spec.wall_detail_name
            record.output_summary = result.summary
            self._end_step(session, state, record, started)
            session.bus.emit(
                "model_updated", turn=state.user_turn, mutated_ids=list(result.mutated_ids),
                summary=result.summary, wall_types=self._wall_type_snapshot(session.project),
            )

            if not self.config.check_enabled:
                self._skip_step(
                    session, state,
                    PlannedStep("Check", skipped=True, reason="checking disabled by configuration"),
                    attempt,
                )
                return self._complete(session, state, result, check=None)

            record, started = self._start_step(session, state, "Check", attempt)
            report = run_checks(spec, ctx, self.registry, attempt=attempt)
            record.input_summary = f"{spec.wall_detail_name}: {total_thickness(spec):g} mm total"
            record.output_summary = "pass" if report.overall else (
                "fail: " + "; ".join(v.rule_id for v in report.failed)
            )
            self._end_step(session, state, record, started)
            session.bus.emit("check_report", turn=state.user_turn, attempt=attempt, report=report.to_dict())

            if report.overall:
                return self._complete(session, state, result, check=report)
            feedback = [f"{v.rule_id}: {v.message}" for v in report.failed]

        # Budget spent. The last attempt's type stays in the model, flagged.
        wall_type = session.project.wall_type_by_name(result.produced_spec.wall_detail_name)
        if wall_type is not None:
            wall_type.non_compliant = True
            session.bus.emit(
                "model_updated", turn=state.user_turn, mutated_ids=[wall_type.id],
                summary=f"flagged {wall_type.spec.wall_detail_name!r} non-compliant",
                wall_types=self._wall_type_snapshot(session.project),
            )
        failed = "; ".join(f"{v.rule_id}: {v.message}" for v in report.failed)
        return self._fail(
            session, state,
            f"no compliant detail after {self.config.retry_budget} attempts; last failures: {failed}",
        )

    def _structure_attempt(
        self, session: Session, state: _TurnState, base_prompt: ChatRequest,
        feedback: list[str], attempt: int,
    ) -> WallDetailSpec:
        """One Structure step: prompt (with check feedback), validate, repair."""
        record, started = self._start_step(session, state, "Structure", attempt)
        request = base_prompt
        if feedback:
            content = base_prompt.messages[0].content + "\n\n" + "\n".join(
                ["The previous design failed these compliance checks:", *(f"- {line}" for line in feedback),
                 "Regenerate the JSON so every check passes."]
            )
            request = ChatRequest(
                system_instruction=base_prompt.system_instruction,
                messages=[Message("user", content)],
                temperature=base_prompt.temperature,
                response_hint=ResponseHint.JSON_OBJECT,
                tags=tuple(dict.fromkeys((*base_prompt.tags, "retry"))),
            )
        record.input_summary = "retry with check feedback" if feedback else "initial structuring"

        repair_state = RepairState(budget=self.config.repair_budget)
        response = session.gateway.chat(request)
        self._capture_exchanges(session, state, record, attempt)
        payload = validate_payload(response.content)
        while payload.violations:
            request = repair(repair_state, payload, request, state.frame.source_utterance)
            response = session.gateway.chat(request)
            self._capture_exchanges(session, state, record, attempt)
            payload = validate_payload(response.content)
        record.output_summary = (
            f"{payload.parsed.wall_detail_name}: {len(payload.parsed.layers)} layers"
            + (f" (after {repair_state.attempt} repair(s))" if repair_state.attempt else "")
        )
        self._end_step(session, state, record, started)
        return payload.parsed

    # -- outcomes ---------------------------------------------------------------

    def _capture_exchanges(self, session: Session, state: _TurnState, record: StepRecord, attempt: int = 1) -> None:
        """Adopt any gateway exchanges made since the last capture into the trace."""
        for request, response in session.gateway.drain_exchange_log():
            ex = state.trace.add_exchange(record.step, attempt, request, response)
            record.exchange_ids.append(ex.id)

    def _park_on_question(self, session: Session, state: _TurnState, question: ClarificationQuestion) -> TurnOutcome:
        session.pending = PendingState(
            question=question, frame=state.frame, schema=state.schema, task=state.task,
            trace=state.trace, fill_record=state.fill_record, user_turn=state.user_turn,
        )
        return self._ask(session, state, question)

    def _ask(self, session: Session, state: _TurnState, question: ClarificationQuestion, note: str = "") -> TurnOutcome:
        text = f"{note.strip().capitalize()}. {question.text}" if note else question.text
        session.append_turn("System", text, trace_index=len(session.traces) - 1)
        session.bus.emit(
            "question_pending", turn=state.user_turn, slot=question.slot, text=text,
            suggested=list(question.suggested), attempt=question.attempt,
        )
        state.trace.outcome = "NeedsAnswer"
        return TurnOutcome(
            status="NeedsAnswer", question=question, trace=state.trace, turn=state.user_turn
        )

    def _complete(self, session: Session, state: _TurnState, result: ExecutionResult, check: Optional[CheckReport]) -> TurnOutcome:
        message = result.summary
        if check is not None:
            message += f" All {len(check.verdicts)} checks passed."
        session.append_turn("System", message, trace_index=len(session.traces) - 1)
        state.trace.outcome = "Completed"
        session.bus.emit(
            "turn_completed", turn=state.user_turn, outcome="Completed", message=message,
            check=check.to_dict() if check is not None else None,
        )
        return TurnOutcome(
            status="Completed", result=result, check=check, trace=state.trace, turn=state.user_turn
        )

    def _fail(self, session: Session, state: _TurnState, reason: str) -> TurnOutcome:
        session.append_turn("System", reason, trace_index=len(session.traces) - 1)
        state.trace.outcome = "Failed"
        session.bus.emit("turn_failed", turn=state.user_turn, reason=reason)
        return TurnOutcome(status="Failed", reason=reason, trace=state.trace, turn=state.user_turn)

    @staticmethod
    def _wall_type_snapshot(project: Project) -> list[dict]:
        return [
            {
                "id": wt.id,
                "name": wt.spec.wall_detail_name,
                "revision": wt.revision,
                "non_compliant": wt.non_compliant,
                "total_mm": round(total_thickness(wt.spec), 6),
                "layers": [
                    {
                        "material": layer.material,
                        "layer_type": layer.layer_type.value,
                        "thickness": layer.thickness,
                        "thermal_conductivity": layer.thermal_conductivity,
                    }
                    for layer in wt.spec.layers
                ],
            }
            for wt in sorted(project.wall_types.values(), key=lambda w: w.id)
        ]

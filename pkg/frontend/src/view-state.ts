/** The console's view model: a pure fold over the ordered event stream.
 *
 * Replaying a recorded event log reproduces the exact same state, which is
 * what the golden-log tests pin down. Anything that smells out of order
 * (events for an earlier turn, a step finishing in a turn that never
 * started) sets `resyncNeeded` instead of guessing; the connection layer
 * reacts by refetching the project.
 */

import type {
  CheckReport,
  QuestionPendingEvent,
  ServerEvent,
  WallTypeSnapshot,
} from "./protocol.js";

export const STEP_ORDER = ["Interpret", "Fill", "Match", "Structure", "Execute", "Check"] as const;

export type StepStatus = "pending" | "active" | "done" | "skipped";

export interface StepView {
  step: string;
  status: StepStatus;
  attempt: number;
  skipReason: string;
  summary: string;
}

export interface Bubble {
  speaker: "user" | "system";
  text: string;
  kind: "utterance" | "answer" | "result" | "error" | "question";
}

export interface TurnView {
  turn: number;
  status: "running" | "awaiting_answer" | "completed" | "failed";
  bubbles: Bubble[];
  steps: StepView[];
  check: CheckReport | null;
}

export interface ViewState {
  sessionId: string;
  turns: TurnView[];
  pendingQuestion: QuestionPendingEvent | null;
  wallTypes: WallTypeSnapshot[];
  selectedWallId: string | null;
  lastCheck: CheckReport | null;
  resyncNeeded: boolean;
}

export function initialState(sessionId: string): ViewState {
  return {
    sessionId,
    turns: [],
    pendingQuestion: null,
    wallTypes: [],
    selectedWallId: null,
    lastCheck: null,
    resyncNeeded: false,
  };
}

function freshSteps(): StepView[] {
  return STEP_ORDER.map((step) => ({
    step,
    status: "pending",
    attempt: 1,
    skipReason: "",
    summary: "",
  }));
}

function currentTurn(state: ViewState): TurnView | null {
  return state.turns.length ? state.turns[state.turns.length - 1] : null;
}

function stepView(turn: TurnView, name: string): StepView | null {
  return turn.steps.find((s) => s.step === name) ?? null;
}

/** Apply one event, returning a new state. The input state is not mutated. */
export function applyEvent(state: ViewState, event: ServerEvent): ViewState {
  const next: ViewState = {
    ...state,
    turns: state.turns.map((t) => ({
      ...t,
      bubbles: [...t.bubbles],
      steps: t.steps.map((s) => ({ ...s })),
    })),
  };
  const last = currentTurn(next);

  if (event.turn < (last?.turn ?? 0)) {
    next.resyncNeeded = true;
    return next;
  }

  switch (event.type) {
    case "turn_started": {
      if (event.answering && last && last.turn === event.turn) {
        last.bubbles.push({ speaker: "user", text: event.text, kind: "answer" });
        last.status = "running";
        next.pendingQuestion = null;
        break;
      }
      next.turns.push({
        turn: event.turn,
        status: "running",
        bubbles: [{ speaker: "user", text: event.text, kind: "utterance" }],
        steps: freshSteps(),
        check: null,
      });
      next.pendingQuestion = null;
      break;
    }
    case "step_started": {
      if (!last || last.turn !== event.turn) {
        next.resyncNeeded = true;
        break;
      }
      const step = stepView(last, event.step);
      if (step) {
        step.status = "active";
        step.attempt = event.attempt;
      }
      break;
    }
    case "step_completed": {
      if (!last || last.turn !== event.turn) {
        next.resyncNeeded = true;
        break;
      }
      const step = stepView(last, event.step);
      if (step) {
        step.status = event.skipped ? "skipped" : "done";
        step.attempt = event.attempt;
        step.skipReason = event.skip_reason;
        step.summary = event.output_summary;
      }
      break;
    }
    case "question_pending": {
      next.pendingQuestion = event;
      if (last && last.turn === event.turn) {
        last.status = "awaiting_answer";
        last.bubbles.push({ speaker: "system", text: event.text, kind: "question" });
      }
      break;
    }
    case "check_report": {
      next.lastCheck = event.report;
      if (last && last.turn === event.turn) last.check = event.report;
      break;
    }
    case "model_updated": {
      next.wallTypes = event.wall_types;
      const mutated = event.mutated_ids.filter((id) =>
        event.wall_types.some((wt) => wt.id === id),
      );
      if (mutated.length) {
        next.selectedWallId = mutated[mutated.length - 1];
      } else if (
        next.selectedWallId &&
        !event.wall_types.some((wt) => wt.id === next.selectedWallId)
      ) {
        next.selectedWallId = null;
      }
      break;
    }
    case "turn_completed": {
      if (last && last.turn === event.turn) {
        last.status = "completed";
        last.bubbles.push({ speaker: "system", text: event.message, kind: "result" });
        if (event.check) last.check = event.check;
      }
      next.pendingQuestion = null;
      if (event.check) next.lastCheck = event.check;
      break;
    }
    case "turn_failed": {
      if (last && last.turn === event.turn) {
        last.status = "failed";
        last.bubbles.push({ speaker: "system", text: event.reason, kind: "error" });
      }
      next.pendingQuestion = null;
      break;
    }
  }
  return next;
}

export function replay(sessionId: string, events: ServerEvent[]): ViewState {
  return events.reduce(applyEvent, initialState(sessionId));
}

/** The step the engine is working on right now, if any. */
export function liveStep(state: ViewState): StepView | null {
  const last = currentTurn(state);
  if (!last || last.status !== "running") return null;
  return last.steps.find((s) => s.status === "active") ?? null;
}

export function selectedWall(state: ViewState): WallTypeSnapshot | null {
  if (!state.wallTypes.length) return null;
  const picked = state.wallTypes.find((wt) => wt.id === state.selectedWallId);
  return picked ?? state.wallTypes[state.wallTypes.length - 1];
}

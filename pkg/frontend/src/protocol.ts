/** Wire protocol types: mirrors the engine's WebSocket events and REST shapes. */

export interface WallLayer {
  material: string;
  layer_type: string;
  thickness: number;
  thermal_conductivity: number;
}

export interface WallTypeSnapshot {
  id: string;
  name: string;
  revision: number;
  non_compliant: boolean;
  total_mm: number;
  layers: WallLayer[];
}

export interface Verdict {
  rule: string;
  passed: boolean;
  measured: number | null;
  unit: string | null;
  expected: string | null;
  message: string;
  severity: string;
  skipped: boolean;
}

export interface CheckReport {
  overall: boolean;
  attempt: number;
  verdicts: Verdict[];
}

export interface TurnStartedEvent {
  type: "turn_started";
  turn: number;
  speaker: string;
  text: string;
  answering?: string;
}

export interface StepStartedEvent {
  type: "step_started";
  turn: number;
  step: string;
  attempt: number;
}

export interface StepCompletedEvent {
  type: "step_completed";
  turn: number;
  step: string;
  attempt: number;
  skipped: boolean;
  skip_reason: string;
  input_summary: string;
  output_summary: string;
  duration_ms: number;
  exchange_ids: string[];
}

export interface QuestionPendingEvent {
  type: "question_pending";
  turn: number;
  slot: string;
  text: string;
  suggested: string[];
  attempt: number;
}

export interface CheckReportEvent {
  type: "check_report";
  turn: number;
  attempt: number;
  report: CheckReport;
}

export interface ModelUpdatedEvent {
  type: "model_updated";
  turn: number;
  mutated_ids: string[];
  summary: string;
  wall_types: WallTypeSnapshot[];
}

export interface TurnCompletedEvent {
  type: "turn_completed";
  turn: number;
  outcome: string;
  message: string;
  check: CheckReport | null;
}

export interface TurnFailedEvent {
  type: "turn_failed";
  turn: number;
  reason: string;
}

export type ServerEvent =
  | TurnStartedEvent
  | StepStartedEvent
  | StepCompletedEvent
  | QuestionPendingEvent
  | CheckReportEvent
  | ModelUpdatedEvent
  | TurnCompletedEvent
  | TurnFailedEvent;

export const EVENT_TYPES: ReadonlySet<string> = new Set([
  "turn_started",
  "step_started",
  "step_completed",
  "question_pending",
  "check_report",
  "model_updated",
  "turn_completed",
  "turn_failed",
]);

/** REST project snapshot (GET /sessions/{id}/project). The wall list there
 * nests the editable spec; the console flattens it into the same snapshot
 * shape the model_updated events carry. */
export interface ProjectWallType {
  id: string;
  spec: { wall_detail_name: string; layers: WallLayer[] };
  revision: number;
  non_compliant: boolean;
}

export interface ProjectSnapshot {
  schema_version: number;
  wall_types: ProjectWallType[];
}

export function wallSnapshotsFromProject(project: ProjectSnapshot): WallTypeSnapshot[] {
  return project.wall_types.map((wt) => ({
    id: wt.id,
    name: wt.spec.wall_detail_name,
    revision: wt.revision,
    non_compliant: wt.non_compliant,
    total_mm: wt.spec.layers.reduce((total, layer) => total + layer.thickness, 0),
    layers: wt.spec.layers,
  }));
}

/** Ad-hoc server messages outside the event stream proper. */
export interface ErrorMessage {
  type: "error";
  message: string;
}

export interface TranscriptMessage {
  type: "transcript";
  text: string;
}

export type ServerMessage = ServerEvent | ErrorMessage | TranscriptMessage;

export type ClientMessage =
  | { type: "utterance"; text: string }
  | { type: "answer"; text: string }
  | { type: "upload_audio_ref"; ref: string };

export function isServerEvent(message: ServerMessage): message is ServerEvent {
  return EVENT_TYPES.has(message.type);
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string") return null;
  if (!EVENT_TYPES.has(type) && type !== "error" && type !== "transcript") return null;
  return data as ServerMessage;
}

/** A terminal message ends the in-flight turn from the client's perspective. */
export function isTerminal(message: ServerMessage): boolean {
  return (
    message.type === "turn_completed" ||
    message.type === "turn_failed" ||
    message.type === "question_pending" ||
    message.type === "error"
  );
}

/** Bootstrap: create a session, open the event socket, wire the panes. */

import { ConsoleConnection, type SocketLike } from "./connection.js";
import { renderCheckReport, renderDialogue, renderQuestionBanner } from "./dialogue.js";
import { renderLayerStack } from "./layer-stack.js";
import { type ProjectSnapshot, isServerEvent, wallSnapshotsFromProject } from "./protocol.js";
import {
  AudioUnsupported,
  TranscriptionFailed,
  browserRecorder,
  type RecorderLike,
  uploadAudio,
} from "./audio.js";
import { applyEvent, initialState, selectedWall, type ViewState } from "./view-state.js";

const baseUrl = window.location.origin;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function createSession(): Promise<string> {
  const response = await fetch(`${baseUrl}/sessions`, { method: "POST" });
  const body = (await response.json()) as { session_id: string };
  return body.session_id;
}

function wsUrl(sessionId: string): string {
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${window.location.host}/sessions/${sessionId}/events`;
}

async function boot(): Promise<void> {
  const sessionId = await createSession();
  let state: ViewState = initialState(sessionId);

  const dialoguePane = el<HTMLDivElement>("dialogue-pane");
  const bannerSlot = el<HTMLDivElement>("banner-slot");
  const wallPane = el<HTMLDivElement>("wall-pane");
  const checkPane = el<HTMLDivElement>("check-pane");
  const input = el<HTMLInputElement>("command-input");
  const sendButton = el<HTMLButtonElement>("send-button");
  const micButton = el<HTMLButtonElement>("mic-button");
  const statusLine = el<HTMLDivElement>("status-line");
  el<HTMLSpanElement>("session-label").textContent = sessionId;

  function redraw(): void {
    dialoguePane.innerHTML = renderDialogue(state);
    bannerSlot.innerHTML = renderQuestionBanner(state);
    checkPane.innerHTML = renderCheckReport(state);
    const wall = selectedWall(state);
    wallPane.innerHTML = wall
      ? renderLayerStack(wall, state.lastCheck, wallPane.clientWidth || 600)
      : `<div class="empty">No wall types yet. Ask for one.</div>`;
    dialoguePane.scrollTop = dialoguePane.scrollHeight;
    if (state.pendingQuestion) input.focus();
  }

  async function resync(): Promise<void> {
    // the model view may have drifted; the event stream stays authoritative
    // for dialogue, but the wall list is refetched wholesale
    const response = await fetch(`${baseUrl}/sessions/${sessionId}/project`);
    if (!response.ok) return;
    const project = (await response.json()) as ProjectSnapshot;
    const wallTypes = wallSnapshotsFromProject(project);
    const selectedWallId = wallTypes.some((wt) => wt.id === state.selectedWallId)
      ? state.selectedWallId
      : null;
    state = { ...state, wallTypes, selectedWallId, resyncNeeded: false };
    redraw();
  }

  const connection = new ConsoleConnection(
    wsUrl(sessionId),
    {
      onMessage: (message) => {
        if (isServerEvent(message)) {
          state = applyEvent(state, message);
          if (state.resyncNeeded) void resync();
        } else if (message.type === "transcript") {
          input.value = message.text;
        } else {
          statusLine.textContent = message.message;
        }
        redraw();
      },
      onBusyChange: (busy, queued) => {
        sendButton.disabled = busy && queued > 0;
        statusLine.textContent = busy
          ? queued
            ? `working, ${queued} message(s) queued`
            : "working"
          : "";
      },
      onResync: () => void resync(),
    },
    (url) => new WebSocket(url) as unknown as SocketLike,
  );
  connection.connect();

  function submit(): void {
    const text = input.value.trim();
    if (!text) return;
    if (state.pendingQuestion) {
      connection.sendAnswer(text);
    } else {
      connection.sendUtterance(text);
    }
    input.value = "";
  }

  sendButton.addEventListener("click", submit);
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") submit();
  });

  let recorder: RecorderLike | null = null;
  micButton.addEventListener("click", async () => {
    try {
      if (!recorder) {
        recorder = await browserRecorder();
        recorder.start();
        micButton.classList.add("recording");
        micButton.textContent = "stop";
        return;
      }
      const blob = await recorder.stop();
      recorder = null;
      micButton.classList.remove("recording");
      micButton.textContent = "speak";
      const transcript = await uploadAudio(baseUrl, sessionId, blob);
      statusLine.textContent = `heard: "${transcript.text}" (turn ${transcript.outcomeStatus})`;
    } catch (error) {
      recorder = null;
      micButton.classList.remove("recording");
      if (error instanceof AudioUnsupported) {
        micButton.disabled = true;
        micButton.title = error.message;
      } else if (error instanceof TranscriptionFailed) {
        statusLine.textContent = error.message;
      } else {
        statusLine.textContent = String(error);
      }
    }
  });

  redraw();
}

void boot();

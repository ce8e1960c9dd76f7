/** Dialogue pane and step ticker rendering. Pure string-in, string-out so
 * the golden-log tests can assert on the produced markup without a browser.
 */

import type { TurnView, ViewState } from "./view-state.js";
import { escapeHtml } from "./html.js";

export function renderStepTicker(turn: TurnView): string {
  const items = turn.steps
    .map((step) => {
      const title = step.status === "skipped" ? step.skipReason : step.summary;
      return (
        `<li class="step ${step.status}" data-step="${step.step}" ` +
        `title="${escapeHtml(title)}">${step.step}` +
        (step.attempt > 1 ? `<sup>${step.attempt}</sup>` : "") +
        `</li>`
      );
    })
    .join("");
  return `<ol class="step-ticker">${items}</ol>`;
}

function renderBubble(turn: TurnView, bubbleIndex: number): string {
  const bubble = turn.bubbles[bubbleIndex];
  const traceLink =
    bubble.speaker === "system" && bubble.kind !== "question"
      ? ` <a class="trace-link" href="#trace-${turn.turn}">trace</a>`
      : "";
  return (
    `<div class="bubble ${bubble.speaker} ${bubble.kind}">` +
    `${escapeHtml(bubble.text)}${traceLink}</div>`
  );
}

export function renderTurn(turn: TurnView): string {
  const bubbles = turn.bubbles.map((_, i) => renderBubble(turn, i)).join("");
  return (
    `<section class="turn ${turn.status}" data-turn="${turn.turn}">` +
    bubbles +
    renderStepTicker(turn) +
    `</section>`
  );
}

export function renderDialogue(state: ViewState): string {
  const resync = state.resyncNeeded
    ? `<div class="resync-banner">Event stream out of sync, refreshing the model view.</div>`
    : "";
  return `<div class="dialogue">${resync}${state.turns.map(renderTurn).join("")}</div>`;
}

export function renderQuestionBanner(state: ViewState): string {
  const question = state.pendingQuestion;
  if (!question) return "";
  const suggested = question.suggested.length
    ? `<span class="suggested">${question.suggested.map(escapeHtml).join(" | ")}</span>`
    : "";
  const retry = question.attempt > 1 ? ` (attempt ${question.attempt})` : "";
  return (
    `<div class="question-banner" data-slot="${escapeHtml(question.slot)}">` +
    `${escapeHtml(question.text)}${retry}${suggested}</div>`
  );
}

export function renderCheckReport(state: ViewState): string {
  const report = state.lastCheck;
  if (!report) return "";
  const rows = report.verdicts
    .map(
      (v) =>
        `<li class="verdict ${v.passed ? "pass" : "fail"}">` +
        `${escapeHtml(v.rule)}: ${escapeHtml(v.message)}</li>`,
    )
    .join("");
  const headline = report.overall ? "all checks passed" : "checks failed";
  return (
    `<div class="check-report ${report.overall ? "pass" : "fail"}">` +
    `<div class="check-headline">${headline} (attempt ${report.attempt})</div>` +
    `<ul>${rows}</ul></div>`
  );
}

// HTML renderers. All pure string builders over ConsoleState so the view can
// be asserted without a browser. Numbers shown in the result table are raw
// token substrings of the server's result artifact, never values that were
// parsed into floats and reformatted, so what the user sees is byte-for-byte
// what the service produced.

import { stepCards, type CardView, type ConsoleState } from "./state.js";

const ERROR_EXCERPT_CHARS = 220;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface ResultField {
  key: string;
  raw: string;
}

/**
 * Split a flat JSON object into (key, raw value text) pairs without parsing
 * the values, preserving the server's exact number formatting.
 */
export function extractFields(jsonText: string): ResultField[] {
  const fields: ResultField[] = [];
  const pattern = /"((?:[^"\\]|\\.)*)"\s*:\s*("(?:[^"\\]|\\.)*"|[^,}\s][^,}]*)/g;
  for (const match of jsonText.matchAll(pattern)) {
    fields.push({ key: match[1], raw: match[2].trim() });
  }
  return fields;
}

export function renderBanner(state: ConsoleState): string {
  if (state.connection === "connecting") {
    return '<div class="banner info">Connecting to the analysis service...</div>';
  }
  if (state.connection === "down") {
    return (
      '<div class="banner error">' +
      "The analysis service is unreachable. " +
      '<button type="button" data-action="retry">Retry</button>' +
      "</div>"
    );
  }
  if (state.lastError !== null) {
    return `<div class="banner error">${escapeHtml(state.lastError)}</div>`;
  }
  return "";
}

export function renderMessages(state: ConsoleState): string {
  const items = state.messages
    .map(
      (m) =>
        `<li class="message ${m.role}"><span class="role">${m.role}</span>` +
        `<span class="text">${escapeHtml(m.text)}</span></li>`,
    )
    .join("");
  return `<ul class="messages">${items}</ul>`;
}

export function renderStepCards(state: ConsoleState): string {
  const cards = stepCards(state);
  if (cards.length === 0) {
    return '<p class="plan-empty">No plan yet. Describe an analysis to get started.</p>';
  }
  const items = cards.map(renderCard).join("");
  const notes = state.plan?.notes ?? [];
  const noteHtml = notes.length
    ? `<ul class="plan-notes">${notes.map((n) => `<li>${escapeHtml(n)}</li>`).join("")}</ul>`
    : "";
  return `<ol class="plan">${items}</ol>${noteHtml}`;
}

function renderCard(card: CardView): string {
  const classes = ["step-card", card.status];
  if (card.running) {
    classes.push("running");
  }
  const attempts =
    card.attempts > 1
      ? `<span class="attempts">attempt ${card.attempts}</span>`
      : "";
  const tool = card.selected_tool
    ? `<span class="tool">${escapeHtml(card.selected_tool)}</span>`
    : "";
  const error = card.lastError
    ? `<pre class="step-error">${escapeHtml(excerpt(card.lastError))}</pre>`
    : "";
  return (
    `<li class="${classes.join(" ")}" data-step-id="${card.id}">` +
    `<header><span class="step-id">${card.id}</span>` +
    `<span class="action">${escapeHtml(card.action)}</span>` +
    `<span class="status">${escapeHtml(card.status)}</span>${attempts}</header>` +
    `<p class="description">${escapeHtml(card.description)}</p>` +
    tool +
    error +
    "</li>"
  );
}

function excerpt(text: string): string {
  return text.length > ERROR_EXCERPT_CHARS
    ? text.slice(0, ERROR_EXCERPT_CHARS) + "..."
    : text;
}

export function renderResult(state: ConsoleState): string {
  if (state.resultText !== null) {
    const rows = extractFields(state.resultText)
      .map(
        (f) =>
          `<tr><th>${escapeHtml(f.key)}</th>` +
          `<td class="value">${escapeHtml(f.raw)}</td></tr>`,
      )
      .join("");
    const method = state.reportMethod
      ? `<p class="method">method: ${escapeHtml(state.reportMethod)}</p>`
      : "";
    return (
      '<section class="result">' +
      `<table class="result-table"><tbody>${rows}</tbody></table>` +
      method +
      '<a class="download" download="result.json" data-download href="#">download result.json</a>' +
      "</section>"
    );
  }
  if (state.failure !== null) {
    const errors = state.failure.errors
      .map((e) => `<li>${escapeHtml(excerpt(e))}</li>`)
      .join("");
    return (
      '<section class="result failure">' +
      `<p>Step ${state.failure.subtaskId} failed.</p>` +
      `<ul class="failure-errors">${errors}</ul>` +
      "</section>"
    );
  }
  return "";
}

export function renderDatasets(state: ConsoleState): string {
  if (state.datasets.length === 0) {
    return "";
  }
  const chips = state.datasets
    .map(
      (name) =>
        `<button type="button" class="chip" data-dataset="${escapeHtml(name)}">` +
        `${escapeHtml(name)}</button>`,
    )
    .join("");
  return `<div class="datasets">${chips}</div>`;
}

export function renderComposer(state: ConsoleState): string {
  // The composer is rendered once at mount; ui.ts flips the disabled flags in
  // place afterwards so typing is never lost to a re-render. The send button
  // starts disabled because the input starts empty.
  const flag = state.busy || state.connection !== "ok" ? " disabled" : "";
  return (
    '<form class="composer" data-form="composer">' +
    `<textarea name="text" rows="3" placeholder="Describe the analysis to run"${flag}></textarea>` +
    '<button type="submit" data-action="send" disabled>Send</button>' +
    `<label class="upload">Upload CSV` +
    `<input type="file" name="dataset" accept=".csv" data-action="upload"${flag}>` +
    "</label>" +
    "</form>"
  );
}

export function renderApp(state: ConsoleState): string {
  const session = state.sessionId
    ? `<span class="session-id">session ${escapeHtml(state.sessionId)}</span>`
    : "";
  return (
    `<header class="top"><h1>analysis console</h1>${session}</header>` +
    `<div data-region="banner">${renderBanner(state)}</div>` +
    `<div data-region="messages">${renderMessages(state)}</div>` +
    `<div data-region="plan">${renderStepCards(state)}</div>` +
    `<div data-region="result">${renderResult(state)}</div>` +
    `<div data-region="datasets">${renderDatasets(state)}</div>` +
    `<div data-region="composer">${renderComposer(state)}</div>`
  );
}

/**
 * Pure view building: session snapshot in, display structures out.
 *
 * Every function here depends only on its arguments, so a page refresh
 * that refetches the snapshot reproduces the transcript exactly. The
 * accounting strings pass through untouched; the only numbers this
 * module computes with are turn counts for the budget bar.
 */

import type { AskAction, SessionSnapshot, WireTurn } from "./api.js";

export interface Bubble {
  role: "agent" | "user" | "note";
  text: string;
  /** Wire turn index this bubble came from. */
  turn: number;
}

/** Everything the chat area displays, derived from one GET snapshot. */
export interface ChatView {
  sessionId: string;
  bubbles: Bubble[];
  ask: AskAction | null;
  finished: boolean;
  remaining: number;
  turnsUsed: number;
  value: string;
  totalCost: string;
  totalUtility: string;
}

function bubblesOf(turn: WireTurn): Bubble[] {
  if (turn.kind === "ask") {
    // message is prompt "\n" answer; prompts are single-line by contract
    const cut = turn.message.indexOf("\n");
    const prompt = cut < 0 ? turn.message : turn.message.slice(0, cut);
    const answer = cut < 0 ? "" : turn.message.slice(cut + 1);
    return [
      { role: "agent", text: prompt, turn: turn.index },
      { role: "user", text: answer, turn: turn.index },
    ];
  }
  if (turn.message !== "") {
    return [{ role: "agent", text: turn.message, turn: turn.index }];
  }
  // silent work, e.g. a data query; keep the turn visible
  return [{ role: "note", text: `ran ${turn.op}`, turn: turn.index }];
}

export function transcriptBubbles(turns: readonly WireTurn[]): Bubble[] {
  return turns.flatMap(bubblesOf);
}

export function viewFromSnapshot(
  sessionId: string,
  snap: SessionSnapshot,
): ChatView {
  return {
    sessionId,
    bubbles: transcriptBubbles(snap.turns),
    ask: snap.action.kind === "ask" ? snap.action : null,
    finished: snap.status === "finished",
    remaining: snap.remaining,
    turnsUsed: snap.turns.length,
    value: snap.value,
    totalCost: snap.total_cost,
    totalUtility: snap.total_utility,
  };
}

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function bubbleHtml(b: Bubble): string {
  return `<div class="bubble ${b.role}" data-turn="${b.turn}">${escapeHtml(b.text)}</div>`;
}

function gaugeHtml(view: ChatView): string {
  const total = view.remaining + view.turnsUsed;
  const pct = total === 0 ? 0 : Math.round((view.remaining / total) * 100);
  return (
    `<div class="gauge" data-remaining="${view.remaining}">` +
    `<span class="gauge-label">turns left: <b>${view.remaining}</b> of ${total}</span>` +
    `<span class="gauge-bar"><span class="gauge-fill" style="width:${pct}%"></span></span>` +
    `</div>`
  );
}

function accountingHtml(view: ChatView): string {
  return (
    `<dl class="accounting">` +
    `<dt>cost</dt><dd data-field="cost">${escapeHtml(view.totalCost)}</dd>` +
    `<dt>utility</dt><dd data-field="utility">${escapeHtml(view.totalUtility)}</dd>` +
    `<dt>value</dt><dd data-field="value">${escapeHtml(view.value)}</dd>` +
    `</dl>`
  );
}

function askHtml(ask: AskAction, busy: boolean): string {
  const buttons = ask.answers
    .map(
      (a) =>
        `<button class="answer" data-answer="${escapeHtml(a)}"` +
        `${busy ? " disabled" : ""}>${escapeHtml(a)}</button>`,
    )
    .join("");
  return (
    `<div class="ask"><div class="bubble agent pending">` +
    `${escapeHtml(ask.prompt)}</div>` +
    `<div class="answers">${buttons}</div></div>`
  );
}

/**
 * Render the whole chat area. Pure: same view and busy flag, same
 * markup. main.ts assigns the result to innerHTML and delegates clicks.
 */
export function renderChatHtml(view: ChatView, busy: boolean): string {
  const transcript = view.bubbles.map(bubbleHtml).join("");
  const tail = view.finished
    ? `<div class="done">conversation complete, value ${escapeHtml(view.value)}</div>`
    : view.ask
      ? askHtml(view.ask, busy)
      : "";
  return (
    `<div class="transcript">${transcript}</div>` +
    tail +
    `<aside class="panel">${gaugeHtml(view)}${accountingHtml(view)}</aside>`
  );
}

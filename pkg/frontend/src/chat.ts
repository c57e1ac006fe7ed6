/**
 * Chat session state machine.
 *
 * One controller per session; at most one request in flight. After every
 * successful create or reply the controller refetches the full snapshot
 * and rebuilds the view from it, so a live update and a page refresh go
 * through the same code path and render identically.
 */

import { ApiError, type SessionClient, type SpecSelection } from "./api.js";
import { type ChatView, viewFromSnapshot } from "./render.js";

export interface ChatState {
  sessionId: string | null;
  view: ChatView | null;
  busy: boolean;
  /** Error banner text; null when the last request succeeded. */
  banner: string | null;
}

export type AnswerOutcome = "sent" | "busy" | "no_ask" | "illegal" | "failed";

/** One line for the error banner, with source position when present. */
export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const d = err.detail;
    let msg = d.message;
    if (typeof d.line === "number" && typeof d.column === "number") {
      msg = `line ${d.line}, column ${d.column}: ${msg}`;
    }
    if (d.allowed) {
      msg = `${msg} (allowed: ${d.allowed.join(", ")})`;
    }
    return msg;
  }
  const reason = err instanceof Error ? err.message : String(err);
  return `service unreachable: ${reason}`;
}

export class ChatController {
  private readonly api: SessionClient;
  private readonly onChange: (state: ChatState) => void;
  state: ChatState = { sessionId: null, view: null, busy: false, banner: null };

  constructor(
    api: SessionClient,
    onChange: (state: ChatState) => void = () => {},
  ) {
    this.api = api;
    this.onChange = onChange;
  }

  private set(patch: Partial<ChatState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  /** Create a session and show its first question or its stop banner. */
  async start(selection: SpecSelection): Promise<boolean> {
    if (this.state.busy) return false;
    this.set({ busy: true, banner: null });
    try {
      const handle = await this.api.createSession(selection);
      const snap = await this.api.getSession(handle.session_id);
      this.set({
        sessionId: handle.session_id,
        view: viewFromSnapshot(handle.session_id, snap),
        busy: false,
      });
      return true;
    } catch (err) {
      // failed start keeps no session state; the banner offers a retry
      this.set({ busy: false, banner: describeError(err) });
      return false;
    }
  }

  /** Rebuild the view of an existing session, e.g. after a page reload. */
  async resume(sessionId: string): Promise<boolean> {
    if (this.state.busy) return false;
    this.set({ busy: true, banner: null });
    try {
      const snap = await this.api.getSession(sessionId);
      this.set({
        sessionId,
        view: viewFromSnapshot(sessionId, snap),
        busy: false,
      });
      return true;
    } catch (err) {
      this.set({ busy: false, banner: describeError(err) });
      return false;
    }
  }

  /**
   * Send the chosen answer. Rejected locally while a request is in
   * flight (double click), when no question is pending, or when the
   * choice is not among the allowed answers; none of those touch the
   * network.
   */
  async answer(choice: string): Promise<AnswerOutcome> {
    if (this.state.busy) return "busy";
    const { sessionId, view } = this.state;
    if (sessionId === null || view === null || view.ask === null) {
      return "no_ask";
    }
    if (!view.ask.answers.includes(choice)) return "illegal";
    this.set({ busy: true, banner: null });
    try {
      await this.api.sendReply(sessionId, choice);
      const snap = await this.api.getSession(sessionId);
      this.set({ view: viewFromSnapshot(sessionId, snap), busy: false });
      return "sent";
    } catch (err) {
      // transcript stays as it was; only the banner changes
      this.set({ busy: false, banner: describeError(err) });
      return "failed";
    }
  }
}

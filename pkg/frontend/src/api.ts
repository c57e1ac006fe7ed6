/**
 * Typed client for the dialog session API.
 *
 * Accounting numbers travel as exact rational strings ("6", "-1",
 * "377/100"). Nothing here parses them into floats and nothing ever
 * should: the UI displays them verbatim, exactly as the service
 * computed them.
 */

/** Exact rational serialized as "num" or "num/den". Display only. */
export type Rational = string;

/** The service is waiting for the user to answer this question. */
export interface AskAction {
  kind: "ask";
  slot: string;
  prompt: string;
  answers: string[];
}

/** The episode is over: budget exhausted or nothing left worth doing. */
export interface StopAction {
  kind: "stop";
}

export type PendingAction = AskAction | StopAction;

/** One executed operator, as recorded in the session transcript. */
export interface WireTurn {
  index: number;
  op: string;
  cost: Rational;
  utility: Rational;
  weight: Rational;
  contribution: Rational;
  kind: "ask" | "act";
  message: string;
}

/** Body of a create or reply response. */
export interface SessionHandle {
  session_id: string;
  action: PendingAction;
  remaining: number;
  value: Rational;
  total_cost: Rational;
  total_utility: Rational;
}

/** Full snapshot from GET: everything needed to rebuild the view. */
export interface SessionSnapshot {
  status: "awaiting_user" | "finished";
  action: PendingAction;
  remaining: number;
  value: Rational;
  total_cost: Rational;
  total_utility: Rational;
  turns: WireTurn[];
}

/** Structured error payload the service wraps in {"error": ...}. */
export interface WireError {
  kind: string;
  message: string;
  line?: number;
  column?: number;
  allowed?: string[];
}

/** Session creation input: a built-in name or a full spec text. */
export type SpecSelection = { builtin: string } | { spec: string };

/** Non-2xx response carrying the service's structured error. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: WireError;

  constructor(status: number, detail: WireError) {
    super(detail.message);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

async function json<T>(res: Response): Promise<T> {
  if (res.ok) {
    return (await res.json()) as T;
  }
  let detail: WireError = { kind: "http", message: `HTTP ${res.status}` };
  try {
    const body = (await res.json()) as { error?: WireError };
    if (body && typeof body === "object" && body.error) {
      detail = body.error;
    }
  } catch {
    // non-JSON error body; keep the fallback detail
  }
  throw new ApiError(res.status, detail);
}

/** What the chat controller needs from a session backend. */
export interface SessionClient {
  createSession(selection: SpecSelection): Promise<SessionHandle>;
  sendReply(sessionId: string, answer: string): Promise<SessionHandle>;
  getSession(sessionId: string): Promise<SessionSnapshot>;
}

export class SessionApi implements SessionClient {
  private readonly base: string;

  /** base is "" for same-origin use, or "http://host:port" in tests. */
  constructor(base: string = "") {
    this.base = base;
  }

  async createSession(selection: SpecSelection): Promise<SessionHandle> {
    const res = await fetch(`${this.base}/api/v1/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(selection),
    });
    return json<SessionHandle>(res);
  }

  async sendReply(sessionId: string, answer: string): Promise<SessionHandle> {
    const res = await fetch(
      `${this.base}/api/v1/sessions/${encodeURIComponent(sessionId)}/reply`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ answer }),
      },
    );
    return json<SessionHandle>(res);
  }

  async getSession(sessionId: string): Promise<SessionSnapshot> {
    const res = await fetch(
      `${this.base}/api/v1/sessions/${encodeURIComponent(sessionId)}`,
    );
    return json<SessionSnapshot>(res);
  }
}

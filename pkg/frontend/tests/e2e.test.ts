/**
 * End to end against the real service: spawns `python3 -m dialogplan serve`
 * with the built client as its static UI, then drives sessions through the
 * same controller code the page runs. Requires `npm run build` first (the
 * packaged test script does that).
 */

import { spawn, type ChildProcess } from "node:child_process";
import { existsSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, SessionApi } from "../src/api.js";
import { ChatController } from "../src/chat.js";
import { renderChatHtml } from "../src/render.js";

const frontendDir = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
);
const repoRoot = path.resolve(frontendDir, "..");
const distDir = path.join(frontendDir, "dist");

let server: ChildProcess | null = null;
let base = "";

async function probe(url: string): Promise<boolean> {
  try {
    const res = await fetch(url);
    return res.status === 404; // unknown session id means the API is up
  } catch {
    return false;
  }
}

async function startServer(): Promise<void> {
  for (let attempt = 0; attempt < 3; attempt++) {
    const port = 20000 + Math.floor(Math.random() * 20000);
    const child = spawn(
      "python3",
      [
        "-m",
        "dialogplan",
        "serve",
        "--addr",
        "127.0.0.1",
        "--port",
        String(port),
        "--ui",
        distDir,
      ],
      { cwd: repoRoot, stdio: ["ignore", "pipe", "pipe"] },
    );
    const candidate = `http://127.0.0.1:${port}`;
    const deadline = Date.now() + 15000;
    while (Date.now() < deadline && child.exitCode === null) {
      if (await probe(`${candidate}/api/v1/sessions/__probe__`)) {
        server = child;
        base = candidate;
        return;
      }
      await new Promise((r) => setTimeout(r, 100));
    }
    child.kill();
  }
  throw new Error("could not start the session service");
}

beforeAll(async () => {
  expect(
    existsSync(path.join(distDir, "index.html")),
    "dist/ missing; run `npm run build` first",
  ).toBe(true);
  await startServer();
});

afterAll(() => {
  server?.kill();
});

describe("webchat against the live service", () => {
  it("serves the client page under /", async () => {
    const res = await fetch(`${base}/`);
    expect(res.status).toBe(200);
    const text = await res.text();
    expect(text).toContain('id="app"');
    expect(text).toContain("assets/main.js");

    const js = await fetch(`${base}/assets/main.js`);
    expect(js.status).toBe(200);
  });

  it("completes the water dialog and shows the verbatim value 6", async () => {
    const ctl = new ChatController(new SessionApi(base));
    expect(await ctl.start({ builtin: "water" })).toBe(true);

    const script: Record<string, string> = {
      location: "cityB",
      purpose: "irrigate",
    };
    for (let i = 0; ctl.state.view?.ask && i < 10; i++) {
      const slot = ctl.state.view.ask.slot;
      expect(await ctl.answer(script[slot] ?? "")).toBe("sent");
    }

    const view = ctl.state.view;
    expect(view).not.toBeNull();
    if (view === null) return;
    expect(view.finished).toBe(true);
    expect(view.value).toBe("6");
    expect(view.turnsUsed).toBe(4);
    expect(view.remaining).toBe(0);
    expect(view.totalCost).toBe("4");
    expect(view.totalUtility).toBe("10");

    const html = renderChatHtml(view, false);
    expect(html).toContain("conversation complete, value 6");
    expect(html).toContain('data-field="value">6</dd>');
    expect(html).toContain("Advice for irrigate water in cityB is ready.");
  });

  it("restores an identical transcript after a refresh, mid-session and at the end", async () => {
    const live = new ChatController(new SessionApi(base));
    await live.start({ builtin: "water" });
    await live.answer("cityA");
    const sid = live.state.sessionId;
    expect(sid).not.toBeNull();
    if (sid === null) return;

    // refresh mid-session: a brand new controller, as a reload would make
    const reloaded = new ChatController(new SessionApi(base));
    expect(await reloaded.resume(sid)).toBe(true);
    expect(reloaded.state.view).toEqual(live.state.view);
    expect(renderChatHtml(reloaded.state.view!, false)).toBe(
      renderChatHtml(live.state.view!, false),
    );

    // the restored session stays usable and finishes normally
    while (reloaded.state.view?.ask) {
      expect(await reloaded.answer(reloaded.state.view.ask.answers[0]!)).toBe(
        "sent",
      );
    }
    expect(reloaded.state.view?.value).toBe("6");

    // refresh after the end reproduces the final transcript too
    const after = new ChatController(new SessionApi(base));
    await after.resume(sid);
    expect(after.state.view).toEqual(reloaded.state.view);
  });

  it("shows an immediate stop for a dialog not worth starting", async () => {
    const spec = [
      "dialog idle",
      "turns 2",
      'slot mood { prompt: "How are you feeling today?" ; answers: fine tired ; default: fine ; ask_cost: 5 }',
      "",
    ].join("\n");
    const ctl = new ChatController(new SessionApi(base));
    expect(await ctl.start({ spec })).toBe(true);

    expect(ctl.state.view?.finished).toBe(true);
    expect(ctl.state.view?.turnsUsed).toBe(0);
    expect(ctl.state.view?.value).toBe("0");
    expect(renderChatHtml(ctl.state.view!, false)).toContain(
      "conversation complete, value 0",
    );
  });

  it("renders spec errors with their line and column", async () => {
    const ctl = new ChatController(new SessionApi(base));
    expect(await ctl.start({ spec: "dialog broken\nnonsense" })).toBe(false);
    expect(ctl.state.banner).toMatch(/^line 2, column \d+: /);
    expect(ctl.state.sessionId).toBeNull();
  });

  it("propagates the allowed answers on an illegal reply", async () => {
    const api = new SessionApi(base);
    const handle = await api.createSession({ builtin: "water" });

    const err = (await api
      .sendReply(handle.session_id, "nope")
      .then(() => null, (e: unknown) => e)) as ApiError;

    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.detail.kind).toBe("illegal_answer");
    expect(err.detail.allowed).toEqual(["cityA", "cityB"]);

    // the session is still usable after the rejected reply
    const next = await api.sendReply(handle.session_id, "cityA");
    expect(next.action.kind).toBe("ask");
  });
});

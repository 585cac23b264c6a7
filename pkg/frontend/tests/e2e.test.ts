// Scripted two-client session against a real server process: lobby →
// learning → 10 practice → 10 test, then the exported records are re-scored
// with the CLI and compared against the live /results payload.

import { ChildProcess, execFile, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, SessionApi, TrialView } from "../src/api.js";
import { emptyComposer, pressKey, typeText } from "../src/composer.js";
import { SessionDriver } from "../src/state.js";

const run = promisify(execFile);

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const PRACTICE = 10;
const TEST = 10;

let server: ChildProcess;

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const reply = await fetch(`${BASE}/healthz`);
      if (reply.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("server never became healthy");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "shapegame.cli", "serve", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 60_000);

afterAll(() => {
  server.kill();
});

/** Deterministic scripted players: the speaker types a program-looking
 * string plus junk the composer must strip; the listener cycles choices. */
function speakerScript(view: TrialView): string {
  const index = view.trial_index;
  const attempts = [
    "BB11+AB2C", // 9th symbol must be blocked client-side
    "A B2",      // space must be blocked client-side
    "C12*12",
    "AA2",
    "B*21",
  ];
  return attempts[index % attempts.length] ?? "A";
}

function listenerScript(view: TrialView): number {
  return view.trial_index % 4;
}

describe("full human session", () => {
  const speakerApi = new SessionApi(BASE);
  const listenerApi = new SessionApi(BASE);

  it("completes lobby → learning → practice → test → results", async () => {
    const sid = await speakerApi.createSession("human", 424242);
    expect(sid).toBeTruthy();
    listenerApi.attach(sid);

    await speakerApi.join("speaker");
    await listenerApi.join("listener");

    // both joined: the lobby ends and the learning sandbox opens
    const state = await speakerApi.state();
    expect(state.state).toBe("learning");
    expect(state.joined).toEqual(["listener", "speaker"]);

    // learning: sandbox and gallery are reachable, PNG bytes come back
    const sample = new Uint8Array(
      await speakerApi.fetchPng(speakerApi.sandboxSamplePath()),
    );
    expect([...sample.slice(0, 4)]).toEqual([0x89, 0x50, 0x4e, 0x47]);
    const galleryCount = await listenerApi.galleryCount();
    expect(galleryCount).toBeGreaterThan(0);
    const galleryItem = new Uint8Array(
      await listenerApi.fetchPng(listenerApi.galleryItemPath(0)),
    );
    expect([...galleryItem.slice(0, 4)]).toEqual([0x89, 0x50, 0x4e, 0x47]);

    // scratchpads are per-role
    await speakerApi.saveScratchpad("speaker notes: + joins regions");
    await listenerApi.saveScratchpad("listener notes");
    expect(await speakerApi.loadScratchpad()).toContain("speaker notes");
    expect(await listenerApi.loadScratchpad()).toBe("listener notes");

    const speaker = new SessionDriver(speakerApi, "speaker", {
      message: speakerScript,
      choice: () => 0,
    }, { autoReady: true });
    const listener = new SessionDriver(listenerApi, "listener", {
      message: () => "",
      choice: listenerScript,
    }, { autoReady: true });

    // run both clients until the session is done
    let speakerView = await speaker.tick();
    let listenerView = await listener.tick();
    for (let i = 0; i < 500 && speakerView.state !== "done"; i++) {
      speakerView = await speaker.tick();
      listenerView = await listener.tick();
    }
    expect(speakerView.state).toBe("done");
    expect(listenerView.state).toBe("done");

    // exactly one feedback per practice trial, none during test
    expect(listener.feedbackSeen.length).toBe(PRACTICE);

    // results: both phases scored over the right totals
    const results = await speakerApi.results();
    const practice = results.phases.practice?.overall;
    const test = results.phases.test?.overall;
    expect(practice?.total).toBe(PRACTICE);
    expect(test?.total).toBe(TEST);
    expect(results.scratchpads.speaker).toContain("+ joins regions");

    // the exported records re-score identically through the CLI
    const records = await speakerApi.recordsText();
    const dir = mkdtempSync(join(tmpdir(), "session-"));
    const recordsPath = join(dir, "records.jsonl");
    writeFileSync(recordsPath, records);
    const { stdout } = await run("python3", [
      "-m", "shapegame.cli", "score", recordsPath,
    ]);
    // the scorer emits a CSV results table; compare the overall cells
    const lines = stdout.trim().split("\n").filter((l) => !l.startsWith("#"));
    const header = (lines[0] ?? "").split(",");
    const labelCol = header.indexOf("label");
    const correctCol = header.indexOf("overall_correct");
    const totalCol = header.indexOf("overall_total");
    const phases = new Map<string, { correct: number; total: number }>();
    for (const line of lines.slice(1)) {
      const cells = line.split(",");
      const phase = (cells[labelCol] ?? "").split("/")[1] ?? "";
      phases.set(phase, {
        correct: Number(cells[correctCol]),
        total: Number(cells[totalCol]),
      });
    }
    expect(phases.get("practice")).toEqual({
      correct: practice?.correct,
      total: PRACTICE,
    });
    expect(phases.get("test")).toEqual({
      correct: test?.correct,
      total: TEST,
    });
  }, 120_000);

  it("rejects role-crossing and premature actions", async () => {
    const api = new SessionApi(BASE);
    const partner = new SessionApi(BASE);
    const sid = await api.createSession("human", 7);
    partner.attach(sid);
    await api.join("speaker");

    // the sandbox needs a token from this session
    const stranger = new SessionApi(BASE);
    stranger.attach(sid);
    await expect(stranger.ready()).rejects.toMatchObject({ status: 401 });

    // ... and the trial endpoints are closed during the lobby/learning
    await partner.join("listener");
    await expect(api.sendMessage("AB")).rejects.toMatchObject({ status: 409 });
    await expect(partner.sendSelection(1)).rejects.toMatchObject({
      status: 409,
    });

    // listener cannot speak, speaker cannot select
    await api.ready();
    await partner.ready();
    await expect(partner.sendMessage("AB")).rejects.toMatchObject({
      status: 403,
    });
    await expect(api.sendSelection(0)).rejects.toMatchObject({ status: 403 });
  }, 60_000);

  it("server re-validates what the composer already blocks", async () => {
    // the composer state machine blocks these locally...
    const ninth = pressKey(typeText(emptyComposer, "BB11+AB2"), "C");
    expect(ninth.text).toBe("BB11+AB2");
    const spaced = pressKey(typeText(emptyComposer, "A"), " ");
    expect(spaced.text).toBe("A");

    // ...and the server rejects the same raw strings if sent anyway
    const api = new SessionApi(BASE);
    const partner = new SessionApi(BASE);
    const sid = await api.createSession("human", 8);
    partner.attach(sid);
    await api.join("speaker");
    await partner.join("listener");
    await api.ready();
    await partner.ready();

    const overlong = await api.sendMessage("BB11+AB2C");
    expect(overlong.accepted).toBe(false);
    expect(overlong.violation).toMatch(/length/);
    const withSpace = await api.sendMessage("A B2");
    expect(withSpace.accepted).toBe(false);
    expect(withSpace.violation).toMatch(/space/);

    // the trial is still open: a valid retype goes through
    const valid = await api.sendMessage("AB2");
    expect(valid.accepted).toBe(true);
  }, 60_000);
});

describe("ApiError", () => {
  it("carries the server detail", async () => {
    const api = new SessionApi(BASE);
    api.attach("nonexistent");
    try {
      await api.state();
      expect.unreachable("state() must throw for an unknown session");
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(404);
      expect((error as ApiError).message).toContain("session");
    }
  });
});

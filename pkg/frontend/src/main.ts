// DOM wiring: one page, five screens (lobby, learning, speaker, listener,
// results), swapped by the session driver's polled view.

import { Feedback, SessionApi, TrialView } from "./api.js";
import {
  ALPHABET,
  ComposerState,
  canSend,
  counter,
  emptyComposer,
  pressKey,
} from "./composer.js";
import { SessionDriver } from "./state.js";

const POLL_MS = 1000;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const screens = ["lobby", "learning", "speaker", "listener", "results"] as const;
type Screen = (typeof screens)[number];

function show(screen: Screen): void {
  for (const name of screens) {
    $(`screen-${name}`).hidden = name !== screen;
  }
}

const api = new SessionApi();
let composerState: ComposerState = emptyComposer;
let shownTrialId: string | undefined;
let pendingChoice: number | null = null;
let selectionLocked = false;

// --- lobby -------------------------------------------------------------

async function enterSession(role: "speaker" | "listener"): Promise<void> {
  const joinId = ($("join-id") as HTMLInputElement).value.trim();
  if (joinId) {
    api.attach(joinId);
  } else {
    const preset = ($("preset") as HTMLSelectElement).value;
    await api.createSession(preset);
  }
  await api.join(role);
  $("session-id").textContent = api.sessionId;
  $("lobby-status").textContent = "waiting for your partner to join...";
  wireScratchpad();
  const driver = new SessionDriver(api, role, uiPolicy, {
    pollMs: POLL_MS,
    onUpdate: renderView,
  });
  void driver.runUntilDone(Number.MAX_SAFE_INTEGER).catch(showError);
}

function showError(error: unknown): void {
  $("error-bar").hidden = false;
  $("error-bar").textContent = String(error);
}

// The browser policy never auto-plays: both actions resolve through user
// clicks, so the driver is reduced to a poller here.
const uiPolicy = {
  message: () => "",
  choice: () => null,
};

// --- shared rendering ----------------------------------------------------

function renderView(view: TrialView): void {
  $("phase-indicator").textContent =
    view.state === "practice" || view.state === "test"
      ? `${view.state} · trial ${Math.min(view.trial_index + 1, view.n_trials)}/${view.n_trials}`
      : view.state;
  if (view.state === "lobby") return;
  if (view.state === "learning") {
    show("learning");
    return;
  }
  if (view.state === "done") {
    void renderResults();
    return;
  }
  renderFeedback(view.last_feedback ?? null);
  if (view.role === "speaker") {
    void renderSpeaker(view);
  } else {
    void renderListener(view);
  }
}

function renderFeedback(feedback: Feedback | null): void {
  const banner = $("feedback-banner");
  if (!feedback) {
    banner.hidden = true;
    return;
  }
  banner.hidden = false;
  banner.className = feedback.correct ? "feedback good" : "feedback bad";
  banner.textContent = feedback.correct
    ? "correct!"
    : `incorrect — the answer was option ${feedback.correct_index + 1}`;
}

async function setImage(img: HTMLImageElement, path: string): Promise<void> {
  const bytes = await api.fetchPng(path);
  const url = URL.createObjectURL(new Blob([bytes], { type: "image/png" }));
  if (img.dataset.url) URL.revokeObjectURL(img.dataset.url);
  img.dataset.url = url;
  img.src = url;
}

// --- speaker -------------------------------------------------------------

async function renderSpeaker(view: TrialView): Promise<void> {
  show("speaker");
  const fresh = view.trial_id !== shownTrialId;
  if (fresh && view.target_image) {
    shownTrialId = view.trial_id;
    composerState = emptyComposer;
    await setImage($("target-image") as HTMLImageElement, view.target_image);
  }
  const waiting = Boolean(view.message_sent);
  $("speaker-wait").hidden = !waiting;
  $("composer").hidden = waiting;
  renderComposer();
}

function renderComposer(): void {
  $("message-preview").textContent = composerState.text || " ";
  $("message-counter").textContent = counter(composerState);
  $("composer-warning").textContent = composerState.rejected ?? "";
  ($("send-message") as HTMLButtonElement).disabled = !canSend(composerState);
}

function wireComposer(): void {
  const keys = $("keyboard");
  for (const symbol of ALPHABET) {
    const button = document.createElement("button");
    button.textContent = symbol;
    button.addEventListener("click", () => {
      composerState = pressKey(composerState, symbol);
      renderComposer();
    });
    keys.append(button);
  }
  const backspace = document.createElement("button");
  backspace.textContent = "⌫";
  backspace.addEventListener("click", () => {
    composerState = pressKey(composerState, "Backspace");
    renderComposer();
  });
  keys.append(backspace);

  document.addEventListener("keydown", (event) => {
    // physical keyboard works only while the composer is on screen
    if ($("screen-speaker").hidden || $("composer").hidden) return;
    if (event.key === "Enter") return;
    composerState = pressKey(composerState, event.key);
    renderComposer();
  });

  $("send-message").addEventListener("click", async () => {
    if (!canSend(composerState)) return;
    const reply = await api.sendMessage(composerState.text);
    if (!reply.accepted) {
      $("composer-warning").textContent = `rejected: ${reply.violation}`;
      return;
    }
    composerState = emptyComposer;
    renderComposer();
    $("composer").hidden = true;
    $("speaker-wait").hidden = false;
  });
}

// --- listener --------------------------------------------------------------

async function renderListener(view: TrialView): Promise<void> {
  show("listener");
  const message = view.message ?? null;
  $("incoming-message").textContent = message ?? "waiting for the speaker…";
  const grid = $("candidate-grid");
  const fresh = view.trial_id !== shownTrialId;
  if (fresh && view.candidates) {
    shownTrialId = view.trial_id;
    pendingChoice = null;
    selectionLocked = false;
    grid.replaceChildren();
    view.candidates.forEach((path, index) => {
      const cell = document.createElement("button");
      cell.className = "candidate";
      const img = document.createElement("img");
      void setImage(img, path);
      cell.append(img);
      cell.addEventListener("click", () => {
        if (selectionLocked || message === null) return;
        pendingChoice = index;
        renderPendingChoice();
      });
      grid.append(cell);
    });
  }
  // no picking before the message arrives, none after posting
  grid.classList.toggle("disabled", message === null || selectionLocked);
  renderPendingChoice();
  ($("confirm-choice") as HTMLButtonElement).disabled =
    pendingChoice === null || message === null || selectionLocked;
}

function renderPendingChoice(): void {
  const cells = $("candidate-grid").children;
  for (let i = 0; i < cells.length; i++) {
    cells[i]?.classList.toggle("picked", i === pendingChoice);
  }
}

function wireListener(): void {
  $("confirm-choice").addEventListener("click", async () => {
    if (pendingChoice === null || selectionLocked) return;
    selectionLocked = true;
    const reply = await api.sendSelection(pendingChoice);
    if (reply.feedback) renderFeedback(reply.feedback);
  });
}

// --- learning sandbox --------------------------------------------------------

function wireLearning(): void {
  $("new-example").addEventListener("click", async () => {
    await setImage(
      $("sandbox-image") as HTMLImageElement,
      api.sandboxSamplePath(),
    );
  });
  $("show-gallery").addEventListener("click", async () => {
    const grid = $("gallery-grid");
    grid.replaceChildren();
    const count = await api.galleryCount();
    for (let i = 0; i < count; i++) {
      const img = document.createElement("img");
      void setImage(img, api.galleryItemPath(i));
      grid.append(img);
    }
  });
  $("ready-toggle").addEventListener("click", async () => {
    const reply = await api.ready();
    $("ready-status").textContent =
      reply.state === "learning" ? "waiting for your partner…" : "starting!";
  });
}

// --- scratchpad ---------------------------------------------------------------

function wireScratchpad(): void {
  const pad = $("scratchpad") as HTMLTextAreaElement;
  void api.loadScratchpad().then((text) => (pad.value = text));
  let timer: number | undefined;
  pad.addEventListener("input", () => {
    window.clearTimeout(timer);
    timer = window.setTimeout(() => void api.saveScratchpad(pad.value), 400);
  });
}

// --- results ----------------------------------------------------------------

async function renderResults(): Promise<void> {
  show("results");
  const results = await api.results();
  const table = $("results-table");
  table.replaceChildren();
  for (const [phase, cells] of Object.entries(results.phases)) {
    for (const [category, cell] of Object.entries(cells)) {
      const row = document.createElement("tr");
      const accuracy =
        cell.accuracy === null ? "n/a" : cell.accuracy.toFixed(2);
      row.innerHTML = `<td>${phase}</td><td>${category}</td><td>${cell.correct}/${cell.total}</td><td>${accuracy}</td>`;
      table.append(row);
    }
  }
  $("download-records").addEventListener("click", async () => {
    const text = await api.recordsText();
    const url = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
    const link = document.createElement("a");
    link.href = url;
    link.download = "records.jsonl";
    link.click();
    URL.revokeObjectURL(url);
  });
}

// --- boot -------------------------------------------------------------------

function boot(): void {
  $("join-speaker").addEventListener("click", () =>
    enterSession("speaker").catch(showError),
  );
  $("join-listener").addEventListener("click", () =>
    enterSession("listener").catch(showError),
  );
  wireComposer();
  wireListener();
  wireLearning();
  show("lobby");
}

boot();

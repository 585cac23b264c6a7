// Session driver: polls the server and performs whatever action our role
// owes next. The browser UI and the scripted tests share this loop, so the
// tested path is the one real clients run.

import { Feedback, Role, SessionApi, TrialView } from "./api.js";
import { canSend, emptyComposer, typeText } from "./composer.js";

export interface Policy {
  /** Text the speaker wants to type for this trial (typed through the
   * composer, so invalid keys are dropped client-side). An empty string
   * leaves the trial to manual input. */
  message(view: TrialView): string;
  /** Candidate index the listener wants to pick; null defers to manual
   * input (the browser UI posts through its own click handler). */
  choice(view: TrialView): number | null;
}

export interface DriverOptions {
  /** Milliseconds between polls; 0 polls back-to-back (tests). */
  pollMs?: number;
  /** Signal ready as soon as the learning phase is seen. */
  autoReady?: boolean;
  /** Optional per-trial countdown shown by the UI; never enforced. */
  trialTimerSeconds?: number;
  onUpdate?: (view: TrialView) => void;
  onFeedback?: (feedback: Feedback) => void;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class SessionDriver {
  readonly feedbackSeen: Feedback[] = [];
  lastView: TrialView | null = null;
  private readySent = false;

  constructor(
    private readonly api: SessionApi,
    readonly role: Role,
    private readonly policy: Policy,
    private readonly options: DriverOptions = {},
  ) {}

  /** One poll plus at most one action. Returns the fresh view. */
  async tick(): Promise<TrialView> {
    const view = await this.api.trial();
    this.lastView = view;
    this.options.onUpdate?.(view);
    if (view.last_feedback) this.noteFeedback(view.last_feedback);

    if (view.state === "learning") {
      if (this.options.autoReady && !this.readySent) {
        this.readySent = true;
        await this.api.ready();
      }
      return view;
    }
    if (view.state !== "practice" && view.state !== "test") {
      return view;
    }
    if (this.role === "speaker" && view.awaiting === "message" && !view.message_sent) {
      await this.speak(view);
    } else if (
      this.role === "listener" &&
      view.awaiting === "selection" &&
      view.message != null
    ) {
      await this.select(view);
    }
    return view;
  }

  async runUntilDone(maxTicks = 1000): Promise<TrialView> {
    for (let i = 0; i < maxTicks; i++) {
      const view = await this.tick();
      if (view.state === "done") return view;
      if (this.options.pollMs) await sleep(this.options.pollMs);
    }
    throw new Error(`session not done after ${maxTicks} ticks`);
  }

  private async speak(view: TrialView): Promise<void> {
    const composed = typeText(emptyComposer, this.policy.message(view));
    if (!canSend(composed)) return; // leave the trial open for a retype
    const reply = await this.api.sendMessage(composed.text);
    if (!reply.accepted) {
      throw new Error(`server rejected a composed message: ${reply.violation}`);
    }
  }

  private async select(view: TrialView): Promise<void> {
    const choice = this.policy.choice(view);
    if (choice === null) return; // manual mode: a click posts instead
    const reply = await this.api.sendSelection(choice);
    if (reply.feedback) this.noteFeedback(reply.feedback);
  }

  private noteFeedback(feedback: Feedback): void {
    const last = this.feedbackSeen[this.feedbackSeen.length - 1];
    if (!last || last.trial_id !== feedback.trial_id) {
      this.feedbackSeen.push(feedback);
    }
  }
}

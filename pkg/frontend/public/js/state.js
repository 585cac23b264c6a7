// Session driver: polls the server and performs whatever action our role
// owes next. The browser UI and the scripted tests share this loop, so the
// tested path is the one real clients run.
import { canSend, emptyComposer, typeText } from "./composer.js";
const sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));
export class SessionDriver {
    constructor(api, role, policy, options = {}) {
        this.api = api;
        this.role = role;
        this.policy = policy;
        this.options = options;
        this.feedbackSeen = [];
        this.lastView = null;
        this.readySent = false;
    }
    /** One poll plus at most one action. Returns the fresh view. */
    async tick() {
        const view = await this.api.trial();
        this.lastView = view;
        this.options.onUpdate?.(view);
        if (view.last_feedback)
            this.noteFeedback(view.last_feedback);
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
        }
        else if (this.role === "listener" &&
            view.awaiting === "selection" &&
            view.message != null) {
            await this.select(view);
        }
        return view;
    }
    async runUntilDone(maxTicks = 1000) {
        for (let i = 0; i < maxTicks; i++) {
            const view = await this.tick();
            if (view.state === "done")
                return view;
            if (this.options.pollMs)
                await sleep(this.options.pollMs);
        }
        throw new Error(`session not done after ${maxTicks} ticks`);
    }
    async speak(view) {
        const composed = typeText(emptyComposer, this.policy.message(view));
        if (!canSend(composed))
            return; // leave the trial open for a retype
        const reply = await this.api.sendMessage(composed.text);
        if (!reply.accepted) {
            throw new Error(`server rejected a composed message: ${reply.violation}`);
        }
    }
    async select(view) {
        const choice = this.policy.choice(view);
        if (choice === null)
            return; // manual mode: a click posts instead
        const reply = await this.api.sendSelection(choice);
        if (reply.feedback)
            this.noteFeedback(reply.feedback);
    }
    noteFeedback(feedback) {
        const last = this.feedbackSeen[this.feedbackSeen.length - 1];
        if (!last || last.trial_id !== feedback.trial_id) {
            this.feedbackSeen.push(feedback);
        }
    }
}

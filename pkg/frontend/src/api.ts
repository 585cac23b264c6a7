// Typed client for the session service JSON API. Every call either
// returns the parsed payload or throws ApiError with the server's detail.

export type Role = "speaker" | "listener";
export type SessionState = "lobby" | "learning" | "practice" | "test" | "done";

export interface StateView {
  state: SessionState;
  joined: Role[];
  trial_index: number;
  trial_counts: Record<string, number>;
}

export interface Feedback {
  trial_id: string;
  correct: boolean;
  correct_index: number;
}

export interface TrialView {
  state: SessionState;
  role: Role;
  trial_index: number;
  n_trials: number;
  awaiting: "message" | "selection" | null;
  last_feedback: Feedback | null;
  trial_id?: string;
  // speaker-only
  target_image?: string;
  message_sent?: boolean;
  // listener-only
  candidates?: string[];
  message?: string | null;
}

export interface PhaseScore {
  accuracy: number | null;
  correct: number;
  total: number;
}

export interface ResultsView {
  state: SessionState;
  phases: Record<string, Record<string, PhaseScore>>;
  scratchpads: Record<Role, string>;
}

export interface MessageReply {
  accepted: boolean;
  violation?: string;
}

export interface SelectionReply {
  recorded: boolean;
  feedback?: Feedback;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function parse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class SessionApi {
  private token = "";
  private sid = "";

  constructor(private readonly base: string = "") {}

  get sessionId(): string {
    return this.sid;
  }

  private url(path: string): string {
    return `${this.base}/api/v1/sessions${path}`;
  }

  private headers(): Record<string, string> {
    return {
      "Content-Type": "application/json",
      Authorization: `Bearer ${this.token}`,
    };
  }

  async createSession(preset: string, seed?: number): Promise<string> {
    const body: Record<string, unknown> = { preset };
    if (seed !== undefined) body.seed = seed;
    const reply = await parse<{ session_id: string }>(
      await fetch(this.url(""), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
    this.sid = reply.session_id;
    return this.sid;
  }

  /** Attach to an existing session (e.g. an id shared by a partner). */
  attach(sessionId: string): void {
    this.sid = sessionId;
  }

  async join(role: Role): Promise<void> {
    const reply = await parse<{ token: string }>(
      await fetch(this.url(`/${this.sid}/join`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ role }),
      }),
    );
    this.token = reply.token;
  }

  async state(): Promise<StateView> {
    return parse(await fetch(this.url(`/${this.sid}/state`)));
  }

  async ready(): Promise<{ state: SessionState }> {
    return parse(
      await fetch(this.url(`/${this.sid}/ready`), {
        method: "POST",
        headers: this.headers(),
      }),
    );
  }

  async trial(): Promise<TrialView> {
    return parse(
      await fetch(this.url(`/${this.sid}/trial`), { headers: this.headers() }),
    );
  }

  async sendMessage(text: string): Promise<MessageReply> {
    return parse(
      await fetch(this.url(`/${this.sid}/message`), {
        method: "POST",
        headers: this.headers(),
        body: JSON.stringify({ text }),
      }),
    );
  }

  async sendSelection(choice: number): Promise<SelectionReply> {
    return parse(
      await fetch(this.url(`/${this.sid}/selection`), {
        method: "POST",
        headers: this.headers(),
        body: JSON.stringify({ choice }),
      }),
    );
  }

  async galleryCount(): Promise<number> {
    const reply = await parse<{ count: number }>(
      await fetch(this.url(`/${this.sid}/gallery`), { headers: this.headers() }),
    );
    return reply.count;
  }

  async saveScratchpad(text: string): Promise<void> {
    await parse(
      await fetch(this.url(`/${this.sid}/scratchpad`), {
        method: "PUT",
        headers: this.headers(),
        body: JSON.stringify({ text }),
      }),
    );
  }

  async loadScratchpad(): Promise<string> {
    const reply = await parse<{ text: string }>(
      await fetch(this.url(`/${this.sid}/scratchpad`), {
        headers: this.headers(),
      }),
    );
    return reply.text;
  }

  async results(): Promise<ResultsView> {
    return parse(
      await fetch(this.url(`/${this.sid}/results`), { headers: this.headers() }),
    );
  }

  async recordsText(): Promise<string> {
    const response = await fetch(this.url(`/${this.sid}/records`), {
      headers: this.headers(),
    });
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }

  /** Authenticated image fetch: role-scoped PNGs need the Bearer token,
   * so plain <img src> cannot load them. */
  async fetchPng(path: string): Promise<ArrayBuffer> {
    const url = path.startsWith("/") ? `${this.base}${path}` : path;
    const response = await fetch(url, { headers: this.headers() });
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.arrayBuffer();
  }

  sandboxSamplePath(): string {
    return `/api/v1/sessions/${this.sid}/sandbox/sample`;
  }

  galleryItemPath(index: number): string {
    return `/api/v1/sessions/${this.sid}/gallery/${index}`;
  }
}

// Typed client for the session service JSON API. Every call either
// returns the parsed payload or throws ApiError with the server's detail.
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
    }
}
async function parse(response) {
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = await response.json();
            if (typeof body.detail === "string")
                detail = body.detail;
        }
        catch {
            // non-JSON error body: keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json());
}
export class SessionApi {
    constructor(base = "") {
        this.base = base;
        this.token = "";
        this.sid = "";
    }
    get sessionId() {
        return this.sid;
    }
    url(path) {
        return `${this.base}/api/v1/sessions${path}`;
    }
    headers() {
        return {
            "Content-Type": "application/json",
            Authorization: `Bearer ${this.token}`,
        };
    }
    async createSession(preset, seed) {
        const body = { preset };
        if (seed !== undefined)
            body.seed = seed;
        const reply = await parse(await fetch(this.url(""), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        }));
        this.sid = reply.session_id;
        return this.sid;
    }
    /** Attach to an existing session (e.g. an id shared by a partner). */
    attach(sessionId) {
        this.sid = sessionId;
    }
    async join(role) {
        const reply = await parse(await fetch(this.url(`/${this.sid}/join`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ role }),
        }));
        this.token = reply.token;
    }
    async state() {
        return parse(await fetch(this.url(`/${this.sid}/state`)));
    }
    async ready() {
        return parse(await fetch(this.url(`/${this.sid}/ready`), {
            method: "POST",
            headers: this.headers(),
        }));
    }
    async trial() {
        return parse(await fetch(this.url(`/${this.sid}/trial`), { headers: this.headers() }));
    }
    async sendMessage(text) {
        return parse(await fetch(this.url(`/${this.sid}/message`), {
            method: "POST",
            headers: this.headers(),
            body: JSON.stringify({ text }),
        }));
    }
    async sendSelection(choice) {
        return parse(await fetch(this.url(`/${this.sid}/selection`), {
            method: "POST",
            headers: this.headers(),
            body: JSON.stringify({ choice }),
        }));
    }
    async galleryCount() {
        const reply = await parse(await fetch(this.url(`/${this.sid}/gallery`), { headers: this.headers() }));
        return reply.count;
    }
    async saveScratchpad(text) {
        await parse(await fetch(this.url(`/${this.sid}/scratchpad`), {
            method: "PUT",
            headers: this.headers(),
            body: JSON.stringify({ text }),
        }));
    }
    async loadScratchpad() {
        const reply = await parse(await fetch(this.url(`/${this.sid}/scratchpad`), {
            headers: this.headers(),
        }));
        return reply.text;
    }
    async results() {
        return parse(await fetch(this.url(`/${this.sid}/results`), { headers: this.headers() }));
    }
    async recordsText() {
        const response = await fetch(this.url(`/${this.sid}/records`), {
            headers: this.headers(),
        });
        if (!response.ok)
            throw new ApiError(response.status, response.statusText);
        return response.text();
    }
    /** Authenticated image fetch: role-scoped PNGs need the Bearer token,
     * so plain <img src> cannot load them. */
    async fetchPng(path) {
        const url = path.startsWith("/") ? `${this.base}${path}` : path;
        const response = await fetch(url, { headers: this.headers() });
        if (!response.ok)
            throw new ApiError(response.status, response.statusText);
        return response.arrayBuffer();
    }
    sandboxSamplePath() {
        return `/api/v1/sessions/${this.sid}/sandbox/sample`;
    }
    galleryItemPath(index) {
        return `/api/v1/sessions/${this.sid}/gallery/${index}`;
    }
}

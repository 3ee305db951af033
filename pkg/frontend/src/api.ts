/** Thin fetch client for the session gateway. */

import type { ActionKind, ActionPayload, ApiErrorBody, ModelInfo, SessionState } from "./types.js";

export class ApiError extends Error {
	readonly status: number;
	readonly body: ApiErrorBody;

	constructor(status: number, body: ApiErrorBody) {
		super(`${body.error}: ${body.detail}`);
		this.status = status;
		this.body = body;
	}
}

async function expectJson(resp: Response): Promise<unknown> {
	if (resp.ok) {
		return resp.json();
	}
	let body: ApiErrorBody;
	try {
		body = (await resp.json()) as ApiErrorBody;
	} catch {
		body = { error: `HTTP${resp.status}`, detail: resp.statusText };
	}
	throw new ApiError(resp.status, body);
}

export class ApiClient {
	constructor(private readonly base: string = "") {}

	private url(path: string): string {
		return this.base + path;
	}

	async model(): Promise<ModelInfo> {
		return (await expectJson(await fetch(this.url("/model")))) as ModelInfo;
	}

	async createSession(): Promise<string> {
		const resp = await fetch(this.url("/sessions"), { method: "POST" });
		const body = (await expectJson(resp)) as { sessionId: string };
		return body.sessionId;
	}

	async state(sessionId: string): Promise<SessionState> {
		const resp = await fetch(this.url(`/sessions/${sessionId}/state`));
		return (await expectJson(resp)) as SessionState;
	}

	async act(sessionId: string, kind: ActionKind, payload: ActionPayload): Promise<SessionState> {
		const resp = await fetch(this.url(`/sessions/${sessionId}/${kind}`), {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify(payload),
		});
		return (await expectJson(resp)) as SessionState;
	}

	async reset(sessionId: string): Promise<SessionState> {
		const resp = await fetch(this.url(`/sessions/${sessionId}/reset`), { method: "POST" });
		return (await expectJson(resp)) as SessionState;
	}

	async fork(sessionId: string): Promise<string> {
		const resp = await fetch(this.url(`/sessions/${sessionId}/fork`), { method: "POST" });
		const body = (await expectJson(resp)) as { sessionId: string };
		return body.sessionId;
	}
}

/** Session store: the current server view, the previous one (for delta
 * highlighting), and the last rejected action. All enforcement lives on the
 * server; a rejected submission keeps the view untouched and records the
 * error for inline display. */

import { ApiClient, ApiError } from "./api.js";
import type { ActionKind, ActionPayload, ApiErrorBody, AuthTable, ModelInfo, SessionState } from "./types.js";

export interface SubmitResult {
	ok: boolean;
	error?: ApiErrorBody;
}

export class SessionController {
	readonly api: ApiClient;
	model: ModelInfo | null = null;
	sessionId: string | null = null;
	view: SessionState | null = null;
	previousAuth: AuthTable | null = null;
	lastError: ApiErrorBody | null = null;
	onChange: () => void = () => {};

	constructor(api: ApiClient) {
		this.api = api;
	}

	async start(): Promise<void> {
		this.model = await this.api.model();
		this.sessionId = await this.api.createSession();
		this.view = await this.api.state(this.sessionId);
		this.previousAuth = null;
		this.lastError = null;
		this.onChange();
	}

	/** Submit an action; on a 409 the view is left exactly as it was. */
	async submit(kind: ActionKind, payload: ActionPayload): Promise<SubmitResult> {
		if (!this.sessionId) {
			throw new Error("no session");
		}
		try {
			const next = await this.api.act(this.sessionId, kind, payload);
			this.previousAuth = this.view ? this.view.auth : null;
			this.view = next;
			this.lastError = null;
			this.onChange();
			return { ok: true };
		} catch (err) {
			if (err instanceof ApiError && err.status === 409) {
				this.lastError = err.body;
				this.onChange();
				return { ok: false, error: err.body };
			}
			throw err;
		}
	}

	async reset(): Promise<void> {
		if (!this.sessionId) {
			return;
		}
		this.view = await this.api.reset(this.sessionId);
		this.previousAuth = null;
		this.lastError = null;
		this.onChange();
	}

	/** What-if support: duplicate the server session and switch to the copy. */
	async fork(): Promise<string> {
		if (!this.sessionId) {
			throw new Error("no session");
		}
		this.sessionId = await this.api.fork(this.sessionId);
		this.view = await this.api.state(this.sessionId);
		this.previousAuth = null;
		this.lastError = null;
		this.onChange();
		return this.sessionId;
	}

	/** Cells whose constraint changed relative to the previous view. */
	changedCells(): Set<string> {
		const changed = new Set<string>();
		if (!this.view || !this.previousAuth) {
			return changed;
		}
		for (const [point, cells] of Object.entries(this.view.auth)) {
			const before = this.previousAuth[point] ?? [];
			for (const cell of cells) {
				const old = before.find((c) => c.user === cell.user);
				if (!old || JSON.stringify(old.constraint) !== JSON.stringify(cell.constraint)) {
					changed.add(`${point}:${cell.user}`);
				}
			}
		}
		return changed;
	}
}

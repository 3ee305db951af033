/** Browser bootstrap: wires the action form to a session controller. */

import { ApiClient } from "./api.js";
import { renderState, renderUserOptions } from "./render.js";
import { SessionController } from "./state.js";
import type { ActionKind } from "./types.js";

function must<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) {
		throw new Error(`missing #${id}`);
	}
	return node as T;
}

export async function boot(root: Document = document): Promise<SessionController> {
	const params = new URLSearchParams(root.defaultView?.location.search ?? "");
	const controller = new SessionController(new ApiClient(params.get("api") ?? ""));

	const view = must<HTMLDivElement>("view");
	const kindSelect = must<HTMLSelectElement>("kind");
	const userSelect = must<HTMLSelectElement>("user");
	const pointInput = must<HTMLInputElement>("point");
	const timeInput = must<HTMLInputElement>("time");
	const form = must<HTMLFormElement>("action-form");
	const forkButton = must<HTMLButtonElement>("fork");
	const resetButton = must<HTMLButtonElement>("reset");
	const sessionLabel = must<HTMLSpanElement>("session-id");

	controller.onChange = () => {
		if (!controller.view) {
			return;
		}
		sessionLabel.textContent = controller.sessionId ?? "";
		renderState(view, controller.view, controller.changedCells(), controller.lastError, {
			onPick: (permit, user) => {
				pointInput.value = permit.point;
				userSelect.value = user;
				timeInput.value = permit.window[0];
				kindSelect.value = "execute";
			},
		});
	};

	form.addEventListener("submit", (event) => {
		event.preventDefault();
		const kind = kindSelect.value as ActionKind;
		const payload =
			kind === "advance"
				? { time: timeInput.value }
				: { user: userSelect.value, point: pointInput.value, time: timeInput.value };
		void controller.submit(kind, payload);
	});
	forkButton.addEventListener("click", () => void controller.fork());
	resetButton.addEventListener("click", () => void controller.reset());

	await controller.start();
	if (controller.model) {
		renderUserOptions(userSelect, controller.model);
	}
	return controller;
}

if (typeof document !== "undefined" && document.getElementById("view")) {
	void boot();
}

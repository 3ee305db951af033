/** DOM rendering. Pure functions from server state to elements: the grid,
 * permits, pending windows, and trace are projections of GET /state with no
 * client-side rule math. */

import type {
	AuthTable,
	ConstraintJson,
	ModelInfo,
	Permit,
	SessionState,
} from "./types.js";

const OP_GLYPH: Record<string, string> = {
	"<=": "≤",
	">=": "≥",
	"!=": "≠",
	"<": "<",
	">": ">",
	"=": "=",
};

export function constraintText(c: ConstraintJson | null): string {
	if (!c) {
		return "";
	}
	const op = OP_GLYPH[c.op] ?? c.op;
	if (c.kind === "absolute") {
		return `${c.bound},${op}`;
	}
	const offset = c.offset && c.offset !== "0" ? `+${c.offset}` : "";
	return `${c.point}${offset},${op}`;
}

export function cellText(user: string, c: ConstraintJson | null): string {
	return `${user}⟨${constraintText(c)}⟩`;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
	const node = document.createElement(tag);
	if (className) {
		node.className = className;
	}
	if (text !== undefined) {
		node.textContent = text;
	}
	return node;
}

export function renderHeader(state: SessionState): HTMLElement {
	const header = el("div", "header");
	header.appendChild(el("span", "clock", `t = ${state.now}`));
	header.appendChild(el("span", `status status-${state.status}`, state.status));
	if (state.status === "deadlocked" || state.status === "violation") {
		header.appendChild(el("div", "banner", `execution ${state.status}`));
	}
	for (const warning of state.warnings) {
		header.appendChild(el("div", "banner warning", warning));
	}
	return header;
}

export function renderError(error: { error: string; detail: string; constraint?: ConstraintJson } | null): HTMLElement {
	const box = el("div", "error-box");
	box.id = "error";
	if (error) {
		const constraint = error.constraint ? ` — ${constraintText(error.constraint)}` : "";
		box.appendChild(el("span", "error-text", `${error.error}: ${error.detail}${constraint}`));
	}
	return box;
}

export function renderPermits(
	state: SessionState,
	onPick?: (permit: Permit, user: string) => void,
): HTMLElement {
	const wrap = el("div", "permits");
	wrap.appendChild(el("h2", undefined, "enabled now"));
	const groups: [string, Permit[]][] = [
		["engine points", state.permits.filter((p) => p.users.some((u) => u.user === "wf" && u.verdict === "authorized"))],
		["task points", state.permits.filter((p) => p.users.every((u) => u.user !== "wf" || u.verdict !== "authorized"))],
	];
	for (const [label, permits] of groups) {
		if (!permits.length) {
			continue;
		}
		const section = el("div", "permit-group");
		section.appendChild(el("h3", undefined, label));
		for (const permit of permits) {
			const row = el("div", "permit");
			row.dataset.point = permit.point;
			row.appendChild(el("span", "point", permit.point));
			row.appendChild(el("span", "window", `[${permit.window[0]}, ${permit.window[1]}]`));
			for (const pu of permit.users) {
				if (pu.verdict === "not-in-set") {
					continue;
				}
				const badge = el("button", `user-badge ${pu.verdict}`, pu.user) as HTMLButtonElement;
				badge.type = "button";
				if (pu.verdict === "blocked") {
					badge.title = `blocked: ${constraintText(pu.constraint)}`;
					badge.disabled = true;
				} else if (onPick) {
					badge.addEventListener("click", () => onPick(permit, pu.user));
				}
				row.appendChild(badge);
			}
			section.appendChild(row);
		}
		wrap.appendChild(section);
	}
	if (!state.permits.length) {
		wrap.appendChild(el("p", "empty", "nothing is enabled at the current time"));
	}
	return wrap;
}

/** The per-point authorized-users grid; changed cells carry .changed. */
export function renderAuthGrid(auth: AuthTable, changed: Set<string> = new Set()): HTMLElement {
	const table = el("table", "auth-grid") as HTMLTableElement;
	table.id = "auth-grid";
	const head = table.createTHead().insertRow();
	head.appendChild(el("th", undefined, "point"));
	head.appendChild(el("th", undefined, "authorized users"));
	const body = table.createTBody();
	for (const point of Object.keys(auth).sort()) {
		const row = body.insertRow();
		row.dataset.point = point;
		const name = row.insertCell();
		name.textContent = point;
		const cells = row.insertCell();
		for (const cell of auth[point]) {
			const span = el("span", "auth-cell", cellText(cell.user, cell.constraint));
			span.dataset.user = cell.user;
			if (changed.has(`${point}:${cell.user}`)) {
				span.classList.add("changed");
			}
			if (cell.constraint) {
				span.classList.add("constrained");
			}
			cells.appendChild(span);
		}
	}
	return table;
}

export function renderPending(state: SessionState): HTMLElement {
	const wrap = el("div", "pending");
	wrap.appendChild(el("h2", undefined, "pending contingents"));
	if (!state.pending.length) {
		wrap.appendChild(el("p", "empty", "none"));
		return wrap;
	}
	for (const p of state.pending) {
		wrap.appendChild(el("div", "pending-row", `${p.point} completes within [${p.window[0]}, ${p.window[1]}]`));
	}
	return wrap;
}

export function renderTrace(state: SessionState): HTMLElement {
	const wrap = el("div", "trace");
	wrap.appendChild(el("h2", undefined, "trace"));
	const list = el("ol", "trace-list");
	for (const entry of state.trace) {
		list.appendChild(el("li", "trace-row", `(${entry.user}:${entry.point}=${entry.time})`));
	}
	wrap.appendChild(list);
	return wrap;
}

export interface ViewHooks {
	onPick?: (permit: Permit, user: string) => void;
}

/** Render the whole view into the container (replaces its content). */
export function renderState(
	container: HTMLElement,
	state: SessionState,
	changed: Set<string>,
	error: { error: string; detail: string; constraint?: ConstraintJson } | null,
	hooks: ViewHooks = {},
): void {
	container.replaceChildren(
		renderHeader(state),
		renderError(error),
		renderPermits(state, hooks.onPick),
		renderAuthGrid(state.auth, changed),
		renderPending(state),
		renderTrace(state),
	);
}

export function renderUserOptions(select: HTMLSelectElement, model: ModelInfo): void {
	select.replaceChildren();
	for (const user of model.users) {
		const option = document.createElement("option");
		option.value = user;
		option.textContent = user;
		select.appendChild(option);
	}
}

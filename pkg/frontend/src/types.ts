/** JSON shapes of the gateway API. The client renders these verbatim and
 * never re-evaluates any rule locally. */

export interface ConstraintJson {
	kind: "absolute" | "relative";
	op: string;
	bound?: string;
	point?: string;
	offset?: string;
}

export interface AuthCell {
	user: string;
	constraint: ConstraintJson | null;
}

export type AuthTable = Record<string, AuthCell[]>;

export interface PermitUser {
	user: string;
	verdict: "authorized" | "blocked" | "not-in-set";
	constraint: ConstraintJson | null;
}

export interface Permit {
	point: string;
	window: [string, string];
	users: PermitUser[];
}

export interface PendingContingent {
	point: string;
	window: [string, string];
}

export interface TraceEntry {
	user: string;
	point: string;
	time: string;
	auth: AuthTable;
}

export interface SessionState {
	now: string;
	status: string;
	permits: Permit[];
	auth: AuthTable;
	pending: PendingContingent[];
	trace: TraceEntry[];
	warnings: string[];
}

export interface ModelPoint {
	id: string;
	kind: "control" | "activation" | "contingent";
	wfOwned: boolean;
}

export interface ModelInfo {
	points: ModelPoint[];
	users: string[];
	rules: unknown[];
	taskPoints: Record<string, [string, string]>;
	auth: AuthTable;
}

export interface ApiErrorBody {
	error: string;
	detail: string;
	constraint?: ConstraintJson;
}

export type ActionKind = "execute" | "observe" | "advance";

export interface ActionPayload {
	user?: string;
	point?: string;
	time: string | number;
}

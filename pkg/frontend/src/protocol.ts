// Wire protocol v1 for the guidance service. One JSON object per text
// frame; see the server's service module docstring for the authoritative
// field list.

export const PROTOCOL_VERSION = 1;

export type Mode = "discrete" | "continuous";

export interface SessionEvent {
    time: number;
    kind: "overview" | "command" | "stop" | "grasp_prompt" | "done";
    utterance: string;
    payload: Record<string, unknown>;
}

export interface SessionMetrics {
    n_commands: number;
    guide_time: number;
    net_hand_movement: number;
    success: boolean;
}

export interface SceneMsg {
    type: "scene";
    target: [number, number, number];
    workspace: { extent: number; resolution: number };
    distractors: [number, number, number, number, number][];
}

export interface EventMsg {
    type: "event";
    event: SessionEvent;
}

export interface MetricsMsg {
    type: "metrics";
    metrics: SessionMetrics;
    events: SessionEvent[];
}

export interface ErrorMsg {
    type: "error";
    message: string;
}

export type ServerMsg = SceneMsg | EventMsg | MetricsMsg | ErrorMsg;

export function helloMsg(mode: Mode, target?: [number, number, number],
                         seed?: number): string {
    const msg: Record<string, unknown> = { type: "hello", version: PROTOCOL_VERSION, mode };
    if (target !== undefined) msg.target = target;
    if (seed !== undefined) msg.seed = seed;
    return JSON.stringify(msg);
}

export function poseMsg(t: number, x: number, y: number, z: number): string {
    return JSON.stringify({ type: "pose", t, x, y, z });
}

export function resetMsg(): string {
    return JSON.stringify({ type: "reset" });
}

const EVENT_KINDS = new Set(["overview", "command", "stop", "grasp_prompt", "done"]);

function isRecord(v: unknown): v is Record<string, unknown> {
    return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isVec(v: unknown, n: number): boolean {
    return Array.isArray(v) && v.length === n && v.every((x) => typeof x === "number");
}

export function isSessionEvent(v: unknown): v is SessionEvent {
    return isRecord(v)
        && typeof v.time === "number"
        && typeof v.kind === "string" && EVENT_KINDS.has(v.kind)
        && typeof v.utterance === "string"
        && isRecord(v.payload);
}

export function isSessionMetrics(v: unknown): v is SessionMetrics {
    return isRecord(v)
        && typeof v.n_commands === "number"
        && typeof v.guide_time === "number"
        && typeof v.net_hand_movement === "number"
        && typeof v.success === "boolean";
}

export function isSceneMsg(v: unknown): v is SceneMsg {
    return isRecord(v) && v.type === "scene"
        && isVec(v.target, 3)
        && isRecord(v.workspace)
        && typeof v.workspace.extent === "number"
        && typeof v.workspace.resolution === "number"
        && Array.isArray(v.distractors) && v.distractors.every((d) => isVec(d, 5));
}

export function parseServerMsg(raw: string): ServerMsg {
    let msg: unknown;
    try {
        msg = JSON.parse(raw);
    } catch {
        throw new Error("malformed server frame: not JSON");
    }
    if (!isRecord(msg) || typeof msg.type !== "string") {
        throw new Error("malformed server frame: missing type");
    }
    switch (msg.type) {
        case "scene":
            if (!isSceneMsg(msg)) throw new Error("malformed scene message");
            return msg;
        case "event":
            if (!isSessionEvent(msg.event)) throw new Error("malformed event message");
            return msg as unknown as EventMsg;
        case "metrics":
            if (!isSessionMetrics(msg.metrics)
                || !Array.isArray(msg.events)
                || !msg.events.every(isSessionEvent)) {
                throw new Error("malformed metrics message");
            }
            return msg as unknown as MetricsMsg;
        case "error":
            if (typeof msg.message !== "string") throw new Error("malformed error message");
            return msg as unknown as ErrorMsg;
        default:
            throw new Error(`unknown server message type ${msg.type}`);
    }
}

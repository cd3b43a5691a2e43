// Timeline for replaying a recorded session: pose interpolation over the
// trace plus the utterances spoken so far at any playback time.

import type { SessionEvent } from "./protocol.js";
import type { TracePoint } from "./metrics.js";

export interface ReplayState {
    pose: [number, number, number];
    events: SessionEvent[];
    lastUtterance: string;
}

export class Replay {
    constructor(readonly trace: readonly TracePoint[],
                readonly events: readonly SessionEvent[]) {
        if (trace.length === 0) throw new Error("empty trace");
        for (let i = 1; i < trace.length; i++) {
            if (trace[i]![0] <= trace[i - 1]![0]) {
                throw new Error("trace timestamps must be strictly increasing");
            }
        }
    }

    get duration(): number {
        return this.trace[this.trace.length - 1]![0];
    }

    stateAt(t: number): ReplayState {
        const seen = this.events.filter((e) => e.time <= t);
        return {
            pose: this.poseAt(t),
            events: seen as SessionEvent[],
            lastUtterance: seen.length > 0 ? seen[seen.length - 1]!.utterance : "",
        };
    }

    poseAt(t: number): [number, number, number] {
        const trace = this.trace;
        if (t <= trace[0]![0]) return [trace[0]![1], trace[0]![2], trace[0]![3]];
        for (let i = 1; i < trace.length; i++) {
            const [tb, bx, by, bz] = trace[i]!;
            if (t < tb) {
                const [ta, ax, ay, az] = trace[i - 1]!;
                const w = (t - ta) / (tb - ta);
                return [ax + w * (bx - ax), ay + w * (by - ay), az + w * (bz - az)];
            }
        }
        const last = trace[trace.length - 1]!;
        return [last[1], last[2], last[3]];
    }
}

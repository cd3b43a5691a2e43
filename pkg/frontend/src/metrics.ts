// Client-side metrics reducer. Must agree with the server's transcript
// recomputation so the UI can display numbers without trusting its own
// bookkeeping: n_commands counts command and stop utterances, guide time
// runs from the first of those to the done event, and net movement is the
// path length of the pose trace.

import type { SessionEvent, SessionMetrics } from "./protocol.js";

export type TracePoint = [t: number, x: number, y: number, z: number];

export function pathLength(trace: readonly TracePoint[]): number {
    let total = 0;
    for (let i = 1; i < trace.length; i++) {
        const [, ax, ay, az] = trace[i - 1]!;
        const [, bx, by, bz] = trace[i]!;
        const dx = bx - ax;
        const dy = by - ay;
        const dz = bz - az;
        total += Math.sqrt(dx * dx + dy * dy + dz * dz);
    }
    return total;
}

export function reduceMetrics(events: readonly SessionEvent[],
                              trace: readonly TracePoint[] = []): SessionMetrics {
    const commandTimes = events
        .filter((e) => e.kind === "command" || e.kind === "stop")
        .map((e) => e.time);
    const done = events.filter((e) => e.kind === "done");
    const guide_time = done.length > 0 && commandTimes.length > 0
        ? done[done.length - 1]!.time - commandTimes[0]!
        : 0;
    return {
        n_commands: commandTimes.length,
        guide_time,
        net_hand_movement: pathLength(trace),
        success: done.length > 0,
    };
}

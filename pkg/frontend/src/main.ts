// Playground: drive the hand with the mouse on a top-down (x up-axis view)
// canvas, listen to the guidance utterances, watch the metrics.

import { GuidanceClient } from "./client.js";
import { Viewport } from "./mapping.js";
import { reduceMetrics, type TracePoint } from "./metrics.js";
import type { Mode, SceneMsg, SessionEvent, SessionMetrics } from "./protocol.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const log = document.getElementById("log") as HTMLElement;
const metricsEl = document.getElementById("metrics") as HTMLElement;
const modeSel = document.getElementById("mode") as HTMLSelectElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;

let scene: SceneMsg | null = null;
let events: SessionEvent[] = [];
let serverMetrics: SessionMetrics | null = null;
let trace: TracePoint[] = [];
let hand: [number, number, number] = [0, 0, 0];
let client: GuidanceClient | null = null;
let view = new Viewport(canvas.width, canvas.height, 0.8);
let t0 = performance.now();

function say(text: string) {
    const line = document.createElement("div");
    line.textContent = text;
    log.appendChild(line);
    log.scrollTop = log.scrollHeight;
    if ("speechSynthesis" in window) {
        window.speechSynthesis.speak(new SpeechSynthesisUtterance(text));
    }
}

function connect() {
    events = [];
    trace = [];
    serverMetrics = null;
    hand = [0, 0, 0];
    t0 = performance.now();
    log.textContent = "";
    const url = (location.protocol === "https:" ? "wss://" : "ws://")
        + location.host + "/ws";
    client = new GuidanceClient(url, modeSel.value as Mode, {
        onMessage: (msg) => {
            if (msg.type === "scene") {
                scene = msg;
                view = new Viewport(canvas.width, canvas.height,
                                    msg.workspace.extent);
            } else if (msg.type === "event") {
                events.push(msg.event);
                say(msg.event.utterance);
            } else if (msg.type === "metrics") {
                serverMetrics = msg.metrics;
            } else {
                say(`error: ${msg.message}`);
            }
            render();
        },
        onClose: () => say("connection closed"),
    });
}

canvas.addEventListener("pointermove", (ev) => {
    if (!client || !scene) return;
    const rect = canvas.getBoundingClientRect();
    const [x, y] = view.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
    hand = [x, y, scene.target[2]]; // depth is pinned to the shelf plane
    const t = (performance.now() - t0) / 1000;
    trace.push([t, ...hand]);
    client.sendPose(t, hand[0], hand[1], hand[2]);
    render();
});

resetBtn.addEventListener("click", () => {
    client?.close();
    connect();
});
modeSel.addEventListener("change", () => {
    client?.close();
    connect();
});

function dot(x: number, y: number, r: number, color: string) {
    const [px, py] = view.toPx(x, y);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(px, py, r, 0, 2 * Math.PI);
    ctx.fill();
}

function render() {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (scene) {
        for (const [x, y] of scene.distractors) dot(x, y, 8, "#999");
        dot(scene.target[0], scene.target[1], 10, "#2a7");
    }
    dot(hand[0], hand[1], 6, "#d33");
    const m = serverMetrics ?? reduceMetrics(events, trace);
    metricsEl.textContent =
        `commands ${m.n_commands}  guide ${m.guide_time.toFixed(1)}s  ` +
        `moved ${m.net_hand_movement.toFixed(2)}m  ` +
        `${m.success ? "done" : "in progress"}` +
        (serverMetrics ? " (server)" : "");
}

connect();
render();

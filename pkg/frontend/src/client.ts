// Thin WebSocket wrapper around the guidance service protocol.

import {
    helloMsg,
    parseServerMsg,
    poseMsg,
    resetMsg,
    type Mode,
    type ServerMsg,
} from "./protocol.js";
import { PoseClock } from "./mapping.js";

export interface ClientHandlers {
    onMessage: (msg: ServerMsg) => void;
    onClose?: () => void;
}

export class GuidanceClient {
    private socket: WebSocket;
    private clock = new PoseClock();

    constructor(url: string, mode: Mode, handlers: ClientHandlers,
                target?: [number, number, number], seed?: number) {
        this.socket = new WebSocket(url);
        this.socket.onopen = () => {
            this.socket.send(helloMsg(mode, target, seed));
        };
        this.socket.onmessage = (ev) => {
            handlers.onMessage(parseServerMsg(ev.data as string));
        };
        this.socket.onclose = () => handlers.onClose?.();
    }

    sendPose(t: number, x: number, y: number, z: number): void {
        if (this.socket.readyState !== WebSocket.OPEN) return;
        this.socket.send(poseMsg(this.clock.next(t), x, y, z));
    }

    reset(): void {
        this.clock = new PoseClock();
        this.socket.send(resetMsg());
    }

    close(): void {
        this.socket.close();
    }
}

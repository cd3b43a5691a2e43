// Canvas px <-> workspace meter mapping and pose timestamp hygiene.

export class Viewport {
    constructor(readonly widthPx: number, readonly heightPx: number,
                readonly extent: number) {
        if (widthPx <= 0 || heightPx <= 0 || extent <= 0) {
            throw new Error("viewport dimensions must be positive");
        }
    }

    // meters per pixel; the square workspace [-extent, extent]^2 is fit
    // inside the canvas, letterboxed on the longer side
    get scale(): number {
        return (2 * this.extent) / Math.min(this.widthPx, this.heightPx);
    }

    // world x right, world y up; canvas y grows downward
    toPx(x: number, y: number): [number, number] {
        return [
            this.widthPx / 2 + x / this.scale,
            this.heightPx / 2 - y / this.scale,
        ];
    }

    toWorld(px: number, py: number): [number, number] {
        const x = (px - this.widthPx / 2) * this.scale;
        const y = (this.heightPx / 2 - py) * this.scale;
        return [this.clamp(x), this.clamp(y)];
    }

    clamp(v: number): number {
        return Math.max(-this.extent, Math.min(this.extent, v));
    }
}

// The server closes the connection on non-increasing pose timestamps, so
// every outgoing t goes through here.
export class PoseClock {
    private last = -Infinity;

    constructor(readonly minStep = 1e-4) {}

    next(t: number): number {
        const out = t > this.last ? t : this.last + this.minStep;
        this.last = out;
        return out;
    }
}

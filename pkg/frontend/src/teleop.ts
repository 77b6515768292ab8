// Teleoperation panel model: posts the touched setpoints at a fixed cadence
// while engaged; going silent lets the guidance-side staleness failsafe drop
// the claim. Heading values stay continuous across the 0/360 wrap.

import type { ConsoleApi } from "./api.js";

export const TELEOP_CADENCE_MS = 200; // 5 Hz

const TWO_PI = 2 * Math.PI;

/** Re-express `next` (radians) in the winding closest to `prev` so slider
 *  sweeps across north never jump by a full turn. */
export function continuousHeading(prev: number, next: number): number {
    let delta = (next - prev) % TWO_PI;
    if (delta > Math.PI) delta -= TWO_PI;
    if (delta < -Math.PI) delta += TWO_PI;
    return prev + delta;
}

type Timer = ReturnType<typeof setInterval>;

export class TeleopPanel {
    engaged = false;
    values: Record<string, number> = {};
    lastError: string | null = null;
    private timer: Timer | null = null;

    constructor(
        private api: ConsoleApi,
        private schedule: (fn: () => void, ms: number) => Timer = setInterval,
        private cancel: (t: Timer) => void = clearInterval,
    ) {}

    set(dof: string, value: number) {
        if (dof === "heading" || dof === "yaw") {
            const prev = this.values[dof];
            this.values[dof] = prev === undefined ? value : continuousHeading(prev, value);
        } else {
            this.values[dof] = value;
        }
    }

    clear(dof: string) {
        delete this.values[dof];
    }

    engage() {
        if (this.engaged) return;
        this.engaged = true;
        this.post();
        this.timer = this.schedule(() => this.post(), TELEOP_CADENCE_MS);
    }

    disengage() {
        this.engaged = false;
        if (this.timer !== null) {
            this.cancel(this.timer);
            this.timer = null;
        }
    }

    private post() {
        if (!this.engaged || Object.keys(this.values).length === 0) return;
        this.api.teleop(this.values).catch((err) => {
            this.lastError = String(err);
        });
    }
}

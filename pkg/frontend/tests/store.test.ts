import { describe, expect, it } from "vitest";

import type { TelemetryRecord } from "../src/api.js";
import { BREADCRUMB_LIMIT, ConsoleStore, STALE_AFTER_MS } from "../src/store.js";

function record(tick: number, x = 0, fault = false): TelemetryRecord {
    return {
        schema: 1,
        t: tick * 0.1,
        tick,
        state: "survey",
        mode: "cruise",
        enabled: true,
        truth: {
            pose: { position: [x, 0, -2], euler: [0, 0, 0], depth: 2 },
            twist: { linear: [0, 0, 0], angular: [0, 0, 0] },
        },
        odom: {
            pose: { position: [x, 0, -2], euler: [0, 0, 0], depth: 2 },
            twist: { linear: [0, 0, 0], angular: [0, 0, 0] },
        },
        setpoint: {},
        errors: {},
        tau_star: {},
        thrusters: [],
        residual: 0,
        flags: { saturation: false, gimbal: false, fault, payload: false, stopping: false },
    };
}

describe("ConsoleStore breadcrumb", () => {
    it("grows one point per record", () => {
        const store = new ConsoleStore();
        for (let i = 0; i < 3; i++) store.onRecord(record(i, i), 1000 + i);
        expect(store.breadcrumbPoints()).toHaveLength(3);
    });

    it("never exceeds the 20-point limit", () => {
        const store = new ConsoleStore();
        for (let i = 0; i < 57; i++) store.onRecord(record(i, i), 1000 + i);
        const points = store.breadcrumbPoints();
        expect(points).toHaveLength(BREADCRUMB_LIMIT);
        expect(points[0].x).toBe(57 - BREADCRUMB_LIMIT); // oldest retained
        expect(points[points.length - 1].x).toBe(56);
    });
});

describe("ConsoleStore staleness", () => {
    it("is fresh right after a push and stale after the window", () => {
        const store = new ConsoleStore();
        store.onRecord(record(0), 10_000);
        expect(store.isStale(10_000 + STALE_AFTER_MS - 1)).toBe(false);
        expect(store.isStale(10_000 + STALE_AFTER_MS + 1)).toBe(true);
    });

    it("is not stale before any telemetry arrived", () => {
        expect(new ConsoleStore().isStale(99_999)).toBe(false);
    });
});

describe("ConsoleStore flags", () => {
    it("surfaces the fault flag", () => {
        const store = new ConsoleStore();
        store.onRecord(record(0, 0, true), 0);
        expect(store.hasFault()).toBe(true);
    });

    it("tracks the active state from telemetry", () => {
        const store = new ConsoleStore();
        const rec = record(0);
        rec.state = "teleop";
        store.onRecord(rec, 0);
        expect(store.fsm.active).toBe("teleop");
    });
});

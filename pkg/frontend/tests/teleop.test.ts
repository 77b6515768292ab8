import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { TELEOP_CADENCE_MS, TeleopPanel, continuousHeading } from "../src/teleop.js";

describe("continuousHeading", () => {
    it("keeps sweeps across north continuous", () => {
        // 350 degrees then 10 degrees must advance by +20, not jump back 340
        const prev = (350 * Math.PI) / 180;
        const next = continuousHeading(prev, (10 * Math.PI) / 180);
        expect(next).toBeCloseTo((370 * Math.PI) / 180, 10);
    });

    it("is the identity for small changes", () => {
        expect(continuousHeading(0.2, 0.3)).toBeCloseTo(0.3, 12);
    });

    it("handles the negative wrap too", () => {
        const prev = (-170 * Math.PI) / 180;
        const next = continuousHeading(prev, (170 * Math.PI) / 180);
        expect(next).toBeCloseTo((-190 * Math.PI) / 180, 10);
    });
});

describe("TeleopPanel cadence", () => {
    let posts: Record<string, number>[];
    let api: ConsoleApi;

    beforeEach(() => {
        vi.useFakeTimers();
        posts = [];
        api = new ConsoleApi("http://example.invalid");
        vi.spyOn(api, "teleop").mockImplementation(async (values) => {
            posts.push({ ...values });
            return { ok: true, dofs: Object.keys(values).length };
        });
    });

    afterEach(() => {
        vi.useRealTimers();
    });

    it("posts touched DOFs at 5 Hz while engaged", () => {
        const panel = new TeleopPanel(api);
        panel.set("pitch", 0.5236);
        panel.engage();
        vi.advanceTimersByTime(TELEOP_CADENCE_MS * 5);
        expect(posts.length).toBe(6); // immediate post + five ticks
        expect(posts[0]).toEqual({ pitch: 0.5236 });
    });

    it("stops posting when disengaged", () => {
        const panel = new TeleopPanel(api);
        panel.set("depth", 2.0);
        panel.engage();
        vi.advanceTimersByTime(TELEOP_CADENCE_MS * 2);
        panel.disengage();
        const seen = posts.length;
        vi.advanceTimersByTime(TELEOP_CADENCE_MS * 10);
        expect(posts.length).toBe(seen);
    });

    it("posts nothing when no DOF was touched", () => {
        const panel = new TeleopPanel(api);
        panel.engage();
        vi.advanceTimersByTime(TELEOP_CADENCE_MS * 3);
        expect(posts.length).toBe(0);
    });
});

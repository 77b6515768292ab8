// Console loop against a live runner (spawned as a subprocess): waypoint
// drags, breadcrumb cap, and transition rejection handling, exercised through
// the same modules the browser page uses.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { diffMissions } from "../src/mission.js";
import { ConsoleStore, BREADCRUMB_LIMIT } from "../src/store.js";
import { FsmTabs } from "../src/fsm.js";
import { MissionSync } from "../src/sync.js";

const CONFIG = resolve(__dirname, "../../src/auvstack/configs/vectored.yaml");

let proc: ChildProcess;
let api: ConsoleApi;

function startRunner(): Promise<string> {
    const log = join(mkdtempSync(join(tmpdir(), "console-live-")), "telemetry.jsonl");
    proc = spawn(
        "python3",
        ["-m", "auvstack.cli", "run", "--config", CONFIG, "--headless",
         "--bind", "127.0.0.1:0", "--log", log],
        { stdio: ["ignore", "ignore", "pipe"] },
    );
    return new Promise((resolvePort, reject) => {
        const timer = setTimeout(() => reject(new Error("runner did not start")), 20000);
        let buf = "";
        proc.stderr!.on("data", (chunk: Buffer) => {
            buf += chunk.toString();
            const m = /api: (http:\/\/[\d.]+:\d+)/.exec(buf);
            if (m) {
                clearTimeout(timer);
                resolvePort(m[1]);
            }
        });
        proc.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`runner exited early (${code}): ${buf}`));
        });
    });
}

beforeAll(async () => {
    const base = await startRunner();
    api = new ConsoleApi(base);
    // wait until telemetry is flowing
    for (let i = 0; i < 100; i++) {
        const status = await api.status().catch(() => null);
        if (status?.ready) return;
        await new Promise((r) => setTimeout(r, 100));
    }
    throw new Error("runner never became ready");
}, 30000);

afterAll(async () => {
    if (api) await api.stop().catch(() => undefined);
    proc?.kill();
});

describe("console loop against a live runner", () => {
    it("dragging a waypoint issues a PUT whose body differs only in that waypoint", async () => {
        const mission = new MissionSync(api);
        await mission.refresh();
        const before = mission.confirmed.map((wp) => ({ ...wp }));
        expect(before.length).toBeGreaterThanOrEqual(3);

        const sent = await mission.dragWaypoint(2, 7.25, 19.5);
        expect(sent).not.toBeNull();
        expect(diffMissions(before, sent!)).toEqual([2]);
        expect(sent![2].xy).toEqual([7.25, 19.5]);

        // the runner applies the replacement at the next tick boundary
        for (let i = 0; i < 50; i++) {
            const { waypoints } = await api.getWaypoints();
            if (JSON.stringify(waypoints[2].xy) === JSON.stringify([7.25, 19.5])) return;
            await new Promise((r) => setTimeout(r, 50));
        }
        throw new Error("replacement never observed on the server");
    }, 20000);

    it("breadcrumb never exceeds 20 points while telemetry streams", async () => {
        const store = new ConsoleStore();
        const controller = new AbortController();
        let seen = 0;
        let worst = 0;
        const stream = api
            .streamTelemetry((record) => {
                store.onRecord(record, Date.now());
                seen += 1;
                worst = Math.max(worst, store.breadcrumbPoints().length);
                if (seen >= 60) controller.abort();
            }, controller.signal)
            .catch(() => undefined); // aborting rejects the fetch
        await stream;
        expect(seen).toBeGreaterThanOrEqual(60);
        expect(worst).toBeLessThanOrEqual(BREADCRUMB_LIMIT);
        expect(store.breadcrumbPoints().length).toBe(BREADCRUMB_LIMIT);
    }, 30000);

    async function waitForState(name: string): Promise<void> {
        for (let i = 0; i < 100; i++) {
            const status = await api.status();
            if (status.fsm.active === name) return;
            await new Promise((r) => setTimeout(r, 50));
        }
        throw new Error(`server never reached state ${name}`);
    }

    it("a rejected transition shows the server reason and keeps the tab", async () => {
        const store = new ConsoleStore();
        const status = await api.status();
        store.seed(status, [], Date.now());
        const tabs = new FsmTabs(api, store);

        // park the vehicle in hold, which only allows a transition to survey
        if (store.fsm.active !== "hold") {
            expect(await tabs.clickTab("hold")).toBe(true);
            await waitForState("hold"); // transitions apply at tick boundaries
        }
        expect(tabs.active).toBe("hold");

        const ok = await tabs.clickTab("teleop");
        expect(ok).toBe(false);
        expect(tabs.active).toBe("hold"); // selection unchanged
        expect(tabs.rejection?.target).toBe("teleop");
        expect(tabs.rejection?.reason).toMatch(/not allowed/);

        // the allowed path still works
        expect(await tabs.clickTab("survey")).toBe(true);
        expect(tabs.active).toBe("survey");
    }, 20000);
});

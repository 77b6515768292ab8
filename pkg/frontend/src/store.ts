// Central console state fed by the telemetry push stream. Views subscribe and
// re-render; no view ever talks to the stream directly.

import type { StatusResponse, TelemetryRecord, TrackPoint } from "./api.js";

export const BREADCRUMB_LIMIT = 20;
export const STALE_AFTER_MS = 2000;

export type Listener = () => void;

export interface FsmView {
    active: string;
    allowed: string[];
    states: string[];
}

export class ConsoleStore {
    latest: TelemetryRecord | null = null;
    fsm: FsmView = { active: "", allowed: [], states: [] };
    connected = false;
    private breadcrumb: TrackPoint[] = [];
    private lastPushMs = 0;
    private listeners: Listener[] = [];

    subscribe(fn: Listener): () => void {
        this.listeners.push(fn);
        return () => {
            this.listeners = this.listeners.filter((l) => l !== fn);
        };
    }

    private notify() {
        for (const fn of this.listeners) fn();
    }

    seed(status: StatusResponse, track: TrackPoint[], nowMs: number) {
        this.fsm = {
            active: status.fsm.active,
            allowed: status.fsm.allowed_transitions,
            states: status.fsm.states,
        };
        this.breadcrumb = track.slice(-BREADCRUMB_LIMIT);
        if (status.record) {
            this.latest = status.record;
            this.lastPushMs = nowMs;
        }
        this.notify();
    }

    onRecord(record: TelemetryRecord, nowMs: number) {
        this.latest = record;
        this.lastPushMs = nowMs;
        this.connected = true;
        this.fsm.active = record.state;
        this.breadcrumb.push({
            t: record.t,
            x: record.truth.pose.position[0],
            y: record.truth.pose.position[1],
            depth: record.truth.pose.depth,
        });
        if (this.breadcrumb.length > BREADCRUMB_LIMIT) {
            this.breadcrumb.splice(0, this.breadcrumb.length - BREADCRUMB_LIMIT);
        }
        this.notify();
    }

    onDisconnect() {
        this.connected = false;
        this.notify();
    }

    setFsmActive(state: string) {
        this.fsm.active = state;
        this.notify();
    }

    breadcrumbPoints(): readonly TrackPoint[] {
        return this.breadcrumb;
    }

    isStale(nowMs: number): boolean {
        return this.latest !== null && nowMs - this.lastPushMs > STALE_AFTER_MS;
    }

    hasFault(): boolean {
        return this.latest?.flags.fault ?? false;
    }
}

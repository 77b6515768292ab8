// Typed client for the runner HTTP API. The console never mutates vehicle
// state except through these endpoints.

export interface WaypointBody {
    xy?: [number, number];
    lat?: number;
    lon?: number;
    depth?: number;
    altitude?: number;
    speed?: number;
}

export interface ThrusterTelemetry {
    id: string;
    force: number;
    command: number;
    servo_angle?: number;
    servo_delta?: number;
}

export interface TelemetryRecord {
    schema: number;
    t: number;
    tick: number;
    state: string;
    mode: string;
    enabled: boolean;
    truth: { pose: PoseTelemetry; twist: TwistTelemetry };
    odom: { pose: PoseTelemetry; twist: TwistTelemetry };
    setpoint: Record<string, number>;
    errors: Record<string, number>;
    tau_star: Record<string, number>;
    thrusters: ThrusterTelemetry[];
    residual: number;
    flags: { saturation: boolean; gimbal: boolean; fault: boolean; payload: boolean; stopping: boolean };
}

export interface PoseTelemetry {
    position: [number, number, number];
    euler: [number, number, number];
    depth: number;
}

export interface TwistTelemetry {
    linear: [number, number, number];
    angular: [number, number, number];
}

export interface StatusResponse {
    ready: boolean;
    fsm: { active: string; allowed_transitions: string[]; states: string[] };
    record: TelemetryRecord | null;
}

export interface TrackPoint {
    t: number;
    x: number;
    y: number;
    depth: number;
}

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly reason: string,
        readonly detail?: string,
    ) {
        super(detail ? `${reason}: ${detail}` : reason);
    }
}

async function parseError(resp: Response): Promise<ApiError> {
    let reason = `http_${resp.status}`;
    let detail: string | undefined;
    try {
        const body = await resp.json();
        reason = body.reason ?? reason;
        detail = body.detail;
    } catch {
        // non-JSON error body; keep the status-based reason
    }
    return new ApiError(resp.status, reason, detail);
}

export class ConsoleApi {
    constructor(readonly base: string) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const resp = await fetch(`${this.base}${path}`, {
            headers: { "Content-Type": "application/json" },
            ...init,
        });
        if (!resp.ok) throw await parseError(resp);
        return (await resp.json()) as T;
    }

    status(): Promise<StatusResponse> {
        return this.request("/status");
    }

    track(): Promise<{ positions: TrackPoint[] }> {
        return this.request("/track");
    }

    config(): Promise<Record<string, unknown>> {
        return this.request("/config");
    }

    getWaypoints(): Promise<{ waypoints: WaypointBody[] }> {
        return this.request("/mission/waypoints");
    }

    putWaypoints(waypoints: WaypointBody[]): Promise<{ ok: boolean; count: number }> {
        return this.request("/mission/waypoints", {
            method: "PUT",
            body: JSON.stringify({ waypoints }),
        });
    }

    transition(target: string): Promise<{ ok: boolean; target: string }> {
        return this.request("/fsm/transition", {
            method: "POST",
            body: JSON.stringify({ target }),
        });
    }

    setController(enabled: boolean): Promise<{ ok: boolean; enabled: boolean }> {
        return this.request(`/controller/${enabled ? "enable" : "disable"}`, { method: "POST" });
    }

    teleop(values: Record<string, number>): Promise<{ ok: boolean; dofs: number }> {
        return this.request("/teleop", { method: "POST", body: JSON.stringify(values) });
    }

    setPayload(on: boolean): Promise<{ ok: boolean }> {
        return this.request("/payload", { method: "POST", body: JSON.stringify({ on }) });
    }

    stop(): Promise<{ ok: boolean }> {
        return this.request("/stop", { method: "POST" });
    }

    // Server-push telemetry: parses the SSE stream with plain fetch so the
    // same code runs in the browser and under node-based tests.
    async streamTelemetry(
        onRecord: (record: TelemetryRecord) => void,
        signal?: AbortSignal,
    ): Promise<void> {
        const resp = await fetch(`${this.base}/telemetry`, { signal });
        if (!resp.ok || !resp.body) throw await parseError(resp);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
            const { value, done } = await reader.read();
            if (done) return;
            buffer += decoder.decode(value, { stream: true });
            let idx: number;
            while ((idx = buffer.indexOf("\n\n")) >= 0) {
                const frame = buffer.slice(0, idx);
                buffer = buffer.slice(idx + 2);
                if (frame.startsWith("data: ")) {
                    onRecord(JSON.parse(frame.slice(6)) as TelemetryRecord);
                }
            }
        }
    }
}

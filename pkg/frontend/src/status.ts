// Status panel formatting: pose, depth, active state, per-thruster commands,
// fault/saturation indicators, staleness banner.

import type { TelemetryRecord } from "./api.js";

export function formatDepth(depth: number): string {
    return `${depth.toFixed(2)} m`;
}

export function formatAngleDeg(rad: number): string {
    return `${((rad * 180) / Math.PI).toFixed(1)}°`;
}

export interface StatusLine {
    label: string;
    value: string;
    alert?: boolean;
}

export function statusLines(rec: TelemetryRecord): StatusLine[] {
    const pose = rec.truth.pose;
    const lines: StatusLine[] = [
        { label: "t", value: `${rec.t.toFixed(1)} s` },
        { label: "state", value: rec.state },
        { label: "mode", value: rec.mode },
        { label: "position", value: `${pose.position[0].toFixed(1)}, ${pose.position[1].toFixed(1)} m` },
        { label: "depth", value: formatDepth(pose.depth) },
        { label: "heading", value: formatAngleDeg(pose.euler[2]) },
        { label: "pitch", value: formatAngleDeg(pose.euler[1]) },
        { label: "surge", value: `${rec.truth.twist.linear[0].toFixed(2)} m/s` },
        { label: "controller", value: rec.enabled ? "enabled" : "DISABLED", alert: !rec.enabled },
        { label: "residual", value: rec.residual.toFixed(3) },
    ];
    if (rec.flags.fault) lines.push({ label: "FAULT", value: "allocation fault", alert: true });
    if (rec.flags.saturation) lines.push({ label: "saturation", value: "thruster at limit", alert: true });
    if (rec.flags.gimbal) lines.push({ label: "gimbal", value: "euler-rate frozen", alert: true });
    return lines;
}

export function thrusterLines(rec: TelemetryRecord): StatusLine[] {
    return rec.thrusters.map((t) => ({
        label: t.id,
        value:
            t.servo_angle !== undefined
                ? `${t.command.toFixed(1)} @ ${formatAngleDeg(t.servo_angle)}`
                : t.command.toFixed(1),
    }));
}

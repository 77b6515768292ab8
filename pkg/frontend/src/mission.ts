// Mission draft editing: waypoint validation, one-waypoint moves for map
// drags, and a KML LineString importer. All edits are immutable so the draft
// can be diffed against the last confirmed server state.

import type { WaypointBody } from "./api.js";

export interface ValidationIssue {
    index: number;
    message: string;
}

export function validateWaypoint(wp: WaypointBody, index: number): ValidationIssue | null {
    const hasXy = wp.xy !== undefined;
    const hasGeo = wp.lat !== undefined || wp.lon !== undefined;
    if (hasXy === hasGeo) {
        return { index, message: "give either xy or lat/lon" };
    }
    if (hasGeo && (wp.lat === undefined || wp.lon === undefined)) {
        return { index, message: "lat and lon must appear together" };
    }
    const hasDepth = wp.depth !== undefined;
    const hasAlt = wp.altitude !== undefined;
    if (hasDepth === hasAlt) {
        return { index, message: "exactly one of depth or altitude" };
    }
    if (wp.speed !== undefined && !(wp.speed > 0)) {
        return { index, message: "speed must be > 0" };
    }
    const values = [wp.xy?.[0], wp.xy?.[1], wp.lat, wp.lon, wp.depth, wp.altitude, wp.speed];
    if (values.some((v) => v !== undefined && !Number.isFinite(v))) {
        return { index, message: "fields must be finite numbers" };
    }
    return null;
}

export function validateMission(waypoints: WaypointBody[]): ValidationIssue[] {
    if (waypoints.length === 0) {
        return [{ index: -1, message: "mission needs at least one waypoint" }];
    }
    const issues: ValidationIssue[] = [];
    waypoints.forEach((wp, i) => {
        const issue = validateWaypoint(wp, i);
        if (issue) issues.push(issue);
    });
    return issues;
}

/** New list with waypoint `index` moved to (x, y); everything else untouched. */
export function moveWaypoint(
    waypoints: readonly WaypointBody[],
    index: number,
    x: number,
    y: number,
): WaypointBody[] {
    return waypoints.map((wp, i) => {
        if (i !== index) return { ...wp };
        const moved: WaypointBody = { ...wp, xy: [x, y] };
        delete moved.lat;
        delete moved.lon;
        return moved;
    });
}

/** Indices at which two missions differ (length mismatch flags the longer tail). */
export function diffMissions(a: readonly WaypointBody[], b: readonly WaypointBody[]): number[] {
    const out: number[] = [];
    const n = Math.max(a.length, b.length);
    for (let i = 0; i < n; i++) {
        if (JSON.stringify(a[i] ?? null) !== JSON.stringify(b[i] ?? null)) out.push(i);
    }
    return out;
}

/** Waypoint rows from the first LineString of a KML document.
 *  Coordinates are lon,lat[,depth] tuples; depth is positive-down meters. */
export function parseKml(text: string): WaypointBody[] {
    const match = /<LineString>[\s\S]*?<coordinates>([\s\S]*?)<\/coordinates>/i.exec(text);
    if (!match) throw new Error("KML has no LineString coordinates");
    const tokens = match[1].trim().split(/\s+/).filter((t) => t.length > 0);
    if (tokens.length === 0) throw new Error("KML coordinates are empty");
    return tokens.map((token, i) => {
        const parts = token.split(",").map(Number);
        if (parts.length < 2 || parts.some((v) => !Number.isFinite(v))) {
            throw new Error(`KML coordinate ${i} is malformed`);
        }
        const [lon, lat, depth] = parts;
        return { lat, lon, depth: depth ?? 0 };
    });
}

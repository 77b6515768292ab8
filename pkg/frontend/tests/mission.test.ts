import { describe, expect, it } from "vitest";

import { diffMissions, moveWaypoint, parseKml, validateMission, validateWaypoint } from "../src/mission.js";
import type { WaypointBody } from "../src/api.js";

const wp = (x: number, y: number, depth = 2): WaypointBody => ({ xy: [x, y], depth });

describe("validateWaypoint", () => {
    it("accepts xy + depth", () => {
        expect(validateWaypoint(wp(1, 2), 0)).toBeNull();
    });

    it("rejects depth and altitude together", () => {
        expect(validateWaypoint({ xy: [0, 0], depth: 1, altitude: 1 }, 3)).toMatchObject({
            index: 3,
            message: expect.stringContaining("exactly one"),
        });
    });

    it("rejects neither depth nor altitude", () => {
        expect(validateWaypoint({ xy: [0, 0] }, 0)).not.toBeNull();
    });

    it("rejects non-positive speed", () => {
        expect(validateWaypoint({ xy: [0, 0], depth: 1, speed: 0 }, 0)).not.toBeNull();
    });

    it("rejects xy together with lat/lon", () => {
        expect(validateWaypoint({ xy: [0, 0], lat: 41, lon: -71, depth: 1 }, 0)).not.toBeNull();
    });

    it("accepts lat/lon + altitude", () => {
        expect(validateWaypoint({ lat: 41, lon: -71, altitude: 0.5 }, 0)).toBeNull();
    });
});

describe("validateMission", () => {
    it("flags the empty mission", () => {
        expect(validateMission([])).toHaveLength(1);
    });

    it("reports the offending row index", () => {
        const issues = validateMission([wp(0, 0), { xy: [1, 1] }]);
        expect(issues).toHaveLength(1);
        expect(issues[0].index).toBe(1);
    });
});

describe("moveWaypoint", () => {
    it("changes only the targeted waypoint", () => {
        const before = [wp(0, 0), wp(10, 0), wp(20, 5)];
        const after = moveWaypoint(before, 1, 12.5, -3);
        expect(diffMissions(before, after)).toEqual([1]);
        expect(after[1].xy).toEqual([12.5, -3]);
        expect(after[0]).toEqual(before[0]);
        expect(after[2]).toEqual(before[2]);
    });

    it("does not mutate the input", () => {
        const before = [wp(0, 0)];
        moveWaypoint(before, 0, 9, 9);
        expect(before[0].xy).toEqual([0, 0]);
    });

    it("converts a geodetic waypoint to local xy when dragged", () => {
        const before: WaypointBody[] = [{ lat: 41.0, lon: -71.0, depth: 3 }];
        const after = moveWaypoint(before, 0, 5, 6);
        expect(after[0]).toEqual({ xy: [5, 6], depth: 3 });
    });
});

describe("parseKml", () => {
    const kml = `<?xml version="1.0"?>
<kml xmlns="http://www.opengis.net/kml/2.2"><Document><Placemark><LineString>
<coordinates>
  -71.0,41.0,2.0
  -70.999,41.0,3.0
  -70.998,41.001,4.0
  -70.997,41.002,4.5
  -70.996,41.003,5.0
</coordinates>
</LineString></Placemark></Document></kml>`;

    it("imports a five-point LineString into five rows", () => {
        const rows = parseKml(kml);
        expect(rows).toHaveLength(5);
        expect(rows[0]).toEqual({ lat: 41.0, lon: -71.0, depth: 2.0 });
        expect(rows[4].depth).toBe(5.0);
    });

    it("defaults missing depth to 0", () => {
        const rows = parseKml(
            "<kml><LineString><coordinates>-71,41</coordinates></LineString></kml>",
        );
        expect(rows[0].depth).toBe(0);
    });

    it("rejects documents without a LineString", () => {
        expect(() => parseKml("<kml></kml>")).toThrow(/LineString/);
    });
});

// Mission synchronization between the console draft and the runner. Edits go
// through PUT /mission/waypoints with the full list; rejected PUTs revert the
// draft to the last confirmed server state and surface the server's reason.

import { ApiError, ConsoleApi, WaypointBody } from "./api.js";
import { moveWaypoint, validateMission } from "./mission.js";

export class MissionSync {
    confirmed: WaypointBody[] = [];
    draft: WaypointBody[] = [];
    dirty = false;
    error: string | null = null;

    constructor(private api: ConsoleApi) {}

    async refresh(): Promise<void> {
        const { waypoints } = await this.api.getWaypoints();
        this.confirmed = waypoints;
        this.draft = waypoints.map((wp) => ({ ...wp }));
        this.dirty = false;
    }

    edit(mutate: (draft: WaypointBody[]) => WaypointBody[]) {
        this.draft = mutate(this.draft);
        this.dirty = true;
    }

    /** Drag-end on the map: move one waypoint and push the whole list.
     *  Returns the body sent (null when local validation already failed). */
    async dragWaypoint(index: number, x: number, y: number): Promise<WaypointBody[] | null> {
        const body = moveWaypoint(this.confirmed, index, x, y);
        return (await this.push(body)) ? body : null;
    }

    async save(): Promise<boolean> {
        return this.push(this.draft);
    }

    private async push(body: WaypointBody[]): Promise<boolean> {
        this.error = null;
        const issues = validateMission(body);
        if (issues.length > 0) {
            this.error = issues.map((i) => `waypoint ${i.index}: ${i.message}`).join("; ");
            return false;
        }
        try {
            await this.api.putWaypoints(body);
        } catch (err) {
            this.error = err instanceof ApiError ? (err.detail ?? err.reason) : String(err);
            this.draft = this.confirmed.map((wp) => ({ ...wp }));
            this.dirty = false;
            return false;
        }
        this.confirmed = body;
        this.draft = body.map((wp) => ({ ...wp }));
        this.dirty = false;
        return true;
    }
}

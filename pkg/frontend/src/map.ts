// Interactive map: plain SVG over a local-tangent-frame grid. Shows the
// vehicle marker, the last-20-position breadcrumb, and draggable waypoint
// markers; drag-end hands the move to the mission sync layer.

import type { WaypointBody } from "./api.js";
import type { ConsoleStore } from "./store.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
    onWaypointDragEnd(index: number, x: number, y: number): void;
}

interface Viewport {
    cx: number;
    cy: number;
    scale: number; // px per meter
}

export class MapView {
    private svg: SVGSVGElement;
    private viewport: Viewport = { cx: 0, cy: 0, scale: 8 };
    private dragging: { index: number } | null = null;
    private dragPos: { x: number; y: number } | null = null;
    waypoints: WaypointBody[] = [];

    constructor(
        host: HTMLElement,
        private store: ConsoleStore,
        private callbacks: MapCallbacks,
    ) {
        this.svg = document.createElementNS(SVG_NS, "svg");
        this.svg.setAttribute("class", "map-svg");
        host.appendChild(this.svg);
        this.svg.addEventListener("pointermove", (e) => this.onPointerMove(e));
        this.svg.addEventListener("pointerup", (e) => this.onPointerUp(e));
        window.addEventListener("resize", () => this.render());
    }

    setWaypoints(waypoints: WaypointBody[]) {
        this.waypoints = waypoints;
        this.render();
    }

    private toScreen(x: number, y: number): [number, number] {
        const w = this.svg.clientWidth || 600;
        const h = this.svg.clientHeight || 400;
        return [
            w / 2 + (x - this.viewport.cx) * this.viewport.scale,
            h / 2 - (y - this.viewport.cy) * this.viewport.scale,
        ];
    }

    private toWorld(px: number, py: number): [number, number] {
        const w = this.svg.clientWidth || 600;
        const h = this.svg.clientHeight || 400;
        return [
            this.viewport.cx + (px - w / 2) / this.viewport.scale,
            this.viewport.cy - (py - h / 2) / this.viewport.scale,
        ];
    }

    fit() {
        const xs: number[] = [];
        const ys: number[] = [];
        for (const wp of this.waypoints) {
            if (wp.xy) {
                xs.push(wp.xy[0]);
                ys.push(wp.xy[1]);
            }
        }
        for (const p of this.store.breadcrumbPoints()) {
            xs.push(p.x);
            ys.push(p.y);
        }
        if (xs.length === 0) return;
        const minX = Math.min(...xs), maxX = Math.max(...xs);
        const minY = Math.min(...ys), maxY = Math.max(...ys);
        this.viewport.cx = (minX + maxX) / 2;
        this.viewport.cy = (minY + maxY) / 2;
        const w = this.svg.clientWidth || 600;
        const h = this.svg.clientHeight || 400;
        const spanX = Math.max(maxX - minX, 10);
        const spanY = Math.max(maxY - minY, 10);
        this.viewport.scale = Math.min(w / (spanX * 1.3), h / (spanY * 1.3));
    }

    render() {
        while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
        this.renderGrid();
        this.renderMissionPath();
        this.renderBreadcrumb();
        this.renderVehicle();
        this.renderWaypoints();
    }

    private line(x1: number, y1: number, x2: number, y2: number, cls: string) {
        const el = document.createElementNS(SVG_NS, "line");
        el.setAttribute("x1", String(x1));
        el.setAttribute("y1", String(y1));
        el.setAttribute("x2", String(x2));
        el.setAttribute("y2", String(y2));
        el.setAttribute("class", cls);
        this.svg.appendChild(el);
    }

    private renderGrid() {
        const w = this.svg.clientWidth || 600;
        const h = this.svg.clientHeight || 400;
        const stepMeters = 10;
        const stepPx = stepMeters * this.viewport.scale;
        if (stepPx < 8) return;
        const [x0] = this.toScreen(Math.floor(this.toWorld(0, 0)[0] / stepMeters) * stepMeters, 0);
        for (let x = x0 % stepPx; x < w; x += stepPx) this.line(x, 0, x, h, "grid");
        const [, y0] = this.toScreen(0, Math.floor(this.toWorld(0, h)[1] / stepMeters) * stepMeters);
        for (let y = y0 % stepPx; y < h; y += stepPx) this.line(0, y, w, y, "grid");
    }

    private renderMissionPath() {
        let prev: [number, number] | null = null;
        this.waypoints.forEach((wp, i) => {
            if (!wp.xy) return;
            const pos = this.dragging?.index === i && this.dragPos
                ? this.toScreen(this.dragPos.x, this.dragPos.y)
                : this.toScreen(wp.xy[0], wp.xy[1]);
            if (prev) this.line(prev[0], prev[1], pos[0], pos[1], "mission-path");
            prev = pos;
        });
    }

    private renderBreadcrumb() {
        const points = this.store.breadcrumbPoints();
        const poly = document.createElementNS(SVG_NS, "polyline");
        poly.setAttribute(
            "points",
            points.map((p) => this.toScreen(p.x, p.y).join(",")).join(" "),
        );
        poly.setAttribute("class", "breadcrumb");
        this.svg.appendChild(poly);
    }

    private renderVehicle() {
        const rec = this.store.latest;
        if (!rec) return;
        const [px, py] = this.toScreen(rec.truth.pose.position[0], rec.truth.pose.position[1]);
        const yaw = rec.truth.pose.euler[2];
        const marker = document.createElementNS(SVG_NS, "path");
        marker.setAttribute("d", "M 10 0 L -6 5 L -3 0 L -6 -5 Z");
        marker.setAttribute(
            "transform",
            `translate(${px} ${py}) rotate(${(-yaw * 180) / Math.PI})`,
        );
        marker.setAttribute("class", "vehicle");
        this.svg.appendChild(marker);
    }

    private renderWaypoints() {
        this.waypoints.forEach((wp, i) => {
            if (!wp.xy) return;
            const world = this.dragging?.index === i && this.dragPos
                ? [this.dragPos.x, this.dragPos.y]
                : wp.xy;
            const [px, py] = this.toScreen(world[0], world[1]);
            const c = document.createElementNS(SVG_NS, "circle");
            c.setAttribute("cx", String(px));
            c.setAttribute("cy", String(py));
            c.setAttribute("r", "7");
            c.setAttribute("class", "waypoint");
            c.addEventListener("pointerdown", (e) => {
                e.preventDefault();
                this.dragging = { index: i };
                this.dragPos = { x: world[0], y: world[1] };
                this.svg.setPointerCapture(e.pointerId);
            });
            this.svg.appendChild(c);
            const label = document.createElementNS(SVG_NS, "text");
            label.setAttribute("x", String(px + 9));
            label.setAttribute("y", String(py - 9));
            label.setAttribute("class", "waypoint-label");
            label.textContent = String(i + 1);
            this.svg.appendChild(label);
        });
    }

    private onPointerMove(e: PointerEvent) {
        if (!this.dragging) return;
        const rect = this.svg.getBoundingClientRect();
        const [x, y] = this.toWorld(e.clientX - rect.left, e.clientY - rect.top);
        this.dragPos = { x, y };
        this.render();
    }

    private onPointerUp(e: PointerEvent) {
        if (!this.dragging || !this.dragPos) return;
        const { index } = this.dragging;
        const { x, y } = this.dragPos;
        this.dragging = null;
        this.dragPos = null;
        this.callbacks.onWaypointDragEnd(index, x, y);
        void e;
    }
}

// Console entry point: wires the store, map, tabs, mission editor, teleop
// panel and raw-telemetry viewer to a running vehicle API.

import { ConsoleApi } from "./api.js";
import { ConsoleStore } from "./store.js";
import { MapView } from "./map.js";
import { FsmTabs, ControllerToggle } from "./fsm.js";
import { MissionSync } from "./sync.js";
import { TeleopPanel } from "./teleop.js";
import { parseKml } from "./mission.js";
import { statusLines, thrusterLines } from "./status.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? `http://${window.location.hostname}:8171`;

const api = new ConsoleApi(base);
const store = new ConsoleStore();
const mission = new MissionSync(api);
const tabs = new FsmTabs(api, store);
const controller = new ControllerToggle(api);
const teleop = new TeleopPanel(api);

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element ${id}`);
    return node as T;
}

const map = new MapView(el("map"), store, {
    onWaypointDragEnd: (index, x, y) => {
        void mission.dragWaypoint(index, Number(x.toFixed(2)), Number(y.toFixed(2))).then(() => {
            map.setWaypoints(mission.draft);
            renderMissionTable();
            renderBanners();
        });
    },
});

// -- status -------------------------------------------------------------------

function renderStatus() {
    const host = el("status-lines");
    host.innerHTML = "";
    if (!store.latest) {
        host.textContent = "waiting for telemetry";
        return;
    }
    for (const line of [...statusLines(store.latest), ...thrusterLines(store.latest)]) {
        const row = document.createElement("div");
        row.className = line.alert ? "status-row alert" : "status-row";
        row.innerHTML = `<span class="label">${line.label}</span><span>${line.value}</span>`;
        host.appendChild(row);
    }
}

function renderBanners() {
    el("stale-banner").style.display = store.isStale(Date.now()) ? "block" : "none";
    el("offline-banner").style.display = store.connected ? "none" : "block";
    const err = el("error-banner");
    const message = mission.error ?? tabs.rejection?.reason ?? null;
    err.textContent = message ?? "";
    err.style.display = message ? "block" : "none";
}

// -- state tabs -----------------------------------------------------------------

function renderTabs() {
    const host = el("state-tabs");
    host.innerHTML = "";
    for (const state of tabs.states) {
        const b = document.createElement("button");
        b.textContent = state;
        b.className = state === tabs.active ? "tab active" : "tab";
        if (tabs.rejection?.target === state) {
            b.classList.add("rejected");
            b.title = tabs.rejection.reason;
        }
        b.onclick = () => {
            void tabs.clickTab(state).then(() => {
                renderTabs();
                renderBanners();
            });
        };
        host.appendChild(b);
    }
    const toggle = el<HTMLButtonElement>("controller-toggle");
    toggle.textContent = controller.enabled ? "disable controller" : "enable controller";
    toggle.onclick = () => {
        void controller.toggle().then(renderTabs);
    };
}

// -- mission editor ---------------------------------------------------------------

function renderMissionTable() {
    const body = el("mission-rows");
    body.innerHTML = "";
    mission.draft.forEach((wp, i) => {
        const row = document.createElement("tr");
        const pos = wp.xy
            ? `${wp.xy[0].toFixed(1)}, ${wp.xy[1].toFixed(1)}`
            : `${wp.lat?.toFixed(6)}, ${wp.lon?.toFixed(6)}`;
        row.innerHTML =
            `<td>${i + 1}</td><td>${pos}</td>` +
            `<td>${wp.depth ?? ""}</td><td>${wp.altitude ?? ""}</td><td>${wp.speed ?? ""}</td>`;
        const cell = document.createElement("td");
        const del = document.createElement("button");
        del.textContent = "remove";
        del.onclick = () => {
            mission.edit((draft) => draft.filter((_, j) => j !== i));
            renderMissionTable();
        };
        cell.appendChild(del);
        row.appendChild(cell);
        body.appendChild(row);
    });
    el("mission-dirty").style.display = mission.dirty ? "inline" : "none";
}

el<HTMLButtonElement>("mission-add").onclick = () => {
    mission.edit((draft) => [...draft, { xy: [0, 0], depth: 1.0 }]);
    renderMissionTable();
};
el<HTMLButtonElement>("mission-save").onclick = () => {
    void mission.save().then(() => {
        map.setWaypoints(mission.draft);
        renderMissionTable();
        renderBanners();
    });
};
el<HTMLInputElement>("kml-file").onchange = async (e) => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
        const rows = parseKml(await file.text());
        mission.edit(() => rows);
    } catch (err) {
        mission.error = String(err);
    }
    renderMissionTable();
    renderBanners();
};

// -- teleop -----------------------------------------------------------------------

for (const dof of ["surge", "depth", "heading", "pitch"]) {
    const slider = el<HTMLInputElement>(`teleop-${dof}`);
    slider.oninput = () => {
        teleop.set(dof, Number(slider.value));
        el(`teleop-${dof}-value`).textContent = slider.value;
    };
}
el<HTMLInputElement>("teleop-engage").onchange = (e) => {
    const on = (e.target as HTMLInputElement).checked;
    if (on) teleop.engage();
    else teleop.disengage();
};

// -- raw telemetry viewer ------------------------------------------------------------

const rawLines: string[] = [];
function renderRaw() {
    const filter = el<HTMLInputElement>("raw-filter").value.toLowerCase();
    const shown = filter ? rawLines.filter((l) => l.toLowerCase().includes(filter)) : rawLines;
    el("raw-view").textContent = shown.slice(-30).join("\n");
}
el<HTMLInputElement>("raw-filter").oninput = renderRaw;

// -- boot -------------------------------------------------------------------------

async function boot() {
    try {
        const [status, track] = await Promise.all([api.status(), api.track()]);
        store.seed(status, track.positions, Date.now());
        await mission.refresh();
        map.setWaypoints(mission.draft);
        map.fit();
    } catch {
        // offline banner stays up; the stream loop below retries
    }
    renderTabs();
    renderMissionTable();

    for (;;) {
        try {
            await api.streamTelemetry((record) => {
                store.onRecord(record, Date.now());
                rawLines.push(JSON.stringify(record));
                if (rawLines.length > 500) rawLines.splice(0, rawLines.length - 500);
            });
        } catch {
            store.onDisconnect();
        }
        await new Promise((resolve) => setTimeout(resolve, 1000));
    }
}

store.subscribe(() => {
    renderStatus();
    map.render();
    renderTabs();
});
setInterval(renderBanners, 500);
setInterval(renderRaw, 1000);
void boot();

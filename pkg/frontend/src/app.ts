// Browser entry point: wires the live session, steering panel, topology
// view and charts together. All state shown here came over the wire.

import { LiveSession } from "./connection.js";
import {
  drawBarChart,
  drawLineChart,
  exportPng,
  sessionBars,
} from "./charts.js";
import {
  httpPoster,
  PANEL_CONTROLS,
  PanelControl,
  Steering,
} from "./steering.js";
import {
  groupInstancesByNode,
  REQUEST_COLORS,
  ViewModel,
} from "./viewmodel.js";
import type { BattlegroundReport, MetricsPayload } from "./types.js";

const base = "";
const steering = new Steering(httpPoster(base));
const session = new LiveSession(base, () => scheduleRender());

let renderQueued = false;
let latestMetrics: MetricsPayload | null = null;
let latestReport: BattlegroundReport | null = null;

function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    render();
  });
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// -- topology -----------------------------------------------------------------

function renderTopology(vm: ViewModel, container: HTMLElement, arena?: string): void {
  container.replaceChildren();

  const flow = el("div", "flow");
  const gateway = el("div", "stage gateway");
  gateway.append(el("div", "stage-title", "API Gateway"));
  gateway.append(
    el("div", "stage-note", `${vm.counters?.created ?? 0} requests admitted`),
  );
  flow.append(gateway);

  const dispatcher = el("div", "stage dispatcher");
  dispatcher.append(el("div", "stage-title", "Request Dispatcher"));
  const queueRow = el("div", "queue-row");
  if (vm.queue.length === 0) {
    queueRow.append(el("span", "queue-empty", "queue empty"));
  }
  for (const requestId of vm.queue) {
    const chip = el("span", "chip chip-orange", `r${requestId}`);
    chip.title = `request ${requestId} waiting (FIFO order)`;
    queueRow.append(chip);
  }
  dispatcher.append(queueRow);
  dispatcher.append(
    el(
      "div",
      "stage-note",
      `routing: ${String(vm.config?.routing_strategy ?? "-")} · placement: ${String(
        vm.config?.placement_strategy ?? "-",
      )}`,
    ),
  );
  flow.append(dispatcher);

  const nodesWrap = el("div", "nodes");
  const grouped = groupInstancesByNode(vm);
  if (grouped.length === 0) {
    nodesWrap.append(el("div", "stage-note", "no compute nodes provisioned"));
  }
  for (const { node, instances } of grouped) {
    const card = el("div", `node-card state-${node.state}`);
    const head = el("div", "node-head");
    head.append(el("span", `dot dot-${node.color}`));
    head.append(el("span", "node-name", `${node.id} · ${node.state}`));
    const failButton = el("button", "danger tiny", "Fail Node") as HTMLButtonElement;
    failButton.disabled = node.state !== "active";
    failButton.addEventListener("click", () => {
      void steering.failNode(node.id, arena).catch(showCommandError);
    });
    head.append(failButton);
    card.append(head);

    card.append(
      meter("cpu", node.cpuUsed, node.cpuCapacity),
      meter("mem", node.memUsedMb, node.memCapacityMb),
    );

    const tiles = el("div", "tiles");
    for (const inst of instances) {
      const tile = el("div", `tile tile-${inst.color}`);
      tile.append(el("div", "tile-name", inst.id));
      tile.append(el("div", "tile-state", inst.state.replace("_", " ")));
      tile.append(
        el("div", "tile-load", `${inst.inFlight}/${inst.concurrencyLimit ?? "?"} in flight`),
      );
      tiles.append(tile);
    }
    card.append(tiles);
    nodesWrap.append(card);
  }
  flow.append(nodesWrap);
  container.append(flow);
}

function meter(label: string, used: number, capacity: number): HTMLElement {
  const wrap = el("div", "meter");
  wrap.append(el("span", "meter-label", label));
  const bar = el("div", "meter-bar");
  const fill = el("div", "meter-fill");
  const fraction = capacity > 0 ? Math.min(1, used / capacity) : 0;
  fill.style.width = `${(fraction * 100).toFixed(1)}%`;
  if (fraction > 0.85) fill.classList.add("hot");
  bar.append(fill);
  wrap.append(bar);
  wrap.append(el("span", "meter-value", `${round2(used)}/${round2(capacity)}`));
  return wrap;
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

// -- tables ------------------------------------------------------------------------

function renderTables(vm: ViewModel, container: HTMLElement): void {
  container.replaceChildren();
  const counters = vm.counters;
  if (!counters) return;
  const facts: Array<[string, string]> = [
    ["simulated time", `${(vm.time / 1000).toFixed(2)} s`],
    ["created", String(counters.created)],
    ["succeeded", String(counters.succeeded)],
    [
      "failed (ttl / timeout / node)",
      `${counters.failed.ttl} / ${counters.failed.exec_timeout} / ${counters.failed.node_down}`,
    ],
    ["in system", String(counters.in_system)],
    ["avg end-to-end", formatMs(counters.avg_end_to_end_ms)],
    ["avg queue wait", formatMs(counters.avg_queue_wait_ms)],
    ["cumulative cost", counters.cumulative_cost],
  ];
  const table = el("table", "facts");
  for (const [name, value] of facts) {
    const row = el("tr");
    row.append(el("td", "k", name), el("td", "v", value));
    table.append(row);
  }
  container.append(table);

  const recent = el("div", "recent");
  recent.append(el("div", "panel-title", "request activity"));
  const list = el("div", "recent-list");
  const rows = Object.values(vm.requests).slice(-12).reverse();
  for (const r of rows) {
    const color = REQUEST_COLORS[r.status] ?? "gray";
    const row = el("div", "recent-row");
    row.append(el("span", `dot dot-${color}`));
    row.append(
      el(
        "span",
        "recent-text",
        `r${r.id} · ${r.status.replaceAll("_", " ")}${r.instance ? ` @ ${r.instance}` : ""}`,
      ),
    );
    list.append(row);
  }
  recent.append(list);
  container.append(recent);
}

function formatMs(v: number | null): string {
  return v === null ? "no data" : `${v.toFixed(1)} ms`;
}

// -- charts --------------------------------------------------------------------------

function canvasById(id: string): HTMLCanvasElement {
  return document.getElementById(id) as HTMLCanvasElement;
}

function renderCharts(): void {
  if (session.battleground && latestReport) {
    renderBattlegroundCharts(latestReport);
    return;
  }
  if (!latestMetrics) return;
  const m = latestMetrics;
  drawBarChart(canvasById("chart-session"), "session averages", sessionBars(m.session));
  drawLineChart(canvasById("chart-outcomes"), "requests", m.series.t, [
    { label: "succeeded", color: "#2e9e4f", values: m.series.succeeded },
    { label: "failed", color: "#d64d4d", values: m.series.failed },
    { label: "queue", color: "#e8a13c", values: m.series.queue_length },
  ]);
  drawLineChart(canvasById("chart-utilisation"), "utilisation & fleet", m.series.t, [
    { label: "cpu", color: "#4d7fd6", values: m.series.cpu_utilisation },
    { label: "mem", color: "#8a5fd0", values: m.series.mem_utilisation },
    { label: "instances", color: "#2e9e4f", values: m.series.live_instances },
  ]);
  drawLineChart(canvasById("chart-cost"), "cost & latency", m.series.t, [
    { label: "cost (MB·s)", color: "#b5823a", values: m.series.cumulative_cost },
    {
      label: "avg latency (ms)",
      color: "#2e9e4f",
      values: m.series.avg_end_to_end_ms,
    },
  ]);
}

function renderBattlegroundCharts(report: BattlegroundReport): void {
  const series = report.series;
  const t = series.t;
  const paired = (name: string) =>
    series[name] as unknown as { a: number[]; b: number[] };
  drawLineChart(canvasById("chart-session"), "queue length A vs B", t, [
    { label: "A", color: "#4d7fd6", values: paired("queue_length").a },
    { label: "B", color: "#d64d4d", values: paired("queue_length").b },
  ]);
  drawLineChart(canvasById("chart-outcomes"), "succeeded A vs B", t, [
    { label: "A", color: "#4d7fd6", values: paired("succeeded").a },
    { label: "B", color: "#d64d4d", values: paired("succeeded").b },
  ]);
  drawLineChart(canvasById("chart-utilisation"), "active functions A vs B", t, [
    { label: "A", color: "#4d7fd6", values: paired("live_instances").a },
    { label: "B", color: "#d64d4d", values: paired("live_instances").b },
  ]);
  drawLineChart(canvasById("chart-cost"), "cumulative cost A vs B", t, [
    { label: "A", color: "#4d7fd6", values: paired("cumulative_cost").a },
    { label: "B", color: "#d64d4d", values: paired("cumulative_cost").b },
  ]);
}

// -- steering panel -----------------------------------------------------------------------

function controlArena(): string | undefined {
  if (!session.battleground) return undefined;
  const select = document.getElementById("arena-select") as HTMLSelectElement;
  return select.value;
}

function showCommandError(error: unknown): void {
  const banner = document.getElementById("command-error")!;
  banner.textContent = error instanceof Error ? error.message : String(error);
  banner.classList.add("visible");
  setTimeout(() => banner.classList.remove("visible"), 4000);
}

function buildControl(control: PanelControl): HTMLElement {
  const wrap = el("label", "control");
  wrap.append(el("span", "control-label", control.label));
  const input = document.createElement(
    control.input === "select" ? "select" : "input",
  );
  input.id = `control-${control.id}`;
  if (input instanceof HTMLSelectElement) {
    for (const option of control.options ?? []) {
      const opt = document.createElement("option");
      opt.value = option;
      opt.textContent = option;
      input.append(opt);
    }
  } else {
    input.type = control.input === "checkbox" ? "checkbox" : control.input;
    if (control.min !== undefined) input.min = String(control.min);
    if (control.max !== undefined) input.max = String(control.max);
    if (control.step !== undefined) input.step = String(control.step);
  }
  input.addEventListener("change", () => {
    const raw =
      input instanceof HTMLInputElement && input.type === "checkbox"
        ? input.checked
        : input.value;
    void steering
      .setParameter(control.id, raw, controlArena())
      .catch((error) => {
        wrap.classList.add("invalid");
        setTimeout(() => wrap.classList.remove("invalid"), 3000);
        showCommandError(error);
      });
  });
  wrap.append(input);
  return wrap;
}

function hydrateControls(vm: ViewModel): void {
  if (!vm.config) return;
  for (const control of PANEL_CONTROLS) {
    const input = document.getElementById(`control-${control.id}`) as
      | HTMLInputElement
      | HTMLSelectElement
      | null;
    if (!input || document.activeElement === input) continue;
    const parts = control.field.split(".");
    let value: unknown = vm.config;
    for (const part of parts) value = (value as Record<string, unknown>)?.[part];
    if (value === undefined) continue;
    if (input instanceof HTMLInputElement && input.type === "checkbox") {
      input.checked = Boolean(value);
    } else {
      input.value = String(value);
    }
  }
}

function wireButtons(): void {
  const by = (id: string) => document.getElementById(id)!;
  by("btn-start").addEventListener("click", () =>
    steering.start().catch(showCommandError),
  );
  by("btn-pause").addEventListener("click", () =>
    steering.pause().catch(showCommandError),
  );
  by("btn-reset").addEventListener("click", () =>
    steering.resetSimulation().catch(showCommandError),
  );
  by("btn-reset-session").addEventListener("click", () =>
    steering.resetSession(controlArena()).catch(showCommandError),
  );
  by("btn-inject").addEventListener("click", () => {
    const n = Number((by("inject-count") as HTMLInputElement).value || "1");
    steering.injectRequests(n, "f", controlArena()).catch(showCommandError);
  });
  by("btn-battleground").addEventListener("click", () => {
    steering
      .createBattleground("strategy-duel", 7)
      .then(() => steering.start())
      .catch(showCommandError);
  });
  by("btn-export-csv").addEventListener("click", () => {
    window.open(
      session.battleground ? "/battleground/export.csv" : "/export.csv",
      "_blank",
    );
  });
  for (const canvasId of [
    "chart-session",
    "chart-outcomes",
    "chart-utilisation",
    "chart-cost",
  ]) {
    const button = document.querySelector(
      `button[data-export="${canvasId}"]`,
    ) as HTMLButtonElement | null;
    button?.addEventListener("click", () =>
      exportPng(canvasById(canvasId), `${canvasId}.png`),
    );
  }
}

// -- polling & render loop -----------------------------------------------------------------

async function pollMetrics(): Promise<void> {
  try {
    const url = session.battleground ? "/battleground/metrics" : "/metrics";
    const response = await fetch(url);
    if (!response.ok) return;
    if (session.battleground) {
      latestReport = (await response.json()) as BattlegroundReport;
    } else {
      latestMetrics = (await response.json()) as MetricsPayload;
    }
    renderCharts();
  } catch {
    // connection banner already reflects stream health
  }
}

function render(): void {
  const badge = document.getElementById("conn-badge")!;
  badge.textContent = session.status;
  badge.className = `badge badge-${session.status}`;

  const paneA = document.getElementById("arena-a")!;
  const paneB = document.getElementById("arena-b")!;
  renderTopology(session.arenas.A, paneA.querySelector(".topology")!, "A");
  renderTables(session.arenas.A, paneA.querySelector(".tables")!);
  if (session.battleground) {
    document.body.classList.add("battleground");
    renderTopology(session.arenas.B, paneB.querySelector(".topology")!, "B");
    renderTables(session.arenas.B, paneB.querySelector(".tables")!);
  } else {
    document.body.classList.remove("battleground");
  }
  hydrateControls(session.arenas.A);
  const clock = document.getElementById("sim-clock")!;
  clock.textContent = `t = ${(session.arenas.A.time / 1000).toFixed(2)} s`;
}

function buildPanel(): void {
  const panel = document.getElementById("controls")!;
  for (const control of PANEL_CONTROLS) panel.append(buildControl(control));
}

buildPanel();
wireButtons();
session.start();
void session.rehydrate().catch(() => undefined);
setInterval(() => void pollMetrics(), 1000);

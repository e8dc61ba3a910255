// The thin-client view model: a pure reduction of (snapshot, deltas).
// Replaying the same message sequence always rebuilds the identical model.

import type {
  Counters,
  SessionStats,
  StateSnapshot,
  StreamMessage,
} from "./types.js";

// the platform's state colours; labels always accompany these in the DOM
export const INSTANCE_COLORS: Record<string, string> = {
  cold_starting: "orange",
  busy: "blue",
  warm: "green",
  terminated: "gray",
  failed: "red",
};

export const NODE_COLORS: Record<string, string> = {
  provisioning: "orange",
  active: "green",
  failed: "red",
  deprovisioned: "gray",
};

export const REQUEST_COLORS: Record<string, string> = {
  in_queue: "orange",
  cold_start_wait: "orange",
  dispatched: "blue",
  executing: "blue",
  succeeded: "green",
  failed_ttl: "red",
  failed_exec_timeout: "red",
  failed_node_down: "red",
};

export function instanceColor(state: string): string {
  const color = INSTANCE_COLORS[state];
  if (color === undefined) throw new Error(`no colour for instance state ${state}`);
  return color;
}

export function nodeColor(state: string): string {
  const color = NODE_COLORS[state];
  if (color === undefined) throw new Error(`no colour for node state ${state}`);
  return color;
}

export interface RequestView {
  id: number;
  status: string;
  instance: string | null;
}

export interface InstanceView {
  id: string;
  state: string;
  color: string;
  inFlight: number;
  node: string;
  functionType?: string;
  concurrencyLimit?: number;
}

export interface NodeView {
  id: string;
  state: string;
  color: string;
  cpuUsed: number;
  cpuCapacity: number;
  memUsedMb: number;
  memCapacityMb: number;
}

export interface ViewModel {
  hydrated: boolean;
  time: number;
  lastEventId: number;
  queue: number[];
  requests: Record<number, RequestView>;
  instances: Record<string, InstanceView>;
  nodes: Record<string, NodeView>;
  counters: Counters | null;
  session: SessionStats | null;
  gauges: Record<string, number> | null;
  config: Record<string, unknown> | null;
}

export function emptyViewModel(): ViewModel {
  return {
    hydrated: false,
    time: 0,
    lastEventId: 0,
    queue: [],
    requests: {},
    instances: {},
    nodes: {},
    counters: null,
    session: null,
    gauges: null,
    config: null,
  };
}

export function hydrate(vm: ViewModel, state: StateSnapshot): void {
  vm.hydrated = true;
  vm.time = state.time_ms;
  vm.queue = state.queue.map((row) => row.request_id);
  vm.instances = {};
  for (const row of state.instances) {
    vm.instances[row.id] = {
      id: row.id,
      state: row.state,
      color: instanceColor(row.state),
      inFlight: row.in_flight,
      node: row.node,
      functionType: row.function_type,
      concurrencyLimit: row.concurrency_limit,
    };
  }
  vm.nodes = {};
  for (const row of state.nodes) {
    vm.nodes[row.id] = {
      id: row.id,
      state: row.state,
      color: nodeColor(row.state),
      cpuUsed: row.cpu_used,
      cpuCapacity: row.cpu_capacity,
      memUsedMb: row.mem_used_mb,
      memCapacityMb: row.mem_capacity_mb,
    };
  }
  vm.counters = state.counters;
  vm.session = state.session;
  vm.gauges = state.gauges;
  vm.config = state.config;
}

export function applyMessage(vm: ViewModel, message: StreamMessage): void {
  vm.time = message.time;
  if (message.type === "snapshot" && message.state) {
    hydrate(vm, message.state);
    return;
  }
  if (message.type === "event" && message.event) {
    vm.lastEventId = message.event.id;
    return;
  }
  if (message.type !== "delta" || !message.changes) return;
  const changes = message.changes;
  for (const r of changes.requests ?? []) {
    vm.requests[r.id] = { id: r.id, status: r.status, instance: r.instance };
  }
  for (const i of changes.instances ?? []) {
    const existing = vm.instances[i.id];
    vm.instances[i.id] = {
      ...(existing ?? {}),
      id: i.id,
      state: i.state,
      color: instanceColor(i.state),
      inFlight: i.in_flight,
      node: i.node,
    };
  }
  for (const n of changes.nodes ?? []) {
    vm.nodes[n.id] = {
      id: n.id,
      state: n.state,
      color: nodeColor(n.state),
      cpuUsed: n.cpu_used,
      cpuCapacity: n.cpu_capacity,
      memUsedMb: n.mem_used_mb,
      memCapacityMb: n.mem_capacity_mb,
    };
  }
  if (changes.queue !== undefined) {
    vm.queue = changes.queue.slice();
  }
}

export function replay(
  messages: StreamMessage[],
  arena: "A" | "B" = "A",
): ViewModel {
  const vm = emptyViewModel();
  for (const message of messages) {
    if (message.arena === arena) applyMessage(vm, message);
  }
  return vm;
}

// Topology projection: the fields a freshly hydrated client must agree on
// with a client that watched the whole stream (terminal-request history is
// deliberately excluded; snapshots only carry a tail of it).
export interface TopologyProjection {
  time: number;
  queue: number[];
  instances: Array<[string, string, number, string]>;
  nodes: Array<[string, string, number, number]>;
  counters: Counters | null;
}

export function topologyProjection(vm: ViewModel): TopologyProjection {
  const instances = Object.values(vm.instances)
    .map(
      (i) => [i.id, i.state, i.inFlight, i.node] as [string, string, number, string],
    )
    .sort((a, b) => a[0].localeCompare(b[0], undefined, { numeric: true }));
  const nodes = Object.values(vm.nodes)
    .map(
      (n) => [n.id, n.state, n.cpuUsed, n.memUsedMb] as [string, string, number, number],
    )
    .sort((a, b) => a[0].localeCompare(b[0], undefined, { numeric: true }));
  return {
    time: vm.time,
    queue: vm.queue.slice(),
    instances,
    nodes,
    counters: vm.counters,
  };
}

export function groupInstancesByNode(
  vm: ViewModel,
): Array<{ node: NodeView; instances: InstanceView[] }> {
  const byNode = new Map<string, InstanceView[]>();
  for (const inst of Object.values(vm.instances)) {
    const list = byNode.get(inst.node) ?? [];
    list.push(inst);
    byNode.set(inst.node, list);
  }
  return Object.values(vm.nodes)
    .sort((a, b) => a.id.localeCompare(b.id, undefined, { numeric: true }))
    .map((node) => ({
      node,
      instances: (byNode.get(node.id) ?? []).sort((a, b) =>
        a.id.localeCompare(b.id, undefined, { numeric: true }),
      ),
    }));
}

// The steering panel contract: every control maps to exactly one
// UpdateConfig field, and every user action round-trips through
// POST /command. The UI never mutates its own state optimistically.

export interface CommandPoster {
  post(command: Record<string, unknown>): Promise<Record<string, unknown>>;
}

export interface PanelControl {
  id: string;
  label: string;
  input: "range" | "number" | "select" | "checkbox";
  field: string; // dot path into the UpdateConfig changes object
  parse: "int" | "float" | "bool" | "string";
  min?: number;
  max?: number;
  step?: number;
  options?: string[];
}

export const PANEL_CONTROLS: PanelControl[] = [
  {
    id: "auto-rate",
    label: "Auto-request rate (req/s)",
    input: "range",
    field: "workload.rate",
    parse: "float",
    min: 0.5,
    max: 50,
    step: 0.5,
  },
  {
    id: "arrival-jitter",
    label: "Arrival jitter (fraction)",
    input: "range",
    field: "workload.jitter",
    parse: "float",
    min: 0,
    max: 1,
    step: 0.05,
  },
  {
    id: "cold-start-delay",
    label: "Cold start delay (ms)",
    input: "number",
    field: "cold_start_delay_ms",
    parse: "int",
    min: 0,
  },
  {
    id: "routing-strategy",
    label: "Routing strategy",
    input: "select",
    field: "routing_strategy",
    parse: "string",
    options: ["warm_priority", "round_robin", "least_connections"],
  },
  {
    id: "placement-strategy",
    label: "Placement strategy",
    input: "select",
    field: "placement_strategy",
    parse: "string",
    options: [
      "first_fit",
      "best_fit",
      "worst_fit",
      "load_balanced",
      "affinity",
      "anti_affinity",
      "cost_optimised",
    ],
  },
  {
    id: "concurrency-limit",
    label: "Max concurrent requests per instance",
    input: "number",
    field: "concurrency_limit",
    parse: "int",
    min: 1,
  },
  {
    id: "max-instances",
    label: "Max instances per function",
    input: "number",
    field: "max_instances",
    parse: "int",
    min: 1,
  },
  {
    id: "max-nodes",
    label: "Max compute nodes",
    input: "number",
    field: "max_nodes",
    parse: "int",
    min: 1,
  },
  {
    id: "request-ttl",
    label: "Request TTL (ms)",
    input: "number",
    field: "request_ttl_ms",
    parse: "int",
    min: 1,
  },
  {
    id: "exec-timeout",
    label: "Max execution timeout (ms)",
    input: "number",
    field: "max_execution_timeout_ms",
    parse: "int",
    min: 1,
  },
  {
    id: "inactivity-timeout",
    label: "Inactivity timeout (ms)",
    input: "number",
    field: "inactivity_timeout_ms",
    parse: "int",
    min: 0,
  },
  {
    id: "timeout-kills-instance",
    label: "Timeout kills instance",
    input: "checkbox",
    field: "timeout_kills_instance",
    parse: "bool",
  },
  {
    id: "scale-up-on-busy",
    label: "Scale up while busy",
    input: "checkbox",
    field: "scale_up_on_busy",
    parse: "bool",
  },
  {
    id: "pace",
    label: "Pace (sim-ms per wall second, 0 = max)",
    input: "number",
    field: "pace",
    parse: "float",
    min: 0,
  },
];

export function parseControlValue(
  control: PanelControl,
  raw: string | number | boolean,
): number | boolean | string {
  switch (control.parse) {
    case "int":
      return Math.round(Number(raw));
    case "float":
      return Number(raw);
    case "bool":
      return raw === true || raw === "true" || raw === "on";
    default:
      return String(raw);
  }
}

export function changesFor(
  control: PanelControl,
  value: number | boolean | string,
): Record<string, unknown> {
  // dot path -> nested object with exactly one leaf
  const changes: Record<string, unknown> = {};
  const parts = control.field.split(".");
  let cursor = changes;
  for (const part of parts.slice(0, -1)) {
    const next: Record<string, unknown> = {};
    cursor[part] = next;
    cursor = next;
  }
  cursor[parts[parts.length - 1]] = value;
  return changes;
}

export function updateCommand(
  control: PanelControl,
  raw: string | number | boolean,
  arena?: string,
): Record<string, unknown> {
  const command: Record<string, unknown> = {
    kind: "update_config",
    changes: changesFor(control, parseControlValue(control, raw)),
  };
  if (arena) command.arena = arena;
  return command;
}

export class Steering {
  constructor(private readonly poster: CommandPoster) {}

  setParameter(controlId: string, raw: string | number | boolean, arena?: string) {
    const control = PANEL_CONTROLS.find((c) => c.id === controlId);
    if (!control) throw new Error(`unknown control ${controlId}`);
    return this.poster.post(updateCommand(control, raw, arena));
  }

  start() {
    return this.poster.post({ kind: "start" });
  }

  pause() {
    return this.poster.post({ kind: "pause" });
  }

  resetSimulation() {
    return this.poster.post({ kind: "reset" });
  }

  resetSession(arena?: string) {
    return this.poster.post(withArena({ kind: "reset_session" }, arena));
  }

  injectRequests(n: number, functionType: string, arena?: string) {
    return this.poster.post(
      withArena({ kind: "inject_requests", n, function_type: functionType }, arena),
    );
  }

  failNode(node: string, arena?: string) {
    return this.poster.post(withArena({ kind: "fail_node", node }, arena));
  }

  createBattleground(scenario: string, seed: number) {
    return this.poster.post({ kind: "create_battleground", scenario, seed });
  }

  stepLockstep(dtMs: number) {
    return this.poster.post({ kind: "step_lockstep", dt_ms: dtMs });
  }

  advance(untilMs: number) {
    return this.poster.post({ kind: "advance", until_ms: untilMs });
  }
}

function withArena(
  command: Record<string, unknown>,
  arena?: string,
): Record<string, unknown> {
  if (arena) command.arena = arena;
  return command;
}

export function httpPoster(base: string): CommandPoster {
  return {
    async post(command) {
      const response = await fetch(`${base}/command`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(command),
      });
      const body = (await response.json()) as Record<string, unknown>;
      if (!response.ok) {
        const detail = body.detail as { message?: string } | undefined;
        throw new Error(detail?.message ?? `command failed (${response.status})`);
      }
      return body;
    },
  };
}

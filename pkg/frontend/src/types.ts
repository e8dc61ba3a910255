// Protocol types for the control-service wire format. The UI derives all
// state from these messages; it never simulates anything itself.

export type ArenaLabel = "A" | "B";

export interface EventRecord {
  id: number;
  time: number;
  kind: string;
  subject?: number | string;
  payload?: Record<string, unknown>;
}

export interface RequestDelta {
  id: number;
  status: string;
  instance: string | null;
}

export interface InstanceDelta {
  id: string;
  state: string;
  in_flight: number;
  node: string;
}

export interface NodeDelta {
  id: string;
  state: string;
  cpu_used: number;
  cpu_capacity: number;
  mem_used_mb: number;
  mem_capacity_mb: number;
}

export interface DeltaChanges {
  requests?: RequestDelta[];
  instances?: InstanceDelta[];
  nodes?: NodeDelta[];
  queue?: number[];
}

export interface QueueRow {
  request_id: number;
  enqueued_ms: number;
  ttl_deadline_ms: number;
}

export interface SnapshotInstanceRow {
  id: string;
  function_type: string;
  state: string;
  in_flight: number;
  concurrency_limit: number;
  node: string;
}

export interface SnapshotNodeRow {
  id: string;
  state: string;
  cpu_used: number;
  cpu_capacity: number;
  mem_used_mb: number;
  mem_capacity_mb: number;
  instances: string[];
}

export interface Counters {
  created: number;
  succeeded: number;
  failed: Record<string, number>;
  total_failed: number;
  in_system: number;
  avg_end_to_end_ms: number | null;
  avg_queue_wait_ms: number | null;
  avg_execution_ms: number | null;
  avg_cpu_utilisation: number | null;
  avg_mem_utilisation: number | null;
  cumulative_cost: string;
}

export interface SessionStats {
  avg_queue_wait_ms: number | null;
  avg_execution_ms: number | null;
  samples: { queue_wait: number; execution: number };
}

export interface StateSnapshot {
  time_ms: number;
  queue_length: number;
  queue: QueueRow[];
  instances: SnapshotInstanceRow[];
  nodes: SnapshotNodeRow[];
  recent_requests: Array<{
    request_id: number;
    status: string;
    end_ms: number;
    end_to_end_ms: number;
  }>;
  counters: Counters;
  session: SessionStats;
  gauges: Record<string, number>;
  config: Record<string, unknown>;
  running?: boolean;
}

export interface StreamMessage {
  seq: number;
  arena: ArenaLabel;
  time: number;
  type: "event" | "delta" | "snapshot";
  event?: EventRecord;
  changes?: DeltaChanges;
  state?: StateSnapshot;
}

export interface MetricsSeries {
  t: number[];
  queue_length: number[];
  executing: number[];
  live_instances: number[];
  active_nodes: number[];
  cpu_utilisation: number[];
  mem_utilisation: number[];
  succeeded: number[];
  failed: number[];
  avg_end_to_end_ms: Array<number | null>;
  cumulative_cost: number[];
}

export interface MetricsPayload {
  time_ms: number;
  cumulative: Counters;
  session: SessionStats;
  series: MetricsSeries;
}

export interface PairedSeries {
  t: number[];
  [name: string]: number[] | { a: number[]; b: number[] };
}

export interface BattlegroundReport {
  time_ms: number;
  a: Record<string, unknown>;
  b: Record<string, unknown>;
  series: PairedSeries;
}

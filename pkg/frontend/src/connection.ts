// Live session against the control service: SSE stream with snapshot
// hydration, gap detection and automatic reconnection.

import { applyMessage, emptyViewModel, hydrate, ViewModel } from "./viewmodel.js";
import type { StateSnapshot, StreamMessage } from "./types.js";

export type ConnectionStatus = "connecting" | "live" | "disconnected";

export interface Transport {
  close(): void;
}

export type TransportFactory = (
  url: string,
  onMessage: (data: string) => void,
  onError: () => void,
) => Transport;

const eventSourceTransport: TransportFactory = (url, onMessage, onError) => {
  const source = new EventSource(url);
  source.addEventListener("message", (e) => onMessage((e as MessageEvent).data));
  source.onerror = () => onError();
  return { close: () => source.close() };
};

export function seqGap(lastSeq: number, incoming: number): boolean {
  return lastSeq > 0 && incoming > lastSeq + 1;
}

export interface LiveSessionOptions {
  transport?: TransportFactory;
  fetchJson?: (url: string) => Promise<unknown>;
  retryMs?: number;
  schedule?: (fn: () => void, ms: number) => void;
}

export class LiveSession {
  status: ConnectionStatus = "connecting";
  battleground = false;
  readonly arenas: Record<"A" | "B", ViewModel> = {
    A: emptyViewModel(),
    B: emptyViewModel(),
  };
  private lastSeq = 0;
  private transport: Transport | null = null;
  private stopped = false;
  private readonly makeTransport: TransportFactory;
  private readonly fetchJson: (url: string) => Promise<unknown>;
  private readonly retryMs: number;
  private readonly schedule: (fn: () => void, ms: number) => void;

  constructor(
    private readonly base: string,
    private readonly onUpdate: () => void,
    options: LiveSessionOptions = {},
  ) {
    this.makeTransport = options.transport ?? eventSourceTransport;
    this.fetchJson =
      options.fetchJson ??
      (async (url) => {
        const response = await fetch(url);
        if (!response.ok) throw new Error(`${url} -> ${response.status}`);
        return response.json();
      });
    this.retryMs = options.retryMs ?? 1500;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  start(): void {
    this.open();
  }

  stop(): void {
    this.stopped = true;
    this.transport?.close();
  }

  handleRaw(data: string): void {
    const message = JSON.parse(data) as StreamMessage;
    if (seqGap(this.lastSeq, message.seq)) {
      // missed messages: the view cannot be patched, so rebuild it
      this.lastSeq = message.seq;
      void this.rehydrate();
      return;
    }
    this.lastSeq = Math.max(this.lastSeq, message.seq);
    const arena = message.arena === "B" ? "B" : "A";
    if (message.arena === "B") this.battleground = true;
    applyMessage(this.arenas[arena], message);
    this.status = "live";
    this.onUpdate();
  }

  async rehydrate(): Promise<void> {
    const state = (await this.fetchJson(`${this.base}/state`)) as Record<
      string,
      unknown
    >;
    if (state.battleground) {
      this.battleground = true;
      hydrate(this.arenas.A, state.a as StateSnapshot);
      hydrate(this.arenas.B, state.b as StateSnapshot);
    } else {
      this.battleground = false;
      hydrate(this.arenas.A, state as unknown as StateSnapshot);
    }
    this.onUpdate();
  }

  private open(): void {
    if (this.stopped) return;
    this.status = this.lastSeq ? this.status : "connecting";
    this.transport = this.makeTransport(
      `${this.base}/events?after=${this.lastSeq}`,
      (data) => this.handleRaw(data),
      () => this.handleDrop(),
    );
  }

  private handleDrop(): void {
    this.status = "disconnected";
    this.onUpdate();
    this.transport?.close();
    if (this.stopped) return;
    this.schedule(() => {
      // re-hydrate on reconnect: the stream may have moved on without us
      void this.rehydrate().catch(() => undefined);
      this.open();
    }, this.retryMs);
  }
}

// Fail Node round trip: replaying the recorded stream of an interactive
// node failure yields the same post-state the headless drill asserts —
// the cascade, the rerouting, and the final counters.

import { describe, expect, it } from "vitest";

import nodeFailure from "../fixtures/node_failure_stream.json";
import type { StateSnapshot, StreamMessage } from "../src/types.js";
import {
  emptyViewModel,
  hydrate,
  replay,
  topologyProjection,
} from "../src/viewmodel.js";

const messages = nodeFailure.messages as unknown as StreamMessage[];
const finalState = nodeFailure.final_state as unknown as StateSnapshot;

describe("fail-node stream replay", () => {
  const vm = replay(messages);

  it("marks the node and its instances failed", () => {
    expect(vm.nodes.N1.state).toBe("failed");
    expect(vm.nodes.N1.color).toBe("red");
    const onN1 = Object.values(vm.instances).filter((i) => i.node === "N1");
    expect(onN1.length).toBe(2);
    for (const inst of onN1) {
      expect(inst.state).toBe("failed");
      expect(inst.color).toBe("red");
      expect(inst.inFlight).toBe(0);
    }
  });

  it("fails exactly the in-flight requests, at the failure time", () => {
    const downed = Object.values(vm.requests).filter(
      (r) => r.status === "failed_node_down",
    );
    expect(downed.map((r) => r.id).sort()).toEqual([1, 2, 3]);
  });

  it("shows the recovery on a fresh node", () => {
    expect(vm.nodes.N2.state).toBe("active");
    const recovered = vm.requests[4];
    expect(recovered.status).toBe("succeeded");
    expect(recovered.instance).toBe("I3");
    expect(vm.instances.I3.node).toBe("N2");
  });

  it("contains the distinct node-failure event entry", () => {
    const failureEvents = messages.filter(
      (m) => m.type === "event" && m.event?.kind === "node_failed",
    );
    expect(failureEvents.length).toBe(1);
    expect(failureEvents[0].time).toBe(5000);
  });

  it("matches the service's own final state (criterion-6 post-state)", () => {
    const fromSnapshot = emptyViewModel();
    hydrate(fromSnapshot, finalState);
    expect(topologyProjection(vm)).toEqual(topologyProjection(fromSnapshot));
    expect(vm.counters).toEqual(finalState.counters);
    expect(vm.counters?.failed.node_down).toBe(3);
    expect(vm.counters?.succeeded).toBe(1);
  });
});

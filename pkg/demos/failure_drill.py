#!/usr/bin/env python3
"""Failing a node under load, and watching the platform recover.

Three long requests execute on node N1 when it is killed at t=5000. Their
in-flight work is lost; a later request finds a fresh node provisioned and
succeeds. The event log below is the exact, reproducible sequence.

    python3 demos/failure_drill.py
"""

from faaslab import Simulation, load_scenario


def main():
    config, _ = load_scenario("node-failure-drill")
    sim = Simulation(config)
    sim.run_until(20_000)

    print("event log:")
    for event in sim.kernel.log:
        subject = f" {event.subject}" if event.subject is not None else ""
        extra = ""
        if event.kind.value == "node_failed":
            extra = (
                f"  -> kills {event.payload['failed_instances']},"
                f" fails requests {event.payload['failed_requests']}"
            )
        print(f"  t={event.time:>6} ms  {event.kind.value:<20}{subject}{extra}")

    print("\nrequest outcomes:")
    for request in sim.requests.values():
        print(f"  r{request.id}: {request.status.value:<18} end={request.end_time} ms")

    stats = sim.metrics.headline()
    assert stats["failed"]["node_down"] == 3
    assert stats["succeeded"] == 1
    print(f"\naccounting closes: {stats['created']} created = "
          f"{stats['succeeded']} succeeded + {stats['total_failed']} failed")


if __name__ == "__main__":
    main()

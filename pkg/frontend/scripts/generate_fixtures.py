#!/usr/bin/env python3
"""Regenerate the recorded protocol fixtures the UI tests replay.

Runs the simulator's control service in-process (no HTTP, no threads) and
captures the exact stream messages plus the final /state payload. Commit
the output: the TS tests are hermetic and replay these files.

    python3 scripts/generate_fixtures.py
"""

import json
from pathlib import Path

from faaslab.service import SimulationService
from faaslab.workload import load_scenario

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def capture(config, steps):
    service = SimulationService(config, start_loop=False)
    for command in steps:
        service.submit(command)
    return {
        "messages": service.messages,
        "final_state": service.state_payload(),
    }


def node_failure_fixture():
    # same drill as the headless failure criterion, but the failure arrives
    # through the interactive Fail Node command instead of a scripted event
    config, _ = load_scenario("node-failure-drill")
    config = config.update({"fail_node_at": []})
    return capture(
        config,
        [
            {"kind": "advance", "until_ms": 5000},
            {"kind": "fail_node", "node": "N1"},
            {"kind": "advance", "until_ms": 20_000},
        ],
    )


def cold_burst_fixture():
    config, _ = load_scenario("cold-start-burst")
    return capture(config, [{"kind": "advance", "until_ms": 8000}])


def main():
    FIXTURES.mkdir(exist_ok=True)
    for name, fixture in (
        ("node_failure_stream.json", node_failure_fixture()),
        ("cold_burst_stream.json", cold_burst_fixture()),
    ):
        path = FIXTURES / name
        path.write_text(json.dumps(fixture, indent=1, sort_keys=True) + "\n")
        print(f"wrote {path} ({len(fixture['messages'])} messages)")


if __name__ == "__main__":
    main()

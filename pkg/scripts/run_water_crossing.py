#!/usr/bin/env python3
"""Run the water-crossing experiment profile and summarize the tracking.

Writes log.csv / events.csv / metrics.json under out/experiment/ and prints
the per-hold steady-state errors and the attitude envelope.
"""

import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mhauv_sim.cli import main as cli_main  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "..", "configs", "experiment.yaml")
OUT = os.path.join(HERE, "..", "out", "experiment")


def main() -> int:
    rc = cli_main(["simulate", "--config", CONFIG, "--out", OUT])
    if rc != 0:
        return rc
    import json

    with open(os.path.join(OUT, "metrics.json")) as fh:
        metrics = json.load(fh)
    segs = sorted(k for k in metrics if k.startswith("steady_state_z_error_seg"))
    print("hold-segment steady-state |z error| (m):",
          ", ".join(f"{metrics[k]:.4f}" for k in segs))
    print(f"attitude envelope: "
          f"{math.degrees(metrics['attitude_envelope']):.2f} deg")
    print(f"switches: {metrics['switch_count']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

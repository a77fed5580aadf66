"""Input file schemas: the documented CSV contracts of the simulator.

This package couples to nothing but these column sets, so any producer that
writes the same files can feed it.
"""

from __future__ import annotations

import pandas as pd

LOG_COLUMNS = (
    "t", "x", "y", "z", "u", "v", "w", "phi", "theta", "psi", "p", "q", "r",
    "z_ref", "phi_ref", "theta_ref", "psi_ref", "zone", "strategy",
    "t_z", "tau_x", "tau_y", "tau_z", "omega1", "omega2", "omega3", "omega4",
    "sigma_z", "sigma_phi", "sigma_theta", "sigma_psi", "sat_flags",
)

TRACKING_REQUIRED = ("t", "z", "z_ref", "phi", "theta", "zone", "strategy")
COMPARISON_REQUIRED = TRACKING_REQUIRED + ("t_z", "sigma_z", "sigma_phi",
                                           "sigma_theta", "sigma_psi")
ERROR_HIST_REQUIRED = ("t", "z", "z_ref", "phi", "theta")
CT_REQUIRED = ("h_mm", "c_t")
EVENTS_REQUIRED = ("t", "from", "to", "z", "z_dot")


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def load_csv(path: str, required: tuple[str, ...]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise SchemaError(f"input file not found: {path}") from exc
    except Exception as exc:
        raise SchemaError(f"cannot parse {path}: {exc}") from exc
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path} is missing required column(s): {', '.join(missing)}"
        )
    return frame

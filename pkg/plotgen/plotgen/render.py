"""The four figure kinds rendered from simulator output files.

All functions are read-only over their inputs and deterministic, so reruns
over the same files produce the same image.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .schemas import (
    COMPARISON_REQUIRED,
    CT_REQUIRED,
    ERROR_HIST_REQUIRED,
    EVENTS_REQUIRED,
    SchemaError,
    TRACKING_REQUIRED,
    load_csv,
)

HEIGHT_ERROR_LIMIT = 0.1          # m
ATTITUDE_LIMIT_DEG = 5.0


def _shade_hybrid_band(ax, band_height: float) -> None:
    half = band_height / 2
    ax.axhspan(-half, half, color="tab:cyan", alpha=0.15,
               label="hybrid zone", zorder=0)
    ax.axhline(0.0, color="tab:blue", linewidth=0.6, alpha=0.5)


def render_ct_curve(inputs: list[str], out_path: str) -> None:
    """Thrust-coefficient curve on a log scale, plateaus annotated."""
    frame = load_csv(inputs[0], CT_REQUIRED)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(frame["h_mm"], frame["c_t"], color="tab:blue")
    c_lo, c_hi = frame["c_t"].iloc[0], frame["c_t"].iloc[-1]
    ax.axhline(c_lo, color="gray", linestyle=":", linewidth=0.8)
    ax.axhline(c_hi, color="gray", linestyle=":", linewidth=0.8)
    ax.annotate(f"air plateau {c_lo:.2e}", (frame["h_mm"].iloc[0], c_lo),
                textcoords="offset points", xytext=(5, 6), fontsize=8)
    ax.annotate(f"water plateau {c_hi:.2e}", (frame["h_mm"].iloc[-1], c_hi),
                textcoords="offset points", xytext=(-110, -12), fontsize=8)
    ax.set_xlabel("rotor immersion h (mm)")
    ax.set_ylabel("thrust coefficient")
    ax.set_title("Thrust coefficient vs immersion")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_tracking(inputs: list[str], out_path: str,
                    band_height: float = 0.1) -> None:
    """Altitude tracking with zone shading, plus the attitude trace.

    Accepts the run log and, optionally, the switch-events CSV as a second
    input; events are drawn as vertical markers.
    """
    log = load_csv(inputs[0], TRACKING_REQUIRED)
    events = load_csv(inputs[1], EVENTS_REQUIRED) if len(inputs) > 1 else None

    fig, (ax_z, ax_att) = plt.subplots(
        2, 1, figsize=(7, 6), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]},
    )
    _shade_hybrid_band(ax_z, band_height)
    ax_z.plot(log["t"], log["z_ref"], "k--", linewidth=1.0, label="reference")
    ax_z.plot(log["t"], log["z"], color="tab:red", linewidth=1.0, label="vehicle")
    if events is not None:
        for _, row in events.iterrows():
            ax_z.axvline(row["t"], color="tab:green", alpha=0.5, linewidth=0.8)
            ax_z.annotate(f"{row['from']}→{row['to']}", (row["t"], 0.0),
                          rotation=90, fontsize=6, alpha=0.7,
                          textcoords="offset points", xytext=(2, 10))
    ax_z.set_ylabel("altitude z (m)")
    ax_z.legend(loc="upper right", fontsize=8)
    ax_z.grid(alpha=0.3)

    ax_att.plot(log["t"], log["phi"].map(math.degrees), label="roll",
                linewidth=0.8)
    ax_att.plot(log["t"], log["theta"].map(math.degrees), label="pitch",
                linewidth=0.8)
    ax_att.set_xlabel("time (s)")
    ax_att.set_ylabel("attitude (deg)")
    ax_att.legend(loc="upper right", fontsize=8)
    ax_att.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _run_label(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem[:-4] if stem.endswith("_log") else stem


def render_comparison(inputs: list[str], out_path: str,
                      band_height: float = 0.1) -> None:
    """Overlay altitude tracking of several runs plus their thrust commands."""
    if len(inputs) < 2:
        raise SchemaError("comparison figure needs at least two run logs")
    logs = [(path, load_csv(path, COMPARISON_REQUIRED)) for path in inputs]

    fig, (ax_z, ax_t) = plt.subplots(
        2, 1, figsize=(7, 6), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]},
    )
    _shade_hybrid_band(ax_z, band_height)
    first = logs[0][1]
    ax_z.plot(first["t"], first["z_ref"], "k--", linewidth=1.0, label="reference")
    for path, frame in logs:
        label = _run_label(path)
        ax_z.plot(frame["t"], frame["z"], linewidth=0.9, label=label)
        ax_t.plot(frame["t"], frame["t_z"], linewidth=0.7, label=label)
    ax_z.set_ylabel("altitude z (m)")
    ax_z.legend(loc="upper right", fontsize=7)
    ax_z.grid(alpha=0.3)
    ax_t.set_xlabel("time (s)")
    ax_t.set_ylabel("thrust command (N)")
    ax_t.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_error_hist(inputs: list[str], out_path: str) -> None:
    """Height-error and attitude distributions with the tracking thresholds."""
    log = load_csv(inputs[0], ERROR_HIST_REQUIRED)
    z_err = log["z_ref"] - log["z"]
    attitude_deg = (
        log["phi"].map(math.degrees).tolist()
        + log["theta"].map(math.degrees).tolist()
    )

    fig, (ax_h, ax_a) = plt.subplots(1, 2, figsize=(9, 4))
    ax_h.hist(z_err, bins=60, color="tab:blue", alpha=0.8)
    for limit in (-HEIGHT_ERROR_LIMIT, HEIGHT_ERROR_LIMIT):
        ax_h.axvline(limit, color="tab:red", linestyle="--", linewidth=1.0)
    ax_h.annotate(f"±{HEIGHT_ERROR_LIMIT} m", (HEIGHT_ERROR_LIMIT, 1),
                  textcoords="offset points", xytext=(4, 4),
                  color="tab:red", fontsize=8)
    ax_h.set_xlabel("height error (m)")
    ax_h.set_ylabel("samples")
    ax_h.set_title("Height error distribution")

    ax_a.hist(attitude_deg, bins=60, color="tab:orange", alpha=0.8)
    for limit in (-ATTITUDE_LIMIT_DEG, ATTITUDE_LIMIT_DEG):
        ax_a.axvline(limit, color="tab:red", linestyle="--", linewidth=1.0)
    ax_a.annotate(f"±{ATTITUDE_LIMIT_DEG}°", (ATTITUDE_LIMIT_DEG, 1),
                  textcoords="offset points", xytext=(4, 4),
                  color="tab:red", fontsize=8)
    ax_a.set_xlabel("roll and pitch (deg)")
    ax_a.set_ylabel("samples")
    ax_a.set_title("Attitude distribution")

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


RENDERERS = {
    "ct-curve": render_ct_curve,
    "tracking": render_tracking,
    "comparison": render_comparison,
    "error-hist": render_error_hist,
}


def render(kind: str, inputs: list[str], out_path: str, **options) -> None:
    """Dispatch one figure kind; unknown kinds and schema problems raise."""
    if kind not in RENDERERS:
        raise SchemaError(
            f"unknown figure kind {kind!r}; expected one of {sorted(RENDERERS)}"
        )
    if not inputs:
        raise SchemaError("at least one input file is required")
    renderer = RENDERERS[kind]
    if kind in ("tracking", "comparison"):
        renderer(inputs, out_path, band_height=options.get("band_height", 0.1))
    else:
        renderer(inputs, out_path)

"""Vertical reference trajectories with analytic derivatives.

Horizontal references are fixed at x = y = 0 and the attitude references at
level flight; only the vertical profile varies between scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .controllers import Reference

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StepRef:
    z_from: float
    z_to: float
    t_step: float

    def validate(self) -> None:
        if not all(map(math.isfinite, (self.z_from, self.z_to, self.t_step))):
            raise ValueError("step reference values must be finite")

    def evaluate(self, t: float) -> tuple[float, float, float]:
        z = self.z_from if t < self.t_step else self.z_to
        return z, 0.0, 0.0

    def hold_segments(self, duration: float) -> list[tuple[float, float]]:
        if self.t_step <= 0:
            return [(0.0, duration)]
        if self.t_step >= duration:
            return [(0.0, duration)]
        return [(0.0, self.t_step), (self.t_step, duration)]


@dataclass(frozen=True)
class SineRef:
    amplitude: float
    period: float
    offset: float = 0.0

    def validate(self) -> None:
        if not (math.isfinite(self.amplitude) and math.isfinite(self.offset)):
            raise ValueError("sine reference values must be finite")
        if self.period <= 0:
            raise ValueError("period must be positive")

    def evaluate(self, t: float) -> tuple[float, float, float]:
        w = TWO_PI / self.period
        return (
            self.offset + self.amplitude * math.sin(w * t),
            self.amplitude * w * math.cos(w * t),
            -self.amplitude * w * w * math.sin(w * t),
        )

    def hold_segments(self, duration: float) -> list[tuple[float, float]]:
        return []


@dataclass(frozen=True)
class CosineRef:
    amplitude: float
    period: float
    offset: float = 0.0

    def validate(self) -> None:
        if not (math.isfinite(self.amplitude) and math.isfinite(self.offset)):
            raise ValueError("cosine reference values must be finite")
        if self.period <= 0:
            raise ValueError("period must be positive")

    def evaluate(self, t: float) -> tuple[float, float, float]:
        w = TWO_PI / self.period
        return (
            self.offset + self.amplitude * math.cos(w * t),
            -self.amplitude * w * math.sin(w * t),
            -self.amplitude * w * w * math.cos(w * t),
        )

    def hold_segments(self, duration: float) -> list[tuple[float, float]]:
        return []


@dataclass(frozen=True)
class ProfileRef:
    """Piecewise-linear altitude profile through (t, z) knots."""

    knots: tuple[tuple[float, float], ...]

    def validate(self) -> None:
        if len(self.knots) < 2:
            raise ValueError("profile needs at least two knots")
        for (t0, z0), (t1, z1) in zip(self.knots, self.knots[1:]):
            if not t1 > t0:
                raise ValueError("profile knots must be strictly increasing in t")
            if not (math.isfinite(z0) and math.isfinite(z1)):
                raise ValueError("profile altitudes must be finite")

    def evaluate(self, t: float) -> tuple[float, float, float]:
        knots = self.knots
        if t <= knots[0][0]:
            return knots[0][1], 0.0, 0.0
        if t >= knots[-1][0]:
            return knots[-1][1], 0.0, 0.0
        for (t0, z0), (t1, z1) in zip(knots, knots[1:]):
            if t0 <= t < t1:
                slope = (z1 - z0) / (t1 - t0)
                return z0 + slope * (t - t0), slope, 0.0
        return knots[-1][1], 0.0, 0.0

    def hold_segments(self, duration: float) -> list[tuple[float, float]]:
        segments: list[tuple[float, float]] = []
        if self.knots[0][0] > 0:
            segments.append((0.0, self.knots[0][0]))
        for (t0, z0), (t1, z1) in zip(self.knots, self.knots[1:]):
            if z0 == z1:
                segments.append((t0, min(t1, duration)))
        if duration > self.knots[-1][0]:
            segments.append((self.knots[-1][0], duration))
        # Merge touching segments (flat knot followed by trailing hold).
        merged: list[tuple[float, float]] = []
        for seg in segments:
            if merged and merged[-1][1] == seg[0]:
                merged[-1] = (merged[-1][0], seg[1])
            else:
                merged.append(seg)
        return [tuple(s) for s in merged]


ReferenceSpec = Union[StepRef, SineRef, CosineRef, ProfileRef]


def reference_at(spec: ReferenceSpec, t: float) -> Reference:
    """Full controller reference at time t (level attitude, origin x/y)."""
    z, dz, ddz = spec.evaluate(t)
    return Reference(z=z, z_dot=dz, z_ddot=ddz)


def hold_segments(spec: ReferenceSpec, duration: float) -> list[tuple[float, float]]:
    """Time spans where the reference holds a constant altitude."""
    return [
        (t0, t1) for t0, t1 in spec.hold_segments(duration) if t1 > t0
    ]

"""Static 2D concentration landscapes and the sensor noise model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit


class DomainError(ValueError):
    """Position outside the arena."""


@dataclass(frozen=True)
class Bump:
    center: tuple[float, float]  # mm
    amplitude: float  # mM, signed
    width: float  # mm

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError("bump width must be > 0")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class ScalarField:
    """Baseline plus a sum of Gaussian hills (positive) and valleys (negative)."""

    bumps: tuple[Bump, ...]
    baseline: float = 40.0
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 100.0, 100.0)  # xmin, ymin, xmax, ymax
    start: tuple[float, float] = (50.0, 50.0)
    concentration_range: float = 60.0  # reference span for percentage reporting

    def __post_init__(self) -> None:
        object.__setattr__(self, "bumps", tuple(self.bumps))
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ValueError("bounds must describe a non-empty rectangle")
        if not self.contains(self.start):
            raise ValueError("start position lies outside the arena")
        if not self.concentration_range > 0:
            raise ValueError("concentration_range must be > 0")

    def contains(self, position: Sequence[float]) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= position[0] <= xmax and ymin <= position[1] <= ymax

    def as_array(self) -> np.ndarray:
        """(n, 4) rows of cx, cy, amplitude, width for the jitted evaluator."""
        if not self.bumps:
            return np.zeros((0, 4))
        return np.array([[b.center[0], b.center[1], b.amplitude, b.width] for b in self.bumps])

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "bounds": list(self.bounds),
            "start": list(self.start),
            "concentration_range": self.concentration_range,
            "bumps": [
                {"center": list(b.center), "amplitude": b.amplitude, "width": b.width} for b in self.bumps
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScalarField":
        bumps = tuple(Bump(tuple(b["center"]), float(b["amplitude"]), float(b["width"])) for b in data["bumps"])
        kwargs = {"bumps": bumps}
        for key in ("baseline", "concentration_range"):
            if key in data:
                kwargs[key] = float(data[key])
        for key in ("bounds", "start"):
            if key in data:
                kwargs[key] = tuple(float(x) for x in data[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"  # "none" | "salt_pepper"
    corruption_probability: float = 0.1
    max_magnitude: float = 12.0  # mM

    def __post_init__(self) -> None:
        if self.kind not in ("none", "salt_pepper"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.corruption_probability <= 1.0:
            raise ValueError("corruption_probability must lie in [0, 1]")
        if not self.max_magnitude >= 0:
            raise ValueError("max_magnitude must be >= 0")

    @property
    def active(self) -> bool:
        return self.kind == "salt_pepper"

    @classmethod
    def salt_pepper(cls, probability: float = 0.1, magnitude: float = 12.0) -> "NoiseModel":
        return cls("salt_pepper", probability, magnitude)


def default_arena() -> ScalarField:
    """10 cm plate: one hill peaking near 70 mM, one valley near 10 mM, 40 mM elsewhere."""
    return ScalarField(
        bumps=(
            Bump((65.0, 62.0), 30.0, 15.0),
            Bump((28.0, 30.0), -30.0, 13.0),
        ),
        baseline=40.0,
        start=(15.0, 85.0),
    )


def obstacle_arena() -> ScalarField:
    """Obstacles are hills rising above 65 units; the goal is a valley dropping below 20."""
    return ScalarField(
        bumps=(
            Bump((35.0, 45.0), 32.0, 7.0),
            Bump((60.0, 30.0), 32.0, 7.0),
            Bump((45.0, 75.0), 32.0, 7.0),
            Bump((70.0, 62.0), 32.0, 6.0),
            Bump((82.0, 82.0), -30.0, 12.0),
        ),
        baseline=40.0,
        start=(12.0, 12.0),
    )


# --- jitted evaluation ------------------------------------------------------


@njit(cache=True)
def field_value(bumps, baseline, x, y):
    c = baseline
    for k in range(bumps.shape[0]):
        dx = x - bumps[k, 0]
        dy = y - bumps[k, 1]
        w = bumps[k, 3]
        c += bumps[k, 2] * math.exp(-(dx * dx + dy * dy) / (2.0 * w * w))
    return c


@njit(cache=True)
def field_gradient(bumps, x, y):
    gx = 0.0
    gy = 0.0
    for k in range(bumps.shape[0]):
        dx = x - bumps[k, 0]
        dy = y - bumps[k, 1]
        w2 = bumps[k, 3] * bumps[k, 3]
        g = bumps[k, 2] * math.exp(-(dx * dx + dy * dy) / (2.0 * w2)) / w2
        gx -= g * dx
        gy -= g * dy
    return gx, gy


@njit(cache=True)
def corrupt(clean, probability, magnitude, u_hit, u_mag, u_sign):
    """Salt-and-pepper corruption from three uniforms, clamped at zero."""
    value = clean
    if u_hit < probability:
        delta = u_mag * magnitude
        if u_sign < 0.5:
            delta = -delta
        value = clean + delta
    if value < 0.0:
        value = 0.0
    return value


# --- public API --------------------------------------------------------------


def concentration_at(field: ScalarField, position: Sequence[float]) -> float:
    if not field.contains(position):
        raise DomainError(f"position {tuple(position)} outside arena bounds {field.bounds}")
    return float(field_value(field.as_array(), field.baseline, float(position[0]), float(position[1])))


def gradient_at(field: ScalarField, position: Sequence[float]) -> tuple[float, float]:
    gx, gy = field_gradient(field.as_array(), float(position[0]), float(position[1]))
    return float(gx), float(gy)


def sense(field: ScalarField, noise: NoiseModel, position: Sequence[float], rng: np.random.Generator) -> float:
    """One sensor reading.

    With salt-and-pepper noise, exactly three uniforms are drawn per reading so
    the random stream advances identically whether or not a reading is hit.
    """
    clean = concentration_at(field, position)
    if not noise.active:
        return clean
    u_hit, u_mag, u_sign = rng.random(3)
    return float(corrupt(clean, noise.corruption_probability, noise.max_magnitude, u_hit, u_mag, u_sign))


def sample_grid(field: ScalarField, n: int = 200) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xmin, ymin, xmax, ymax = field.bounds
    xs = np.linspace(xmin, xmax, n)
    ys = np.linspace(ymin, ymax, n)
    bumps = field.as_array()
    values = np.array([[field_value(bumps, field.baseline, x, y) for x in xs] for y in ys])
    return xs, ys, values


def write_grid_csv(field: ScalarField, path: str | Path, n: int = 200) -> None:
    xs, ys, values = sample_grid(field, n)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x_mm", "y_mm", "C_mM"])
            for j, y in enumerate(ys):
                for i, x in enumerate(xs):
                    writer.writerow([f"{x:.6g}", f"{y:.6g}", f"{values[j, i]:.6g}"])
    except OSError as exc:
        raise OSError(f"cannot write arena grid to {path}: {exc}") from exc

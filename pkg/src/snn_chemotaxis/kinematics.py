"""Heading and position updates for the simulated worm."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np
from numba import njit


class Turn(IntEnum):
    NONE = 0
    CW_FIXED = 1
    CCW_FIXED = 2
    RANDOM_UNIFORM = 3
    HALT = 4


class Speed(IntEnum):
    EXPLORE = 0
    TRACK = 1
    ZERO = 2


@dataclass(frozen=True)
class MotionCommand:
    """Decoded decision for one behavioral step.

    ``quanta`` counts fixed-angle turns (one per decision spike).
    """

    turn: Turn = Turn.NONE
    speed: Speed = Speed.EXPLORE
    quanta: int = 1


class AgentHaltedError(RuntimeError):
    pass


@dataclass(frozen=True)
class KinematicsParams:
    v_explore: float = 0.3  # mm/s
    v_track: float = 0.09  # mm/s
    fixed_turn_deg: float = 3.33
    random_turn_halfwidth_deg: float = 22.5

    def __post_init__(self) -> None:
        if not self.v_explore > self.v_track > 0:
            raise ValueError("need v_explore > v_track > 0")
        if not (self.fixed_turn_deg > 0 and self.random_turn_halfwidth_deg > 0):
            raise ValueError("turn angles must be positive")

    @classmethod
    def obstacle(cls) -> "KinematicsParams":
        return cls(v_track=0.04, random_turn_halfwidth_deg=15.0)

    def speed_value(self, speed: Speed) -> float:
        return {Speed.EXPLORE: self.v_explore, Speed.TRACK: self.v_track, Speed.ZERO: 0.0}[Speed(speed)]


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float]
    heading: float = 0.0  # rad in [-pi, pi)
    speed: float = 0.3
    alive: bool = True


@njit(cache=True)
def wrap_angle(theta):
    """Map to [-pi, pi)."""
    w = (theta + math.pi) % (2.0 * math.pi) - math.pi
    if w >= math.pi:
        w -= 2.0 * math.pi
    return w


@njit(cache=True)
def turned_heading(heading, turn, quanta, fixed_rad, halfwidth_rad, u):
    if turn == 1:
        heading -= quanta * fixed_rad
    elif turn == 2:
        heading += quanta * fixed_rad
    elif turn == 3:
        heading += (2.0 * u - 1.0) * halfwidth_rad
    return wrap_angle(heading)


@njit(cache=True)
def move(x, y, heading, speed, dt, xmin, ymin, xmax, ymax):
    """Straight move with specular reflection at the walls; returns (x, y, heading)."""
    cx = math.cos(heading)
    sy = math.sin(heading)
    x += speed * dt * cx
    y += speed * dt * sy
    reflected = False
    if x > xmax:
        x = 2.0 * xmax - x
        cx = -cx
        reflected = True
    elif x < xmin:
        x = 2.0 * xmin - x
        cx = -cx
        reflected = True
    if y > ymax:
        y = 2.0 * ymax - y
        sy = -sy
        reflected = True
    elif y < ymin:
        y = 2.0 * ymin - y
        sy = -sy
        reflected = True
    # a step longer than the arena would still overshoot; clamp as a last resort
    x = min(max(x, xmin), xmax)
    y = min(max(y, ymin), ymax)
    if reflected:
        heading = wrap_angle(math.atan2(sy, cx))
    return x, y, heading


def apply_command(
    state: AgentState, cmd: MotionCommand, params: KinematicsParams, rng: np.random.Generator
) -> AgentState:
    """Apply one decoded command. Random turns draw a single uniform from ``rng``."""
    if not state.alive:
        raise AgentHaltedError("agent has halted; no further commands accepted")
    if cmd.turn is Turn.HALT:
        return replace(state, speed=0.0, alive=False)
    u = rng.random() if cmd.turn is Turn.RANDOM_UNIFORM else 0.5
    heading = turned_heading(
        state.heading,
        int(cmd.turn),
        cmd.quanta,
        math.radians(params.fixed_turn_deg),
        math.radians(params.random_turn_halfwidth_deg),
        u,
    )
    speed = state.speed
    if cmd.turn in (Turn.CW_FIXED, Turn.CCW_FIXED, Turn.RANDOM_UNIFORM):
        speed = params.speed_value(cmd.speed)
    return replace(state, heading=float(heading), speed=speed)


def integrate_position(
    state: AgentState, dt: float, bounds: tuple[float, float, float, float]
) -> AgentState:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    x, y, heading = move(state.position[0], state.position[1], state.heading, state.speed, dt, *bounds)
    return replace(state, position=(float(x), float(y)), heading=float(heading))

"""Comparison foragers: a truncated-Levy random searcher and a graded (non-spiking) circuit.

The graded circuit keeps the wiring and decode rules of the spiking network
but replaces every spike with an analog level: detectors run without the
spike reset, comparators saturate smoothly with the distance from their
reference level, and each output unit low-pass filters a sigmoid of its
weighted inputs. An output issues its command when its activity crosses a
shared decision level from below. This is a reconstruction, not a published
model, and reports label it as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ase import AseState
from .engine import G_LEVEL, graded_decode, graded_substeps, levy_length
from .kinematics import AgentState, MotionCommand, Speed, Turn, move, wrap_angle
from .network import N_NEURONS, SETTER_NONE, NetworkConfig


@dataclass(frozen=True)
class LevyParams:
    s_min: float = 0.2649  # mm
    s_max: float = 40.0  # mm
    exponent: float = 2.0
    speed: float = 0.3  # mm/s

    def __post_init__(self) -> None:
        if not 0 < self.s_min < self.s_max:
            raise ValueError("need 0 < s_min < s_max")
        if self.exponent != 2.0:
            # the closed-form inverse CDF below is specific to l^-2
            raise ValueError("only exponent 2 is supported")
        if not self.speed > 0:
            raise ValueError("speed must be > 0")

    @property
    def mean_length(self) -> float:
        """Analytic mean run length of the truncated l^-2 density."""
        return math.log(self.s_max / self.s_min) / (1.0 / self.s_min - 1.0 / self.s_max)

    def pdf(self, length: np.ndarray) -> np.ndarray:
        norm = 1.0 / (1.0 / self.s_min - 1.0 / self.s_max)
        length = np.asarray(length, dtype=float)
        inside = (length >= self.s_min) & (length <= self.s_max)
        return np.where(inside, norm / length**2, 0.0)

    def cdf(self, length: np.ndarray) -> np.ndarray:
        length = np.clip(np.asarray(length, dtype=float), self.s_min, self.s_max)
        return (1.0 / self.s_min - 1.0 / length) / (1.0 / self.s_min - 1.0 / self.s_max)

    def as_array(self) -> np.ndarray:
        return np.array([self.s_min, self.s_max, self.speed])


def levy_sample_length(params: LevyParams, rng: np.random.Generator) -> float:
    return float(levy_length(params.s_min, params.s_max, rng.random()))


@dataclass(frozen=True)
class LevyWalker:
    agent: AgentState
    remaining: float  # mm left on the current run

    @classmethod
    def start(cls, position, params: LevyParams, rng: np.random.Generator) -> "LevyWalker":
        heading = wrap_angle((2.0 * rng.random() - 1.0) * math.pi)
        length = levy_sample_length(params, rng)
        return cls(AgentState(tuple(position), heading, params.speed), length)


def levy_forager_step(
    walker: LevyWalker,
    params: LevyParams,
    rng: np.random.Generator,
    dt: float,
    bounds: tuple[float, float, float, float],
) -> LevyWalker:
    """Move straight for ``dt``; when the run is used up, pick a uniform heading and a new length.

    Turns happen at step boundaries and are instantaneous.
    """
    a = walker.agent
    x, y, heading = move(a.position[0], a.position[1], a.heading, params.speed, dt, *bounds)
    remaining = walker.remaining - params.speed * dt
    if remaining <= 0.0:
        heading = wrap_angle((2.0 * rng.random() - 1.0) * math.pi)
        remaining = levy_sample_length(params, rng)
    agent = replace(a, position=(float(x), float(y)), heading=float(heading), speed=params.speed)
    return LevyWalker(agent, remaining)


@dataclass(frozen=True)
class GradedParams:
    comparator_scale: float = 2.0  # mM to reach tanh(1)
    gain: float = 6.0
    bias_5: float = -1.3
    bias_6: float = -1.3
    bias_7: float = -0.5
    tau_activity: float = 0.3  # s
    decision_level: float = 0.5

    def __post_init__(self) -> None:
        if not (self.comparator_scale > 0 and self.gain > 0 and self.tau_activity > 0):
            raise ValueError("comparator_scale, gain and tau_activity must be > 0")
        if not 0 < self.decision_level < 1:
            raise ValueError("decision_level must lie in (0, 1)")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.comparator_scale, self.gain, self.bias_5, self.bias_6, self.bias_7, self.tau_activity, self.decision_level]
        )


@dataclass
class GradedNetworkState:
    ase: np.ndarray  # (2, N_ASE_STATE), graded detectors N3, N4
    activity: np.ndarray  # a5, a6, a7
    last_speed_setter: int = SETTER_NONE

    @classmethod
    def initial(cls, config: NetworkConfig, concentration: float) -> "GradedNetworkState":
        left = AseState.adapted(config.ase, concentration).pack()
        right = AseState.adapted(config.ase.mirrored(), concentration).pack()
        return cls(np.stack([left, right]), np.zeros(3))

    def copy(self) -> "GradedNetworkState":
        return GradedNetworkState(self.ase.copy(), self.activity.copy(), self.last_speed_setter)


def graded_network_step(
    state: GradedNetworkState,
    config: NetworkConfig,
    concentration: float,
    dt: float = 0.1,
    params: GradedParams = GradedParams(),
    neuron_dt: float = 1e-3,
) -> tuple[GradedNetworkState, MotionCommand]:
    n_sub = int(round(dt / neuron_dt))
    new = state.copy()
    gp = params.as_array()
    graded_substeps(
        new.ase, config.ase_matrix(), new.activity, gp, config.weight_matrix(),
        config.upper_level, config.lower_level, config.has_n6, float(concentration), n_sub, neuron_dt,
    )
    turn, speed, quanta, setter = graded_decode(new.activity, state.activity, gp[G_LEVEL], state.last_speed_setter)
    new.last_speed_setter = int(setter)
    return new, MotionCommand(Turn(int(turn)), Speed(int(speed)), int(quanta))


__all__ = [
    "LevyParams",
    "LevyWalker",
    "levy_sample_length",
    "levy_forager_step",
    "GradedParams",
    "GradedNetworkState",
    "graded_network_step",
    "N_NEURONS",
]

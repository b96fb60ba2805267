"""Leaky integrate-and-fire dynamics and the double-exponential synapse kernel.

Units used throughout: membrane potentials in mV, capacitance in nF,
conductance in uS, currents in nA and time constants in ms. Step sizes and
spike times are given in seconds at the public surface and converted to ms
internally, so ``C dV/dt`` (nF * mV/ms) comes out in nA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit


class InvalidStateError(ValueError):
    """Raised when a neuron state or input is not finite."""


@dataclass(frozen=True)
class LifParams:
    capacitance: float = 1.0  # nF
    leak_conductance: float = 0.05  # uS
    rest_potential: float = -70.0  # mV
    threshold: float = -50.0  # mV
    spike_value: float = 30.0  # mV

    def __post_init__(self) -> None:
        if not self.capacitance > 0:
            raise ValueError("capacitance must be > 0")
        if not self.leak_conductance > 0:
            raise ValueError("leak_conductance must be > 0")
        if not self.threshold > self.rest_potential:
            raise ValueError("threshold must exceed rest_potential")
        if not self.spike_value >= self.threshold:
            raise ValueError("spike_value must be >= threshold")

    @property
    def time_constant_ms(self) -> float:
        return self.capacitance / self.leak_conductance

    @property
    def rheobase(self) -> float:
        """Smallest constant current (nA) that eventually reaches threshold."""
        return self.leak_conductance * (self.threshold - self.rest_potential)

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.capacitance,
                self.leak_conductance,
                self.rest_potential,
                self.threshold,
                self.spike_value,
            ]
        )


@dataclass(frozen=True)
class LifState:
    potential: float
    spiked_now: bool = False

    @classmethod
    def at_rest(cls, params: LifParams) -> "LifState":
        return cls(params.rest_potential, False)


@dataclass(frozen=True)
class SynapseKernelParams:
    peak_scale: float = 1.0  # I_0, nA
    tau_slow: float = 5.0  # ms
    tau_fast: float = 1.0  # ms

    def __post_init__(self) -> None:
        if not self.tau_slow > self.tau_fast > 0:
            raise ValueError("kernel needs tau_slow > tau_fast > 0")
        if not self.peak_scale > 0:
            raise ValueError("peak_scale must be > 0")

    @property
    def peak_delay_ms(self) -> float:
        """Delay after a spike at which the kernel is maximal."""
        ts, tf = self.tau_slow, self.tau_fast
        return ts * tf / (ts - tf) * math.log(ts / tf)

    @property
    def charge_per_spike(self) -> float:
        """Integral of one unit-weight kernel, in pC (nA * ms)."""
        return self.peak_scale * (self.tau_slow - self.tau_fast)


@dataclass(frozen=True)
class SpikeTrain:
    times: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        if any(not math.isfinite(t) for t in times):
            raise InvalidStateError("spike times must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("spike times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.times)

    def merged(self, other: "SpikeTrain") -> "SpikeTrain":
        return SpikeTrain(tuple(sorted(set(self.times) | set(other.times))))


@njit(cache=True)
def lif_advance(v, spiked, cap, g_leak, v_rest, v_thresh, v_spike, current, dt_ms):
    """One forward-Euler step; returns (reported potential, spiked)."""
    if spiked:
        v = v_rest
    v = v + dt_ms * (-g_leak * (v - v_rest) + current) / cap
    if v >= v_thresh:
        return v_spike, True
    return v, False


def lif_step(
    state: LifState, params: LifParams, i_app: float, i_syn: float, dt: float
) -> LifState:
    """Advance a LIF neuron by ``dt`` seconds.

    A step that crosses threshold reports ``spike_value`` and ``spiked_now``;
    the next call then starts from the rest potential.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not all(math.isfinite(x) for x in (state.potential, i_app, i_syn, dt)):
        raise InvalidStateError("non-finite LIF input")
    v, spiked = lif_advance(
        state.potential,
        state.spiked_now,
        params.capacitance,
        params.leak_conductance,
        params.rest_potential,
        params.threshold,
        params.spike_value,
        i_app + i_syn,
        dt * 1e3,
    )
    return LifState(float(v), bool(spiked))


def synapse_current(
    kernel: SynapseKernelParams,
    weight: float,
    presyn_spikes: SpikeTrain,
    t: float,
    window_taus: float = 10.0,
) -> float:
    """Summed kernel current at time ``t`` (s) from every presynaptic spike.

    Spikes older than ``window_taus * tau_slow`` are ignored.
    """
    if not (math.isfinite(weight) and math.isfinite(t)):
        raise InvalidStateError("non-finite synapse input")
    if not presyn_spikes.times:
        return 0.0
    times = np.asarray(presyn_spikes.times)
    if times[-1] > t:
        raise ValueError("presynaptic spikes must not lie after t")
    lag_ms = (t - times) * 1e3
    lag_ms = lag_ms[lag_ms <= window_taus * kernel.tau_slow]
    total = np.sum(np.exp(-lag_ms / kernel.tau_slow) - np.exp(-lag_ms / kernel.tau_fast))
    return float(weight * kernel.peak_scale * total)


def simulate_lif(
    params: LifParams, current, dt: float, n_steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Drive a neuron from rest; ``current`` is a constant or a per-step array.

    Returns the reported potential trace and the spike times in seconds.
    """
    drive = np.broadcast_to(np.asarray(current, dtype=float), (n_steps,))
    trace = np.empty(n_steps)
    spikes = []
    state = LifState.at_rest(params)
    for k in range(n_steps):
        state = lif_step(state, params, float(drive[k]), 0.0, dt)
        trace[k] = state.potential
        if state.spiked_now:
            spikes.append((k + 1) * dt)
    return trace, np.asarray(spikes)


def lif_isi_closed_form(params: LifParams, i_app: float) -> float:
    """Analytic inter-spike interval (s) of the continuous neuron under constant drive."""
    ratio = params.leak_conductance * (params.threshold - params.rest_potential) / i_app
    if i_app <= 0 or ratio >= 1:
        return math.inf
    return -params.time_constant_ms * math.log(1.0 - ratio) * 1e-3

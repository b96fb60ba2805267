"""Spiking gradient detectors modelled on the ASEL/ASER chemosensory pair.

Each detector has a conductance-based membrane driven by a three-state
depolarizing channel (unbound/bound/inactive) and a two-state hyperpolarizing
channel. The depolarizing binding rate grows with the distance between the
sensed concentration and an adaptive threshold, so the neuron reports the
temporal gradient rather than the concentration itself. A hard threshold on
the membrane turns the graded response into spikes.

Channel conductances are dimensionless gains (normalized by the leak), which
keeps every term of the membrane equation in mV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .core import InvalidStateError


class Side(str, Enum):
    ASEL = "ASEL"
    ASER = "ASER"


# Layout of AseParams.as_array(), shared with the jitted kernels.
P_TAU_M, P_V0, P_VD, P_VH, P_GMAX = 0, 1, 2, 3, 4
P_BETA_D, P_GAMMA_D, P_DELTA_D, P_BETA_H = 5, 6, 7, 8
P_ALPHA0_D, P_ALPHA0_H, P_ETA_R, P_TAU_ADAPT = 9, 10, 11, 12
P_NACL_R_MIN, P_VT, P_VMAX, P_IS_LEFT = 13, 14, 15, 16
N_ASE_PARAMS = 17

# Layout of a packed AseState.
S_V, S_UD, S_BD, S_ID, S_UH, S_BH, S_THR, S_SPIKED = range(8)
N_ASE_STATE = 8


@dataclass(frozen=True)
class AseParams:
    side: Side = Side.ASEL
    tau_m: float = 800.0  # ms
    rest_potential: float = -70.0
    reversal_depol: float = 0.0
    reversal_hyper: float = -90.0
    g_max: float = 10.0  # dimensionless gain
    beta_d: float = 1.0  # 1/s
    gamma_d: float = 0.5
    delta_d: float = 0.2
    beta_h: float = 1.0
    alpha0_d: float = 0.2  # 1/(s mM)
    alpha0_h: float = 1.0  # 1/s
    eta_r: float = 65.0  # mM
    tau_adapt: float = 200.0  # s
    nacl_r_min: float = 1.0  # mM
    spike_threshold: float = -58.0
    spike_value: float = 30.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "side", Side(self.side))
        if not self.tau_m > 0:
            raise ValueError("tau_m must be > 0")
        if not self.g_max > 0:
            raise ValueError("g_max must be > 0")
        rates = (self.beta_d, self.gamma_d, self.delta_d, self.beta_h, self.alpha0_d, self.alpha0_h)
        if any(r < 0 for r in rates):
            raise ValueError("transition rates must be >= 0")
        if not self.reversal_depol > self.rest_potential > self.reversal_hyper:
            raise ValueError("need reversal_depol > rest_potential > reversal_hyper")
        if not self.tau_adapt > 0:
            raise ValueError("tau_adapt must be > 0")
        if self.side is Side.ASER and not self.nacl_r_min > 0:
            raise ValueError("ASER needs nacl_r_min > 0")

    @property
    def is_left(self) -> bool:
        return self.side is Side.ASEL

    def mirrored(self) -> "AseParams":
        """Same parameters on the opposite side."""
        other = Side.ASER if self.is_left else Side.ASEL
        return replace(self, side=other)

    def as_array(self) -> np.ndarray:
        p = np.empty(N_ASE_PARAMS)
        p[P_TAU_M] = self.tau_m
        p[P_V0] = self.rest_potential
        p[P_VD] = self.reversal_depol
        p[P_VH] = self.reversal_hyper
        p[P_GMAX] = self.g_max
        p[P_BETA_D] = self.beta_d
        p[P_GAMMA_D] = self.gamma_d
        p[P_DELTA_D] = self.delta_d
        p[P_BETA_H] = self.beta_h
        p[P_ALPHA0_D] = self.alpha0_d
        p[P_ALPHA0_H] = self.alpha0_h
        p[P_ETA_R] = self.eta_r
        p[P_TAU_ADAPT] = self.tau_adapt
        p[P_NACL_R_MIN] = self.nacl_r_min
        p[P_VT] = self.spike_threshold
        p[P_VMAX] = self.spike_value
        p[P_IS_LEFT] = 1.0 if self.is_left else 0.0
        return p

    def max_stable_rate(self, max_concentration: float) -> float:
        """Largest transition rate reachable for readings up to ``max_concentration``."""
        alpha_d = self.alpha0_d * max_concentration
        return max(alpha_d + self.beta_d + self.gamma_d, self.delta_d, self.alpha0_h + self.beta_h)

    def check_stability(self, dt: float, max_concentration: float) -> None:
        if dt * self.max_stable_rate(max_concentration) >= 1.0:
            raise ValueError(
                f"channel update unstable: dt={dt} s with readings up to "
                f"{max_concentration} mM; reduce dt or alpha0_d"
            )


@dataclass(frozen=True)
class DepolChannelState:
    unbound: float = 1.0
    bound: float = 0.0
    inactive: float = 0.0


@dataclass(frozen=True)
class HyperChannelState:
    unbound: float = 1.0
    bound: float = 0.0


@dataclass(frozen=True)
class AseState:
    potential: float
    depol: DepolChannelState
    hyper: HyperChannelState
    adapt_threshold: float
    spiked_now: bool = False

    @classmethod
    def adapted(cls, params: AseParams, concentration: float) -> "AseState":
        """Resting neuron whose threshold has settled at ``concentration``."""
        thr = concentration
        if not params.is_left:
            thr = max(thr, params.nacl_r_min)
        return cls(params.rest_potential, DepolChannelState(), HyperChannelState(), thr)

    def pack(self) -> np.ndarray:
        s = np.empty(N_ASE_STATE)
        s[S_V] = self.potential
        s[S_UD], s[S_BD], s[S_ID] = self.depol.unbound, self.depol.bound, self.depol.inactive
        s[S_UH], s[S_BH] = self.hyper.unbound, self.hyper.bound
        s[S_THR] = self.adapt_threshold
        s[S_SPIKED] = 1.0 if self.spiked_now else 0.0
        return s

    @classmethod
    def unpack(cls, s: np.ndarray) -> "AseState":
        return cls(
            float(s[S_V]),
            DepolChannelState(float(s[S_UD]), float(s[S_BD]), float(s[S_ID])),
            HyperChannelState(float(s[S_UH]), float(s[S_BH])),
            float(s[S_THR]),
            bool(s[S_SPIKED] != 0.0),
        )


# --- jitted kernels ---------------------------------------------------------


@njit(cache=True)
def depol_rate(p, conc, thr):
    if p[P_IS_LEFT] != 0.0:
        if conc >= thr:
            return p[P_ALPHA0_D] * (conc - thr)
        return 0.0
    if conc <= thr:
        return p[P_ALPHA0_D] * (thr - conc)
    return 0.0


@njit(cache=True)
def hyper_rate(p, conc):
    if p[P_IS_LEFT] != 0.0:
        return 0.0
    if conc - p[P_ETA_R] >= 0.0:
        return p[P_ALPHA0_H]
    return 0.0


@njit(cache=True)
def advance_channels(s, alpha_d, alpha_h, p, dt):
    """Euler step of both channel systems in place, then renormalize."""
    u, b, i = s[S_UD], s[S_BD], s[S_ID]
    bd, gd, dd = p[P_BETA_D], p[P_GAMMA_D], p[P_DELTA_D]
    du = -alpha_d * u + bd * b + dd * i
    db = alpha_d * u - (bd + gd) * b
    di = gd * b - dd * i
    u = min(max(u + dt * du, 0.0), 1.0)
    b = min(max(b + dt * db, 0.0), 1.0)
    i = min(max(i + dt * di, 0.0), 1.0)
    tot = u + b + i
    s[S_UD], s[S_BD], s[S_ID] = u / tot, b / tot, i / tot

    uh, bh = s[S_UH], s[S_BH]
    flow = alpha_h * uh - p[P_BETA_H] * bh
    uh = min(max(uh - dt * flow, 0.0), 1.0)
    bh = min(max(bh + dt * flow, 0.0), 1.0)
    tot = uh + bh
    s[S_UH], s[S_BH] = uh / tot, bh / tot


@njit(cache=True)
def threshold_derivative(p, conc, thr):
    tau = p[P_TAU_ADAPT]
    if p[P_IS_LEFT] != 0.0:
        if conc >= thr:
            return (conc - thr) / tau
        return -thr / tau
    if conc <= thr:
        return (conc - thr) / tau
    return thr / tau


@njit(cache=True)
def advance_threshold(p, conc, thr, dt):
    thr = thr + dt * threshold_derivative(p, conc, thr)
    if p[P_IS_LEFT] == 0.0 and thr < p[P_NACL_R_MIN]:
        thr = p[P_NACL_R_MIN]
    return thr


@njit(cache=True)
def ase_advance(s, p, conc, dt, spiking):
    """Full sub-step of one detector in place: channels, membrane, adaptation.

    ``dt`` is in seconds. Returns True when the neuron spiked this step.
    """
    alpha_d = depol_rate(p, conc, s[S_THR])
    alpha_h = hyper_rate(p, conc)
    advance_channels(s, alpha_d, alpha_h, p, dt)

    v0 = p[P_V0]
    v = v0 if s[S_SPIKED] != 0.0 else s[S_V]
    g_d = p[P_GMAX] * s[S_BD] * s[S_BD]
    g_h = p[P_GMAX] * s[S_BH] * s[S_BH]
    dv = (v0 - v) + g_d * (p[P_VD] - v) + g_h * (p[P_VH] - v)
    v = v + dt * 1e3 * dv / p[P_TAU_M]

    s[S_THR] = advance_threshold(p, conc, s[S_THR], dt)

    if spiking and v >= p[P_VT]:
        s[S_V] = p[P_VMAX]
        s[S_SPIKED] = 1.0
        return True
    s[S_V] = v
    s[S_SPIKED] = 0.0
    return False


@njit(cache=True)
def ase_run(s, p, conc_trace, dt, spiking, v_out, spike_out):
    """Drive one detector through a per-step concentration trace."""
    for k in range(conc_trace.shape[0]):
        spike_out[k] = ase_advance(s, p, conc_trace[k], dt, spiking)
        v_out[k] = s[S_V]


# --- public step functions --------------------------------------------------


def depol_binding_rate(params: AseParams, concentration: float, adapt_threshold: float) -> float:
    """Unbound-to-bound rate of the depolarizing channel (always >= 0)."""
    return float(depol_rate(params.as_array(), concentration, adapt_threshold))


def hyper_binding_rate(params: AseParams, concentration: float) -> float:
    return float(hyper_rate(params.as_array(), concentration))


def channel_step(
    depol: DepolChannelState,
    hyper: HyperChannelState,
    alpha_d: float,
    alpha_h: float,
    params: AseParams,
    dt: float,
) -> tuple[DepolChannelState, HyperChannelState]:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    fastest = max(
        alpha_d + params.beta_d + params.gamma_d,
        params.delta_d,
        alpha_h + params.beta_h,
    )
    if dt * fastest >= 1.0:
        raise ValueError(f"channel update unstable: dt * rate = {dt * fastest:.3g} >= 1")
    s = AseState(params.rest_potential, depol, hyper, 0.0).pack()
    advance_channels(s, alpha_d, alpha_h, params.as_array(), dt)
    out = AseState.unpack(s)
    return out.depol, out.hyper


def adapt_threshold_step(state: AseState, params: AseParams, concentration: float, dt: float) -> float:
    """Adaptive threshold after one Euler step (ASER floored at ``nacl_r_min``)."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    return float(advance_threshold(params.as_array(), concentration, state.adapt_threshold, dt))


def ase_membrane_step(
    state: AseState, params: AseParams, concentration: float, dt: float, spiking: bool = True
) -> AseState:
    """Advance one detector by ``dt`` seconds at a fixed concentration.

    Rates use the concentration and threshold at the start of the step; the
    channels move first, then the membrane, then the threshold. A spike resets
    only the membrane potential on the next call.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    s = state.pack()
    if not (np.all(np.isfinite(s)) and math.isfinite(concentration)):
        raise InvalidStateError("non-finite detector state or input")
    ase_advance(s, params.as_array(), float(concentration), dt, spiking)
    return AseState.unpack(s)


def simulate_ase(
    params: AseParams,
    concentrations: Sequence[float] | np.ndarray,
    dt: float = 1e-3,
    spiking: bool = True,
    initial: AseState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run a detector through a sampled concentration trace.

    Starts adapted to the first sample unless ``initial`` is given. Returns
    (membrane trace, boolean spike mask), one entry per sample.
    """
    conc = np.ascontiguousarray(concentrations, dtype=float)
    state = initial or AseState.adapted(params, float(conc[0]))
    s = state.pack()
    v = np.empty(conc.shape[0])
    spikes = np.zeros(conc.shape[0], dtype=np.bool_)
    ase_run(s, params.as_array(), conc, dt, spiking, v, spikes)
    return v, spikes


def ramp_trace(baseline: float, gradient: float, duration: float, dt: float, settle: float = 0.0) -> np.ndarray:
    """Flat ``settle`` seconds at ``baseline`` followed by a linear ramp, clipped at 0 mM."""
    n_settle = int(round(settle / dt))
    n_ramp = int(round(duration / dt))
    ramp = baseline + gradient * dt * np.arange(1, n_ramp + 1)
    return np.maximum(np.concatenate([np.full(n_settle, baseline), ramp]), 0.0)


def spike_rate_vs_gradient(
    params: AseParams,
    gradient: float,
    duration: float = 20.0,
    baseline: float = 40.0,
    dt: float = 1e-3,
) -> float:
    """Mean spike frequency (Hz) over a linear ramp from an adapted baseline.

    ``gradient`` is a magnitude in mM/s; ASEL sees a rising ramp and ASER a
    falling one.
    """
    slope = abs(gradient) if params.is_left else -abs(gradient)
    conc = ramp_trace(baseline, slope, duration, dt)
    _, spikes = simulate_ase(params, conc, dt, initial=AseState.adapted(params, baseline))
    return float(np.count_nonzero(spikes)) / duration


def detection_floor(
    params: AseParams,
    duration: float = 20.0,
    lo: float = 1e-4,
    hi: float = 2.0,
    tol: float = 1e-3,
) -> float:
    """Smallest ramp gradient (mM/s) eliciting at least one spike, by bisection in log space."""
    if spike_rate_vs_gradient(params, hi, duration) == 0.0:
        return math.inf
    if spike_rate_vs_gradient(params, lo, duration) > 0.0:
        return lo
    while hi / lo > 1.0 + tol:
        mid = math.sqrt(lo * hi)
        if spike_rate_vs_gradient(params, mid, duration) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def gradient_sweep(
    params: AseParams,
    gradients: Iterable[float],
    thresholds: Iterable[float],
    duration: float = 20.0,
) -> list[tuple[float, float, float]]:
    """(gradient, V_T, frequency) rows for a frequency-vs-gradient plot."""
    rows = []
    for vt in thresholds:
        p = replace(params, spike_threshold=vt)
        for g in gradients:
            rows.append((float(g), float(vt), spike_rate_vs_gradient(p, g, duration)))
    return rows


def write_sweep_csv(rows: Sequence[tuple[float, float, float]], path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gradient_mM_per_s", "v_threshold_mV", "spike_frequency_Hz"])
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write calibration table to {path}: {exc}") from exc


def calibrate_sensitivity(
    params: AseParams,
    target_floor: float,
    step_size: float = 10.0,
    thresholds: Sequence[float] = tuple(np.arange(-69.0, -40.0, 0.5)),
) -> AseParams:
    """Pick the highest spike threshold whose detection floor is at most ``target_floor``.

    Also requires that a ``step_size`` mM up-step from 40 mM elicits a spike.
    Raises ValueError when no threshold in the sweep qualifies.
    """
    best = None
    for vt in sorted(thresholds):
        p = replace(params, spike_threshold=float(vt))
        if detection_floor(p) > target_floor:
            break
        _, spikes = simulate_ase(p, step_trace(40.0, 40.0 + step_size, 2.0, 10.0))
        if spikes.any():
            best = p
    if best is None:
        raise ValueError("no spike threshold reaches the requested detection floor")
    return best


def step_trace(before: float, after: float, t_before: float, t_after: float, dt: float = 1e-3) -> np.ndarray:
    return np.concatenate(
        [np.full(int(round(t_before / dt)), before), np.full(int(round(t_after / dt)), after)]
    )

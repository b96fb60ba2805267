"""The seven-neuron navigation circuit.

Neurons are indexed 0..6 for N1..N7:

* N1/N2 - LIF comparators firing at a fixed rate when the reading is above
  (N1) or below (N2) their reference level.
* N3/N4 - spiking gradient detectors (ASEL/ASER, see :mod:`.ase`).
* N5/N6 - LIF coincidence detectors (N1 and N3, N2 and N4) steering clockwise
  and counter-clockwise.
* N7 - LIF explorer that triggers random turns.

In obstacle mode N1 watches for readings above the avoid level, N2 for
readings below the goal level, N6 is not instantiated, and N7 is driven by a
positive bias and inhibited by N2, N4 and N5.

The synaptic kernel is evaluated through two exponentially decaying traces
per presynaptic neuron; the difference of the traces equals the spike-sum
form of :func:`.core.synapse_current` without any history truncation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .ase import N_ASE_STATE, S_SPIKED, AseParams, AseState, Side, ase_advance
from .core import LifParams, SynapseKernelParams, lif_advance
from .kinematics import MotionCommand, Speed, Turn

N_NEURONS = 7
TRACKING = "tracking"
OBSTACLE = "obstacle"

WEIGHT_NAMES = ("w15", "w35", "w26", "w46", "w17", "w27", "w37", "w47", "w57")
# (post, pre) indices for each named weight
WEIGHT_INDEX = {
    "w15": (4, 0),
    "w35": (4, 2),
    "w26": (5, 1),
    "w46": (5, 3),
    "w17": (6, 0),
    "w27": (6, 1),
    "w37": (6, 2),
    "w47": (6, 3),
    "w57": (6, 4),
}
EXCITATORY = {5: ("w15", "w35"), 6: ("w26", "w46"), 7: ("w17", "w27")}
INHIBITORY = {5: (), 6: (), 7: ("w37", "w47")}

# last_speed_setter codes
SETTER_NONE, SETTER_TRACK, SETTER_EXPLORE = 0, 1, 2


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def _comparator_params() -> LifParams:
    return LifParams()


def _decision_params() -> LifParams:
    return LifParams()


def _explorer_params() -> LifParams:
    return LifParams(capacitance=30.0)


def _kernel() -> SynapseKernelParams:
    return SynapseKernelParams(peak_scale=2.0, tau_slow=100.0, tau_fast=20.0)


def _ase() -> AseParams:
    return AseParams()


def _tracking_weights() -> dict[str, float]:
    return {"w15": 1.0, "w35": 1.0, "w26": 1.0, "w46": 1.0, "w17": 1.0, "w27": 1.0, "w37": -1.0, "w47": -1.0, "w57": 0.0}


def _obstacle_weights() -> dict[str, float]:
    return {"w15": 1.0, "w35": 1.0, "w26": 0.0, "w46": 0.0, "w17": 0.0, "w27": -1.0, "w37": 0.0, "w47": -1.0, "w57": -1.0}


@dataclass(frozen=True)
class NetworkConfig:
    mode: str = TRACKING
    set_point: float = 55.0  # mM
    i_app0: float = 1.0068  # nA, ~10 Hz on the comparator neurons
    weights: dict = field(default_factory=_tracking_weights)
    bias_5: float = -1.0
    bias_6: float = -1.0
    bias_7: float = -0.4
    obstacle_avoid_level: float = 65.0
    obstacle_goal_level: float = 20.0
    comparator: LifParams = field(default_factory=_comparator_params)
    decision: LifParams = field(default_factory=_decision_params)
    explorer: LifParams = field(default_factory=_explorer_params)
    kernel: SynapseKernelParams = field(default_factory=_kernel)
    ase: AseParams = field(default_factory=_ase)
    turn_per_spike: bool = True

    def __post_init__(self) -> None:
        if self.mode not in (TRACKING, OBSTACLE):
            raise ConfigError("mode", f"expected 'tracking' or 'obstacle', got {self.mode!r}")
        w = dict(self.weights)
        unknown = set(w) - set(WEIGHT_NAMES)
        if unknown:
            raise ConfigError("weights", f"unknown weights {sorted(unknown)}")
        for name in WEIGHT_NAMES:
            w.setdefault(name, 0.0)
            if not math.isfinite(w[name]):
                raise ConfigError(f"weights.{name}", "must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ase", replace(self.ase, side=Side.ASEL))
        for name in ("w15", "w35"):
            if not w[name] > 0:
                raise ConfigError(f"weights.{name}", "must be > 0")
        if self.mode == TRACKING:
            for name in ("w26", "w46", "w17", "w27"):
                if not w[name] > 0:
                    raise ConfigError(f"weights.{name}", "must be > 0 in tracking mode")
            for name in ("w37", "w47"):
                if not w[name] < 0:
                    raise ConfigError(f"weights.{name}", "must be < 0")
        else:
            for name in ("w27", "w47", "w57"):
                if w[name] != -1.0:
                    raise ConfigError(f"weights.{name}", "obstacle mode fixes N7 inhibition at -1")
            if not self.obstacle_goal_level < self.obstacle_avoid_level:
                raise ConfigError("obstacle_goal_level", "must lie below obstacle_avoid_level")
        if not self.i_app0 > 0:
            raise ConfigError("i_app0", "must be > 0")

    # -- derived -----------------------------------------------------------

    @property
    def upper_level(self) -> float:
        """Reference level of N1."""
        return self.obstacle_avoid_level if self.mode == OBSTACLE else self.set_point

    @property
    def lower_level(self) -> float:
        """Reference level of N2."""
        return self.obstacle_goal_level if self.mode == OBSTACLE else self.set_point

    @property
    def has_n6(self) -> bool:
        return self.mode == TRACKING

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((N_NEURONS, N_NEURONS))
        for name, (post, pre) in WEIGHT_INDEX.items():
            W[post, pre] = self.weights[name]
        if not self.has_n6:
            W[5, :] = 0.0
        return W

    def bias_vector(self) -> np.ndarray:
        b = np.zeros(N_NEURONS)
        b[4], b[5], b[6] = self.bias_5, self.bias_6 if self.has_n6 else 0.0, self.bias_7
        return b

    def lif_matrix(self) -> np.ndarray:
        m = np.zeros((N_NEURONS, 5))
        m[0] = m[1] = self.comparator.as_array()
        m[2] = m[3] = self.comparator.as_array()  # unused rows (detectors)
        m[4] = m[5] = self.decision.as_array()
        m[6] = self.explorer.as_array()
        return m

    def ase_matrix(self) -> np.ndarray:
        return np.stack([self.ase.as_array(), self.ase.mirrored().as_array()])

    @classmethod
    def obstacle_default(cls, **overrides) -> "NetworkConfig":
        kw = dict(
            mode=OBSTACLE,
            weights=_obstacle_weights(),
            bias_7=1.36,
            obstacle_avoid_level=65.0,
            obstacle_goal_level=20.0,
        )
        kw.update(overrides)
        return cls(**kw)

    def with_weights(self, **changes: float) -> "NetworkConfig":
        w = dict(self.weights)
        w.update(changes)
        return replace(self, weights=w)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ase"]["side"] = self.ase.side.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        data = dict(data)
        nested = {
            "comparator": LifParams,
            "decision": LifParams,
            "explorer": LifParams,
            "kernel": SynapseKernelParams,
            "ase": AseParams,
        }
        base = cls.obstacle_default() if data.get("mode") == OBSTACLE else cls()
        kwargs = {}
        for key, value in data.items():
            if key in nested:
                try:
                    kwargs[key] = replace(getattr(base, key), **value)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(key, str(exc)) from exc
            elif key == "weights":
                w = dict(base.weights)
                w.update(value)
                kwargs[key] = w
            elif key in cls.__dataclass_fields__:
                kwargs[key] = value
            else:
                raise ConfigError(key, "unknown network field")
        try:
            return replace(base, **kwargs)
        except TypeError as exc:
            raise ConfigError("network", str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "NetworkConfig":
        with Path(path).open() as fh:
            return cls.from_dict(json.load(fh))


# --- jitted network kernel -----------------------------------------------------


@njit(cache=True)
def network_substeps(
    lif_v, lif_spk, ase_s, tr_slow, tr_fast,
    lif_p, ase_p, W, bias, i_app0, upper, lower, has_n6,
    peak, decay_slow, decay_fast,
    conc, n_sub, dt, counts, last_idx, raster,
):
    """Advance the circuit ``n_sub`` sub-steps of ``dt`` seconds at a fixed reading.

    ``counts``/``last_idx`` receive per-neuron spike counts and the sub-step
    index of each neuron's last spike (-1 if silent). ``raster`` (n_sub x 7)
    is filled when it has at least n_sub rows.
    """
    dt_ms = dt * 1e3
    record = raster.shape[0] >= n_sub
    i_syn = np.zeros(N_NEURONS)
    for n in range(N_NEURONS):
        counts[n] = 0
        last_idx[n] = -1
    app1 = i_app0 if conc > upper else 0.0
    app2 = i_app0 if conc < lower else 0.0
    spiked = np.zeros(N_NEURONS, dtype=np.bool_)
    for k in range(n_sub):
        for post in range(4, N_NEURONS):
            acc = 0.0
            for pre in range(N_NEURONS):
                w = W[post, pre]
                if w != 0.0:
                    acc += w * (tr_slow[pre] - tr_fast[pre])
            i_syn[post] = peak * acc
        for n in range(N_NEURONS):
            if n == 2 or n == 3:
                spiked[n] = ase_advance(ase_s[n - 2], ase_p[n - 2], conc, dt, True)
                continue
            if n == 5 and not has_n6:
                spiked[n] = False
                continue
            if n == 0:
                drive = app1
            elif n == 1:
                drive = app2
            else:
                drive = bias[n] + i_syn[n]
            v, s = lif_advance(
                lif_v[n], lif_spk[n] != 0.0, lif_p[n, 0], lif_p[n, 1], lif_p[n, 2], lif_p[n, 3],
                lif_p[n, 4], drive, dt_ms,
            )
            lif_v[n] = v
            lif_spk[n] = 1.0 if s else 0.0
            spiked[n] = s
        for n in range(N_NEURONS):
            tr_slow[n] *= decay_slow
            tr_fast[n] *= decay_fast
            if spiked[n]:
                tr_slow[n] += 1.0
                tr_fast[n] += 1.0
                counts[n] += 1
                last_idx[n] = k
            if record:
                raster[k, n] = spiked[n]


@njit(cache=True)
def decode(counts, last_idx, obstacle, last_setter, halted):
    """Map one behavioral step of spike counts to (turn, speed, quanta, setter, halted)."""
    if halted:
        return 4, 2, 0, last_setter, True
    if obstacle:
        if counts[1] > 0:
            return 4, 2, 0, last_setter, True
        if counts[4] > 0:
            return 1, 1, counts[4], SETTER_TRACK, False
        if counts[6] > 0:
            return 3, 0, 1, SETTER_EXPLORE, False
    else:
        n5 = counts[4]
        n6 = counts[5]
        if n5 > 0 or n6 > 0:
            if n5 >= n6:
                return 1, 1, n5 - n6, SETTER_TRACK, False
            return 2, 1, n6 - n5, SETTER_TRACK, False
        if counts[6] > 0:
            return 3, 0, 1, SETTER_EXPLORE, False
    speed = 1 if last_setter == SETTER_TRACK else 0
    return 0, speed, 0, last_setter, False


# --- public state and step --------------------------------------------------------


@dataclass
class NetworkState:
    lif_v: np.ndarray
    lif_spk: np.ndarray
    ase: np.ndarray  # (2, N_ASE_STATE): N3 then N4
    trace_slow: np.ndarray
    trace_fast: np.ndarray
    last_speed_setter: int = SETTER_NONE
    halted: bool = False
    time: float = 0.0

    @classmethod
    def initial(cls, config: NetworkConfig, concentration: float) -> "NetworkState":
        """All LIF neurons at rest, detectors adapted to ``concentration``."""
        lif = config.lif_matrix()
        ase_l = AseState.adapted(config.ase, concentration).pack()
        ase_r = AseState.adapted(config.ase.mirrored(), concentration).pack()
        return cls(
            lif_v=lif[:, 2].copy(),
            lif_spk=np.zeros(N_NEURONS),
            ase=np.stack([ase_l, ase_r]),
            trace_slow=np.zeros(N_NEURONS),
            trace_fast=np.zeros(N_NEURONS),
        )

    def copy(self) -> "NetworkState":
        return NetworkState(
            self.lif_v.copy(),
            self.lif_spk.copy(),
            self.ase.copy(),
            self.trace_slow.copy(),
            self.trace_fast.copy(),
            self.last_speed_setter,
            self.halted,
            self.time,
        )

    def detector(self, index: int) -> AseState:
        """Unpacked state of N3 (index 0) or N4 (index 1)."""
        return AseState.unpack(self.ase[index])


@dataclass(frozen=True)
class StepResult:
    counts: np.ndarray
    raster: np.ndarray | None


def kernel_decays(kernel: SynapseKernelParams, dt: float) -> tuple[float, float]:
    dt_ms = dt * 1e3
    return math.exp(-dt_ms / kernel.tau_slow), math.exp(-dt_ms / kernel.tau_fast)


def comparator_current(set_point: float, concentration: float, which: str, i_app0: float) -> float:
    """Applied current of a comparator neuron (strict inequalities)."""
    if which == "N1":
        return i_app0 if concentration > set_point else 0.0
    if which == "N2":
        return i_app0 if concentration < set_point else 0.0
    raise ValueError(f"which must be 'N1' or 'N2', got {which!r}")


def network_step(
    state: NetworkState,
    config: NetworkConfig,
    concentration: float,
    dt: float = 0.1,
    neuron_dt: float = 1e-3,
    record_raster: bool = False,
) -> tuple[NetworkState, MotionCommand, StepResult]:
    """Advance the circuit over one sensor reading held for ``dt`` seconds.

    Neurons sub-step at ``neuron_dt``. Returns the new state, the decoded
    command and the per-neuron spike counts (plus the sub-step raster when
    requested). The input state is not modified.
    """
    n_sub = int(round(dt / neuron_dt))
    if n_sub < 1 or not math.isclose(n_sub * neuron_dt, dt, rel_tol=1e-9):
        raise ValueError("dt must be a positive multiple of neuron_dt")
    new = state.copy()
    counts = np.zeros(N_NEURONS, dtype=np.int64)
    last_idx = np.zeros(N_NEURONS, dtype=np.int64)
    raster = np.zeros((n_sub if record_raster else 0, N_NEURONS), dtype=np.bool_)
    ds, df = kernel_decays(config.kernel, neuron_dt)
    network_substeps(
        new.lif_v, new.lif_spk, new.ase, new.trace_slow, new.trace_fast,
        config.lif_matrix(), config.ase_matrix(), config.weight_matrix(), config.bias_vector(),
        config.i_app0, config.upper_level, config.lower_level, config.has_n6,
        config.kernel.peak_scale, ds, df,
        float(concentration), n_sub, neuron_dt, counts, last_idx, raster,
    )
    turn, speed, quanta, setter, halted = decode(
        counts, last_idx, config.mode == OBSTACLE, state.last_speed_setter, state.halted
    )
    if not config.turn_per_spike and turn in (1, 2):
        quanta = 1
    new.last_speed_setter = int(setter)
    new.halted = bool(halted)
    new.time = state.time + n_sub * neuron_dt
    cmd = MotionCommand(Turn(int(turn)), Speed(int(speed)), int(quanta))
    return new, cmd, StepResult(counts, raster if record_raster else None)


# --- calibration ---------------------------------------------------------------------


@njit(cache=True)
def _probe(lif_row, peak, decay_slow, decay_fast, weights, periods, phases, stops, bias, n_steps, dt):
    """Drive one LIF neuron with regular presynaptic trains; return its spike steps.

    A non-positive period disables that stream; stream j emits on steps
    phases[j] + m * periods[j] below stops[j].
    """
    n_in = weights.shape[0]
    ts = np.zeros(n_in)
    tf = np.zeros(n_in)
    v = lif_row[2]
    spk = False
    out = []
    for k in range(n_steps):
        acc = 0.0
        for j in range(n_in):
            acc += weights[j] * (ts[j] - tf[j])
        v, spk = lif_advance(v, spk, lif_row[0], lif_row[1], lif_row[2], lif_row[3], lif_row[4], bias + peak * acc, dt * 1e3)
        if spk:
            out.append(k)
        for j in range(n_in):
            ts[j] *= decay_slow
            tf[j] *= decay_fast
            if periods[j] > 0 and phases[j] <= k < stops[j] and (k - phases[j]) % periods[j] == 0:
                ts[j] += 1.0
                tf[j] += 1.0
    return out


def probe_spikes(
    lif: LifParams,
    kernel: SynapseKernelParams,
    weights: Sequence[float],
    rates: Sequence[float],
    bias: float,
    duration: float,
    phases: Sequence[float] | None = None,
    dt: float = 1e-3,
    stops: Sequence[float] | None = None,
) -> np.ndarray:
    """Spike times (s) of a neuron fed regular trains at ``rates`` (Hz, 0 = off).

    Stream j starts at ``phases[j]`` and falls silent at ``stops[j]`` (seconds).
    """
    n = len(rates)
    periods = np.array([int(round(1.0 / (r * dt))) if r > 0 else 0 for r in rates], dtype=np.int64)
    ph = np.zeros(n, dtype=np.int64) if phases is None else np.array([int(round(p / dt)) for p in phases], dtype=np.int64)
    n_steps = int(round(duration / dt))
    st = np.full(n, n_steps, dtype=np.int64) if stops is None else np.array([int(round(t / dt)) for t in stops], dtype=np.int64)
    ds, df = kernel_decays(kernel, dt)
    steps = _probe(
        lif.as_array(), kernel.peak_scale, ds, df, np.asarray(weights, dtype=float), periods, ph, st,
        float(bias), n_steps, dt,
    )
    return (np.asarray(steps, dtype=float) + 1.0) * dt


class CalibrationError(RuntimeError):
    pass


def calibrate_coincidence_bias(
    lif: LifParams,
    kernel: SynapseKernelParams,
    w_excite_pair: Sequence[float],
    rate_a: float = 10.0,
    rate_b_range: tuple[float, float] = (2.0, 10.0),
    margin: float = 0.5,
    search: tuple[float, float] = (-20.0, 0.0),
    tol: float = 1e-4,
) -> float:
    """Negative bias turning a LIF neuron into an AND gate of two regular streams.

    Stream A runs at ``rate_a``; stream B anywhere in ``rate_b_range``. The
    silent boundary is the largest bias at which neither stream alone (B at
    its fastest) fires over 10 s; the firing boundary is the smallest bias at
    which both streams together (B at its slowest, every relative phase) fire
    within three slow kernel time constants of B's first spike. Both are found
    by bisection; the result sits ``margin`` of the way from the firing
    boundary to the silent boundary.
    """
    wa, wb = w_excite_pair
    window = 3.0 * kernel.tau_slow * 1e-3
    b_slow = min(rate_b_range)
    b_fast = max(rate_b_range)
    phases = np.linspace(0.0, 1.0 / rate_a, 8, endpoint=False)

    def single_fires(bias: float) -> bool:
        alone_a = probe_spikes(lif, kernel, [wa], [rate_a], bias, 10.0)
        alone_b = probe_spikes(lif, kernel, [wb], [b_fast], bias, 10.0)
        return alone_a.size > 0 or alone_b.size > 0

    def dual_fires(bias: float) -> bool:
        warm = 2.0  # let stream A reach its periodic regime first
        for ph in phases:
            spikes = probe_spikes(lif, kernel, [wa, wb], [rate_a, b_slow], bias, warm + window, [0.0, warm + ph])
            if not np.any(spikes > warm + ph):
                return False
        return True

    lo, hi = search
    if single_fires(lo) or not dual_fires(hi):
        raise CalibrationError("no bias in the search range separates one stream from two")

    def boundary(pred, lo: float, hi: float) -> float:
        # pred(lo) is False, pred(hi) is True
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if pred(mid):
                hi = mid
            else:
                lo = mid
        return hi

    b_single = boundary(single_fires, lo, hi)  # smallest bias where one stream fires
    b_dual = boundary(dual_fires, lo, hi)  # smallest bias where both streams fire
    if not b_dual < b_single:
        raise CalibrationError(
            f"inconsistent weights: two streams need bias >= {b_dual:.4f} but one stream "
            f"already fires at {b_single:.4f}"
        )
    return b_dual + margin * (b_single - b_dual)


def calibrate_comparator_current(lif: LifParams, rate: float = 10.0, dt: float = 1e-3) -> float:
    """Constant drive (nA) giving ``rate`` Hz under the discrete Euler update."""
    target_steps = int(round(1.0 / (rate * dt)))

    def period_steps(i_app: float) -> float:
        steps = probe_spikes(lif, SynapseKernelParams(), [], [], i_app, 5.0 * target_steps * dt)
        if steps.size < 2:
            return math.inf
        return float(np.median(np.diff(steps))) / dt

    lo, hi = lif.rheobase, lif.rheobase * 10.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if period_steps(mid) > target_steps:
            lo = mid
        else:
            hi = mid
    return hi


def explorer_rate(config: NetworkConfig, inputs: dict[str, float], duration: float = 20.0, bias: float | None = None) -> float:
    """Steady firing rate of N7 given regular presynaptic rates keyed by weight name."""
    names = [n for n in inputs if config.weights.get(n, 0.0) != 0.0]
    weights = [config.weights[n] for n in names]
    rates = [inputs[n] for n in names]
    b = config.bias_7 if bias is None else bias
    warm = 5.0
    spikes = probe_spikes(config.explorer, config.kernel, weights, rates, b, warm + duration)
    return float(np.count_nonzero(spikes > warm)) / duration


def calibrate_explorer_bias(
    config: NetworkConfig, target_rate: float = 1.0, drive_rate: float = 10.0, tol: float = 1e-4
) -> float:
    """Bias of N7 giving ``target_rate`` Hz when one comparator fires alone."""
    lo, hi = -10.0, 10.0
    inputs = {"w17": drive_rate}
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if explorer_rate(config, inputs, bias=mid) > target_rate:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def calibrate_gating_rate(
    config: NetworkConfig, drive_rate: float = 10.0, duration: float = 10.0, tol: float = 1e-3
) -> float:
    """Smallest detector rate (Hz) whose inhibition keeps N7 silent.

    N7 gets one comparator at ``drive_rate`` plus both detectors' inhibitory
    synapses fed the same rate, with the detector stream at every relative
    phase; the answer is the lowest rate that allows no spike in ``duration``.
    """
    w_exc = config.weights["w17"]
    w_inh = max(config.weights["w37"], config.weights["w47"])  # the weaker of the two

    def silent(rate: float) -> bool:
        for ph in np.linspace(0.0, 1.0 / rate, 8, endpoint=False):
            spikes = probe_spikes(
                config.explorer, config.kernel, [w_exc, w_inh], [drive_rate, rate], config.bias_7, duration,
                [0.0, float(ph)],
            )
            if spikes.size:
                return False
        return True

    lo, hi = 0.05, drive_rate
    if not silent(hi):
        raise CalibrationError("detector inhibition cannot silence N7 at the comparator rate")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if silent(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- export ---------------------------------------------------------------------------


def write_raster_csv(times: Sequence[float], concentrations: Sequence[float], counts: np.ndarray, path: str | Path) -> None:
    """Rows (t, C, s1..s7) with per-row spike counts."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "C"] + [f"s{i}" for i in range(1, N_NEURONS + 1)])
            for t, c, row in zip(times, concentrations, counts):
                writer.writerow([f"{t:.6g}", f"{c:.6g}"] + [int(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write spike raster to {path}: {exc}") from exc

"""Monte-Carlo episodes, batch statistics, weight-drift corners and result export."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .arena import NoiseModel, ScalarField, concentration_at, default_arena, obstacle_arena, sense
from .baselines import GradedParams, LevyParams
from .engine import (
    N_TRAJ,
    STRATEGY_GRADED,
    STRATEGY_LEVY,
    STRATEGY_SNN,
    run_kernel,
)
from .kinematics import AgentState, KinematicsParams, Turn, apply_command, integrate_position, wrap_angle
from .network import (
    EXCITATORY,
    INHIBITORY,
    N_NEURONS,
    OBSTACLE,
    ConfigError,
    NetworkConfig,
    NetworkState,
    kernel_decays,
    network_step,
)

STRATEGIES = {"snn": STRATEGY_SNN, "graded": STRATEGY_GRADED, "levy": STRATEGY_LEVY}


@dataclass(frozen=True)
class ExperimentConfig:
    arena: ScalarField = field(default_factory=default_arena)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    strategy: str = "snn"
    episode_duration: float = 1500.0  # s
    n_episodes: int = 200
    success_tolerance: float = 0.5  # mM
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    dt: float = 0.1  # behavioral step, s
    neuron_dt: float = 1e-3  # s
    kinematics: KinematicsParams = field(default_factory=KinematicsParams)
    graded: GradedParams = field(default_factory=GradedParams)
    levy: LevyParams = field(default_factory=LevyParams)
    parallel: int = 1

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy", f"expected one of {sorted(STRATEGIES)}, got {self.strategy!r}")
        if not (isinstance(self.n_episodes, int) and self.n_episodes >= 1):
            raise ConfigError("n_episodes", "must be an integer >= 1")
        if not self.success_tolerance > 0:
            raise ConfigError("success_tolerance", "must be > 0")
        if not self.episode_duration >= 0:
            raise ConfigError("episode_duration", "must be >= 0")
        if not self.dt > 0:
            raise ConfigError("dt", "must be > 0")
        if not self.neuron_dt > 0:
            raise ConfigError("neuron_dt", "must be > 0")
        n_sub = round(self.dt / self.neuron_dt)
        if n_sub < 1 or not math.isclose(n_sub * self.neuron_dt, self.dt, rel_tol=1e-9):
            raise ConfigError("dt", "behavioral step must be a whole multiple of neuron_dt")
        if not self.parallel >= 1:
            raise ConfigError("parallel", "must be >= 1")
        if self.neuron_dt > 0.01:
            # detector channels are only tracked faithfully well below their 10 ms-scale rates
            raise ConfigError("neuron_dt", "must be <= 0.01 s")

    @property
    def n_steps(self) -> int:
        return int(round(self.episode_duration / self.dt))

    @property
    def n_sub(self) -> int:
        return int(round(self.dt / self.neuron_dt))

    @classmethod
    def obstacle(cls, **overrides) -> "ExperimentConfig":
        kw = dict(
            arena=obstacle_arena(),
            network=NetworkConfig.obstacle_default(),
            kinematics=KinematicsParams.obstacle(),
            n_episodes=50,
        )
        kw.update(overrides)
        return cls(**kw)

    # -- JSON -------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "arena": self.arena.to_dict(),
            "network": self.network.to_dict(),
            "strategy": self.strategy,
            "episode_duration": self.episode_duration,
            "n_episodes": self.n_episodes,
            "success_tolerance": self.success_tolerance,
            "noise": asdict(self.noise),
            "seed": self.seed,
            "dt": self.dt,
            "neuron_dt": self.neuron_dt,
            "kinematics": asdict(self.kinematics),
            "graded": asdict(self.graded),
            "levy": asdict(self.levy),
            "parallel": self.parallel,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        obstacle = data.get("network", {}).get("mode") == OBSTACLE
        base = cls.obstacle() if obstacle else cls()
        kwargs = {}
        simple = {"strategy", "episode_duration", "n_episodes", "success_tolerance", "seed", "dt", "neuron_dt", "parallel"}
        nested = {"noise": NoiseModel, "kinematics": KinematicsParams, "graded": GradedParams, "levy": LevyParams}
        for key, value in data.items():
            try:
                if key == "arena":
                    kwargs[key] = ScalarField.from_dict(value)
                elif key == "network":
                    kwargs[key] = NetworkConfig.from_dict(value)
                elif key in nested:
                    kwargs[key] = replace(getattr(base, key), **value)
                elif key in simple:
                    kwargs[key] = value
                else:
                    raise ConfigError(key, "unknown experiment field")
            except ConfigError:
                raise
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(key, str(exc)) from exc
        return replace(base, **kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with Path(path).open() as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class RunMetrics:
    success: bool
    time_to_target: float | None
    deviation_mean: float | None
    deviation_std: float | None
    window_samples: int = 0
    halted: bool = False
    halt_time: float | None = None
    avoid_entries: int = 0
    max_concentration: float = math.nan
    path_length: float = 0.0
    duration: float = 0.0
    trajectory: np.ndarray | None = field(default=None, compare=False, repr=False)
    spike_counts: np.ndarray | None = field(default=None, compare=False, repr=False)

    def summary(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("trajectory", "spike_counts")}
        return out


@dataclass(frozen=True)
class BatchStats:
    n_episodes: int
    success_rate: float
    time_mean: float | None
    time_std: float | None
    deviation_mean: float | None
    deviation_std: float | None
    deviation_mean_pct: float | None
    deviation_std_pct: float | None
    concentration_range: float
    fraction_within_550s: float = 0.0
    label: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BatchStats":
        return cls(**data)


# --- single episode ------------------------------------------------------------


def _uniforms(seed: int, n_steps: int) -> np.ndarray:
    # 3 sensor draws + 1 turn draw per step is the most any strategy consumes
    return np.random.default_rng(seed).random(4 * n_steps + 4)


def run_episode(config: ExperimentConfig, seed: int, record: bool = False) -> RunMetrics:
    """Simulate one closed-loop episode with its own random stream derived from ``seed``."""
    n_steps = config.n_steps
    net = config.network
    arena = config.arena
    bumps = arena.as_array()
    start_c = concentration_at(arena, arena.start)
    state = NetworkState.initial(net, start_c)
    ds, df = kernel_decays(net.kernel, config.neuron_dt)
    kin = config.kinematics
    traj = np.zeros((n_steps + 1 if record else 0, N_TRAJ))
    counts = np.zeros((n_steps if record else 0, N_NEURONS), dtype=np.int64)
    uniforms = _uniforms(seed, n_steps)
    xmin, ymin, xmax, ymax = arena.bounds
    (
        success, t_hit, dev_sum, dev_sq, n_window, halted, halt_time,
        avoid_entries, max_clean, steps_done, path, _,
    ) = run_kernel(
        STRATEGIES[config.strategy], n_steps, config.dt, config.n_sub, config.neuron_dt,
        bumps, arena.baseline, xmin, ymin, xmax, ymax, arena.start[0], arena.start[1],
        config.noise.active, config.noise.corruption_probability, config.noise.max_magnitude, uniforms,
        state.lif_v, state.lif_spk, state.ase, state.trace_slow, state.trace_fast,
        net.lif_matrix(), net.ase_matrix(), net.weight_matrix(), net.bias_vector(),
        net.i_app0, net.upper_level, net.lower_level, net.has_n6, net.mode == OBSTACLE,
        net.kernel.peak_scale, ds, df,
        config.graded.as_array(), config.levy.as_array(),
        kin.v_explore, kin.v_track, math.radians(kin.fixed_turn_deg), math.radians(kin.random_turn_halfwidth_deg),
        net.set_point, config.success_tolerance, net.obstacle_goal_level, net.obstacle_avoid_level,
        traj, counts, net.turn_per_spike,
    )
    return _metrics(
        success, t_hit, dev_sum, dev_sq, n_window, halted, halt_time, avoid_entries, max_clean,
        path, steps_done * config.dt, traj[: steps_done + 1] if record else None,
        counts[:steps_done] if record else None,
    )


def _metrics(success, t_hit, dev_sum, dev_sq, n_window, halted, halt_time, avoid_entries, max_clean, path, duration, traj, counts) -> RunMetrics:
    if n_window > 0:
        mean = dev_sum / n_window
        std = math.sqrt(max(dev_sq / n_window - mean * mean, 0.0))
    else:
        mean = std = None
    return RunMetrics(
        success=bool(success),
        time_to_target=float(t_hit) if success else None,
        deviation_mean=mean,
        deviation_std=std,
        window_samples=int(n_window),
        halted=bool(halted),
        halt_time=float(halt_time) if halted else None,
        avoid_entries=int(avoid_entries),
        max_concentration=float(max_clean),
        path_length=float(path),
        duration=float(duration),
        trajectory=traj,
        spike_counts=counts,
    )


class _ReplayRng:
    """Serves a pre-drawn uniform stream through the Generator calls the step API uses."""

    def __init__(self, uniforms: np.ndarray):
        self._u = uniforms
        self._i = 0

    def random(self, size=None):
        if size is None:
            value = float(self._u[self._i])
            self._i += 1
            return value
        out = self._u[self._i : self._i + size].copy()
        self._i += size
        return out


def run_episode_stepwise(config: ExperimentConfig, seed: int) -> RunMetrics:
    """Reference episode driven through the public step functions (spiking strategy only).

    Slow; exists to cross-check the compiled loop.
    """
    if config.strategy != "snn":
        raise ValueError("stepwise reference covers the spiking strategy")
    arena, net, kin = config.arena, config.network, config.kinematics
    rng = _ReplayRng(_uniforms(seed, config.n_steps))
    heading = float((2.0 * rng.random() - 1.0) * math.pi)
    agent = AgentState(arena.start, float(wrap_angle(heading)), kin.v_explore)
    clean = concentration_at(arena, agent.position)
    state = NetworkState.initial(net, clean)
    obstacle = net.mode == OBSTACLE

    def hit(c: float) -> bool:
        return c <= net.obstacle_goal_level if obstacle else abs(c - net.set_point) <= config.success_tolerance

    success = hit(clean)
    t_hit = 0.0 if success else -1.0
    devs = [abs(clean - net.set_point)] if success else []
    avoid = int(obstacle and clean > net.obstacle_avoid_level)
    max_clean = clean
    path = 0.0
    steps_done = 0
    halted = False
    halt_time = -1.0
    for step in range(config.n_steps):
        reading = sense(arena, config.noise, agent.position, rng)
        state, cmd, _ = network_step(state, net, reading, config.dt, config.neuron_dt)
        if cmd.turn is Turn.HALT:
            agent = apply_command(agent, cmd, kin, rng)
            halted = True
            halt_time = step * config.dt
            steps_done = step + 1
            break
        agent = apply_command(agent, cmd, kin, rng)
        agent = integrate_position(agent, config.dt, arena.bounds)
        path += agent.speed * config.dt
        clean = concentration_at(arena, agent.position)
        max_clean = max(max_clean, clean)
        avoid += int(obstacle and clean > net.obstacle_avoid_level)
        if not success and hit(clean):
            success = True
            t_hit = (step + 1) * config.dt
        if success:
            devs.append(abs(clean - net.set_point))
        steps_done = step + 1
    d = np.asarray(devs)
    return _metrics(
        success, t_hit, float(d.sum()), float((d * d).sum()), d.size, halted, halt_time, avoid,
        max_clean, path, steps_done * config.dt, None, None,
    )


# --- batches -------------------------------------------------------------------


def _episode_task(args):
    config, seed = args
    return run_episode(config, seed)


def run_episodes(config: ExperimentConfig) -> list[RunMetrics]:
    """All episodes of a batch, in episode-index order (seeds seed+i)."""
    tasks = [(config, config.seed + i) for i in range(config.n_episodes)]
    if config.parallel > 1 and config.n_episodes > 1:
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            return list(pool.map(_episode_task, tasks, chunksize=max(1, len(tasks) // (4 * config.parallel))))
    return [_episode_task(t) for t in tasks]


def aggregate(metrics: Sequence[RunMetrics], concentration_range: float, label: str = "") -> BatchStats:
    n = len(metrics)
    times = np.array([m.time_to_target for m in metrics if m.success], dtype=float)
    devs = [m for m in metrics if m.window_samples > 0]
    if devs:
        dev_mean = float(np.mean([m.deviation_mean for m in devs]))
        dev_std = float(np.mean([m.deviation_std for m in devs]))
    else:
        dev_mean = dev_std = None
    return BatchStats(
        n_episodes=n,
        success_rate=float(times.size / n) if n else 0.0,
        time_mean=float(times.mean()) if times.size else None,
        time_std=float(times.std()) if times.size else None,
        deviation_mean=dev_mean,
        deviation_std=dev_std,
        deviation_mean_pct=100.0 * dev_mean / concentration_range if dev_mean is not None else None,
        deviation_std_pct=100.0 * dev_std / concentration_range if dev_std is not None else None,
        concentration_range=concentration_range,
        fraction_within_550s=float(np.count_nonzero(times < 550.0) / n) if n else 0.0,
        label=label,
    )


def run_batch(config: ExperimentConfig, label: str = "") -> BatchStats:
    return aggregate(run_episodes(config), config.arena.concentration_range, label or config.strategy)


# --- corner analysis ----------------------------------------------------------------

CORNER_LABELS = {
    # (N5 more sensitive, N6 more sensitive, N7 more sensitive)
    (False, False, False): "N5-,N6-,N7-",
    (True, True, True): "N5+,N6+,N7+",
    (False, False, True): "N5-,N6-,N7+",
    (True, True, False): "N5+,N6+,N7-",
    (False, True, False): "N5-,N6+,N7-",
    (True, False, False): "N5+,N6-,N7-",
    (False, True, True): "N5-,N6+,N7+",
    (True, False, True): "N5+,N6-,N7+",
}
HIGHLIGHTED = ("N5-,N6-,N7-", "N5+,N6+,N7+", "N5-,N6-,N7+", "N5+,N6+,N7-", "N5-,N6+,N7-")


def drift_network(network: NetworkConfig, sensitivity: dict[int, bool], drift: float) -> NetworkConfig:
    """Scale a neuron's incoming weights to make it more (True) or less (False) sensitive.

    Excitatory weights scale by (1 +/- drift), inhibitory magnitudes by (1 -/+ drift).
    """
    changes = {}
    for neuron, more in sensitivity.items():
        sign = 1.0 if more else -1.0
        for name in EXCITATORY[neuron]:
            changes[name] = network.weights[name] * (1.0 + sign * drift)
        for name in INHIBITORY[neuron]:
            changes[name] = network.weights[name] * (1.0 - sign * drift)
    return network.with_weights(**changes)


def corner_configs(config: ExperimentConfig, drift: float = 0.10) -> list[tuple[str, ExperimentConfig]]:
    if not 0.0 <= drift < 1.0:
        raise ValueError("drift must lie in [0, 1)")
    out = []
    for (m5, m6, m7), label in CORNER_LABELS.items():
        net = drift_network(config.network, {5: m5, 6: m6, 7: m7}, drift)
        out.append((label, replace(config, network=net)))
    return out


def corner_analysis(config: ExperimentConfig, drift: float = 0.10) -> list[tuple[str, BatchStats]]:
    """Batch-run all 8 maximal-sensitivity corners with the baseline's seeds."""
    return [(label, run_batch(cfg, label)) for label, cfg in corner_configs(config, drift)]


# --- export -----------------------------------------------------------------------------

CSV_HEADER = ["episode", "success", "time_to_target_s", "dev_mean_mM", "dev_std_mM"]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def export_results(
    stats: BatchStats,
    metrics: Sequence[RunMetrics],
    format: str,
    path: str | Path,
    include_trajectories: bool = False,
) -> None:
    path = Path(path)
    try:
        if format == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(CSV_HEADER)
                for i, m in enumerate(metrics):
                    writer.writerow([i, int(m.success), _fmt(m.time_to_target), _fmt(m.deviation_mean), _fmt(m.deviation_std)])
        elif format == "json":
            doc = {"stats": stats.to_dict(), "episodes": [m.summary() for m in metrics]}
            if include_trajectories:
                doc["trajectories"] = [
                    None if m.trajectory is None else m.trajectory.tolist() for m in metrics
                ]
            with path.open("w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
        else:
            raise ValueError(f"unknown export format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_stats(path: str | Path) -> BatchStats:
    with Path(path).open() as fh:
        return BatchStats.from_dict(json.load(fh)["stats"])


def write_trajectory_csv(metrics: RunMetrics, path: str | Path) -> None:
    if metrics.trajectory is None:
        raise ValueError("episode was run without trajectory recording")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "y", "heading", "speed", "C_sensed"])
            for row in metrics.trajectory:
                writer.writerow([f"{row[0]:.6g}", f"{row[1]:.6g}", f"{row[2]:.6g}", f"{row[3]:.6g}", f"{row[4]:.6g}", f"{row[5]:.6g}"])
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc

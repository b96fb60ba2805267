"""Seven-neuron spiking circuit for salt chemotaxis in a simulated worm."""

from .arena import Bump, DomainError, NoiseModel, ScalarField, default_arena, obstacle_arena
from .experiment import BatchStats, ExperimentConfig, RunMetrics, run_batch, run_episode
from .network import ConfigError, NetworkConfig, NetworkState, network_step

__all__ = [
    "Bump",
    "BatchStats",
    "ConfigError",
    "DomainError",
    "ExperimentConfig",
    "NetworkConfig",
    "NetworkState",
    "NoiseModel",
    "RunMetrics",
    "ScalarField",
    "default_arena",
    "network_step",
    "obstacle_arena",
    "run_batch",
    "run_episode",
]

__version__ = "0.1.0"

import math

import numpy as np
import pytest
from scipy import integrate, stats

from snn_chemotaxis.baselines import (
    GradedNetworkState,
    GradedParams,
    LevyParams,
    LevyWalker,
    graded_network_step,
    levy_forager_step,
    levy_sample_length,
)
from snn_chemotaxis.ase import simulate_ase
from snn_chemotaxis.engine import levy_length
from snn_chemotaxis.kinematics import Speed, Turn
from snn_chemotaxis.network import NetworkConfig

LEVY = LevyParams()
CFG = NetworkConfig()
BOUNDS = (0.0, 0.0, 100.0, 100.0)


def draw(n, seed=0, params=LEVY):
    u = np.random.default_rng(seed).random(n)
    return levy_length(params.s_min, params.s_max, u)


# --- Levy run lengths --------------------------------------------------------------


def test_mean_length_matches_density():
    norm, _ = integrate.quad(LEVY.pdf, LEVY.s_min, LEVY.s_max, points=[1.0])
    mean, _ = integrate.quad(lambda l: l * LEVY.pdf(l), LEVY.s_min, LEVY.s_max, points=[1.0], limit=200)
    assert norm == pytest.approx(1.0, rel=1e-8)
    assert mean == pytest.approx(LEVY.mean_length, rel=1e-8)


def test_inverse_cdf_endpoints():
    assert levy_length(LEVY.s_min, LEVY.s_max, 0.0) == pytest.approx(LEVY.s_min)
    assert levy_length(LEVY.s_min, LEVY.s_max, 1.0) == pytest.approx(LEVY.s_max)
    u = np.linspace(0, 1, 11)
    assert np.allclose(LEVY.cdf(levy_length(LEVY.s_min, LEVY.s_max, u)), u)


def test_sample_mean_within_one_percent():
    samples = draw(1_000_000)
    assert samples.min() >= LEVY.s_min and samples.max() <= LEVY.s_max
    assert abs(samples.mean() - LEVY.mean_length) / LEVY.mean_length < 0.01


def test_samples_follow_the_density():
    samples = draw(1_000_000, seed=3)
    edges = np.geomspace(LEVY.s_min, LEVY.s_max, 51)
    observed, _ = np.histogram(samples, bins=edges)
    expected = np.diff(LEVY.cdf(edges)) * samples.size
    _, p = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    assert p > 0.01


def test_mode_bin_holds_s_min():
    counts, _ = np.histogram(draw(100_000), bins=100, range=(LEVY.s_min, LEVY.s_max))
    assert np.argmax(counts) == 0


def test_generator_sampler_agrees():
    rng = np.random.default_rng(9)
    got = [levy_sample_length(LEVY, rng) for _ in range(5)]
    assert np.allclose(got, draw(5, seed=9))


@pytest.mark.parametrize("kw", [{"s_min": 0.0}, {"s_min": 50.0}, {"exponent": 1.5}, {"speed": 0.0}])
def test_levy_params_validation(kw):
    with pytest.raises(ValueError):
        LevyParams(**kw)


def test_walker_runs_straight_then_turns():
    rng = np.random.default_rng(1)
    w = LevyWalker.start((50.0, 50.0), LEVY, rng)
    w = LevyWalker(w.agent, remaining=0.1)
    step = levy_forager_step(w, LEVY, rng, 0.1, BOUNDS)
    dx = np.subtract(step.agent.position, w.agent.position)
    assert math.hypot(*dx) == pytest.approx(LEVY.speed * 0.1)
    assert step.agent.heading == pytest.approx(w.agent.heading)
    # 0.1 mm at 0.3 mm/s runs out within the next 0.4 s
    for _ in range(4):
        step = levy_forager_step(step, LEVY, rng, 0.1, BOUNDS)
    assert step.agent.heading != pytest.approx(w.agent.heading)
    assert LEVY.s_min - 1.0 < step.remaining <= LEVY.s_max


def test_turn_headings_are_uniform():
    rng = np.random.default_rng(4)
    walker = LevyWalker.start((50.0, 50.0), LEVY, rng)
    headings = np.empty(100_000)
    for i in range(headings.size):
        walker = levy_forager_step(LevyWalker(walker.agent, 0.0), LEVY, rng, 0.1, BOUNDS)
        headings[i] = walker.agent.heading
    assert np.all((headings >= -math.pi) & (headings < math.pi))
    assert abs(np.mean(np.exp(1j * headings))) < 0.01


# --- graded network ----------------------------------------------------------------


def run_graded(trace, params=GradedParams()):
    state = GradedNetworkState.initial(CFG, trace[0])
    cmds = []
    for c in trace:
        state, cmd = graded_network_step(state, CFG, c, 0.1, params)
        cmds.append(cmd)
    return state, cmds


def test_graded_params_validation():
    with pytest.raises(ValueError):
        GradedParams(decision_level=1.0)
    with pytest.raises(ValueError):
        GradedParams(gain=0.0)


def test_graded_silent_at_set_point():
    state, cmds = run_graded([CFG.set_point] * 50)
    assert all(c.turn == Turn.NONE for c in cmds)
    assert np.all(state.activity < GradedParams().decision_level)


def test_graded_explores_below_set_point():
    _, cmds = run_graded([35.0] * 50)
    assert any(c.turn == Turn.RANDOM_UNIFORM and c.speed == Speed.EXPLORE for c in cmds)
    assert not any(c.turn in (Turn.CW_FIXED, Turn.CCW_FIXED) for c in cmds)


def test_graded_turns_on_gradients():
    _, up = run_graded(58.0 + 2.0 * np.arange(100) * 0.1)
    _, down = run_graded(52.0 - 2.0 * np.arange(100) * 0.1)
    assert any(c.turn == Turn.CW_FIXED for c in up) and not any(c.turn == Turn.CCW_FIXED for c in up)
    assert any(c.turn == Turn.CCW_FIXED for c in down) and not any(c.turn == Turn.CW_FIXED for c in down)


def test_graded_detectors_never_reset():
    trace = 40.0 + 3.0 * np.arange(100) * 0.1
    state = GradedNetworkState.initial(CFG, trace[0])
    v = []
    for c in trace:
        state, _ = graded_network_step(state, CFG, c)
        v.append(state.ase[0, 0])
    fine = np.repeat(trace, 100)
    graded, _ = simulate_ase(CFG.ase, fine, spiking=False)
    _, spikes = simulate_ase(CFG.ase, fine)
    # the spiking detector resets many times on this ramp; the graded one tracks the reset-free trace
    assert spikes.sum() > 10
    assert np.allclose(v, graded[99::100])
    assert max(v) > CFG.ase.spike_threshold

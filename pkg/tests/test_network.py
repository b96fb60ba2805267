import json

import numpy as np
import pytest

from snn_chemotaxis.core import LifParams, SynapseKernelParams
from snn_chemotaxis.kinematics import Speed, Turn
from snn_chemotaxis.network import (
    EXCITATORY,
    INHIBITORY,
    OBSTACLE,
    SETTER_EXPLORE,
    SETTER_NONE,
    SETTER_TRACK,
    CalibrationError,
    ConfigError,
    NetworkConfig,
    NetworkState,
    calibrate_coincidence_bias,
    calibrate_comparator_current,
    calibrate_explorer_bias,
    calibrate_gating_rate,
    comparator_current,
    decode,
    explorer_rate,
    network_step,
    probe_spikes,
    write_raster_csv,
)

CFG = NetworkConfig()


def run_trace(config, trace, dt=0.1, state=None):
    """Feed readings one behavioral step at a time; return states, commands, counts."""
    state = NetworkState.initial(config, trace[0]) if state is None else state
    cmds, counts = [], []
    for c in trace:
        state, cmd, res = network_step(state, config, c, dt)
        cmds.append(cmd)
        counts.append(res.counts)
    return state, cmds, np.array(counts)


# --- comparator --------------------------------------------------------------------


def test_comparator_case_split():
    assert comparator_current(55.0, 56.0, "N1", 1.0) == 1.0
    assert comparator_current(55.0, 56.0, "N2", 1.0) == 0.0
    assert comparator_current(55.0, 54.0, "N2", 1.0) == 1.0
    assert comparator_current(55.0, 54.0, "N1", 1.0) == 0.0


def test_comparator_strict_at_set_point():
    assert comparator_current(55.0, 55.0, "N1", 1.0) == 0.0
    assert comparator_current(55.0, 55.0, "N2", 1.0) == 0.0
    with pytest.raises(ValueError):
        comparator_current(55.0, 50.0, "N3", 1.0)


def test_comparator_current_gives_ten_hz():
    i_app = calibrate_comparator_current(CFG.comparator, rate=10.0)
    spikes = probe_spikes(CFG.comparator, CFG.kernel, [], [], i_app, 5.0)
    isi = np.diff(spikes)
    assert np.allclose(isi, 0.1, atol=1.5e-3)
    assert abs(CFG.i_app0 - i_app) / i_app < 0.01


# --- config ------------------------------------------------------------------------


def test_wiring_tables_match_weight_signs():
    for post, names in EXCITATORY.items():
        assert all(CFG.weights[n] > 0 for n in names), post
    for post, names in INHIBITORY.items():
        assert all(CFG.weights[n] < 0 for n in names), post
    W = CFG.weight_matrix()
    assert W[4, 0] == CFG.weights["w15"] and W[6, 3] == CFG.weights["w47"]
    assert np.all(W[:4] == 0.0)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"mode": "hover"}, "mode"),
        ({"weights": {"w99": 1.0}}, "weights"),
        ({"weights": dict(CFG.weights, w15=0.0)}, "weights.w15"),
        ({"weights": dict(CFG.weights, w37=0.5)}, "weights.w37"),
        ({"weights": dict(CFG.weights, w17=float("nan"))}, "weights.w17"),
        ({"i_app0": 0.0}, "i_app0"),
    ],
)
def test_config_errors_name_the_field(kwargs, field):
    with pytest.raises(ConfigError) as info:
        NetworkConfig(**kwargs)
    assert info.value.field == field


def test_obstacle_config_rules():
    obs = NetworkConfig.obstacle_default()
    assert obs.mode == OBSTACLE and obs.bias_7 == pytest.approx(1.36)
    assert (obs.upper_level, obs.lower_level) == (65.0, 20.0)
    assert not obs.has_n6 and np.all(obs.weight_matrix()[5] == 0.0)
    with pytest.raises(ConfigError):
        NetworkConfig.obstacle_default(obstacle_goal_level=70.0)
    with pytest.raises(ConfigError):
        obs.with_weights(w47=-0.5)


def test_dict_and_json_round_trip(tmp_path):
    cfg = CFG.with_weights(w15=1.1)
    assert NetworkConfig.from_dict(cfg.to_dict()) == cfg
    path = tmp_path / "net.json"
    path.write_text(json.dumps(NetworkConfig.obstacle_default().to_dict()))
    assert NetworkConfig.from_json(path) == NetworkConfig.obstacle_default()


def test_from_dict_partial_and_unknown():
    cfg = NetworkConfig.from_dict({"set_point": 40.0, "ase": {"tau_adapt": 5.0}, "weights": {"w17": 2.0}})
    assert cfg.set_point == 40.0 and cfg.ase.tau_adapt == 5.0
    assert cfg.weights["w17"] == 2.0 and cfg.weights["w15"] == CFG.weights["w15"]
    with pytest.raises(ConfigError) as info:
        NetworkConfig.from_dict({"setpoint": 40.0})
    assert info.value.field == "setpoint"
    with pytest.raises(ConfigError) as info:
        NetworkConfig.from_dict({"ase": {"tau_adapt": -1.0}})
    assert info.value.field == "ase"


# --- decode ------------------------------------------------------------------------


def _counts(**spikes):
    c = np.zeros(7, dtype=np.int64)
    for name, n in spikes.items():
        c[int(name[1:]) - 1] = n
    return c


LAST = np.full(7, -1, dtype=np.int64)


@pytest.mark.parametrize(
    "counts, expected",
    [
        (_counts(n5=3), (1, 1, 3, SETTER_TRACK)),
        (_counts(n6=2), (2, 1, 2, SETTER_TRACK)),
        (_counts(n5=4, n6=1), (1, 1, 3, SETTER_TRACK)),
        (_counts(n5=1, n6=3, n7=2), (2, 1, 2, SETTER_TRACK)),
        (_counts(n7=5), (3, 0, 1, SETTER_EXPLORE)),
        (_counts(n1=9, n3=2), (0, 0, 0, SETTER_NONE)),
    ],
)
def test_decode_tracking(counts, expected):
    turn, speed, quanta, setter, halted = decode(counts, LAST, False, SETTER_NONE, False)
    assert (turn, speed, quanta, setter) == expected and not halted


def test_decode_keeps_last_speed():
    assert decode(_counts(), LAST, False, SETTER_TRACK, False)[:2] == (0, 1)
    assert decode(_counts(), LAST, False, SETTER_EXPLORE, False)[:2] == (0, 0)


def test_decode_obstacle():
    assert decode(_counts(n2=1, n5=3), LAST, True, SETTER_NONE, False)[0] == 4
    assert decode(_counts(n5=2), LAST, True, SETTER_NONE, False)[:3] == (1, 1, 2)
    assert decode(_counts(n7=1), LAST, True, SETTER_NONE, False)[:2] == (3, 0)
    # once halted, nothing else matters
    out = decode(_counts(n5=5, n7=5), LAST, True, SETTER_EXPLORE, True)
    assert out[0] == 4 and out[1] == 2 and out[4]


# --- network step ------------------------------------------------------------------


def test_step_leaves_input_state_alone():
    s0 = NetworkState.initial(CFG, 50.0)
    before = s0.copy()
    s1, _, _ = network_step(s0, CFG, 50.0)
    assert np.array_equal(s0.lif_v, before.lif_v) and np.array_equal(s0.ase, before.ase)
    assert s1.time == pytest.approx(0.1)


def test_step_rejects_bad_dt():
    s0 = NetworkState.initial(CFG, 50.0)
    with pytest.raises(ValueError):
        network_step(s0, CFG, 50.0, dt=0.1, neuron_dt=0.03)


def test_flat_at_set_point_is_silent():
    _, cmds, counts = run_trace(CFG, [CFG.set_point] * 50)
    assert counts.sum() == 0
    assert all(c.turn == Turn.NONE for c in cmds)


def test_flat_below_set_point_explores():
    _, cmds, counts = run_trace(CFG, [40.0] * 50)
    assert counts[:, [0, 2, 3, 4, 5]].sum() == 0
    assert counts[:, 1].sum() >= 45  # ~10 Hz comparator
    explore = [i for i, c in enumerate(cmds) if c.turn == Turn.RANDOM_UNIFORM]
    assert explore and explore[0] * 0.1 <= 2.0
    assert all(cmds[i].speed == Speed.EXPLORE for i in explore)


def test_rising_above_set_point_turns_clockwise():
    trace = 56.0 + 0.5 * np.arange(200) * 0.1  # 0.5 mM/s for 20 s
    _, cmds, counts = run_trace(CFG, trace)
    assert counts[:, 2].sum() > 0 and counts[:, 4].sum() > 0
    assert counts[:, 1].sum() == 0 and counts[:, 5].sum() == 0
    first = int(np.argmax(counts[:, 4] > 0))
    assert cmds[first].turn == Turn.CW_FIXED and cmds[first].speed == Speed.TRACK
    # N5 only ever fires after N3 has
    assert np.argmax(counts[:, 2] > 0) <= first


def test_falling_below_set_point_turns_counterclockwise():
    trace = 54.0 - 0.5 * np.arange(200) * 0.1
    _, cmds, counts = run_trace(CFG, trace)
    assert counts[:, 5].sum() > 0 and counts[:, 4].sum() == 0
    first = int(np.argmax(counts[:, 5] > 0))
    assert cmds[first].turn == Turn.CCW_FIXED


def test_raster_matches_counts():
    s0 = NetworkState.initial(CFG, 40.0)
    _, _, res = network_step(s0, CFG, 40.0, record_raster=True)
    assert res.raster.shape == (100, 7)
    assert np.array_equal(res.raster.sum(axis=0), res.counts)


def test_single_spike_quantum_option():
    cfg = NetworkConfig(turn_per_spike=False)
    trace = 56.0 + 0.5 * np.arange(200) * 0.1
    _, cmds, _ = run_trace(cfg, trace)
    assert all(c.quanta == 1 for c in cmds if c.turn in (Turn.CW_FIXED, Turn.CCW_FIXED))


def test_obstacle_halt_is_terminal():
    obs = NetworkConfig.obstacle_default()
    state = NetworkState.initial(obs, 40.0)
    state, cmds, _ = run_trace(obs, [40.0] * 5 + [15.0] * 5 + [40.0] * 20, state=state)
    halt = [i for i, c in enumerate(cmds) if c.turn == Turn.HALT]
    assert halt and halt[0] >= 5
    assert all(c.turn == Turn.HALT and c.speed == Speed.ZERO for c in cmds[halt[0]:])
    assert state.halted


# --- calibration -------------------------------------------------------------------


def test_coincidence_bias_is_an_and_gate():
    bias = calibrate_coincidence_bias(CFG.decision, CFG.kernel, (1.0, 1.0))
    assert bias < 0
    one = probe_spikes(CFG.decision, CFG.kernel, [1.0], [10.0], bias, 10.0)
    other = probe_spikes(CFG.decision, CFG.kernel, [1.0], [10.0], bias, 10.0, [0.05])
    both = probe_spikes(CFG.decision, CFG.kernel, [1.0, 1.0], [10.0, 2.0], bias, 10.0, [0.0, 0.03])
    assert one.size == 0 and other.size == 0 and both.size > 0


def test_coincidence_bias_rejects_impossible_weights():
    with pytest.raises(CalibrationError):
        calibrate_coincidence_bias(LifParams(), SynapseKernelParams(peak_scale=0.01), (1.0, 1.0))


def test_explorer_is_gated_by_detectors():
    assert explorer_rate(CFG, {"w17": 10.0}) > 0.0
    assert explorer_rate(CFG, {"w17": 10.0, "w37": 2.0}) == 0.0
    assert explorer_rate(CFG, {"w27": 10.0, "w47": 2.0}) == 0.0


def test_explorer_bias_hits_target_rate():
    bias = calibrate_explorer_bias(CFG, target_rate=1.0)
    assert explorer_rate(CFG, {"w17": 10.0}, bias=bias) == pytest.approx(1.0, abs=0.1)
    assert explorer_rate(CFG, {"w17": 10.0}, bias=bias + 0.05) >= 1.0


def test_raster_csv(tmp_path):
    counts = np.array([[0, 1, 0, 0, 0, 0, 1], [1, 0, 0, 0, 0, 0, 0]])
    path = tmp_path / "r.csv"
    write_raster_csv([0.1, 0.2], [40.0, 41.0], counts, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,C,s1,s2,s3,s4,s5,s6,s7"
    assert lines[1] == "0.1,40,0,1,0,0,0,0,1"


def test_probe_streams_stop():
    lif = LifParams()
    w, rate = [5.0], [10.0]
    full = probe_spikes(lif, CFG.kernel, w, rate, 0.0, 5.0)
    cut = probe_spikes(lif, CFG.kernel, w, rate, 0.0, 5.0, stops=[2.0])
    assert full.size > cut.size > 0
    assert cut.max() < 2.5  # only the decaying kernel tail outlives the stream


def test_gating_rate_is_the_silencing_boundary():
    r = calibrate_gating_rate(CFG)
    exc, inh = CFG.weights["w17"], CFG.weights["w37"]
    above = probe_spikes(CFG.explorer, CFG.kernel, [exc, inh], [10.0, r * 1.05], CFG.bias_7, 10.0)
    below = [
        probe_spikes(CFG.explorer, CFG.kernel, [exc, inh], [10.0, r * 0.8], CFG.bias_7, 10.0, [0.0, ph]).size
        for ph in np.linspace(0, 1 / (r * 0.8), 8, endpoint=False)
    ]
    assert above.size == 0 and max(below) > 0

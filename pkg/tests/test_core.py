import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snn_chemotaxis.core import (
    InvalidStateError,
    LifParams,
    LifState,
    SpikeTrain,
    SynapseKernelParams,
    lif_isi_closed_form,
    lif_step,
    simulate_lif,
    synapse_current,
)

P = LifParams()


def test_rest_is_equilibrium():
    s = LifState.at_rest(P)
    for _ in range(1000):
        s = lif_step(s, P, 0.0, 0.0, 1e-3)
    assert s.potential == P.rest_potential
    assert not s.spiked_now


@pytest.mark.parametrize("i_app", [1.2, 1.5, 3.0])
def test_period_matches_closed_form(i_app):
    dt = 1e-4
    _, spikes = simulate_lif(P, i_app, dt, 40000)
    period = np.diff(spikes).mean()
    expected = -(P.capacitance / P.leak_conductance) * math.log(1 - P.rheobase / i_app) * 1e-3
    assert expected == pytest.approx(lif_isi_closed_form(P, i_app))
    # the reset step adds one dt per cycle
    assert period == pytest.approx(expected, rel=0.02)


def test_subthreshold_converges_without_spiking():
    i_app = 0.8  # V_inf = -54 mV < V_T
    trace, spikes = simulate_lif(P, i_app, 1e-3, 2000)
    assert spikes.size == 0
    assert np.all(np.diff(trace) >= 0)
    assert trace[-1] == pytest.approx(P.rest_potential + i_app / P.leak_conductance, abs=1e-3)
    assert lif_isi_closed_form(P, i_app) == math.inf


def test_reset_contract():
    s = LifState.at_rest(P)
    prev = s
    n_spikes = 0
    for _ in range(5000):
        s = lif_step(prev, P, 2.0, 0.0, 1e-3)
        if prev.spiked_now:
            # starts from V_0: one Euler step from rest
            assert s.potential == pytest.approx(P.rest_potential + 1.0 * 2.0 / P.capacitance)
        if s.spiked_now:
            n_spikes += 1
            assert s.potential == P.spike_value
        prev = s
    assert n_spikes > 10


def test_inhibition_can_push_below_rest():
    s = lif_step(LifState.at_rest(P), P, 0.0, -1.0, 1e-3)
    assert s.potential < P.rest_potential


def test_euler_convergence_nth_spike():
    dt = 1e-4
    _, a = simulate_lif(P, 1.5, dt, 20000)
    _, b = simulate_lif(P, 1.5, dt / 2, 40000)
    assert abs(a[9] - b[9]) < dt * 10  # ten spikes, one reset step each


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_nonfinite_rejected(bad):
    with pytest.raises(InvalidStateError):
        lif_step(LifState(bad), P, 0.0, 0.0, 1e-3)
    with pytest.raises(InvalidStateError):
        lif_step(LifState.at_rest(P), P, bad, 0.0, 1e-3)


@pytest.mark.parametrize("dt", [0.0, -1e-3])
def test_bad_dt(dt):
    with pytest.raises(ValueError):
        lif_step(LifState.at_rest(P), P, 0.0, 0.0, dt)


def test_param_invariants():
    with pytest.raises(ValueError):
        LifParams(capacitance=0)
    with pytest.raises(ValueError):
        LifParams(threshold=-80)
    with pytest.raises(ValueError):
        SynapseKernelParams(tau_slow=1.0, tau_fast=5.0)
    with pytest.raises(ValueError):
        SpikeTrain((0.2, 0.1))


K = SynapseKernelParams()


def test_kernel_zero_at_spike_time():
    assert synapse_current(K, 1.0, SpikeTrain((0.5,)), 0.5) == 0.0


def test_kernel_peak_location():
    t_star = K.peak_delay_ms
    assert t_star == pytest.approx(5 * 1 / 4 * math.log(5))
    grid = np.arange(0.0, 20.0, 0.001)
    vals = [synapse_current(K, 1.0, SpikeTrain((0.0,)), g * 1e-3) for g in grid]
    assert abs(grid[int(np.argmax(vals))] - t_star) <= 0.001


def test_weight_sign_mirrors():
    train = SpikeTrain((0.0, 0.003, 0.004))
    a = synapse_current(K, 1.0, train, 0.01)
    b = synapse_current(K, -1.0, train, 0.01)
    assert a > 0 and b == -a


def test_history_window_drops_old_spikes():
    train = SpikeTrain((0.0,))
    assert synapse_current(K, 1.0, train, 0.051) == 0.0
    assert synapse_current(K, 1.0, train, 0.049) > 0.0


def test_future_spike_rejected():
    with pytest.raises(ValueError):
        synapse_current(K, 1.0, SpikeTrain((1.0,)), 0.5)


times = st.lists(st.floats(0.0, 0.05, allow_nan=False), min_size=1, max_size=8, unique=True).map(sorted)


@settings(max_examples=100, deadline=None)
@given(a=times, b=times, lag=st.floats(1e-4, 0.05))
def test_superposition(a, b, lag):
    if set(a) & set(b):
        return
    ta, tb = SpikeTrain(tuple(a)), SpikeTrain(tuple(b))
    t = max(a[-1], b[-1]) + lag
    whole = synapse_current(K, 0.7, ta.merged(tb), t)
    parts = synapse_current(K, 0.7, ta, t) + synapse_current(K, 0.7, tb, t)
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(lag=st.floats(1e-6, 0.04))
def test_kernel_positive_after_spike(lag):
    assert synapse_current(K, 1.0, SpikeTrain((0.0,)), lag) > 0.0

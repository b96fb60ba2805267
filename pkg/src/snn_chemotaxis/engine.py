"""Compiled closed-loop episode simulator.

The loop here is the fast path used by batch experiments. It is assembled
from the same jitted primitives as the public step functions (``sense`` via
``corrupt``, ``network_step`` via ``network_substeps``/``decode``,
``apply_command`` via ``turned_heading``, ``integrate_position`` via
``move``), and consumes the random stream in the same order, so a
step-by-step run through the public API reproduces it exactly.

Random stream order per episode: one uniform for the initial heading (plus
one for the first run length under the Levy strategy); then per behavioral
step three uniforms for the sensor when noise is active and one per random
turn. The Levy forager draws a heading and then a run length at each turn.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .arena import corrupt, field_value
from .ase import P_V0, P_VT, S_V, ase_advance
from .kinematics import move, turned_heading, wrap_angle
from .network import N_NEURONS, SETTER_EXPLORE, SETTER_TRACK, decode, network_substeps

STRATEGY_SNN, STRATEGY_GRADED, STRATEGY_LEVY = 0, 1, 2

# graded parameter layout
G_SCALE, G_GAIN, G_B5, G_B6, G_B7, G_TAU, G_LEVEL = range(7)
# levy parameter layout
L_SMIN, L_SMAX, L_SPEED = range(3)

# trajectory columns
T_T, T_X, T_Y, T_HEADING, T_SPEED, T_SENSED, T_CLEAN = range(7)
N_TRAJ = 7


@njit(cache=True)
def levy_length(s_min, s_max, u):
    """Inverse CDF of the density proportional to l^-2 on [s_min, s_max]."""
    return s_min * s_max / (s_max - u * (s_max - s_min))


@njit(cache=True)
def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


@njit(cache=True)
def graded_substeps(ase_s, ase_p, act, gp, W, upper, lower, has_n6, conc, n_sub, dt):
    """Advance the graded network over one reading; updates ``act`` (a5, a6, a7) in place."""
    for k in range(n_sub):
        ase_advance(ase_s[0], ase_p[0], conc, dt, False)
        ase_advance(ase_s[1], ase_p[1], conc, dt, False)
    scale = gp[G_SCALE]
    a = np.zeros(N_NEURONS)
    a[0] = math.tanh(max(conc - upper, 0.0) / scale)
    a[1] = math.tanh(max(lower - conc, 0.0) / scale)
    for j in range(2):
        span = ase_p[j, P_VT] - ase_p[j, P_V0]
        a[2 + j] = max(ase_s[j, S_V] - ase_p[j, P_V0], 0.0) / span
    decay = math.exp(-n_sub * dt / gp[G_TAU])
    for post in range(4, N_NEURONS):
        if post == 5 and not has_n6:
            act[1] = 0.0
            continue
        drive = gp[G_B5 + post - 4]
        for pre in range(4):
            drive += W[post, pre] * a[pre]
        target = sigmoid(gp[G_GAIN] * drive)
        act[post - 4] = target + (act[post - 4] - target) * decay


@njit(cache=True)
def graded_decode(act, prev, level, last_setter):
    """Commands fire on upward crossings of ``level`` during the step."""
    up5 = prev[0] < level <= act[0]
    up6 = prev[1] < level <= act[1]
    if up5 or up6:
        if up5 and (not up6 or act[0] >= act[1]):
            return 1, 1, 1, SETTER_TRACK
        return 2, 1, 1, SETTER_TRACK
    if prev[2] < level <= act[2]:
        return 3, 0, 1, SETTER_EXPLORE
    speed = 1 if last_setter == SETTER_TRACK else 0
    return 0, speed, 0, last_setter


@njit(cache=True)
def run_kernel(
    strategy, n_steps, dt, n_sub, neuron_dt,
    bumps, baseline, xmin, ymin, xmax, ymax, x0, y0,
    noise_active, noise_p, noise_mag, uniforms,
    lif_v, lif_spk, ase_s, tr_slow, tr_fast,
    lif_p, ase_p, W, bias, i_app0, upper, lower, has_n6, obstacle,
    peak, decay_slow, decay_fast,
    gp, lp, v_explore, v_track, fixed_rad, half_rad,
    set_point, tolerance, goal_level, avoid_level,
    traj, counts_out, per_spike=True,
):
    record = traj.shape[0] > n_steps
    ptr = 0
    heading = wrap_angle((2.0 * uniforms[ptr] - 1.0) * math.pi)
    ptr += 1
    remaining = 0.0
    if strategy == STRATEGY_LEVY:
        remaining = levy_length(lp[L_SMIN], lp[L_SMAX], uniforms[ptr])
        ptr += 1
        speed = lp[L_SPEED]
    else:
        speed = v_explore
    x = x0
    y = y0
    t = 0.0
    last_setter = 0
    halted = False
    halt_time = -1.0
    act = np.zeros(3)
    prev = np.zeros(3)
    counts = np.zeros(N_NEURONS, dtype=np.int64)
    last_idx = np.zeros(N_NEURONS, dtype=np.int64)
    no_raster = np.zeros((0, N_NEURONS), dtype=np.bool_)

    clean = field_value(bumps, baseline, x, y)
    success = False
    t_hit = -1.0
    dev_sum = 0.0
    dev_sq = 0.0
    n_window = 0
    avoid_entries = 0
    max_clean = clean
    path = 0.0

    def_hit = abs(clean - set_point) <= tolerance if not obstacle else clean <= goal_level
    if def_hit:
        success = True
        t_hit = 0.0
        d = abs(clean - set_point)
        dev_sum += d
        dev_sq += d * d
        n_window += 1
    if obstacle and clean > avoid_level:
        avoid_entries += 1
    if record:
        traj[0, T_T] = 0.0
        traj[0, T_X] = x
        traj[0, T_Y] = y
        traj[0, T_HEADING] = heading
        traj[0, T_SPEED] = speed
        traj[0, T_SENSED] = clean
        traj[0, T_CLEAN] = clean

    steps_done = 0
    for step in range(n_steps):
        reading = clean
        turn = 0
        quanta = 0
        if strategy != STRATEGY_LEVY:
            if noise_active:
                reading = corrupt(clean, noise_p, noise_mag, uniforms[ptr], uniforms[ptr + 1], uniforms[ptr + 2])
                ptr += 3
            if strategy == STRATEGY_SNN:
                network_substeps(
                    lif_v, lif_spk, ase_s, tr_slow, tr_fast,
                    lif_p, ase_p, W, bias, i_app0, upper, lower, has_n6,
                    peak, decay_slow, decay_fast,
                    reading, n_sub, neuron_dt, counts, last_idx, no_raster,
                )
                turn, spd, quanta, last_setter, halted = decode(counts, last_idx, obstacle, last_setter, halted)
                if not per_spike and (turn == 1 or turn == 2):
                    quanta = 1
                if record:
                    for n in range(N_NEURONS):
                        counts_out[step, n] = counts[n]
            else:
                prev[:] = act
                graded_substeps(ase_s, ase_p, act, gp, W, upper, lower, has_n6, reading, n_sub, neuron_dt)
                turn, spd, quanta, last_setter = graded_decode(act, prev, gp[G_LEVEL], last_setter)
            if turn == 4:
                speed = 0.0
                halt_time = t
                steps_done = step + 1
                if record:
                    traj[step + 1, T_T] = t + dt
                    traj[step + 1, T_X] = x
                    traj[step + 1, T_Y] = y
                    traj[step + 1, T_HEADING] = heading
                    traj[step + 1, T_SPEED] = 0.0
                    traj[step + 1, T_SENSED] = reading
                    traj[step + 1, T_CLEAN] = clean
                break
            u = 0.5
            if turn == 3:
                u = uniforms[ptr]
                ptr += 1
            heading = turned_heading(heading, turn, quanta, fixed_rad, half_rad, u)
            if turn != 0:
                speed = v_track if spd == 1 else v_explore
        x, y, heading = move(x, y, heading, speed, dt, xmin, ymin, xmax, ymax)
        path += speed * dt
        if strategy == STRATEGY_LEVY:
            remaining -= speed * dt
            if remaining <= 0.0:
                heading = wrap_angle((2.0 * uniforms[ptr] - 1.0) * math.pi)
                remaining = levy_length(lp[L_SMIN], lp[L_SMAX], uniforms[ptr + 1])
                ptr += 2
        t = (step + 1) * dt
        clean = field_value(bumps, baseline, x, y)
        if clean > max_clean:
            max_clean = clean
        if obstacle and clean > avoid_level:
            avoid_entries += 1
        if not success:
            hit = abs(clean - set_point) <= tolerance if not obstacle else clean <= goal_level
            if hit:
                success = True
                t_hit = t
        if success:
            d = abs(clean - set_point)
            dev_sum += d
            dev_sq += d * d
            n_window += 1
        if record:
            traj[step + 1, T_T] = t
            traj[step + 1, T_X] = x
            traj[step + 1, T_Y] = y
            traj[step + 1, T_HEADING] = heading
            traj[step + 1, T_SPEED] = speed
            traj[step + 1, T_SENSED] = reading
            traj[step + 1, T_CLEAN] = clean
        steps_done = step + 1

    return (
        success, t_hit, dev_sum, dev_sq, n_window, halted, halt_time,
        avoid_entries, max_clean, steps_done, path, ptr,
    )

"""Trajectory generation under scripted open-loop controls, plus file I/O.

Trajectory datasets are line-delimited JSON: one header record, then one
record per trajectory carrying its parameter vector, states matrix, and
controls matrix. Floats are serialized with shortest round-trip repr, so
a save/load cycle is bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..core import SimulationDiverged, Trajectory


def scripted_controls(control_dim: int, horizon: int, count: int, rng_seed: int = 0,
                      amplitude: float = 0.2) -> np.ndarray:
    """Open-loop control scripts: phase-shifted sinusoidal rate commands.

    Per-trajectory random phases and channel amplitudes, deterministic
    per seed. Returns (count, horizon, control_dim).
    """
    rng = np.random.default_rng(rng_seed)
    t = np.arange(horizon)[None, :, None]
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(count, 1, control_dim))
    amp = amplitude * rng.uniform(0.5, 1.0, size=(count, 1, control_dim))
    period = rng.uniform(10.0, 30.0, size=(count, 1, control_dim))
    return amp * np.sin(2.0 * np.pi * t / period + phase)


def generate_trajectories(sim, theta, control_script, horizon: int, count: int,
                          rng_seed: int = 0):
    """Roll out `count` trajectories of `horizon` steps from theta.

    `control_script` is either a precomputed (count, horizon, control_dim)
    array or None, in which case scripted sinusoidal commands are drawn
    from the seed. Diverged rollouts are truncated and flagged. Returns a
    list of (Trajectory, diverged_flag).
    """
    if horizon < 0 or count < 1:
        raise ValueError("need horizon >= 0 and count >= 1")
    theta = np.asarray(theta, dtype=float)
    if control_script is None:
        control_script = scripted_controls(sim.control_dim, horizon, count, rng_seed)
    control_script = np.asarray(control_script, dtype=float)
    out = []
    for k in range(count):
        states = [sim.initial_state(theta)]
        diverged = False
        used = []
        for i in range(horizon):
            try:
                states.append(sim.step(states[-1], control_script[k, i], theta))
            except SimulationDiverged:
                diverged = True
                break
            used.append(control_script[k, i])
        controls = np.array(used).reshape(len(used), sim.control_dim)
        out.append((Trajectory(np.array(states), controls), diverged))
    return out


def save_trajectories(path, header: dict, records) -> None:
    """Write a trajectory dataset: records are (theta, Trajectory, diverged)."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"type": "header", **header}) + "\n")
        for theta, traj, diverged in records:
            rec = {
                "theta": np.asarray(theta, dtype=float).tolist(),
                "states": traj.states.tolist(),
                "controls": traj.controls.tolist(),
                "diverged": bool(diverged),
            }
            fh.write(json.dumps(rec) + "\n")


def load_trajectories(path):
    """Inverse of save_trajectories: (header, list of (theta, Trajectory, diverged))."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    header = lines[0]
    records = []
    for rec in lines[1:]:
        states = np.array(rec["states"], dtype=float)
        controls = np.array(rec["controls"], dtype=float)
        if controls.size == 0:
            controls = controls.reshape(0, 0)
        records.append(
            (np.array(rec["theta"], dtype=float), Trajectory(states, controls),
             rec["diverged"])
        )
    return header, records

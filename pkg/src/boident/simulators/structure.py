"""Planar compliant rod-and-cable structure simulator.

Three stiff rods (modeled as near-rigid axial springs between endpoint
point masses) stand on the ground, tied together by six damped elastic
cables whose rest lengths are actuated through rate-limited offsets.
Ground contact is a penalty spring with damping plus regularized Coulomb
friction. Integration is semi-implicit (symplectic) Euler.

Twelve named physical parameters drive the dynamics; two of them
(rod_spacing, motor_friction) are accepted but deliberately unused by
the equations of motion, which makes them unidentifiable from data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import SimulationDiverged, Trajectory
from ..spaces import ParameterSpace, ground_truth_box

STRUCTURE_PARAM_NAMES = (
    "rod_density",
    "rod_radius",
    "payload_density",
    "payload_radius",
    "cable_stiffness",
    "cable_damping",
    "rod_length",
    "rod_spacing",
    "pretension",
    "max_tension",
    "target_velocity",
    "motor_friction",
)

INERT_PARAM_NAMES = ("rod_spacing", "motor_friction")

DEFAULT_TRUTH = np.array([500.0, 0.02, 600.0, 0.12, 500.0, 10.0, 1.0, 0.8, 3.0, 200.0, 0.1, 0.5])

# Geometry: rods 0 and 1 cross as the diagonals of a prestress-stable
# rectangle of perimeter cables; rod 2 hangs from the rectangle
# tips on two suspension cables. Nodes 0..5 = (foot A, tip A, foot B, tip B, beam left, beam right).
N_NODES = 6
RODS = ((0, 1), (2, 3), (4, 5))
CABLES = ((0, 2), (1, 3), (0, 3), (2, 1), (4, 3), (5, 1))
N_CABLES = len(CABLES)

# Fixed construction constants (not identification targets).
X_WIDTH_FRAC = 0.6          # rectangle width as a fraction of rod length
X_HEIGHT_FRAC = 0.8         # rectangle height; 0.6-0.8-1.0 keeps diagonals = rod length
BEAM_HEIGHT_FRAC = 0.5      # suspended-beam height; hangs below the rectangle tips
ROD_STIFFNESS = 1e4         # axial stiffness keeping rods near-rigid, N/m
ROD_DAMPING = 10.0          # axial damping of the rod springs, N s/m

STATE_DIM = 2 * 2 * N_NODES + N_CABLES  # positions, velocities, cable offsets


@dataclass(frozen=True)
class StructureParams:
    rod_density: float
    rod_radius: float
    payload_density: float
    payload_radius: float
    cable_stiffness: float
    cable_damping: float
    rod_length: float
    rod_spacing: float
    pretension: float
    max_tension: float
    target_velocity: float
    motor_friction: float

    def __post_init__(self):
        for name in STRUCTURE_PARAM_NAMES:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.pretension >= self.max_tension:
            raise ValueError("pretension must be below max_tension")

    @classmethod
    def from_vector(cls, theta) -> "StructureParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(STRUCTURE_PARAM_NAMES),):
            raise ValueError(f"expected {len(STRUCTURE_PARAM_NAMES)} parameters")
        return cls(**dict(zip(STRUCTURE_PARAM_NAMES, theta)))

    def node_mass(self) -> float:
        rod_mass = self.rod_density * np.pi * self.rod_radius**2 * self.rod_length
        payload_mass = self.payload_density * (4.0 / 3.0) * np.pi * self.payload_radius**3
        return 0.5 * rod_mass + payload_mass / N_NODES


def default_structure_space(frac: float = 0.5, grid_res: int = 100) -> ParameterSpace:
    """Broad validity box around the default ground truth."""
    base = ParameterSpace(STRUCTURE_PARAM_NAMES, DEFAULT_TRUTH * 0.5, DEFAULT_TRUTH * 1.5,
                          grid_res)
    if frac == 0.5:
        return base
    return ground_truth_box(base, DEFAULT_TRUTH, frac)


def _initial_positions(rod_length: float) -> np.ndarray:
    w = X_WIDTH_FRAC * rod_length
    h = X_HEIGHT_FRAC * rod_length
    beam_y = BEAM_HEIGHT_FRAC * rod_length
    half = 0.5 * rod_length
    return np.array([
        [0.0, 0.0],                  # foot A
        [w, h],                      # tip A
        [w, 0.0],                    # foot B
        [0.0, h],                    # tip B
        [0.5 * w - half, beam_y],    # beam left
        [0.5 * w + half, beam_y],    # beam right
    ])


def _incidence(idx: np.ndarray) -> np.ndarray:
    """Signed node-pair incidence matrix: +1 at the first node, -1 at the second."""
    inc = np.zeros((N_NODES, len(idx)))
    inc[idx[:, 0], np.arange(len(idx))] = 1.0
    inc[idx[:, 1], np.arange(len(idx))] = -1.0
    return inc


def com_height(state) -> float:
    """Height of the center of mass (all node masses are equal)."""
    pos = np.asarray(state, dtype=float)[: 2 * N_NODES].reshape(N_NODES, 2)
    return float(np.mean(pos[:, 1]))


class StructureSimulator:
    """Deterministic black-box step function over the structure state.

    State layout: [positions (12) | velocities (12) | cable offsets (6)].
    Controls: commanded cable rest-length rates (6), clipped per step to
    the target_velocity parameter. One step advances `substeps` internal
    integration steps of size dt.
    """

    state_dim = STATE_DIM
    control_dim = N_CABLES

    def __init__(
        self,
        dt: float = 1e-3,
        substeps: int = 20,
        contact: bool = True,
        cables_active: bool = True,
        gravity: float = 9.81,
        rod_stiffness: float = ROD_STIFFNESS,
        rod_damping: float = ROD_DAMPING,
        ground_stiffness: float = 1e4,
        ground_damping: float = 50.0,
        ground_friction: float = 0.5,
        friction_vel_eps: float = 0.02,
        param_space: ParameterSpace | None = None,
    ):
        self.dt = dt
        self.substeps = substeps
        self.contact = contact
        self.cables_active = cables_active
        self.gravity = gravity
        self.rod_stiffness = rod_stiffness
        self.rod_damping = rod_damping
        self.ground_stiffness = ground_stiffness
        self.ground_damping = ground_damping
        self.ground_friction = ground_friction
        self.friction_vel_eps = friction_vel_eps
        self.param_space = param_space if param_space is not None else default_structure_space()
        self._cable_idx = np.array(CABLES)
        self._rod_idx = np.array(RODS)
        self._cable_inc = _incidence(self._cable_idx)
        self._rod_inc = _incidence(self._rod_idx)

    # -- state packing -------------------------------------------------

    @staticmethod
    def unpack(state):
        state = np.asarray(state, dtype=float)
        pos = state[: 2 * N_NODES].reshape(N_NODES, 2)
        vel = state[2 * N_NODES : 4 * N_NODES].reshape(N_NODES, 2)
        offsets = state[4 * N_NODES :]
        return pos, vel, offsets

    @staticmethod
    def pack(pos, vel, offsets) -> np.ndarray:
        return np.concatenate([pos.ravel(), vel.ravel(), offsets])

    def initial_state(self, theta) -> np.ndarray:
        p = StructureParams.from_vector(theta)
        pos = _initial_positions(p.rod_length)
        return self.pack(pos, np.zeros_like(pos), np.zeros(N_CABLES))

    def cable_rest_lengths(self, theta) -> np.ndarray:
        """Unactuated rest lengths: built geometry minus pretension slack."""
        return self.cable_rest_lengths_from(StructureParams.from_vector(theta))

    # -- dynamics ------------------------------------------------------

    def _pair_forces(self, pos, vel, idx, stiffness, damping, rest, t_min, t_max):
        """Axial spring-damper forces for node pairs; returns (N_NODES, 2)."""
        i, j = idx[:, 0], idx[:, 1]
        d = pos[j] - pos[i]
        length = np.linalg.norm(d, axis=1)
        unit = d / np.maximum(length, 1e-12)[:, None]
        rate = np.sum((vel[j] - vel[i]) * unit, axis=1)
        tension = np.clip(stiffness * (length - rest) + damping * rate, t_min, t_max)
        f = tension[:, None] * unit  # positive tension pulls i toward j
        forces = np.zeros((N_NODES, 2))
        np.add.at(forces, i, f)
        np.add.at(forces, j, -f)
        return forces

    def _forces(self, pos, vel, offsets, p: StructureParams):
        forces = np.zeros((N_NODES, 2))
        mass = p.node_mass()
        forces[:, 1] -= mass * self.gravity

        forces += self._pair_forces(
            pos, vel, self._rod_idx, self.rod_stiffness, self.rod_damping,
            np.full(len(RODS), p.rod_length), -np.inf, np.inf,
        )
        if self.cables_active:
            rest = self.cable_rest_lengths_from(p) + offsets
            forces += self._pair_forces(
                pos, vel, self._cable_idx, p.cable_stiffness, p.cable_damping,
                rest, 0.0, p.max_tension,
            )
        if self.contact:
            pen = np.minimum(pos[:, 1], 0.0)
            touching = pen < 0.0
            normal = np.maximum(
                -self.ground_stiffness * pen - self.ground_damping * vel[:, 1] * touching, 0.0
            ) * touching
            forces[:, 1] += normal
            slip = np.clip(vel[:, 0] / self.friction_vel_eps, -1.0, 1.0)
            forces[:, 0] -= self.ground_friction * normal * slip
        return forces, mass

    def cable_rest_lengths_from(self, p: StructureParams) -> np.ndarray:
        pos = _initial_positions(p.rod_length)
        i, j = self._cable_idx[:, 0], self._cable_idx[:, 1]
        geom = np.linalg.norm(pos[j] - pos[i], axis=1)
        return geom - p.pretension / p.cable_stiffness

    def step(self, x, u, theta) -> np.ndarray:
        p = StructureParams.from_vector(theta)
        pos, vel, offsets = self.unpack(x)
        pos, vel, offsets = pos.copy(), vel.copy(), offsets.copy()
        u = np.asarray(u, dtype=float)
        if u.shape != (N_CABLES,):
            raise ValueError(f"controls must have shape ({N_CABLES},)")
        rate = np.clip(u, -p.target_velocity, p.target_velocity)
        for _ in range(self.substeps):
            forces, mass = self._forces(pos, vel, offsets, p)
            vel += self.dt * forces / mass
            pos += self.dt * vel
            offsets += self.dt * rate
        if not np.all(np.isfinite(pos)) or not np.all(np.isfinite(vel)) \
                or np.max(np.abs(pos)) > 1e3:
            raise SimulationDiverged("structure state diverged")
        return self.pack(pos, vel, offsets)

    # -- batched stepping ------------------------------------------------

    def _pair_forces_batch(self, pos, vel, idx, inc, stiffness, damping, rest,
                           t_min, t_max):
        """Batched axial spring-damper forces; pos/vel (B, N_NODES, 2)."""
        i, j = idx[:, 0], idx[:, 1]
        d = pos[:, j] - pos[:, i]
        length = np.linalg.norm(d, axis=2)
        unit = d / np.maximum(length, 1e-12)[..., None]
        rate = np.sum((vel[:, j] - vel[:, i]) * unit, axis=2)
        tension = np.clip(stiffness * (length - rest) + damping * rate, t_min, t_max)
        f = tension[..., None] * unit
        return np.einsum("nk,bkc->bnc", inc, f)

    def _forces_batch(self, pos, vel, offsets, p: StructureParams):
        forces = np.zeros_like(pos)
        mass = p.node_mass()
        forces[..., 1] -= mass * self.gravity

        forces += self._pair_forces_batch(
            pos, vel, self._rod_idx, self._rod_inc, self.rod_stiffness,
            self.rod_damping, p.rod_length, -np.inf, np.inf,
        )
        if self.cables_active:
            rest = self.cable_rest_lengths_from(p) + offsets
            forces += self._pair_forces_batch(
                pos, vel, self._cable_idx, self._cable_inc, p.cable_stiffness,
                p.cable_damping, rest, 0.0, p.max_tension,
            )
        if self.contact:
            pen = np.minimum(pos[..., 1], 0.0)
            touching = pen < 0.0
            normal = np.maximum(
                -self.ground_stiffness * pen - self.ground_damping * vel[..., 1] * touching,
                0.0,
            ) * touching
            forces[..., 1] += normal
            slip = np.clip(vel[..., 0] / self.friction_vel_eps, -1.0, 1.0)
            forces[..., 0] -= self.ground_friction * normal * slip
        return forces, mass

    def step_batch(self, xs, us, theta):
        """Step a batch of independent states under per-row controls.

        xs: (B, state_dim); us: (B, control_dim). Returns (next states,
        per-row diverged mask) instead of raising, so one blown-up row
        does not abort the rest of the batch.
        """
        p = StructureParams.from_vector(theta)
        xs = np.asarray(xs, dtype=float)
        us = np.asarray(us, dtype=float)
        b = xs.shape[0]
        if xs.shape != (b, STATE_DIM) or us.shape != (b, N_CABLES):
            raise ValueError("expected xs (B, state_dim) and us (B, control_dim)")
        pos = xs[:, : 2 * N_NODES].reshape(b, N_NODES, 2).copy()
        vel = xs[:, 2 * N_NODES : 4 * N_NODES].reshape(b, N_NODES, 2).copy()
        offsets = xs[:, 4 * N_NODES :].copy()
        rate = np.clip(us, -p.target_velocity, p.target_velocity)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.substeps):
                forces, mass = self._forces_batch(pos, vel, offsets, p)
                vel += self.dt * forces / mass
                pos += self.dt * vel
                offsets += self.dt * rate
            finite = (
                np.isfinite(pos).all(axis=(1, 2)) & np.isfinite(vel).all(axis=(1, 2))
            )
            bounded = np.where(finite, np.abs(pos).max(axis=(1, 2)) <= 1e3, False)
        states = np.concatenate(
            [pos.reshape(b, -1), vel.reshape(b, -1), offsets], axis=1
        )
        return states, ~(finite & bounded)

    # -- bookkeeping ---------------------------------------------------

    def cable_tensions(self, state, theta) -> np.ndarray:
        """Current cable tensions (N), clamped exactly as in the dynamics."""
        p = StructureParams.from_vector(theta)
        pos, vel, offsets = self.unpack(state)
        i, j = self._cable_idx[:, 0], self._cable_idx[:, 1]
        d = pos[j] - pos[i]
        length = np.linalg.norm(d, axis=1)
        unit = d / np.maximum(length, 1e-12)[:, None]
        rate = np.sum((vel[j] - vel[i]) * unit, axis=1)
        rest = self.cable_rest_lengths_from(p) + offsets
        raw = p.cable_stiffness * (length - rest) + p.cable_damping * rate
        return np.clip(raw, 0.0, p.max_tension)

    def kinetic_energy(self, state, theta) -> float:
        p = StructureParams.from_vector(theta)
        _, vel, _ = self.unpack(state)
        return float(0.5 * p.node_mass() * np.sum(vel**2))

    def energy(self, state, theta) -> float:
        """Kinetic + gravitational + elastic (rods, taut cables, ground) energy."""
        p = StructureParams.from_vector(theta)
        pos, vel, offsets = self.unpack(state)
        mass = p.node_mass()
        ke = 0.5 * mass * np.sum(vel**2)
        pe_grav = mass * self.gravity * np.sum(pos[:, 1])

        i, j = self._rod_idx[:, 0], self._rod_idx[:, 1]
        rod_len = np.linalg.norm(pos[j] - pos[i], axis=1)
        pe_rod = 0.5 * self.rod_stiffness * np.sum((rod_len - p.rod_length) ** 2)

        pe_cable = 0.0
        if self.cables_active:
            i, j = self._cable_idx[:, 0], self._cable_idx[:, 1]
            clen = np.linalg.norm(pos[j] - pos[i], axis=1)
            ext = np.maximum(clen - (self.cable_rest_lengths_from(p) + offsets), 0.0)
            pe_cable = 0.5 * p.cable_stiffness * np.sum(ext**2)

        pe_ground = 0.0
        if self.contact:
            pen = np.minimum(pos[:, 1], 0.0)
            pe_ground = 0.5 * self.ground_stiffness * np.sum(pen**2)
        return float(ke + pe_grav + pe_rod + pe_cable + pe_ground)

    def rollout(self, theta, controls) -> Trajectory:
        controls = np.asarray(controls, dtype=float)
        states = [self.initial_state(theta)]
        for u in controls:
            states.append(self.step(states[-1], u, theta))
        return Trajectory(np.array(states), controls)

"""Theta-scheme time stepping, energy bookkeeping, and the discrete semigroup.

Each step solves (I + tau theta A) u_{k+1} = u_k + tau[(1-theta)(f_k - A u_k)
+ theta f_{k+1}] with the factor built once per (tau, theta).  theta is
restricted to [1/2, 1]: explicit stepping is excluded because the nonlocal
stiffness grows like h^(-2s).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularOperatorError
from .gridfn import GridFunction, extend_by_zero
from .operator import assemble_operator_matrix


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots u_k at t_k = k tau, all exterior-zero, u_0 the initial datum."""

    grid: object
    params: object
    theta: float
    tau: float
    times: np.ndarray
    snapshots: list

    @property
    def nt(self):
        return len(self.times) - 1

    def final(self):
        return self.snapshots[-1]

    def export_csv(self, out_dir, prefix="snapshot"):
        """One CSV per snapshot: node coordinates and value."""
        paths = []
        nodes = self.grid.nodes()
        for k, snap in enumerate(self.snapshots):
            path = f"{out_dir}/{prefix}_{k:04d}.csv"
            with open(path, "w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow([*(f"x{a}" for a in range(self.grid.ndim)), "u"])
                for pt, val in zip(nodes, snap.values.ravel()):
                    wr.writerow([f"{c:.17g}" for c in pt] + [f"{val:.17g}"])
            paths.append(path)
        return paths


def _source_at(f, t, grid):
    """Source as Omega vector at time t: constant, callable, or frame table."""
    if callable(f):
        val = f(t)
    else:
        val = f
    if isinstance(val, GridFunction):
        return val.values[grid.mask].astype(float)
    arr = np.asarray(val, float)
    if arr.shape == grid.shape:
        return arr[grid.mask]
    return arr.ravel()


class FrameSource:
    """Piecewise-linear interpolation in time between source frames."""

    def __init__(self, times, frames):
        self.times = np.asarray(times, float)
        self.frames = [np.asarray(fr, float) for fr in frames]
        if len(self.times) != len(self.frames) or len(self.times) < 1:
            raise ValueError("need matching nonempty times/frames")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("frame times must increase")

    @classmethod
    def from_csv(cls, times, paths):
        """Frames from single-column CSV files of Omega node values."""
        frames = [np.loadtxt(p, delimiter=",", ndmin=1) for p in paths]
        return cls(times, frames)

    def __call__(self, t):
        ts = self.times
        if t <= ts[0]:
            return self.frames[0]
        if t >= ts[-1]:
            return self.frames[-1]
        j = int(np.searchsorted(ts, t)) - 1
        w = (t - ts[j]) / (ts[j + 1] - ts[j])
        return (1 - w) * self.frames[j] + w * self.frames[j + 1]


def solve_parabolic(f, T, nt, theta, params, grid, matrix=None, u0=None):
    """Run the theta scheme from a zero (or supplied) initial datum."""
    if not 0.5 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [1/2, 1], got {theta}")
    if nt < 2:
        raise ValueError(f"need nt >= 2 steps, got {nt}")
    if matrix is None:
        matrix = assemble_operator_matrix(grid, params)
    A = matrix.matrix
    m = grid.n_omega
    tau = T / nt
    try:
        cho = scipy.linalg.cho_factor(np.eye(m) + tau * theta * A, lower=False,
                                      check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularOperatorError(f"step factorization failed: {exc}") from exc

    u = np.zeros(m) if u0 is None else _source_at(u0, 0.0, grid).copy()
    times = [0.0]
    snaps = [extend_by_zero(u, grid)]
    f_now = _source_at(f, 0.0, grid)
    for k in range(nt):
        t_next = (k + 1) * tau
        f_next = _source_at(f, t_next, grid)
        rhs = u + tau * ((1 - theta) * (f_now - A @ u) + theta * f_next)
        u = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
        times.append(t_next)
        snaps.append(extend_by_zero(u, grid))
        f_now = f_next
    return Trajectory(grid, params, theta, tau, np.array(times), snaps)


@dataclass(frozen=True)
class EnergyLedger:
    """Per-step records in the damped variables v = u e^(-t), g = f e^(-t)."""

    times: np.ndarray
    dissipation: np.ndarray     # running sum tau ||dv/dt||_2^2
    energy: np.ndarray          # B[v_k, v_k] + (v_k, v_k)
    source: np.ndarray          # running sum tau ||g_k||_2^2
    slack: float
    violation: bool

    CSV_HEADER = ("k", "t", "dissipation", "energy", "source_norm")

    def worst_ratio(self):
        ok = self.source > 0
        if not ok.any():
            return 0.0
        return float(((self.dissipation[ok] + self.energy[ok]) / self.source[ok]).max())

    def export_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(self.CSV_HEADER)
            for k in range(len(self.times)):
                wr.writerow([str(k), f"{self.times[k]:.17g}",
                             f"{self.dissipation[k]:.17g}",
                             f"{self.energy[k]:.17g}",
                             f"{self.source[k]:.17g}"])


def energy_report(traj, f, matrix=None, slack=None):
    """Discrete energy ledger of a trajectory.

    Flags a violation when dissipation-so-far plus current energy exceeds
    (1 + slack) times the source term at any step; the default slack is
    proportional to tau, reflecting the O(tau) perturbation the damping
    transform introduces in the discrete identity.
    """
    grid, params = traj.grid, traj.params
    if matrix is None:
        matrix = assemble_operator_matrix(grid, params)
    hN = grid.h ** grid.ndim
    tau = traj.tau
    if slack is None:
        slack = max(0.05, 2.0 * tau)
    nt = traj.nt
    diss = np.zeros(nt + 1)
    energy = np.zeros(nt + 1)
    source = np.zeros(nt + 1)
    v_prev = traj.snapshots[0].values[grid.mask] * math.exp(-traj.times[0])
    energy[0] = matrix.bilinear(v_prev, v_prev) + hN * float(v_prev @ v_prev)
    for k in range(1, nt + 1):
        t = traj.times[k]
        v = traj.snapshots[k].values[grid.mask] * math.exp(-t)
        g = _source_at(f, t, grid) * math.exp(-t)
        dv = (v - v_prev) / tau
        diss[k] = diss[k - 1] + tau * hN * float(dv @ dv)
        energy[k] = matrix.bilinear(v, v) + hN * float(v @ v)
        source[k] = source[k - 1] + tau * hN * float(g @ g)
        v_prev = v
    ok = source[1:] > 0
    violation = bool(np.any((diss[1:] + energy[1:])[ok] > (1.0 + slack) * source[1:][ok]))
    return EnergyLedger(traj.times.copy(), diss, energy, source, slack, violation)


def semigroup_apply(phi, t, nt, params, grid, matrix=None):
    """Approximate the homogeneous evolution semigroup by implicit Euler."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    vec = _source_at(phi, 0.0, grid).copy()
    if t == 0 or nt == 0:
        return extend_by_zero(vec, grid)
    if matrix is None:
        matrix = assemble_operator_matrix(grid, params)
    tau = t / nt
    m = grid.n_omega
    cho = scipy.linalg.cho_factor(np.eye(m) + tau * matrix.matrix, lower=False,
                                  check_finite=False)
    for _ in range(nt):
        vec = scipy.linalg.cho_solve(cho, vec, check_finite=False)
    return extend_by_zero(vec, grid)

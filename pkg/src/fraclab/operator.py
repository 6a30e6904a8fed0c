"""Pointwise fractional Laplacian and its Dirichlet-restricted matrix.

The singular integral is discretized with nonnegative weights (see
quadrature module), which makes the restricted matrix symmetric with the
M-matrix sign pattern: positive diagonal, nonpositive off-diagonal, and a
strictly positive action on the all-ones vector.  That structure carries
the discrete maximum principle used by the solvers and semigroup tests.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _threads
from .errors import MemoryBudgetError
from .gridfn import Grid, GridFunction
from .quadrature import (
    first_cell_moment,
    interior_weights_1d,
    sweep_1d,
    sweep_2d,
    tail_coefficient_1d,
)

DEFAULT_DENSE_CAP = 4500  # max Omega nodes for a dense matrix

_MAGIC = b"FLMAT1\x00\x00"


def normalization_constant(ndim, s):
    """Normalization of the singular-integral operator.

    s * 4^s * Gamma(s + ndim/2) / (pi^(ndim/2) * Gamma(1 - s)).
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if ndim < 1 or ndim != int(ndim):
        raise ValueError(f"dimension must be a positive integer, got {ndim}")
    return (
        s * 2.0 ** (2 * s) * math.gamma((2 * s + ndim) / 2.0)
        / (math.pi ** (ndim / 2.0) * math.gamma(1.0 - s))
    )


@dataclass(frozen=True)
class FractionalParams:
    ndim: int
    s: float
    cns: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cns", normalization_constant(self.ndim, self.s))


def _padded(values, n, pad_value=0.0):
    if values.ndim == 1:
        out = np.full(3 * n - 2, pad_value)
        out[n - 1: 2 * n - 1] = values
    else:
        out = np.full((3 * n - 2, 3 * n - 2), pad_value)
        out[n - 1: 2 * n - 1, n - 1: 2 * n - 1] = values
    return out


def apply_fractional_laplacian(u, params, rows=None, out=None):
    """Evaluate the operator at every grid node of an exterior-zero function.

    Splits the principal value at radius h: the near field uses the
    second-difference Taylor correction with moment h^(2-2s)/(2-2s), the
    far field integrates the weighted second difference cell-exactly, and
    the part beyond the box is evaluated in closed form against the zero
    extension.
    """
    if not isinstance(u, GridFunction):
        raise TypeError("u must be a GridFunction")
    if not u.dirichlet:
        raise ValueError("u must be exterior-zero (Dirichlet-extended)")
    if params.ndim != u.grid.ndim:
        raise ValueError("params dimension does not match the grid")
    grid = u.grid
    n, h, s, C = grid.n, grid.h, params.s, params.cns
    vals = u.values

    if grid.ndim == 1:
        up = _padded(vals, n)

        def phi_row(i, K):
            plus = up[n + i: n + i + K]
            minus = up[n + i - K - 1: n + i - 1][::-1]
            return 2.0 * vals[i] - plus - minus

        result = np.zeros(n) if out is None else out
        sweep_1d(n, h, s, C,
                 phi_row,
                 lambda i: (2.0 * vals[i] - up[n + i] - up[n + i - 2]) / h ** 2,
                 lambda i: 2.0 * vals[i],
                 out=result, rows=rows)
    else:
        up = _padded(vals, n)
        win = 2 * n - 1

        def phi_window(ix, iy):
            w_plus = up[ix: ix + win, iy: iy + win]
            return 2.0 * vals[ix, iy] - w_plus - w_plus[::-1, ::-1]

        def near_psi(ix, iy):
            c = vals[ix, iy]
            dx = 2.0 * c - up[ix + n, iy + n - 1] - up[ix + n - 2, iy + n - 1]
            dy = 2.0 * c - up[ix + n - 1, iy + n] - up[ix + n - 1, iy + n - 2]
            return (dx + dy) / h ** 2

        result = np.zeros((n, n)) if out is None else out
        sweep_2d(grid, s, C / 2.0,
                 phi_window, near_psi,
                 lambda ix, iy: 2.0 * vals[ix, iy],
                 out=result, rows=rows)
    if out is not None:
        return out
    return GridFunction(grid, result)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense operator restricted to Omega nodes (mask order)."""

    grid: Grid
    params: object
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def h(self):
        return self.grid.h

    def apply_to_omega(self, vec):
        return self.matrix @ np.asarray(vec, float)

    def bilinear(self, v, w):
        """Discrete energy pairing sum v . (A w) h^N."""
        return float(np.dot(v, self.matrix @ w)) * self.h ** self.grid.ndim

    def dump(self, path):
        """Row-major float64 little-endian dump with a small header."""
        m = self.grid.n_omega
        flat_idx = np.flatnonzero(self.grid.mask.ravel()).astype("<i8")
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<i d i d q", self.grid.ndim, self.params.s,
                                 self.grid.n, self.grid.h, m))
            fh.write(flat_idx.tobytes())
            fh.write(self.matrix.astype("<f8").tobytes())

    @classmethod
    def load(cls, path, grid, params):
        with open(path, "rb") as fh:
            magic = fh.read(len(_MAGIC))
            if magic != _MAGIC:
                raise ValueError("not an operator dump")
            ndim, s, n, h, m = struct.unpack("<i d i d q", fh.read(struct.calcsize("<i d i d q")))
            if (ndim, n) != (grid.ndim, grid.n) or abs(s - params.s) > 1e-15 or abs(h - grid.h) > 1e-12:
                raise ValueError("operator dump does not match grid/params")
            idx = np.frombuffer(fh.read(8 * m), dtype="<i8")
            if not np.array_equal(idx, np.flatnonzero(grid.mask.ravel())):
                raise ValueError("operator dump Omega indexing mismatch")
            mat = np.frombuffer(fh.read(8 * m * m), dtype="<f8").reshape(m, m).copy()
        return cls(grid, params, mat)


def assemble_operator_matrix(grid, params, dense_cap=DEFAULT_DENSE_CAP):
    """Dense matrix A with A (u|Omega) = apply(extend_by_zero(u))|Omega.

    Rows are built from the same weights as the matrix-free path, so the
    two agree to rounding.  Raises MemoryBudgetError above dense_cap
    Omega nodes.
    """
    m = grid.n_omega
    if m > dense_cap:
        raise MemoryBudgetError(
            f"{m} Omega nodes exceed the dense cap of {dense_cap}; "
            "raise dense_cap explicitly if this size is intended")
    n, h, s, C = grid.n, grid.h, params.s, params.cns

    if grid.ndim == 1:
        idx = np.flatnonzero(grid.mask)
        w, A1 = interior_weights_1d(n, h, s)
        m0 = first_cell_moment(h, s)
        mat = np.zeros((m, m))
        col_of = {j: c for c, j in enumerate(idx)}

        def fill_row(r):
            i = idx[r]
            K = max(i, n - 1 - i)
            wk = w[:K].copy()
            wk[K - 1] -= A1[K - 1]
            wk[0] += m0 / h ** 2
            row = np.zeros(n)
            row[i] = 2.0 * wk.sum() + 2.0 * tail_coefficient_1d(K * h, s)
            ks = np.arange(1, K + 1)
            up_idx = i + ks
            ok = up_idx < n
            np.add.at(row, up_idx[ok], -wk[ok])
            dn_idx = i - ks
            ok = dn_idx >= 0
            np.add.at(row, dn_idx[ok], -wk[ok])
            mat[r, :] = C * row[idx]

        _threads.run_rows(fill_row, m)
        return OperatorMatrix(grid, params, mat)

    # 2D: one matrix-free sweep per unit vector column is wasteful; build
    # rows from the weight fields directly.
    from .quadrature import far_weight_field, near_square_moment, offset_distance_sq, tail_integral_2d

    flat_idx = np.flatnonzero(grid.mask.ravel())
    q = near_square_moment(s) * h ** (2 - 2 * s)
    d2 = offset_distance_sq(n, h)
    mat = np.zeros((m, m))
    off = n - 1
    pos_of = -np.ones(n * n, dtype=int)
    pos_of[flat_idx] = np.arange(m)

    def fill_row(r):
        flat = flat_idx[r]
        ix, iy = divmod(flat, n)
        W = far_weight_field(n, h, s, ix, iy) / d2
        row = np.zeros((n, n))
        row[ix, iy] += 2.0 * W.sum() + 2.0 * tail_integral_2d(n, h, s, ix, iy)
        # coefficient of u at j: -(W(j-i) + W(i-j))
        row -= W[off - ix: off - ix + n, off - iy: off - iy + n]
        row -= W[off + ix - (n - 1): off + ix + 1, off + iy - (n - 1): off + iy + 1][::-1, ::-1]
        # near: axis neighbors
        row[ix, iy] += 4.0 * q / h ** 2
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            jx, jy = ix + dx, iy + dy
            if 0 <= jx < n and 0 <= jy < n:
                row[jx, jy] -= q / h ** 2
        mat[r, :] = (C / 2.0) * row.ravel()[flat_idx]

    _threads.run_rows(fill_row, m)
    sym = 0.5 * (mat + mat.T)  # remove last-bit quadrature asymmetry
    return OperatorMatrix(grid, params, sym)

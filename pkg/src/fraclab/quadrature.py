"""Quadrature machinery for the singular kernel |z|^(-N-2s).

All operators integrate symmetrized second-difference data
phi(z) = g(x+z) + g(x-z) - 2g(x)-type combinations, written so that
psi(z) = phi(z)/|z|^2 is smooth through the origin.  The principal-value
integral then becomes a weighted sum of lattice values of phi:

  1D: int_0^inf phi(z) z^(-1-2s) dz
      = m0 * psi(h) + sum_cells int psi_lin(z) z^(1-2s) dz + exact tail,

  2D: (1/2) int_R2 phi(z) |z|^(-2-2s) dz with a square near region
      [-h,h]^2 (Taylor corrected), bilinear psi on far lattice cells, and
      an exact complement-of-rectangle tail.

Near-cell weights integrate z^(1-2s) exactly; the shifted exponent keeps
every formula regular for all s in (0,1), including s = 1/2.  Far tails
beyond the grid box are evaluated in closed form (incomplete-beta in 2D),
so the exterior-zero extension contributes no truncation error.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import betainc, gammaln

# ---------------------------------------------------------------------------
# 1D weights


@lru_cache(maxsize=32)
def interior_weights_1d(n, h, s):
    """Per-offset weights w[k-1] (k = 1..n) plus the left-endpoint parts.

    w[k-1] multiplies phi(kh)/ (kh)^2 contributions already folded in:
    the returned weights multiply the raw lattice values phi(kh).
    A[k-1] is the share of w[k-1] contributed by cell [kh,(k+1)h]; rows
    truncated at K drop A[K-1] because that cell lies beyond their range.
    """
    k = np.arange(1, n + 1, dtype=float)
    lo, hi = k * h, (k + 1) * h
    p1 = (hi ** (2 - 2 * s) - lo ** (2 - 2 * s)) / (2 - 2 * s)
    p2 = (hi ** (3 - 2 * s) - lo ** (3 - 2 * s)) / (3 - 2 * s)
    A = (hi * p1 - p2) / h / (k * h) ** 2
    B = (p2 - lo * p1) / h / ((k + 1) * h) ** 2
    w = A.copy()
    w[1:] += B[:-1]
    w.setflags(write=False)
    A.setflags(write=False)
    return w, A


def first_cell_moment(h, s):
    """int_0^h z^(1-2s) dz; multiplies the near-field psi estimate."""
    return h ** (2 - 2 * s) / (2 - 2 * s)


def tail_coefficient_1d(radius, s):
    """int_radius^inf z^(-1-2s) dz."""
    return radius ** (-2 * s) / (2 * s)


def sweep_1d(n, h, s, prefactor, phi_row, near_psi, tail_phi, out=None, rows=None):
    """Assemble out[i] = prefactor * (sum_k w_k phi_i(k) + m0 psi_i + tail).

    phi_row(i, K) returns phi values at offsets k = 1..K; near_psi(i) the
    psi(0+) estimate; tail_phi(i) the constant phi value beyond the box.
    """
    w, A = interior_weights_1d(n, h, s)
    m0 = first_cell_moment(h, s)
    if out is None:
        out = np.zeros(n)
    for i in rows if rows is not None else range(n):
        K = max(i, n - 1 - i)
        wk = w[:K].copy()
        wk[K - 1] -= A[K - 1]
        out[i] = prefactor * (
            wk @ phi_row(i, K)
            + m0 * near_psi(i)
            + tail_phi(i) * tail_coefficient_1d(K * h, s)
        )
    return out


# ---------------------------------------------------------------------------
# 2D near-square moment and tail integrals


@lru_cache(maxsize=64)
def near_square_moment(s):
    """int over [-1,1]^2 of z1^2 |z|^(-2-2s) dz (unit spacing; scale by h^(2-2s))."""
    t, wt = leggauss(64)
    theta = (t + 1.0) * (np.pi / 8.0)
    return float(4.0 / (2 - 2 * s) * (np.pi / 8.0) * np.sum(wt * np.cos(theta) ** (2 * s - 2)))


def _beta_full(s):
    # B(s + 1/2, 1/2)
    return float(np.exp(gammaln(s + 0.5) + gammaln(0.5) - gammaln(s + 1.0)))


def halfplane_integral(d, s):
    """int over a half-plane at distance d of |z|^(-2-2s) dz."""
    return _beta_full(s) * d ** (-2 * s) / (2 * s)


def corner_integral(p, q, s):
    """int over the quadrant {z1 > p, z2 > q} of |z|^(-2-2s) dz, p,q > 0."""
    bf = _beta_full(s)
    sin2 = q * q / (p * p + q * q)
    part1 = q ** (-2 * s) * betainc(s + 0.5, 0.5, sin2)
    part2 = p ** (-2 * s) * betainc(s + 0.5, 0.5, 1.0 - sin2)
    return bf / (4 * s) * (part1 + part2)


def rect_complement_integral(p1, q1, p2, q2, s):
    """int over R^2 minus the rectangle [-p1,q1]x[-p2,q2] of |z|^(-2-2s) dz.

    The origin must be interior (all distances positive).
    """
    total = sum(halfplane_integral(d, s) for d in (p1, q1, p2, q2))
    for dx in (p1, q1):
        for dy in (p2, q2):
            total -= corner_integral(dx, dy, s)
    return total


# ---------------------------------------------------------------------------
# 2D cell weights

_GAUSS_SCHEDULE = ((1, 16), (2, 12), (4, 8), (8, 6))
_GAUSS_FAR = 4


def _gauss_order(dist_cells):
    for bound, order in _GAUSS_SCHEDULE:
        if dist_cells <= bound:
            return order
    return _GAUSS_FAR


@lru_cache(maxsize=8)
def cell_corner_weights(n, h, s):
    """Corner weights int_cell N_corner(z) |z|^(-2s) dz for every lattice cell.

    Returns cw with shape (2, 2, 2n-2, 2n-2): cw[da, db, a, b] is the weight
    of corner (ka+da, kb+db) of cell [ka,ka+1]x[kb,kb+1] in cell units,
    ka = a - (n-1), kb = b - (n-1).  Tensor Gauss order grows toward the
    singularity; the four cells around the origin are near-field cells and
    get zero weight here.
    """
    ncell = 2 * n - 2
    base = np.arange(ncell) - (n - 1)
    cw = np.zeros((2, 2, ncell, ncell))
    ka = base[:, None] * np.ones((1, ncell), dtype=int)
    kb = base[None, :] * np.ones((ncell, 1), dtype=int)
    corner_dist = np.minimum(np.abs(ka), np.abs(ka + 1))
    corner_dist = np.maximum(corner_dist, np.minimum(np.abs(kb), np.abs(kb + 1)))
    near = (ka >= -1) & (ka <= 0) & (kb >= -1) & (kb <= 0)

    orders = sorted({_gauss_order(d) for d in np.unique(corner_dist)})
    for g in orders:
        sel = (~near) & (np.vectorize(_gauss_order)(corner_dist) == g)
        if not sel.any():
            continue
        t, wt = leggauss(g)
        xi = (t + 1.0) / 2.0
        wq = wt / 2.0
        XI, UP = np.meshgrid(xi, xi, indexing="ij")
        WQ = np.outer(wq, wq)
        kas = ka[sel][:, None, None]
        kbs = kb[sel][:, None, None]
        Z1 = (kas + XI[None]) * h
        Z2 = (kbs + UP[None]) * h
        ker = (Z1 * Z1 + Z2 * Z2) ** (-s)
        for da, Nx in ((0, 1.0 - XI), (1, XI)):
            for db, Ny in ((0, 1.0 - UP), (1, UP)):
                vals = (WQ[None] * Nx[None] * Ny[None] * ker).sum(axis=(1, 2)) * h * h
                cw[da, db][sel] = vals
    for da in (0, 1):
        for db in (0, 1):
            cw[da, db].setflags(write=False)
    return cw


def far_weight_field(n, h, s, ix, iy):
    """Per-target aggregated corner weights over far cells, shape (2n-1, 2n-1).

    Index (a + n-1, b + n-1) holds the total weight of lattice offset
    (a, b).  Far cells are those inside either shifted box image
    B+ = box - x_i or B- = -(box - x_i), excluding the four near cells.
    """
    cw = cell_corner_weights(n, h, s)
    ncell = 2 * n - 2
    off = n - 1
    inc = np.zeros((ncell, ncell), dtype=bool)
    # cells of B+: ka in [-ix, n-2-ix], kb in [-iy, n-2-iy]
    inc[off - ix: off + n - 1 - ix, off - iy: off + n - 1 - iy] = True
    # cells of B-: mirrored
    m = np.zeros_like(inc)
    m[off - (n - 1 - ix): off + ix, off - (n - 1 - iy): off + iy] = True
    inc |= m
    inc[off - 1: off + 1, off - 1: off + 1] = False  # near cells
    W = np.zeros((2 * n - 1, 2 * n - 1))
    for da in (0, 1):
        for db in (0, 1):
            contrib = cw[da, db] * inc
            W[da: da + ncell, db: db + ncell] += contrib
    return W


def offset_distance_sq(n, h):
    """|kappa h|^2 over the offset window, with the center entry set to 1."""
    base = (np.arange(2 * n - 1) - (n - 1)) * h
    d2 = base[:, None] ** 2 + base[None, :] ** 2
    d2[n - 1, n - 1] = 1.0
    return d2


def tail_integral_2d(n, h, s, ix, iy):
    """int of the kernel over R^2 minus (B+ union B-), both box images.

    Zero when the target sits on the box edge (callers only use it with a
    vanishing phi factor there).
    """
    px, qx = ix * h, (n - 1 - ix) * h
    py, qy = iy * h, (n - 1 - iy) * h
    if min(px, qx, py, qy) <= 0:
        return 0.0
    r_plus = rect_complement_integral(px, qx, py, qy, s)
    r_minus = rect_complement_integral(qx, px, qy, py, s)
    mx, my = min(px, qx), min(py, qy)
    r_cap = rect_complement_integral(mx, mx, my, my, s)
    return r_plus + r_minus - r_cap


def sweep_2d(grid, s, prefactor, phi_window, near_psi, tail_phi, out=None, rows=None):
    """2D analog of sweep_1d over all grid nodes.

    phi_window(ix, iy) returns phi at every offset (2n-1, 2n-1); near_psi
    the psi(0) estimate; tail_phi the constant phi beyond both box images.
    """
    n, h = grid.n, grid.h
    q = near_square_moment(s) * h ** (2 - 2 * s)
    d2 = offset_distance_sq(n, h)
    if out is None:
        out = np.zeros((n, n))
    index_list = rows if rows is not None else range(n * n)
    for flat in index_list:
        ix, iy = divmod(flat, n)
        W = far_weight_field(n, h, s, ix, iy)
        phi = phi_window(ix, iy)
        far = float(np.sum(W * phi / d2))
        out[ix, iy] = prefactor * (
            far + q * near_psi(ix, iy) + tail_phi(ix, iy) * tail_integral_2d(n, h, s, ix, iy)
        )
    return out

"""Estimators for Lp, Gagliardo, Besov, and potential-space (semi)norms.

All estimators are midpoint Riemann sums on the grid: node values carry
cell weight h^N, double sums run over node pairs with the kernel
evaluated at the pair distance (the midpoint of the product cell), and
the diagonal is excluded.  Divergent memberships are detected elsewhere
by refinement, not by any single-grid value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .gridfn import GridFunction
from .operator import apply_fractional_laplacian


@dataclass(frozen=True)
class NormReport:
    region: str
    sigma: float
    p: float
    q: float
    h: float
    seminorm: float
    norm: float

    CSV_HEADER = ("region", "sigma", "p", "q", "h", "seminorm", "norm")

    def csv_row(self):
        return (self.region, f"{self.sigma:.17g}", f"{self.p:.17g}", f"{self.q:.17g}",
                f"{self.h:.17g}", f"{self.seminorm:.17g}", f"{self.norm:.17g}")


def write_norm_reports(path, reports):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(NormReport.CSV_HEADER)
        for r in reports:
            wr.writerow(r.csv_row())


def _region_selector(u, region):
    grid = u.grid
    if region is None or region == "box":
        return np.ones(grid.shape, dtype=bool)
    if region == "omega":
        return grid.mask.copy()
    return region.contains(grid.nodes()).reshape(grid.shape)


def lp_norm(u, p, region=None):
    """Riemann-sum L^p norm over the region's nodes (max for p = inf)."""
    grid = u.grid
    sel = _region_selector(u, region)
    vals = np.abs(u.values[sel])
    if vals.size == 0:
        return 0.0
    if np.isinf(p):
        return float(vals.max())
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((vals ** p).sum() * grid.h ** grid.ndim) ** (1.0 / p)


def gagliardo_seminorm(u, sigma, p, region=None):
    """Double Riemann sum of |u(x)-u(y)|^p / |x-y|^(N+p sigma) over the region.

    Pairs at distance h use the same midpoint rule as every other pair;
    the diagonal (the singular cell) is excluded.
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    if not 1.0 < p < np.inf:
        raise ValueError(f"p must lie in (1, inf), got {p}")
    grid = u.grid
    sel = _region_selector(u, region)
    pts = grid.nodes()[sel.ravel()]
    vals = u.values[sel]
    if vals.size < 2:
        return 0.0
    diff = np.abs(vals[:, None] - vals[None, :])
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, 1.0)
    ker = dist ** (-(grid.ndim + p * sigma))
    np.fill_diagonal(ker, 0.0)
    total = float((diff ** p * ker).sum()) * grid.h ** (2 * grid.ndim)
    return total ** (1.0 / p)


def _gradient_components(u):
    """Central differences per axis (one-sided at the box edge)."""
    grid = u.grid
    h = grid.h
    comps = []
    v = u.values
    if grid.ndim == 1:
        g = np.empty_like(v)
        g[1:-1] = (v[2:] - v[:-2]) / (2 * h)
        g[0] = (v[1] - v[0]) / h
        g[-1] = (v[-1] - v[-2]) / h
        comps.append(g)
    else:
        for ax in (0, 1):
            g = (np.roll(v, -1, axis=ax) - np.roll(v, 1, axis=ax)) / (2 * h)
            sl_lo = [slice(None)] * 2
            sl_lo[ax] = 0
            sl_hi = [slice(None)] * 2
            sl_hi[ax] = -1
            g[tuple(sl_lo)] = np.take(v, 1, axis=ax) - np.take(v, 0, axis=ax)
            g[tuple(sl_hi)] = np.take(v, -1, axis=ax) - np.take(v, -2, axis=ax)
            g[tuple(sl_lo)] /= h
            g[tuple(sl_hi)] /= h
            comps.append(g)
    return [GridFunction(grid, g) for g in comps]


def sobolev_seminorm(u, sigma, p, region=None):
    """Order-sigma seminorm for sigma in (0, 2).

    (0,1): Gagliardo double sum.  sigma = 1: L^p norm of the gradient.
    (1,2): first differences composed with the fractional seminorm of
    each derivative component.
    """
    if sigma <= 0 or sigma >= 2:
        raise ValueError(f"sigma must lie in (0, 2), got {sigma}")
    if sigma < 1.0:
        return gagliardo_seminorm(u, sigma, p, region)
    comps = _gradient_components(u)
    if sigma == 1.0:
        return float(sum(lp_norm(g, p, region) ** p for g in comps)) ** (1.0 / p)
    return float(sum(gagliardo_seminorm(g, sigma - 1.0, p, region) ** p
                     for g in comps)) ** (1.0 / p)


def _shifted(values, n, ndim, shift):
    """u(x + shift) on the box lattice, zero beyond the box."""
    if ndim == 1:
        k = shift
        out = np.zeros(n)
        if k >= 0:
            out[: n - k] = values[k:]
        else:
            out[-k:] = values[: n + k]
        return out
    kx, ky = shift
    out = np.zeros((n, n))
    sx = slice(max(0, -kx), min(n, n - kx))
    sy = slice(max(0, -ky), min(n, n - ky))
    out[sx, sy] = values[sx.start + kx: sx.stop + kx, sy.start + ky: sy.stop + ky]
    return out


def besov_seminorm(u, sigma, p, q):
    """Shift-lattice Besov seminorm of an exterior-zero function.

    First differences for sigma in (0,1), symmetric second differences for
    sigma in (1,2).  The outer integral over shifts is a lattice sum plus
    the exact power-law tail where the shifted supports are disjoint.
    """
    if not u.dirichlet:
        raise ValueError("besov_seminorm needs an exterior-zero function")
    if not (0.0 < sigma < 1.0 or 1.0 < sigma < 2.0):
        raise ValueError(f"sigma must lie in (0,1) or (1,2), got {sigma}")
    grid = u.grid
    n, h, ndim = grid.n, grid.h, grid.ndim
    second = sigma > 1.0
    vals = u.values

    if ndim == 1:
        shifts = [(k,) for k in range(-(n - 1), n) if k != 0]
    else:
        shifts = [(kx, ky) for kx in range(-(n - 1), n) for ky in range(-(n - 1), n)
                  if (kx, ky) != (0, 0)]

    up_norm = lp_norm(u, p)
    width = (n - 1) * h
    tail_radius = width * np.sqrt(ndim)
    surface = 2.0 if ndim == 1 else 2.0 * np.pi
    if second:
        disjoint_level = (2.0 + 2.0 ** p) ** (1.0 / p) * up_norm
    else:
        disjoint_level = 2.0 ** (1.0 / p) * up_norm

    q_inf = np.isinf(q)
    acc = 0.0
    sup = 0.0
    for sh in shifts:
        y = np.asarray(sh, float) * h
        ynorm = float(np.sqrt((y ** 2).sum()))
        shift = sh[0] if ndim == 1 else sh
        if second:
            neg = -shift if ndim == 1 else (-shift[0], -shift[1])
            d = _shifted(vals, n, ndim, shift) - 2.0 * vals + _shifted(vals, n, ndim, neg)
        else:
            d = _shifted(vals, n, ndim, shift) - vals
        dn = lp_norm(GridFunction(grid, d), p)
        if q_inf:
            sup = max(sup, dn / ynorm ** sigma)
        else:
            acc += h ** ndim * dn ** q / ynorm ** (ndim + q * sigma)
    if q_inf:
        return max(sup, disjoint_level / tail_radius ** sigma)
    acc += disjoint_level ** q * surface * tail_radius ** (-q * sigma) / (q * sigma)
    return float(acc) ** (1.0 / q)


def potential_norm(u, params, p):
    """L^p norm of the function plus L^p norm of its fractional Laplacian.

    Both integrals run over the full box; the operator image is global,
    so its exterior part is included.
    """
    image = apply_fractional_laplacian(u, params)
    return lp_norm(u, p) + lp_norm(image, p)

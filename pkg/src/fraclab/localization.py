"""Cut-off localization: the remainder term, product rule, and g-bound monitor.

The remainder shares the far-field and tail quadrature of the operator
but uses its own near-field rule (a product of central first differences),
so the discrete product-rule identity closes at quadrature order instead
of collapsing to an algebraic identity.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import LocalizationError
from .gridfn import GridFunction
from .operator import apply_fractional_laplacian, _padded
from .quadrature import sweep_1d, sweep_2d
from .regions import require_nested
from .spaces import gagliardo_seminorm, lp_norm


def _eta_pad_values(eta):
    """Continuation of eta beyond the box: zero if exterior-zero, else the
    constant edge value (supported so that a globally constant eta is exact)."""
    grid = eta.grid
    if eta.dirichlet:
        if grid.ndim == 1:
            return 0.0, 0.0
        return 0.0
    vals = eta.values
    if grid.ndim == 1:
        return float(vals[0]), float(vals[-1])
    edge = np.concatenate([vals[0, :], vals[-1, :], vals[:, 0], vals[:, -1]])
    if np.ptp(edge) != 0.0:
        raise ValueError("2D eta must be exterior-zero or constant on the box edge")
    return float(edge[0])


def remainder_Is(u, eta, params):
    """Remainder of the cut-off product rule.

    Pointwise integral of (u(x)-u(y)) (eta(x)-eta(y)) against the kernel,
    with the operator's quadrature split: first-difference near field,
    cell-exact weighted far field, closed-form tail.
    """
    if not isinstance(u, GridFunction) or not isinstance(eta, GridFunction):
        raise TypeError("u and eta must be GridFunctions")
    if not u.dirichlet:
        raise ValueError("u must be exterior-zero (Dirichlet-extended)")
    if u.grid is not eta.grid:
        raise ValueError("u and eta must share one grid")
    grid = u.grid
    n, h, s, C = grid.n, grid.h, params.s, params.cns
    uv, ev = u.values, eta.values

    if grid.ndim == 1:
        eL, eR = _eta_pad_values(eta)
        up = _padded(uv, n)
        ep = _padded(ev, n)
        ep[: n - 1] = eL
        ep[2 * n - 1:] = eR

        def phi_row(i, K):
            du_p = uv[i] - up[n + i: n + i + K]
            du_m = uv[i] - up[n + i - K - 1: n + i - 1][::-1]
            de_p = ev[i] - ep[n + i: n + i + K]
            de_m = ev[i] - ep[n + i - K - 1: n + i - 1][::-1]
            return du_p * de_p + du_m * de_m

        def near_psi(i):
            return (up[n + i] - up[n + i - 2]) * (ep[n + i] - ep[n + i - 2]) / (2.0 * h ** 2)

        def tail_phi(i):
            return uv[i] * (2.0 * ev[i] - eL - eR)

        out = sweep_1d(n, h, s, C, phi_row, near_psi, tail_phi)
    else:
        ec = _eta_pad_values(eta)
        up = _padded(uv, n)
        ep = _padded(ev, n, pad_value=ec)
        win = 2 * n - 1

        def phi_window(ix, iy):
            wu = up[ix: ix + win, iy: iy + win]
            we = ep[ix: ix + win, iy: iy + win]
            du_p = uv[ix, iy] - wu
            de_p = ev[ix, iy] - we
            return du_p * de_p + du_p[::-1, ::-1] * de_p[::-1, ::-1]

        def near_psi(ix, iy):
            dux = up[ix + n, iy + n - 1] - up[ix + n - 2, iy + n - 1]
            dex = ep[ix + n, iy + n - 1] - ep[ix + n - 2, iy + n - 1]
            duy = up[ix + n - 1, iy + n] - up[ix + n - 1, iy + n - 2]
            dey = ep[ix + n - 1, iy + n] - ep[ix + n - 1, iy + n - 2]
            return (dux * dex + duy * dey) / (2.0 * h ** 2)

        def tail_phi(ix, iy):
            return 2.0 * uv[ix, iy] * (ev[ix, iy] - ec)

        out = sweep_2d(grid, s, C / 2.0, phi_window, near_psi, tail_phi)
    return GridFunction(grid, out)


def product_rule_residual(u, eta, params):
    """Max nodewise residual of the four-term cut-off identity."""
    lhs = apply_fractional_laplacian(u * eta, params)
    rhs = (eta.values * apply_fractional_laplacian(u, params).values
           + u.values * apply_fractional_laplacian(eta, params).values
           - remainder_Is(u, eta, params).values)
    return float(np.abs(lhs.values - rhs).max())


def localized_rhs(u, eta, f, params, verify=True, residual_bound=None):
    """Right-hand side F for the cut-off product u eta, as a whole-space source.

    F = eta f + u (-Delta)^s eta - I_s(u, eta).  With verify=True the
    defining identity is checked: ||(-Delta)^s(u eta) - F||_inf must stay
    within the product-rule residual bound plus the solve residual of u.
    """
    grid = u.grid
    f_full = np.zeros(grid.shape)
    if isinstance(f, GridFunction):
        f_full[:] = f.values
    else:
        f_full[grid.mask] = np.asarray(f, float).ravel()
    F = (eta.values * f_full
         + u.values * apply_fractional_laplacian(eta, params).values
         - remainder_Is(u, eta, params).values)
    if verify:
        if residual_bound is None:
            residual_bound = product_rule_residual(u, eta, params)
        lhs = apply_fractional_laplacian(u * eta, params).values
        gap = float(np.abs(lhs - F)[grid.mask].max())
        solve_gap = float(np.abs(
            apply_fractional_laplacian(u, params).values - f_full)[grid.mask & (eta.values > 0)].max(initial=0.0))
        if gap > residual_bound + solve_gap + 1e-9:
            raise LocalizationError(
                f"localized source inconsistent: gap {gap:.3e} exceeds "
                f"residual bound {residual_bound:.3e} + solve gap {solve_gap:.3e}")
    return GridFunction(grid, F)


@dataclass(frozen=True)
class GBoundReport:
    s: float
    p: float
    h: float
    eta_region: str
    omega2_region: str
    g_norm: float
    sobolev_term: float
    lp_term: float

    @property
    def ratio(self):
        denom = self.sobolev_term + self.lp_term
        return 0.0 if denom == 0 else self.g_norm / denom

    CSV_HEADER = ("s", "p", "h", "eta_region", "omega2_region",
                  "g_norm", "sobolev_term", "lp_term", "ratio")

    def csv_row(self):
        return (f"{self.s:.17g}", f"{self.p:.17g}", f"{self.h:.17g}",
                self.eta_region, self.omega2_region,
                f"{self.g_norm:.17g}", f"{self.sobolev_term:.17g}",
                f"{self.lp_term:.17g}", f"{self.ratio:.17g}")


def g_bound_monitor(u, eta_spec, params, omega2, p, eta=None):
    """Empirical constant of the localization bound.

    g = u (-Delta)^s eta - I_s(u, eta); the report records
    ||g||_p / (||u||_{W^{s,p}(omega2)} + ||u||_{L^p(Omega)}).  Only
    finiteness and refinement stability are meaningful, not the value.
    """
    from .gridfn import build_cutoff

    grid = u.grid
    if eta is None:
        eta = build_cutoff(grid, eta_spec)
    require_nested(eta_spec.outer, omega2, "g-bound outer/omega2")
    require_nested(omega2, grid.omega, "g-bound omega2/Omega")
    g = (u.values * apply_fractional_laplacian(eta, params).values
         - remainder_Is(u, eta, params).values)
    g_norm = lp_norm(GridFunction(grid, g), p)
    semi = gagliardo_seminorm(u, params.s, p, omega2)
    lp_o2 = lp_norm(u, p, omega2)
    sobolev = (lp_o2 ** p + semi ** p) ** (1.0 / p)
    lp_omega = lp_norm(u, p, "omega")
    return GBoundReport(params.s, p, grid.h,
                        str(eta_spec.outer.describe()), str(omega2.describe()),
                        g_norm, sobolev, lp_omega)


def append_g_bound_csv(path, reports):
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        wr = csv.writer(fh)
        if new:
            wr.writerow(GBoundReport.CSV_HEADER)
        for r in reports:
            wr.writerow(r.csv_row())

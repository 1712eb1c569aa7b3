"""Homogeneous Rayleigh equation via the integral fixed point.

The regular solution through the critical layer is phi1 = phi/(u-c),
normalized by phi1(y_c)=1, obtained by Picard iteration of

    phi1 = 1 + alpha^2 * T(phi1),
    T f (y) = int_{y_c}^y (u(y')-c)^{-2} int_{y_c}^{y'} f(z) (u(z)-c)^2 dz dy'.

For real c in (u(0),u(1)) the double integral is evaluated with product
quadrature in the shifted variable s = y - y_c: the inner integrand is
g(z) s^2 with smooth g = phi1*u1^2 and u1 = (u-c)/s, the outer is p(y') s
with smooth p.  Per cell the smooth factor is linearized and the weight
integrated exactly, so the removable singularity at y_c costs no accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, SingularEvaluation
from .profiles import CriticalValue, ShearProfile, critical_value

__all__ = [
    "RayleighGrid",
    "RayleighSolution",
    "make_grid",
    "apply_T",
    "solve_phi1",
    "log_derivatives",
    "boundary_values",
]

_U1_SWITCH = 1e-4  # |y-y_c| below which u1 uses the integral form
_GL5_T, _GL5_W = np.polynomial.legendre.leggauss(5)
_GL5_T = 0.5 * (_GL5_T + 1.0)
_GL5_W = 0.5 * _GL5_W


def stable_u1(profile: ShearProfile, y: np.ndarray, y_c: float) -> np.ndarray:
    """(u(y)-u(y_c))/(y-y_c) without cancellation near y_c.

    Near the critical point the ratio is evaluated through
    int_0^1 u'(y_c + t(y-y_c)) dt (5-point Gauss, exact for quartics).
    """
    y = np.asarray(y, dtype=float)
    s = y - y_c
    out = np.empty_like(y)
    near = np.abs(s) < _U1_SWITCH
    far = ~near
    if np.any(far):
        out[far] = (profile.u(y[far]) - profile.u(np.array([y_c]))[0]) / s[far]
    if np.any(near):
        pts = y_c + np.outer(s[near], _GL5_T)
        out[near] = profile.du(pts) @ _GL5_W
    return out


@dataclass(frozen=True)
class RayleighGrid:
    """Quadrature grid for a fixed (profile, c): y nodes with y_c inserted."""

    profile: ShearProfile
    cv: CriticalValue
    y: np.ndarray
    ic: int  # index of the node equal to y_c
    s: np.ndarray  # y - y_c
    u: np.ndarray
    du: np.ndarray
    u1: np.ndarray  # stable (u-c_r)/s, = u'(y_c) at ic
    n_base: int


def make_grid(profile: ShearProfile, cv: CriticalValue, n: int = 1025) -> RayleighGrid:
    """Uniform n-point grid on [0,1] with y_c and a small local refinement inserted."""
    base = np.linspace(0.0, 1.0, n)
    h = 1.0 / (n - 1)
    y_c = cv.y_c
    extra = [y_c]
    # a few geometrically clustered nodes resolve the first cells around y_c
    for k in (0.5, 0.25, 0.125):
        for sgn in (-1.0, 1.0):
            yk = y_c + sgn * k * h
            if 0.0 < yk < 1.0:
                extra.append(yk)
    y = np.unique(np.concatenate([base, np.array(extra)]))
    # drop near-duplicates (keep y_c itself)
    keep = np.ones(len(y), dtype=bool)
    dy = np.diff(y)
    tiny = 1e-13
    for j in np.nonzero(dy < tiny)[0]:
        drop = j if abs(y[j] - y_c) > tiny else j + 1
        keep[drop] = False
    y = y[keep]
    ic = int(np.argmin(np.abs(y - y_c)))
    y[ic] = y_c
    s = y - y_c
    u = profile.u(y)
    du = profile.du(y)
    u1 = stable_u1(profile, y, y_c)
    return RayleighGrid(
        profile=profile, cv=cv, y=y, ic=ic, s=s, u=u, du=du, u1=u1, n_base=n
    )


def _power_moment(sa, sb, j):
    return (sb ** (j + 1) - sa ** (j + 1)) / (j + 1)


def _cumint_power(s: np.ndarray, g: np.ndarray, ic: int, k: int) -> np.ndarray:
    """Cumulative int_{s[ic]}^{s[j]} g(z) z^k dz for k in {0,1,2}.

    Per cell the smooth factor g is replaced by the quadratic through the
    cell endpoints and one neighbor; the weight z^k is integrated exactly
    (third-order accurate, uniformly through the removable point z=0).
    """
    m = len(s)
    sa, sb = s[:-1], s[1:]
    h = sb - sa
    m0 = _power_moment(sa, sb, k)
    m1 = _power_moment(sa, sb, k + 1) - sa * m0
    m2 = (_power_moment(sa, sb, k + 2) - 2.0 * sa * _power_moment(sa, sb, k + 1)
          + sa * sa * m0) - h * m1
    # third stencil node: k+2 where available, else k-1
    idx3 = np.arange(m - 1) + 2
    idx3[idx3 > m - 1] = np.arange(m - 1)[idx3 > m - 1] - 1
    x3 = s[idx3]
    d1 = (g[1:] - g[:-1]) / h
    with np.errstate(invalid="ignore", divide="ignore"):
        d2 = ((g[idx3] - g[1:]) / (x3 - sb) - d1) / (x3 - sa)
    d2 = np.where(np.isfinite(d2), d2, 0.0)
    contrib = g[:-1] * m0 + d1 * m1 + d2 * m2
    out = np.zeros(m, dtype=np.result_type(g, s))
    if ic < m - 1:
        out[ic + 1:] = np.cumsum(contrib[ic:])
    if ic > 0:
        left = np.cumsum(contrib[:ic][::-1])[::-1]
        out[:ic] = -left
    return out


def cumint_from_center(grid: RayleighGrid, f: np.ndarray, k: int) -> np.ndarray:
    """int_{y_c}^{y_j} f(z) (z-y_c)^k dz on the grid (f piecewise linear)."""
    return _cumint_power(grid.s, f, grid.ic, k)


def apply_T(grid: RayleighGrid, f: np.ndarray, return_t22: bool = False):
    """Rayleigh integral operator T f on the grid, for c = c_r real.

    Also returns T_{2,2} f = d/dy (T f) when requested.
    """
    cv = grid.cv
    if abs(cv.c.imag) > 0.0:
        return _apply_T_complex(grid, f, return_t22)

    g = f * grid.u1 ** 2
    inner = _cumint_power(grid.s, g, grid.ic, 2)
    p = np.empty(len(grid.s), dtype=np.result_type(f, grid.s))
    mask = np.arange(len(grid.s)) != grid.ic
    p[mask] = inner[mask] / (grid.s[mask] ** 3 * grid.u1[mask] ** 2)
    if cv.y_c < 1e-13:
        p[grid.ic] = f[grid.ic] / 5.0
    else:
        p[grid.ic] = f[grid.ic] / 3.0
    tf = _cumint_power(grid.s, p, grid.ic, 1)
    if return_t22:
        return tf, p * grid.s
    return tf


def _apply_T_complex(grid: RayleighGrid, f: np.ndarray, return_t22: bool):
    """Plain cumulative trapezoid path for Im c != 0; needs eps to resolve the grid."""
    eps = abs(grid.cv.c.imag)
    hmax = float(np.max(np.diff(grid.y)))
    if eps < 2.0 * float(np.max(np.abs(grid.du))) * hmax:
        raise SingularEvaluation(
            f"Im c = {eps:.3e} smaller than the quadrature regularization width "
            f"({2.0 * float(np.max(np.abs(grid.du))) * hmax:.3e}); refine the grid"
        )
    w = grid.u - grid.cv.c
    inner = _trapz_cum(grid.y, f * w ** 2, grid.ic)
    t22 = inner / w ** 2
    tf = _trapz_cum(grid.y, t22, grid.ic)
    if return_t22:
        return tf, t22
    return tf


def _trapz_cum(y: np.ndarray, f: np.ndarray, ic: int) -> np.ndarray:
    contrib = 0.5 * (f[1:] + f[:-1]) * np.diff(y)
    out = np.zeros(len(y), dtype=f.dtype)
    if ic < len(y) - 1:
        out[ic + 1:] = np.cumsum(contrib[ic:])
    if ic > 0:
        left = np.cumsum(contrib[:ic][::-1])[::-1]
        out[:ic] = -left
    return out


@dataclass(frozen=True)
class RayleighSolution:
    """Converged phi1 on a grid, with derivative and diagnostics."""

    alpha: float
    cv: CriticalValue
    grid: RayleighGrid
    phi1: np.ndarray
    dphi1: np.ndarray
    phi: np.ndarray
    F: np.ndarray  # d_y phi1 / phi1
    iterations: int
    tol: float
    residual: float

    @property
    def y(self) -> np.ndarray:
        return self.grid.y


def solve_phi1(
    profile: ShearProfile,
    alpha: float,
    cv,
    tol: float = 1e-12,
    n: int = 1025,
    max_iter: int = 200,
    grid: RayleighGrid | None = None,
) -> RayleighSolution:
    """Picard iteration phi1 <- 1 + alpha^2 T(phi1) until sup-update < tol."""
    if not isinstance(cv, CriticalValue):
        cv = critical_value(profile, cv)
    if grid is None:
        grid = make_grid(profile, cv, n)
    hmax = float(np.max(np.diff(grid.y)))
    if alpha * hmax > 0.5:
        raise NoConvergence(
            f"alpha = {alpha:g} under-resolved by grid spacing {hmax:.3e} "
            f"(alpha*h = {alpha * hmax:.2f} > 0.5); refuse rather than under-resolve",
            iterations=0,
        )

    is_complex = abs(cv.c.imag) > 0.0
    dtype = complex if is_complex else float
    phi1 = np.ones(len(grid.y), dtype=dtype)
    a2 = alpha * alpha
    if a2 == 0.0:
        zeros = np.zeros_like(phi1)
        return RayleighSolution(
            alpha=alpha, cv=cv, grid=grid, phi1=phi1, dphi1=zeros,
            phi=(grid.u - cv.c) * phi1 if is_complex else (grid.u - cv.c_r) * phi1,
            F=zeros, iterations=0, tol=tol, residual=0.0,
        )

    prev_delta = np.inf
    delta = np.inf
    for it in range(1, max_iter + 1):
        tphi = apply_T(grid, phi1)
        new = 1.0 + a2 * tphi
        scale = max(1.0, float(np.max(np.abs(new))))
        prev_delta, delta = delta, float(np.max(np.abs(new - phi1))) / scale
        phi1 = new
        if delta < tol:
            break
    else:
        contraction = delta / prev_delta if prev_delta > 0 else float("nan")
        raise NoConvergence(
            f"Picard iteration: update {delta:.2e} after {max_iter} iterations",
            iterations=max_iter, contraction=contraction,
        )

    tphi, t22 = apply_T(grid, phi1, return_t22=True)
    residual = float(np.max(np.abs(phi1 - 1.0 - a2 * tphi)))
    dphi1 = a2 * t22
    w = (grid.u - cv.c) if is_complex else (grid.u - cv.c_r)
    return RayleighSolution(
        alpha=alpha, cv=cv, grid=grid, phi1=phi1, dphi1=dphi1, phi=w * phi1,
        F=dphi1 / phi1, iterations=it, tol=tol, residual=residual,
    )


def _interp_onto(y_from: np.ndarray, vals: np.ndarray, y_to: np.ndarray) -> np.ndarray:
    from scipy.interpolate import CubicSpline

    return CubicSpline(y_from, vals)(y_to)


def log_derivatives(
    profile: ShearProfile,
    sol: RayleighSolution,
    h_ctilde: float | None = None,
):
    """F, G, G1 on the solution grid, plus the Riccati residual report.

    G = d_c phi1 / phi1 by a 3-point stencil in the square-root variable
    c~ (step 1e-4 * v(1) by default); stencil solves are interpolated onto
    the center grid.  Stencils in c~ rather than c keep both legs inside
    (u(0), u(1)) arbitrarily close to the left endpoint.
    """
    cv = sol.cv
    if cv.c.imag != 0.0:
        raise SingularEvaluation("log_derivatives requires real c in D0")
    ct = cv.c_tilde
    v1 = float(np.sqrt(profile.u1 - profile.u0))
    if h_ctilde is None:
        h_ctilde = 1e-4 * v1
    h_ctilde = min(h_ctilde, 0.45 * ct, 0.45 * (v1 - ct))
    if h_ctilde <= 0:
        raise SingularEvaluation("c too close to the endpoints for the c-stencil")

    sols = []
    for ctk in (ct - h_ctilde, ct + h_ctilde):
        ck = profile.u0 + ctk * ctk
        cvk = critical_value(profile, ck)
        solk = solve_phi1(profile, sol.alpha, cvk, tol=sol.tol, n=sol.grid.n_base)
        sols.append(_interp_onto(solk.y, solk.phi1, sol.y))
    duc = float(profile.du(np.array([cv.y_c]))[0])
    dphi1_dc = (sols[1] - sols[0]) / (2.0 * h_ctilde * 2.0 * ct)
    G = dphi1_dc / sol.phi1
    F = sol.F
    G1 = F / duc + G

    # Riccati residual F' + F^2 + 2u'/(u-c) F - alpha^2, away from the collar
    dF = np.gradient(F, sol.y, edge_order=2)
    s = sol.grid.s
    ratio = np.empty_like(F)
    mask = np.arange(len(s)) != sol.grid.ic
    ratio[mask] = 2.0 * sol.grid.du[mask] * F[mask] / (sol.grid.u[mask] - cv.c_r)
    ratio[sol.grid.ic] = 2.0 * sol.alpha**2 / 3.0
    riccati = dF + F * F + ratio - sol.alpha**2
    collar = 2.0 * (sol.y[-1] - sol.y[0]) / (sol.grid.n_base - 1)
    res = float(np.max(np.abs(riccati[np.abs(s) > 2 * collar]))) if np.any(np.abs(s) > 2 * collar) else 0.0
    return F, G, G1, {"riccati_residual": res, "h_ctilde": h_ctilde}


def boundary_values(sol: RayleighSolution):
    """(phi1(0,c), d_y phi1(0,c)) - the pair entering J(c)."""
    return complex(sol.phi1[0]), complex(sol.dphi1[0])

"""Principal-value and regularized integral primitives.

Everything lives on the square-root coordinate interval I_v = (-v(1), v(1)):
the finite Hilbert transform H(g)(c~) = p.v. int g(z)/(c~ - z) dz, the
operators Z(g) = g' - g/c~ and A^(z)(g) (average value on [c~, z]), and the
building blocks II_2, II_3, II_{1,1}, II_{1,2}, E of the damping kernels.

PV integrals use singularity subtraction with the analytic log term; the
c-derivative of H-type quantities is taken through the exact identities

    rho(c) d_c ( H(g)(c~) / (2c~) ) = (u(1)-c)/(4c~) * H(zZ(g))(c~) + g(v1) v1 / 2

(valid for even g), which stay accurate down to the c~ -> 0 corner where
finite-difference stencils in c~ degrade.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EndpointTooClose, NonzeroOrigin, NotEven, OutOfRange
from .profiles import CriticalValue, ShearProfile, SqrtCoordinate, critical_value
from .rayleigh import RayleighSolution

__all__ = [
    "PVGrid",
    "make_pv_grid",
    "HilbertTable",
    "hilbert_pv",
    "op_Z",
    "op_average",
    "SingularWorkspace",
    "pv_inverse",
    "II_2",
    "II_3",
    "II_11",
    "II_12",
    "E_op",
]

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def _trapz(f: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)).real) if np.isrealobj(f) \
        else complex(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))


@dataclass(frozen=True)
class PVGrid:
    """Symmetric midpoint grid on (-v(1), v(1)) carrying the PV quadrature."""

    nodes: np.ndarray
    weights: np.ndarray
    v1: float
    endpoint_gap: float


def make_pv_grid(coord: SqrtCoordinate, n: int = 2048) -> PVGrid:
    v1 = coord.v1
    dz = 2.0 * v1 / n
    nodes = -v1 + (np.arange(n) + 0.5) * dz
    return PVGrid(nodes=nodes, weights=np.full(n, dz), v1=v1, endpoint_gap=v1 / 4096.0)


class HilbertTable:
    """Cached kernel for H(g)(c~) at a fixed set of interior targets."""

    def __init__(self, pv: PVGrid, targets: np.ndarray):
        targets = np.asarray(targets, dtype=float)
        if np.any(pv.v1 - np.abs(targets) < pv.endpoint_gap):
            raise EndpointTooClose(
                "Hilbert targets must stay an endpoint_gap away from +-v(1)"
            )
        self.pv = pv
        self.targets = targets
        diff = targets[:, None] - pv.nodes[None, :]
        ctol = 1e-8 * pv.weights[0]
        self._collide = np.abs(diff) < ctol
        with np.errstate(divide="ignore"):
            kern = pv.weights[None, :] / diff
        kern[self._collide] = 0.0
        self._kern = kern
        self._rowsum = kern.sum(axis=1)
        self._log = np.log((pv.v1 + targets) / (pv.v1 - targets))
        self._ncollide = self._collide.sum(axis=1)

    def apply(self, fn, dfn=None) -> np.ndarray:
        """H(fn)(targets) by singularity subtraction (midpoint composite rule)."""
        gz = fn(self.pv.nodes)
        gt = fn(self.targets)
        out = self._kern @ gz - self._rowsum * gt + gt * self._log
        hit = self._ncollide > 0
        if np.any(hit):
            if dfn is None:
                d = 1e-7 * self.pv.v1
                dgt = (fn(self.targets[hit] + d) - fn(self.targets[hit] - d)) / (2 * d)
            else:
                dgt = dfn(self.targets[hit])
            out[hit] -= dgt * self._ncollide[hit] * self.pv.weights[0]
        return out


def hilbert_pv(fn, c_tilde, pv: PVGrid, dfn=None):
    """p.v. int_{I_v} fn(z)/(c~ - z) dz at the given targets."""
    scalar = np.isscalar(c_tilde)
    ct = np.atleast_1d(np.asarray(c_tilde, dtype=float))
    table = HilbertTable(pv, ct)
    out = table.apply(fn, dfn)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# appendix operators


def op_Z(fn, dfn, c_tilde, d2_at_0: float = 0.0, v1: float = 1.0):
    """Z(g)(c~) = g'(c~) - g(c~)/c~ for even g with g(0)=0.

    The removable point at c~=0 is filled from the quadratic expansion,
    Z(g)(c~) ~ g''(0) c~ / 2.
    """
    probe = np.linspace(0.1, 0.9, 5) * v1
    pv_vals = np.atleast_1d(fn(probe))
    if np.max(np.abs(pv_vals - np.atleast_1d(fn(-probe)))) > 1e-8 * max(1.0, float(np.max(np.abs(pv_vals)))):
        raise NotEven("Z requires an even function")
    if abs(float(np.atleast_1d(fn(np.zeros(1)))[0])) > 1e-10:
        raise NonzeroOrigin("Z requires g(0) = 0")
    scalar = np.isscalar(c_tilde)
    ct = np.atleast_1d(np.asarray(c_tilde, dtype=float))
    out = np.empty_like(ct)
    near = np.abs(ct) < 1e-6 * v1
    far = ~near
    if np.any(far):
        out[far] = dfn(ct[far]) - fn(ct[far]) / ct[far]
    if np.any(near):
        out[near] = 0.5 * d2_at_0 * ct[near]
    return out[0] if scalar else out


def op_average(fn, z_end: float, c_tilde, n_sub: int = 513):
    """A^(z)(g)(c~) = average of g on [c~, z]; equals g(z) at c~ = z."""
    scalar = np.isscalar(c_tilde)
    ct = np.atleast_1d(np.asarray(c_tilde, dtype=float))
    out = np.empty(len(ct))
    for i, c in enumerate(ct):
        if c == z_end:
            out[i] = fn(np.array([z_end]))[0]
            continue
        xs = np.linspace(c, z_end, n_sub)
        out[i] = _trapz(fn(xs), xs) / (z_end - c)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# profile-bound workspace


class SingularWorkspace:
    """Hilbert-transform machinery bound to (profile, coord, c~ targets).

    Provides P(c), dP(c), A1(c) and the II_{1,1}-type brackets for data
    functions, vectorized across the target grid.  The exact-derivative
    identity R(g) = rho d_c(H(g)/(2c~)) is used throughout.
    """

    def __init__(self, profile: ShearProfile, coord: SqrtCoordinate,
                 targets, pv: PVGrid | None = None, n_pv: int = 2048,
                 n_int: int = 8193):
        self.profile = profile
        self.coord = coord
        self.pv = pv if pv is not None else make_pv_grid(coord, n_pv)
        ct = np.atleast_1d(np.asarray(targets, dtype=float))
        if np.any((ct <= 0) | (ct >= coord.v1)):
            raise OutOfRange("targets must lie in (0, v(1))")
        self.ct = ct
        self.table = HilbertTable(self.pv, ct)
        self.y_c = coord.inverse(ct)
        self.duc = profile.du(self.y_c)
        self.d2uc = profile.d2u(self.y_c)
        self.c = profile.u0 + ct * ct
        self.rho = (self.c - profile.u0) * (profile.u1 - self.c)
        self.u1_minus_c = profile.u1 - self.c
        # dense grid for Int(phi) accumulations
        self._yint = np.linspace(0.0, 1.0, n_int)
        # f2 = (v^-1)' on the PV nodes and targets
        self._f2 = coord.dinverse
        self._df2 = coord.d2inverse
        z = self.pv.nodes
        self._f2_nodes = coord.dinverse(z)
        self._zZf2 = z * coord.d2inverse(z) - self._f2_nodes
        self._f2_v1 = 1.0 / coord.dv(np.array([1.0]))[0]
        self._H_zZf2 = self.table.apply(
            lambda x: x * coord.d2inverse(x) - coord.dinverse(x)
        )
        self._R_f2 = self.u1_minus_c / (4.0 * ct) * self._H_zZf2 \
            + 0.5 * self._f2_v1 * coord.v1
        self._H_f2 = self.table.apply(coord.dinverse, coord.d2inverse)

    # -- scalar tables -----------------------------------------------------

    def P(self) -> np.ndarray:
        """p.v. int_0^1 dy/(u(y)-c) = -H((v^-1)')(c~)/(2 c~)."""
        return -self._H_f2 / (2.0 * self.ct)

    def dP(self) -> np.ndarray:
        """d_c P via the exact identity; equals A1/(rho u'(y_c))."""
        return -self._R_f2 / self.rho

    def A1(self) -> np.ndarray:
        """A1(c) = rho u'(y_c) d_c P(c)."""
        return -self.duc * self._R_f2

    # -- data-function brackets ---------------------------------------------

    def _int_phi(self, phi):
        vals = phi(self._yint)
        acc = np.concatenate(
            [[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(self._yint))]
        )

        def int_phi(y):
            return np.interp(np.abs(y), self._yint, acc)

        return int_phi, acc[-1]

    def rho_II11(self, phi) -> np.ndarray:
        """rho(c) * II_{1,1}(phi)(c) (bounded through the c~ -> 0 corner)."""
        int_phi, int_phi_1 = self._int_phi(phi)
        coord = self.coord

        def f1f2(z):
            za = np.abs(z)
            y = coord.inverse(za)
            return int_phi(y) * coord.dinverse(za)

        def zZ_f1f2(z):
            za = np.abs(z)
            y = coord.inverse(za)
            f2 = coord.dinverse(za)
            f1 = int_phi(y)
            d = np.sign(z) * phi(y) * f2 ** 2 + f1 * coord.d2inverse(z)
            return z * d - f1 * f2

        H = self.table.apply(zZ_f1f2)
        R_f1f2 = self.u1_minus_c / (4.0 * self.ct) * H \
            + 0.5 * int_phi_1 * self._f2_v1 * coord.v1
        f1_t = int_phi(self.y_c)
        return -R_f1f2 + f1_t * self._R_f2

    def II11(self, phi) -> np.ndarray:
        return self.rho_II11(phi) / self.rho


def pv_inverse(profile: ShearProfile, coord: SqrtCoordinate, c,
               pv: PVGrid | None = None):
    """(P(c), dP(c)) for P = p.v. int_0^1 dy/(u(y)-c); c in (u(0), u(1))."""
    scalar = np.isscalar(c)
    cs = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any((cs <= profile.u0) | (cs >= profile.u1)):
        raise OutOfRange("pv_inverse requires c strictly inside (u(0), u(1))")
    ct = np.sqrt(cs - profile.u0)
    ws = SingularWorkspace(profile, coord, ct, pv=pv)
    P, dP = ws.P(), ws.dP()
    return (float(P[0]), float(dP[0])) if scalar else (P, dP)


def II_11(profile: ShearProfile, coord: SqrtCoordinate, phi, c,
          pv: PVGrid | None = None):
    """p.v. int_0^1 (Int(phi)(y) - Int(phi)(y_c)) / (u(y)-u(y_c))^2 dy."""
    scalar = np.isscalar(c)
    cs = np.atleast_1d(np.asarray(c, dtype=float))
    ct = np.sqrt(cs - profile.u0)
    ws = SingularWorkspace(profile, coord, ct, pv=pv)
    out = ws.II11(phi)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# II_2: PV with first-order singular model plus graded-panel remainder


def _graded_panels(y_c: float, side: str, delta: float, ratio: float = 1.6):
    """Panel edges from y_c outward to 0 or 1, geometrically graded."""
    edges = [0.0]
    x = delta
    lim = y_c if side == "left" else 1.0 - y_c
    while x < lim:
        edges.append(x)
        x *= ratio
    edges.append(lim)
    return np.asarray(edges)


def II_2(profile: ShearProfile, cv, n_min_panels: int = 4) -> float:
    """p.v. int_0^1 (u'(y)-u'(y_c)) / (u(y)-c)^2 dy.

    The 1/(y-y_c) pole (coefficient u''(y_c)/u'(y_c)^2) and the constant
    next term are removed analytically; the smooth remainder is integrated
    with 8-point Gauss on panels graded toward y_c.
    """
    if not isinstance(cv, CriticalValue):
        cv = critical_value(profile, cv)
    y_c = cv.y_c
    if not (0.0 < y_c < 1.0):
        raise OutOfRange("II_2 requires c strictly inside (u(0), u(1))")
    c = cv.c_r
    up = float(profile.du(np.array([y_c]))[0])
    upp = float(profile.d2u(np.array([y_c]))[0])
    uppp = float(profile.d3u(np.array([y_c]))[0])
    a = upp / up**2
    b = uppp / (2.0 * up**2) - upp**2 / up**3

    def remainder(y):
        s = y - y_c
        return (profile.du(y) - up) / (profile.u(y) - c) ** 2 - a / s - b

    total = a * np.log((1.0 - y_c) / y_c) + b
    delta = min(y_c, 1.0 - y_c) / 8.0
    for side in ("left", "right"):
        edges = _graded_panels(y_c, side, delta)
        sgn = -1.0 if side == "left" else 1.0
        lo = y_c + sgn * edges[:-1]
        hi = y_c + sgn * edges[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * _GL8_X[None, :]
        vals = remainder(pts.ravel()).reshape(pts.shape)
        total += float(np.sum(vals @ _GL8_W * half) * sgn)
    return float(total)


# ---------------------------------------------------------------------------
# phi1-dependent integrals on a Rayleigh solution grid


def _integral_01(grid, q: np.ndarray):
    """int_0^1 q dy through the center-based third-order cumulative."""
    from .rayleigh import cumint_from_center

    acc = cumint_from_center(grid, q, 0)
    return acc[-1] - acc[0]


def II_3(sol: RayleighSolution) -> float:
    """int_0^1 (1/phi1^2 - 1)/(u-c)^2 dy; <= 0 on D0."""
    grid = sol.grid
    if grid.cv.y_c <= 0.0 or grid.cv.y_c >= 1.0:
        raise OutOfRange("II_3 requires c strictly inside (u(0), u(1))")
    q = np.empty(len(grid.y))
    mask = np.arange(len(grid.y)) != grid.ic
    ph = np.real(sol.phi1)
    q[mask] = (1.0 / ph[mask] ** 2 - 1.0) / (grid.s[mask] ** 2 * grid.u1[mask] ** 2)
    q[grid.ic] = -sol.alpha**2 / (3.0 * grid.u1[grid.ic] ** 2)
    return float(_integral_01(grid, q))


def II_12(sol: RayleighSolution, phi_vals: np.ndarray) -> float:
    """Double integral of phi against (phi1(y)/phi1(z)^2 - 1)/(u(z)-c)^2.

    Contracted to one pass: II_{1,2} = int_0^1 [P1(z)/phi1(z)^2 - P0(z)]
    /(u(z)-c)^2 dz with P1 = int_{y_c}^z phi*phi1, P0 = int_{y_c}^z phi.
    """
    from .rayleigh import cumint_from_center

    grid = sol.grid
    p1 = cumint_from_center(grid, phi_vals * sol.phi1, 0)
    p0 = cumint_from_center(grid, phi_vals, 0)
    bracket = p1 / sol.phi1**2 - p0
    q = np.zeros(len(grid.y), dtype=bracket.dtype)
    mask = np.arange(len(grid.y)) != grid.ic
    q[mask] = bracket[mask] / (grid.s[mask] ** 2 * grid.u1[mask] ** 2)
    out = _integral_01(grid, q)
    return float(np.real(out)) if np.isrealobj(phi_vals) and np.isrealobj(sol.phi1) else complex(out)


def E_op(sol: RayleighSolution, phi_vals: np.ndarray):
    """E(phi)(c) = int_{y_c}^0 phi(y) phi1(y,c) dy."""
    from .rayleigh import cumint_from_center

    grid = sol.grid
    f = phi_vals * sol.phi1
    val = cumint_from_center(grid, f, 0)[0]
    return float(np.real(val)) if np.isrealobj(f) else complex(val)

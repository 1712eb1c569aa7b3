"""Spectral scalar functions of c: A1, A, B, J, A2, B2, and the embedding scan.

Tables are sampled on a grid uniform in the square-root variable c~ (which
resolves the y_c -> 0 corner), endpoints excluded by the PV gap.  Definitions:

    A  = A1 + u'(y_c) rho II_3          B  = pi rho u''(y_c)/u'(y_c)^2
    A2 = (u(0)-c) A + J                 B2 = (u(0)-c) B
    J  = u'(y_c)(u(1)-c) / (phi1(0,c) phi1'(0,c))

The absence of embedding eigenvalues is certified numerically by both
A^2+B^2 and A2^2+B2^2 staying away from zero on the grid (they can only
vanish where u''(y_c) = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBoundary
from .profiles import ShearProfile, SqrtCoordinate, critical_value
from .rayleigh import RayleighSolution, solve_phi1
from .singular import II_2, II_3, PVGrid, SingularWorkspace

__all__ = [
    "SpectralTables",
    "ctilde_derivative",
    "c_derivative",
    "build_tables",
    "compute_A1",
    "compute_AB",
    "compute_J",
    "compute_A2B2",
    "scan_embedding",
    "fitted_constant",
]


@dataclass
class SpectralTables:
    """Scalar quantities on the c~ grid; immutable by convention after build."""

    profile: ShearProfile
    coord: SqrtCoordinate
    alpha: float
    ctilde: np.ndarray
    c: np.ndarray
    y_c: np.ndarray
    duc: np.ndarray       # u'(y_c)
    d2uc: np.ndarray      # u''(y_c)
    rho: np.ndarray
    rho0: np.ndarray
    rho1: np.ndarray
    A1: np.ndarray
    II2: np.ndarray
    II3: np.ndarray
    A: np.ndarray
    B: np.ndarray
    J: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    phi1_0: np.ndarray
    dphi1_0: np.ndarray
    P: np.ndarray
    dP: np.ndarray
    n_y: int
    solutions: list = field(default=None, repr=False)
    workspace: SingularWorkspace = field(default=None, repr=False)

    def csv_rows(self):
        header = "c,y_c,A1,A,B,J,A2,B2,II2,II3"
        cols = [self.c, self.y_c, self.A1, self.A, self.B, self.J,
                self.A2, self.B2, self.II2, self.II3]
        return header, np.column_stack(cols)


def ctilde_grid(coord: SqrtCoordinate, n_c: int) -> np.ndarray:
    """Midpoint grid on (0, v(1)): excludes both endpoints by half a cell."""
    return (np.arange(n_c) + 0.5) * coord.v1 / n_c


def compute_AB(A1, duc, rho, II3, d2uc):
    """A = A1 + u'(y_c) rho II_3;  B = pi rho u''(y_c)/u'(y_c)^2."""
    A = A1 + duc * rho * II3
    B = np.pi * rho * d2uc / duc**2
    return A, B


def compute_J(alpha: float, duc, u1_minus_c, phi1_0, dphi1_0, y_c=None):
    """J = u'(y_c)(u(1)-c)/(phi1(0,c) phi1'(0,c)); requires alpha > 0."""
    denom = np.real(phi1_0) * np.real(dphi1_0)
    if alpha <= 0:
        raise DegenerateBoundary("J is defined for alpha > 0 (phi1'(0,c)=0 at alpha=0)")
    bad = np.abs(denom) < 1e-14 * alpha**2 * np.maximum(np.asarray(y_c if y_c is not None else 1.0), 1e-8)
    if np.any(bad):
        raise DegenerateBoundary("phi1(0,c) phi1'(0,c) vanishes away from y_c=0")
    return duc * u1_minus_c / denom


def compute_A2B2(c, u0, A, B, J):
    """A2 = (u(0)-c) A + J;  B2 = (u(0)-c) B."""
    return (u0 - c) * A + J, (u0 - c) * B


def compute_A1(profile: ShearProfile, coord: SqrtCoordinate, c, pv: PVGrid | None = None):
    """A1(c) = rho u'(y_c) d_c P(c) through the exact Hilbert identity."""
    scalar = np.isscalar(c)
    cs = np.atleast_1d(np.asarray(c, dtype=float))
    ws = SingularWorkspace(profile, coord, np.sqrt(cs - profile.u0), pv=pv)
    out = ws.A1()
    return float(out[0]) if scalar else out


def build_tables(
    profile: ShearProfile,
    coord: SqrtCoordinate,
    alpha: float,
    n_c: int = 1024,
    n_y: int = 1025,
    pv: PVGrid | None = None,
    tol: float = 1e-12,
    keep_solutions: bool = True,
    workspace: SingularWorkspace | None = None,
    c_values=None,
) -> SpectralTables:
    """Assemble the full scalar table on the c~ grid (one phi1 solve per node).

    c_values overrides the default midpoint c~ grid with explicit c's.
    """
    if c_values is not None:
        ct = np.sqrt(np.asarray(c_values, dtype=float) - profile.u0)
        n_c = len(ct)
    else:
        ct = ctilde_grid(coord, n_c)
    ws = workspace if workspace is not None else SingularWorkspace(profile, coord, ct, pv=pv)
    c = ws.c
    y_c = ws.y_c
    duc = ws.duc
    d2uc = ws.d2uc
    rho = ws.rho
    rho0 = rho / duc
    rho1 = c - profile.u0

    A1 = ws.A1()
    P = ws.P()
    dP = ws.dP()

    II2 = np.empty(n_c)
    II3 = np.empty(n_c)
    phi1_0 = np.empty(n_c)
    dphi1_0 = np.empty(n_c)
    sols: list[RayleighSolution] = []
    for j in range(n_c):
        cv = critical_value(profile, c[j])
        sol = solve_phi1(profile, alpha, cv, tol=tol, n=n_y)
        II2[j] = II_2(profile, cv)
        II3[j] = II_3(sol) if alpha > 0 else 0.0
        phi1_0[j] = float(np.real(sol.phi1[0]))
        dphi1_0[j] = float(np.real(sol.dphi1[0]))
        if keep_solutions:
            sols.append(sol)

    A, B = compute_AB(A1, duc, rho, II3, d2uc)
    if alpha > 0:
        J = compute_J(alpha, duc, profile.u1 - c, phi1_0, dphi1_0, y_c)
    else:
        J = np.full(n_c, np.inf)
    A2, B2 = compute_A2B2(c, profile.u0, A, B, J)

    return SpectralTables(
        profile=profile, coord=coord, alpha=alpha,
        ctilde=ct, c=c, y_c=y_c, duc=duc, d2uc=d2uc,
        rho=rho, rho0=rho0, rho1=rho1,
        A1=A1, II2=II2, II3=II3, A=A, B=B, J=J, A2=A2, B2=B2,
        phi1_0=phi1_0, dphi1_0=dphi1_0, P=P, dP=dP, n_y=n_y,
        solutions=sols if keep_solutions else None,
        workspace=ws,
    )


def normalized_gaps(tables: SpectralTables):
    """The two non-degeneracy ratios, scaled by their natural sizes."""
    al = tables.alpha
    s1 = (1.0 + al * tables.rho0) ** 2
    s2 = s1 * (1.0 + al * tables.y_c) ** 4 / max(al, 1e-30) ** 4
    return (tables.A**2 + tables.B**2) / s1, (tables.A2**2 + tables.B2**2) / s2


def scan_embedding(
    profile: ShearProfile,
    coord: SqrtCoordinate,
    alpha: float,
    n_nodes: int = 1024,
    n_y: int = 1025,
    threshold: float = 1e-6,
    tables: SpectralTables | None = None,
) -> list[dict]:
    """Scan the c grid for embedding-eigenvalue candidates.

    A node is a candidate only if the normalized spectral gap dips below
    the threshold AND u''(y_c) is numerically zero there (the necessary
    condition: embedding eigenvalues need an inflection point on the
    critical line).  An empty list certifies the no-embedding hypothesis
    on this grid.
    """
    if tables is None:
        tables = build_tables(profile, coord, alpha, n_c=n_nodes, n_y=n_y,
                              keep_solutions=False)
    g1, g2 = normalized_gaps(tables)
    dip = np.minimum(g1, g2)
    tol_inflect = 1e-8 * max(
        1.0, float(np.max(np.abs(tables.profile.d2u(np.linspace(0, 1, 513)))))
    )
    hits = (dip < threshold) & (np.abs(tables.d2uc) < tol_inflect)
    return [
        {"c": float(tables.c[j]), "y_c": float(tables.y_c[j]),
         "gap": float(dip[j]), "d2u_yc": float(tables.d2uc[j])}
        for j in np.nonzero(hits)[0]
    ]


def ctilde_derivative(ctilde: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """d/dc~ on the uniform c~ grid: 5-point central stencil, one-sided edges."""
    h = ctilde[1] - ctilde[0]
    n = len(vals)
    out = np.empty_like(np.asarray(vals, dtype=float))
    v = np.asarray(vals, dtype=float)
    out[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    out[0] = v[:5] @ edge
    out[1] = v[1:6] @ edge
    out[-1] = -(v[-5:][::-1] @ edge)
    out[-2] = -(v[-6:-1][::-1] @ edge)
    return out


def c_derivative(tables: SpectralTables, vals: np.ndarray, order: int = 1) -> np.ndarray:
    """d^k/dc^k via c~ stencils and the chain rule d_c = d_c~/(2c~)."""
    d = np.asarray(vals, dtype=float)
    for _ in range(order):
        d = ctilde_derivative(tables.ctilde, d) / (2.0 * tables.ctilde)
    return d


def fitted_constant(values: np.ndarray) -> float:
    """C >= 1 with values in [1/C, C]: the fitted-constant protocol."""
    v = np.abs(np.asarray(values, dtype=float))
    v = v[np.isfinite(v) & (v > 0)]
    if len(v) == 0:
        return float("inf")
    return float(max(np.max(v), 1.0 / np.min(v)))

"""Independent ground truth: matrix discretization and direct evolution.

The generator R_alpha = -(d_yy - alpha^2)^{-1} (u'' - u (d_yy - alpha^2)) is
assembled from a 4th-order finite-difference Laplacian with Dirichlet rows;
time evolution uses the matrix exponential (no time-integration error), so
the oracle is strictly more trustworthy than the representation pipeline it
cross-checks.  Complex-c resolvent solves use a tridiagonal FD solver on a
grid automatically refined to resolve the critical layer width Im c / u'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NearSingular, SingularAssembly, StepFailure
from .evolution import EvolutionState
from .profiles import ShearProfile

__all__ = [
    "OperatorMatrix",
    "fornberg_weights",
    "derivative_matrix",
    "assemble",
    "evolve_direct",
    "make_state",
    "solve_inhom_bvp",
    "limiting_absorption",
    "discrete_spectrum",
]


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at z from nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def derivative_matrix(y: np.ndarray, der: int, order: int = 4) -> np.ndarray:
    """Dense differentiation matrix on the nodes y (one-sided near edges)."""
    n = len(y)
    width = der + order  # nodes per stencil
    half = width // 2
    D = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = np.arange(lo, lo + width)
        D[i, idx] = fornberg_weights(y[i], y[idx], der)
    return D


@dataclass
class OperatorMatrix:
    """Discrete R_alpha with its grid and the elliptic operator L_alpha."""

    profile: ShearProfile
    alpha: float
    n: int
    y_full: np.ndarray
    y: np.ndarray          # interior nodes (Dirichlet eliminated)
    L: np.ndarray          # d_yy - alpha^2 on interior
    D1: np.ndarray         # d_y on interior
    R: np.ndarray
    transport_only: bool
    h: float
    weights: np.ndarray = field(default=None)  # L2 quadrature weights

    def vorticity(self, psi: np.ndarray) -> np.ndarray:
        return -(self.L @ psi)

    def stream_from_vorticity(self, omega: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.L, -omega)

    def l2_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(f) ** 2)))

    def velocity_norm(self, psi: np.ndarray) -> float:
        dpsi = self.D1 @ psi
        return float(np.sqrt(np.sum(
            self.weights * (self.alpha**2 * np.abs(psi) ** 2 + np.abs(dpsi) ** 2)
        )))


def assemble(profile: ShearProfile, alpha: float, n: int = 513,
             transport_only: bool = False) -> OperatorMatrix:
    """Build R_alpha on a uniform Dirichlet grid of n points spanning [-1,1]."""
    if n < 64:
        raise SingularAssembly(f"oracle grid n = {n} < 64")
    y_full = np.linspace(-1.0, 1.0, n)
    y = y_full[1:-1]
    h = y_full[1] - y_full[0]
    D2 = derivative_matrix(y_full, 2, order=4)[1:-1, 1:-1]
    D1 = derivative_matrix(y_full, 1, order=4)[1:-1, 1:-1]
    L = D2 - alpha**2 * np.eye(n - 2)
    u = profile.u(y)
    if transport_only:
        M = -u[:, None] * L
    else:
        M = np.diag(profile.d2u(y)) - u[:, None] * L
    try:
        R = -np.linalg.solve(L, M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SingularAssembly(f"L_alpha not invertible: {exc}") from exc
    w = np.full(n - 2, h)
    return OperatorMatrix(
        profile=profile, alpha=alpha, n=n, y_full=y_full, y=y,
        L=L, D1=D1, R=R, transport_only=transport_only, h=h, weights=w,
    )


def evolve_direct(M: OperatorMatrix, psi0: np.ndarray, t_samples: np.ndarray) -> np.ndarray:
    """psi_hat(t) = exp(-i alpha t R) psi0 at the requested times.

    Uniformly spaced samples reuse one scaling-and-squaring exponential;
    otherwise each time gets its own expm.
    """
    t = np.asarray(t_samples, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    out = np.empty((len(t), len(psi0)), dtype=complex)
    dt = np.diff(t)
    uniform = len(t) > 2 and np.allclose(dt, dt[0], rtol=1e-12, atol=1e-15)
    if uniform and t[0] >= 0:
        E = sla.expm(-1j * M.alpha * dt[0] * M.R)
        cur = sla.expm(-1j * M.alpha * t[0] * M.R) @ psi0 if t[0] > 0 else psi0.copy()
        for k in range(len(t)):
            out[k] = cur
            if k < len(t) - 1:
                cur = E @ cur
    else:
        for k, tk in enumerate(t):
            out[k] = sla.expm(-1j * M.alpha * tk * M.R) @ psi0 if tk != 0 else psi0
    if not np.all(np.isfinite(out)):
        raise StepFailure("non-finite values in direct evolution")
    return out


def discrete_spectrum(M: OperatorMatrix, threshold_factor: float = 10.0):
    """Full eigensolve; eigenvalues with |Im| above the calibrated threshold.

    Returns a report dict with all eigenvalues, the threshold actually used,
    the flagged candidates, and (when any exist) a spectral projector onto
    their span for the evolution precondition.
    """
    lam, V = np.linalg.eig(M.R)
    abs_im = np.abs(lam.imag)
    med = float(np.median(abs_im))
    thr = threshold_factor * med
    flagged = np.nonzero(abs_im > thr)[0]
    proj = None
    if len(flagged) > 0:
        Vs = V[:, flagged]
        # oblique projector onto the flagged eigenspace
        proj = Vs @ np.linalg.pinv(Vs)
    return {
        "eigenvalues": lam,
        "median_abs_im": med,
        "threshold": thr,
        "flagged_indices": flagged,
        "max_abs_im": float(np.max(abs_im)),
        "projector": proj,
    }


def make_state(
    M: OperatorMatrix,
    omega0,
    t_samples,
    probe_y: float = 0.6,
    project: bool = True,
    spectrum_report: dict | None = None,
) -> EvolutionState:
    """Evolve omega0 and package the diagnostics series.

    When project is set, any flagged discrete eigenmodes are removed from
    psi0 first; for profiles without discrete spectrum this is a no-op and
    the report says so.
    """
    om0 = np.asarray(omega0(M.y), dtype=complex)
    psi0 = M.stream_from_vorticity(om0)
    report = {"projection": "no-op (no discrete spectrum flagged)"}
    if project:
        if spectrum_report is None:
            spectrum_report = discrete_spectrum(M)
        if spectrum_report["projector"] is not None:
            psi0 = psi0 - spectrum_report["projector"] @ psi0
            report = {
                "projection": f"removed {len(spectrum_report['flagged_indices'])} modes",
            }
        report["max_abs_im"] = spectrum_report["max_abs_im"]
        report["threshold"] = spectrum_report["threshold"]

    t = np.asarray(t_samples, dtype=float)
    psi = evolve_direct(M, psi0, t)
    omega = -(psi @ M.L.T)
    V1 = -(psi @ M.D1.T)
    V2 = 1j * M.alpha * psi
    norm_V = np.array([M.velocity_norm(psi[k]) for k in range(len(t))])
    norm_V2 = M.alpha * np.array([M.l2_norm(psi[k]) for k in range(len(t))])
    j0 = int(np.argmin(np.abs(M.y - 0.0)))
    jp = int(np.argmin(np.abs(M.y - probe_y)))
    return EvolutionState(
        alpha=M.alpha, t_samples=t, y=M.y, psi_hat=psi, omega_hat=omega,
        V1_hat=V1, V2_hat=V2, norm_V=norm_V, norm_V2=norm_V2,
        omega_center_abs=np.abs(omega[:, j0]), omega_probe_abs=np.abs(omega[:, jp]),
        probe_y=float(M.y[jp]), projection_report=report,
    )


# ---------------------------------------------------------------------------
# complex-c boundary value problem


def _bvp_grid_size(profile: ShearProfile, c: complex, n: int | None) -> int:
    if n is not None:
        return n
    dumax = float(np.max(np.abs(profile.du(np.linspace(-1, 1, 257)))))
    eps = abs(c.imag)
    if eps == 0:
        raise NearSingular("solve_inhom_bvp requires Im c != 0")
    layer = eps / max(dumax, 1e-30)
    h_needed = layer / 40.0
    n = int(2 ** np.ceil(np.log2(2.0 / h_needed))) + 1
    return int(min(max(n, 4097), 2**21 + 1))


def solve_inhom_bvp(profile: ShearProfile, alpha: float, c: complex, f,
                    n: int | None = None):
    """Solve Phi'' - alpha^2 Phi - u''/(u-c) Phi = f, Phi(-1)=Phi(1)=0.

    Tridiagonal 2nd-order solve; the grid is refined automatically so the
    critical layer (width ~ Im c / u') is resolved.  Returns (y, Phi) on
    the full grid including the boundary zeros.
    """
    c = complex(c)
    n = _bvp_grid_size(profile, c, n)
    y = np.linspace(-1.0, 1.0, n)
    h = y[1] - y[0]
    yi = y[1:-1]
    u = profile.u(yi)
    umc = u - c
    if np.min(np.abs(umc)) < 1e-13:
        raise NearSingular("u(y)-c vanishes at a grid node")
    diag = -2.0 / h**2 - alpha**2 - profile.d2u(yi) / umc
    off = np.ones(n - 3, dtype=complex) / h**2
    rhs = np.asarray(f(yi), dtype=complex)
    ab = np.zeros((3, n - 2), dtype=complex)
    ab[0, 1:] = off
    ab[1, :] = diag
    ab[2, :-1] = off
    phi = sla.solve_banded((1, 1), ab, rhs)
    out = np.zeros(n, dtype=complex)
    out[1:-1] = phi
    return y, out


def limiting_absorption(
    profile: ShearProfile,
    alpha: float,
    c_real: float,
    eps_sequence,
    omega0,
    phi_plus=None,
    n: int | None = None,
    side: float = +1.0,
):
    """Convergence experiment Phi(c + i eps) -> Phi_+ as eps -> 0+.

    Solves the resolvent BVP with f = omega0/(i alpha (u - c)) for each eps,
    reports sup-norm Cauchy differences between consecutive solutions, and,
    when phi_plus = (y_ref, values) is supplied, the direct sup error
    against the assembled limit function.
    """
    eps_sequence = np.asarray(sorted(eps_sequence, reverse=True), dtype=float)
    sols = []
    grids = []
    for eps in eps_sequence:
        c = complex(c_real, side * eps)

        def f(yv, c=c):
            return omega0(yv) / (1j * alpha * (profile.u(yv) - c))

        y, phi = solve_inhom_bvp(profile, alpha, c, f, n=n)
        grids.append(y)
        sols.append(phi)
    y_ref = grids[-1]
    interp = [np.interp(y_ref, g, np.real(s)) + 1j * np.interp(y_ref, g, np.imag(s))
              for g, s in zip(grids, sols)]
    cauchy = [float(np.max(np.abs(interp[k + 1] - interp[k])))
              for k in range(len(interp) - 1)]
    report = {
        "eps": eps_sequence,
        "cauchy_sup_diffs": np.asarray(cauchy),
        "y": y_ref,
        "solutions": interp,
    }
    if phi_plus is not None:
        yp, vp = phi_plus
        vp_i = np.interp(y_ref, yp, np.real(vp)) + 1j * np.interp(y_ref, yp, np.imag(vp))
        report["limit_sup_errors"] = np.asarray(
            [float(np.max(np.abs(s - vp_i))) for s in interp]
        )
        report["limit_sup_norm"] = float(np.max(np.abs(vp_i)))
    return report

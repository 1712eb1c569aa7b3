"""Time evolution from the spectral representation.

The stream function is recovered from the jump of the resolvent across the
continuous spectrum:

    psi_hat(t,y) = (1/2pi) int_{u(0)}^{u(1)} alpha (Phi_- - Phi_+)(y,c) e^{-i alpha c t} dc,

where the jump is carried entirely by the limiting-absorption coefficients
mu_+-(c), nu_+-(c) (the particular integrals cancel).  The c-integral is a
Filon-type quadrature, exact for the piecewise-quadratic interpolant of the
tabulated amplitude times e^{-i alpha c t}, so its accuracy is independent
of t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeries, SingularAssembly, UnderResolved
from .kernels import KernelTables
from .profiles import ShearProfile, SqrtCoordinate
from .spectral import SpectralTables

__all__ = [
    "LimitCoefficients",
    "EvolutionState",
    "limit_coefficients",
    "filon_weights",
    "filon_integral",
    "RepresentationWorkspace",
    "second_solution_factors",
    "phi_plus_pointwise",
    "psi_projected",
    "transport_reference",
    "decay_fit",
    "depletion_series",
]

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# limiting-absorption coefficients


@dataclass
class LimitCoefficients:
    """mu/nu boundary coefficients of Phi_+- on the c grid, plus diagnostics."""

    mu_o_plus: np.ndarray
    mu_o_minus: np.ndarray
    mu_e_plus: np.ndarray
    mu_e_minus: np.ndarray
    nu_e_plus: np.ndarray
    nu_e_minus: np.ndarray
    rho_mu1: np.ndarray   # rho(c) mu_1(c) = (A C_o + B D_o)/(A^2+B^2)
    nu1: np.ndarray
    mu2: np.ndarray
    denom_identity_residual: float
    jump_residual: float


def limit_coefficients(tables: SpectralTables, ktab: KernelTables) -> LimitCoefficients:
    """All six boundary coefficients from the tabulated C/D/E data."""
    al = tables.alpha
    A, B = tables.A, tables.B
    rho, duc = tables.rho, tables.duc
    C_o, D_o = ktab.C_o, ktab.D_o
    C_e, D_e, E_e = ktab.C_e, ktab.D_e, ktab.E_e
    u0c = tables.profile.u0 - tables.c  # u(0) - c
    W = u0c**2 * tables.phi1_0 * tables.dphi1_0  # phi(0,c) phi'(0,c)

    mu_o_plus = (-C_o + 1j * D_o) / (al * (A - 1j * B))
    mu_o_minus = (C_o + 1j * D_o) / (al * (A + 1j * B))

    den_p = W * (A - 1j * B) - rho * duc
    den_m = W * (A + 1j * B) - rho * duc
    mu_e_plus = (W * (1j * D_e - C_e) - 1j * E_e * duc * rho) / (al * den_p)
    mu_e_minus = (W * (1j * D_e + C_e) - 1j * E_e * duc * rho) / (al * den_m)
    nu_e_plus = -(1j * D_e - C_e - 1j * E_e * (A - 1j * B)) / (al * den_p)
    nu_e_minus = -(1j * D_e + C_e - 1j * E_e * (A + 1j * B)) / (al * den_m)

    rho_mu1 = (A * C_o + B * D_o) / (A**2 + B**2)
    nu1 = -(W * (A * C_e + B * D_e) - duc * rho * (B * E_e + C_e)) \
        / ((W * A - duc * rho) ** 2 + W**2 * B**2)
    mu2 = -W * nu1

    # phi(0)phi'(0)(A+iB) - u' rho = phi1(0) phi1'(0) (u(0)-c)(A2+iB2)
    rhs = tables.phi1_0 * tables.dphi1_0 * u0c * (tables.A2 + 1j * tables.B2)
    denom_res = float(np.max(np.abs(den_m - rhs) / np.maximum(np.abs(rhs), 1e-300)))

    jr = max(
        float(np.max(np.abs(mu_o_minus - mu_o_plus - 2.0 / al * rho_mu1))),
        float(np.max(np.abs(nu_e_minus - nu_e_plus - 2.0 / al * nu1))),
        float(np.max(np.abs(mu_e_minus - mu_e_plus - 2.0 / al * mu2))),
    )
    return LimitCoefficients(
        mu_o_plus=mu_o_plus, mu_o_minus=mu_o_minus,
        mu_e_plus=mu_e_plus, mu_e_minus=mu_e_minus,
        nu_e_plus=nu_e_plus, nu_e_minus=nu_e_minus,
        rho_mu1=rho_mu1, nu1=nu1, mu2=mu2,
        denom_identity_residual=denom_res, jump_residual=jr,
    )


# ---------------------------------------------------------------------------
# Filon quadrature, exact for quadratic interpolant x oscillator


def _osc_moments(omega: float, L: np.ndarray):
    """I_k = int_0^L x^k e^{-i omega x} dx for k = 0,1,2 (vectorized in L)."""
    z = omega * L
    I = np.empty((3, len(L)), dtype=complex)
    small = np.abs(z) < 0.3
    if np.any(small):
        Ls = L[small]
        zs = z[small]
        for k in range(3):
            acc = np.zeros_like(zs, dtype=complex)
            term = np.ones_like(zs, dtype=complex)
            for m in range(14):
                acc += term / (k + m + 1)
                term = term * (-1j * zs) / (m + 1)
            I[k, small] = Ls ** (k + 1) * acc
    big = ~small
    if np.any(big):
        Lb = L[big]
        w = omega
        E = np.exp(-1j * w * Lb)
        I0 = (1.0 - E) / (1j * w)
        I1 = (I0 - Lb * E) / (1j * w)
        I2 = (2.0 * I1 - Lb**2 * E) / (1j * w)
        I[0, big], I[1, big], I[2, big] = I0, I1, I2
    return I


def filon_weights(c_nodes: np.ndarray, omega: float, order: int = 2) -> np.ndarray:
    """Complex weights w with int F(c) e^{-i omega c} dc ~= sum w_j F(c_j).

    Exact for the piecewise-quadratic (order=2) or piecewise-linear
    (order=1) interpolant of F through the nodes, for any omega.
    """
    c = np.asarray(c_nodes, dtype=float)
    n = len(c)
    w = np.zeros(n, dtype=complex)
    if order == 1:
        a, b = c[:-1], c[1:]
        L = b - a
        I = _osc_moments(omega, L)
        ph = np.exp(-1j * omega * a)
        w[:-1] += ph * (I[0] - I[1] / L)
        w[1:] += ph * (I[1] / L)
        return w
    # quadratic panels over consecutive triples; a trailing pair gets a linear panel
    idx = np.arange(0, n - 2, 2)
    a, m, b = c[idx], c[idx + 1], c[idx + 2]
    d, L = m - a, b - a
    I = _osc_moments(omega, L)
    ph = np.exp(-1j * omega * a)
    w_a = ph * (I[2] - (d + L) * I[1] + d * L * I[0]) / (d * L)
    w_m = ph * (I[2] - L * I[1]) / (d * (d - L))
    w_b = ph * (I[2] - d * I[1]) / (L * (L - d))
    np.add.at(w, idx, w_a)
    np.add.at(w, idx + 1, w_m)
    np.add.at(w, idx + 2, w_b)
    if (n - 1) % 2 == 1:  # odd cell count: final linear panel
        a1, b1 = c[-2], c[-1]
        L1 = np.array([b1 - a1])
        I = _osc_moments(omega, L1)
        ph = np.exp(-1j * omega * a1)
        w[-2] += ph * (I[0, 0] - I[1, 0] / L1[0])
        w[-1] += ph * (I[1, 0] / L1[0])
    return w


def filon_integral(c_nodes, F, omega: float, check: bool = True, rtol: float = 0.05):
    """int F(c) e^{-i omega c} dc over the tabulated range.

    F may be a vector (len n_c) or a matrix (..., n_c).  When check is on,
    the quadratic- and linear-interpolant integrals are compared and
    UnderResolved is raised if they disagree beyond rtol relative to the
    natural scale (the amplitude is then under-tabulated in c).
    """
    F = np.asarray(F)
    wq = filon_weights(c_nodes, omega, order=2)
    Iq = F @ wq
    if check:
        wl = filon_weights(c_nodes, omega, order=1)
        Il = F @ wl
        rng = float(c_nodes[-1] - c_nodes[0])
        # natural size of an oscillatory integral of a resolved amplitude
        floor = float(np.max(np.abs(F))) * rng / (1.0 + abs(omega) * rng)
        scale = max(float(np.max(np.abs(Iq))), float(np.max(np.abs(Il))), floor, 1e-300)
        if float(np.max(np.abs(Iq - Il))) > rtol * scale:
            raise UnderResolved(
                f"oscillatory amplitude under-tabulated: quad/lin Filon differ by "
                f"{float(np.max(np.abs(Iq - Il))):.3e} vs scale {scale:.3e}"
            )
    return Iq


# ---------------------------------------------------------------------------
# pointwise representation workspace


def _cuminv2_contribs(s: np.ndarray, q: np.ndarray):
    """Per-cell int q(z)/s^2 dz with per-cell quadratic q (cells not crossing 0)."""
    sa, sb = s[:-1], s[1:]
    h = sb - sa
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = 1.0 / sa - 1.0 / sb
        lg = np.log(np.abs(sb / sa))
        m1 = lg + sa / sb - 1.0
        m2 = (h - 2.0 * sa * lg + sa - sa * sa / sb) - h * m1
    mlen = len(s)
    idx3 = np.arange(mlen - 1) + 2
    idx3[idx3 > mlen - 1] = np.arange(mlen - 1)[idx3 > mlen - 1] - 1
    x3 = s[idx3]
    d1 = (q[1:] - q[:-1]) / h
    with np.errstate(invalid="ignore", divide="ignore"):
        d2 = ((q[idx3] - q[1:]) / (x3 - sb) - d1) / (x3 - sa)
        d2 = np.where(np.isfinite(d2), d2, 0.0)
        out = q[:-1] * m0 + d1 * m1 + d2 * m2
    return out


def _interp_collar(y_nodes: np.ndarray, vals: np.ndarray, y_out: np.ndarray):
    """Monotone cubic interpolation across the excluded collar (no ringing
    at the logarithmic kink the second solution carries at y_c)."""
    from scipy.interpolate import PchipInterpolator

    out = PchipInterpolator(y_nodes, np.real(vals))(y_out).astype(complex)
    if np.iscomplexobj(vals) and np.any(np.imag(vals)):
        out += 1j * PchipInterpolator(y_nodes, np.imag(vals))(y_out)
    return out


def second_solution_factors(sol):
    """G_left, G_right = phi(y) * int_{0 or 1}^y dz/phi(z)^2 on the solve grid.

    Valid strictly left/right of y_c (NaN inside the collar); the smooth
    factor 1/(u1^2 phi1^2) is integrated against the 1/s^2 weight exactly.
    """
    grid = sol.grid
    s = grid.s
    ic = grid.ic
    q = 1.0 / (grid.u1**2 * np.real(sol.phi1) ** 2)
    contrib = _cuminv2_contribs(s, q)
    n = len(s)
    Gl = np.full(n, np.nan)
    Gr = np.full(n, np.nan)
    phi = np.real(sol.phi)
    if ic > 0:
        acc = np.concatenate([[0.0], np.cumsum(contrib[: ic - 1])])
        Gl[:ic] = phi[:ic] * acc  # int_0^{y_j}, j < ic
    if ic < n - 1:
        rev = np.concatenate([[0.0], np.cumsum(contrib[ic + 1:][::-1])])[::-1]
        Gr[ic + 1:] = phi[ic + 1:] * (-rev)  # int_1^{y_j}, j > ic
    return Gl, Gr


class RepresentationWorkspace:
    """Phi~ matrices on an output y-grid, ready for oscillatory synthesis."""

    def __init__(self, tables: SpectralTables, ktab: KernelTables,
                 coeffs: LimitCoefficients, y_out: np.ndarray,
                 collar_cells: float = 0.75):
        if tables.solutions is None:
            raise SingularAssembly("representation needs cached Rayleigh solutions")
        self.tables = tables
        self.alpha = tables.alpha
        self.y_out = np.asarray(y_out, dtype=float)
        if np.any(self.y_out < 0) or np.any(self.y_out > 1):
            raise SingularAssembly("y_out must lie in [0,1] (parity extends it)")
        self.coeffs = coeffs
        n_c = len(tables.c)
        n_y = len(self.y_out)
        Phi_o = np.zeros((n_y, n_c), dtype=complex)
        Phi_e = np.zeros((n_y, n_c), dtype=complex)
        dmu_o = coeffs.mu_o_minus - coeffs.mu_o_plus
        dmu_e = coeffs.mu_e_minus - coeffs.mu_e_plus
        dnu_e = coeffs.nu_e_minus - coeffs.nu_e_plus
        self.collar_width = np.empty(n_c)
        for j, sol in enumerate(tables.solutions):
            Gl, Gr = second_solution_factors(sol)
            grid = sol.grid
            y_c = grid.cv.y_c
            h = 1.0 / (grid.n_base - 1)
            collar = collar_cells * h
            self.collar_width[j] = collar
            phi = np.real(sol.phi)
            vo = np.where(grid.s < 0, Gl, Gr) * dmu_o[j]
            ve = np.where(grid.s < 0, Gl * dmu_e[j] + phi * dnu_e[j], Gr * dmu_e[j])
            ok = (np.abs(grid.s) > collar) | (grid.y < 1e-14) | (grid.y > 1 - 1e-14)
            ok &= np.isfinite(np.real(vo)) & np.isfinite(np.real(ve))
            # y=0 and y=1 are exact formula points even when close to y_c
            if grid.ic == 0 or y_c < collar:
                ok[0] = True
                vo[0] = 0.0
                ve[0] = phi[0] * dnu_e[j]
            yok = grid.y[ok]
            Phi_o[:, j] = _interp_collar(yok, vo[ok], self.y_out)
            Phi_e[:, j] = _interp_collar(yok, ve[ok], self.y_out)
        self.Phi_o = Phi_o
        self.Phi_e = Phi_e
        # exact endpoint columns: the jump vanishes continuously at c = u(0), u(1)
        u0, u1 = tables.profile.u0, tables.profile.u1
        self.c_ext = np.concatenate([[u0], tables.c, [u1]])
        z = np.zeros((n_y, 1), dtype=complex)
        self.Phi_o_ext = np.hstack([z, Phi_o, z])
        self.Phi_e_ext = np.hstack([z, Phi_e, z])

    def psi_half(self, t: float, check: bool = True) -> np.ndarray:
        """psi_hat(t, y) on the half-channel output grid y in [0,1]."""
        om = self.alpha * t
        F = self.alpha * (self.Phi_o_ext + self.Phi_e_ext)
        return filon_integral(self.c_ext, F, om, check=check) / (2.0 * np.pi)

    def psi_channels(self, t: float, check: bool = True):
        om = self.alpha * t
        po = filon_integral(self.c_ext, self.alpha * self.Phi_o_ext, om, check=check) / (2 * np.pi)
        pe = filon_integral(self.c_ext, self.alpha * self.Phi_e_ext, om, check=check) / (2 * np.pi)
        return po, pe

    def psi_full(self, t: float, check: bool = True):
        """(y_full, psi_hat) on [-1,1] by parity extension (odd + even parts)."""
        po, pe = self.psi_channels(t, check=check)
        y = self.y_out
        if y[0] == 0.0:
            y_full = np.concatenate([-y[:0:-1], y])
            psi = np.concatenate([(-po + pe)[:0:-1], po + pe])
        else:
            y_full = np.concatenate([-y[::-1], y])
            psi = np.concatenate([(-po + pe)[::-1], po + pe])
        return y_full, psi


def _phi_particular(sol, numer_smooth: np.ndarray):
    """phi(y) * int_{base}^y numer(z)/phi(z)^2 dz from base 0 (left of y_c)
    and base 1 (right of y_c); NaN inside the collar cells."""
    grid = sol.grid
    s, ic = grid.s, grid.ic
    q = numer_smooth / (grid.u1**2 * np.real(sol.phi1) ** 2)
    contrib = _cuminv2_contribs(s, q)
    n = len(s)
    phi = np.real(sol.phi)
    left = np.full(n, np.nan, dtype=complex)
    right = np.full(n, np.nan, dtype=complex)
    if ic > 0:
        acc = np.concatenate([[0.0], np.cumsum(contrib[: ic - 1])])
        left[:ic] = phi[:ic] * acc
    if ic < n - 1:
        rev = np.concatenate([[0.0], np.cumsum(contrib[ic + 1:][::-1])])[::-1]
        right[ic + 1:] = phi[ic + 1:] * (-rev)
    return left, right


def phi_plus_pointwise(tables: SpectralTables, coeffs: LimitCoefficients,
                       omega0, j: int, y_out: np.ndarray, side: str = "+",
                       collar_cells: float = 0.75):
    """Phi_+ (or Phi_-) at the j-th c node on the full channel [-1,1].

    Assembles the boundary-value representation: particular integrals of
    f = omega_hat/(i alpha (u-c)) plus the mu/nu homogeneous parts, with
    parity extension.  Returns (y_full, Phi).
    """
    from .rayleigh import cumint_from_center

    sol = tables.solutions[j]
    grid = sol.grid
    al = tables.alpha
    phi1r = np.real(sol.phi1)

    def odd_part(y):
        return 0.5 * (omega0(y) - omega0(-y))

    def even_part(y):
        return 0.5 * (omega0(y) + omega0(-y))

    mu_o = coeffs.mu_o_plus[j] if side == "+" else coeffs.mu_o_minus[j]
    mu_e = coeffs.mu_e_plus[j] if side == "+" else coeffs.mu_e_minus[j]
    nu_e = coeffs.nu_e_plus[j] if side == "+" else coeffs.nu_e_minus[j]

    S_o = cumint_from_center(grid, odd_part(grid.y) * phi1r, 0)
    S_e = cumint_from_center(grid, even_part(grid.y) * phi1r, 0)
    lo, ro = _phi_particular(sol, S_o / (1j * al) + mu_o)
    le, re = _phi_particular(sol, S_e / (1j * al) + mu_e)
    phi = np.real(sol.phi)
    vo = np.where(grid.s < 0, lo, ro)
    ve = np.where(grid.s < 0, le + nu_e * phi, re)

    h = 1.0 / (grid.n_base - 1)
    collar = collar_cells * h
    ok = (np.abs(grid.s) > collar) | (grid.y < 1e-14) | (grid.y > 1 - 1e-14)
    ok &= np.isfinite(np.real(vo)) & np.isfinite(np.real(ve))
    if grid.cv.y_c < collar:
        ok[0] = True
        vo[0] = 0.0
        ve[0] = nu_e * phi[0]
    yok = grid.y[ok]
    po = _interp_collar(yok, vo[ok], np.asarray(y_out, dtype=float))
    pe = _interp_collar(yok, ve[ok], np.asarray(y_out, dtype=float))
    y = np.asarray(y_out, dtype=float)
    if y[0] == 0.0:
        y_full = np.concatenate([-y[:0:-1], y])
        val = np.concatenate([(-po + pe)[:0:-1], po + pe])
    else:
        y_full = np.concatenate([-y[::-1], y])
        val = np.concatenate([(-po + pe)[::-1], po + pe])
    return y_full, val


def psi_projected(ktab: KernelTables, channel: str, t: float, check: bool = True):
    """int_0^1 psi_hat_channel(t,y) f(y) dy = -int K(c) e^{-i alpha c t} dc."""
    tables = ktab.tables
    u0, u1 = tables.profile.u0, tables.profile.u1
    c_ext = np.concatenate([[u0], tables.c, [u1]])
    K = ktab.K_o if channel == "odd" else ktab.K_e
    K_ext = np.concatenate([[0.0], K, [0.0]])
    om = tables.alpha * t
    return -filon_integral(c_ext, K_ext, om, check=check)


# ---------------------------------------------------------------------------
# transport baseline and decay fits


def transport_reference(profile: ShearProfile, coord: SqrtCoordinate,
                        omega0, eta, alpha: float, t: float,
                        phase_budget: float = 0.5, max_panels: int = 2_000_000):
    """int omega_hat(t) eta dy for the passive transport flow.

    Direct oscillatory quadrature in z = v(y) with phase alpha z^2 t:
    panels are graded so each carries at most phase_budget radians of
    phase, with 8-point Gauss inside.
    """
    v1 = coord.v1
    om = alpha * t
    # panel edges in z >= 0 with bounded per-panel phase and width
    n_phase = int(np.ceil(om * v1**2 / phase_budget)) if om > 0 else 0
    if n_phase > max_panels:
        raise UnderResolved(f"{n_phase} panels exceed budget {max_panels}")
    edges = [0.0]
    k = 1
    while edges[-1] < v1:
        z_next = np.sqrt(k * phase_budget / om) if om > 0 else v1
        z_next = min(z_next, edges[-1] + v1 / 64.0, v1)
        if z_next <= edges[-1]:
            z_next = min(edges[-1] + v1 / 64.0, v1)
        edges.append(z_next)
        k = int(np.ceil(om * edges[-1] ** 2 / phase_budget)) + 1
    edges = np.asarray(edges)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    z = (mid[:, None] + half[:, None] * _GL8_X[None, :]).ravel()
    zs = np.concatenate([-z, z])

    # dense tabulated inverse: the Newton inverse is too slow per node here
    ztab = np.linspace(0.0, v1, 16385)
    ytab = coord.inverse(ztab)
    dytab = coord.dinverse(ztab)
    y = np.sign(zs) * np.interp(np.abs(zs), ztab, ytab)
    Wv = eta(y) * omega0(y) * np.interp(np.abs(zs), ztab, dytab)
    ph = np.exp(-1j * om * zs**2)
    wts = np.concatenate([(half[:, None] * _GL8_W[None, :]).ravel()] * 2)
    val = np.sum(Wv * ph * wts)
    return np.exp(-1j * alpha * profile.u0 * t) * val


def decay_fit(t: np.ndarray, series: np.ndarray, t_window=None):
    """Log-log least-squares slope and r^2 over the window."""
    t = np.asarray(t, dtype=float)
    series = np.asarray(series, dtype=float)
    if t_window is not None:
        mask = (t >= t_window[0]) & (t <= t_window[1])
        t, series = t[mask], series[mask]
    if len(t) < 10:
        raise DegenerateSeries(f"decay window has {len(t)} < 10 samples")
    if np.any(series <= 0):
        raise DegenerateSeries("series must be positive on the fit window")
    x, z = np.log(t), np.log(series)
    slope, intercept = np.polyfit(x, z, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((z - fit) ** 2))
    ss_tot = float(np.sum((z - np.mean(z)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(r2)


# ---------------------------------------------------------------------------
# evolution state and depletion diagnostics


@dataclass
class EvolutionState:
    """Time series of the linearized evolution on a channel grid."""

    alpha: float
    t_samples: np.ndarray
    y: np.ndarray
    psi_hat: np.ndarray     # (n_t, n_y)
    omega_hat: np.ndarray   # (n_t, n_y)
    V1_hat: np.ndarray      # -d_y psi
    V2_hat: np.ndarray      # i alpha psi
    norm_V: np.ndarray
    norm_V2: np.ndarray
    omega_center_abs: np.ndarray
    omega_probe_abs: np.ndarray
    probe_y: float
    projection_report: dict = field(default_factory=dict)


def depletion_series(state: EvolutionState, snapshot_times=None):
    """Stationary-streamline and probe series, plus |omega_hat| profiles.

    |omega_hat e^{i alpha u t}| equals |omega_hat| pointwise, so the profile
    snapshots are plain moduli at the requested times.
    """
    out = {
        "t": state.t_samples,
        "center_abs": state.omega_center_abs,
        "probe_abs": state.omega_probe_abs,
        "probe_y": state.probe_y,
    }
    if snapshot_times is not None:
        snaps = []
        for ts in snapshot_times:
            j = int(np.argmin(np.abs(state.t_samples - ts)))
            snaps.append((float(state.t_samples[j]), np.abs(state.omega_hat[j])))
        out["snapshots"] = snaps
    return out

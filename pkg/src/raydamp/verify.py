"""Invariant suite behind `raydamp verify`.

A compact battery of the library's cross-checks at desk scale; each entry
returns (name, passed, detail).  The pytest suite runs the same checks (and
more) at full resolution.
"""

from __future__ import annotations

import numpy as np

from .evolution import limit_coefficients, filon_weights
from .kernels import VorticityData, build_kernels, channel_data
from .profiles import build_profile, critical_value, sqrt_coordinate
from .rayleigh import log_derivatives, solve_phi1
from .singular import II_2, hilbert_pv, make_pv_grid
from .spectral import build_tables


def run_verification(cfg) -> list[tuple[str, bool, str]]:
    from .cli import default_test_pairs, resolve_function

    rng = np.random.default_rng(cfg.seed)
    out = []
    profile = build_profile(cfg.profile)

    # profile invariants
    ys = np.linspace(0.0, 1.0, 257)
    if profile.class_tag == "S":
        coord = sqrt_coordinate(profile)
        res = float(np.max(np.abs(coord.v(ys) ** 2 - (profile.u(ys) - profile.u0))))
        tol = 1e-12 * max(1.0, float(np.max(np.abs(profile.u(ys)))))
        out.append(("v(y)^2 = u(y)-u(0)", res < tol, f"max residual {res:.2e}"))

        zs = coord.v(ys[1:-1])
        inv_res = float(np.max(np.abs(coord.inverse(zs) - ys[1:-1])))
        out.append(("monotone inversion", inv_res < 1e-10, f"max |v^-1(v(y))-y| {inv_res:.2e}"))
    else:
        out.append(("class-K profile", True, "sqrt-coordinate checks skipped"))
        return out

    # Hilbert closed forms on the PV grid
    pv = make_pv_grid(coord)
    h0 = abs(hilbert_pv(lambda z: np.ones_like(z), 0.31 * coord.v1, pv)
             - np.log((coord.v1 + 0.31 * coord.v1) / (coord.v1 - 0.31 * coord.v1)))
    out.append(("Hilbert log closed form", h0 < 1e-10, f"error {h0:.2e}"))

    # odd-g identity c~ H(g) = H(zg)
    ct_test = np.linspace(0.15, 0.85, 7) * coord.v1
    g_odd = lambda z: z**3 - 0.2 * coord.v1**2 * z
    lhs = ct_test * hilbert_pv(g_odd, ct_test, pv)
    rhs = hilbert_pv(lambda z: z * g_odd(z), ct_test, pv)
    res = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-10)))
    out.append(("odd Hilbert identity", res < 1e-8, f"rel residual {res:.2e}"))

    alpha = float(cfg.alpha_list[0])

    # phi1 invariants at a few spectral parameters
    ok = True
    worst = 0.0
    for ct in (0.3, 0.6, 0.85):
        c = profile.u0 + (ct * coord.v1) ** 2
        cv = critical_value(profile, c)
        sol = solve_phi1(profile, alpha, cv, n=513)
        ok &= bool(np.all(np.real(sol.phi1) >= 1.0 - 1e-10))
        ok &= sol.residual < 10 * sol.tol
        F, G, G1, rep = log_derivatives(profile, sol)
        ic = sol.grid.ic
        slope = (F[ic + 1] - F[ic - 1]) / (sol.y[ic + 1] - sol.y[ic - 1])
        err = abs(slope - alpha**2 / 3.0) / (alpha**2 / 3.0)
        worst = max(worst, err)
        ok &= err < 5e-3
        ok &= float(np.max(np.abs(F))) <= alpha * (1 + 1e-6)
    out.append(("phi1 fixed-point suite", ok, f"max dF(y_c) rel err {worst:.2e}"))

    # A1 identity on a coarse c grid
    tables = build_tables(profile, coord, alpha, n_c=64, n_y=513)
    ii2 = np.array([II_2(profile, critical_value(profile, c)) for c in tables.c])
    res = float(np.max(np.abs(tables.A1 - (profile.u0 - profile.u1 - tables.rho * ii2))))
    out.append(("A1 identity (def:A1-Pi2)", res < 1e-6, f"max residual {res:.2e}"))

    # embedding gaps positive
    g_ab = float(np.min(tables.A**2 + tables.B**2))
    out.append(("A^2+B^2 > 0", g_ab > 0, f"min {g_ab:.3e}"))

    # kernels: endpoint vanishing + jump identities
    om0, _ = resolve_function(cfg.omega0, "mixed_smooth")
    data = VorticityData(om0, alpha)
    g_o, g_e = default_test_pairs(alpha)
    ktab = build_kernels(tables, data, g_o, g_e)
    coeffs = limit_coefficients(tables, channel_data(tables, data))
    out.append(("denominator identity", coeffs.denom_identity_residual < 1e-8,
                f"rel residual {coeffs.denom_identity_residual:.2e}"))
    out.append(("mu/nu jump identities", coeffs.jump_residual < 1e-10,
                f"residual {coeffs.jump_residual:.2e}"))
    for name, K in (("K_o", ktab.K_o), ("K_e", ktab.K_e)):
        ratio = max(abs(K[0]), abs(K[-1])) / np.max(np.abs(K))
        out.append((f"{name} endpoint vanishing", ratio < 1e-2,
                    f"edge/max = {ratio:.2e} (coarse grid)"))

    # Filon weights reduce to plain quadrature at t=0
    w0 = filon_weights(tables.c, 0.0)
    res = abs(np.sum(w0).real - (tables.c[-1] - tables.c[0]))
    out.append(("Filon t=0 normalization", res < 1e-12, f"residual {res:.2e}"))

    # randomized linearity of the kernel in the data (seeded)
    scale = float(rng.uniform(0.5, 2.0))
    data2 = VorticityData(lambda y: scale * om0(y), alpha)
    ktab2 = build_kernels(tables, data2, g_o, g_e)
    res = float(np.max(np.abs(ktab2.K_o - scale * ktab.K_o)) / np.max(np.abs(ktab.K_o)))
    out.append(("K_o linearity in data", res < 1e-12, f"rel residual {res:.2e}"))

    return out

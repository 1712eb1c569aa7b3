"""Shear-flow profiles, the square-root coordinate, and critical values.

A profile is the base flow u(y) on the channel [-1,1] together with its
first four derivatives. Two admissibility classes are supported:

* class S: symmetric flows, u(y)=u(-y), u'(y)>0 for y>0, u'(0)=0, u''(0)>0
  (e.g. Poiseuille u=y^2).  All of the kernel machinery requires class S.
* class K: u'(+-1)!=0 and u''!=0 wherever u'=0.  Only the oracle accepts
  general class-K profiles.

For class S the coordinate v(y)=sqrt(u(y)-u(0)) is built through the
regularized form v = y*m(y)^(1/2), m(y) = int_0^1 (1-t) u''(ty) dt, which
avoids the 0/0 at the channel center.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ClassViolation, DegenerateCurvature, NonSymmetric, OutOfRange

__all__ = [
    "ShearProfile",
    "SqrtCoordinate",
    "CriticalValue",
    "build_profile",
    "sqrt_coordinate",
    "critical_value",
]

_VALIDATION_N = 2049

# Fixed Gauss-Legendre rule on [0,1] used for the m(y) moment integrals;
# exact for polynomial profiles up to degree 47.
_GL_T, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W


def _chebyshev_like(n: int) -> np.ndarray:
    """n points on [0,1] clustered at both ends."""
    return 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n)))


@dataclass(frozen=True)
class ShearProfile:
    """Base flow u and derivatives on [-1,1]; immutable after construction."""

    name: str
    u: Callable[[np.ndarray], np.ndarray]
    du: Callable[[np.ndarray], np.ndarray]
    d2u: Callable[[np.ndarray], np.ndarray]
    d3u: Callable[[np.ndarray], np.ndarray]
    d4u: Callable[[np.ndarray], np.ndarray]
    class_tag: str
    u0: float
    u1: float
    validation: dict = field(compare=False, repr=False)

    @property
    def c0(self) -> float:
        """Lemma-type constant with u'(y) >= c0*y on the validation grid."""
        return self.validation["c0"]


@dataclass(frozen=True)
class SqrtCoordinate:
    """v(y)=sqrt(u(y)-u(0)) with derivatives and the inverse map."""

    v: Callable[[np.ndarray], np.ndarray]
    dv: Callable[[np.ndarray], np.ndarray]
    d2v: Callable[[np.ndarray], np.ndarray]
    d3v: Callable[[np.ndarray], np.ndarray]
    v1: float
    inverse: Callable[[np.ndarray], np.ndarray]
    dinverse: Callable[[np.ndarray], np.ndarray]
    d2inverse: Callable[[np.ndarray], np.ndarray]
    c1: float


@dataclass(frozen=True)
class CriticalValue:
    """Spectral parameter c with the derived critical-layer scalars."""

    c: complex
    domain_tag: str  # D0 | D_eps | B_left | B_right
    c_r: float
    y_c: float
    c_tilde: float
    rho: float
    rho0: float
    rho1: float


# ---------------------------------------------------------------------------
# profile construction


def _poly_even_callables(coeffs):
    """u(y) = sum_k coeffs[k] * y^(2k) and its first four derivatives."""
    coeffs = [float(a) for a in coeffs]
    full = np.zeros(2 * len(coeffs) - 1 if coeffs else 1)
    for k, a in enumerate(coeffs):
        full = np.pad(full, (0, max(0, 2 * k + 1 - len(full))))
        full[2 * k] += a
    poly = np.polynomial.Polynomial(full)
    ders = [poly.deriv(k) if k else poly for k in range(5)]
    return [(lambda p: (lambda y: p(np.asarray(y, dtype=float))))(p) for p in ders]


_BUILTINS = {
    "poiseuille": {"type": "poly_even", "coeffs": [0.0, 1.0], "class": "S"},
    "scaled_poiseuille": {"type": "poly_even", "coeffs": [0.0, 1.0], "class": "S"},
    # u = y: monotone class-K flow, also the transport stub (u'' = 0).
    "couette": {"type": "poly", "coeffs": [0.0, 1.0], "class": "K"},
}


def _poly_callables(coeffs):
    poly = np.polynomial.Polynomial([float(a) for a in coeffs])
    ders = [poly.deriv(k) if k else poly for k in range(5)]
    return [(lambda p: (lambda y: p(np.asarray(y, dtype=float))))(p) for p in ders]


def _validate_class_S(name, fns, tol_grid):
    u, du, d2u = fns[0], fns[1], fns[2]
    ys = tol_grid
    unorm = max(np.max(np.abs(u(ys))), np.max(np.abs(du(ys))), np.max(np.abs(d2u(ys))))
    tol = 1e-8 * max(1.0, unorm)

    sym = np.max(np.abs(u(ys) - u(-ys)))
    if sym > tol:
        j = int(np.argmax(np.abs(u(ys) - u(-ys))))
        raise NonSymmetric(
            f"profile {name!r}: u(y)-u(-y) = {sym:.3e} at y = {ys[j]:.6f}", y=ys[j]
        )
    if abs(du(np.array([0.0]))[0]) > tol:
        raise ClassViolation(
            f"profile {name!r}: u'(0) = {du(np.array([0.0]))[0]:.3e} != 0", y=0.0
        )
    if d2u(np.array([0.0]))[0] <= tol:
        raise ClassViolation(
            f"profile {name!r}: u''(0) = {d2u(np.array([0.0]))[0]:.3e} <= 0", y=0.0
        )
    interior = ys[ys > 0]
    dvals = du(interior)
    if np.any(dvals <= 0):
        j = int(np.argmax(dvals <= 0))
        raise ClassViolation(
            f"profile {name!r}: u'({interior[j]:.6f}) = {dvals[j]:.3e} <= 0",
            y=interior[j],
        )
    # Lemma-style constant: u'(y) >= c0*y on (0,1]
    c0 = float(np.min(dvals / interior))
    if c0 <= 0:
        raise ClassViolation(f"profile {name!r}: no c0>0 with u'(y)>=c0*y")
    return {"c0": c0, "tol": tol}


def _validate_class_K(name, fns, tol_grid):
    u, du, d2u = fns[0], fns[1], fns[2]
    ys = np.concatenate([-tol_grid[::-1], tol_grid[1:]])
    unorm = max(np.max(np.abs(u(ys))), np.max(np.abs(du(ys))), np.max(np.abs(d2u(ys))))
    tol = 1e-8 * max(1.0, unorm)
    for edge in (-1.0, 1.0):
        if abs(du(np.array([edge]))[0]) <= tol:
            raise ClassViolation(f"profile {name!r}: u'({edge:+.0f}) = 0", y=edge)
    near_crit = np.abs(du(ys)) < tol
    bad = near_crit & (np.abs(d2u(ys)) <= tol)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ClassViolation(
            f"profile {name!r}: u'={du(ys[j]):.2e} and u''={d2u(ys[j]):.2e} at y={ys[j]:.6f}",
            y=ys[j],
        )
    return {"c0": float("nan"), "tol": tol}


def build_profile(descriptor) -> ShearProfile:
    """Build and validate a shear profile from a descriptor.

    The descriptor is either a builtin name ("poiseuille", "couette") or a
    dict {name, type: builtin|poly_even|poly, coeffs, class_tag}.  poly_even
    coefficients are in powers of y^2.
    """
    if isinstance(descriptor, str):
        descriptor = {"name": descriptor, "type": "builtin"}
    descriptor = dict(descriptor)
    name = descriptor.get("name", "custom")
    kind = descriptor.get("type", "builtin")

    if kind == "builtin":
        if name not in _BUILTINS:
            raise ClassViolation(f"unknown builtin profile {name!r}")
        base = _BUILTINS[name]
        coeffs = descriptor.get("coeffs", base["coeffs"])
        kind = base["type"]
        class_tag = descriptor.get("class_tag", base["class"])
    else:
        coeffs = descriptor["coeffs"]
        class_tag = descriptor.get("class_tag", "S")

    if kind == "poly_even":
        fns = _poly_even_callables(coeffs)
    elif kind == "poly":
        fns = _poly_callables(coeffs)
    else:
        raise ClassViolation(f"unknown profile type {kind!r}")

    grid = _chebyshev_like(_VALIDATION_N)
    if class_tag == "S":
        report = _validate_class_S(name, fns, grid)
    elif class_tag == "K":
        report = _validate_class_K(name, fns, grid)
    else:
        raise ClassViolation(f"unknown class tag {class_tag!r}")

    u0 = float(fns[0](np.array([0.0]))[0])
    u1 = float(fns[0](np.array([1.0]))[0])
    return ShearProfile(
        name=name,
        u=fns[0],
        du=fns[1],
        d2u=fns[2],
        d3u=fns[3],
        d4u=fns[4],
        class_tag=class_tag,
        u0=u0,
        u1=u1,
        validation=report,
    )


# ---------------------------------------------------------------------------
# square-root coordinate


def _m_moments(profile: ShearProfile):
    """m(y), m'(y), m''(y) via the Lemma-style integral representation."""

    def m(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ty = np.outer(y, _GL_T)
        return (profile.d2u(ty) * ((1.0 - _GL_T) * _GL_W)).sum(axis=1)

    def dm(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ty = np.outer(y, _GL_T)
        return (profile.d3u(ty) * ((1.0 - _GL_T) * _GL_T * _GL_W)).sum(axis=1)

    def d2m(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ty = np.outer(y, _GL_T)
        return (profile.d4u(ty) * ((1.0 - _GL_T) * _GL_T**2 * _GL_W)).sum(axis=1)

    return m, dm, d2m


def sqrt_coordinate(profile: ShearProfile, m_tol: float = 1e-10) -> SqrtCoordinate:
    """Construct v(y)=sqrt(u(y)-u(0)) for a class-S profile.

    v is computed as y*m(y)^(1/2); raises DegenerateCurvature if m drops
    below tolerance anywhere on [0,1] (then u''(0)>0 fails effectively).
    """
    if profile.class_tag != "S":
        raise ClassViolation("sqrt_coordinate requires a class-S profile")
    m, dm, d2m = _m_moments(profile)

    ys = _chebyshev_like(_VALIDATION_N)
    mvals = m(ys)
    if np.any(mvals < m_tol):
        j = int(np.argmax(mvals < m_tol))
        raise DegenerateCurvature(f"m({ys[j]:.6f}) = {mvals[j]:.3e} < {m_tol:g}")

    def v(y):
        y = np.asarray(y, dtype=float)
        return y * np.sqrt(m(y))

    def dv(y):
        y = np.asarray(y, dtype=float)
        r = np.sqrt(m(y))
        return r + y * dm(y) / (2.0 * r)

    def d2v(y):
        y = np.asarray(y, dtype=float)
        mv, dmv, d2mv = m(y), dm(y), d2m(y)
        r = np.sqrt(mv)
        # (sqrt m)' and (sqrt m)''
        rp = dmv / (2.0 * r)
        rpp = d2mv / (2.0 * r) - dmv**2 / (4.0 * mv * r)
        return 2.0 * rp + y * rpp

    v1 = float(v(np.array([1.0]))[0])
    # v'(0) = sqrt(u''(0)/2)
    v1p0 = float(np.sqrt(m(np.array([0.0]))[0]))
    d3v0 = float(profile.d4u(np.array([0.0]))[0]) / (8.0 * v1p0)

    def d3v(y):
        # implicit relation 2(3 v' v'' + v v''') = u''' away from 0; odd Taylor near 0
        y = np.asarray(y, dtype=float)
        out = np.full_like(y, d3v0)
        far = np.abs(y) > 1e-4
        if np.any(far):
            yf = y[far]
            out[far] = (0.5 * profile.d3u(yf) - 3.0 * dv(yf) * d2v(yf)) / v(yf)
        return out

    dvals = dv(ys)
    c1 = float(np.min(dvals))
    if c1 <= 0:
        raise DegenerateCurvature("v'(y) not bounded below by a positive constant")

    # dense monotone table seeds a two-step Newton polish
    _ytab = np.linspace(0.0, 1.0, 8193)
    _ztab = v(_ytab)

    def inverse(z):
        z = np.asarray(z, dtype=float)
        sign = np.sign(z)
        za = np.abs(z)
        y = np.interp(za, _ztab, _ytab)
        for _ in range(2):
            y = np.clip(y - (v(y) - za) / dv(y), 0.0, 1.0)
        return sign * y

    def dinverse(z):
        return 1.0 / dv(np.abs(inverse(z)))

    def d2inverse(z):
        y = np.abs(inverse(z))
        out = -d2v(y) / dv(y) ** 3
        return out * np.sign(np.asarray(z, dtype=float))

    return SqrtCoordinate(
        v=v, dv=dv, d2v=d2v, d3v=d3v, v1=v1,
        inverse=inverse, dinverse=dinverse, d2inverse=d2inverse, c1=c1,
    )


# ---------------------------------------------------------------------------
# critical values


def _solve_yc(profile: ShearProfile, c_r: float, tol: float = 1e-12) -> float:
    """Monotone root of u(y_c) = c_r on [0,1]: bisection plus Newton polish."""
    if c_r <= profile.u0:
        return 0.0
    if c_r >= profile.u1:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if profile.u(np.array([mid]))[0] < c_r:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    for _ in range(6):
        f = profile.u(np.array([y]))[0] - c_r
        d = profile.du(np.array([y]))[0]
        if d == 0.0:
            break
        step = f / d
        y = min(max(y - step, 0.0), 1.0)
        if abs(step) < tol:
            break
    return float(y)


def critical_value(profile: ShearProfile, c, domain_tag: str = "D0") -> CriticalValue:
    """Attach the critical-layer scalars (y_c, c~, rho, rho0, rho1) to c."""
    c = complex(c)
    if domain_tag == "D0":
        c_r = c.real
    elif domain_tag == "D_eps":
        c_r = c.real
    elif domain_tag == "B_left":
        c_r = profile.u0
    elif domain_tag == "B_right":
        c_r = profile.u1
    else:
        raise OutOfRange(f"unknown domain tag {domain_tag!r}")

    if c_r < profile.u0 - 1e-14 or c_r > profile.u1 + 1e-14:
        raise OutOfRange(
            f"c_r = {c_r:.6g} outside [u(0), u(1)] = [{profile.u0:.6g}, {profile.u1:.6g}]"
        )
    c_r = min(max(c_r, profile.u0), profile.u1)

    y_c = _solve_yc(profile, c_r)
    rho = (c_r - profile.u0) * (profile.u1 - c_r)
    duc = float(profile.du(np.array([y_c]))[0])
    if y_c == 0.0:
        c_tilde = 0.0
        rho0 = 0.0
    else:
        c_tilde = float(np.sqrt(max(c_r - profile.u0, 0.0)))
        rho0 = rho / duc if duc > 0 else 0.0
    return CriticalValue(
        c=c, domain_tag=domain_tag, c_r=c_r, y_c=y_c,
        c_tilde=c_tilde, rho=rho, rho0=rho0, rho1=c_r - profile.u0,
    )

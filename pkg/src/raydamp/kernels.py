"""Damping kernels K_o and K_e from the Lambda operators.

For odd data w_o and a test function g with g(0)=g(1)=0 (odd channel),

    K_o(c) = Lambda_1(w_o) Lambda_2(g) / ((A^2+B^2) u'(y_c)),
    Lambda_1(w) = A w(y_c) + rho u''(y_c) II_1(w),
    Lambda_2(g) = A g(y_c) + rho II_1(u'' g),

with II_1 = II_{1,1} + II_{1,2}.  For even data and g'(0)=g(1)=0,

    K_e(c) = Lambda_3(w_e) Lambda_4(g) / (u'(y_c) (A2^2+B2^2)),
    Lambda_3 = -rho1 Lambda_1(w_e) + J (u''(y_c)/u'(y_c) E(w_e) + w_e(y_c)),
    Lambda_4 = -rho1 Lambda_2(g) + J (E(u'' g)/u'(y_c) + g(y_c)).

K vanishes at both endpoints of Ran u; the tabulated kernels carry exact
zeros there by continuous extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassViolation, SpectralDegeneracy
from .profiles import ShearProfile
from .singular import E_op, II_12
from .spectral import SpectralTables

__all__ = [
    "VorticityData",
    "TestFunctionPair",
    "KernelTables",
    "DataTransforms",
    "ChannelData",
    "data_transforms",
    "channel_data",
    "lambda_1",
    "lambda_2",
    "lambda_34",
    "kernel_Ko",
    "kernel_Ke",
    "build_kernels",
]

_DEGENERACY_FLOOR = 1e-8


@dataclass(frozen=True)
class VorticityData:
    """Initial vorticity profile and its parity parts on [0,1]."""

    omega0: callable
    alpha: float

    def odd(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * (self.omega0(y) - self.omega0(-y))

    def even(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * (self.omega0(y) + self.omega0(-y))


@dataclass(frozen=True)
class TestFunctionPair:
    """Dual test function g with f = g'' - alpha^2 g and a parity contract."""

    __test__ = False  # not a pytest collection target

    g: callable
    d2g: callable
    channel: str  # "odd" | "even"
    alpha: float

    def __post_init__(self):
        tol = 1e-10
        g0 = float(self.g(np.zeros(1))[0])
        g1 = float(self.g(np.ones(1))[0])
        if self.channel == "odd":
            if abs(g0) > tol or abs(g1) > tol:
                raise ClassViolation(
                    f"odd-channel test function needs g(0)=g(1)=0, got ({g0:.2e}, {g1:.2e})"
                )
        elif self.channel == "even":
            d = 1e-6
            dg0 = float((self.g(np.array([d])) - self.g(np.array([0.0])))[0] / d)
            if abs(dg0) > 1e-4 or abs(g1) > tol:
                raise ClassViolation(
                    f"even-channel test function needs g'(0)=g(1)=0, got ({dg0:.2e}, {g1:.2e})"
                )
        else:
            raise ClassViolation(f"unknown channel {self.channel!r}")

    def f(self, y):
        return self.d2g(y) - self.alpha**2 * self.g(y)


@dataclass
class DataTransforms:
    """Per-c-node singular transforms of one data function phi."""

    phi_yc: np.ndarray       # phi(y_c)
    rho_II11: np.ndarray     # rho * II_{1,1}(phi)
    II12: np.ndarray         # II_{1,2}(phi)
    E: np.ndarray | None     # E(phi), even channel only

    @property
    def rho_II1(self):
        return None  # assembled by callers with rho in hand


def data_transforms(tables: SpectralTables, phi, need_E: bool = False) -> DataTransforms:
    """II_{1,1}, II_{1,2} (and E) of a data callable across the c grid."""
    if tables.solutions is None:
        raise ClassViolation("tables must be built with keep_solutions=True")
    ws = tables.workspace
    rho_ii11 = ws.rho_II11(phi)
    n = len(tables.c)
    ii12 = np.empty(n)
    Evals = np.empty(n) if need_E else None
    for j, sol in enumerate(tables.solutions):
        vals = phi(sol.y)
        ii12[j] = float(np.real(II_12(sol, vals)))
        if need_E:
            Evals[j] = float(np.real(E_op(sol, vals)))
    return DataTransforms(
        phi_yc=phi(tables.y_c), rho_II11=rho_ii11, II12=ii12, E=Evals
    )


def _rho_II1(tables: SpectralTables, tr: DataTransforms):
    return tr.rho_II11 + tables.rho * tr.II12


def lambda_1(tables: SpectralTables, tr: DataTransforms) -> np.ndarray:
    """Lambda_1(phi) = A phi(y_c) + u''(y_c) * rho II_1(phi)."""
    return tables.A * tr.phi_yc + tables.d2uc * _rho_II1(tables, tr)


def lambda_2(tables: SpectralTables, tr_upp: DataTransforms, g_yc: np.ndarray) -> np.ndarray:
    """Lambda_2(g) = A g(y_c) + rho II_1(u'' g); tr_upp transforms u''*g."""
    return tables.A * g_yc + _rho_II1(tables, tr_upp)


def lambda_34(
    tables: SpectralTables,
    lam1_even: np.ndarray,
    lam2: np.ndarray,
    tr_even: DataTransforms,
    tr_gupp: DataTransforms,
    g_yc: np.ndarray,
):
    """(Lambda_3, Lambda_4) from the even-channel couplings through J."""
    if tables.alpha <= 0:
        # J is infinite at alpha=0; the bracket must vanish identically
        br3 = tables.d2uc / tables.duc * tr_even.E + tr_even.phi_yc
        if np.max(np.abs(br3)) > 1e-8 * max(1.0, float(np.max(np.abs(tr_even.phi_yc)))):
            raise SpectralDegeneracy("alpha=0 even channel without exact E-cancellation")
        lam31 = np.zeros_like(br3)
        lam41 = np.zeros_like(br3)
    else:
        lam31 = tables.J * (tables.d2uc / tables.duc * tr_even.E + tr_even.phi_yc)
        lam41 = tables.J * (tr_gupp.E / tables.duc + g_yc)
    lam3 = -tables.rho1 * lam1_even + lam31
    lam4 = -tables.rho1 * lam2 + lam41
    return lam3, lam4, lam31, lam41


def _check_gap(tables: SpectralTables, even: bool):
    al = tables.alpha
    if even:
        floor = _DEGENERACY_FLOOR * (1 + al * tables.rho0) ** 2 \
            * (1 + al * tables.y_c) ** 4 / max(al, 1e-30) ** 4
        gap = tables.A2**2 + tables.B2**2
        name = "A2^2+B2^2"
    else:
        floor = _DEGENERACY_FLOOR * (1 + al * tables.rho0) ** 2
        gap = tables.A**2 + tables.B**2
        name = "A^2+B^2"
    if np.any(gap < floor):
        j = int(np.argmin(gap / floor))
        raise SpectralDegeneracy(
            f"{name} = {gap[j]:.3e} below threshold {floor[j]:.3e} at c = {tables.c[j]:.6f}; "
            "possible embedding eigenvalue"
        )


def kernel_Ko(tables: SpectralTables, lam1_odd: np.ndarray, lam2: np.ndarray) -> np.ndarray:
    """K_o on the c grid; endpoints (appended by callers) are exact zeros."""
    _check_gap(tables, even=False)
    return lam1_odd * lam2 / ((tables.A**2 + tables.B**2) * tables.duc)


def kernel_Ke(tables: SpectralTables, lam3: np.ndarray, lam4: np.ndarray) -> np.ndarray:
    """K_e on the c grid."""
    _check_gap(tables, even=True)
    return lam3 * lam4 / (tables.duc * (tables.A2**2 + tables.B2**2))


@dataclass
class KernelTables:
    """Kernels and Lambda factors on the c grid for one (omega0, g_o, g_e)."""

    tables: SpectralTables
    c: np.ndarray
    K_o: np.ndarray
    K_e: np.ndarray
    lam1_odd: np.ndarray
    lam2_odd_g: np.ndarray
    lam3: np.ndarray
    lam4: np.ndarray
    lam1_even: np.ndarray
    lam31: np.ndarray
    lam41: np.ndarray
    C_o: np.ndarray = field(default=None)
    D_o: np.ndarray = field(default=None)
    C_e: np.ndarray = field(default=None)
    D_e: np.ndarray = field(default=None)
    E_e: np.ndarray = field(default=None)

    def csv_rows(self):
        header = "c,K_o,K_e,Lambda1,Lambda2,Lambda3,Lambda4"
        cols = [self.c, self.K_o, self.K_e, self.lam1_odd, self.lam2_odd_g,
                self.lam3, self.lam4]
        return header, np.column_stack(cols)


@dataclass
class ChannelData:
    """C/D/E coefficients of the vorticity data across the c grid."""

    C_o: np.ndarray
    D_o: np.ndarray
    C_e: np.ndarray
    D_e: np.ndarray
    E_e: np.ndarray
    tr_odd: DataTransforms
    tr_even: DataTransforms


def channel_data(tables: SpectralTables, data: VorticityData) -> ChannelData:
    """C_o, D_o, C_e, D_e, E_e from the vorticity parity parts."""
    tr_odd = data_transforms(tables, data.odd)
    tr_even = data_transforms(tables, data.even, need_E=True)
    return ChannelData(
        C_o=np.pi * tables.rho * tr_odd.phi_yc / tables.duc,
        D_o=tables.duc * _rho_II1(tables, tr_odd),
        C_e=np.pi * tables.rho * tr_even.phi_yc / tables.duc,
        D_e=tables.duc * _rho_II1(tables, tr_even),
        E_e=tr_even.E,
        tr_odd=tr_odd,
        tr_even=tr_even,
    )


def build_kernels(
    tables: SpectralTables,
    data: VorticityData,
    g_odd: TestFunctionPair,
    g_even: TestFunctionPair,
    chan: ChannelData | None = None,
) -> KernelTables:
    """Assemble K_o, K_e and all Lambda factors on the table's c grid."""
    profile: ShearProfile = tables.profile

    def upp_g_odd(y):
        return profile.d2u(y) * g_odd.g(y)

    def upp_g_even(y):
        return profile.d2u(y) * g_even.g(y)

    if chan is None:
        chan = channel_data(tables, data)
    tr_odd, tr_even = chan.tr_odd, chan.tr_even
    tr_go = data_transforms(tables, upp_g_odd)
    tr_ge = data_transforms(tables, upp_g_even, need_E=True)

    lam1_odd = lambda_1(tables, tr_odd)
    lam1_even = lambda_1(tables, tr_even)
    lam2_o = lambda_2(tables, tr_go, g_odd.g(tables.y_c))
    lam2_e = lambda_2(tables, tr_ge, g_even.g(tables.y_c))
    lam3, lam4, lam31, lam41 = lambda_34(
        tables, lam1_even, lam2_e, tr_even, tr_ge, g_even.g(tables.y_c)
    )

    K_o = kernel_Ko(tables, lam1_odd, lam2_o)
    K_e = kernel_Ke(tables, lam3, lam4)

    return KernelTables(
        tables=tables, c=tables.c, K_o=K_o, K_e=K_e,
        lam1_odd=lam1_odd, lam2_odd_g=lam2_o, lam3=lam3, lam4=lam4,
        lam1_even=lam1_even, lam31=lam31, lam41=lam41,
        C_o=chan.C_o, D_o=chan.D_o, C_e=chan.C_e, D_e=chan.D_e, E_e=chan.E_e,
    )

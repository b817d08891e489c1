"""Closed-form CP and P criteria for three special generator families.

All criteria act on the dissipation matrix D alone (the Hamiltonian part
never affects positivity properties).

X-shaped family: D11, D22, D33 real with a single off-diagonal D23.
    CP  <=>  D11, D22, D33 >= 0 and D22 D33 >= |D23|^2
    P   <=>  D22, D33 >= 0 and
             ( D11 >= |D23|  or  (|D23| - D11)^2 <= D22 D33 )

O-shaped family: D22 = D33, D23 = 0, a single off-diagonal D13 (= D21).
    CP  <=>  D11, D22 >= 0 and D11 D22 >= 2 |D13|^2
    P   <=>  3 D22 + D11 >= 0 and D22 (D22 + D11) >= |D13|^2

Non-unital anisotropic Pauli family: rates gamma = (g1, g2, g3) and
drifts tau = (t1, t2, t3), with dissipation matrix

    D11 = (g1 + g2 - g3)/2        D23 = D32 = (g2 - g1)/2
    D22 = (g3 - t3)/2             D21 = (t1 + i t2)/(2 sqrt 2) = -D13
    D33 = (g3 + t3)/2

    CP  <=>  |gi - gj| <= gk <= gi + gj  (all cyclic)  and
             (g1+g2-g3)(g2+g3-g1)(g3+g1-g2) >=
                 (g1+g2-g3) t3^2 + (g2+g3-g1) t1^2 + (g3+g1-g2) t2^2
    P   <=>  e . (gamma e + tau) >= 0 for every unit vector e,
             decided by sphere-grid minimization with local refinement.

The CP product inequality is the determinant of the dissipation matrix
(up to positive factors) and is exact away from degenerate rate triples;
when a triangle inequality is exactly tight it cannot see the drift
component along the corresponding axis, so exactly-degenerate boundary
cases should be confirmed with the principal-minor test on D.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from divq.divisibility import (
    InternalConsistencyError,
    MinimizerOptions,
    TorusPoint,
    torus_minimize,
)
from divq.representations import MasterEquationForm

__all__ = [
    "XShapeParams",
    "OShapeParams",
    "PauliParams",
    "NotPauliClassError",
    "x_cp",
    "x_p",
    "o_cp",
    "o_p",
    "pauli_gamma_cp",
    "pauli_cp",
    "pauli_p",
    "pauli_p_boundary",
    "pauli_to_master",
    "master_to_pauli",
    "x_scan_fields",
    "o_scan_fields",
    "pauli_scan_fields",
]


class NotPauliClassError(ValueError):
    """A master form that does not lie in the Pauli family."""


def _finite_triple(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a real 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass
class XShapeParams:
    d11: float
    d22: float
    d33: float
    d23: complex

    def __post_init__(self):
        self.d11 = float(self.d11)
        self.d22 = float(self.d22)
        self.d33 = float(self.d33)
        self.d23 = complex(self.d23)
        values = [self.d11, self.d22, self.d33,
                  self.d23.real, self.d23.imag]
        if not np.all(np.isfinite(values)):
            raise ValueError("X-shape parameters must be finite")


@dataclass
class OShapeParams:
    d11: float
    d22: float
    d13: complex

    def __post_init__(self):
        self.d11 = float(self.d11)
        self.d22 = float(self.d22)
        self.d13 = complex(self.d13)
        values = [self.d11, self.d22, self.d13.real, self.d13.imag]
        if not np.all(np.isfinite(values)):
            raise ValueError("O-shape parameters must be finite")


@dataclass(eq=False)
class PauliParams:
    gamma: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        self.gamma = _finite_triple(self.gamma, "gamma")
        self.tau = _finite_triple(self.tau, "tau")


# ---------------------------------------------------------------------------
# X-shaped family
# ---------------------------------------------------------------------------

def x_scan_fields(d11, d22, d33, absd23, tol: float = 1e-9):
    """Vectorized X-family verdicts and margins.

    Returns (cp, p, margin_cp, margin_p) elementwise over broadcast
    arrays.  margin_cp is the smallest eigenvalue of the dissipation
    matrix; margin_p is the slack of the binding positivity constraint
    (the constraints mix units, so only its sign and rough size matter).
    """
    d11 = np.asarray(d11, dtype=float)
    d22 = np.asarray(d22, dtype=float)
    d33 = np.asarray(d33, dtype=float)
    absd23 = np.asarray(absd23, dtype=float)
    quad_cp = d22 * d33 - absd23**2
    cp = (d11 >= -tol) & (d22 >= -tol) & (d33 >= -tol) & (quad_cp >= -tol)
    quad_p = d22 * d33 - (absd23 - d11)**2
    p = (d22 >= -tol) & (d33 >= -tol) & ((d11 - absd23 >= -tol)
                                         | (quad_p >= -tol))
    mid = 0.5 * (d22 + d33)
    rad = np.sqrt((0.5 * (d22 - d33))**2 + absd23**2)
    margin_cp = np.minimum(d11, mid - rad)
    margin_p = np.minimum(np.minimum(d22, d33),
                          np.maximum(d11 - absd23, quad_p))
    return cp, p, margin_cp, margin_p


def x_cp(x: XShapeParams, tol: float = 1e-9) -> bool:
    """Complete positivity for the X family (boundary inclusive)."""
    cp, _, _, _ = x_scan_fields(x.d11, x.d22, x.d33, abs(x.d23), tol)
    return bool(cp)


def x_p(x: XShapeParams, tol: float = 1e-9, debug: bool = False) -> bool:
    """Positivity for the X family (boundary inclusive).

    With ``debug=True`` the equivalent longer condition set
    (D22, D33 >= 0, D11 - |D23| + (D22 + D33)/2 >= 0, and the
    square-root test when D11 < |D23|) is evaluated as well and must
    agree.
    """
    _, p, _, _ = x_scan_fields(x.d11, x.d22, x.d33, abs(x.d23), tol)
    result = bool(p)
    if debug:
        a = abs(x.d23)
        a_min = x.d11 - a + 0.5 * (x.d22 + x.d33)
        long_form = (x.d22 >= -tol and x.d33 >= -tol and a_min >= -tol
                     and (x.d11 - a >= -tol
                          or x.d22 * x.d33 - (a - x.d11)**2 >= -tol))
        if long_form != result:
            raise InternalConsistencyError(
                f"X positivity forms disagree on {x}: "
                f"reduced={result}, long={long_form}")
    return result


# ---------------------------------------------------------------------------
# O-shaped family
# ---------------------------------------------------------------------------

def o_scan_fields(d11, d22, absd13, tol: float = 1e-9):
    """Vectorized O-family verdicts and margins, as in ``x_scan_fields``."""
    d11 = np.asarray(d11, dtype=float)
    d22 = np.asarray(d22, dtype=float)
    absd13 = np.asarray(absd13, dtype=float)
    quad_cp = d11 * d22 - 2 * absd13**2
    cp = (d11 >= -tol) & (d22 >= -tol) & (quad_cp >= -tol)
    lin_p = 3 * d22 + d11
    quad_p = d22 * (d22 + d11) - absd13**2
    p = (lin_p >= -tol) & (quad_p >= -tol)
    # Spectrum of the dissipation matrix: d22 plus the eigenvalues of the
    # 2x2 block [[d11, sqrt(2)|D13|], [sqrt(2)|D13|, d22]].
    mid = 0.5 * (d11 + d22)
    rad = np.sqrt((0.5 * (d11 - d22))**2 + 2 * absd13**2)
    margin_cp = np.minimum(d22, mid - rad)
    margin_p = np.minimum(lin_p, quad_p)
    return cp, p, margin_cp, margin_p


def o_cp(o: OShapeParams, tol: float = 1e-9) -> bool:
    """Complete positivity for the O family (boundary inclusive)."""
    cp, _, _, _ = o_scan_fields(o.d11, o.d22, abs(o.d13), tol)
    return bool(cp)


def o_p(o: OShapeParams, tol: float = 1e-9) -> bool:
    """Positivity for the O family (boundary inclusive)."""
    _, p, _, _ = o_scan_fields(o.d11, o.d22, abs(o.d13), tol)
    return bool(p)


# ---------------------------------------------------------------------------
# Non-unital anisotropic Pauli family
# ---------------------------------------------------------------------------

def _triangle_slack(gamma: np.ndarray) -> np.ndarray:
    """min of (g2+g3-g1, g3+g1-g2, g1+g2-g3), elementwise over (..., 3)."""
    g1, g2, g3 = gamma[..., 0], gamma[..., 1], gamma[..., 2]
    return np.minimum(np.minimum(g2 + g3 - g1, g3 + g1 - g2), g1 + g2 - g3)


def _tau_product_slack(gamma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    g1, g2, g3 = gamma[..., 0], gamma[..., 1], gamma[..., 2]
    t1, t2, t3 = tau[..., 0], tau[..., 1], tau[..., 2]
    c3, c1, c2 = g1 + g2 - g3, g2 + g3 - g1, g3 + g1 - g2
    return c3 * c1 * c2 - (c3 * t3**2 + c1 * t1**2 + c2 * t2**2)


def pauli_gamma_cp(gamma, tol: float = 1e-9) -> bool:
    """Triangle test on the rates: |gi - gj| <= gk <= gi + gj, all cyclic."""
    gamma = _finite_triple(gamma, "gamma")
    return bool(_triangle_slack(gamma) >= -tol)


def pauli_cp(p: PauliParams, tol: float = 1e-9) -> bool:
    """Complete positivity: triangle test plus the drift product inequality.

    See the module docstring for the degenerate-boundary caveat.
    """
    return (pauli_gamma_cp(p.gamma, tol)
            and bool(_tau_product_slack(p.gamma, p.tau) >= -tol))


def _sphere_evaluator(gamma: np.ndarray, tau: np.ndarray):
    """Closure evaluating e_r . (gamma e_r + tau) on direction angles.

    ``gamma`` and ``tau`` have shape (..., 3); their leading axes must
    broadcast against the trailing axes of the angle arrays.
    """
    g1, g2, g3 = gamma[..., 0], gamma[..., 1], gamma[..., 2]
    t1, t2, t3 = tau[..., 0], tau[..., 1], tau[..., 2]

    def f(theta, beta):
        st = np.sin(theta)
        e1 = st * np.cos(beta)
        e2 = st * np.sin(beta)
        e3 = np.cos(theta)
        return (g1 * e1 * e1 + g2 * e2 * e2 + g3 * e3 * e3
                + t1 * e1 + t2 * e2 + t3 * e3)

    return f


def pauli_p(p: PauliParams, opts: Optional[MinimizerOptions] = None) -> bool:
    """Positivity: min over the unit sphere of e . (gamma e + tau) >= -tol."""
    opts = opts or MinimizerOptions()
    values, _, _ = torus_minimize(
        _sphere_evaluator(p.gamma, p.tau), n=1, grid=opts.grid,
        starts=opts.starts, ftol=opts.ftol)
    return bool(values[0] >= -opts.tol)


def pauli_p_boundary(gamma, theta: float, beta: float) -> np.ndarray:
    """A point of the positivity boundary surface in drift space.

    The surface is parametrized over sphere directions e_r(theta, beta) as
    tau = (e_r . gamma e_r) e_r - 2 gamma e_r.
    """
    gamma = _finite_triple(gamma, "gamma")
    st = np.sin(theta)
    e = np.array([st * np.cos(beta), st * np.sin(beta), np.cos(theta)])
    ge = gamma * e
    return (e @ ge) * e - 2 * ge


def pauli_to_master(p: PauliParams) -> MasterEquationForm:
    """Dissipation matrix of the Pauli family (module docstring table)."""
    g1, g2, g3 = p.gamma
    t1, t2, t3 = p.tau
    w = (t1 + 1j * t2) / (2 * np.sqrt(2))
    d = np.array([
        [(g1 + g2 - g3) / 2, np.conj(w), -w],
        [w, (g3 - t3) / 2, (g2 - g1) / 2],
        [-np.conj(w), (g2 - g1) / 2, (g3 + t3) / 2],
    ])
    return MasterEquationForm(h=np.zeros((2, 2)), d=d)


def master_to_pauli(m: MasterEquationForm, tol: float = 1e-10) -> PauliParams:
    """Invert the Pauli parametrization, rejecting off-class generators.

    Rates and drifts are read off the dissipation matrix, the candidate
    is re-synthesized, and the input must match it entrywise (including
    H = 0) within ``tol``; otherwise NotPauliClassError is raised.
    """
    if m.dim != 2:
        raise NotPauliClassError("the Pauli family is qubit-only")
    d = m.d
    g3 = (d[1, 1] + d[2, 2]).real
    gsum = 2 * d[0, 0].real + g3
    gdiff = 2 * d[1, 2].real          # g2 - g1
    w = 2 * np.sqrt(2) * d[1, 0]      # t1 + i t2
    params = PauliParams(
        gamma=[(gsum - gdiff) / 2, (gsum + gdiff) / 2, g3],
        tau=[w.real, w.imag, (d[2, 2] - d[1, 1]).real])
    rebuilt = pauli_to_master(params)
    defect = max(np.abs(m.h - rebuilt.h).max(),
                 np.abs(m.d - rebuilt.d).max())
    if defect > tol:
        raise NotPauliClassError(
            f"generator is off the Pauli class by {defect:.3g} (> {tol:g})")
    return params


def pauli_scan_fields(gamma: np.ndarray, tau: np.ndarray, tol: float = 1e-9,
                      grid: int = 64, starts: int = 8, ftol: float = 1e-12):
    """Vectorized Pauli-family verdicts and margins for (N, 3) parameter stacks.

    margin_cp is the smallest eigenvalue of the dissipation matrix;
    margin_p is the sphere minimum of e . (gamma e + tau).
    """
    gamma = np.asarray(gamma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    n = gamma.shape[0]
    cp = (_triangle_slack(gamma) >= -tol) & (_tau_product_slack(gamma, tau)
                                             >= -tol)
    w = (tau[:, 0] + 1j * tau[:, 1]) / (2 * np.sqrt(2))
    d = np.zeros((n, 3, 3), dtype=complex)
    d[:, 0, 0] = (gamma[:, 0] + gamma[:, 1] - gamma[:, 2]) / 2
    d[:, 1, 1] = (gamma[:, 2] - tau[:, 2]) / 2
    d[:, 2, 2] = (gamma[:, 2] + tau[:, 2]) / 2
    d[:, 0, 1] = np.conj(w)
    d[:, 1, 0] = w
    d[:, 0, 2] = -w
    d[:, 2, 0] = -np.conj(w)
    d[:, 1, 2] = d[:, 2, 1] = (gamma[:, 1] - gamma[:, 0]) / 2
    margin_cp = np.linalg.eigvalsh(d)[:, 0]
    margin_p, _, _ = torus_minimize(
        _sphere_evaluator(gamma, tau), n=n, grid=grid, starts=starts,
        ftol=ftol)
    p = margin_p >= -tol
    return cp, p, margin_cp, margin_p

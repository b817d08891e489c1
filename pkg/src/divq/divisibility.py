"""Local CP and local P tests for a qubit generator at a fixed time.

A generator is locally completely positive exactly when its dissipation
matrix D is positive semidefinite, and locally positive exactly when

    p(theta, beta) = <psi| L[ |phi><phi| ] |psi>  >=  0

for every orthonormal qubit pair, parametrized as

    |psi> = (cos(theta/2), e^{i beta} sin(theta/2)),
    |phi> = (-sin(theta/2), e^{i beta} cos(theta/2)).

In terms of the dissipation matrix the function (twice p) reads

    2 p = R + S cos(theta) + (D11 - R/2) sin^2(theta)
          + Re[ -D23 e^{-2 i beta} sin(theta)
                + sqrt(2) (D21 - D13) e^{-i beta}
                - sqrt(2) (D21 + D13) e^{-i beta} cos(theta) ] sin(theta),

with R = D22 + D33 and S = D33 - D22; the Hamiltonian part never enters.
The global minimum over the torus is found by a dense coarse grid followed
by deterministic shrinking-grid refinement from the best cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from divq.hermitian import (
    MAX_MINOR_DIM,
    MinorWitness,
    eigen_psd,
    sylvester_psd,
)
from divq.representations import MasterEquationForm

__all__ = [
    "TorusPoint",
    "MinimizerOptions",
    "DivisibilityVerdict",
    "InternalConsistencyError",
    "local_cp",
    "p_value",
    "local_p",
    "classify",
    "torus_minimize",
]


class TorusPoint(NamedTuple):
    """A point on the (theta, beta) torus, theta in [0, pi], beta in [0, 2 pi)."""

    theta: float
    beta: float


class InternalConsistencyError(RuntimeError):
    """Raised when the CP and P verdicts contradict each other (CP must imply P)."""


@dataclass
class MinimizerOptions:
    grid: int = 64       # coarse grid resolution per torus direction
    starts: int = 8      # refinement starts taken from the best grid cells
    tol: float = 1e-9    # acceptance tolerance on minima / PSD slack
    ftol: float = 1e-12  # convergence tolerance in function value


@dataclass
class DivisibilityVerdict:
    """Outcome of the local tests; the P fields are None beyond qubits."""

    locally_cp: bool
    locally_p: Optional[bool]
    cp_witness: Optional[MinorWitness]
    p_witness: Optional[Tuple[TorusPoint, float]]
    cp_margin: float              # smallest eigenvalue of D
    p_margin: Optional[float]     # global minimum of 2 p(theta, beta)
    cp_marginal: bool
    p_marginal: Optional[bool]


def torus_minimize(f: Callable, n: int = 1, grid: int = 64, starts: int = 8,
                   ftol: float = 1e-12):
    """Globally minimize n smooth functions on the torus, in lockstep.

    ``f(theta, beta)`` must evaluate elementwise on broadcast arrays whose
    trailing axis enumerates the n problems, and must satisfy the sphere
    identifications f(-theta, beta) = f(theta, beta + pi) and 2 pi
    periodicity in both angles (any function of a direction or of an
    orthonormal pair does).

    A (grid x grid) coarse evaluation seeds ``starts`` refinement centers
    per problem; each center is polished by a shrinking 9 x 9 local grid
    until the improvement per round drops below ``ftol`` (window sizes
    reach ~1e-9 rad, far below the curvature scale).  Everything is pure
    arithmetic in a fixed order, so results are deterministic.

    Returns (values, thetas, betas), each of shape (n,), with the minima
    mapped back into the fundamental domain.
    """
    thetas = np.linspace(0.0, np.pi, grid)
    betas = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    th, be = np.meshgrid(thetas, betas, indexing="ij")
    th, be = th.reshape(-1, 1), be.reshape(-1, 1)
    coarse = np.broadcast_to(f(th, be), (th.shape[0], n))
    order = np.argsort(coarse, axis=0, kind="stable")[:starts]  # (starts, n)
    centers_t = th[order, 0]
    centers_b = be[order, 0]
    best = np.take_along_axis(coarse, order, axis=0).copy()

    offsets = np.linspace(-1.0, 1.0, 9)
    du, dv = np.meshgrid(offsets, offsets, indexing="ij")
    du = du.reshape(-1, 1, 1)  # (81, 1, 1)
    dv = dv.reshape(-1, 1, 1)
    w = max(np.pi / (grid - 1), 2 * np.pi / grid)
    stall = 0
    while True:
        loc_t = centers_t[None] + w * du  # (81, starts, n)
        loc_b = centers_b[None] + w * dv
        vals = np.broadcast_to(f(loc_t, loc_b), loc_t.shape)
        pick = np.argmin(vals, axis=0)[None]  # (1, starts, n)
        new_best = np.take_along_axis(vals, pick, axis=0)[0]
        cand_t = np.take_along_axis(loc_t, pick, axis=0)[0]
        cand_b = np.take_along_axis(loc_b, pick, axis=0)[0]
        improved = float(np.max(best - new_best))
        keep = new_best < best
        centers_t = np.where(keep, cand_t, centers_t)
        centers_b = np.where(keep, cand_b, centers_b)
        best = np.minimum(best, new_best)
        w *= 0.35
        stall = stall + 1 if improved < ftol else 0
        if w < 1e-9 or (stall >= 2 and w < 1e-6):
            break

    cols = np.arange(n)
    winner = np.argmin(best, axis=0)
    values = best[winner, cols]
    theta = centers_t[winner, cols]
    beta = centers_b[winner, cols]
    # Map back into theta in [0, pi], beta in [0, 2 pi) using the sphere
    # identifications stated above.
    theta = np.mod(theta, 2 * np.pi)
    flip = theta > np.pi
    theta = np.where(flip, 2 * np.pi - theta, theta)
    beta = np.mod(np.where(flip, beta + np.pi, beta), 2 * np.pi)
    return values, theta, beta


def p_value(m: MasterEquationForm, pt: TorusPoint) -> float:
    """Evaluate 2 p(theta, beta) for a qubit generator (see module docstring)."""
    f = _p_evaluator(m)
    return float(f(np.asarray(pt.theta), np.asarray(pt.beta)))


def _p_evaluator(m: MasterEquationForm) -> Callable:
    """Closure evaluating 2 p(theta, beta) elementwise on arrays."""
    if m.dim != 2:
        raise ValueError(f"positivity test is qubit-only, got dimension {m.dim}")
    d = m.d
    d11 = d[0, 0].real
    r = d[1, 1].real + d[2, 2].real
    s = d[2, 2].real - d[1, 1].real
    d23 = d[1, 2]
    c_plain = np.sqrt(2) * (d[1, 0] - d[0, 2])
    c_cos = np.sqrt(2) * (d[1, 0] + d[0, 2])

    def f(theta, beta):
        st = np.sin(theta)
        ct = np.cos(theta)
        eb = np.exp(-1j * beta)
        bracket = -d23 * eb * eb * st + c_plain * eb - c_cos * eb * ct
        return r + s * ct + (d11 - 0.5 * r) * st * st + bracket.real * st

    return f


def local_cp(m: MasterEquationForm, tol: float = 1e-9):
    """Local complete positivity: D must be positive semidefinite.

    Runs the principal-minor test and reports the first violated minor as
    witness; dissipation matrices too large for minor enumeration fall
    back to the spectral test (witness None).
    """
    if m.d.shape[0] <= MAX_MINOR_DIM:
        result = sylvester_psd(m.d, tol)
        return result.is_psd, result.witness
    result = eigen_psd(m.d, tol)
    return result.is_psd, None


def local_p(m: MasterEquationForm, opts: Optional[MinimizerOptions] = None):
    """Local positivity: global minimum of 2 p over the torus must be >= -tol.

    Returns (locally_p, (point, minimum)); the witness is the best point
    found whether or not the verdict is positive.
    """
    opts = opts or MinimizerOptions()
    values, theta, beta = torus_minimize(
        _p_evaluator(m), n=1, grid=opts.grid, starts=opts.starts,
        ftol=opts.ftol)
    minimum = float(values[0])
    point = TorusPoint(float(theta[0]), float(beta[0]))
    return minimum >= -opts.tol, (point, minimum)


def classify(m: MasterEquationForm,
             opts: Optional[MinimizerOptions] = None) -> DivisibilityVerdict:
    """Combine the CP and P tests into a verdict with margins.

    The CP margin is the smallest eigenvalue of D, the P margin the global
    torus minimum of 2 p; |margin| <= tol raises the corresponding
    "marginal" flag.  Complete positivity implies positivity, so a CP-yes /
    P-no outcome is rejected as an internal inconsistency.
    """
    opts = opts or MinimizerOptions()
    cp_ok, cp_witness = local_cp(m, tol=opts.tol)
    cp_margin = eigen_psd(m.d, tol=opts.tol).min_eigenvalue
    p_ok, (point, p_min) = local_p(m, opts)
    if cp_ok and not p_ok:
        raise InternalConsistencyError(
            f"generator tested completely positive but p reached {p_min:g} "
            f"at theta={point.theta:g}, beta={point.beta:g}")
    return DivisibilityVerdict(
        locally_cp=cp_ok,
        locally_p=p_ok,
        cp_witness=None if cp_ok else cp_witness,
        p_witness=None if p_ok else (point, p_min),
        cp_margin=float(cp_margin),
        p_margin=p_min,
        cp_marginal=abs(cp_margin) <= opts.tol,
        p_marginal=abs(p_min) <= opts.tol,
    )

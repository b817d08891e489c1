"""Generator extraction and divisibility classification for sampled processes.

A process is a time-indexed family of trace-preserving superoperators
starting at the identity.  The time-local generator at each sample is

    L_t = (dLambda_t/dt) Lambda_t^{-1},

estimated with second-order finite differences (central at interior
samples, one-sided at the endpoints, exact weights on non-uniform grids).
The generator's Choi matrix is then classified sample by sample, and the
report aggregates the verdicts together with refined margin-crossing
times.  Only the sampled skeleton is classified; behavior between
samples is interpolated for crossing location but not certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from divq.divisibility import DivisibilityVerdict, MinimizerOptions, classify, local_cp
from divq.representations import (
    GeneratorChoiMatrix,
    MasterEquationForm,
    canonical_form,
)

__all__ = [
    "ProcessTrace",
    "SingularProcessError",
    "SweepReport",
    "generator_at",
    "sweep",
]

TRACE_TOL = 1e-8
KAPPA_MAX = 1e8


class SingularProcessError(RuntimeError):
    """The process map is numerically non-invertible at some sample time.

    Isolated non-invertible points need dedicated treatment that is out
    of scope here, so they surface as this error with the offending time.
    """

    def __init__(self, time: float, cond: float):
        self.time = float(time)
        self.cond = float(cond)
        super().__init__(
            f"process map at t={time:g} is numerically singular "
            f"(condition number {cond:.3g} >= {KAPPA_MAX:g})")


@dataclass(eq=False)
class ProcessTrace:
    """Sampled process: strictly increasing times from 0, superoperators.

    ``maps[k]`` is the d^2 x d^2 matrix of Lambda_{times[k]} acting on
    row-major vectorized operators, so column (i*d + j) holds the
    vectorization of Lambda[|i><j|].  The first map must be the identity
    exactly, and every map must be trace-preserving within 1e-8: summing
    the rows belonging to diagonal output entries must reproduce the
    vectorized identity.
    """

    times: np.ndarray
    maps: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.maps = np.asarray(self.maps, dtype=complex)
        if self.times.ndim != 1 or self.times.size < 3:
            raise ValueError("need a 1-D array of at least 3 sample times")
        if not np.all(np.isfinite(self.times)):
            raise ValueError("sample times must be finite")
        if self.times[0] != 0.0:
            raise ValueError(f"first sample time must be 0, got {self.times[0]}")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        n = self.times.size
        if self.maps.ndim != 3 or self.maps.shape[0] != n:
            raise ValueError(
                f"maps must have shape (len(times), d^2, d^2), got {self.maps.shape}")
        m = self.maps.shape[1]
        if self.maps.shape[2] != m:
            raise ValueError("each map must be square")
        d = round(np.sqrt(m))
        if d * d != m or d < 2:
            raise ValueError(f"map dimension {m} is not d^2 for a dimension d >= 2")
        if not np.all(np.isfinite(self.maps.view(np.float64))):
            raise ValueError("maps must be finite")
        if not np.array_equal(self.maps[0], np.eye(m)):
            raise ValueError("maps[0] must be the identity matrix exactly")
        diag_rows = np.arange(d) * d + np.arange(d)
        eye_vec = np.eye(d, dtype=complex).reshape(-1)
        defects = np.abs(self.maps[:, diag_rows, :].sum(axis=1) - eye_vec)
        worst = int(np.argmax(defects.max(axis=1)))
        if defects[worst].max() > TRACE_TOL:
            raise ValueError(
                f"map at t={self.times[worst]:g} is not trace-preserving "
                f"(defect {defects[worst].max():.3g} > {TRACE_TOL:g})")

    @property
    def dim(self) -> int:
        return round(np.sqrt(self.maps.shape[1]))

    def __len__(self) -> int:
        return self.times.size


def _derivative_weights(nodes: np.ndarray, at: float) -> np.ndarray:
    """Derivative of the three Lagrange basis polynomials at ``at``."""
    x0, x1, x2 = nodes
    return np.array([
        (2 * at - x1 - x2) / ((x0 - x1) * (x0 - x2)),
        (2 * at - x0 - x2) / ((x1 - x0) * (x1 - x2)),
        (2 * at - x0 - x1) / ((x2 - x0) * (x2 - x1)),
    ])


def _stencil(index: int, n: int) -> slice:
    lo = min(max(index - 1, 0), n - 3)
    return slice(lo, lo + 3)


def generator_at(trace: ProcessTrace, index: int) -> GeneratorChoiMatrix:
    """Choi matrix of the time-local generator at sample ``index``.

    The superoperator derivative uses the three samples nearest the
    index; the generator is dLambda Lambda^{-1} computed by linear solve.
    The Choi matrix is cleaned up by Hermitian projection and removal of
    the residual block-trace component, both of which are pure noise
    inherited from the finite differences and the 1e-8 input tolerance.
    """
    n = len(trace)
    if not 0 <= index < n:
        raise IndexError(f"sample index {index} out of range [0, {n})")
    d = trace.dim
    lam = trace.maps[index]
    cond = np.linalg.cond(lam)
    if not cond < KAPPA_MAX:
        raise SingularProcessError(trace.times[index], cond)
    sl = _stencil(index, n)
    w = _derivative_weights(trace.times[sl], trace.times[index])
    dlam = np.tensordot(w, trace.maps[sl], axes=(0, 0))
    try:
        gen = np.linalg.solve(lam.T, dlam.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularProcessError(trace.times[index], np.inf) from exc
    c = gen.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    c = 0.5 * (c + c.conj().T)
    blocks = c.reshape(d, d, d, d)
    block_tr = np.einsum("iaja->ij", blocks)
    c = (blocks - np.einsum("ij,ab->iajb", block_tr / d,
                            np.eye(d))).reshape(d * d, d * d)
    return GeneratorChoiMatrix(c)


@dataclass(eq=False)
class SweepReport:
    """Per-sample divisibility verdicts plus aggregate classification.

    ``summary`` is the conjunction over samples: "CP-divisible" when
    every sample is locally CP, else "P-divisible-not-CP" when every
    sample is locally P, else "neither".  For dimension > 2 only the CP
    test runs and the summary is "CP-divisible" or "not-CP-divisible".
    ``cp_crossings`` / ``p_crossings`` list the refined times where the
    corresponding margin changes sign between adjacent samples.
    """

    times: np.ndarray
    verdicts: List[DivisibilityVerdict]
    summary: str
    cp_crossings: List[float] = field(default_factory=list)
    p_crossings: List[float] = field(default_factory=list)


def _refine_crossing(times: np.ndarray, margins: np.ndarray, i: int) -> float:
    """Root of the local quadratic interpolant between samples i and i+1."""
    sl = _stencil(i, times.size)
    t0 = times[sl][0]
    coeffs = np.polyfit(times[sl] - t0, margins[sl], 2)
    roots = np.roots(coeffs)
    lo, hi = times[i], times[i + 1]
    real = roots[np.abs(roots.imag) < 1e-12].real + t0
    inside = real[(real >= lo - 1e-12) & (real <= hi + 1e-12)]
    if inside.size:
        return float(np.clip(inside[0], lo, hi))
    # Quadratic disagrees with the bracket; fall back to the secant root.
    m0, m1 = margins[i], margins[i + 1]
    return float(lo + (hi - lo) * m0 / (m0 - m1))


def _crossings(times: np.ndarray, margins: List[Optional[float]]) -> List[float]:
    arr = np.array([np.nan if m is None else m for m in margins], dtype=float)
    out = []
    for i in range(arr.size - 1):
        if np.isfinite(arr[i]) and np.isfinite(arr[i + 1]) and arr[i] * arr[i + 1] < 0:
            out.append(_refine_crossing(times, arr, i))
    return out


def sweep(trace: ProcessTrace, opts: Optional[MinimizerOptions] = None) -> SweepReport:
    """Classify every sample of ``trace`` and aggregate the verdicts."""
    opts = opts or MinimizerOptions()
    qubit = trace.dim == 2
    verdicts: List[DivisibilityVerdict] = []
    for index in range(len(trace)):
        gcm = generator_at(trace, index)
        master = canonical_form(gcm)
        if qubit:
            verdicts.append(classify(master, opts))
        else:
            is_cp, witness = local_cp(master, opts.tol)
            eig_margin = _cp_margin(master)
            verdicts.append(DivisibilityVerdict(
                locally_cp=is_cp, locally_p=None, cp_witness=witness,
                p_witness=None, cp_margin=eig_margin, p_margin=None,
                cp_marginal=abs(eig_margin) <= opts.tol, p_marginal=None))
    all_cp = all(v.locally_cp for v in verdicts)
    if qubit:
        all_p = all(v.locally_p for v in verdicts)
        summary = ("CP-divisible" if all_cp
                   else "P-divisible-not-CP" if all_p else "neither")
    else:
        summary = "CP-divisible" if all_cp else "not-CP-divisible"
    return SweepReport(
        times=trace.times,
        verdicts=verdicts,
        summary=summary,
        cp_crossings=_crossings(trace.times, [v.cp_margin for v in verdicts]),
        p_crossings=_crossings(trace.times, [v.p_margin for v in verdicts]),
    )


def _cp_margin(master: MasterEquationForm) -> float:
    return float(np.linalg.eigvalsh(master.d)[0])

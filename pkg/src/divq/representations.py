"""Generator representations for qubit processes and conversions between them.

A time-local generator L acts on density matrices as

    L[rho] = -i [H, rho]
             + sum_ij D_ij ( F_i rho F_j^dag
                             - (F_j^dag F_i rho + rho F_j^dag F_i) / 2 ),

where H is a traceless Hermitian Hamiltonian part, D is the Hermitian
dissipation matrix, and {F_i} is an orthonormal operator basis whose first
d^2 - 1 elements are traceless and whose last element is 1/sqrt(d).  For a
qubit the basis is fixed to

    F_1 = (|0><0| - |1><1|) / sqrt(2),   F_2 = |0><1|,
    F_3 = |1><0|,                        F_4 = 1 / sqrt(2).

Three equivalent representations are supported:

* the Choi matrix of the generator, C = sum_ij |i><j| (x) L[|i><j|],
  which for a qubit carries exactly 12 real parameters
  (q1, q2, Y1, Y2, X, Z1, Z2) laid out as

        [ -q1   Y1*   X*   -Z1* ]
        [  Y1    q1   Z2   -X*  ]
        [  X    Z2*   q2    Y2* ]
        [ -Z1   -X    Y2   -q2  ],

* the master-equation pair (H, D) above,
* the Bloch affine form: on Bloch vectors the generator acts as
  v -> R v + t with a real 3x3 matrix R and translation t.

All conversions are exact linear bijections; ``canonical_form`` performs
the master-equation extraction from an arbitrary trace-preserving
generator Choi matrix in any dimension d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from divq.hermitian import HERMITICITY_TOL, hermitian_part, require_hermitian

__all__ = [
    "ChoiGeneratorQubit",
    "MasterEquationForm",
    "BlochAffineGenerator",
    "GeneratorChoiMatrix",
    "operator_basis",
    "assemble_choi",
    "disassemble_choi",
    "choi_to_master",
    "master_to_choi",
    "choi_to_bloch",
    "bloch_to_choi",
    "apply_generator",
    "choi_of_master",
    "canonical_form",
]

# Above this partial-trace defect a matrix is rejected as the Choi matrix
# of a non-trace-preserving generator.
TRACE_PRESERVATION_TOL = 1e-8


def _require_finite(value: complex, name: str) -> complex:
    value = complex(value)
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


@dataclass
class ChoiGeneratorQubit:
    """The 12 real parameters of a qubit generator's Choi matrix."""

    q1: float
    q2: float
    y1: complex
    y2: complex
    x: complex
    z1: complex
    z2: complex

    def __post_init__(self):
        self.q1 = float(_require_finite(self.q1, "q1").real)
        self.q2 = float(_require_finite(self.q2, "q2").real)
        for name in ("y1", "y2", "x", "z1", "z2"):
            setattr(self, name, _require_finite(getattr(self, name), name))


@dataclass(eq=False)
class MasterEquationForm:
    """Master-equation data: traceless Hermitian H and Hermitian D.

    ``h`` is d x d with trace 0 (the trace is pure gauge and is fixed to
    zero everywhere); ``d`` is the (d^2-1) x (d^2-1) dissipation matrix in
    the traceless part of the operator basis.
    """

    h: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.h = require_hermitian(self.h, name="H")
        self.d = require_hermitian(self.d, name="D")
        n = self.h.shape[0]
        if self.d.shape[0] != n * n - 1:
            raise ValueError(
                f"D must be {n * n - 1}x{n * n - 1} for dimension {n}, "
                f"got {self.d.shape}")
        tr = abs(self.h.trace())
        if tr > 1e-12:
            raise ValueError(f"H must be traceless (|tr H| = {tr:g})")

    @property
    def dim(self) -> int:
        return self.h.shape[0]


@dataclass(eq=False)
class BlochAffineGenerator:
    """Real affine action of a qubit generator on Bloch vectors: v -> R v + t."""

    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.t = np.asarray(self.t, dtype=float)
        if self.r.shape != (3, 3):
            raise ValueError(f"R must be 3x3, got {self.r.shape}")
        if self.t.shape != (3,):
            raise ValueError(f"t must be a 3-vector, got {self.t.shape}")
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.t))):
            raise ValueError("Bloch generator entries must be finite")


@dataclass(eq=False)
class GeneratorChoiMatrix:
    """Choi matrix of a trace-preserving generator, any dimension d.

    The d^2 x d^2 matrix is Hermitian and every d x d block has zero
    trace (that is what trace preservation of the generator looks like in
    the Choi representation).
    """

    c: np.ndarray

    def __post_init__(self):
        self.c = require_hermitian(self.c, name="Choi matrix")
        n = self.c.shape[0]
        d = int(round(np.sqrt(n)))
        if d * d != n:
            raise ValueError(f"Choi matrix dimension {n} is not a square")
        defect = _block_trace_defect(self.c, d)
        if defect > 1e-10:
            raise ValueError(
                "generator is not trace-preserving: block partial traces "
                f"deviate by {defect:g}")

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.c.shape[0])))


def _block_trace_defect(c: np.ndarray, d: int) -> float:
    blocks = c.reshape(d, d, d, d)  # [i, a, j, b]
    return float(np.max(np.abs(np.einsum("iaja->ij", blocks))))


def operator_basis(d: int) -> list:
    """Orthonormal operator basis F_1 .. F_{d^2}, last element 1/sqrt(d).

    For d = 2 the fixed qubit basis listed in the module docstring; for
    d > 2 the generalized Gell-Mann construction (symmetric pairs, then
    antisymmetric pairs, then diagonal matrices), all traceless, followed
    by the normalized identity.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if d == 2:
        f1 = np.array([[1, 0], [0, -1]], dtype=complex) / np.sqrt(2)
        f2 = np.array([[0, 1], [0, 0]], dtype=complex)
        f3 = np.array([[0, 0], [1, 0]], dtype=complex)
        f4 = np.eye(2, dtype=complex) / np.sqrt(2)
        return [f1, f2, f3, f4]
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            basis.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            basis.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[:l, :l] = np.eye(l)
        m[l, l] = -l
        basis.append(m / np.sqrt(l * (l + 1)))
    basis.append(np.eye(d, dtype=complex) / np.sqrt(d))
    return basis


def assemble_choi(p: ChoiGeneratorQubit) -> GeneratorChoiMatrix:
    """Lay the seven parameters out as the 4x4 generator Choi matrix."""
    q1, q2 = p.q1, p.q2
    y1, y2, x, z1, z2 = p.y1, p.y2, p.x, p.z1, p.z2
    c = np.array([
        [-q1, np.conj(y1), np.conj(x), -np.conj(z1)],
        [y1, q1, z2, -np.conj(x)],
        [x, np.conj(z2), q2, np.conj(y2)],
        [-z1, -x, y2, -q2],
    ])
    return GeneratorChoiMatrix(c)


def disassemble_choi(choi: Union[GeneratorChoiMatrix, np.ndarray]) -> ChoiGeneratorQubit:
    """Read the seven parameters off a 4x4 generator Choi matrix.

    Inverse of ``assemble_choi``: any Hermitian 4x4 matrix with traceless
    2x2 blocks matches the parametrization exactly (12 real degrees of
    freedom on both sides).
    """
    if not isinstance(choi, GeneratorChoiMatrix):
        choi = GeneratorChoiMatrix(choi)
    c = choi.c
    if c.shape != (4, 4):
        raise ValueError(f"expected a 4x4 Choi matrix, got {c.shape}")
    return ChoiGeneratorQubit(
        q1=c[1, 1].real,
        q2=c[2, 2].real,
        y1=c[1, 0],
        y2=c[3, 2],
        x=c[2, 0],
        z1=-c[3, 0],
        z2=c[1, 2],
    )


def apply_generator(m: MasterEquationForm, rho: np.ndarray) -> np.ndarray:
    """Evaluate L[rho] from the master-equation form, term by term."""
    rho = np.asarray(rho, dtype=complex)
    d = m.dim
    basis = operator_basis(d)
    out = -1j * (m.h @ rho - rho @ m.h)
    for a in range(d * d - 1):
        fa = basis[a]
        for b in range(d * d - 1):
            coeff = m.d[a, b]
            if coeff == 0:
                continue
            fbd = basis[b].conj().T
            anti = fbd @ fa
            out = out + coeff * (fa @ rho @ fbd
                                 - 0.5 * (anti @ rho + rho @ anti))
    return out


def choi_of_master(m: MasterEquationForm) -> GeneratorChoiMatrix:
    """Synthesize the generator Choi matrix from (H, D), any dimension.

    Uses the closed form C = |u><Phi| + |Phi><u| + P D P^dag, where
    |Phi> = sum_i |ii>, u = (1 (x) K)|Phi> with
    K = -iH - (1/2) sum_ab D_ab F_b^dag F_a, and the columns of P are the
    vectors (1 (x) F_a)|Phi>.
    """
    d = m.dim
    basis = operator_basis(d)
    mm = np.zeros((d, d), dtype=complex)
    for a in range(d * d - 1):
        for b in range(d * d - 1):
            if m.d[a, b] != 0:
                mm += m.d[a, b] * (basis[b].conj().T @ basis[a])
    k = -1j * m.h - 0.5 * mm
    phi = np.eye(d, dtype=complex).reshape(-1)  # sum_i |ii>, row-major
    u = k.T.reshape(-1)  # (1 (x) K)|Phi>
    p_cols = np.column_stack([basis[a].T.reshape(-1)
                              for a in range(d * d - 1)])
    c = np.outer(u, phi.conj()) + np.outer(phi, u.conj())
    c += p_cols @ m.d @ p_cols.conj().T
    return GeneratorChoiMatrix(hermitian_part(c))


def master_to_choi(m: MasterEquationForm) -> ChoiGeneratorQubit:
    """Forward conversion (H, D) -> (q1, q2, Y1, Y2, X, Z1, Z2).

    In particular q1 = D33, q2 = D22, Re Z1 = D11 + (D22 + D33)/2,
    Im Z1 = H22 - H11 and Z2 = D32; the remaining parameters mix
    (D12, D31, H21) linearly.
    """
    if m.dim != 2:
        raise ValueError(
            f"parameter form is qubit-only, got dimension {m.dim}")
    return disassemble_choi(choi_of_master(m))


def canonical_form(choi: Union[GeneratorChoiMatrix, np.ndarray]) -> MasterEquationForm:
    """Extract (H, D) from a trace-preserving generator Choi matrix.

    With |Phi_B> the normalized maximally entangled state, the matrix
    splits as C = C_phi - |Psi><Phi_B| - |Phi_B><Psi| where

        lambda = <Phi_B| C |Phi_B>,
        |Psi>  = -C |Phi_B> + (lambda/2) |Phi_B>,
        C_phi  = (1 - |Phi_B><Phi_B|) C (1 - |Phi_B><Phi_B|).

    D is C_phi expressed in the orthonormal vectors sqrt(d)(1 (x) F_a)
    |Phi_B>, kappa is read off |Psi| entrywise, and
    H = -i kappa + (i/2) sum_ab D_ab F_b^dag F_a, made exactly traceless.
    Exact inverse of ``choi_of_master``.
    """
    if isinstance(choi, GeneratorChoiMatrix):
        c = choi.c
        d = choi.dim
    else:
        c = require_hermitian(choi, name="Choi matrix")
        d = int(round(np.sqrt(c.shape[0])))
        if d * d != c.shape[0]:
            raise ValueError(
                f"Choi matrix dimension {c.shape[0]} is not a square")
        defect = _block_trace_defect(c, d)
        if defect > TRACE_PRESERVATION_TOL:
            raise ValueError(
                "generator is not trace-preserving: block partial traces "
                f"deviate by {defect:g}")
    basis = operator_basis(d)
    phi_b = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    lam = float(np.real(phi_b.conj() @ c @ phi_b))
    psi = -c @ phi_b + 0.5 * lam * phi_b
    # kappa[n, m] = <mn|Psi> / sqrt(d); Psi is indexed (m d + n)
    kappa = psi.reshape(d, d).T / np.sqrt(d)
    p_cols = np.column_stack([basis[a].T.reshape(-1)
                              for a in range(d * d - 1)])
    dmat = hermitian_part(p_cols.conj().T @ c @ p_cols)
    mm = np.zeros((d, d), dtype=complex)
    for a in range(d * d - 1):
        for b in range(d * d - 1):
            if dmat[a, b] != 0:
                mm += dmat[a, b] * (basis[b].conj().T @ basis[a])
    h = hermitian_part(-1j * kappa + 0.5j * mm)
    h -= (h.trace() / d) * np.eye(d)
    return MasterEquationForm(h=h, d=dmat)


def choi_to_master(p: ChoiGeneratorQubit) -> MasterEquationForm:
    """Invert the parameter map: recover (H, D) from the Choi parameters.

    The relations read D33 = q1, D22 = q2, D11 = Re Z1 - (q1 + q2)/2,
    D32 = Z2, H22 - H11 = Im Z1, with the trace of H fixed to zero and
    (D12, D31, H21) obtained from the remaining 3x3 linear block.
    """
    return canonical_form(assemble_choi(p))


def choi_to_bloch(p: ChoiGeneratorQubit) -> BlochAffineGenerator:
    """Bloch affine form of the generator, read off the Choi parameters."""
    r = np.array([
        [(p.z2 - p.z1).real, (p.z1 + p.z2).imag, (p.y1 - p.y2).real],
        [(p.z2 - p.z1).imag, -(p.z1 + p.z2).real, (p.y1 - p.y2).imag],
        [2 * p.x.real, -2 * p.x.imag, -p.q1 - p.q2],
    ])
    t = np.array([(p.y1 + p.y2).real, (p.y1 + p.y2).imag, p.q2 - p.q1])
    return BlochAffineGenerator(r=r, t=t)


def bloch_to_choi(b: BlochAffineGenerator) -> ChoiGeneratorQubit:
    """Invert the Bloch affine form back to the Choi parameters."""
    r, t = b.r, b.t
    q1 = 0.5 * (-r[2, 2] - t[2])
    q2 = 0.5 * (-r[2, 2] + t[2])
    x = 0.5 * (r[2, 0] - 1j * r[2, 1])
    y1 = 0.5 * ((t[0] + r[0, 2]) + 1j * (t[1] + r[1, 2]))
    y2 = 0.5 * ((t[0] - r[0, 2]) + 1j * (t[1] - r[1, 2]))
    z1 = 0.5 * (-(r[0, 0] + r[1, 1]) + 1j * (r[0, 1] - r[1, 0]))
    z2 = 0.5 * ((r[0, 0] - r[1, 1]) + 1j * (r[0, 1] + r[1, 0]))
    return ChoiGeneratorQubit(q1=q1, q2=q2, y1=y1, y2=y2, x=x, z1=z1, z2=z2)

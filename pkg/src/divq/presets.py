"""Built-in sampled processes for tests, demos, and the command line.

Three presets, all qubit processes sampled on uniform time grids:

semigroup
    Lambda_t = exp(t L0) for a fixed generator L0 with positive
    semidefinite dissipation matrix; CP-divisible at every time.

pauli-decay
    Bloch-diagonal decay R(t) = diag(e^{-g1 t}, e^{-g2 t}, e^{-g3 t}),
    no drift, rates g = (0.5, 0.3, 0.7).  The generator's Bloch matrix is
    constant diag(-g1, -g2, -g3), handy as an analytic reference.

x-class
    Bloch generator diag(-gamma1(t), -gamma1(t), -1) with
    gamma1(t) = 0.75 - t/2.  Its dissipation matrix is the X-shaped
    D(t) = diag(0.25 - t/2, 0.5, 0.5) with no off-diagonal, so the
    process leaves the CP-divisible class at t = 0.5 (D11 hits zero) and
    the P-divisible class at t = 1.5 (where (t/2 - 1/4)^2 grows past
    D22 D33 = 1/4), while the sampled maps stay physical up to the
    default horizon 1.6.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.linalg import expm

from divq.process import ProcessTrace
from divq.representations import MasterEquationForm, apply_generator

__all__ = [
    "PRESET_NAMES",
    "X_CLASS_CP_CROSSING",
    "X_CLASS_P_CROSSING",
    "bloch_superop",
    "superop_of_master",
    "make_preset",
    "pauli_decay_trace",
    "semigroup_trace",
    "x_class_trace",
]

X_CLASS_CP_CROSSING = 0.5
X_CLASS_P_CROSSING = 1.5

_SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def superop_of_master(m: MasterEquationForm) -> np.ndarray:
    """Matrix of the generator on row-major vectorized operators."""
    d = m.dim
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            rho = np.zeros((d, d), dtype=complex)
            rho[i, j] = 1.0
            s[:, i * d + j] = apply_generator(m, rho).reshape(-1)
    return s


def bloch_superop(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Superoperator of the qubit map with Bloch matrix ``r`` and shift ``s``.

    The map sends a state with Bloch vector v to one with Bloch vector
    r v + s; extended linearly to all operators via the Pauli expansion.
    """
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            rho = np.zeros((2, 2), dtype=complex)
            rho[i, j] = 1.0
            tr = np.trace(rho)
            rv = np.array([np.trace(sig @ rho) for sig in _SIGMA])
            v = r @ rv + tr * np.asarray(s, dtype=float)
            image = 0.5 * (tr * np.eye(2) + np.tensordot(v, _SIGMA, axes=(0, 0)))
            out[:, 2 * i + j] = image.reshape(-1)
    return out


def _grid(t_max: float, samples: int) -> np.ndarray:
    if samples < 3:
        raise ValueError("need at least 3 samples")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    return np.linspace(0.0, t_max, samples)


def semigroup_trace(t_max: float = 2.0, samples: int = 81) -> ProcessTrace:
    """Constant-generator process exp(t L0); CP-divisible throughout."""
    h = 0.2 * _SIGMA[0] + 0.1 * _SIGMA[2]
    d0 = np.array([
        [0.5, 0.1, 0.0],
        [0.1, 0.4, 0.05],
        [0.0, 0.05, 0.3],
    ])
    gen = superop_of_master(MasterEquationForm(h=h, d=d0))
    times = _grid(t_max, samples)
    maps = np.stack([np.eye(4, dtype=complex)]
                    + [expm(t * gen) for t in times[1:]])
    return ProcessTrace(times=times, maps=maps)


def pauli_decay_trace(rates=(0.5, 0.3, 0.7), t_max: float = 2.0,
                      samples: int = 81) -> ProcessTrace:
    """Bloch-diagonal exponential decay with no drift."""
    g = np.asarray(rates, dtype=float)
    if g.shape != (3,):
        raise ValueError("rates must be a 3-vector")
    times = _grid(t_max, samples)
    maps = np.stack([bloch_superop(np.diag(np.exp(-g * t)), np.zeros(3))
                     for t in times])
    return ProcessTrace(times=times, maps=maps)


def x_class_trace(t_max: float = 1.6, samples: int = 161) -> ProcessTrace:
    """Engineered process crossing CP at t = 0.5 and P at t = 1.5.

    The Bloch picture integrates in closed form: the map at time t is
    diag(a(t), a(t), e^{-t}) with a(t) = exp(-(0.75 t - t^2/4)).
    """
    times = _grid(t_max, samples)
    maps = np.stack([
        bloch_superop(np.diag([a, a, z]), np.zeros(3))
        for a, z in zip(np.exp(-(0.75 * times - 0.25 * times**2)),
                        np.exp(-times))
    ])
    return ProcessTrace(times=times, maps=maps)


PRESET_NAMES = ("semigroup", "pauli-decay", "x-class")


def make_preset(name: str, t_max: Optional[float] = None,
                samples: Optional[int] = None) -> ProcessTrace:
    """Build a preset trace by name, with optional grid overrides."""
    builders = {
        "semigroup": semigroup_trace,
        "pauli-decay": pauli_decay_trace,
        "x-class": x_class_trace,
    }
    if name not in builders:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    kwargs = {}
    if t_max is not None:
        kwargs["t_max"] = t_max
    if samples is not None:
        kwargs["samples"] = samples
    return builders[name](**kwargs)

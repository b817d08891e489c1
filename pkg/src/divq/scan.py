"""Parameter-space region scans over the special generator families.

A scan walks a rectangular grid over two parameters of one family,
holding the remaining parameters fixed, and records the CP and P
verdicts plus margins for every cell.  Scan specifications travel as
JSON ("scan-v1"):

    {"format": "scan-v1",
     "class": "x",                       # x | o | pauli-gamma | pauli-tau
     "fixed": {"D11": 0.0, "absD23": 1.0},
     "axes": [{"name": "D22", "min": 0.0, "max": 3.0, "steps": 200},
              {"name": "D33", "min": 0.0, "max": 3.0, "steps": 200}],
     "output": "x-scan.csv"}

Class parameters:
    x            D11, D22, D33, absD23
    o            D11, D22, absD13
    pauli-gamma  gamma1, gamma2, gamma3           (drift fixed at zero)
    pauli-tau    gamma1..gamma3, tau1..tau3

The x, o, and pauli-gamma classes evaluate in one vectorized pass from
closed-form criteria (for pauli-gamma the sphere minimum with zero drift
is exactly min(gamma)).  The pauli-tau class needs a sphere minimization
per cell, which runs chunked and optionally multi-threaded; chunks are
independent, so results are identical for every thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from divq.divisibility import MinimizerOptions
from divq.families import (
    _tau_product_slack,
    _triangle_slack,
    o_scan_fields,
    pauli_scan_fields,
    x_scan_fields,
)
from divq.formats import FormatError, _real, _reject_extras, _take

__all__ = [
    "AxisSpec",
    "CLASS_PARAMS",
    "RegionScanSpec",
    "ScanResult",
    "parse_scan_spec",
    "run_scan",
]

CLASS_PARAMS = {
    "x": ("D11", "D22", "D33", "absD23"),
    "o": ("D11", "D22", "absD13"),
    "pauli-gamma": ("gamma1", "gamma2", "gamma3"),
    "pauli-tau": ("gamma1", "gamma2", "gamma3", "tau1", "tau2", "tau3"),
}

# Magnitude parameters that cannot meaningfully be negative.
_NONNEGATIVE = {"absD23", "absD13"}

SCAN_MINIMIZER = MinimizerOptions(grid=24, starts=4, ftol=1e-10)
_CHUNK = 4096


@dataclass
class AxisSpec:
    name: str
    lo: float
    hi: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass
class RegionScanSpec:
    scan_class: str
    fixed: Dict[str, float]
    axes: Tuple[AxisSpec, AxisSpec]
    output: str

    def __post_init__(self):
        if self.scan_class not in CLASS_PARAMS:
            raise FormatError(
                f"field 'class' must be one of {', '.join(CLASS_PARAMS)}; "
                f"got {self.scan_class!r}")
        params = CLASS_PARAMS[self.scan_class]
        if len(self.axes) != 2:
            raise FormatError("field 'axes' must list exactly two axes")
        names = [ax.name for ax in self.axes]
        if names[0] == names[1]:
            raise FormatError(f"axes must be distinct, both are {names[0]!r}")
        for ax in self.axes:
            if ax.name not in params:
                raise FormatError(
                    f"axis {ax.name!r} is not a parameter of class "
                    f"{self.scan_class!r} (expected one of {', '.join(params)})")
            if ax.steps < 2:
                raise FormatError(f"axis {ax.name!r} needs steps >= 2")
            if not ax.lo < ax.hi:
                raise FormatError(f"axis {ax.name!r} needs min < max")
            if ax.name in _NONNEGATIVE and ax.lo < 0:
                raise FormatError(f"axis {ax.name!r} cannot go negative")
        remaining = [p for p in params if p not in names]
        missing = [p for p in remaining if p not in self.fixed]
        if missing:
            raise FormatError(
                f"field 'fixed' must cover {', '.join(missing)}")
        for key, value in self.fixed.items():
            if key not in remaining:
                where = ("is an axis" if key in names
                         else f"is not a parameter of class {self.scan_class!r}")
                raise FormatError(f"fixed parameter {key!r} {where}")
            if key in _NONNEGATIVE and value < 0:
                raise FormatError(f"fixed parameter {key!r} cannot be negative")
        if not isinstance(self.output, str) or not self.output:
            raise FormatError("field 'output' must be a non-empty path")


def parse_scan_spec(obj) -> RegionScanSpec:
    if not isinstance(obj, dict):
        raise FormatError("scan spec must be a JSON object")
    consumed: set = set()
    fmt = _take(obj, consumed, "format")
    if fmt != "scan-v1":
        raise FormatError(f"field 'format' must be 'scan-v1', got {fmt!r}")
    scan_class = _take(obj, consumed, "class")
    fixed_obj = _take(obj, consumed, "fixed")
    if not isinstance(fixed_obj, dict):
        raise FormatError("field 'fixed' must be an object")
    fixed = {k: _real(v, f"fixed.{k}") for k, v in fixed_obj.items()}
    axes_obj = _take(obj, consumed, "axes")
    if not isinstance(axes_obj, list) or len(axes_obj) != 2:
        raise FormatError("field 'axes' must be a list of two axis objects")
    axes = []
    for k, ax in enumerate(axes_obj):
        if not isinstance(ax, dict):
            raise FormatError(f"field 'axes[{k}]' must be an object")
        used: set = set()
        name = _take(ax, used, "name")
        if not isinstance(name, str):
            raise FormatError(f"field 'axes[{k}].name' must be a string")
        lo = _real(_take(ax, used, "min"), f"axes[{k}].min")
        hi = _real(_take(ax, used, "max"), f"axes[{k}].max")
        steps = _take(ax, used, "steps")
        if not isinstance(steps, int) or isinstance(steps, bool):
            raise FormatError(f"field 'axes[{k}].steps' must be an integer")
        _reject_extras(ax, used)
        axes.append(AxisSpec(name=name, lo=lo, hi=hi, steps=steps))
    output = _take(obj, consumed, "output")
    if not isinstance(output, str):
        raise FormatError("field 'output' must be a string")
    _reject_extras(obj, consumed)
    return RegionScanSpec(scan_class=scan_class, fixed=fixed,
                          axes=(axes[0], axes[1]), output=output)


@dataclass(eq=False)
class ScanResult:
    spec: RegionScanSpec
    axis1: np.ndarray
    axis2: np.ndarray
    cp: np.ndarray
    p: np.ndarray
    margin_cp: np.ndarray
    margin_p: np.ndarray


def _param_grids(spec: RegionScanSpec):
    """Map every class parameter to a scalar or an (n1, n2) grid."""
    a1 = spec.axes[0].values()
    a2 = spec.axes[1].values()
    g1, g2 = np.meshgrid(a1, a2, indexing="ij")
    params = dict(spec.fixed)
    params[spec.axes[0].name] = g1
    params[spec.axes[1].name] = g2
    return a1, a2, params


def _pauli_stacks(params, shape):
    gamma = np.stack([np.broadcast_to(np.asarray(params[f"gamma{k}"],
                                                 dtype=float), shape).ravel()
                      for k in (1, 2, 3)], axis=1)
    tau = np.stack([np.broadcast_to(np.asarray(params.get(f"tau{k}", 0.0),
                                               dtype=float), shape).ravel()
                    for k in (1, 2, 3)], axis=1)
    return gamma, tau


def _pauli_tau_fields(gamma, tau, tol, opts, threads):
    n = gamma.shape[0]
    slices = [slice(k, min(k + _CHUNK, n)) for k in range(0, n, _CHUNK)]

    def work(sl):
        return pauli_scan_fields(gamma[sl], tau[sl], tol=tol, grid=opts.grid,
                                 starts=opts.starts, ftol=opts.ftol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, slices))
    else:
        parts = [work(sl) for sl in slices]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(4))


def run_scan(spec: RegionScanSpec, tol: float = 1e-9,
             minimizer: Optional[MinimizerOptions] = None,
             threads: int = 1) -> ScanResult:
    """Evaluate the scan; arrays come back indexed [axis1, axis2]."""
    opts = minimizer or SCAN_MINIMIZER
    a1, a2, params = _param_grids(spec)
    shape = (a1.size, a2.size)
    if spec.scan_class == "x":
        cp, p, mcp, mp = x_scan_fields(params["D11"], params["D22"],
                                       params["D33"], params["absD23"], tol)
    elif spec.scan_class == "o":
        cp, p, mcp, mp = o_scan_fields(params["D11"], params["D22"],
                                       params["absD13"], tol)
    elif spec.scan_class == "pauli-gamma":
        gamma, tau = _pauli_stacks(params, shape)
        cp = ((_triangle_slack(gamma) >= -tol)
              & (_tau_product_slack(gamma, tau) >= -tol))
        mcp = np.minimum((gamma[:, 0] + gamma[:, 1] - gamma[:, 2]) / 2,
                         (gamma[:, 2] - np.abs(gamma[:, 1] - gamma[:, 0])) / 2)
        mp = gamma.min(axis=1)
        p = mp >= -tol
    else:
        gamma, tau = _pauli_stacks(params, shape)
        cp, p, mcp, mp = _pauli_tau_fields(gamma, tau, tol, opts, threads)
    return ScanResult(
        spec=spec, axis1=a1, axis2=a2,
        cp=np.asarray(cp).reshape(shape),
        p=np.asarray(p).reshape(shape),
        margin_cp=np.asarray(mcp).reshape(shape),
        margin_p=np.asarray(mp).reshape(shape),
    )

"""Reading and writing the interchange formats.

generator-v1 (JSON object)
    {"format": "generator-v1", "form": <one of choi|master|bloch|pauli>, ...}
    choi    fields q1, q2 (real) and y1, y2, x, z1, z2 (complex)
    master  fields h (d x d complex), d ((d^2-1) square complex)
    bloch   fields r (3 x 3 real), t (real 3-vector)
    pauli   fields gamma, tau (real 3-vectors)
    Complex values are written as [re, im] pairs; plain numbers are
    accepted on input as purely real.  Unknown or missing fields are
    rejected with a message naming the field.

trace-v1 (JSON object)
    {"format": "trace-v1", "times": [...], "maps": [...]}
    with maps a list of square row-major complex matrices.

scan CSV
    header  axis1,axis2,cp,p,margin_cp,margin_p
    one row per grid cell, axis1-major; booleans as 0/1, floats
    formatted with %.12g so identical runs are byte-identical.

sweep CSV
    header  t,min_eig_D,min_p,verdict
    per-sample margins; min_p is empty beyond qubits.
"""

from __future__ import annotations

import json
from typing import IO, Union

import numpy as np

from divq.families import PauliParams
from divq.process import ProcessTrace, SweepReport
from divq.representations import (
    BlochAffineGenerator,
    ChoiGeneratorQubit,
    MasterEquationForm,
)

__all__ = [
    "FormatError",
    "format_float",
    "generator_to_obj",
    "load_generator",
    "load_json",
    "load_trace",
    "parse_generator",
    "parse_trace",
    "save_json",
    "sweep_report_obj",
    "trace_to_obj",
    "write_scan_csv",
    "write_sweep_csv",
]

GeneratorForm = Union[ChoiGeneratorQubit, MasterEquationForm,
                      BlochAffineGenerator, PauliParams]


class FormatError(ValueError):
    """Malformed interchange file; the message names the offending field."""


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _real(value, field: str) -> float:
    if not _is_number(value):
        raise FormatError(f"field {field!r} must be a real number")
    return float(value)


def _complex(value, field: str) -> complex:
    if _is_number(value):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(_is_number(v) for v in value)):
        return complex(value[0], value[1])
    raise FormatError(f"field {field!r} must be a number or an [re, im] pair")


def _real_vector(value, field: str, length=None) -> np.ndarray:
    if not isinstance(value, list) or (length is not None
                                       and len(value) != length):
        want = f"a list of {length} numbers" if length else "a list of numbers"
        raise FormatError(f"field {field!r} must be {want}")
    return np.array([_real(v, f"{field}[{k}]") for k, v in enumerate(value)])


def _matrix(value, field: str, leaf):
    if not isinstance(value, list) or not value:
        raise FormatError(f"field {field!r} must be a non-empty list of rows")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value[0]):
            raise FormatError(
                f"field {field!r} must be rectangular (row {r} differs)")
        rows.append([leaf(v, f"{field}[{r}][{c}]")
                     for c, v in enumerate(row)])
    return np.array(rows)


def _take(obj: dict, consumed: set, field: str):
    if field not in obj:
        raise FormatError(f"missing required field {field!r}")
    consumed.add(field)
    return obj[field]


def _reject_extras(obj: dict, consumed: set):
    for key in obj:
        if key not in consumed:
            raise FormatError(f"unknown field {key!r}")


def parse_generator(obj) -> GeneratorForm:
    """Parse a generator-v1 JSON object into the matching representation."""
    if not isinstance(obj, dict):
        raise FormatError("generator file must contain a JSON object")
    consumed: set = set()
    fmt = _take(obj, consumed, "format")
    if fmt != "generator-v1":
        raise FormatError(f"field 'format' must be 'generator-v1', got {fmt!r}")
    form = _take(obj, consumed, "form")
    if form == "choi":
        result = ChoiGeneratorQubit(
            q1=_real(_take(obj, consumed, "q1"), "q1"),
            q2=_real(_take(obj, consumed, "q2"), "q2"),
            y1=_complex(_take(obj, consumed, "y1"), "y1"),
            y2=_complex(_take(obj, consumed, "y2"), "y2"),
            x=_complex(_take(obj, consumed, "x"), "x"),
            z1=_complex(_take(obj, consumed, "z1"), "z1"),
            z2=_complex(_take(obj, consumed, "z2"), "z2"),
        )
    elif form == "master":
        result = MasterEquationForm(
            h=_matrix(_take(obj, consumed, "h"), "h", _complex),
            d=_matrix(_take(obj, consumed, "d"), "d", _complex),
        )
    elif form == "bloch":
        r = _matrix(_take(obj, consumed, "r"), "r", _real)
        if r.shape != (3, 3):
            raise FormatError(f"field 'r' must be 3x3, got {r.shape}")
        result = BlochAffineGenerator(
            r=r, t=_real_vector(_take(obj, consumed, "t"), "t", 3))
    elif form == "pauli":
        result = PauliParams(
            gamma=_real_vector(_take(obj, consumed, "gamma"), "gamma", 3),
            tau=_real_vector(_take(obj, consumed, "tau"), "tau", 3),
        )
    else:
        raise FormatError(
            f"field 'form' must be one of choi, master, bloch, pauli; "
            f"got {form!r}")
    _reject_extras(obj, consumed)
    return result


def _complex_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _complex_matrix_obj(m: np.ndarray) -> list:
    return [[_complex_pair(v) for v in row] for row in np.asarray(m)]


def generator_to_obj(g: GeneratorForm) -> dict:
    """Serialize any generator representation to a generator-v1 object."""
    if isinstance(g, ChoiGeneratorQubit):
        return {"format": "generator-v1", "form": "choi",
                "q1": g.q1, "q2": g.q2,
                "y1": _complex_pair(g.y1), "y2": _complex_pair(g.y2),
                "x": _complex_pair(g.x),
                "z1": _complex_pair(g.z1), "z2": _complex_pair(g.z2)}
    if isinstance(g, MasterEquationForm):
        return {"format": "generator-v1", "form": "master",
                "h": _complex_matrix_obj(g.h), "d": _complex_matrix_obj(g.d)}
    if isinstance(g, BlochAffineGenerator):
        return {"format": "generator-v1", "form": "bloch",
                "r": [[float(v) for v in row] for row in g.r],
                "t": [float(v) for v in g.t]}
    if isinstance(g, PauliParams):
        return {"format": "generator-v1", "form": "pauli",
                "gamma": [float(v) for v in g.gamma],
                "tau": [float(v) for v in g.tau]}
    raise TypeError(f"not a generator representation: {type(g).__name__}")


def parse_trace(obj) -> ProcessTrace:
    """Parse a trace-v1 JSON object."""
    if not isinstance(obj, dict):
        raise FormatError("trace file must contain a JSON object")
    consumed: set = set()
    fmt = _take(obj, consumed, "format")
    if fmt != "trace-v1":
        raise FormatError(f"field 'format' must be 'trace-v1', got {fmt!r}")
    times = _real_vector(_take(obj, consumed, "times"), "times")
    maps_obj = _take(obj, consumed, "maps")
    if not isinstance(maps_obj, list) or not maps_obj:
        raise FormatError("field 'maps' must be a non-empty list of matrices")
    maps = [_matrix(m, f"maps[{k}]", _complex) for k, m in enumerate(maps_obj)]
    shapes = {m.shape for m in maps}
    if len(shapes) != 1:
        raise FormatError("field 'maps' entries must all have the same shape")
    _reject_extras(obj, consumed)
    return ProcessTrace(times=times, maps=np.stack(maps))


def trace_to_obj(trace: ProcessTrace) -> dict:
    return {"format": "trace-v1",
            "times": [float(t) for t in trace.times],
            "maps": [_complex_matrix_obj(m) for m in trace.maps]}


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def save_json(path: str, obj: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_generator(path: str) -> GeneratorForm:
    return parse_generator(load_json(path))


def load_trace(path: str) -> ProcessTrace:
    return parse_trace(load_json(path))


def format_float(x: float) -> str:
    return f"{float(x):.12g}"


def write_scan_csv(fh: IO[str], axis1: np.ndarray, axis2: np.ndarray,
                   cp: np.ndarray, p: np.ndarray,
                   margin_cp: np.ndarray, margin_p: np.ndarray):
    """Write scan results (arrays indexed [axis1, axis2]) axis1-major."""
    fh.write("axis1,axis2,cp,p,margin_cp,margin_p\n")
    f = format_float
    for i in range(axis1.size):
        a1 = f(axis1[i])
        for j in range(axis2.size):
            fh.write(f"{a1},{f(axis2[j])},{int(cp[i, j])},{int(p[i, j])},"
                     f"{f(margin_cp[i, j])},{f(margin_p[i, j])}\n")


def sweep_report_obj(report: SweepReport) -> dict:
    """Serialize a sweep report for JSON output."""
    samples = []
    for t, v in zip(report.times, report.verdicts):
        samples.append({
            "t": float(t),
            "cp": v.locally_cp,
            "p": v.locally_p,
            "margin_cp": v.cp_margin,
            "margin_p": v.p_margin,
            "marginal_cp": v.cp_marginal,
            "marginal_p": v.p_marginal,
        })
    return {"summary": report.summary,
            "cp_crossings": [float(t) for t in report.cp_crossings],
            "p_crossings": [float(t) for t in report.p_crossings],
            "samples": samples}


def _sample_verdict(v) -> str:
    if v.locally_cp:
        return "CP"
    if v.locally_p:
        return "P-not-CP"
    return "neither"


def write_sweep_csv(fh: IO[str], report: SweepReport):
    fh.write("t,min_eig_D,min_p,verdict\n")
    f = format_float
    for t, v in zip(report.times, report.verdicts):
        min_p = "" if v.p_margin is None else f(v.p_margin)
        fh.write(f"{f(t)},{f(v.cp_margin)},{min_p},{_sample_verdict(v)}\n")

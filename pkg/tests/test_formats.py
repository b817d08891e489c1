"""Interchange formats: generator/trace JSON, scan specs, CSV writers."""

import io
import json

import numpy as np
import pytest

from divq import (
    BlochAffineGenerator,
    ChoiGeneratorQubit,
    MasterEquationForm,
    PauliParams,
    sweep,
)
from divq.divisibility import DivisibilityVerdict
from divq.formats import (
    FormatError,
    format_float,
    generator_to_obj,
    load_generator,
    load_json,
    parse_generator,
    parse_trace,
    save_json,
    sweep_report_obj,
    trace_to_obj,
    write_scan_csv,
    write_sweep_csv,
)
from divq.presets import semigroup_trace
from divq.process import SweepReport
from divq.scan import parse_scan_spec


# ---------------------------------------------------------------------------
# generator-v1

def roundtrip(g):
    return parse_generator(json.loads(json.dumps(generator_to_obj(g))))


def test_choi_roundtrip(rng):
    from tests.conftest import random_choi_params
    for _ in range(20):
        g = random_choi_params(rng)
        back = roundtrip(g)
        assert isinstance(back, ChoiGeneratorQubit)
        assert back.q1 == g.q1 and back.q2 == g.q2
        for field in ("y1", "y2", "x", "z1", "z2"):
            assert getattr(back, field) == getattr(g, field)


def test_master_roundtrip(rng):
    h = np.array([[0.5, 0.25 - 0.5j], [0.25 + 0.5j, -0.5]])
    d = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    d = (d + d.conj().T) / 2
    g = MasterEquationForm(h, d)
    back = roundtrip(g)
    assert isinstance(back, MasterEquationForm)
    assert np.array_equal(back.h, g.h)
    assert np.array_equal(back.d, g.d)


def test_master_roundtrip_qutrit(rng):
    h = np.diag([1.0, 0.0, -1.0]).astype(complex)
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    g = MasterEquationForm(h, (b + b.conj().T) / 2)
    back = roundtrip(g)
    assert back.d.shape == (8, 8)
    assert np.array_equal(back.d, g.d)


def test_bloch_roundtrip(rng):
    g = BlochAffineGenerator(rng.normal(size=(3, 3)), rng.normal(size=3))
    back = roundtrip(g)
    assert isinstance(back, BlochAffineGenerator)
    assert np.array_equal(back.r, g.r)
    assert np.array_equal(back.t, g.t)


def test_pauli_roundtrip():
    g = PauliParams(np.array([0.3, 0.5, 0.7]), np.array([0.1, -0.2, 0.4]))
    back = roundtrip(g)
    assert isinstance(back, PauliParams)
    assert np.array_equal(back.gamma, g.gamma)
    assert np.array_equal(back.tau, g.tau)


def test_plain_numbers_read_as_real_complex():
    obj = {"format": "generator-v1", "form": "choi",
           "q1": 1.0, "q2": 2, "y1": 0.5, "y2": [0.0, 1.0],
           "x": [1.5, -2.5], "z1": 0, "z2": 3.25}
    g = parse_generator(obj)
    assert g.y1 == 0.5 + 0.0j
    assert g.y2 == 1.0j
    assert g.x == 1.5 - 2.5j
    assert g.z2 == 3.25 + 0.0j


def test_unknown_field_rejected_by_name():
    obj = generator_to_obj(PauliParams(np.ones(3), np.zeros(3)))
    obj["bogus"] = 1.0
    with pytest.raises(FormatError, match="bogus"):
        parse_generator(obj)


def test_missing_field_rejected_by_name():
    obj = generator_to_obj(PauliParams(np.ones(3), np.zeros(3)))
    del obj["tau"]
    with pytest.raises(FormatError, match="tau"):
        parse_generator(obj)


def test_bad_format_and_form():
    with pytest.raises(FormatError, match="generator-v1"):
        parse_generator({"format": "generator-v2", "form": "pauli"})
    with pytest.raises(FormatError, match="form"):
        parse_generator({"format": "generator-v1", "form": "kraus"})
    with pytest.raises(FormatError, match="object"):
        parse_generator([1, 2, 3])


def test_bad_payload_shapes():
    with pytest.raises(FormatError, match="'r'"):
        parse_generator({"format": "generator-v1", "form": "bloch",
                         "r": [[1, 0], [0, 1]], "t": [0, 0, 0]})
    with pytest.raises(FormatError, match="'t'"):
        parse_generator({"format": "generator-v1", "form": "bloch",
                         "r": np.eye(3).tolist(), "t": [0, 0]})
    with pytest.raises(FormatError, match="gamma"):
        parse_generator({"format": "generator-v1", "form": "pauli",
                         "gamma": [0.1, "x", 0.3], "tau": [0, 0, 0]})


# ---------------------------------------------------------------------------
# trace-v1

def test_trace_roundtrip_exact():
    trace = semigroup_trace(t_max=0.5, samples=5)
    back = parse_trace(json.loads(json.dumps(trace_to_obj(trace))))
    assert np.array_equal(back.times, trace.times)
    assert np.array_equal(back.maps, trace.maps)


def test_trace_rejects_mixed_shapes():
    eye2 = np.eye(2).tolist()
    eye4 = [[[1.0, 0.0] if i == j else [0.0, 0.0] for j in range(4)]
            for i in range(4)]
    with pytest.raises(FormatError, match="shape"):
        parse_trace({"format": "trace-v1", "times": [0.0, 0.1, 0.2],
                     "maps": [eye4, eye2, eye4]})


def test_trace_rejects_wrong_format_and_extras():
    trace = semigroup_trace(t_max=0.5, samples=3)
    obj = trace_to_obj(trace)
    obj["format"] = "trace-v2"
    with pytest.raises(FormatError, match="trace-v1"):
        parse_trace(obj)
    obj = trace_to_obj(trace)
    obj["note"] = "hello"
    with pytest.raises(FormatError, match="note"):
        parse_trace(obj)


# ---------------------------------------------------------------------------
# file IO helpers

def test_load_json_reports_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(FormatError, match="broken.json"):
        load_json(str(path))


def test_load_json_reports_missing_file(tmp_path):
    with pytest.raises(FormatError, match="cannot read"):
        load_json(str(tmp_path / "absent.json"))


def test_save_and_load_generator(tmp_path):
    path = tmp_path / "gen.json"
    g = ChoiGeneratorQubit(q1=1.0, q2=2.0, y1=0.5j, y2=0.0, x=1.0,
                           z1=0.25, z2=-0.25j)
    save_json(str(path), generator_to_obj(g))
    assert path.read_text().endswith("\n")
    back = load_generator(str(path))
    assert back.z2 == -0.25j


# ---------------------------------------------------------------------------
# CSV writers

def test_format_float_is_shortest_12_significant():
    assert format_float(0.5) == "0.5"
    assert format_float(2.0) == "2"
    assert format_float(1.0 / 3.0) == "0.333333333333"
    assert format_float(1e-13) == "1e-13"
    assert format_float(-1.25) == "-1.25"


def test_write_scan_csv_golden():
    axis1 = np.array([0.0, 1.0])
    axis2 = np.array([0.5, 2.0])
    cp = np.array([[True, False], [False, True]])
    p = np.array([[True, True], [False, True]])
    margin_cp = np.array([[0.25, -0.5], [-1.0, 1.0 / 3.0]])
    margin_p = np.array([[0.5, 0.125], [-2.0, 1.5]])
    buf = io.StringIO()
    write_scan_csv(buf, axis1, axis2, cp, p, margin_cp, margin_p)
    assert buf.getvalue() == (
        "axis1,axis2,cp,p,margin_cp,margin_p\n"
        "0,0.5,1,1,0.25,0.5\n"
        "0,2,0,1,-0.5,0.125\n"
        "1,0.5,0,0,-1,-2\n"
        "1,2,1,1,0.333333333333,1.5\n")


def verdict(cp, p, cp_margin, p_margin):
    return DivisibilityVerdict(
        locally_cp=cp, locally_p=p, cp_witness=None, p_witness=None,
        cp_margin=cp_margin, p_margin=p_margin,
        cp_marginal=False, p_marginal=None if p is None else False)


def test_write_sweep_csv_golden():
    report = SweepReport(
        times=np.array([0.0, 0.5, 1.0]),
        verdicts=[verdict(True, True, 0.25, 0.5),
                  verdict(False, True, -0.125, 0.5),
                  verdict(False, False, -0.25, -1.0)],
        summary="neither", cp_crossings=[0.25], p_crossings=[0.75])
    buf = io.StringIO()
    write_sweep_csv(buf, report)
    assert buf.getvalue() == (
        "t,min_eig_D,min_p,verdict\n"
        "0,0.25,0.5,CP\n"
        "0.5,-0.125,0.5,P-not-CP\n"
        "1,-0.25,-1,neither\n")


def test_write_sweep_csv_blank_p_beyond_qubits():
    report = SweepReport(
        times=np.array([0.0]),
        verdicts=[verdict(True, None, 0.5, None)],
        summary="CP-divisible", cp_crossings=[], p_crossings=[])
    buf = io.StringIO()
    write_sweep_csv(buf, report)
    assert buf.getvalue().splitlines()[1] == "0,0.5,,CP"


def test_sweep_report_obj_shape():
    report = sweep(semigroup_trace(samples=5))
    obj = json.loads(json.dumps(sweep_report_obj(report)))
    assert obj["summary"] == "CP-divisible"
    assert obj["cp_crossings"] == []
    assert len(obj["samples"]) == 5
    sample = obj["samples"][0]
    assert set(sample) == {"t", "cp", "p", "margin_cp", "margin_p",
                           "marginal_cp", "marginal_p"}
    assert sample["cp"] is True


# ---------------------------------------------------------------------------
# scan-v1 specifications

def scan_obj(**overrides):
    obj = {"format": "scan-v1",
           "class": "x",
           "fixed": {"D11": 0.0, "absD23": 1.0},
           "axes": [{"name": "D22", "min": 0.0, "max": 3.0, "steps": 5},
                    {"name": "D33", "min": 0.0, "max": 3.0, "steps": 4}],
           "output": "scan.csv"}
    obj.update(overrides)
    return obj


def test_parse_scan_spec_golden():
    spec = parse_scan_spec(scan_obj())
    assert spec.scan_class == "x"
    assert spec.fixed == {"D11": 0.0, "absD23": 1.0}
    assert spec.axes[0].name == "D22"
    assert spec.axes[1].steps == 4
    assert np.array_equal(spec.axes[0].values(), np.linspace(0.0, 3.0, 5))
    assert spec.output == "scan.csv"


def test_scan_spec_rejections():
    cases = [
        (scan_obj(**{"class": "circle"}), "class"),
        (scan_obj(axes=[{"name": "Q", "min": 0, "max": 1, "steps": 5},
                        {"name": "D33", "min": 0, "max": 1, "steps": 5}]),
         "'Q'"),
        (scan_obj(axes=[{"name": "D22", "min": 0, "max": 1, "steps": 5},
                        {"name": "D22", "min": 0, "max": 1, "steps": 5}]),
         "distinct"),
        (scan_obj(axes=[{"name": "D22", "min": 0, "max": 1, "steps": 1},
                        {"name": "D33", "min": 0, "max": 1, "steps": 5}]),
         "steps"),
        (scan_obj(axes=[{"name": "D22", "min": 1, "max": 1, "steps": 5},
                        {"name": "D33", "min": 0, "max": 1, "steps": 5}]),
         "min < max"),
        (scan_obj(axes=[{"name": "absD23", "min": -1, "max": 1, "steps": 5},
                        {"name": "D33", "min": 0, "max": 1, "steps": 5}],
                  fixed={"D11": 0.0, "D22": 1.0}), "negative"),
        (scan_obj(fixed={"D11": 0.0, "absD23": -1.0}), "negative"),
        (scan_obj(fixed={"D11": 0.0}), "absD23"),
        (scan_obj(fixed={"D11": 0.0, "absD23": 1.0, "gamma1": 2.0}),
         "gamma1"),
        (scan_obj(fixed={"D11": 0.0, "absD23": 1.0, "D22": 2.0}),
         "is an axis"),
        (scan_obj(output=""), "output"),
        (scan_obj(format="scan-v2"), "scan-v1"),
    ]
    for obj, needle in cases:
        with pytest.raises(FormatError, match=needle):
            parse_scan_spec(obj)


def test_scan_spec_unknown_top_level_field():
    with pytest.raises(FormatError, match="extra"):
        parse_scan_spec(scan_obj(extra=1))

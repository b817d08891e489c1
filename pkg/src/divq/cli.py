"""Command-line front end.

    divq check GENERATOR.json        classify a single generator
    divq convert GENERATOR.json --to {choi,master,bloch,pauli}
    divq scan SPEC.json              region scan over a family, CSV + PNG
    divq sweep TRACE.json            classify a sampled process over time
    divq preset NAME                 emit a built-in trace (trace-v1 JSON)

Exit codes encode the verdict so scripts can branch without parsing
output: 0 completely positive / CP-divisible, 10 positive but not
completely positive, 20 neither, 2 invalid input, 3 generator not in the
Pauli class, 4 process numerically singular at some sample.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from divq.divisibility import DivisibilityVerdict, MinimizerOptions, classify, local_cp
from divq.families import (
    NotPauliClassError,
    PauliParams,
    master_to_pauli,
    pauli_to_master,
)
from divq.figures import figure_path, render_region_png, render_sweep_png
from divq.formats import (
    FormatError,
    format_float,
    generator_to_obj,
    load_generator,
    load_json,
    load_trace,
    save_json,
    sweep_report_obj,
    trace_to_obj,
    write_scan_csv,
    write_sweep_csv,
)
from divq.presets import PRESET_NAMES, make_preset
from divq.process import SingularProcessError, sweep
from divq.representations import (
    BlochAffineGenerator,
    ChoiGeneratorQubit,
    MasterEquationForm,
    bloch_to_choi,
    choi_to_bloch,
    choi_to_master,
    master_to_choi,
)
from divq.scan import SCAN_MINIMIZER, parse_scan_spec, run_scan

__all__ = ["main"]

EXIT_CP = 0
EXIT_P_NOT_CP = 10
EXIT_NEITHER = 20
EXIT_INPUT = 2
EXIT_NOT_PAULI = 3
EXIT_SINGULAR = 4

_EPILOG = """\
exit codes:
  0   completely positive (check) / CP-divisible (sweep)
  10  positive but not completely positive / P-divisible-not-CP
  20  neither (or, beyond qubits, not CP-divisible)
  2   invalid input (malformed file, inconsistent spec, bad value)
  3   convert --to pauli on a generator outside the Pauli class
  4   process map numerically singular at a sample time
"""


def _add_minimizer_flags(sp: argparse.ArgumentParser):
    sp.add_argument("--tol", type=float, default=1e-9,
                    help="acceptance tolerance on margins (default 1e-9)")
    sp.add_argument("--grid", type=int, default=None,
                    help="coarse grid resolution for torus/sphere minimization")
    sp.add_argument("--refine", type=int, default=None,
                    help="number of refinement starts for the minimizer")


def _minimizer(args, base: MinimizerOptions) -> MinimizerOptions:
    return MinimizerOptions(
        grid=args.grid if args.grid is not None else base.grid,
        starts=args.refine if args.refine is not None else base.starts,
        tol=args.tol,
        ftol=base.ftol)


def _to_master(g) -> MasterEquationForm:
    if isinstance(g, MasterEquationForm):
        return g
    if isinstance(g, ChoiGeneratorQubit):
        return choi_to_master(g)
    if isinstance(g, BlochAffineGenerator):
        return choi_to_master(bloch_to_choi(g))
    if isinstance(g, PauliParams):
        return pauli_to_master(g)
    raise TypeError(f"unexpected generator type {type(g).__name__}")


def _as_choi(g) -> ChoiGeneratorQubit:
    if isinstance(g, ChoiGeneratorQubit):
        return g
    if isinstance(g, BlochAffineGenerator):
        return bloch_to_choi(g)
    return master_to_choi(_to_master(g))


def _convert(g, target: str):
    if target == "master":
        return _to_master(g)
    if target == "choi":
        return _as_choi(g)
    if target == "bloch":
        return choi_to_bloch(_as_choi(g))
    if isinstance(g, PauliParams):
        return g
    return master_to_pauli(_to_master(g))


def _verdict_obj(v: DivisibilityVerdict) -> dict:
    obj = {
        "cp": v.locally_cp,
        "p": v.locally_p,
        "margin_cp": v.cp_margin,
        "margin_p": v.p_margin,
        "marginal_cp": v.cp_marginal,
        "marginal_p": v.p_marginal,
        "cp_witness": None,
        "p_witness": None,
    }
    if v.cp_witness is not None:
        obj["cp_witness"] = {"minor_indices": list(v.cp_witness.indices),
                             "minor_value": v.cp_witness.value}
    if v.p_witness is not None:
        point, value = v.p_witness
        obj["p_witness"] = {"theta": point.theta, "beta": point.beta,
                            "value": value}
    return obj


def _verdict_exit(cp, p) -> int:
    if cp:
        return EXIT_CP
    if p:
        return EXIT_P_NOT_CP
    return EXIT_NEITHER


def cmd_check(args) -> int:
    m = _to_master(load_generator(args.input))
    if m.dim == 2:
        verdict = classify(m, _minimizer(args, MinimizerOptions()))
    else:
        is_cp, witness = local_cp(m, tol=args.tol)
        margin = float(np.linalg.eigvalsh(m.d)[0])
        verdict = DivisibilityVerdict(
            locally_cp=is_cp, locally_p=None,
            cp_witness=None if is_cp else witness, p_witness=None,
            cp_margin=margin, p_margin=None,
            cp_marginal=abs(margin) <= args.tol, p_marginal=None)
    if args.format == "csv":
        p_str = "" if verdict.locally_p is None else int(verdict.locally_p)
        mp_str = ("" if verdict.p_margin is None
                  else format_float(verdict.p_margin))
        print("cp,p,margin_cp,margin_p")
        print(f"{int(verdict.locally_cp)},{p_str},"
              f"{format_float(verdict.cp_margin)},{mp_str}")
    else:
        print(json.dumps(_verdict_obj(verdict), indent=2))
    return _verdict_exit(verdict.locally_cp, verdict.locally_p)


def cmd_convert(args) -> int:
    converted = _convert(load_generator(args.input), args.to)
    obj = generator_to_obj(converted)
    if args.output:
        save_json(args.output, obj)
    else:
        print(json.dumps(obj, indent=2))
    return 0


def cmd_scan(args) -> int:
    spec = parse_scan_spec(load_json(args.spec))
    result = run_scan(spec, tol=args.tol,
                      minimizer=_minimizer(args, SCAN_MINIMIZER),
                      threads=max(1, args.threads))
    out = args.output or spec.output
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        write_scan_csv(fh, result.axis1, result.axis2, result.cp, result.p,
                       result.margin_cp, result.margin_p)
    png = figure_path(out)
    render_region_png(png, result)
    cells = result.cp.size
    print(f"wrote {out} and {png} "
          f"({cells} cells, {int(result.cp.sum())} CP, "
          f"{int(result.p.sum())} P)")
    return 0


def cmd_sweep(args) -> int:
    report = sweep(load_trace(args.trace),
                   _minimizer(args, MinimizerOptions()))
    if args.output:
        if args.format == "csv":
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                write_sweep_csv(fh, report)
            png = figure_path(args.output)
            render_sweep_png(png, report)
            print(f"wrote {args.output} and {png}; summary: {report.summary}")
        else:
            save_json(args.output, sweep_report_obj(report))
            print(f"wrote {args.output}; summary: {report.summary}")
    elif args.format == "csv":
        write_sweep_csv(sys.stdout, report)
    else:
        print(json.dumps(sweep_report_obj(report), indent=2))
    if report.summary == "CP-divisible":
        return EXIT_CP
    if report.summary == "P-divisible-not-CP":
        return EXIT_P_NOT_CP
    return EXIT_NEITHER


def cmd_preset(args) -> int:
    trace = make_preset(args.name, t_max=args.t_max, samples=args.samples)
    obj = trace_to_obj(trace)
    if args.output:
        save_json(args.output, obj)
        print(f"wrote {args.output} ({len(trace)} samples)")
    else:
        print(json.dumps(obj))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divq",
        description="CP- and P-divisibility tests for qubit process generators",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    sp = sub.add_parser("check", help="classify a single generator",
                        epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("input", help="generator-v1 JSON file")
    _add_minimizer_flags(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("convert", help="convert between generator forms")
    sp.add_argument("input", help="generator-v1 JSON file")
    sp.add_argument("--to", required=True,
                    choices=("choi", "master", "bloch", "pauli"))
    sp.add_argument("-o", "--output", default=None,
                    help="write to this file instead of stdout")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("scan", help="region scan over a generator family")
    sp.add_argument("spec", help="scan-v1 JSON file")
    _add_minimizer_flags(sp)
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads for sphere-minimization scans")
    sp.add_argument("-o", "--output", default=None,
                    help="override the CSV output path from the spec")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("sweep", help="classify a sampled process over time",
                        epilog=_EPILOG,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("trace", help="trace-v1 JSON file")
    _add_minimizer_flags(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("-o", "--output", default=None,
                    help="write the report here instead of stdout")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("preset", help="emit a built-in process trace")
    sp.add_argument("name", choices=PRESET_NAMES)
    sp.add_argument("--t-max", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("-o", "--output", default=None,
                    help="write trace-v1 JSON to this file")
    sp.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotPauliClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_PAULI
    except SingularProcessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end.

Exit codes: 0 command completed (analysis findings such as "not
diagonalisable" are results, not errors), 2 parse error, 3 dimension
error, 4 precondition failure, 5 numeric failure.  Reports are printed to
stdout as deterministic JSON; set the GRADFLOW_LOG environment variable
(debug/info/warning) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings as _warnings

import numpy as np

from . import geometry, markov
from .errors import (
    AsymmetryDefectError,
    ColumnSumError,
    DegenerateKernelError,
    FlowMismatchError,
    FlowOverflowError,
    GradFlowError,
    IllConditionedError,
    NegativeRateError,
    NonFiniteStateError,
    NonPositiveKernelError,
    NotCriticalError,
    NotDiagonalisableError,
    NotReversibleError,
    SingularStepError,
)
from .flow import (
    Integrator,
    exact_trajectory,
    dissipation_audit,
    minimizing_movement_flow,
    rk4_flow,
)
from .serialize import (
    InputDimensionError,
    InputFormatError,
    build_report,
    file_digest,
    load_generator_document,
    load_matrix_document,
    load_system_document,
    render_json,
    save_system_document,
    system_document,
    write_trajectory_csv,
)
from .spectral import DEFAULT_TOL, inspect_spectrum, is_spd, real_diagonalise
from .synthesis import synthesize_canonical, verify_flow_identity

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_PRECONDITION = 4
EXIT_NUMERIC = 5

log = logging.getLogger("gradflow")

_PRECONDITION_ERRORS = (NotDiagonalisableError, NotReversibleError,
                        NegativeRateError, ColumnSumError, FlowMismatchError,
                        NotCriticalError)
_NUMERIC_ERRORS = (FlowOverflowError, SingularStepError, NonFiniteStateError,
                   DegenerateKernelError, NonPositiveKernelError,
                   IllConditionedError, AsymmetryDefectError, GradFlowError,
                   np.linalg.LinAlgError)


def _complex_list(values) -> list[dict]:
    return [{"real": float(v.real), "imag": float(v.imag)} for v in values]


def _parse_state(text: str, dim: int) -> np.ndarray:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise InputFormatError(f"bad state vector {text!r}: {exc}") from exc
    if len(values) != dim:
        raise InputDimensionError(
            f"state vector has {len(values)} entries, system has dimension {dim}")
    return np.array(values)


def cmd_analyze(args) -> dict:
    matrix = load_matrix_document(args.input)
    report = inspect_spectrum(matrix, args.tol)
    results = {
        "eigenvalues": _complex_list(report.eigenvalues),
        "real_diagonalisable": report.real_diagonalisable,
        "failure_kind": report.failure_kind.value,
        "condition": report.condition,
    }
    return build_report("analyze", file_digest(args.input),
                        {"tol": args.tol}, results)


def cmd_synthesize(args) -> dict:
    matrix = load_matrix_document(args.input)
    diag = real_diagonalise(matrix, args.tol)
    gs = synthesize_canonical(diag, args.tol)
    constants = geometry.convexity_constants(diag)
    residual = verify_flow_identity(matrix, gs).max_residual
    save_system_document(args.out, system_document(matrix, diag, gs))
    results = {
        "out": args.out,
        "flow_residual": residual,
        "spd": is_spd(gs.onsager, args.tol),
        "sup_eigenvalue": constants.sup_eigenvalue,
        "flat_lambda": constants.flat_lambda,
        "geodesic_lambda": constants.geodesic_lambda,
        "flat_factor": constants.flat_factor,
        "geodesic_factor": constants.geodesic_factor,
    }
    return build_report("synthesize", file_digest(args.input),
                        {"tol": args.tol}, results)


def cmd_verify(args) -> dict:
    matrix, _, gs = load_system_document(args.input)
    residual = verify_flow_identity(matrix, gs).max_residual
    results = {"max_residual": residual, "passed": bool(residual <= args.tol)}
    return build_report("verify", file_digest(args.input),
                        {"tol": args.tol}, results)


def cmd_convexity(args) -> dict:
    _, diag, gs = load_system_document(args.input)
    ctx = geometry.MetricContext.from_diagonalisation(diag)
    constants = geometry.convexity_constants(diag)
    mono = geometry.check_strong_monotonicity(
        gs, constants.flat_lambda, samples=args.samples, seed=args.seed)
    geo = geometry.check_geodesic_convexity(
        gs, ctx, constants.geodesic_lambda, samples=args.samples, seed=args.seed)
    contraction = geometry.check_contraction(
        diag, ctx, constants.geodesic_lambda, pairs=args.samples, seed=args.seed)
    results = {
        "sup_eigenvalue": constants.sup_eigenvalue,
        "flat_lambda": constants.flat_lambda,
        "geodesic_lambda": constants.geodesic_lambda,
        "flat_factor": constants.flat_factor,
        "geodesic_factor": constants.geodesic_factor,
        "monotonicity_violation": mono,
        "geodesic_violation": geo,
        "contraction_violation": contraction,
        "spectrum_nonpositive": geometry.essential_range_check(diag),
    }
    return build_report("convexity", file_digest(args.input),
                        {"tol": args.tol, "samples": args.samples,
                         "seed": args.seed}, results)


def _simulate_one(args, matrix, diag, gs, ctx, x0):
    method = Integrator(args.method)
    if method is Integrator.EXACT:
        if args.step is not None:
            nodes = int(round(args.t_end / args.step)) + 1
        else:
            nodes = args.nodes
        return exact_trajectory(diag, x0, args.t_end, nodes)
    if args.step is None:
        raise InputFormatError(f"--step is required for method {args.method!r}")
    if method is Integrator.RK4:
        return rk4_flow(matrix, x0, args.t_end, args.step)
    return minimizing_movement_flow(gs, ctx, x0, args.t_end, args.step)


def cmd_simulate(args) -> dict:
    matrix, diag, gs = load_system_document(args.input)
    ctx = geometry.MetricContext.from_diagonalisation(diag)
    states = [_parse_state(text, gs.dim) for text in args.x0]
    if len(states) > 2:
        raise InputFormatError("at most two --x0 vectors are supported")

    caught: list[str] = []
    with _warnings.catch_warnings(record=True) as collected:
        _warnings.simplefilter("always")
        trajectory = _simulate_one(args, matrix, diag, gs, ctx, states[0])
        companion = None
        if len(states) == 2:
            companion = _simulate_one(args, matrix, diag, gs, ctx, states[1])
        caught = [str(w.message) for w in collected]

    write_trajectory_csv(args.out, trajectory)
    audit = dissipation_audit(gs, trajectory)
    results = {
        "out": args.out,
        "method": trajectory.method.value,
        "nodes": int(trajectory.times.size),
        "t_end": args.t_end,
        "final_state": trajectory.states[-1],
        "energy_initial": float(audit.energies[0]),
        "energy_final": float(audit.energies[-1]),
        "energy_monotone": audit.monotone,
        "dissipation_defect": audit.dissipation_defect,
        "contraction_defect": None,
    }
    if companion is not None:
        lam = geometry.convexity_constants(diag).geodesic_lambda
        d0 = geometry.metric_distance(ctx, trajectory.states[0], companion.states[0])
        gaps = np.linalg.norm(
            (companion.states - trajectory.states) @ ctx.transform.T, axis=1)
        with np.errstate(over="ignore"):
            bounds = np.exp(-lam * trajectory.times) * d0
        results["contraction_defect"] = float(max(0.0, np.max(gaps - bounds)))
    options = {"method": args.method, "t_end": args.t_end,
               "step": args.step, "nodes": args.nodes}
    return build_report("simulate", file_digest(args.input), options,
                        results, caught)


def cmd_markov(args) -> dict:
    matrix = load_generator_document(args.input)
    options = {"subcommand": args.subcommand, "tol": args.tol,
               "samples": args.samples, "seed": args.seed}
    digest = file_digest(args.input)

    if args.subcommand == "validate":
        try:
            markov.validate_generator(matrix, args.tol)
            results = {"subcommand": "validate", "valid": True, "failure": None}
        except (NegativeRateError, ColumnSumError) as exc:
            results = {"subcommand": "validate", "valid": False,
                       "failure": type(exc).__name__, "detail": str(exc)}
        return build_report("markov", digest, options, results)

    gen = markov.validate_generator(matrix, args.tol)
    if args.subcommand == "stationary":
        pi = markov.stationary_distribution(gen, args.tol)
        results = {"subcommand": "stationary", "distribution": pi}
    elif args.subcommand == "reversible":
        pi = markov.stationary_distribution(gen, args.tol)
        results = {"subcommand": "reversible",
                   "reversible": markov.is_reversible(gen, pi, args.tol),
                   "distribution": pi}
    else:  # entropic-verify
        structure = markov.EntropicStructure.from_generator(gen, args.tol)
        report = markov.verify_entropic_flow(gen, structure,
                                             samples=args.samples,
                                             seed=args.seed, tol=args.tol)
        results = {"subcommand": "entropic-verify",
                   "max_residual": report.max_residual,
                   "num_samples": report.num_samples,
                   "passed": bool(report.max_residual <= 1e-9)}
    return build_report("markov", digest, options, results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradflow",
        description="Decide whether dx/dt = A x is a gradient flow, "
                    "synthesize the gradient system, and certify its geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="relative tolerance (default 1e-9)")
        if seed:
            p.add_argument("--samples", type=int, default=1000,
                           help="number of sampled checks (default 1000)")
            p.add_argument("--seed", type=int, default=0,
                           help="sampling seed, echoed in the report (default 0)")

    p = sub.add_parser("analyze", help="is the matrix real diagonalisable?")
    p.add_argument("input", help="matrix JSON file")
    common(p)
    p.add_argument("--out", help="also write the report to this file")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("synthesize",
                       help="construct the gradient system of a diagonalisable matrix")
    p.add_argument("input", help="matrix JSON file")
    common(p)
    p.add_argument("--out", required=True, help="system JSON file to write")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("verify", help="check a system file's flow identity")
    p.add_argument("input", help="system JSON file")
    common(p)
    p.add_argument("--out", help="also write the report to this file")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("convexity",
                       help="convexity moduli and sampled inequality certificates")
    p.add_argument("input", help="system JSON file")
    common(p, seed=True)
    p.add_argument("--out", help="also write the report to this file")
    p.set_defaults(handler=cmd_convexity)

    p = sub.add_parser("simulate", help="integrate the flow and audit dissipation")
    p.add_argument("input", help="system JSON file")
    common(p)
    p.add_argument("--x0", action="append", required=True,
                   help="comma-separated initial state; repeat for a pair")
    p.add_argument("--t-end", type=float, required=True, dest="t_end")
    p.add_argument("--method", choices=[m.value for m in Integrator],
                   default="exact")
    p.add_argument("--step", type=float,
                   help="step size (required for rk4 and mm)")
    p.add_argument("--nodes", type=int, default=200,
                   help="exact-method sample count (default 200)")
    p.add_argument("--out", required=True, help="trajectory CSV to write")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("markov", help="generator validation and entropic checks")
    p.add_argument("input", help="generator JSON file (transposed convention)")
    p.add_argument("subcommand", choices=["validate", "stationary",
                                          "reversible", "entropic-verify"])
    common(p, seed=True)
    p.add_argument("--out", help="also write the report to this file")
    p.set_defaults(handler=cmd_markov)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("GRADFLOW_LOG", "").upper()
    level = getattr(logging, level_name, None)
    if isinstance(level, int):
        logging.basicConfig(level=level, stream=sys.stderr,
                            format="%(name)s %(levelname)s %(message)s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    log.debug("command %s", args.command)
    try:
        report = args.handler(args)
    except InputFormatError as exc:
        print(f"gradflow: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InputDimensionError as exc:
        print(f"gradflow: dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except _PRECONDITION_ERRORS as exc:
        print(f"gradflow: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except _NUMERIC_ERRORS as exc:
        print(f"gradflow: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = render_json(report)
    print(text)
    out_report = getattr(args, "out", None)
    if out_report and args.command not in ("synthesize", "simulate"):
        with open(out_report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

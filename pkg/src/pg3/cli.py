"""Command line interface.

stdout carries data only (JSON, or CSV for traces); diagnostics go to
stderr. Exit codes:

    0  success
    1  other library error (precondition not met, search exhausted)
    2  malformed input or arguments
    3  singular matrix
    4  ill-conditioned Jordan structure
    5  no witness found
    6  verdict Possible, nothing to falsify
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dynamics, lemmas
from .clifford import Chirality, class_invariant, clifford_parallel, invariant_distance
from .collineation import as_collineation, automorphism_verdict
from .config import CONVERGENCE_WINDOW, DEFAULT_NMAX, RunConfig
from .errors import (
    IllConditioned,
    PG3Error,
    SingularMatrix,
    WitnessSearchFailed,
)
from .geometry import line_from_json, meet_residual, point_from_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_ILL = 4
EXIT_NO_WITNESS = 5
EXIT_POSSIBLE = 6


class InputError(Exception):
    pass


def dumps(obj) -> str:
    """Serialization shared by every command."""
    return json.dumps(obj, indent=2, sort_keys=False)


# input ----------------------------------------------------------------------

def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        with open(source) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from None


def _parse_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc})") from None


def _json_arg(value: str, what: str):
    """Inline JSON, or ``@path`` to read it from a file."""
    text = _read_text(value[1:]) if value.startswith("@") else value
    return _parse_json(text, what)


def load_matrix(source: str) -> np.ndarray:
    """4x4 real matrix from a JSON file: a nested list or ``{"matrix": [...]}``."""
    data = _parse_json(_read_text(source), source)
    if isinstance(data, dict):
        data = data.get("matrix")
    try:
        M = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{source}: matrix entries must be real numbers") from None
    if M.shape != (4, 4) or not np.all(np.isfinite(M)):
        raise InputError(f"{source}: expected a finite 4x4 matrix")
    return M


def _point(value: str):
    try:
        return point_from_json(_json_arg(value, "point"))
    except (PG3Error, TypeError, ValueError) as exc:
        raise InputError(f"point: {exc}") from None


def _line(value: str):
    data = _json_arg(value, "line")
    if isinstance(data, list):
        data = {"span_points": data}
    try:
        return line_from_json(data)
    except (PG3Error, TypeError, ValueError) as exc:
        raise InputError(f"line: {exc}") from None


# commands ---------------------------------------------------------------------

def _classify_one(path: str, cfg: RunConfig):
    try:
        g = as_collineation(load_matrix(path))
        return EXIT_OK, automorphism_verdict(g).to_json()
    except InputError as exc:
        return EXIT_PARSE, {"error": str(exc)}
    except SingularMatrix as exc:
        return EXIT_SINGULAR, {"error": f"singular matrix: {exc}"}
    except IllConditioned as exc:
        return EXIT_ILL, {"error": str(exc), "candidates": list(exc.candidates or [])}


def falsify_report(M: np.ndarray, cfg: RunConfig, side) -> tuple:
    """(exit code, report, trace CSV or None) for one matrix."""
    g = as_collineation(M)
    verdict = automorphism_verdict(g)
    if not verdict.excluded:
        defect = dynamics.invariance_defect(g, side, 100, cfg.seed)
        return EXIT_POSSIBLE, {
            "automorphism": "Possible",
            "verdict": verdict.to_json(),
            "invariance_defect": defect,
        }, None
    # parabolic schedules run far past the general default, so only an
    # explicitly configured nmax is forwarded
    extra = {} if cfg.nmax == DEFAULT_NMAX else {"nmax": cfg.nmax}
    try:
        result = dynamics.falsify_invariance(
            g, seed=cfg.seed, side=side, eps=cfg.eps, tol=cfg.tol_conv, **extra
        )
    except WitnessSearchFailed as exc:
        return EXIT_NO_WITNESS, {"error": str(exc), "diagnostics": _plain(exc.diagnostics)}, None
    report = {"verdict": verdict.to_json(), "certificate": result.to_json()}
    trace = result.combined_trace().to_csv() if isinstance(result, dynamics.Witness) else None
    return EXIT_OK, report, trace


def _falsify_one(path: str, cfg: RunConfig, side):
    try:
        return falsify_report(load_matrix(path), cfg, side)
    except InputError as exc:
        return EXIT_PARSE, {"error": str(exc)}, None
    except SingularMatrix as exc:
        return EXIT_SINGULAR, {"error": f"singular matrix: {exc}"}, None
    except IllConditioned as exc:
        return EXIT_ILL, {"error": str(exc), "candidates": list(exc.candidates or [])}, None


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _batch(func, paths, cfg, *extra):
    args = [(p, cfg, *extra) for p in paths]
    if cfg.parallel and len(paths) > 1:
        with ProcessPoolExecutor() as pool:
            return list(pool.map(func, *zip(*args)))
    return [func(*a) for a in args]


def cmd_classify(args, cfg: RunConfig) -> int:
    results = _batch(_classify_one, args.matrix, cfg)
    payload = results[0][1] if len(results) == 1 else [r[1] for r in results]
    _emit(dumps(payload), cfg)
    return max(r[0] for r in results)


def cmd_falsify(args, cfg: RunConfig) -> int:
    side = Chirality.parse(args.side)
    results = _batch(_falsify_one, args.matrix, cfg, side)
    reports = [r[1] for r in results]
    traces = [r[2] for r in results]
    if cfg.trace:
        with open(cfg.trace, "w") as fh:
            fh.write("".join(t for t in traces if t) or _EMPTY_TRACE)
    if cfg.format == "csv":
        _emit("".join(t for t in traces if t) or _EMPTY_TRACE, cfg, newline=False)
    else:
        _emit(dumps(reports[0] if len(reports) == 1 else reports), cfg)
    for code, report, _ in results:
        if code:
            print(report.get("error", "verdict Possible: nothing to falsify"), file=sys.stderr)
    return max(r[0] for r in results)


_EMPTY_TRACE = "k,n,distance_to_limit,class_defect\n"


def cmd_clifford(args, cfg: RunConfig) -> int:
    side = Chirality.parse(args.side)
    L = _line(args.line)
    if args.action == "parallel":
        out = clifford_parallel(_point(args.point), L, side).to_json()
    elif args.action == "class":
        out = {"invariant": list(class_invariant(L, side).axis), "side": side.value}
    else:
        M = _line(args.other)
        d = invariant_distance(L, M, side)
        out = {"parallel": bool(d < cfg.tol_alg), "invariant_distance": d}
    _emit(dumps(out), cfg)
    return EXIT_OK


def unit_phases(g) -> list:
    """Phases e^{i arg z} of the eigenvalues of g, one per conjugate pair."""
    ev = np.linalg.eigvals(as_collineation(g).normalized)
    phases = []
    for z in ev:
        if z.imag < -1e-12:
            continue
        u = complex(z / abs(z))
        if all(abs(u - w) > 1e-9 for w in phases):
            phases.append(u)
    return phases


def dynamics_trace(M, L, cfg: RunConfig, count: int):
    g = as_collineation(M)
    schedule = dynamics.recurrence_schedule(unit_phases(g), count, cfg.eps, cfg.nmax)
    return dynamics.line_orbit_trace(g, L, schedule, CONVERGENCE_WINDOW, cfg.tol_conv)


def cmd_dynamics(args, cfg: RunConfig) -> int:
    trace = dynamics_trace(load_matrix(args.matrix), _line(args.line), cfg, args.count)
    if cfg.format == "csv":
        _emit(trace.to_csv(), cfg, newline=False)
    else:
        _emit(dumps(trace.to_json()), cfg)
    return EXIT_OK


def cmd_lemma(args, cfg: RunConfig) -> int:
    side = Chirality.parse(args.side)
    if args.action == "avoid":
        M = _line(args.line)
        obstacles = [_line(json.dumps(o)) for o in _json_arg(args.obstacles, "obstacles")]
        N = lemmas.avoiding_parallel(M, obstacles, side, cfg.seed, args.max_tries)
        residuals = [meet_residual(N, O) for O in obstacles]
        out = {
            "line": N.to_json(),
            "min_meet_residual": min(residuals) if residuals else None,
            "clear": all(r > cfg.tol_inc for r in residuals),
        }
    elif args.action == "transversals":
        K, L = _line(args.line), _line(args.other)
        out = lemmas.common_transversal_parallels(K, L, side, args.grid, cfg.seed).to_json()
    else:
        g = load_matrix(args.matrix)
        defect = lemmas.pencil_equivariance_check(
            g, _point(args.p), _point(args.q), side, args.samples, cfg.seed
        )
        out = {"pencil_defect": defect}
    _emit(dumps(out), cfg)
    return EXIT_OK


def _emit(text: str, cfg: RunConfig, newline: bool = True):
    if newline:
        text += "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-alg", type=float, help="algebraic tolerance (parallelism checks)")
    common.add_argument("--tol-inc", type=float, help="incidence tolerance")
    common.add_argument("--tol-conv", type=float, help="limit-detection tolerance")
    common.add_argument("--seed", type=int, help="random seed (fixed default)")
    common.add_argument("--nmax", type=int, help="largest exponent scanned for schedules")
    common.add_argument("--eps", type=float, help="recurrence schedule defect")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--parallel", action="store_true", default=None,
                        help="process several inputs in worker processes")
    common.add_argument("--output", help="write stdout data to this file instead")
    common.add_argument("--trace", help="also write the trace CSV here (falsify)")
    side = argparse.ArgumentParser(add_help=False)
    side.add_argument("--side", default="left", choices=("left", "right"))

    parser = _Parser(prog="pg3", description="Collineations and Clifford parallelisms of PG(3,R).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="normal form and automorphism verdict")
    p.add_argument("matrix", nargs="+", help="JSON file with a 4x4 matrix ('-' for stdin)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("clifford", help="Clifford parallel, class invariant, parallelism check")
    csub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = csub.add_parser("parallel", parents=[common, side])
    q.add_argument("--point", required=True, help="JSON point, 4 coordinates")
    q.add_argument("--line", required=True, help="JSON line: two points or an object")
    q = csub.add_parser("class", parents=[common, side])
    q.add_argument("--line", required=True)
    q = csub.add_parser("check", parents=[common, side])
    q.add_argument("--line", required=True)
    q.add_argument("--other", required=True)
    p.set_defaults(func=cmd_clifford)

    p = sub.add_parser("dynamics", help="orbit traces")
    dsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = dsub.add_parser("trace", parents=[common])
    q.add_argument("matrix")
    q.add_argument("--line", required=True)
    q.add_argument("--count", type=int, default=10, help="schedule length")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("falsify", parents=[common, side], help="contradiction certificate")
    p.add_argument("matrix", nargs="+")
    p.set_defaults(func=cmd_falsify)

    p = sub.add_parser("lemma", help="constructive lemma tools")
    lsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = lsub.add_parser("avoid", parents=[common, side])
    q.add_argument("--line", required=True)
    q.add_argument("--obstacles", default="[]", help="JSON list of lines")
    q.add_argument("--max-tries", type=int, default=1000)
    q = lsub.add_parser("transversals", parents=[common, side])
    q.add_argument("--line", required=True)
    q.add_argument("--other", required=True)
    q.add_argument("--grid", type=int, default=64)
    q = lsub.add_parser("pencil", parents=[common, side])
    q.add_argument("matrix")
    q.add_argument("--p", required=True)
    q.add_argument("--q", required=True)
    q.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_lemma)
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig.from_env(
        tol_alg=args.tol_alg,
        tol_inc=args.tol_inc,
        tol_conv=args.tol_conv,
        seed=args.seed,
        nmax=args.nmax,
        eps=args.eps,
        format=args.format,
        parallel=args.parallel,
        output=args.output,
        trace=args.trace,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"pg3: bad configuration: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, cfg)
    except InputError as exc:
        print(f"pg3: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SingularMatrix as exc:
        print(f"pg3: singular matrix: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except IllConditioned as exc:
        print(f"pg3: {exc}", file=sys.stderr)
        return EXIT_ILL
    except WitnessSearchFailed as exc:
        print(f"pg3: {exc}", file=sys.stderr)
        return EXIT_NO_WITNESS
    except PG3Error as exc:
        print(f"pg3: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command line front-end.

    emz-spectral validate SYSTEM.json
    emz-spectral index SYSTEM.json --out report.json
    emz-spectral ordered-rep SYSTEM.json --window -10 10
    emz-spectral expand SYSTEM.json --seed 42 --truncation 5
    emz-spectral kernelop SYSTEM.json --function "exp(-lam**2)" --delta -5 5 --out k.json
    emz-spectral lagrange-check MATRIX.json

Reports are JSON (sorted keys, ``schema_version`` field) written to --out or
stdout.  ``kernelop`` also writes one CSV of kernel samples per coordinate
next to the report.  Exit codes: 0 success, 2 validation failure, 3
unsupported content, 4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import expansion, ordered_rep, quasidiff, systemio, vectorop
from .errors import (ContinuousSpectrumOnly, EMZError, EnumerationBudgetExceeded, ParseError,
                     SchemaError, SymbolicACUnsupported, UnboundedFunction, UnknownSolutionBasis,
                     UnsupportedFamily)
from .realset import RealSet

logger = logging.getLogger("emz_spectral")

EXIT_OK, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_BUDGET = 0, 2, 3, 4
UNSUPPORTED = (SymbolicACUnsupported, UnsupportedFamily, ContinuousSpectrumOnly,
               UnknownSolutionBasis, UnboundedFunction)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dump_report(report: dict) -> str:
    report = {"schema_version": systemio.SCHEMA_VERSION, **report}
    return json.dumps(_clean(json.loads(json.dumps(report, default=_json_default))),
                      sort_keys=True, indent=2) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: dict, out):
    text = dump_report(report)
    if out:
        write_atomic(out, text)
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def parse_function(expr: str, var: str = "lam"):
    """A vectorised callable from a sympy expression in ``var``."""
    import sympy

    sym = sympy.Symbol(var, real=True)
    try:
        parsed = sympy.sympify(expr, locals={var: sym})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ParseError(f"cannot parse {expr!r}: {exc}") from None
    extra = parsed.free_symbols - {sym}
    if extra:
        raise ParseError(f"{expr!r} uses unknown symbols {sorted(map(str, extra))}")
    fn = sympy.lambdify(sym, parsed, "numpy")
    return lambda t: np.asarray(fn(t), dtype=complex) * np.ones_like(t, dtype=complex)


def _load(args):
    return systemio.load_system(args.input, window=args.window, eps=args.eps_atom)


def _delta(args, system):
    if args.delta is None:
        return RealSet.full(system.window, system.eps)
    lo, hi = args.delta
    if lo >= hi:
        return RealSet.empty(system.window, system.eps)
    return RealSet.build(system.window, [(lo, hi, True, True)], eps=system.eps)


# --- commands ---------------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = systemio.load_json(args.input)
    system = systemio.system_from_dict(doc, window=args.window, eps=args.eps_atom)
    matrices = []
    for i, m in enumerate(doc.get("matrices", [])):
        systemio.validate_matrix_doc(m)
        try:
            A = quasidiff.matrix_from_dict(m)
            violations = quasidiff.validate_shin_zettl(A)
        except EMZError as exc:
            violations = [{"condition": "parse", "message": str(exc)}]
        matrices.append({"index": i, "violations": violations})
    clean = all(not m["violations"] for m in matrices)
    emit({"command": "validate", "clean": clean, "window": list(system.window),
          "operators": [op.id for op in system.operators],
          "multiplicities": system.multiplicities, "matrices": matrices}, args.out)
    return EXIT_OK if clean else EXIT_INVALID


def cmd_graph(args) -> int:
    system = _load(args)
    graph = vectorop.build_superposition_graph(system)
    emit({"command": "graph", "graph": graph.to_dict()}, args.out)
    return EXIT_OK


def cmd_index(args) -> int:
    system = _load(args)
    graph = vectorop.build_superposition_graph(system)
    part = vectorop.spectral_index(system, graph)
    plan = vectorop.cyclic_vector_plan(system, part)
    emit({"command": "index", "graph": graph.to_dict(), "partition": part.to_dict(),
          "lambda": part.lam, "cyclic_vectors": vectorop.plan_to_dict(system, plan)}, args.out)
    return EXIT_OK


def cmd_ordered_rep(args) -> int:
    system = _load(args)
    try:
        rep = ordered_rep.build_ordered_representation(system, budget=args.budget)
    except EnumerationBudgetExceeded as exc:
        partial = exc.partial or []
        emit({"command": "ordered-rep", "error": str(exc), "complete": False,
              "partial_s_n": [s.to_dict() for s in partial]}, args.out)
        return EXIT_BUDGET
    report = rep.to_dict()
    report["oracle"] = ordered_rep.oracle_agreement(system, budget=args.budget)
    emit({"command": "ordered-rep", "complete": True, **report}, args.out)
    return EXIT_OK


def _kernels(system, budget):
    rep = ordered_rep.build_ordered_representation(system, budget=budget)
    return rep, expansion.build_kernels(system, rep)


def cmd_expand(args) -> int:
    system = _load(args)
    system.require_pure_point()
    rep, kernels = _kernels(system, args.budget)
    if args.vector:
        w = vectorop.vector_from_dict(system, systemio.load_json(args.vector))
    else:
        w = vectorop.random_vector(system, np.random.default_rng(args.seed))
    coeffs = expansion.transform(system, kernels, w)
    norm2 = w.norm2()
    rebuilt = expansion.expand(system, kernels, coeffs)
    report = {"command": "expand", "seed": args.seed, "lambda": rep.lam,
              "multiplicity": rep.spectral_multiplicity,
              "kernels": [k.to_dict() for k in kernels],
              "diagnostics": expansion.kernel_diagnostics(system, kernels, rep).to_dict(),
              "coefficients": coeffs.to_dict(), "norm2": norm2,
              "parseval_residual": abs(coeffs.parseval() - norm2),
              "reconstruction_error": math.sqrt((w - rebuilt).norm2())}
    if args.truncation is not None:
        trunc = expansion.expand(system, kernels, coeffs, args.truncation)
        tail = expansion.dropped_tail(kernels, coeffs, args.truncation)
        err2 = (w - trunc).norm2()
        report["truncation"] = {"atoms_kept": args.truncation, "error2": err2,
                                "dropped_tail": tail, "identity_residual": abs(err2 - tail)}
    emit(report, args.out)
    return EXIT_OK


def _kernel_csv(op, slot, n=64) -> str:
    fam = expansion._family(op.sys, slot.id)
    xs = expansion._check_grid(fam)
    xs = xs[np.linspace(0, len(xs) - 1, min(n, len(xs))).astype(int)]
    K = op.kernel(slot.id, xs, slot.id, xs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "s", "re", "im"])
    for a, x in enumerate(xs):
        for b, s in enumerate(xs):
            w.writerow([f"{x:.12g}", f"{s:.12g}", f"{K[a, b].real:.12g}", f"{K[a, b].imag:.12g}"])
    return buf.getvalue()


def cmd_kernelop(args) -> int:
    system = _load(args)
    system.require_pure_point()
    rep, kernels = _kernels(system, args.budget)
    delta = _delta(args, system)
    F = parse_function(args.function)
    op = expansion.kernel_operator(system, kernels, F, delta)
    f = vectorop.random_vector(system, np.random.default_rng(args.seed))
    via_kernel = op.apply(f)
    restricted, _ = vectorop.identity_resolution_apply(system, delta, f)
    via_borel = vectorop.borel_calculus_apply(system, F, restricted)
    diff = math.sqrt((via_kernel - via_borel).norm2())
    decomp = expansion.analytic_decomposition(system, kernels)
    rho = expansion.matrix_measure(decomp, rep.theta_pp, delta)
    csv_files = {}
    if args.out:
        base = Path(args.out)
        for slot in system.slots:
            if not len(slot.eigenvalues):
                continue
            name = f"{base.stem}_kernel_{slot.id.replace('#', '_')}.csv"
            write_atomic(base.parent / name, _kernel_csv(op, slot))
            csv_files[slot.id] = name
    emit({"command": "kernelop", "seed": args.seed, "function": args.function,
          "delta": delta.to_dict(), "terms": len(op.entries),
          "zero_operator": len(op.entries) == 0,
          "norm_difference": diff, "result": via_kernel.to_dict(system),
          "decomposition": [d.to_dict() for d in decomp], "matrix_measure": rho.to_dict(),
          "kernel_csv": csv_files}, args.out)
    return EXIT_OK


def cmd_lagrange_check(args) -> int:
    doc = systemio.load_json(args.input)
    mdoc = doc.get("matrix", doc)
    systemio.validate_matrix_doc(mdoc)
    A = quasidiff.matrix_from_dict(mdoc)
    violations = quasidiff.validate_shin_zettl(A)
    if violations:
        emit({"command": "lagrange-check", "violations": violations}, args.out)
        return EXIT_INVALID
    span = tuple(doc.get("span", A.interval))
    results = []
    for i, pair in enumerate(doc.get("pairs", [])):
        f_rhs = parse_function(pair["f"].get("forcing", "0"), "x")
        g_rhs = parse_function(pair["g"].get("forcing", "0"), "x")
        runs, slope = quasidiff.lagrange_convergence(
            A, pair["f"]["initial"], pair["g"]["initial"], panels=(2, 4, 8, 16, 32, args.panels),
            span=span, f_rhs=f_rhs, g_rhs=g_rhs, tol_ode=args.tol_ode)
        chk = runs[-1]
        results.append({"pair": i, **chk.to_dict(), "fitted_order": slope,
                        "convergence": [[c.panels, c.residual] for c in runs[:-1]],
                        "pass": chk.residual < args.tol_quad * (span[1] - span[0])})
    ok = all(r["pass"] for r in results)
    emit({"command": "lagrange-check", "span": list(span), "tol_quad": args.tol_quad,
          "symmetric": quasidiff.is_lagrange_symmetric(A), "results": results}, args.out)
    return EXIT_OK if ok else EXIT_INVALID


COMMANDS = {"validate": cmd_validate, "graph": cmd_graph, "index": cmd_index,
            "ordered-rep": cmd_ordered_rep, "expand": cmd_expand, "kernelop": cmd_kernelop,
            "lagrange-check": cmd_lagrange_check}


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emz-spectral", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input", help="system JSON (matrix JSON for lagrange-check)")
        s.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--tol-ode", type=_positive, default=quasidiff.TOL_ODE)
        s.add_argument("--tol-quad", type=_positive, default=quasidiff.TOL_QUAD)
        s.add_argument("--eps-atom", type=_positive, default=None)
        s.add_argument("--out", type=Path, help="report path (default: stdout)")
        s.add_argument("--budget", type=int, default=ordered_rep.DEFAULT_BUDGET)
        if name == "expand":
            s.add_argument("--vector", type=Path, help="JSON {slot: [[lambda, re, im], ...]}")
            s.add_argument("--truncation", type=int)
        if name == "kernelop":
            s.add_argument("--function", default="1", help="F(lam) as an expression in lam")
            s.add_argument("--delta", nargs=2, type=float, metavar=("LO", "HI"))
        if name == "lagrange-check":
            s.add_argument("--panels", type=int, default=10_000)
    return p


def main(argv=None) -> int:
    level = os.environ.get("EMZ_SPECTRAL_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.window is not None:
        try:
            systemio.check_window(args.window)
        except SchemaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except (ParseError, SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UNSUPPORTED as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except EnumerationBudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except EMZError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

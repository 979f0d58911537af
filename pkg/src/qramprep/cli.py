"""Command line front end: JSON documents in, JSON reports out.

Reports go to stdout, traces to stderr (or --trace-file), and output is
deterministic byte for byte for a fixed input and flags.  Exit codes: 0
success, 2 malformed input, 3 degenerate input (zero vector, dimension 1),
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import kernels
from .core import (DegenerateInputError, InputError, SparseMatrix, SparseVector,
                   Tolerance, pad_matrix_to_power_of_two, pad_to_power_of_two)
from .kptree import build_forest, build_tree
from .qram import QramInstance
from .stateprep import (PipelineError, encode_matrix, prepare_norms, prepare_row,
                        prepare_vector)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_VERIFY = 4


def load_document(path: str) -> "SparseVector | SparseMatrix":
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from None
    try:
        kind = doc["kind"]
        if kind == "vector":
            entries = tuple((e["index"], e["value"]) for e in doc["entries"])
            return pad_to_power_of_two(SparseVector(doc["dim"], entries))
        if kind == "matrix":
            entries = tuple(
                (e["index"][0], e["index"][1], e["value"]) for e in doc["entries"])
            return pad_matrix_to_power_of_two(
                SparseMatrix(doc["rows"], doc["cols"], entries))
    except KeyError as e:
        raise InputError(f"malformed input document: missing key {e.args[0]!r}") from None
    except (TypeError, IndexError) as e:
        raise InputError(f"malformed input document: {e}") from None
    raise InputError(f"unknown document kind {doc.get('kind')!r}")


def _tolerance(eps: "float | None") -> Tolerance:
    # --eps sets the per-amplitude tolerance; the norm tolerance scales with it
    if eps is None:
        return Tolerance()
    return Tolerance(eps_amp=eps, eps_norm=10.0 * eps)


def _emit_trace(args, text: str) -> None:
    if getattr(args, "trace_file", None):
        with open(args.trace_file, "w") as fh:
            fh.write(text + "\n")
    elif getattr(args, "trace", False):
        print(text, file=sys.stderr)


def cmd_build(args) -> int:
    data = load_document(args.input)
    if isinstance(data, SparseVector):
        if data.is_zero:
            print("warning: zero vector (tree is all zeros)", file=sys.stderr)
        tree = build_tree(data)
        out = {"kind": "vector", "dim": data.dim, "levels": tree.levels,
               "signs": tree.sign_cells()}
    else:
        forest = build_forest(data)
        out = {"kind": "matrix", "dim": data.rows,
               "norm_tree": forest.norm_tree.to_dict(),
               "rows": [t.to_dict() for t in forest.row_trees]}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_prep(args) -> int:
    data = load_document(args.input)
    tol = _tolerance(args.eps)
    if isinstance(data, SparseVector):
        if args.row is not None or args.norms:
            raise InputError("--row/--norms apply to matrix inputs only")
        result = prepare_vector(build_tree(data), tol=tol)
        report = {"kind": "vector", "mode": "vector", "dim": data.dim}
    else:
        if args.row is not None and args.norms:
            raise InputError("--row and --norms are mutually exclusive")
        forest = build_forest(data)
        if args.norms:
            result, mode = prepare_norms(forest, tol=tol), "norms"
        elif args.row is not None:
            result, mode = prepare_row(forest, args.row, tol=tol), "row"
        else:
            result, mode = encode_matrix(forest, tol=tol), "encode"
        report = {"kind": "matrix", "mode": mode, "dim": data.rows}
    report["fidelity"] = result.fidelity
    report["ancilla_clean"] = result.ancilla_clean
    if args.metrics:
        m = result.metrics
        report["metrics"] = {
            "queries": m.queries,
            "rotation_stages": m.rotation_stages,
            "rotations": m.rotations,
            "per_level": list(m.per_level),
            "sign": list(m.sign),
        }
    if args.target_check:
        report["target_max_abs_error"] = float(
            np.max(np.abs(result.state.amps - result.target)))
    _emit_trace(args, result.trace)
    print(json.dumps(report, sort_keys=True))
    ok = result.fidelity >= 1.0 - tol.eps_norm and result.ancilla_clean
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_route(args) -> int:
    if args.n < 1:
        raise InputError("address width must be >= 1")
    qram = QramInstance([0.0] * (1 << args.n))
    log = qram.route_address(args.address)
    decoded = qram.stored_address()
    _emit_trace(args, log.to_text())
    out = {"n": args.n, "address": str(decoded)}
    out.update(log.counters())
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_selftest(args) -> int:
    tol = _tolerance(args.eps)
    rng = np.random.default_rng(args.seed)
    fidelities = []
    all_clean = True
    queries_ok = True
    for dim in args.dims:
        n = (dim - 1).bit_length()
        if 1 << n != dim or dim < 2:
            raise InputError(f"selftest dims must be powers of two >= 2, got {dim}")
        for _ in range(args.count):
            v = SparseVector.from_dense(rng.standard_normal(dim))
            if v.is_zero:
                continue
            result = prepare_vector(build_tree(v), tol=tol)
            fidelities.append(result.fidelity)
            all_clean = all_clean and result.ancilla_clean
            queries_ok = queries_ok and result.metrics.queries == 4 * n + 2
    out = {
        "backend": kernels.BACKEND,
        "seed": args.seed,
        "dims": list(args.dims),
        "count_per_dim": args.count,
        "preps": len(fidelities),
        "min_fidelity": min(fidelities),
        "all_clean": all_clean,
        "queries_ok": queries_ok,
    }
    print(json.dumps(out, sort_keys=True))
    ok = all_clean and queries_ok and min(fidelities) >= 1.0 - tol.eps_norm
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qramprep",
        description="Partial-sum trees, bucket-brigade qRAM simulation, and "
                    "amplitude-encoding state preparation.")
    sub = p.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="build the partial-sum tree(s) for a JSON document")
    b.add_argument("input", help="path to a vector/matrix JSON document")
    b.set_defaults(fn=cmd_build)

    pr = sub.add_parser("prep", help="run the preparation pipeline and verify it")
    pr.add_argument("input", help="path to a vector/matrix JSON document")
    pr.add_argument("--row", type=int, default=None,
                    help="prepare this row of a matrix input")
    pr.add_argument("--norms", action="store_true",
                    help="prepare the row-norm state of a matrix input")
    pr.add_argument("--trace", action="store_true", help="print the prep trace to stderr")
    pr.add_argument("--trace-file", default=None, help="write the prep trace to a file")
    pr.add_argument("--metrics", action="store_true",
                    help="include per-level qRAM metrics in the report")
    pr.add_argument("--target-check", action="store_true",
                    help="include the max per-amplitude error vs the target")
    pr.add_argument("--eps", type=float, default=None,
                    help="per-amplitude tolerance override (norm tolerance = 10x)")
    pr.set_defaults(fn=cmd_prep)

    rt = sub.add_parser("route", help="route one address through a switch tree")
    rt.add_argument("n", type=int, help="address width")
    rt.add_argument("address", help="bit string of length n")
    rt.add_argument("--trace", action="store_true", help="print the event log to stderr")
    rt.add_argument("--trace-file", default=None, help="write the event log to a file")
    rt.set_defaults(fn=cmd_route)

    st = sub.add_parser("selftest", help="random end-to-end preparation checks")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    st.add_argument("--count", type=int, default=5, help="vectors per dimension")
    st.add_argument("--eps", type=float, default=None)
    st.set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DegenerateInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

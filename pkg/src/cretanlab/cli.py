"""Command-line front end.

Exit codes: 0 success or verification pass, 1 verification failure,
2 usage or parse error, 3 design unavailable or search infeasible.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import designs, formats, numeric
from .cretan import CretanMatrix, all_solutions, hadamard_family_design, verify_exact
from .designs import DesignParams, IncidenceMatrix
from .errors import (
    BudgetExceeded,
    DesignError,
    NoDesignAvailable,
    NoFeasiblePoint,
    ParseError,
    UnsupportedOrder,
)
from .portrait import PortraitSpec, render_pgm

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNAVAILABLE = 0, 1, 2, 3

QR_PRIMES = [p for p in range(3, 44) if designs.is_prime(p) and p % 4 == 3]
TWIN_PRIMES = [3, 5, 11, 17]


def catalog_entries() -> list[tuple[DesignParams, str]]:
    out = [(designs.qr_family(p).params, f"quadratic residue p={p}") for p in QR_PRIMES]
    for p in TWIN_PRIMES:
        n = p * (p + 2)
        out.append((DesignParams(n, (n - 1) // 2, (n - 3) // 4), f"twin prime p={p}, q={p + 2}"))
    for m in (1, 2, 3):
        n = 4 * m * m
        note = "" if m & (m - 1) == 0 else " (needs --hadamard-file)"
        out.append((DesignParams(n, 2 * m * m - m, m * m - m), f"Menon m={m}{note}"))
    for n in (2, 3, 4, 5):
        out.append((designs.sylvester_family(n).params, f"Sylvester core order {2**n}"))
    return out


def cmd_catalog(args) -> int:
    for params, label in catalog_entries():
        print(f"{str(params):<14} {label}")
    print(f"{'(v,k,lambda)':<14} brute-force cyclic difference set search, v <= {designs.MAX_SEARCH_ORDER}")
    return EXIT_OK


def _design_for_params(params: DesignParams, budget: int) -> IncidenceMatrix:
    params.validate()
    v, k, lam = params.v, params.k, params.lam
    if v % 4 == 3 and (k, lam) == ((v - 1) // 2, (v - 3) // 4):
        return hadamard_family_design((v + 1) // 4, budget)
    m = math.isqrt(v // 4)
    if v == 4 * m * m and (k, lam) == (2 * m * m - m, m * m - m) and m & (m - 1) == 0:
        return designs.menon_family(m)
    if v > designs.MAX_SEARCH_ORDER:
        raise NoDesignAvailable(f"no catalog family gives SBIBD{params} and v exceeds the search limit")
    ds = designs.find_difference_set(params, budget)
    if ds is None:
        raise NoDesignAvailable(f"no cyclic difference set with parameters {params}")
    return designs.develop(ds)


def _build_design(args) -> IncidenceMatrix:
    if args.sbibd:
        return _design_for_params(DesignParams(*args.sbibd), args.budget)
    if args.diffset_file:
        sets = designs.load_difference_sets(args.diffset_file)
        if not sets:
            raise NoDesignAvailable(f"{args.diffset_file} holds no difference sets")
        if not 0 <= args.index < len(sets):
            raise DesignError(f"index {args.index} out of range for {len(sets)} sets")
        return designs.develop(sets[args.index])
    family = args.family
    if family is None:
        raise DesignError("give --family, --sbibd or --diffset-file")
    need = {"qr": "p", "twin": "p", "menon": "m", "hadamard": "t", "sylvester": "n"}[family]
    value = getattr(args, need)
    if value is None:
        raise DesignError(f"--family {family} needs --{need}")
    if family == "qr":
        return designs.develop(designs.qr_family(value))
    if family == "twin":
        return designs.develop(designs.twin_prime_family(value))
    if family == "menon":
        H = None
        if args.hadamard_file:
            H = np.loadtxt(args.hadamard_file, delimiter=",", dtype=np.int64)
        return designs.menon_family(value, H)
    if family == "hadamard":
        return hadamard_family_design(value, args.budget)
    return designs.sylvester_family(value)


def _choose(matrices: list[CretanMatrix], root: str) -> list[CretanMatrix]:
    if root == "all" or not matrices:
        return matrices
    weights = [float(m.weight) for m in matrices]
    pick = weights.index(max(weights)) if root == "max" else weights.index(min(weights))
    return [matrices[pick]]


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_generate(args) -> int:
    B = _build_design(args)
    out = Path(args.output) if args.output else None
    if args.design_only:
        if args.format == "csv":
            _write(formats.matrix_to_csv(B.cells), out)
        else:
            _write(formats.write_json(formats.design_to_json(B), None), out)
        return EXIT_OK
    root = "all" if args.all_solutions else args.root
    matrices = _choose(all_solutions(B), root)
    if not matrices:
        print(f"no admissible two-level solution for {B.params}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    if args.format == "csv":
        if out is None or len(matrices) == 1:
            for cm in matrices:
                _write(formats.matrix_to_csv(cm.to_float()), out)
        else:
            for i, cm in enumerate(matrices):
                target = out.with_name(f"{out.stem}-{i}{out.suffix}")
                target.write_text(formats.matrix_to_csv(cm.to_float()))
    else:
        _write(formats.write_json(formats.bundle_to_json(B, matrices), None), out)
    for cm in matrices:
        print(
            f"{B.params} {cm.source}/{cm.branch}: y = {cm.levels[-1]}, "
            f"omega = {cm.weight} = {float(cm.weight):.4f}, |det| = {cm.det_float:.5g}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    items = formats.read_document(args.input)
    all_passed = True
    for n, item in enumerate(items):
        mode = args.mode
        if mode is None:
            mode = "float" if isinstance(item, np.ndarray) else "exact"
        if mode == "exact":
            if isinstance(item, IncidenceMatrix):
                report = designs.verify_sbibd(item)
                passed = report.passed
                detail = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in report.summary().items())
                print(f"[{n}] SBIBD{item.params}: {detail}")
            elif isinstance(item, CretanMatrix):
                report = verify_exact(item)
                passed = report.passed
                print(
                    f"[{n}] exact order {item.order}, omega = {item.weight}: "
                    f"{'PASS' if passed else 'FAIL'} ({report.defect_count} row defects, "
                    f"{len(report.column_offdiag_defects) + len(report.column_diag_defects)} column defects)"
                )
            else:
                print("exact verification needs a level-indexed exact matrix file", file=sys.stderr)
                return EXIT_USAGE
        else:
            if isinstance(item, IncidenceMatrix):
                M = item.cells
            elif isinstance(item, CretanMatrix):
                M = item.to_float()
            else:
                M = item
            r = numeric.residual(M, args.omega)
            passed = r.max_residual <= args.tol
            print(
                f"[{n}] float order {len(M)}: omega = {r.fitted_omega:.6f}, max offdiag = {r.max_offdiag:.3g}, "
                f"max diag dev = {r.max_diag_dev:.3g}, decimal_places = {r.decimal_places}: "
                f"{'PASS' if passed else 'FAIL'} at tol {args.tol:g}"
            )
        all_passed = all_passed and passed
    return EXIT_OK if all_passed else EXIT_FAIL


def cmd_search(args) -> int:
    if args.template_file:
        try:
            template = numeric.load_template(json.loads(Path(args.template_file).read_text()))
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ParseError(f"bad template file: {exc}") from exc
    else:
        template = numeric.TEMPLATES[args.template]()
    config = numeric.SearchConfig.from_file(args.config) if args.config else numeric.SearchConfig()
    overrides = {
        "restarts": args.restarts,
        "max_iters": args.max_iters,
        "seed": args.seed,
        "tol": args.tol,
        "workers": args.workers,
    }
    values = {k: v for k, v in overrides.items() if v is not None}
    if args.penalty:
        values["penalty_schedule"] = tuple(float(t) for t in args.penalty.split(","))
    config = numeric.SearchConfig(**{**config.__dict__, **values})
    result = numeric.search(template, config)
    print(result.summary())
    if not result.feasible:
        print(f"warning: best residual exceeds tol {config.tol:g}", file=sys.stderr)
    if args.output:
        formats.write_json(result.to_json(), args.output)
    return EXIT_OK


def _grid(item):
    if isinstance(item, CretanMatrix):
        return item.entries
    if isinstance(item, IncidenceMatrix):
        return item.cells.tolist()
    return np.asarray(item, dtype=float).tolist()


def cmd_render(args) -> int:
    items = formats.read_document(args.input)
    data = render_pgm(_grid(items[args.index]), PortraitSpec(args.cell_size))
    Path(args.output).write_bytes(data)
    return EXIT_OK


def cmd_export(args) -> int:
    items = formats.read_document(args.input)
    item = items[args.index]
    out = Path(args.output) if args.output else None
    if args.format == "csv":
        if isinstance(item, IncidenceMatrix):
            M = item.cells
        elif isinstance(item, CretanMatrix):
            M = item.to_float()
        else:
            M = item
        _write(formats.matrix_to_csv(M), out)
    else:
        if isinstance(item, IncidenceMatrix):
            doc = formats.design_to_json(item)
        elif isinstance(item, CretanMatrix):
            doc = formats.cretan_to_json(item)
        else:
            doc = {"kind": "float-matrix", "matrix": np.asarray(item).tolist()}
        _write(formats.write_json(doc, None), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cretanlab", description="Two-level Cretan matrices from SBIBDs.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list built-in design families")

    g = sub.add_parser("generate", help="build a design and its Cretan matrices")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--family", choices=["qr", "twin", "menon", "hadamard", "sylvester"])
    src.add_argument("--sbibd", nargs=3, type=int, metavar=("V", "K", "LAMBDA"))
    src.add_argument("--diffset-file")
    g.add_argument("--index", type=int, default=0, help="which set of --diffset-file")
    g.add_argument("--p", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--hadamard-file", help="CSV of a regular Hadamard matrix for --family menon")
    g.add_argument("--root", choices=["max", "min", "all"], default="max")
    g.add_argument("--all-solutions", action="store_true")
    g.add_argument("--design-only", action="store_true")
    g.add_argument("--budget", type=int, default=designs.DEFAULT_BUDGET)
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("-o", "--output")

    v = sub.add_parser("verify", help="check orthogonality exactly or to a tolerance")
    v.add_argument("input")
    v.add_argument("--mode", choices=["exact", "float"])
    v.add_argument("--tol", type=float, default=1e-5)
    v.add_argument("--omega", type=float, help="claimed weight (default: fitted)")

    s = sub.add_parser("search", help="penalty search over a level template")
    tsrc = s.add_mutually_exclusive_group(required=True)
    tsrc.add_argument("--template", choices=sorted(numeric.TEMPLATES))
    tsrc.add_argument("--template-file")
    s.add_argument("--config", help="key = value settings file")
    s.add_argument("--restarts", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--penalty", help="comma-separated penalty weights")
    s.add_argument("--workers", type=int)
    s.add_argument("-o", "--output")

    r = sub.add_parser("render", help="write a PGM portrait")
    r.add_argument("input")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--cell-size", type=int, default=1)
    r.add_argument("--index", type=int, default=0)

    e = sub.add_parser("export", help="convert a matrix file to JSON or CSV")
    e.add_argument("input")
    e.add_argument("--format", choices=["json", "csv"], default="csv")
    e.add_argument("--index", type=int, default=0)
    e.add_argument("-o", "--output")
    return parser


COMMANDS = {
    "catalog": cmd_catalog,
    "generate": cmd_generate,
    "verify": cmd_verify,
    "search": cmd_search,
    "render": cmd_render,
    "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnsupportedOrder as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except (ParseError, DesignError, IndexError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoDesignAvailable, NoFeasiblePoint, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE


if __name__ == "__main__":
    sys.exit(main())

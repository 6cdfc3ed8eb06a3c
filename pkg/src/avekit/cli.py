"""Command-line front end: ``avekit {generate,solve,sweep,reproduce,check-alpha}``.

Exit codes: 0 success, 1 a solve did not converge (or the method is
inapplicable), 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field

from . import __version__
from .benchmark import parse_grid, reproduce, run_sweep
from .errors import AveError, DenseLimitError, NotPositiveDefiniteError
from .linalg import dense_limit, read_matrix_market, split_symmetric
from .problems import ProblemSpec, load_problem, make_problem, save_problem
from .solvers_ave import Method, SolverConfig, report_csv_header, solve
from .solvers_linear import InnerPolicy
from .spectral import (DEFAULT_SEED, alpha_lower_bound, estimate_required_inner_iterations,
                       eta_norm_inverse, iteration_matrix_rho, largest_singular_skew,
                       smallest_eigenvalue_sym)

log = logging.getLogger("avekit")

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE = 0, 1, 2


@dataclass
class RunManifest:
    """Everything one invocation needs; identical manifests give identical rows."""

    spec: ProblemSpec | None = None
    problem_dir: str | None = None
    methods: list = field(default_factory=lambda: [Method.PICARD_SHSS])
    alpha: float | None = None
    alpha_grid: list | None = None
    config: SolverConfig | None = None
    out: str | None = None
    seed: int = DEFAULT_SEED

    def load(self):
        if self.problem_dir is not None:
            return load_problem(self.problem_dir)
        return make_problem(self.spec)

    def labels(self, problem):
        s = problem.spec or self.spec
        return ("", "", "") if s is None else (s.m, s.q, s.p)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4e}" if (v != 0 and (abs(v) < 1e-3 or abs(v) >= 1e6)) else f"{v:g}"
    return str(v)


def print_table(header, rows, stream=None):
    stream = sys.stdout if stream is None else stream
    cells = [[str(h) for h in header]] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    for c in cells:
        stream.write("  ".join(s.rjust(w) for s, w in zip(c, widths)).rstrip() + "\n")


def emit(header, rows, out):
    """Write CSV to ``out`` (``-`` for stdout) and an aligned table otherwise."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    if out == "-":
        sys.stdout.write(buf.getvalue())
        return
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    print_table(header, rows)


# ---------------------------------------------------------------------------
# argument parsing

def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return v


def _csv_list(conv):
    def parse(text):
        return [conv(t) for t in text.split(",") if t.strip()]
    return parse


def _add_problem_args(p, allow_matrix=False):
    g = p.add_argument_group("problem")
    g.add_argument("--m", type=_positive_int, help="grid size (n = m^2)")
    g.add_argument("--q", type=float, default=0.0, help="convection magnitude (default 0)")
    g.add_argument("--p", type=float, default=0.0, help="diagonal shift (default 0)")
    g.add_argument("--problem", metavar="DIR", help="load A.mtx / b.txt from DIR")
    if allow_matrix:
        g.add_argument("--matrix", metavar="FILE", help="Matrix Market file holding A")


def _add_solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--method", type=_csv_list(Method), default=[Method.PICARD_SHSS],
                   help="comma list of picard, picard_shss, picard_shss_direct, picard_hss")
    g.add_argument("--outer-rtol", type=_positive_float, default=1e-7)
    g.add_argument("--max-outer", type=_positive_int, default=500)
    g.add_argument("--inner-max", type=_positive_int, default=10)
    g.add_argument("--inner-rtol", type=float, default=0.01)
    g.add_argument("--inner-mode", choices=["fixed_count", "residual_tol", "both"],
                   default="both")
    g.add_argument("--start", choices=["zero", "ainvb"], default="zero")


def build_parser():
    parser = argparse.ArgumentParser(prog="avekit",
                                     description="Picard-type solvers for Ax - |x| = b")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a convection-diffusion test problem")
    g.add_argument("--m", type=_positive_int, required=True)
    g.add_argument("--q", type=float, default=0.0)
    g.add_argument("--p", type=float, default=0.0)
    g.add_argument("--out", required=True, metavar="DIR")

    s = sub.add_parser("solve", help="solve one problem with one or more methods")
    _add_problem_args(s)
    _add_solver_args(s)
    s.add_argument("--alpha", type=_positive_float)
    s.add_argument("--out", help="CSV output path ('-' for CSV on stdout)")

    w = sub.add_parser("sweep", help="scan a grid of shifts for the fewest outer steps")
    _add_problem_args(w)
    _add_solver_args(w)
    w.add_argument("--alpha-grid", required=True, help="start:stop:step or a1,a2,...")
    w.add_argument("--refine", type=int, default=0, help="local refinement levels (default 0)")
    w.add_argument("--jobs", type=_positive_int, default=1)
    w.add_argument("--out")

    r = sub.add_parser("reproduce", help="re-run a published table")
    r.add_argument("--table", required=True, choices=["t1", "t2", "t3", "t4"])
    r.add_argument("--m", type=_csv_list(int), default=[10, 20, 40],
                   help="comma list of grid sizes (default 10,20,40)")
    r.add_argument("--q", type=_csv_list(float), default=None,
                   help="comma list of q values (default 0,1,10,100)")
    _add_solver_args(r)
    r.add_argument("--refine", type=int, default=0)
    r.add_argument("--jobs", type=_positive_int, default=1)
    r.add_argument("--out")

    c = sub.add_parser("check-alpha", help="spectral diagnostics for a shift")
    _add_problem_args(c, allow_matrix=True)
    c.add_argument("--alpha", type=_positive_float, required=True)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED)
    c.add_argument("--out")
    return parser


def _config(args, method=None, alpha=None):
    policy = InnerPolicy(max_inner=args.inner_max, inner_rtol=args.inner_rtol,
                         inner_mode=args.inner_mode)
    return SolverConfig(alpha=alpha, outer_rtol=args.outer_rtol, max_outer=args.max_outer,
                        inner=policy, method=method or Method.PICARD_SHSS, start=args.start)


def _manifest(args, parser):
    if args.problem is None and getattr(args, "matrix", None) is None and args.m is None:
        parser.error("give either --m (with --q/--p) or --problem DIR")
    spec = ProblemSpec(args.m, args.q, args.p) if args.m is not None else None
    return RunManifest(spec=spec, problem_dir=args.problem,
                       methods=getattr(args, "method", None) or [],
                       alpha=getattr(args, "alpha", None), out=getattr(args, "out", None),
                       seed=getattr(args, "seed", DEFAULT_SEED))


# ---------------------------------------------------------------------------
# commands

def cmd_generate(args, parser):
    problem = make_problem(ProblemSpec(args.m, args.q, args.p))
    out = save_problem(problem, args.out)
    print(f"wrote {out}: n={problem.n} nnz={problem.A.nnz}")
    return EXIT_OK


def cmd_solve(args, parser):
    man = _manifest(args, parser)
    needs_alpha = [m for m in man.methods if m is not Method.PICARD]
    if needs_alpha and man.alpha is None:
        parser.error(f"--alpha is required for {needs_alpha[0].value}")
    try:
        cfgs = [_config(args, m, man.alpha) for m in man.methods]
    except ValueError as exc:
        parser.error(str(exc))
    problem = man.load()
    labels = man.labels(problem)
    rows, ok = [], True
    for cfg in cfgs:
        rep = solve(problem, cfg)
        ok &= rep.converged
        rows.append(rep.csv_row(*labels))
    emit(report_csv_header(), rows, man.out)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_sweep(args, parser):
    man = _manifest(args, parser)
    try:
        grid = parse_grid(args.alpha_grid)
        cfgs = [_config(args, m, grid[0]) for m in man.methods]
    except ValueError as exc:
        parser.error(str(exc))
    problem = man.load()
    labels = man.labels(problem)
    header = report_csv_header() + ["stage"]
    rows, any_ok = [], False
    for cfg in cfgs:
        res = run_sweep(problem, cfg, grid, refine=args.refine, jobs=args.jobs)
        for r in res.rows:
            rows.append([cfg.method.value, *labels, repr(r.alpha), r.iterations, r.inner_total,
                         f"{r.residual:.4e}", f"{r.seconds:.4f}", r.status.value, r.stage])
        b = res.best
        if b is not None:
            any_ok = True
            rows.append([cfg.method.value, *labels, repr(b.alpha), b.iterations, b.inner_total,
                         f"{b.residual:.4e}", f"{b.seconds:.4f}", b.status.value, "best"])
    emit(header, rows, man.out)
    return EXIT_OK if any_ok else EXIT_NOT_CONVERGED


def cmd_reproduce(args, parser):
    base = _config(args, Method.PICARD_SHSS, 1.0)
    qs = args.q if args.q is not None else None
    kwargs = {} if qs is None else {"qs": qs}
    try:
        rows = reproduce(args.table, ms=args.m, base=base, jobs=args.jobs,
                         refine=args.refine, **kwargs)
    except (KeyError, ValueError) as exc:
        parser.error(f"no published entry for the requested cell: {exc}")
    header = list(rows[0].keys()) if rows else ["table"]
    emit(header, [[_cell(r[h]) for h in header] for r in rows], args.out)
    return EXIT_OK if all(r["status"] == "converged" for r in rows) else EXIT_NOT_CONVERGED


def _cell(v):
    if isinstance(v, float) and (abs(v) < 1e-3 and v != 0):
        return f"{v:.4e}"
    return v


CHECK_HEADER = ["n", "alpha", "lambda_min_H", "sigma_max_S", "eta", "alpha_floor",
                "rho_at_alpha", "required_N", "eta_ge_1", "alpha_above_floor", "seed", "status"]


def cmd_check_alpha(args, parser):
    man = _manifest(args, parser)
    if args.matrix is not None:
        A = read_matrix_market(args.matrix)
    else:
        A = man.load().A
    alpha, seed = args.alpha, args.seed
    H, S = split_symmetric(A)
    lam = smallest_eigenvalue_sym(H, seed=seed)
    sig = largest_singular_skew(S, seed=seed)
    row = {k: None for k in CHECK_HEADER}
    row.update(n=A.nrows, alpha=alpha, lambda_min_H=lam, sigma_max_S=sig, seed=seed)
    try:
        floor = alpha_lower_bound(lam, sig)
    except NotPositiveDefiniteError as exc:
        log.error("%s", exc)
        row["status"] = "inapplicable"
        emit(CHECK_HEADER, [[row[k] for k in CHECK_HEADER]], man.out)
        return EXIT_NOT_CONVERGED
    eta = eta_norm_inverse(A, seed=seed)
    row.update(eta=eta, alpha_floor=floor, eta_ge_1=eta >= 1.0, alpha_above_floor=alpha > floor,
               status="ok")
    if eta >= 1.0:
        log.warning("eta = %.6g >= 1: unique solvability is not guaranteed", eta)
    if A.nrows <= dense_limit():
        rho = iteration_matrix_rho(A, alpha)
        row["rho_at_alpha"] = rho
        if eta < 1.0 and rho < 1.0:
            row["required_N"] = estimate_required_inner_iterations(A, alpha, eta)
    emit(CHECK_HEADER, [[row[k] for k in CHECK_HEADER]], man.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
    "check-alpha": cmd_check_alpha,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except (OSError, DenseLimitError) as exc:
        print(f"avekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AveError, ValueError) as exc:
        print(f"avekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

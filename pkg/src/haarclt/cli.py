"""Command-line front end.

Each invocation runs one command and writes one report document (JSON or CSV)
to ``--out`` or standard output. Failures write a JSON error object to
standard error and exit with 2 (validation/domain), 3 (budget) or 4 (numeric).
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import __version__, _accel
from .convergence import (DEFAULT_EPSILON, clt_gap, compute_dn, dn_terms, monte_carlo_gap)
from .distributions import get_distribution
from .errors import HaarCLTError
from .functions import get_function
from .gaussian import gaussian_expectation_reference, gaussian_riemann_sum, hyperplane_box_mass, select_b1
from .haar import MAX_LEVEL, truncate_expansion
from .multinomial import (DEFAULT_BUDGET, THIRD_QUARTIC, TAYLOR_QUARTIC, LatticeWindow, tail_cutoff_b0,
                          window_sums)
from .reports import dumps, expansion_to_dict, fmt, reports_to_csv, rows_to_csv, to_ordered_dict

COMMANDS = ("haar", "dn", "cltgap", "riemann", "boxmass", "mc")
QUARTICS = {"taylor": TAYLOR_QUARTIC, "third": THIRD_QUARTIC}


class ValidationError(HaarCLTError):
    exit_status = 2

    def __init__(self, messages):
        super().__init__("; ".join(messages))
        self.messages = list(messages)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError([message])


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="haarclt", description="Haar-expansion CLT laboratory")
    parser.add_argument("--version", action="version", version=f"haarclt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default="-", help="output path, '-' for standard output")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = sub.add_parser("haar", help="truncated Haar expansion of a quantile function")
    p.add_argument("--dist", default="twopoint")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--method", choices=("exact", "quad"), default="exact")
    p.add_argument("--eta", type=float, default=1e-8)
    common(p)

    p = sub.add_parser("dn", help="windowed discrepancy D_n and its bound")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=_int_list, required=True, help="one n or a comma-separated list")
    p.add_argument("--b", type=float)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--stirling", action="store_true", help="use d_n e^H instead of the exact pmf")
    p.add_argument("--quartic", choices=sorted(QUARTICS), default="taylor")
    p.add_argument("--per-term", action="store_true", help="CSV dump with one row per lattice point")
    common(p)

    p = sub.add_parser("cltgap", help="weak-convergence gap through the full pipeline")
    p.add_argument("--dist", default="twopoint")
    p.add_argument("--M", type=int, default=0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--f", default="cos")
    p.add_argument("--allow-unbounded", action="store_true")
    common(p)

    p = sub.add_parser("riemann", help="Gaussian Riemann sum against E f(Y)")
    p.add_argument("--dist", default="twopoint")
    p.add_argument("--M", type=int, default=0)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--f", default="cos")
    p.add_argument("--allow-unbounded", action="store_true")
    common(p)

    p = sub.add_parser("boxmass", help="Gaussian mass of the hyperplane box")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None, help="also select b1 for this epsilon")
    common(p)

    p = sub.add_parser("mc", help="Monte Carlo estimate of E f(S_n / sqrt n)")
    p.add_argument("--dist", default="twopoint")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--f", default="cos")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-unbounded", action="store_true")
    common(p)
    return parser


def _pow2(m):
    return m >= 2 and m & (m - 1) == 0


def validate(args) -> dict:
    """Check every field up front; raise one ValidationError listing all problems."""
    errors = []
    cfg = {k: v for k, v in vars(args).items()}
    if args.threads < 1:
        errors.append("--threads must be >= 1")
    if args.budget < 1:
        errors.append("--budget must be >= 1")
    if getattr(args, "dist", None) is not None:
        try:
            get_distribution(args.dist)
        except HaarCLTError as exc:
            errors.append(f"--dist: {exc}")
    if getattr(args, "f", None) is not None:
        try:
            cfg["f"] = get_function(args.f, allow_unbounded=args.allow_unbounded).spec()
        except HaarCLTError as exc:
            errors.append(f"--f: {exc}")
    eps = getattr(args, "epsilon", None)
    if eps is not None and not 0.0 < eps < 1.0:
        errors.append("--epsilon must lie in (0, 1)")
    if getattr(args, "b", None) is not None and not args.b > 0:
        errors.append("--b must be positive")
    M = getattr(args, "M", None)
    if M is not None and not 0 <= M <= MAX_LEVEL:
        errors.append(f"--M must lie in [0, {MAX_LEVEL}]")
    cmd = args.command
    if cmd in ("dn", "boxmass") and not _pow2(args.m):
        errors.append("--m must be a power of two >= 2")
    if cmd == "boxmass":
        if args.m > 4:
            errors.append("--m must be <= 4 for the box integral")
        if args.b is None and args.epsilon is None:
            errors.append("boxmass needs --b or --epsilon")
        if args.grid_step is not None and not args.grid_step > 0:
            errors.append("--grid-step must be positive")
    if cmd in ("dn", "riemann"):
        if not args.n:
            errors.append("--n needs at least one value")
        m = args.m if cmd == "dn" else (2 ** (M + 1) if M is not None and M >= 0 else None)
        for n in args.n:
            if n < 1:
                errors.append(f"--n {n} must be positive")
            elif m and _pow2(m) and n % m:
                errors.append(f"m={m} does not divide n={n}")
        if args.per_term if cmd == "dn" else False:
            if args.format != "csv":
                errors.append("--per-term requires --format csv")
            if len(args.n) != 1:
                errors.append("--per-term takes a single n")
    if cmd == "cltgap":
        m = 2 ** (M + 1) if M is not None and M >= 0 else None
        if args.n < 1:
            errors.append("--n must be positive")
        elif m and args.n % m:
            errors.append(f"m = 2^(M+1) = {m} does not divide n = {args.n}")
    if cmd == "mc":
        if args.n < 1:
            errors.append("--n must be positive")
        if args.trials < 2:
            errors.append("--trials must be >= 2")
    if errors:
        raise ValidationError(errors)
    cfg.pop("version", None)
    cfg["backend"] = _accel.backend()
    return cfg


def default_b(epsilon: float, m: int) -> float:
    """max(b0, b1) for the same epsilon; b1 only where the box integral is available."""
    b = tail_cutoff_b0(epsilon)
    if m <= 4:
        b = max(b, select_b1(epsilon, m))
    return b


def _document(command, cfg, report):
    return {"tool": "haarclt", "version": __version__, "command": command, "config": cfg, "report": report}


def _preamble(command, cfg):
    return [f"haarclt {__version__} {command}", "config " + json.dumps(cfg, sort_keys=False, default=str)]


def run(args) -> str:
    """Execute a parsed command and return the rendered report document."""
    cfg = validate(args)
    cmd = args.command
    csv_out = args.format == "csv"

    if cmd == "haar":
        exp = truncate_expansion(args.dist, args.M, method=args.method, eta=args.eta)
        if csv_out:
            pre = _preamble(cmd, cfg) + [f"sigmaM {fmt(exp.sigmaM)}",
                                         "outcomes " + " ".join(fmt(o) for o in exp.outcomes)]
            return rows_to_csv(["j", "k", "c"], exp.records(), pre)
        return dumps(_document(cmd, cfg, expansion_to_dict(exp)))

    if cmd == "dn":
        b = args.b if args.b is not None else default_b(args.epsilon, args.m)
        cfg["b"] = b
        for n in args.n:
            LatticeWindow(n, args.m, b, args.budget)
        if args.per_term:
            n = args.n[0]
            rows = ([*js, pmf, w, d] for js, pmf, w, d in dn_terms(args.m, n, b, args.budget))
            header = [f"j{i + 1}" for i in range(args.m)] + ["pmf", "gauss_weight", "abs_diff"]
            return rows_to_csv(header, rows, _preamble(cmd, cfg))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            reports = [compute_dn(args.m, n, b, use_stirling=args.stirling, quartic=QUARTICS[args.quartic],
                                  threads=args.threads, budget=args.budget) for n in args.n]
        if csv_out:
            return reports_to_csv(reports, _preamble(cmd, cfg))
        body = to_ordered_dict(reports[0]) if len(reports) == 1 else {"reports": reports}
        return dumps(_document(cmd, cfg, body))

    if cmd == "cltgap":
        m = 2 ** (args.M + 1)
        b = args.b if args.b is not None else default_b(args.epsilon, m)
        cfg["b"] = b
        rep = clt_gap(args.dist, args.M, args.n, b, args.f, epsilon=args.epsilon, threads=args.threads,
                      budget=args.budget, allow_unbounded=args.allow_unbounded)
        if csv_out:
            return reports_to_csv([rep], _preamble(cmd, cfg))
        return dumps(_document(cmd, cfg, rep))

    if cmd == "riemann":
        exp = truncate_expansion(args.dist, args.M)
        ref = gaussian_expectation_reference(args.f, allow_unbounded=args.allow_unbounded)
        rows = []
        for n in args.n:
            sums = window_sums(exp, n, args.b, args.f, threads=args.threads,
                               allow_unbounded=args.allow_unbounded, budget=args.budget)
            rows.append({"n": n, "m": exp.m, "b": args.b, "riemann_value": sums.riem_f,
                         "reference_value": ref, "gap": abs(sums.riem_f - ref),
                         "riemann_mass": sums.riem_w, "lattice_count": sums.count})
        if csv_out:
            header = list(rows[0])
            return rows_to_csv(header, [[r[h] for h in header] for r in rows], _preamble(cmd, cfg))
        body = rows[0] if len(rows) == 1 else {"reports": rows}
        return dumps(_document(cmd, cfg, body))

    if cmd == "boxmass":
        step = args.grid_step or (0.005 if args.m == 2 else 0.1)
        cfg["grid_step"] = step
        body = {"m": args.m, "grid_step": step}
        if args.epsilon is not None:
            body["epsilon"] = args.epsilon
            body["b1"] = select_b1(args.epsilon, args.m, step)
        b = args.b if args.b is not None else body["b1"]
        body["b"] = b
        body["mass"] = hyperplane_box_mass(args.m, b, step)
        body["deficit"] = 1.0 - body["mass"]
        if csv_out:
            return rows_to_csv(list(body), [list(body.values())], _preamble(cmd, cfg))
        return dumps(_document(cmd, cfg, body))

    if cmd == "mc":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est, se = monte_carlo_gap(args.dist, args.n, args.trials, args.f, args.seed,
                                      allow_unbounded=args.allow_unbounded)
        body = {"estimate": est, "stderr": se, "n": args.n, "trials": args.trials, "seed": args.seed}
        if csv_out:
            return rows_to_csv(list(body), [list(body.values())], _preamble(cmd, cfg))
        return dumps(_document(cmd, cfg, body))

    raise ValidationError([f"unknown command {cmd!r}"])  # pragma: no cover


def _error_object(exc) -> str:
    kind = {2: "validation", 3: "budget", 4: "numeric"}.get(getattr(exc, "exit_status", 1), "error")
    payload = {"type": kind, "class": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ValidationError):
        payload["messages"] = exc.messages
    return json.dumps({"error": payload})


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = run(args)
    except HaarCLTError as exc:
        sys.stderr.write(_error_object(exc) + "\n")
        return exc.exit_status
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 a `check` property failed, 2 invalid configuration,
3 a resource cap would be exceeded.  Outputs are byte-deterministic for a
fixed command line; timestamps appear only in a comment/provenance field when
--stamp is given.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .acceptance import AcceptanceSuite
from .counting import SmoothQuery, psi_exact
from .errors import ResourceLimitError, ValidationError
from .moments import (
    MomentEstimate,
    cancellation_report,
    dirichlet_l1,
    estimate_ep_integral_moment,
    estimate_ep_moment,
    estimate_power_moment,
    plancherel_check,
    plancherel_tail_bound,
    smooth_indicator_coefficients,
    zeta_truncation_window,
)
from .primes import sieve
from .rmf import AllFactorsIn, LargestFactorIn
from .saddle import dickman_rho, log_zeta_trunc, solve_saddle, xi, zeta_trunc

REPORT_HEADER = [
    "x", "y", "u", "alpha", "psi", "abs_moment", "stderr", "ratio",
    "ci_low", "ci_high", "predicted_saving",
]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"expected 'LO,HI', got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValidationError(f"window needs LO < HI, got {text!r}")
    return lo, hi


def _emit_lines(lines: list[str], output: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(payload: dict, output: str | None) -> None:
    _emit_lines([json.dumps(payload, sort_keys=True, indent=2)], output)


def _provenance(args, extra: dict | None = None) -> dict:
    prov = {"version": __version__, "seed": getattr(args, "seed", None)}
    if getattr(args, "stamp", False):
        prov["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if extra:
        prov.update(extra)
    return prov


def _config_echo(args) -> dict:
    skip = {"func", "config"}
    return {
        k: v for k, v in vars(args).items()
        if k not in skip and not k.startswith("_") and v is not None
    }


# -- subcommand handlers ------------------------------------------------------


def _cmd_psi(args) -> int:
    window = _parse_window(args.window) if args.window else None
    table = sieve(max(args.x, args.lower + 1, 2))
    query = SmoothQuery(
        x=args.x,
        y=args.y,
        lower=args.lower,
        prime_window=(int(window[0]), int(window[1])) if window else None,
    )
    print(psi_exact(query, table, strategy=args.strategy))
    return 0


def _cmd_alpha(args) -> int:
    table = sieve(max(2, args.y), want_spf=False)
    sp = solve_saddle(args.x, args.y, args.tol, table=table)
    if args.format == "json":
        _emit_json(
            {
                "config": _config_echo(args),
                "results": {
                    "alpha": sp.alpha,
                    "residual": sp.residual,
                    "iterations": sp.iterations,
                },
                "provenance": _provenance(args),
            },
            args.output,
        )
    else:
        print(_fmt(sp.alpha))
    return 0


def _cmd_rho(args) -> int:
    print(_fmt(dickman_rho(args.u, args.tol)))
    return 0


def _cmd_xi(args) -> int:
    print(_fmt(xi(args.u, args.tol)))
    return 0


def _cmd_zeta(args) -> int:
    table = sieve(max(2, args.y), want_spf=False)
    val = log_zeta_trunc(args.sigma, args.y, table) if args.log else zeta_trunc(args.sigma, args.y, table)
    print(_fmt(val))
    return 0


def _estimate_output(args, est: MomentEstimate, extra: dict | None = None) -> int:
    if args.format == "json":
        results = {
            "statistic": est.statistic,
            "mean": est.mean,
            "stderr": est.stderr,
            "n_samples": est.n_samples,
        }
        if extra:
            results.update(extra)
        _emit_json(
            {"config": _config_echo(args), "results": results, "provenance": _provenance(args)},
            args.output,
        )
    else:
        print(f"mean={_fmt(est.mean)} stderr={_fmt(est.stderr)} n={est.n_samples}")
    return 0


def _cmd_mc_sum(args) -> int:
    constraint = None
    if args.largest_window and args.factor_window:
        raise ValidationError("choose at most one of --largest-window / --factor-window")
    if args.largest_window:
        lo, hi = _parse_window(args.largest_window)
        constraint = LargestFactorIn(int(lo), int(hi))
    if args.factor_window:
        lo, hi = _parse_window(args.factor_window)
        constraint = AllFactorsIn(int(lo), int(hi))
    est = estimate_power_moment(
        args.x, args.y, args.exponent, args.samples, args.seed,
        constraint=constraint, threads=args.threads,
    )
    return _estimate_output(args, est)


def _cmd_mc_ep(args) -> int:
    est = estimate_ep_moment(
        args.beta, args.y, args.alpha_exp, args.t, args.samples, args.seed, threads=args.threads
    )
    return _estimate_output(args, est)


def _cmd_mc_ep_integral(args) -> int:
    table = sieve(max(2, args.y), want_spf=False)
    if args.window == "auto":
        window = zeta_truncation_window(args.beta, args.y, table)
    else:
        window = _parse_window(args.window)
    est = estimate_ep_integral_moment(
        args.beta, args.y, args.q, args.samples, args.seed,
        window=window, weight=args.weight, step=args.step, table=table, threads=args.threads,
    )
    return _estimate_output(args, est, extra={"window": list(window), "weight": args.weight})


def _cmd_plancherel(args) -> int:
    if args.coeffs:
        with open(args.coeffs, "r", encoding="utf-8") as fh:
            coef = json.load(fh)
        if not isinstance(coef, list) or not coef:
            raise ValidationError("--coeffs file must hold a non-empty JSON array a_1..a_M")
    else:
        table = sieve(max(2, args.smooth_x))
        coef = smooth_indicator_coefficients(args.smooth_x, args.smooth_y, table).tolist()
    res = plancherel_check(coef, args.sigma, args.t_max)
    bound = plancherel_tail_bound(coef, args.sigma, args.t_max)
    if args.format == "json":
        _emit_json(
            {
                "config": _config_echo(args),
                "results": {"lhs": res.lhs, "rhs": res.rhs, "gap": res.gap, "tail_bound": bound},
                "provenance": _provenance(args),
            },
            args.output,
        )
    else:
        print(f"lhs={_fmt(res.lhs)} rhs={_fmt(res.rhs)} gap={_fmt(res.gap)} tail_bound={_fmt(bound)}")
    return 0


def _cmd_dirichlet_l1(args) -> int:
    print(_fmt(dirichlet_l1(args.terms, args.tol)))
    return 0


def _report_rows(args):
    u_values = [float(tok) for tok in args.u.split(",") if tok]
    if not u_values:
        raise ValidationError("--u expects a comma-separated list like 2,3,4,5,6")
    table = sieve(max(2, args.x))
    return cancellation_report(args.x, u_values, args.samples, args.seed, table, threads=args.threads)


def _rows_payload(rows) -> list[dict]:
    return [
        {
            "x": r.x,
            "y": r.y,
            "u": r.u,
            "alpha": r.alpha,
            "psi": r.psi,
            "abs_moment": r.abs_moment.mean,
            "stderr": r.abs_moment.stderr,
            "ratio": r.ratio,
            "ci_low": r.ci_low,
            "ci_high": r.ci_high,
            "predicted_saving": r.predicted_saving,
        }
        for r in rows
    ]


def _cmd_report(args) -> int:
    rows = _report_rows(args)
    payload = _rows_payload(rows)
    if args.format == "json":
        _emit_json(
            {
                "config": _config_echo(args),
                "results": payload,
                "provenance": _provenance(args, extra={"grid": [r["u"] for r in payload]}),
            },
            args.output,
        )
    else:
        lines = []
        if args.stamp:
            lines.append("# generated " + time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
        lines.append(",".join(REPORT_HEADER))
        for row in payload:
            lines.append(",".join(_fmt(row[k]) for k in REPORT_HEADER))
        _emit_lines(lines, args.output)
    return 0


def _svg_plot(rows) -> str:
    """Self-contained SVG: observed ratio vs u with 3-sigma whiskers and the
    predicted exp(-u log2/2) saving curve."""
    width, height, margin = 640, 420, 56
    us = [r.u for r in rows]
    vals = [r.ratio for r in rows] + [r.ci_low for r in rows] + [r.ci_high for r in rows]
    vals += [r.predicted_saving for r in rows]
    u_lo, u_hi = min(us) - 0.3, max(us) + 0.3
    v_lo, v_hi = 0.0, max(1.05, max(vals) * 1.1)

    def sx(u):
        return margin + (u - u_lo) / (u_hi - u_lo) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - v_lo) / (v_hi - v_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="13">u = log x / log y</text>',
        f'<text x="16" y="{height / 2:.1f}" font-size="13" transform="rotate(-90 16 {height / 2:.1f})" '
        f'text-anchor="middle">mean|S| / sqrt(count)</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = v_lo + frac * (v_hi - v_lo)
        parts.append(
            f'<text x="{margin - 6}" y="{sy(v) + 4:.1f}" text-anchor="end" font-size="11">{v:.2f}</text>'
        )
    for u in sorted({round(u) for u in us}):
        parts.append(
            f'<text x="{sx(u):.1f}" y="{height - margin + 16}" text-anchor="middle" font-size="11">{u}</text>'
        )
    pred = " ".join(f"{sx(r.u):.2f},{sy(r.predicted_saving):.2f}" for r in rows)
    parts.append(f'<polyline points="{pred}" fill="none" stroke="#888" stroke-dasharray="5,3"/>')
    for r in rows:
        x = sx(r.u)
        parts.append(
            f'<line x1="{x:.2f}" y1="{sy(r.ci_low):.2f}" x2="{x:.2f}" y2="{sy(r.ci_high):.2f}" stroke="#1f77b4"/>'
        )
        parts.append(f'<circle cx="{x:.2f}" cy="{sy(r.ratio):.2f}" r="3.5" fill="#1f77b4"/>')
    parts.append(
        f'<text x="{width - margin}" y="{margin - 10}" text-anchor="end" font-size="11">'
        "dots: observed; dashed: exp(-u log2/2)</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def _cmd_plot(args) -> int:
    rows = _report_rows(args)
    _emit_lines([_svg_plot(rows)], args.output)
    return 0


def _cmd_check(args) -> int:
    only = [int(tok) for tok in args.only.split(",")] if args.only else None
    suite = AcceptanceSuite(scale="quick" if args.quick else "full", threads=args.threads)
    results = suite.run(only)
    for res in results:
        print(res.report())
        print(f"    ({res.seconds:.1f}s)")
    failed = [r.cid for r in results if not r.passed]
    if args.output:
        _emit_json(
            {
                "config": _config_echo(args),
                "results": [
                    {"criterion": r.cid, "name": r.name, "passed": r.passed, "details": r.details}
                    for r in results
                ],
                "provenance": _provenance(args),
            },
            args.output,
        )
    if failed:
        print(f"FAILED criteria: {failed}")
        return 1
    print("all checks passed")
    return 0


# -- parser -------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed_int(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothsums",
        description="Smooth-number counts, saddle-point asymptotics, and Monte Carlo "
        "cancellation experiments for random multiplicative sums.",
    )
    parser.add_argument("--config", help="JSON file of flag defaults; explicit flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=False, mc=False):
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--output", help="output path ('-' for stdout)")
        p.add_argument("--stamp", action="store_true", help="include a timestamp in the artifact")
        if seed or mc:
            p.add_argument("--seed", type=_seed_int, default=42, help="64-bit RNG seed")
        if mc:
            p.add_argument("--samples", type=_positive_int, default=2000, help="Monte Carlo samples (>= 2)")
            p.add_argument(
                "--threads", type=_positive_int, default=None,
                help="worker threads (default: SMOOTHSUMS_THREADS or 1); results are thread-count independent",
            )

    p = sub.add_parser("psi", help="exact count of n <= x with all prime factors <= y "
                                   "(or in --window); x >= 1, y >= 2")
    p.add_argument("--x", type=_positive_int, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--lower", type=int, default=0, help="exclusive lower bound, 0 <= lower < x")
    p.add_argument("--window", help="prime-factor window 'LO,HI' replacing the <= y condition")
    p.add_argument("--strategy", choices=["auto", "scan", "recursive"], default="auto")
    p.set_defaults(func=_cmd_psi)

    p = sub.add_parser("alpha", help="saddle point: root of sum_{p<=y} log p/(p^a - 1) = log x; 2 <= y <= x")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--tol", type=float, default=1e-12, help="absolute residual tolerance (> 0)")
    add_common(p)
    p.set_defaults(func=_cmd_alpha)

    p = sub.add_parser("rho", help="Dickman rho(u): 1 on [0,1], then u rho'(u) = -rho(u-1); u >= 0")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_rho)

    p = sub.add_parser("xi", help="root of e^xi = 1 + u*xi with xi(1) = 0; u >= 1")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=_cmd_xi)

    p = sub.add_parser("zeta", help="truncated Euler product prod_{p<=y}(1 - p^-sigma)^-1; sigma > 0")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--log", action="store_true", help="print the log of the product")
    p.set_defaults(func=_cmd_zeta)

    p = sub.add_parser("mc-sum", help="Monte Carlo mean of |sum f(n)|^exponent over smooth n <= x")
    p.add_argument("--x", type=_positive_int, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--exponent", type=float, default=1.0, help="power applied to |S| (2q)")
    p.add_argument("--largest-window", help="restrict to P(n) in 'LO,HI'")
    p.add_argument("--factor-window", help="restrict to all prime factors in 'LO,HI'")
    add_common(p, mc=True)
    p.set_defaults(func=_cmd_mc_sum)

    p = sub.add_parser("mc-ep", help="Monte Carlo mean of |F_y(beta/2 + it)|^(2*alpha-exp)")
    p.add_argument("--beta", type=float, required=True, help="beta > 0 (scaling regime needs beta >= 3/4)")
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--alpha-exp", type=float, default=1.0, help="|alpha| <= 100")
    p.add_argument("--t", type=float, default=0.0)
    add_common(p, mc=True)
    p.set_defaults(func=_cmd_mc_ep)

    p = sub.add_parser(
        "mc-ep-integral",
        help="Monte Carlo mean of (integral over the window of |F_y(beta/2+it)|^2)^q; 0 < q <= 1",
    )
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--y", type=_positive_int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--window", default="-0.5,0.5", help="'LO,HI' or 'auto' for |t| <= zeta(beta,y)")
    p.add_argument("--weight", action="store_true", help="divide the integrand by |beta/2 + it|^2")
    p.add_argument("--step", type=float, default=None, help="grid step, must be <= 1/(8 log y)")
    add_common(p, mc=True)
    p.set_defaults(func=_cmd_mc_ep_integral)

    p = sub.add_parser(
        "plancherel",
        help="both sides of: int_0^inf |sum_{n<=x} a_n|^2 x^-(1+2s) dx = "
        "(1/2pi) int |A(s+it)/(s+it)|^2 dt, for finitely many coefficients",
    )
    p.add_argument("--sigma", type=float, required=True, help="sigma > 0")
    p.add_argument("--t-max", type=float, default=1e4, help="quadrature truncation T > 0")
    p.add_argument("--coeffs", help="JSON file holding the array a_1..a_M")
    p.add_argument("--smooth-x", type=_positive_int, default=100, help="indicator coefficients: bound x")
    p.add_argument("--smooth-y", type=_positive_int, default=3, help="indicator coefficients: smoothness y")
    add_common(p)
    p.set_defaults(func=_cmd_plancherel)

    p = sub.add_parser("dirichlet-l1", help="integral over [0,1] of |sum_{k=0}^{N} e(k theta)|; N >= 0")
    p.add_argument("--terms", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_dirichlet_l1)

    p = sub.add_parser(
        "report",
        help="cancellation report: per u, the exact count, mean|S|, ratio to sqrt(count), "
        "and the predicted exp(-u log2/2) saving",
    )
    p.add_argument("--x", type=_positive_int, required=True)
    p.add_argument("--u", default="1,2,3,4,5,6", help="comma-separated u list (u >= 1)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", help="output path ('-' for stdout)")
    p.add_argument("--stamp", action="store_true", help="include a timestamp comment line")
    p.add_argument("--seed", type=_seed_int, default=42, help="64-bit RNG seed")
    p.add_argument("--samples", type=_positive_int, default=2000, help="Monte Carlo samples (>= 2)")
    p.add_argument(
        "--threads", type=_positive_int, default=None,
        help="worker threads (default: SMOOTHSUMS_THREADS or 1); results are thread-count independent",
    )
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("plot", help="standalone SVG of ratio vs u with CI whiskers and the predicted curve")
    p.add_argument("--x", type=_positive_int, required=True)
    p.add_argument("--u", default="1,2,3,4,5,6")
    p.add_argument("--output", required=True, help="SVG output path")
    p.add_argument("--seed", type=_seed_int, default=42)
    p.add_argument("--samples", type=_positive_int, default=2000)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("check", help="run the acceptance checks; exits 1 if any fails")
    p.add_argument("--only", help="comma-separated criterion ids, e.g. 1,3,8")
    p.add_argument("--quick", action="store_true", help="reduced sample counts (smoke mode)")
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--output", help="also write a JSON artifact of the results")
    p.add_argument("--stamp", action="store_true")
    p.set_defaults(func=_cmd_check)

    return parser


def run(args: argparse.Namespace) -> int:
    """Execute a parsed configuration; exceptions map to documented exit codes."""
    return args.func(args)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    # A config file provides defaults; explicit flags override them.
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return 2
        if not isinstance(defaults, dict):
            print("error: config file must hold a JSON object of flag defaults", file=sys.stderr)
            return 2
        cleaned = {str(k).replace("-", "_"): v for k, v in defaults.items()}
        for action in parser._subparsers._group_actions:  # noqa: SLF001 - argparse internals
            for sp in action.choices.values():
                applicable = {
                    a.dest: cleaned[a.dest] for a in sp._actions if a.dest in cleaned  # noqa: SLF001
                }
                sp.set_defaults(**applicable)
                for a in sp._actions:  # noqa: SLF001
                    if a.dest in applicable:
                        a.required = False

    try:
        args = parser.parse_args(argv)
        return run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource-limit: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

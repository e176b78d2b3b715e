"""Command-line front end.

Every subcommand turns its flags into a list of flat records and writes them
as JSON lines or CSV.  Output depends only on the flags, so two runs with the
same flags are byte-identical.

Exit codes: 0 success, 2 precondition failure, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

from . import amplify, expsum, factor, fouvry, pell
from .errors import BudgetExceeded, PellsumsError, SquareInput
from .sieve import primes_between

DEFAULT_BUDGET = 10**8


# -- formatting ---------------------------------------------------------------


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


def to_json_lines(records) -> str:
    return "".join(
        json.dumps(_clean(r), separators=(",", ":"), allow_nan=False) + "\n" for r in records
    )


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(_clean(v), separators=(",", ":"))
    return str(v)


def to_csv(records) -> str:
    cols: list[str] = []
    for r in records:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if cols:
        w.writerow(cols)
    for r in records:
        w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _interval(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _check_budget(n: int, budget: int, what: str) -> None:
    if n > budget:
        raise BudgetExceeded(f"{what} = {n} exceeds budget {budget}")


# -- subcommands --------------------------------------------------------------


def cmd_pell_table(args):
    _check_budget(max(0, args.d_max - args.d_min + 1), args.budget, "range length")
    for D in range(max(args.d_min, 2), args.d_max + 1):
        try:
            s = pell.fundamental_solution(D)
        except SquareInput:
            continue
        yield {"D": D, "t": s.t, "u": s.u, "eps_log": s.eps_log}


def cmd_hooley_compare(args):
    for x in args.x:
        _check_budget(x, args.budget, "x")
        for alpha in args.alpha:
            c = pell.count_solutions(x, alpha, workers=args.workers)
            yield {
                "x": x,
                "alpha": alpha,
                "S_f": c.count_fundamental,
                "S": c.count_all_powers,
                "main_term": c.main_term,
                "ratio": c.count_fundamental / c.main_term,
            }


def cmd_kloosterman(args):
    _check_budget(args.N, args.budget, "N")
    for a in args.a:
        if args.complete:
            v = expsum.complete_square_character_sum(args.q, a)
            N = args.q - 1
        else:
            q = expsum.KloostermanQuery(args.q, a, args.N, frozenset(args.exclude))
            v = expsum.incomplete_kloosterman_sq(q)
            N = args.N
        yield {
            "q": args.q,
            "a": a,
            "N": N,
            "real": v.real_part,
            "imag": v.imag_part,
            "abs": abs(v),
            "term_count": v.term_count,
            "cancellation_ratio": v.cancellation_ratio,
        }


def cmd_exceptional_set(args):
    _check_budget(args.N, args.budget, "N")
    p = factor.ExceptionalParams(args.N, args.beta, args.r, not args.no_spacing, args.strict)
    E = factor.exceptional_set(p)
    row = {"kind": "summary", **E.summary()}
    row["bound"] = 5 * (E.lemma_budget + E.spacing_budget)
    row["within_bound"] = E.density <= row["bound"]
    yield row
    if args.list:
        for n in E.members().tolist():
            yield {"kind": "member", "n": n}


def cmd_partition_check(args):
    _check_budget(args.N, args.budget, "N")
    p = factor.ExceptionalParams(args.N, args.beta, args.r, True, args.strict)
    for a in args.a:
        res = factor.partition_sums(p, args.q, a)
        yield {
            "N": args.N,
            "beta": args.beta,
            "r": args.r,
            "q": args.q,
            "a": a,
            "direct_real": res.direct.real_part,
            "direct_imag": res.direct.imag_part,
            "boxed_real": res.boxed.real,
            "boxed_imag": res.boxed.imag,
            "residual": res.residual,
            "terms": res.direct.term_count,
            "boxes": res.boxes,
            "pieces": res.pieces,
        }


def cmd_lemma2(args):
    if args.primes:
        sets = [args.primes] * args.ell
        scales = [max(args.primes)] * args.ell
        cases = [("explicit", sets, scales)]
    else:
        cases = []
        for M in args.M:
            ps = primes_between(M // 2 + 1, M)
            cases.append((f"M={M}", [ps] * args.ell, [M] * args.ell))
    for label, sets, scales in cases:
        inst = amplify.lemma2_enumerate(args.ell, sets, scales=scales, budget=args.budget)
        yield {
            "case": label,
            "ell": inst.ell,
            "primes": list(inst.prime_sets[0]),
            "solutions": inst.solutions,
            "matched": inst.matched,
            "bound": inst.bound,
            "dichotomy": inst.dichotomy_holds,
            "below_bound": inst.below_bound,
        }


def cmd_amplify_check(args):
    plan = amplify.make_plan(args.q, args.interval, args.rho, args.beta)
    rep = amplify.holder_amplification_check(plan, args.q, args.a, args.interval, budget=args.budget)
    yield {
        "kind": "summary",
        "q": args.q,
        "a": args.a,
        "r": plan.r,
        "beta_i": list(plan.beta_i),
        "ell_i": list(plan.ell_i),
        "plan_violations": plan.violations(),
        "S_abs": rep.S_abs,
        "exponent": rep.exponent,
        "log_lhs": rep.log_lhs,
        "log_rhs": rep.log_rhs,
        "holder_holds": rep.holds,
    }
    for d in rep.densities:
        yield {"kind": "density", **asdict(d)}


def cmd_cancellation(args):
    rep = amplify.proposition_cancellation(
        args.q, args.rho, args.beta, args.r, args.samples, seed=args.seed
    )
    yield {
        "kind": "header",
        "q": args.q,
        "rho": args.rho,
        "beta": args.beta,
        "r": args.r,
        "samples": args.samples,
        "seed": rep.seed,
        "generator": "random.Random",
    }
    for a, ratio in rep.samples:
        yield {"kind": "sample", "a": a, "ratio": ratio}
    yield {
        "kind": "summary",
        "N": rep.N,
        "terms": rep.terms,
        "exceptional_density": rep.exceptional_density,
        "in_proposition_range": rep.in_proposition_range,
        "max_ratio": rep.max_ratio,
        "median_ratio": rep.median_ratio,
    }


def cmd_coefficients(args):
    for alpha in args.alpha:
        c = fouvry.coefficient_table(alpha)
        yield {
            "alpha": alpha,
            "B": c.B_alpha,
            "B_low": c.branches["low"],
            "B_mid": c.branches["mid"],
            "B_high": c.branches["high"],
            "hooley_factor": c.hooley_factor,
            "fouvry_lower_06": c.fouvry_lower_06,
            "fouvry_lower_319": c.fouvry_lower_319,
            "lower_bound_gap": c.lower_bound_gap,
            "discrepancy": abs(c.lower_bound_gap) > 1e-12,
            "conjectured_linear": c.conjectured_linear,
        }


def cmd_region_term(args):
    for alpha in args.alpha:
        row = {"x": args.x, "alpha": alpha, "main_term": fouvry.admissible_main_term(args.x, alpha)}
        if args.beta is not None:
            d = fouvry.excluded_deficit(args.x, alpha, args.beta, args.r)
            row.update(
                beta=args.beta,
                r=args.r,
                deficit=d.deficit,
                deficit_reference=d.reference,
                deficit_ratio=d.ratio,
                fitted_C=d.fitted_C,
            )
        yield row


def cmd_probe_trilinear(args):
    n = (args.u1[1] - args.u1[0] + 1) * (args.u2[1] - args.u2[0] + 1) * args.h_max
    _check_budget(n, args.budget, "probe size")
    rep = fouvry.restricted_bound_probe(args.u1, args.u2, args.beta, args.r, args.h_max)
    for row in rep.rows:
        yield {"kind": "row", **asdict(row)}
    yield {"kind": "summary", "excluded": rep.excluded, "total": rep.total}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="work cap")
    common.add_argument("--seed", type=int, default=amplify.DEFAULT_SEED)

    parser = argparse.ArgumentParser(prog="pellsums", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("pell-table", cmd_pell_table, "fundamental Pell solutions for a D range")
    p.add_argument("--d-min", type=int, default=2)
    p.add_argument("--d-max", type=int, required=True)

    p = add("hooley-compare", cmd_hooley_compare, "S^f(x, alpha) against the predicted main term")
    p.add_argument("--x", type=int, nargs="+", required=True)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.5])
    p.add_argument("--workers", type=int, default=1)

    p = add("kloosterman", cmd_kloosterman, "incomplete or complete sums of e_q(a x^-2)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, nargs="+", default=[1])
    p.add_argument("--N", type=int, default=0)
    p.add_argument("--exclude", type=int, nargs="*", default=[])
    p.add_argument("--complete", action="store_true")

    p = add("exceptional-set", cmd_exceptional_set, "size of the exceptional set E")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--no-spacing", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--list", action="store_true", help="also emit every member of E")

    p = add("partition-check", cmd_partition_check, "direct sum vs. sum over boxes")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, nargs="+", default=[1])
    p.add_argument("--strict", action="store_true")

    p = add("lemma2", cmd_lemma2, "exact count of the rational reciprocal-square equation")
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--M", type=int, nargs="+", default=[20, 50])
    p.add_argument("--primes", type=int, nargs="*")

    p = add("amplify-check", cmd_amplify_check, "Holder step and density norms")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--interval", type=_interval, nargs="+", required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.05)

    p = add("cancellation", cmd_cancellation, "measured cancellation outside E")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--samples", type=int, default=50)

    p = add("coefficients", cmd_coefficients, "B(alpha) and the lower-bound coefficients")
    p.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 2.5])

    p = add("region-term", cmd_region_term, "admissible main term and excluded deficit")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.6])
    p.add_argument("--beta", type=float)
    p.add_argument("--r", type=int, default=3)

    p = add("probe-trilinear", cmd_probe_trilinear, "restricted inner sums vs. (h, u1^2)/U2")
    p.add_argument("--u1", type=_interval, required=True)
    p.add_argument("--u2", type=_interval, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--h-max", type=int, default=10)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        records = list(args.func(args))
    except BudgetExceeded as exc:
        print(f"pellsums: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (PellsumsError, ValueError) as exc:
        print(f"pellsums: {exc}", file=sys.stderr)
        return 2
    text = to_csv(records) if args.format == "csv" else to_json_lines(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Every subcommand accepts ``--format {csv,json}`` and ``--seed``; CSV output
is header-first with LF line endings, JSON output wraps rows in a
top-level ``"records"`` list.  Re-running a command with identical
parameters and seed produces byte-identical output.  Exit codes: 0 on
success, 2 on argument/validation problems, 3 when a verification command
finds an internal mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from itertools import product

from . import __version__
from .adversary import build_canonical_fork, verify_canonical
from .charstring import BernoulliParams, CharString
from .errors import SettleprobError, WitnessMismatch
from .exactprob import finite_reach_pmf, prob_nonneg_margin_grid, stationary_pmf
from .fork import brute_all
from .game import monte_carlo_insecurity, run_game, CanonicalAdversary
from .gfbounds import (
    azuma_forkable_bound,
    azuma_relative_bound,
    convergence_radius,
    forkable_tail_bound,
    relative_tail_bound,
)
from .margin import margins_all_splits, mu, relative_margin, rho

DEFAULT_ALPHAS = "0.05:0.05:0.40"
DEFAULT_KS = "50:50:1000"


def _parse_grid(spec: str, cast=float) -> list:
    """Either a comma list ("0.1,0.2") or start:step:stop inclusive."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad grid {spec!r}")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(cast(round(v, 10)))
            v += step
        return out
    return [cast(p) for p in spec.split(",") if p.strip()]


def _emit(records: list[dict], fieldnames: list[str], args, meta: dict) -> None:
    if args.format == "json":
        doc = {"command": meta["command"], "version": __version__, "params": meta.get("params", {}), "records": records}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: rec.get(k, "") for k in fieldnames})
        sys.stdout.write(buf.getvalue())


def _fmt(v: float, precision: int) -> str:
    return f"{v:.{precision}e}"


def _initial_pmf(spec: str, alpha: float):
    if spec == "stationary":
        return stationary_pmf(1.0 - 2.0 * alpha)
    if spec.startswith("finite:"):
        return finite_reach_pmf(int(spec.split(":", 1)[1]), alpha)
    raise ValueError(f"unknown initial pmf {spec!r} (use 'stationary' or 'finite:M')")


def cmd_exact_table(args) -> int:
    alphas = _parse_grid(args.alphas, float)
    ks = _parse_grid(args.ks, int)
    table: dict[float, dict[int, float]] = {}
    for a in alphas:
        table[a] = prob_nonneg_margin_grid(ks, a, initial=_initial_pmf(args.init, a))
    if args.format == "json":
        records = [
            {"alpha": a, "k": k, "prob": table[a][k], "init": args.init}
            for a in alphas
            for k in ks
        ]
        _emit(records, [], args, {"command": "exact-table", "params": {"init": args.init}})
    else:
        # Wide layout: one row per k, one column per alpha.
        fieldnames = ["k"] + [f"{a:g}" for a in alphas]
        records = []
        for k in ks:
            row = {"k": k}
            for a in alphas:
                row[f"{a:g}"] = _fmt(table[a][k], args.precision)
            records.append(row)
        _emit(records, fieldnames, args, {"command": "exact-table"})
    return 0


def _render_logplot(records, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    by_alpha: dict[float, list[tuple[int, float]]] = {}
    for r in records:
        by_alpha.setdefault(r["alpha"], []).append((r["k"], r["log10_prob"]))
    for a in sorted(by_alpha):
        pts = sorted(by_alpha[a])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=2.5, label=f"alpha={a:g}")
    ax.set_xlabel("k")
    ax.set_ylabel("log10 Pr[settlement failure]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_logplot_data(args) -> int:
    alphas = _parse_grid(args.alphas, float)
    ks = _parse_grid(args.ks, int)
    records = []
    for a in alphas:
        grid = prob_nonneg_margin_grid(ks, a, initial=_initial_pmf(args.init, a))
        for k in ks:
            p = grid[k]
            records.append({"alpha": a, "k": k, "log10_prob": math.log10(p) if p > 0 else float("-inf")})
    if args.plot:
        _render_logplot(records, args.plot)
    out = [
        {"alpha": f"{r['alpha']:g}", "k": r["k"], "log10_prob": f"{r['log10_prob']:.{args.precision}f}"}
        for r in records
    ]
    if args.format == "json":
        _emit(
            [{"alpha": r["alpha"], "k": r["k"], "log10_prob": r["log10_prob"]} for r in records],
            [],
            args,
            {"command": "logplot-data", "params": {"init": args.init}},
        )
    else:
        _emit(out, ["alpha", "k", "log10_prob"], args, {"command": "logplot-data"})
    return 0


def cmd_bound(args) -> int:
    eps = args.eps
    k = args.k
    if args.method == "gf":
        if args.kind == "forkable":
            value = forkable_tail_bound(k, eps, n=args.order)
        else:
            value = relative_tail_bound(k, eps, n=args.order)
        rec = {
            "kind": args.kind,
            "method": "gf",
            "eps": f"{eps:g}",
            "k": k,
            "bound": _fmt(value, args.precision),
            "radius": f"{convergence_radius(eps):.{args.precision}f}",
        }
    else:
        value = azuma_forkable_bound(k, eps) if args.kind == "forkable" else azuma_relative_bound(k, eps)
        rec = {
            "kind": args.kind,
            "method": "azuma",
            "eps": f"{eps:g}",
            "k": k,
            "bound": _fmt(value, args.precision),
            "radius": "",
        }
    _emit([rec], ["kind", "method", "eps", "k", "bound", "radius"], args, {"command": "bound"})
    return 0


def cmd_simulate(args) -> int:
    dist = BernoulliParams(alpha=args.alpha, n=args.T)
    result = monte_carlo_insecurity(
        dist, args.T, args.s, args.k, trials=args.trials, seed=args.seed, method=args.method
    )
    if args.emit_transcripts:
        os.makedirs(args.emit_transcripts, exist_ok=True)
        from .charstring import sample_bernoulli

        count = min(args.trials, args.max_transcripts)
        for i in range(count):
            w = sample_bernoulli(dist, args.seed + i)
            tr = run_game(w, CanonicalAdversary(), args.s, args.k)
            with open(os.path.join(args.emit_transcripts, f"trial{i:05d}.json"), "w") as fh:
                json.dump(tr.to_json(), fh, indent=2, sort_keys=True)
    rec = {
        "alpha": f"{args.alpha:g}",
        "T": args.T,
        "s": args.s,
        "k": args.k,
        "trials": result["trials"],
        "wins": result["wins"],
        "estimate": _fmt(result["estimate"], args.precision),
        "ci95_lo": _fmt(result["ci95"][0], args.precision),
        "ci95_hi": _fmt(result["ci95"][1], args.precision),
        "method": result["method"],
        "seed": args.seed,
    }
    _emit(
        [rec],
        ["alpha", "T", "s", "k", "trials", "wins", "estimate", "ci95_lo", "ci95_hi", "method", "seed"],
        args,
        {"command": "simulate"},
    )
    return 0


def cmd_margin(args) -> int:
    w = CharString.parse(args.string)
    m = args.split
    if not (0 <= m <= len(w)):
        raise ValueError(f"split must lie in 0..{len(w)}")
    rec = {
        "string": str(w),
        "split": m,
        "rho": rho(w),
        "mu": relative_margin(w.prefix(m), w.suffix(m)),
        "forkable": mu(w) >= 0,
    }
    _emit([rec], ["string", "split", "rho", "mu", "forkable"], args, {"command": "margin"})
    return 0


def cmd_canonical(args) -> int:
    w = CharString.parse(args.string)
    result = build_canonical_fork(w)
    notes = verify_canonical(result)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(result.fork.to_dot(w) + "\n")
    margins = margins_all_splits(w)
    records = []
    for m in range(len(w)):
        rv, mv = result.witnesses[m]
        records.append(
            {
                "split": m,
                "mu": margins[m],
                "rho": margins[len(w)],
                "witness_rho_vertex": rv,
                "witness_mu_vertex": mv,
            }
        )
    _emit(
        records,
        ["split", "mu", "rho", "witness_rho_vertex", "witness_mu_vertex"],
        args,
        {"command": "canonical", "params": {"string": str(w), "notes": notes, "vertices": len(result.fork)}},
    )
    return 0


def cmd_verify(args) -> int:
    """Cross-check brute force, recursion, and canonical forks on all short strings."""
    max_len = args.max_len
    if max_len > 8:
        print("verify-recursion caps max-len at 8", file=sys.stderr)
        return 2
    checked = 0
    for n in range(max_len + 1):
        for bits in product((0, 1), repeat=n):
            b_rho, b_margins = brute_all(bits)
            rec_margins = margins_all_splits(bits)
            for m in range(n + 1):
                if b_margins[m] != rec_margins[m]:
                    print(
                        f"mismatch: w={''.join(map(str, bits))} split={m} "
                        f"brute={b_margins[m]} recursion={rec_margins[m]}",
                        file=sys.stderr,
                    )
                    return 3
            if b_rho != rho(bits):
                print(f"mismatch: w={''.join(map(str, bits))} brute rho={b_rho} recursion={rho(bits)}", file=sys.stderr)
                return 3
            result = build_canonical_fork(bits)
            try:
                verify_canonical(result)
            except WitnessMismatch as exc:
                print(f"canonical mismatch: w={''.join(map(str, bits))}: {exc}", file=sys.stderr)
                return 3
            checked += 1
    _emit(
        [{"max_len": max_len, "strings_checked": checked, "status": "ok"}],
        ["max_len", "strings_checked", "status"],
        args,
        {"command": "verify-recursion"},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="settleprob", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--precision", type=int, default=6)

    p = sub.add_parser("exact-table", help="exact settlement-failure probability grid")
    common(p)
    p.add_argument("--alphas", default=DEFAULT_ALPHAS)
    p.add_argument("--ks", default=DEFAULT_KS)
    p.add_argument("--init", default="stationary", help="'stationary' or 'finite:M'")
    p.set_defaults(func=cmd_exact_table)

    p = sub.add_parser("logplot-data", help="log10 probabilities for plotting; optionally render the figure")
    common(p)
    p.add_argument("--alphas", default=DEFAULT_ALPHAS)
    p.add_argument("--ks", default=DEFAULT_KS)
    p.add_argument("--init", default="stationary")
    p.add_argument("--plot", metavar="PATH", default=None, help="render a matplotlib figure to this file")
    p.set_defaults(func=cmd_logplot_data)

    p = sub.add_parser("bound", help="generating-function or Azuma tail bounds")
    common(p)
    p.add_argument("--kind", choices=("relative", "forkable"), default="relative")
    p.add_argument("--method", choices=("gf", "azuma"), default="gf")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--order", type=int, default=None, help="series truncation order (gf only)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="Monte-Carlo insecurity of the optimal adversary")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--method", choices=("walk", "game"), default="walk")
    p.add_argument("--emit-transcripts", metavar="DIR", default=None)
    p.add_argument("--max-transcripts", type=int, default=100)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("margin", help="reach and relative margin of one string")
    common(p)
    p.add_argument("string")
    p.add_argument("--split", type=int, default=0)
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("canonical", help="build and verify the canonical fork for a string")
    common(p)
    p.add_argument("string")
    p.add_argument("--dot", metavar="PATH", default=None, help="write Graphviz output here")
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("verify-recursion", help="brute force vs recursion vs canonical forks")
    common(p)
    p.add_argument("--max-len", type=int, default=6)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SettleprobError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

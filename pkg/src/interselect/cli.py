"""Command-line entry point: generate data, run searches, evaluate formulas.

Commands
--------
generate   sample a synthetic dataset from a (default or custom) ground truth
search     run priority / forward / backward selection (or all three)
evaluate   fit one user-supplied formula and report the full fit summary

Every command is deterministic given its flags and seed; wall-clock runtime
fields are the only non-reproducible report content. Errors print a single
machine-parsable ``error[code]: message`` line on stderr and exit nonzero.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from .design import Term, build_design
from .formula import FormulaError, parse_formula, render_formula
from .ols import fit
from .search import (
    PriorConfig,
    StoppingRule,
    backward_elimination,
    columns_to_formula,
    forward_selection,
    priority_search,
)
from .synthgen import (
    default_ground_truth,
    generate,
    load_ground_truth,
    save_ground_truth,
    with_noise,
)
from .tabular import load_csv, write_csv


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _load_table(args):
    if args.data is None:
        raise CliError("config", "--data is required")
    try:
        return load_csv(args.data, args.target)
    except FileNotFoundError:
        raise CliError("io", f"data file not found: {args.data}") from None
    except ValueError as exc:
        raise CliError("data", str(exc)) from None


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_generate(args) -> int:
    try:
        truth = (
            load_ground_truth(args.truth) if args.truth else default_ground_truth()
        )
    except FileNotFoundError:
        raise CliError("io", f"truth file not found: {args.truth}") from None
    except (ValueError, KeyError, FormulaError) as exc:
        raise CliError("data", f"malformed truth file: {exc}") from None
    if args.noise is not None:
        if args.noise < 0:
            raise CliError("config", "--noise must be non-negative")
        truth = with_noise(truth, args.noise)
    try:
        table = generate(truth, args.n, args.seed)
    except ValueError as exc:
        raise CliError("config", str(exc)) from None

    out = Path(args.out)
    truth_out = Path(args.truth_out) if args.truth_out else out.with_suffix(
        out.suffix + ".truth.json"
    )
    try:
        write_csv(table, out)
        save_ground_truth(truth, truth_out, seed=args.seed)
    except OSError as exc:
        raise CliError("io", f"cannot write output: {exc}") from None

    print(f"wrote {table.n} rows x {len(table.schema.features)} features to {out}")
    print(f"ground truth: {truth.formula()} -> {truth_out}")
    if table.n >= 2:
        base_spec = [Term.base(f) for f in table.schema.feature_names]
        r2_base = fit(build_design(table, base_spec), table.target).r_squared
        r2_true = fit(build_design(table, truth.used_terms), table.target).r_squared
        print(f"R^2 base features only: {r2_base:.4f}")
        print(f"R^2 true model:         {r2_true:.4f}")
    return 0


def _search_config(args) -> dict:
    return {
        "data": str(args.data),
        "target": args.target,
        "method": args.method,
        "iterations": args.iterations,
        "seed": args.seed,
        "threads": args.threads,
        "alpha": args.alpha,
        "aic_abs_jump": args.aic_abs,
        "aic_rel_jump": args.aic_rel,
        "k_probs": list(args.k_probs),
        "p_base": args.p_base,
    }


def _run_method(method: str, table, args) -> dict:
    start = time.perf_counter()
    if method == "priority":
        prior = PriorConfig(
            iterations=args.iterations,
            seed=args.seed,
            k_probs=args.k_probs,
            p_base=args.p_base,
        )
        spec, res, trace = priority_search(table, prior, threads=args.threads)
        formula = render_formula(table.schema.target, spec.terms)
    else:
        rule = StoppingRule(
            alpha=args.alpha, aic_abs_jump=args.aic_abs, aic_rel_jump=args.aic_rel
        )
        run = forward_selection if method == "forward" else backward_elimination
        selected, res, trace = run(table, rule, threads=args.threads)
        formula = columns_to_formula(selected, trace.design)
    runtime = time.perf_counter() - start
    config = _search_config(args)
    config["method"] = method
    return {
        "report": {
            "method": method,
            "formula": formula,
            "r2": res.r_squared,
            "mse": res.mse,
            "aic": res.aic,
            "log_likelihood": res.log_likelihood,
            "runtime_seconds": runtime,
            "seed": args.seed,
            "config": config,
        },
        "trace": trace,
    }


def _render_comparison(reports: list[dict]) -> str:
    rows = [
        ("method", lambda r: r["method"]),
        ("formula", lambda r: r["formula"]),
        ("r2", lambda r: f"{r['r2']:.4f}"),
        ("mse", lambda r: f"{r['mse']:.6g}"),
        ("aic", lambda r: f"{r['aic']:.6g}"),
        ("log_likelihood", lambda r: f"{r['log_likelihood']:.6g}"),
        ("runtime_seconds", lambda r: f"{r['runtime_seconds']:.2f}"),
    ]
    label_w = max(len(name) for name, _ in rows)
    col_w = [
        max(len(render(r)) for _, render in rows) for r in reports
    ]
    lines = []
    for name, render in rows:
        cells = [render(r).ljust(col_w[i]) for i, r in enumerate(reports)]
        lines.append(f"{name.ljust(label_w)}  " + "  ".join(cells))
    return "\n".join(lines)


def cmd_search(args) -> int:
    try:  # validate configuration before touching any data
        PriorConfig(
            iterations=args.iterations,
            seed=args.seed,
            k_probs=args.k_probs,
            p_base=args.p_base,
        )
        StoppingRule(
            alpha=args.alpha, aic_abs_jump=args.aic_abs, aic_rel_jump=args.aic_rel
        )
    except ValueError as exc:
        raise CliError("config", str(exc)) from None
    if args.threads < 1:
        raise CliError("config", "--threads must be positive")

    table = _load_table(args)
    methods = (
        ["priority", "forward", "backward"] if args.method == "all" else [args.method]
    )
    out = Path(args.out)
    reports = []
    for method in methods:
        outcome = _run_method(method, table, args)
        trace_path = out.with_suffix(f".{method}.trace.jsonl")
        outcome["trace"].save_jsonl(trace_path)
        reports.append(outcome["report"])

    payload = {"methods": reports} if args.method == "all" else reports[0]
    try:
        _write_json(out, payload)
    except OSError as exc:
        raise CliError("io", f"cannot write report: {exc}") from None
    print(_render_comparison(reports))
    print(f"report -> {out}")
    return 0


def cmd_evaluate(args) -> int:
    table = _load_table(args)
    try:
        _, spec = parse_formula(args.formula, table.schema)
    except FormulaError as exc:
        raise CliError("formula", str(exc)) from None
    res = fit(build_design(table, spec), table.target)
    report = {
        "formula": render_formula(table.schema.target, spec.terms),
        "data": str(args.data),
        "fit": res.to_dict(),
    }
    print(json.dumps(report, indent=2))
    if args.out:
        try:
            _write_json(args.out, report)
        except OSError as exc:
            raise CliError("io", f"cannot write report: {exc}") from None
    return 0


def _parse_k_probs(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated probabilities, got {text!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interselect",
        description=(
            "Automated linear-model selection over categorical data with "
            "second-order feature interactions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--target", default="S", help="target column name")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    common(gen)
    gen.add_argument("--n", type=int, default=2000, help="number of rows")
    gen.add_argument("--noise", type=float, default=None, help="noise sigma override")
    gen.add_argument("--truth", default=None, help="ground-truth JSON to use")
    gen.add_argument("--out", default="data.csv", help="output CSV path")
    gen.add_argument("--truth-out", default=None, help="ground-truth JSON output path")
    gen.set_defaults(func=cmd_generate)

    srch = sub.add_parser("search", help="run model selection")
    common(srch)
    srch.add_argument("--data", required=True, help="input CSV path")
    srch.add_argument(
        "--method",
        choices=["priority", "forward", "backward", "all"],
        default="all",
    )
    srch.add_argument("--iterations", type=int, default=5000)
    srch.add_argument("--alpha", type=float, default=0.01)
    srch.add_argument("--k-probs", type=_parse_k_probs, default=(0.2, 0.4, 0.4))
    srch.add_argument("--p-base", type=float, default=0.75)
    srch.add_argument("--aic-abs", type=float, default=20.0)
    srch.add_argument("--aic-rel", type=float, default=0.01)
    srch.add_argument("--out", default="search_result.json", help="report JSON path")
    srch.set_defaults(func=cmd_search)

    ev = sub.add_parser("evaluate", help="fit a single formula")
    common(ev)
    ev.add_argument("--data", required=True, help="input CSV path")
    ev.add_argument("--formula", required=True, help='e.g. "S ~ C + E + G*M"')
    ev.add_argument("--out", default=None, help="optional report JSON path")
    ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

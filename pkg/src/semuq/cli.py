"""Command-line driver: cluster, score, evaluate, sweep-lambda,
worked-example, validate.

Exit codes: 0 success, 1 input/output or usage error, 2 golden-value
mismatch, 3 undefined metric.  Flag values override config-file values,
which override built-in defaults.  All numbers are printed with 5 decimal
places and written to files at full precision.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

from semuq.clustering import assign_clusters, clustering_from_records
from semuq.errors import ParameterError, SemuqError, UndefinedMetricError, ValidationError
from semuq.metrics import evaluate_method, lambda_curve_csv, rac_curve_csv, sweep_lambda
from semuq.pipeline import (
    DEFAULT_METHODS,
    METHOD_FIELDS,
    RunConfig,
    canonical_method,
    load_scorecards,
    make_backend,
    prepare_bundle,
    save_scorecards,
    scenario_win_rates,
    score_bundle,
)
from semuq.records import load_bundles, save_bundles
from semuq.worked_example import check_goldens, compute_worked_example, render_table

EXIT_OK = 0
EXIT_IO = 1
EXIT_GOLDEN = 2
EXIT_UNDEFINED_METRIC = 3

DEFAULT_SWEEP_GRID = "0.01,0.1,1,10,100,inf"


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1; exit 2 is reserved for golden mismatches."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--lambda", dest="lambda_", type=float, help="calibration weight")
    parser.add_argument("--sigma", type=float, help="kernel bandwidth")
    parser.add_argument("--spins", type=int, help="grid size exponent (grid has 2**spins points)")
    parser.add_argument("--m-adj", dest="m_adj", type=int, help="adjacent modes averaged per score")
    parser.add_argument("--epsilon", type=float, help="perturbation magnitude")
    parser.add_argument("--base", dest="log_base", choices=["10", "e"], help="entropy log base")
    parser.add_argument(
        "--backend", choices=["exact-match", "external", "recorded"],
        help="entailment backend",
    )
    parser.add_argument("--endpoint", help="entailment service URL (external backend)")
    parser.add_argument("--seed", type=int, help="seed for the random perturbation direction")
    parser.add_argument("--verbose", action="store_true", help="log per-bundle progress")


def _read_config_file(path: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            mapping[key.strip()] = value.strip()
    return mapping


_FLAG_KEYS = (
    "lambda_", "sigma", "spins", "m_adj", "epsilon", "log_base",
    "backend", "endpoint", "seed",
)


def _resolve_config(
    args: argparse.Namespace, defaults: dict[str, Any] | None = None
) -> RunConfig:
    mapping: dict[str, Any] = dict(defaults or {})
    if getattr(args, "config", None):
        mapping.update(_read_config_file(args.config))
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            mapping["lambda" if key == "lambda_" else key] = value
    return RunConfig.from_mapping(mapping)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="semuq",
        description="Confabulation-risk scoring for sampled LLM answers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", parents=[], help="assign semantic clusters", add_help=True)
    p.add_argument("--input", required=True, help="bundles JSONL to read")
    p.add_argument("--output", required=True, help="bundles JSONL to write with cluster ids")
    _add_run_options(p)

    p = sub.add_parser("score", help="score bundles end to end")
    p.add_argument("--input", required=True, help="bundles JSONL to read")
    p.add_argument("--output", required=True, help="scorecards JSONL to write")
    _add_run_options(p)

    p = sub.add_parser("evaluate", help="evaluate scorecards against labels")
    p.add_argument("--input", required=True, help="scorecards JSONL to read")
    p.add_argument("--labels", required=True, help="labeled bundles JSONL")
    p.add_argument(
        "--methods", default=",".join(DEFAULT_METHODS),
        help="comma-separated method names",
    )
    p.add_argument("--output", help="evaluation report JSON (default: stdout)")
    p.add_argument("--rac-csv", dest="rac_csv", help="path prefix for per-method RAC CSVs")
    _add_run_options(p)

    p = sub.add_parser("sweep-lambda", help="AUROC across calibration weights")
    p.add_argument("--input", required=True, help="labeled bundles JSONL")
    p.add_argument(
        "--lambdas", default=DEFAULT_SWEEP_GRID,
        help=f"comma-separated weights (default {DEFAULT_SWEEP_GRID})",
    )
    p.add_argument("--output", help="sweep result JSON (default: stdout)")
    p.add_argument("--csv", help="sweep curve CSV path")
    _add_run_options(p)

    p = sub.add_parser("worked-example", help="print the built-in worked example")
    p.add_argument("--base", dest="log_base", choices=["10", "e"], default="10")
    p.add_argument("--nudge", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("validate", help="check a bundles file and report counts")
    p.add_argument("--input", required=True, help="bundles JSONL to read")

    return parser


def _load_bundles_checked(path: str):
    try:
        bundles = load_bundles(path)
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err}") from err
    if not bundles:
        raise ValidationError(f"{path} contains no bundles")
    return bundles


def cmd_cluster(args: argparse.Namespace) -> int:
    # this command exists to assign clusters, so it defaults to a real backend
    config = _resolve_config(args, defaults={"backend": "exact-match"})
    bundles = _load_bundles_checked(args.input)
    backend = make_backend(config)
    for bundle in bundles:
        if backend is None:
            clustering = clustering_from_records(bundle)
        else:
            clustering = assign_clusters(bundle, backend)
        for cluster in clustering.clusters:
            for i in cluster.member_indices:
                bundle.generations[i].cluster_id = cluster.cluster_id
    save_bundles(bundles, args.output)
    sizes = [max(g.cluster_id for g in b.generations) + 1 for b in bundles]
    print(
        f"clustered {len(bundles)} bundles; cluster counts "
        f"{min(sizes)}..{max(sizes)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    bundles = _load_bundles_checked(args.input)
    cards = []
    n_failed = 0
    for bundle in bundles:
        try:
            cards.append(score_bundle(bundle, config))
        except SemuqError as err:
            n_failed += 1
            print(f"skipping {bundle.question_id}: {err}", file=sys.stderr)
    if not cards:
        print("no bundle could be scored", file=sys.stderr)
        return EXIT_IO
    save_scorecards(cards, args.output)
    print(
        f"scored {len(cards)} of {len(bundles)} bundles"
        + (f" ({n_failed} failed)" if n_failed else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        cards = load_scorecards(args.input)
    except OSError as err:
        raise ValidationError(f"cannot read {args.input}: {err}") from err
    if not cards:
        raise ValidationError(f"{args.input} contains no scorecards")
    bundles = _load_bundles_checked(args.labels)
    by_id = {b.question_id: b for b in bundles}
    methods = [canonical_method(m.strip()) for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ParameterError("need at least one method")

    usable = []
    n_skipped = 0
    for card in cards:
        bundle = by_id.get(card.question_id)
        if bundle is None:
            raise ValidationError(
                f"scorecard {card.question_id!r} has no bundle in {args.labels}"
            )
        if not bundle.fully_labeled():
            n_skipped += 1
            continue
        usable.append(card)
    if not usable:
        raise ValidationError("no labeled scorecards to evaluate")
    labels = [
        bool(by_id[c.question_id].generations[c.selected_index].is_correct)
        for c in usable
    ]

    reports = []
    for key in methods:
        scores = [getattr(c.report, METHOD_FIELDS[key]) for c in usable]
        reports.append(evaluate_method(key, scores, labels, n_skipped_unlabeled=n_skipped))
    win = (
        scenario_win_rates(usable, by_id, labels, methods) if len(methods) >= 2 else None
    )

    payload = {
        "reports": [r.to_json_dict() for r in reports],
        "win_rates": win.to_json_dict() if win is not None else None,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.rac_csv:
        for report in reports:
            path = f"{args.rac_csv}{report.method_name}.csv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(rac_curve_csv(report.rac))
    for report in reports:
        print(
            f"{report.method_name}: auroc {report.auroc:.5f} aurac {report.aurac:.5f}",
            file=sys.stderr,
        )
    return EXIT_OK


def _parse_lambdas(text: str) -> list[float]:
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            values.append(float(token))
        except ValueError:
            raise ParameterError(f"bad calibration weight {token!r}") from None
    if not values:
        raise ParameterError("empty lambda grid")
    return values


def cmd_sweep_lambda(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    bundles = _load_bundles_checked(args.input)
    labeled = [b for b in bundles if b.fully_labeled()]
    if not labeled:
        raise ValidationError("sweep needs labeled bundles")
    prepared = [prepare_bundle(b, config) for b in labeled]
    result = sweep_lambda(
        [p.bundle for p in prepared],
        [p.clustering for p in prepared],
        [p.uq_scores for p in prepared],
        _parse_lambdas(args.lambdas),
        base=10 if config.log_base == "10" else "e",
    )
    text = json.dumps(result.to_json_dict(), indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(lambda_curve_csv(result))
    print(
        f"best lambda {result.best_lambda:g} (auroc {result.best_auroc:.5f}); "
        f"uncalibrated baseline auroc {result.baseline_auroc:.5f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_worked_example(args: argparse.Namespace) -> int:
    result = compute_worked_example(
        base=10 if args.log_base == "10" else "e", raw_nudge=args.nudge
    )
    print(render_table(result))
    checks = check_goldens(result)
    failed = [c for c in checks if not c.ok]
    if failed:
        print("golden mismatches:")
        for c in failed:
            print(
                f"  {c.name}: got {c.got:.5f}, want {c.want:.5f} "
                f"(tolerance {c.tolerance:g})"
            )
        return EXIT_GOLDEN
    print(f"all {len(checks)} golden values within tolerance")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    bundles = _load_bundles_checked(args.input)
    n_generations = sum(len(b.generations) for b in bundles)
    n_labeled = sum(1 for b in bundles if b.fully_labeled())
    print(
        f"{len(bundles)} bundles, {n_generations} generations, "
        f"{n_labeled} fully labeled: ok"
    )
    return EXIT_OK


_COMMANDS = {
    "cluster": cmd_cluster,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "sweep-lambda": cmd_sweep_lambda,
    "worked-example": cmd_worked_example,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except UndefinedMetricError as err:
        print(f"semuq: undefined metric: {err}", file=sys.stderr)
        return EXIT_UNDEFINED_METRIC
    except SemuqError as err:
        print(f"semuq: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"semuq: {err}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

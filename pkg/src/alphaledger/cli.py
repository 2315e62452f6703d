"""Command-line entry point.

Subcommands:

* ``simulate`` -- synthetic procedure comparison, CSV out.
* ``theorem1`` -- subset-FDR check on random subsets of discoveries.
* ``replay`` -- run a recorded workflow file against a dataset.
* ``serve`` -- start the exploration-session HTTP service.

All ``simulate``/``theorem1`` flags can also come from a JSON config file
(``--config``); explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .dataset import load_dataset
from .simulate import (
    ExperimentConfig,
    ProcedureSpec,
    default_procedures,
    metrics_to_csv,
    replay_workflow,
    run_experiment,
    theorem1_check,
)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file with these same keys")
    parser.add_argument(
        "--procedure",
        action="append",
        dest="procedures",
        metavar="NAME[:k=v,...]",
        help="procedure spec, repeatable (e.g. fixed:gamma=10); default: the full lineup",
    )
    parser.add_argument("--m", type=int, help="hypotheses per run (default 64)")
    parser.add_argument("--null-prop", type=float, dest="null_prop",
                        help="proportion of true nulls (default 1.0)")
    parser.add_argument("--n-per-group", type=int, dest="n_per_group",
                        help="per-group sample size before scaling (default 10)")
    parser.add_argument("--effect-lo", type=float, dest="effect_lo",
                        help="smallest false-null mean difference (default 1.25)")
    parser.add_argument("--effect-hi", type=float, dest="effect_hi",
                        help="largest false-null mean difference (default 5.0)")
    parser.add_argument("--sample-fraction", type=float, dest="sample_fraction",
                        help="support scaling applied to each sample (default 1.0)")
    parser.add_argument("--reps", type=int, help="repetitions (default 1000)")
    parser.add_argument("--alpha", type=float, help="target level (default 0.05)")
    parser.add_argument("--seed", type=int, help="base RNG seed (default 0)")
    parser.add_argument("--workers", type=int, help="parallel workers (default 1)")


def _merge_config(args: argparse.Namespace) -> dict:
    merged: dict = {}
    if args.config:
        merged.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    for key in (
        "procedures", "m", "null_prop", "n_per_group", "effect_lo", "effect_hi",
        "sample_fraction", "reps", "alpha", "seed", "workers", "subset_fraction",
    ):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _experiment_config(merged: dict) -> ExperimentConfig:
    procedures = merged.get("procedures")
    if procedures:
        specs = tuple(
            p if isinstance(p, ProcedureSpec) else ProcedureSpec.parse(p) for p in procedures
        )
    else:
        specs = default_procedures()
    return ExperimentConfig(
        m=merged.get("m", 64),
        null_proportion=merged.get("null_prop", 1.0),
        n_per_group=merged.get("n_per_group", 10),
        effect_range=(merged.get("effect_lo", 1.25), merged.get("effect_hi", 5.0)),
        sample_fraction=merged.get("sample_fraction", 1.0),
        repetitions=merged.get("reps", 1000),
        seed=merged.get("seed", 0),
        alpha=merged.get("alpha", 0.05),
        procedures=specs,
        workers=merged.get("workers", 1),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _experiment_config(_merge_config(args))
    metrics = run_experiment(config)
    csv_text = metrics_to_csv(config, metrics)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_theorem1(args: argparse.Namespace) -> int:
    merged = _merge_config(args)
    config = _experiment_config(merged)
    fraction = merged.get("subset_fraction", 0.5)
    results = theorem1_check(config, fraction)
    payload = {
        "subset_fraction": fraction,
        "alpha": config.alpha,
        "procedures": results,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _read_labels(path: Path) -> list[Optional[bool]]:
    labels: list[Optional[bool]] = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        token = raw.strip().lower()
        if not token:
            continue
        if token in ("1", "true", "t", "yes"):
            labels.append(True)
        elif token in ("0", "false", "f", "no"):
            labels.append(False)
        else:
            labels.append(None)
    return labels


def _cmd_replay(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.dataset)
    workflow = [
        json.loads(line)
        for line in Path(args.workflow).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    labels = _read_labels(Path(args.labels)) if args.labels else None
    report = replay_workflow(
        dataset,
        workflow,
        ProcedureSpec.parse(args.procedure),
        alpha=args.alpha,
        sample_fraction=args.sample_fraction,
        labels=labels,
        seed=args.seed,
    )
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphaledger",
        description="False-discovery control for interactive data exploration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="synthetic procedure comparison")
    _add_experiment_flags(p_sim)
    p_sim.add_argument("--out", type=Path, help="CSV output path (default stdout)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_t1 = sub.add_parser("theorem1", help="subset FDR of random discovery subsets")
    _add_experiment_flags(p_t1)
    p_t1.add_argument("--subset-fraction", type=float, dest="subset_fraction",
                      help="probability each discovery enters the subset (default 0.5)")
    p_t1.add_argument("--out", type=Path, help="JSON output path (default stdout)")
    p_t1.set_defaults(func=_cmd_theorem1)

    p_rep = sub.add_parser("replay", help="replay a workflow file against a dataset")
    p_rep.add_argument("--dataset", required=True, type=Path, help="CSV dataset path")
    p_rep.add_argument("--workflow", required=True, type=Path,
                       help="JSON-lines workflow file (one hypothesis spec per line)")
    p_rep.add_argument("--procedure", required=True, metavar="NAME[:k=v,...]")
    p_rep.add_argument("--sample-fraction", type=float, dest="sample_fraction", default=1.0)
    p_rep.add_argument("--labels", type=Path, help="file with one 0/1 label per line")
    p_rep.add_argument("--alpha", type=float, default=0.05)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--out", type=Path, help="JSON output path (default stdout)")
    p_rep.set_defaults(func=_cmd_replay)

    p_srv = sub.add_parser("serve", help="start the exploration-session HTTP service")
    p_srv.add_argument("--port", type=int, default=8712)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--data-dir", dest="data_dir", default=".",
                       help="directory holding CSV datasets and session logs")
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

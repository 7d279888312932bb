"""Command-line benchmark harness.

Subcommands:
  run       execute the episode sweep of a scenario config, write CSV reports
  metrics   recompute the summary table from a saved episodes.csv
  validate  schema-check a scenario config file

``run`` and ``validate`` take a config path produced by
``ScenarioConfig.save`` (canonical JSON).  All failures exit nonzero after
printing one ``error: <reason>`` line to stderr.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from .bench import (
    ConfigError,
    ScenarioConfig,
    read_episodes,
    run_suite,
    summarize_rows,
    summary_csv,
)


def _summary_lines(task, summaries):
    for batch_size, m in summaries:
        yield (
            f"{task} batch={batch_size}: {m.n_success}/{m.n_runs} ok"
            f" ({m.success_rate_pct:.1f}%)"
            f" t_task {m.t_task_mean_s:.2f}+-{m.t_task_std_s:.2f} s"
            f" t_comp {m.t_comp_mean_s:.3f}+-{m.t_comp_std_s:.3f} s"
        )


def _cmd_run(args) -> int:
    config = ScenarioConfig.load(args.config)
    overrides = {}
    if args.batch_sizes:
        overrides["batch_sizes"] = tuple(args.batch_sizes)
    if args.runs is not None:
        overrides["n_runs"] = args.runs
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, **overrides)
    out = Path(args.out_dir)
    _, summaries = run_suite(config, out, workers=args.workers)
    for line in _summary_lines(config.task, summaries):
        print(line)
    print(f"wrote {out / 'episodes.csv'} and {out / 'summary.csv'}")
    return 0


def _cmd_metrics(args) -> int:
    rows = read_episodes(args.episodes)
    groups = summarize_rows(rows)
    tasks = sorted({task for task, _, _ in groups})
    texts = [
        summary_csv(task, [(b, m) for t, b, m in groups if t == task]) for task in tasks
    ]
    # one shared header even if the file mixes tasks
    header, body = texts[0].split("\n", 1)
    parts = [body] + [text.split("\n", 1)[1] for text in texts[1:]]
    text = header + "\n" + "".join(parts)
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_validate(args) -> int:
    config = ScenarioConfig.load(args.config)
    print(
        f"ok: task={config.task} batch_sizes={list(config.batch_sizes)}"
        f" n_runs={config.n_runs} master_seed={config.master_seed}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smppi", description="Sampling-based dual-arm planning benchmarks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the episode sweep of a scenario config")
    p_run.add_argument("config", help="scenario config JSON path")
    p_run.add_argument("out_dir", help="directory for episodes.csv / summary.csv")
    p_run.add_argument(
        "--batch-sizes", type=int, nargs="+", metavar="N",
        help="override the batch-size sweep",
    )
    p_run.add_argument("--runs", type=int, help="override the number of runs per batch size")
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument(
        "--workers", type=int, default=1,
        help="episode worker threads (results are identical for any value)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_metrics = sub.add_parser("metrics", help="recompute summaries from an episodes.csv")
    p_metrics.add_argument("episodes", help="episodes.csv path")
    p_metrics.add_argument("--out", help="write the summary CSV here instead of stdout")
    p_metrics.set_defaults(func=_cmd_metrics)

    p_validate = sub.add_parser("validate", help="schema-check a scenario config")
    p_validate.add_argument("config", help="scenario config JSON path")
    p_validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

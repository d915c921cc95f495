"""``arlcp`` command line: score, analyze, train-sim, eval."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .complexity import ConfigError
from .config import ToolkitConfig, load_config
from .metrics import EvalReport, MetricError, compute_eval_metrics
from .reports import (
    analyze,
    csv_text,
    eval_cases_from_records,
    measure_corpus,
    score_corpus,
    write_outputs,
)
from .sim_trainer import RewardMode, oracle_ranking, run_training, summarize
from .trace_model import (
    DEFAULT_LEXICON,
    InvalidRecordError,
    TraceParseError,
    load_lexicon,
    parse_trace_file,
)

log = logging.getLogger("arlcp")

EXIT_OK, EXIT_PARSE, EXIT_EMPTY, EXIT_CONFIG = 0, 2, 3, 4


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="JSON toolkit config file")
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--seed", type=int)
    g.add_argument("--n1", type=int)
    g.add_argument("--n2", type=int)
    g.add_argument("--lambda1", type=float)
    g.add_argument("--lambda2", type=float)
    g.add_argument("--lambda3", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--lexicon", dest="lexicon_path", help="trigger list, one phrase per line")
    g.add_argument("--emit-advantages", action="store_true",
                   help="add leave-one-out advantages (per prompt_id) to scored records")
    g.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="arlcp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="score a rollout corpus")
    p.add_argument("input")

    p = sub.add_parser("analyze", parents=[common], help="reflection statistics of a corpus")
    p.add_argument("input")
    p.add_argument("--bin-width", dest="rtc_bin_width", type=int)

    p = sub.add_parser("train-sim", parents=[common], help="run the synthetic trainer")
    p.add_argument("--steps", type=int)
    p.add_argument("--reward-mode", choices=[m.value for m in RewardMode])

    p = sub.add_parser("eval", parents=[common], help="pass@1 / length metrics")
    p.add_argument("input", help="scored records or raw rollouts (line-delimited)")
    p.add_argument("--baseline", help="baseline records file or eval_report.json")
    return parser


def _config(args) -> ToolkitConfig:
    keys = ("output_dir", "seed", "n1", "n2", "lambda1", "lambda2", "lambda3", "alpha",
            "lexicon_path", "rtc_bin_width")
    overrides = {k: getattr(args, k, None) for k in keys}
    cfg = load_config(args.config, overrides)
    steps, mode = getattr(args, "steps", None), getattr(args, "reward_mode", None)
    if cfg.sim is not None and (steps is not None or mode is not None):
        try:
            sim = cfg.sim
            if steps is not None:
                sim = replace(sim, steps=steps)
            if mode is not None:
                sim = replace(sim, reward_mode=RewardMode(mode))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg = replace(cfg, sim=sim)
    return cfg


def _lexicon(cfg: ToolkitConfig):
    if cfg.lexicon_path is None:
        return DEFAULT_LEXICON
    try:
        return load_lexicon(cfg.lexicon_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"bad lexicon {cfg.lexicon_path}: {exc}") from None


def _load_corpus(path):
    try:
        rollouts = parse_trace_file(path)
    except OSError as exc:
        raise CommandError(EXIT_PARSE, f"cannot read {path}: {exc}") from None
    if not rollouts:
        raise CommandError(EXIT_EMPTY, f"{path}: corpus is empty")
    return rollouts


def cmd_score(args, cfg: ToolkitConfig) -> dict:
    rollouts = _load_corpus(args.input)
    result = score_corpus(rollouts, _lexicon(cfg), cfg.penalty)
    return {
        "scored.jsonl": result.scored_jsonl(emit_advantages=args.emit_advantages),
        "group_summary.csv": result.summary_csv(),
    }


def cmd_analyze(args, cfg: ToolkitConfig) -> dict:
    rollouts = _load_corpus(args.input)
    res = analyze(measure_corpus(rollouts, _lexicon(cfg)), cfg.penalty, cfg.rtc_bin_width)
    files: dict = res.files()
    if not args.no_plots:
        from . import plotting

        files["rtc_histogram.png"] = plotting.rtc_histogram(res.histogram_rows, cfg.penalty.n1,
                                                            cfg.penalty.n2)
        files["accuracy_by_rtc.png"] = plotting.accuracy_by_rtc(res.accuracy_rows)
        files["correctness_split.png"] = plotting.correctness_split(res.split_rows)
    return files


def cmd_train_sim(args, cfg: ToolkitConfig) -> dict:
    if cfg.sim is None:
        raise ConfigError("train-sim needs a sim section in the config")
    sim = cfg.sim
    trace = run_training(sim)
    oracle = oracle_ranking(sim)
    summary = summarize(trace, oracle)
    names = trace.archetype_names
    report = {
        "reward_mode": sim.reward_mode.value,
        "steps": sim.steps,
        "seed": sim.seed,
        "final_probs": dict(zip(names, summary.final_probs)),
        "top_archetype": names[summary.top_archetype],
        "oracle": {
            "reference_stats": vars(oracle.reference),
            "expected_reward": dict(zip(names, oracle.means)),
            "std_error": dict(zip(names, oracle.std_errors)),
            "argmax": names[oracle.argmax],
            "gap_in_se": oracle.gap_in_se,
            "n_mc": sim.oracle_n_mc,
        },
        "converged": summary.converged,
    }
    files = {
        "trace.csv": trace.to_csv(),
        "train_summary.json": json.dumps(report, indent=2) + "\n",
    }
    if not args.no_plots and trace.records:
        from . import plotting

        files["training_curves.png"] = plotting.training_curves(trace)
    log.info("final probabilities %s, converged=%s", report["final_probs"], summary.converged)
    return files


def _read_records(path):
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise TraceParseError(line_no, f"invalid JSON ({exc.msg})", str(path)) from None
                if not isinstance(rec, dict):
                    raise TraceParseError(line_no, "record is not a JSON object", str(path))
                out.append((line_no, rec))
    except OSError as exc:
        raise CommandError(EXIT_PARSE, f"cannot read {path}: {exc}") from None
    return out


def cmd_eval(args, cfg: ToolkitConfig) -> dict:
    lex = _lexicon(cfg)
    records = _read_records(args.input)
    if not records:
        raise CommandError(EXIT_EMPTY, f"{args.input}: no records")
    baseline = None
    if args.baseline:
        if Path(args.baseline).suffix == ".json":
            try:
                baseline = EvalReport.from_json(Path(args.baseline).read_text(encoding="utf-8"))
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise CommandError(EXIT_PARSE, f"bad baseline report: {exc}") from None
        else:
            baseline = compute_eval_metrics(eval_cases_from_records(_read_records(args.baseline), lex))
    report = compute_eval_metrics(eval_cases_from_records(records, lex), baseline)
    rows = [[name, m.n_cases, m.k, m.pass1_accuracy, m.mean_length]
            for name, m in sorted(report.per_dataset.items())]
    files = {
        "eval_summary.csv": csv_text(["dataset", "n_cases", "k", "pass1_accuracy", "mean_length"], rows),
        "eval_report.json": report.to_json() + "\n",
    }
    if baseline is not None:
        files["eval_deltas.csv"] = csv_text(["delta_acc", "delta_length_pct"],
                                            [[report.delta_acc, report.delta_length_pct]])
    return files


COMMANDS = {"score": cmd_score, "analyze": cmd_analyze, "train-sim": cmd_train_sim,
            "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        files = COMMANDS[args.command](args, cfg)
    except CommandError as exc:
        print(f"arlcp: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"arlcp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TraceParseError, InvalidRecordError, MetricError) as exc:
        print(f"arlcp: {exc}", file=sys.stderr)
        return EXIT_PARSE
    files["effective_config.json"] = cfg.to_json()
    for p in write_outputs(cfg.output_dir, files):
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

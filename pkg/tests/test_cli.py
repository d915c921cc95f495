import csv
import json

import pytest

from arlcp.cli import main
from arlcp.config import build_config, load_config
from arlcp.complexity import ConfigError


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _corpus(tmp_path, records, name="c.jsonl"):
    p = tmp_path / name
    p.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return p


def test_score_fixture(tmp_path, fixtures_dir):
    out = tmp_path / "out"
    assert main(["score", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(out)]) == 0
    summary = _rows(out / "group_summary.csv")
    assert [r["prompt_id"] for r in summary] == ["p1", "p2", "p3"]
    assert [int(r["n_correct"]) for r in summary] == [3, 3, 1]
    lines = (out / "scored.jsonl").read_text().splitlines()
    assert len(lines) == 12
    rec = json.loads(lines[0])
    for key in ("prompt_id", "rollout_id", "text", "ground_truth", "token_count", "rtc", "len",
                "bucket", "alpha1", "alpha2", "f_rtc", "f_len", "correct", "reward"):
        assert key in rec
    assert '"alpha1": 0.050000000' in lines[0]
    assert "advantage" not in rec
    assert json.loads((out / "effective_config.json").read_text())["penalty"]["n1"] == 40


def test_score_emit_advantages(tmp_path, fixtures_dir):
    out = tmp_path / "out"
    main(["score", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(out),
          "--emit-advantages"])
    recs = [json.loads(line) for line in (out / "scored.jsonl").read_text().splitlines()]
    for pid in ("p1", "p2", "p3"):
        adv = [r["advantage"] for r in recs if r["prompt_id"] == pid]
        assert abs(sum(adv)) < 1e-8


def test_score_single_incorrect(tmp_path):
    p = _corpus(tmp_path, [{"prompt_id": "p", "rollout_id": "r", "text": "</think> 3",
                            "ground_truth": "4"}])
    out = tmp_path / "out"
    assert main(["score", str(p), "--output-dir", str(out), "--emit-advantages"]) == 0
    (row,) = _rows(out / "group_summary.csv")
    assert row["n_correct"] == "0" and row["mean_reward"] == "0.000000000"
    rec = json.loads((out / "scored.jsonl").read_text())
    assert rec["reward"] == 0 and rec["advantage"] is None


def test_score_corrupt_line_writes_nothing(tmp_path, capsys):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"prompt_id": "p", "rollout_id": "a", "text": "x", "ground_truth": "1"}\n{oops\n')
    out = tmp_path / "out"
    assert main(["score", str(p), "--output-dir", str(out)]) == 2
    assert "2" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_score_empty_corpus(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert main(["score", str(p), "--output-dir", str(tmp_path / "o")]) == 3


def test_bad_config_exit_code(tmp_path, fixtures_dir):
    args = ["score", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(tmp_path)]
    assert main(args + ["--n1", "90"]) == 4
    assert main(args + ["--lambda3", "0.5"]) == 4
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"penalty": {"bogus": 1}}))
    assert main(args + ["--config", str(cfg)]) == 4


def test_override_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"penalty": {"n1": 30, "n2": 70, "alpha": 0.3},
                                    "output_dir": "x", "sim": {"steps": 5, "seed": 9}}))
    cfg = load_config(cfg_file, {"n1": 20, "seed": 3, "output_dir": None})
    assert (cfg.penalty.n1, cfg.penalty.n2, cfg.penalty.alpha) == (20, 70, 0.3)
    assert cfg.penalty.lambda1 == 0.05
    assert cfg.sim.seed == 3 and cfg.sim.steps == 5 and cfg.sim.penalty == cfg.penalty
    assert cfg.output_dir == "x"
    assert build_config().sim.m == 16


def test_config_roundtrip_through_echo(tmp_path):
    cfg = build_config({"sim": {"steps": 3, "reward_mode": "accuracy_only"}})
    echoed = json.loads(cfg.to_json())
    echoed["penalty"].pop("std_epsilon")
    again = build_config({k: v for k, v in echoed.items()})
    assert again == cfg


def test_custom_lexicon(tmp_path):
    lex = tmp_path / "lex.txt"
    lex.write_text("maybe\n")
    p = _corpus(tmp_path, [{"prompt_id": "p", "rollout_id": "r", "text": "maybe wait maybe </think> 4",
                            "ground_truth": "4"}])
    out = tmp_path / "out"
    assert main(["score", str(p), "--output-dir", str(out), "--lexicon", str(lex)]) == 0
    assert json.loads((out / "scored.jsonl").read_text())["rtc"] == 2


def test_analyze_fixture_bins(tmp_path, fixtures_dir):
    out = tmp_path / "out"
    assert main(["analyze", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(out)]) == 0
    # hand tally of fixture (rtc, correct): p1 3T 7T 12T 20F | p2 35T 45T 85T 60F
    # | p3 50T 90F 10F 0F
    acc = {(int(r["rtc_lo"])): (int(r["n"]), int(r["n_correct"])) for r in _rows(out / "accuracy_by_rtc.csv")}
    assert acc == {0: (5, 3), 20: (2, 1), 40: (2, 2), 60: (1, 0), 80: (2, 1)}
    hist = _rows(out / "rtc_histogram.csv")
    assert [int(r["count"]) for r in hist] == [5, 2, 2, 1, 2]
    assert hist[-1]["cumulative_fraction"] == "1.000000000"
    buckets = {r["bucket"]: int(r["n"]) for r in _rows(out / "complexity_buckets.csv")}
    assert buckets == {"simple": 7, "moderate": 3, "hard": 2}
    for png in ("rtc_histogram.png", "accuracy_by_rtc.png", "correctness_split.png"):
        assert (out / png).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_analyze_bin_width_and_no_plots(tmp_path, fixtures_dir):
    out = tmp_path / "out"
    main(["analyze", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(out),
          "--bin-width", "50", "--no-plots"])
    assert [int(r["count"]) for r in _rows(out / "rtc_histogram.csv")] == [8, 4]
    assert not list(out.glob("*.png"))


def test_analyze_all_correct_flagged(tmp_path):
    recs = [{"prompt_id": "p", "rollout_id": f"r{i}", "text": f"wait </think> {i}",
             "ground_truth": str(i), "dataset": "gsm8k"} for i in range(3)]
    out = tmp_path / "out"
    assert main(["analyze", str(_corpus(tmp_path, recs)), "--output-dir", str(out)]) == 0
    (row,) = _rows(out / "correctness_split.csv")
    assert row["n_incorrect"] == "0" and row["mean_rtc_incorrect"] == "" and row["note"] == "no_incorrect"
    (ds,) = _rows(out / "rtc_by_dataset.csv")
    assert ds["dataset"] == "gsm8k" and ds["mean_rtc"] == "1.000000000"


def test_analyze_single_rollout(tmp_path):
    p = _corpus(tmp_path, [{"prompt_id": "p", "rollout_id": "r", "text": "hmm </think> 1",
                            "ground_truth": "1"}])
    out = tmp_path / "out"
    assert main(["analyze", str(p), "--output-dir", str(out)]) == 0
    for name in ("rtc_by_dataset.csv", "correctness_split.csv", "accuracy_by_rtc.csv",
                 "rtc_histogram.csv"):
        assert len(_rows(out / name)) == 1


def test_train_sim_steps_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["train-sim", "--steps", "0", "--output-dir", str(out)]) == 0
    assert (out / "trace.csv").read_text().count("\n") == 1
    summary = json.loads((out / "train_summary.json").read_text())
    assert summary["converged"] is False
    assert json.loads((out / "effective_config.json").read_text())["sim"]["steps"] == 0


def test_train_sim_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sim": {"m": 1}}))
    assert main(["train-sim", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 4
    cfg.write_text(json.dumps({"sim": None}))
    assert main(["train-sim", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 4
    assert main(["train-sim", "--steps", "-1", "--output-dir", str(tmp_path / "o")]) == 4


def test_eval_from_scored_and_baseline_report(tmp_path, fixtures_dir):
    scored_dir = tmp_path / "s"
    main(["score", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(scored_dir)])
    ev = tmp_path / "e"
    assert main(["eval", str(scored_dir / "scored.jsonl"), "--output-dir", str(ev)]) == 0
    (row,) = _rows(ev / "eval_summary.csv")
    # 7 correct of 12, 4 samples per case for all 3 cases
    assert float(row["pass1_accuracy"]) == pytest.approx(7 / 12, abs=1e-9)
    again = tmp_path / "e2"
    assert main(["eval", str(fixtures_dir / "sheet_corpus.jsonl"), "--baseline",
                 str(ev / "eval_report.json"), "--output-dir", str(again)]) == 0
    (d,) = _rows(again / "eval_deltas.csv")
    assert d == {"delta_acc": "0.000000000", "delta_length_pct": "0.000000000"}


def test_eval_missing_baseline_dataset(tmp_path):
    run = _corpus(tmp_path, [{"dataset": "a", "prompt_id": "p", "correct": True, "len": 5}], "run.jsonl")
    base = _corpus(tmp_path, [{"dataset": "b", "prompt_id": "p", "correct": True, "len": 5}], "base.jsonl")
    assert main(["eval", str(run), "--baseline", str(base), "--output-dir", str(tmp_path / "o")]) == 2


def test_commands_idempotent(tmp_path, fixtures_dir):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["score", str(fixtures_dir / "sheet_corpus.jsonl"), "--output-dir", str(out), "--emit-advantages"])
    assert (a / "scored.jsonl").read_bytes() == (b / "scored.jsonl").read_bytes()
    assert (a / "group_summary.csv").read_bytes() == (b / "group_summary.csv").read_bytes()

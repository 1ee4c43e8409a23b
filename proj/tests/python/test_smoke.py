"""Smoke tests for the medtrap Python bindings."""

import math
import os
from pathlib import Path

import pytest

import medtrap

SAMPLE = Path(os.environ.get("MEDTRAP_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "data" / "sample"


def test_consistency_anchors():
    assert medtrap.consistency_score(["x", "x", "y", "z"]) == pytest.approx(25.0, abs=1e-9)
    assert medtrap.consistency_score(["a", "b", "c", "d"]) == pytest.approx(0.0, abs=1e-9)
    assert medtrap.consistency_score(["x"] * 4) == pytest.approx(100.0, abs=1e-9)


def test_average_and_rectifies():
    assert medtrap.average_of_four(100, 0, 50, 25) == 43.75
    assert medtrap.rectifies("Opposes", "Supports")
    assert not medtrap.rectifies("Supports", "Supports")
    with pytest.raises(ValueError):
        medtrap.rectifies("maybe", "Supports")


def test_bleu_and_entropy():
    text = "I have had a headache for three days."
    assert medtrap.self_bleu_diversity([text, text]) <= 0.01
    assert medtrap.self_bleu_diversity(["alpha beta gamma", "one two three"]) >= 0.99
    assert medtrap.bleu_tokenize("Hello, World") == ["hello", "world"]
    uniform = [[1, 1, 1]] * 3
    assert medtrap.expression_diversity(uniform) == pytest.approx(math.log2(3))
    with pytest.raises(medtrap.ValidationError):
        medtrap.expression_diversity([[1, 1, 1], [3, 0, 0], [2, 0, 0]])


def test_agreement_and_bootstrap():
    hand = medtrap.gwet_ac1([["A", "A"], ["A", "B"], ["B", "B"], ["A", "A"]])
    assert hand["pa"] == pytest.approx(0.75)
    assert hand["ac1"] == pytest.approx(9 / 17, abs=1e-9)
    same = [1.0, 0.0, 1.0, 1.0, 0.0] * 20
    assert medtrap.bootstrap_significance(same, same, seed=3)["p"] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        medtrap.bootstrap_significance([1.0], [1.0, 2.0])


def test_relative_delta():
    assert medtrap.relative_delta(72.92, 65.26) == pytest.approx(-10.50)
    with pytest.raises(ValueError):
        medtrap.relative_delta_exact(0.0, 1.0)


def test_sample_workflow(tmp_path):
    config = SAMPLE / "config.json"
    summary = medtrap.generate(config, SAMPLE / "seeds.jsonl", tmp_path, seed=7)
    assert summary["questions"] == 8
    answers = tmp_path / "answers.jsonl"
    for model in ("model-a", "model-b"):
        assert medtrap.answer(config, summary["questions_path"], answers, model)["answered"] == 8
    doc = medtrap.evaluate(config, summary["questions_path"], answers, tmp_path)
    cards = {c["model_id"]: c for c in doc["scorecards"]}
    assert cards["model-a"]["avg"] > cards["model-b"]["avg"]
    report = medtrap.analyze(
        config,
        deltas=[(72.92, 65.26)],
        significance=tmp_path / "eval_records.jsonl",
        models=("model-a", "model-b"),
    )
    assert report["significance"]["p"] < 0.05
    assert (tmp_path / "scorecards.json").is_file()


def test_missing_config_raises(tmp_path):
    with pytest.raises(ValueError):
        medtrap.generate(tmp_path / "nope.json", SAMPLE / "seeds.jsonl", tmp_path)

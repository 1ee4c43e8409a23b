"""Trap-based medical QA benchmark toolkit (native core via pybind11)."""

import json
import os
from pathlib import Path

_PACKAGED_PROMPTS = Path(__file__).with_name("prompts")
if _PACKAGED_PROMPTS.is_dir():
    os.environ.setdefault("MEDTRAP_PROMPT_DIR", str(_PACKAGED_PROMPTS))

from ._core import (  # noqa: E402
    ValidationError,
    average_of_four,
    bleu_tokenize,
    bootstrap_significance,
    consistency_score,
    expression_diversity,
    gwet_ac1,
    histogram_entropy,
    rectifies,
    relative_delta,
    relative_delta_exact,
    self_bleu,
    self_bleu_diversity,
    sentence_bleu,
)
from . import _core


def generate(config, seeds, out_dir, traps=None, seed=None, scripted=None):
    """Generate questions.jsonl and manifest.json; returns the run summary."""
    return json.loads(_core.generate_json(config, seeds, out_dir, traps, seed, scripted))


def answer(config, questions, out, model, challenge=False, include_flagged=False, scripted=None):
    """Collect (or resume collecting) one model's answers; returns counts."""
    return json.loads(_core.answer_json(config, questions, out, model, challenge, include_flagged, scripted))


def evaluate(config, questions, answers, out_dir, challenge=False, scripted=None):
    """Score answers and write the evaluation artifacts; returns the scorecard document."""
    return json.loads(_core.evaluate_json(config, questions, answers, out_dir, challenge, scripted))


def analyze(config=None, **options):
    """Run the requested statistics; keyword names match the CLI analyze flags."""
    return json.loads(_core.analyze_json(config, **options))


__all__ = [
    "ValidationError",
    "analyze",
    "answer",
    "average_of_four",
    "bleu_tokenize",
    "bootstrap_significance",
    "consistency_score",
    "evaluate",
    "expression_diversity",
    "generate",
    "gwet_ac1",
    "histogram_entropy",
    "rectifies",
    "relative_delta",
    "relative_delta_exact",
    "self_bleu",
    "self_bleu_diversity",
    "sentence_bleu",
]

"""Retrieval-augmented translation of classical Chinese poetry.

Thin re-export of the compiled core; see the C++ headers for exact
semantics. Everything here is runnable offline against a scripted
mock transport.
"""

from _poetrat import (
    KnowledgeBase,
    PoetratError,
    accuracy,
    corpus_bleu,
    dice_similarity,
    fill_template,
    kendall,
    normalize_poem_text,
    pearson,
    rat_translate,
    scorecard_avg,
    spearman,
    zero_shot_translate,
)

__all__ = [
    "KnowledgeBase",
    "PoetratError",
    "accuracy",
    "corpus_bleu",
    "dice_similarity",
    "fill_template",
    "kendall",
    "normalize_poem_text",
    "pearson",
    "rat_translate",
    "scorecard_avg",
    "spearman",
    "zero_shot_translate",
]

from .codebleu import CodeBleuScore, CodeBleuWeights, bleu, codebleu, codebleu_components, weighted_bleu
from .matching import abstracted_match, is_abstracted, is_verbatim, verbatim_match
from .report import ExampleRow, Judgment, MetricReport, evaluate, read_judgments, read_truth
from .retrieval import DEFAULT_KS, ClosestMatch, closest_match, similarity, topk_accuracy

__all__ = [
    "ClosestMatch",
    "CodeBleuScore",
    "CodeBleuWeights",
    "DEFAULT_KS",
    "ExampleRow",
    "Judgment",
    "MetricReport",
    "abstracted_match",
    "bleu",
    "closest_match",
    "codebleu",
    "codebleu_components",
    "evaluate",
    "is_abstracted",
    "is_verbatim",
    "read_judgments",
    "read_truth",
    "similarity",
    "topk_accuracy",
    "verbatim_match",
    "weighted_bleu",
]

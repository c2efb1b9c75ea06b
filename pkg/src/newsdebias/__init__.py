"""Detect biased news sentences, locate the biased words, and rewrite them."""

__version__ = "0.1.0"

from .debias import DebiasConfig, DebiasResult, NgramInfiller, debias
from .detection import DetectorModel, Label, TrainConfig, classify, load_model, predict_proba, train_detector
from .metrics import ConfusionMatrix, GaucConfig, GroupOutcome, disparate_impact, generalized_bias_auc, roc_auc
from .pipeline import Models, evaluate_before_after, fit_models, run_pipeline
from .recognition import Lexicon, build_lexicon, recognize
from .text import Document, Span, detokenize, split_sentences, tokenize

__all__ = [
    "ConfusionMatrix",
    "DebiasConfig",
    "DebiasResult",
    "DetectorModel",
    "Document",
    "GaucConfig",
    "GroupOutcome",
    "Label",
    "Lexicon",
    "Models",
    "NgramInfiller",
    "Span",
    "TrainConfig",
    "build_lexicon",
    "classify",
    "debias",
    "detokenize",
    "disparate_impact",
    "evaluate_before_after",
    "fit_models",
    "generalized_bias_auc",
    "load_model",
    "predict_proba",
    "recognize",
    "roc_auc",
    "run_pipeline",
    "split_sentences",
    "tokenize",
    "train_detector",
]

"""Tsetlin Machine and Convolutional Tsetlin Machine."""

from .automata import EvalMode, Hyperparams, TaBank, clause_eval, included_literals, make_literals, ta_action
from .binarize import adaptive_gaussian_binarize, generate_noisy_xor
from .classifier import ClassModel, EpochMetrics, Evaluation, MulticlassModel, class_score
from .convolution import PatchLayout, WholeImageLayout, build_layout, encode_position, extract_patch
from .data_io import load_idx_images, load_idx_labels, load_model, save_model
from .interpret import clause_to_pattern, export_report

__all__ = [
    "EvalMode", "Hyperparams", "TaBank", "clause_eval", "included_literals", "make_literals", "ta_action",
    "adaptive_gaussian_binarize", "generate_noisy_xor",
    "ClassModel", "EpochMetrics", "Evaluation", "MulticlassModel", "class_score",
    "PatchLayout", "WholeImageLayout", "build_layout", "encode_position", "extract_patch",
    "load_idx_images", "load_idx_labels", "load_model", "save_model",
    "clause_to_pattern", "export_report",
]

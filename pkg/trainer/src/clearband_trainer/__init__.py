"""Desk-scale training pipeline for the clearband engine.

Synthesizes noisy/clean pairs with randomized tilt filters, speeds, levels
and SNRs, computes oracle band-gain and VAD targets with the engine's own
analysis, trains the gain network, and exports the engine's model file.
"""

from .augment import AugmentationSpec, draw_filter_coeffs, synthesize_pair
from .dataset import load_corpus, synthesize_corpus, window_examples
from .export import ExportError, export_checkpoint, export_tensors
from .loss import gain_loss, total_loss, vad_loss
from .network import GainNet
from .targets import TrainingExample, build_example, vad_labels
from .train import (TrainingDiverged, load_checkpoint, save_checkpoint,
                    train_model)

__version__ = "0.1.0"

__all__ = [
    "AugmentationSpec", "ExportError", "GainNet", "TrainingDiverged",
    "TrainingExample", "build_example", "draw_filter_coeffs",
    "export_checkpoint", "export_tensors", "gain_loss", "load_checkpoint",
    "load_corpus", "save_checkpoint", "synthesize_corpus", "synthesize_pair",
    "total_loss", "train_model", "vad_labels", "vad_loss",
    "window_examples",
]

"""Checkpoint to engine model file (symmetric per-tensor int8 + scale)."""

from __future__ import annotations

from clearband import Model, save_model
from clearband.model_format import TOPOLOGY, TopologyError


class ExportError(Exception):
    pass


def export_tensors(tensors: dict, path=None) -> bytes:
    """Quantize float tensors and emit the engine's file format.

    Refuses tensors that do not match the fixed format-v1 topology.
    """
    try:
        model = Model.from_float_tensors(tensors)
    except TopologyError as exc:
        raise ExportError(f"export refused: {exc}") from exc
    missing = [layer.name for layer in TOPOLOGY if layer.name not in tensors]
    if missing:
        raise ExportError(f"export refused: missing layers {missing}")
    return save_model(model.quantize(), path)


def export_checkpoint(checkpoint: dict, path=None) -> bytes:
    if "tensors" not in checkpoint:
        raise ExportError("export refused: checkpoint has no tensors")
    return export_tensors(checkpoint["tensors"], path)

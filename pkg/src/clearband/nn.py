"""Recurrent gain network: model container and per-frame inference.

The network maps the 42 input features to 22 band gains plus a voice
probability: dense(tanh, 24) -> GRU(24) -> GRU(48) -> GRU(96) ->
dense(sigmoid, 22), with the VAD head dense(sigmoid, 1) branching off the
first GRU and the raw features skipped forward into both later GRUs
(see model_format.TOPOLOGY). 215 units, 87,503 weights; every weight is
used in exactly one multiply-add per frame.

Inference runs in float32; int8 is the storage format, dequantized once at
load (dequantized weight = stored int8 x per-tensor scale, exactly).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels, model_format
from .bands import build_layout
from .config import FEATURE_SIZE
from .features import FEATURE_VERSION
from .model_format import (KIND_GRU, TOPOLOGY, BandTableError,
                           FeatureVersionError, LayerSpec,
                           dequantize_tensor, quantize_tensor)


class NetworkState:
    """Per-stream GRU hidden states, zero at stream start."""

    def __init__(self):
        self.hidden = {
            layer.name: np.zeros(layer.output_size, dtype=np.float32)
            for layer in TOPOLOGY if layer.kind == KIND_GRU
        }

    def reset(self):
        for h in self.hidden.values():
            h[:] = 0.0


class Model:
    """Immutable weight container, shareable across streams.

    ``tensors`` maps layer -> tensor -> float32 array (the values used for
    inference). When loaded from a file, ``quantized`` keeps the authoritative
    (int8, scale) pairs and the float tensors are their exact dequantization;
    models built directly from float tensors (training/parity paths) have
    ``quantized`` = None.
    """

    def __init__(self, tensors, band_edges, feature_version=FEATURE_VERSION,
                 quantized=None):
        self.specs = TOPOLOGY
        self.spec_map = {layer.name: layer for layer in TOPOLOGY}
        self.tensors = tensors
        self.band_edges = np.asarray(band_edges, dtype=np.int32)
        self.feature_version = feature_version
        self.quantized = quantized

    @classmethod
    def from_float_tensors(cls, tensors, band_edges=None,
                           feature_version=FEATURE_VERSION) -> "Model":
        """Build an unquantized model; validates shapes against the topology."""
        if band_edges is None:
            band_edges = build_layout().edges
        converted = {}
        for layer in TOPOLOGY:
            if layer.name not in tensors:
                raise model_format.TopologyError(f"missing layer {layer.name}")
            converted[layer.name] = {}
            for name in layer.tensor_names:
                if name not in tensors[layer.name]:
                    raise model_format.TopologyError(
                        f"missing tensor {layer.name}.{name}")
                arr = np.asarray(tensors[layer.name][name], dtype=np.float32)
                if arr.shape != layer.tensor_shape(name):
                    raise model_format.TopologyError(
                        f"{layer.name}.{name}: expected "
                        f"{layer.tensor_shape(name)}, got {arr.shape}")
                converted[layer.name][name] = np.ascontiguousarray(arr)
        return cls(converted, band_edges, feature_version)

    def quantize(self) -> "Model":
        """Return the int8 version of this model (identity if quantized)."""
        if self.quantized is not None:
            return self
        quantized = {
            layer.name: {name: quantize_tensor(self.tensors[layer.name][name])
                         for name in layer.tensor_names}
            for layer in TOPOLOGY
        }
        return _from_quantized(quantized, self.band_edges, self.feature_version)

    @property
    def units(self) -> int:
        return model_format.TOTAL_UNITS

    def weight_count(self) -> int:
        """Total stored weights, biases included."""
        return sum(t.size for layer in self.tensors.values()
                   for t in layer.values())

    def macs_per_frame(self) -> int:
        """Multiply-adds per frame: one per matrix weight."""
        return sum(t.size for layer in self.tensors.values()
                   for name, t in layer.items() if t.ndim == 2)


def _from_quantized(quantized, band_edges, feature_version) -> Model:
    tensors = {
        layer: {name: dequantize_tensor(q, scale)
                for name, (q, scale) in entries.items()}
        for layer, entries in quantized.items()
    }
    return Model(tensors, band_edges, feature_version, quantized=quantized)


def load_model(source) -> Model:
    """Load a model from bytes, a path, or a binary file object.

    Rejects files whose feature version or band table disagrees with this
    engine build.
    """
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as f:
            data = f.read()
    else:
        data = source.read()
    quantized, edges, feature_version = model_format.read_model_bytes(data)
    if feature_version != FEATURE_VERSION:
        raise FeatureVersionError(
            f"model uses feature version {feature_version}, "
            f"engine implements {FEATURE_VERSION}")
    expected_edges = build_layout().edges
    if not np.array_equal(edges, expected_edges):
        raise BandTableError("model band table does not match this engine")
    return _from_quantized(quantized, edges, feature_version)


def save_model(model: Model, path=None) -> bytes:
    """Serialize a model (quantizing float tensors if needed).

    Returns the bytes; also writes them to ``path`` when given. A loaded
    model round-trips byte-exactly.
    """
    quantized = model.quantize().quantized
    data = model_format.write_model_bytes(
        quantized, model.band_edges.astype(np.uint16), model.feature_version)
    if path is not None:
        with open(path, "wb") as f:
            f.write(data)
    return data


def make_random_model(seed: int = 0, spread: float = 0.15) -> Model:
    """Random float model for tests and benchmarks (uniform +-spread).

    The default spread keeps the relu recurrences in a trained-model-like
    operating range instead of drifting to large hidden states.
    """
    rng = np.random.default_rng(seed)
    tensors = {
        layer.name: {
            name: rng.uniform(-spread, spread,
                              layer.tensor_shape(name)).astype(np.float32)
            for name in layer.tensor_names
        }
        for layer in TOPOLOGY
    }
    return Model.from_float_tensors(tensors)


def dense_forward(layer: LayerSpec, tensors, x, backend=None) -> np.ndarray:
    """activation(W x + b) for one dense layer."""
    k = _kernels.get(backend)
    x = np.ascontiguousarray(x, dtype=np.float32)
    if x.shape != (layer.input_size,):
        raise ValueError(f"{layer.name}: expected input of {layer.input_size}")
    return k.dense_forward(tensors["weight"], tensors["bias"], x,
                           layer.activation)


def gru_forward(layer: LayerSpec, tensors, state, x, backend=None) -> np.ndarray:
    """One GRU step; returns (and is) the layer output."""
    k = _kernels.get(backend)
    x = np.ascontiguousarray(x, dtype=np.float32)
    if x.shape != (layer.input_size,):
        raise ValueError(f"{layer.name}: expected input of {layer.input_size}")
    if state.shape != (layer.output_size,):
        raise ValueError(f"{layer.name}: state size mismatch")
    return k.gru_step(tensors["w_update"], tensors["w_reset"],
                      tensors["w_candidate"], tensors["u_update"],
                      tensors["u_reset"], tensors["u_candidate"],
                      tensors["b_update"], tensors["b_reset"],
                      tensors["b_candidate"], state, x, layer.activation)


def network_forward(model: Model, state: NetworkState, features,
                    backend=None):
    """Run one frame through the network.

    Returns (gains, vad): 22 band gains and a voice probability, all in
    (0, 1). Updates the hidden states in place.
    """
    features = np.asarray(features, dtype=np.float32)
    if features.shape != (FEATURE_SIZE,):
        raise ValueError(f"expected {FEATURE_SIZE} features")
    spec = model.spec_map
    t = model.tensors

    d = dense_forward(spec["input_dense"], t["input_dense"], features, backend)
    h_vad = gru_forward(spec["vad_gru"], t["vad_gru"],
                        state.hidden["vad_gru"], d, backend)
    state.hidden["vad_gru"] = h_vad
    noise_in = np.concatenate([d, h_vad, features])
    h_noise = gru_forward(spec["noise_gru"], t["noise_gru"],
                          state.hidden["noise_gru"], noise_in, backend)
    state.hidden["noise_gru"] = h_noise
    denoise_in = np.concatenate([h_vad, h_noise, features])
    h_denoise = gru_forward(spec["denoise_gru"], t["denoise_gru"],
                            state.hidden["denoise_gru"], denoise_in, backend)
    state.hidden["denoise_gru"] = h_denoise

    gains = dense_forward(spec["gain_output"], t["gain_output"],
                          h_denoise, backend)
    vad = dense_forward(spec["vad_output"], t["vad_output"], h_vad, backend)
    return gains.astype(np.float64), float(vad[0])

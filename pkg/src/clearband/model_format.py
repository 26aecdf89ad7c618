"""Binary model file format (.rnnd), format version 1.

Little-endian layout:

    offset  size  field
    0       4     magic "RNND"
    4       4     format version, u32 (= 1)
    8       4     feature version, u32
    12      4     total unit count, u32 (sum of layer output sizes)
    16      46    band edge table, 23 x u16 DFT bin indices
    62      4     layer count, u32
    66      6*L   layer records: kind u8, activation u8, in u16, out u16
    then, for each layer in order, its tensors in the fixed order below:
                  scale f32, then the int8 payload (row-major, out x in
                  for matrices, flat for biases)

Tensor order per layer: dense -> weight, bias; gru -> w_update, w_reset,
w_candidate, u_update, u_reset, u_candidate, b_update, b_reset,
b_candidate. Matrix rows are output units; GRU input matrices are
(out x in), recurrent matrices (out x out).

Weights are symmetric per-tensor int8: scale = max|w| / 127, stored value
in [-127, 127], dequantized weight = int8 * scale (float32). A version-1
file always contains the fixed six-layer topology below; anything else is
rejected at load.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import FEATURE_SIZE, NUM_BANDS

MAGIC = b"RNND"
FORMAT_VERSION = 1

KIND_DENSE = 0
KIND_GRU = 1

ACT_TANH = 0
ACT_SIGMOID = 1
ACT_RELU = 2

_ACT_NAMES = {ACT_TANH: "tanh", ACT_SIGMOID: "sigmoid", ACT_RELU: "relu"}

DENSE_TENSORS = ("weight", "bias")
GRU_TENSORS = ("w_update", "w_reset", "w_candidate",
               "u_update", "u_reset", "u_candidate",
               "b_update", "b_reset", "b_candidate")


class ModelFormatError(Exception):
    """Base class for model file problems."""


class MagicError(ModelFormatError):
    pass


class FormatVersionError(ModelFormatError):
    pass


class FeatureVersionError(ModelFormatError):
    pass


class BandTableError(ModelFormatError):
    pass


class UnitCountError(ModelFormatError):
    pass


class ActivationError(ModelFormatError):
    pass


class TopologyError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    def __init__(self, tensor: str):
        super().__init__(f"file ends inside tensor {tensor}")
        self.tensor = tensor


@dataclass(frozen=True)
class LayerSpec:
    name: str
    kind: int
    activation: int       # candidate activation for GRU layers
    input_size: int
    output_size: int

    @property
    def tensor_names(self):
        return DENSE_TENSORS if self.kind == KIND_DENSE else GRU_TENSORS

    def tensor_shape(self, tensor: str) -> tuple[int, ...]:
        if tensor.startswith("w"):
            return (self.output_size, self.input_size)
        if tensor.startswith("u"):
            return (self.output_size, self.output_size)
        return (self.output_size,)


# Fixed version-1 wiring. The two later recurrent layers see the raw
# features again plus earlier outputs: noise_gru input is
# [input_dense, vad_gru, features] and denoise_gru input is
# [vad_gru, noise_gru, features]. The VAD head branches off vad_gru.
TOPOLOGY = (
    LayerSpec("input_dense", KIND_DENSE, ACT_TANH, FEATURE_SIZE, 24),
    LayerSpec("vad_gru", KIND_GRU, ACT_RELU, 24, 24),
    LayerSpec("noise_gru", KIND_GRU, ACT_RELU, 24 + 24 + FEATURE_SIZE, 48),
    LayerSpec("denoise_gru", KIND_GRU, ACT_RELU,
              24 + 48 + FEATURE_SIZE, 96),
    LayerSpec("gain_output", KIND_DENSE, ACT_SIGMOID, 96, NUM_BANDS),
    LayerSpec("vad_output", KIND_DENSE, ACT_SIGMOID, 24, 1),
)

TOTAL_UNITS = sum(layer.output_size for layer in TOPOLOGY)


def quantize_tensor(values: np.ndarray):
    """Symmetric int8 quantization; returns (int8 array, float32 scale)."""
    values = np.asarray(values, dtype=np.float64)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    scale = np.float32(peak / 127.0)
    if scale == 0.0:
        return np.zeros(values.shape, dtype=np.int8), scale
    q = np.clip(np.round(values / float(scale)), -127, 127)
    return q.astype(np.int8), scale


def dequantize_tensor(q: np.ndarray, scale: np.float32) -> np.ndarray:
    return q.astype(np.float32) * np.float32(scale)


def write_model_bytes(quantized: dict, band_edges: np.ndarray,
                      feature_version: int) -> bytes:
    """Serialize {layer: {tensor: (int8, scale)}} into the v1 format."""
    edges = np.asarray(band_edges, dtype=np.uint16)
    if edges.shape != (NUM_BANDS + 1,):
        raise TopologyError(f"band edge table must have {NUM_BANDS + 1} entries")
    parts = [MAGIC,
             struct.pack("<III", FORMAT_VERSION, feature_version, TOTAL_UNITS),
             edges.astype("<u2").tobytes(),
             struct.pack("<I", len(TOPOLOGY))]
    for layer in TOPOLOGY:
        parts.append(struct.pack("<BBHH", layer.kind, layer.activation,
                                 layer.input_size, layer.output_size))
    for layer in TOPOLOGY:
        tensors = quantized[layer.name]
        for name in layer.tensor_names:
            q, scale = tensors[name]
            expected = layer.tensor_shape(name)
            if tuple(q.shape) != expected:
                raise TopologyError(
                    f"{layer.name}.{name}: expected shape {expected}, "
                    f"got {tuple(q.shape)}")
            parts.append(struct.pack("<f", float(scale)))
            parts.append(np.ascontiguousarray(q, dtype=np.int8).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedModelError(what)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def read_model_bytes(data: bytes):
    """Parse v1 bytes; returns (quantized dict, band_edges, feature_version).

    Raises a distinct ModelFormatError subclass for each defect: bad magic,
    unknown format/feature version, unit-count mismatch, unknown activation
    byte, topology mismatch, or truncation (naming the tensor).
    """
    r = _Reader(data)
    if r.take(4, "header") != MAGIC:
        raise MagicError("not a model file (bad magic)")
    version, feature_version, units = struct.unpack("<III", r.take(12, "header"))
    if version != FORMAT_VERSION:
        raise FormatVersionError(f"unsupported format version {version}")
    edges = np.frombuffer(r.take(2 * (NUM_BANDS + 1), "band table"),
                          dtype="<u2").astype(np.int32)
    (layer_count,) = struct.unpack("<I", r.take(4, "header"))
    if layer_count != len(TOPOLOGY):
        raise TopologyError(
            f"expected {len(TOPOLOGY)} layers, file has {layer_count}")
    for layer in TOPOLOGY:
        kind, act, nin, nout = struct.unpack("<BBHH", r.take(6, "layer table"))
        if act not in _ACT_NAMES:
            raise ActivationError(f"unknown activation code {act}")
        if (kind, act, nin, nout) != (layer.kind, layer.activation,
                                      layer.input_size, layer.output_size):
            raise TopologyError(
                f"layer {layer.name}: record {(kind, act, nin, nout)} does "
                f"not match the version-{FORMAT_VERSION} topology")
    if units != TOTAL_UNITS:
        raise UnitCountError(
            f"header declares {units} units, topology has {TOTAL_UNITS}")

    quantized = {}
    for layer in TOPOLOGY:
        tensors = {}
        for name in layer.tensor_names:
            label = f"{layer.name}.{name}"
            (scale,) = struct.unpack("<f", r.take(4, label))
            shape = layer.tensor_shape(name)
            count = int(np.prod(shape))
            q = np.frombuffer(r.take(count, label), dtype=np.int8)
            tensors[name] = (q.reshape(shape), np.float32(scale))
        quantized[layer.name] = tensors
    if r.pos != len(data):
        raise ModelFormatError(
            f"{len(data) - r.pos} unexpected trailing bytes")
    return quantized, edges, feature_version

"""PyTorch mirror of the engine's network, cell-for-cell.

The recurrent cell must match the inference kernels exactly: sigmoid
gates with a single bias each, the reset gate applied to the state before
the recurrent matmul, relu candidates, and new_state = z*h + (1-z)*c.
Tensor names follow the model file format so export is a direct mapping.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from clearband.model_format import ACT_RELU, ACT_SIGMOID, ACT_TANH

_ACT = {ACT_TANH: torch.tanh, ACT_SIGMOID: torch.sigmoid,
        ACT_RELU: torch.relu}


def _init(shape, fan_in, generator=None):
    bound = 1.0 / math.sqrt(fan_in)
    return torch.empty(shape).uniform_(-bound, bound, generator=generator)


class RecurrentCell(nn.Module):
    def __init__(self, input_size: int, hidden_size: int, activation: int,
                 generator=None):
        super().__init__()
        self.hidden_size = hidden_size
        self.activation = activation
        for gate in ("update", "reset", "candidate"):
            self.register_parameter(
                f"w_{gate}", nn.Parameter(_init((hidden_size, input_size),
                                                input_size, generator)))
            self.register_parameter(
                f"u_{gate}", nn.Parameter(_init((hidden_size, hidden_size),
                                                hidden_size, generator)))
            self.register_parameter(
                f"b_{gate}", nn.Parameter(torch.zeros(hidden_size)))

    def run_sequence(self, x: torch.Tensor, h0=None) -> torch.Tensor:
        """x: (batch, time, input) -> stacked hidden states (batch, time, n)."""
        batch, steps, _ = x.shape
        # precompute input projections; unbind (not slice) so backward sees
        # one stack node instead of a select per step
        xz = (x @ self.w_update.T + self.b_update).unbind(1)
        xr = (x @ self.w_reset.T + self.b_reset).unbind(1)
        xc = (x @ self.w_candidate.T + self.b_candidate).unbind(1)
        h = (torch.zeros(batch, self.hidden_size, dtype=x.dtype)
             if h0 is None else h0)
        act = _ACT[self.activation]
        outs = []
        for t in range(steps):
            z = torch.sigmoid(xz[t] + h @ self.u_update.T)
            r = torch.sigmoid(xr[t] + h @ self.u_reset.T)
            c = act(xc[t] + (r * h) @ self.u_candidate.T)
            h = z * h + (1.0 - z) * c
            outs.append(h)
        return torch.stack(outs, dim=1)


class GainNet(nn.Module):
    """dense(42->24, tanh) -> GRU(24) -> GRU(48) -> GRU(96) -> gains(22),
    with the VAD head on the first GRU and feature skip connections into
    the later GRUs."""

    def __init__(self, seed: int | None = None):
        super().__init__()
        gen = None
        if seed is not None:
            gen = torch.Generator()
            gen.manual_seed(seed)
        self.input_dense = nn.Parameter(_init((24, 42), 42, gen))
        self.input_bias = nn.Parameter(torch.zeros(24))
        self.vad_gru = RecurrentCell(24, 24, ACT_RELU, gen)
        self.noise_gru = RecurrentCell(90, 48, ACT_RELU, gen)
        self.denoise_gru = RecurrentCell(114, 96, ACT_RELU, gen)
        self.gain_weight = nn.Parameter(_init((22, 96), 96, gen))
        self.gain_bias = nn.Parameter(torch.zeros(22))
        self.vad_weight = nn.Parameter(_init((1, 24), 24, gen))
        self.vad_bias = nn.Parameter(torch.zeros(1))

    def forward(self, features: torch.Tensor):
        """features (batch, time, 42) -> (gains (b,t,22), vad (b,t))."""
        d = torch.tanh(features @ self.input_dense.T + self.input_bias)
        h_vad = self.vad_gru.run_sequence(d)
        h_noise = self.noise_gru.run_sequence(
            torch.cat([d, h_vad, features], dim=2))
        h_denoise = self.denoise_gru.run_sequence(
            torch.cat([h_vad, h_noise, features], dim=2))
        gains = torch.sigmoid(h_denoise @ self.gain_weight.T + self.gain_bias)
        vad = torch.sigmoid(h_vad @ self.vad_weight.T + self.vad_bias)
        return gains, vad.squeeze(-1)

    def export_tensors(self) -> dict:
        """Float32 tensors keyed like the engine's model format."""
        def f32(t):
            return t.detach().cpu().numpy().astype(np.float32)

        out = {
            "input_dense": {"weight": f32(self.input_dense),
                            "bias": f32(self.input_bias)},
            "gain_output": {"weight": f32(self.gain_weight),
                            "bias": f32(self.gain_bias)},
            "vad_output": {"weight": f32(self.vad_weight),
                           "bias": f32(self.vad_bias)},
        }
        for name in ("vad_gru", "noise_gru", "denoise_gru"):
            cell = getattr(self, name)
            out[name] = {tname: f32(getattr(cell, tname))
                         for tname in ("w_update", "w_reset", "w_candidate",
                                       "u_update", "u_reset", "u_candidate",
                                       "b_update", "b_reset", "b_candidate")}
        return out

    def load_tensors(self, tensors: dict):
        with torch.no_grad():
            self.input_dense.copy_(torch.from_numpy(
                np.asarray(tensors["input_dense"]["weight"], np.float32)))
            self.input_bias.copy_(torch.from_numpy(
                np.asarray(tensors["input_dense"]["bias"], np.float32)))
            self.gain_weight.copy_(torch.from_numpy(
                np.asarray(tensors["gain_output"]["weight"], np.float32)))
            self.gain_bias.copy_(torch.from_numpy(
                np.asarray(tensors["gain_output"]["bias"], np.float32)))
            self.vad_weight.copy_(torch.from_numpy(
                np.asarray(tensors["vad_output"]["weight"], np.float32)))
            self.vad_bias.copy_(torch.from_numpy(
                np.asarray(tensors["vad_output"]["bias"], np.float32)))
            for name in ("vad_gru", "noise_gru", "denoise_gru"):
                cell = getattr(self, name)
                for tname, values in tensors[name].items():
                    getattr(cell, tname).copy_(torch.from_numpy(
                        np.asarray(values, np.float32)))
        return self

"""Training loop: stateful windows, Adam, held-out tracking."""

from __future__ import annotations

import numpy as np
import torch

from .loss import VAD_WEIGHT, total_loss
from .network import GainNet
from .targets import TrainingExample


class TrainingDiverged(RuntimeError):
    pass


def _pad_batch(windows: list[TrainingExample]):
    """Stack windows, padding short ones with all-undefined silent frames
    (padding carries no loss, so it cannot perturb gradients)."""
    steps = max(len(w.features) for w in windows)
    batch = len(windows)
    features = np.zeros((batch, steps, 42), dtype=np.float32)
    gains = np.zeros((batch, steps, 22), dtype=np.float32)
    mask = np.zeros((batch, steps, 22), dtype=bool)
    vad = np.zeros((batch, steps), dtype=np.float32)
    for i, w in enumerate(windows):
        t = len(w.features)
        features[i, :t] = w.features
        gains[i, :t] = w.gains
        mask[i, :t] = w.mask
        vad[i, :t] = w.vad
    return (torch.from_numpy(features), torch.from_numpy(gains),
            torch.from_numpy(mask), torch.from_numpy(vad))


def _evaluate(net: GainNet, batches, vad_weight: float) -> float:
    if not batches:
        return float("nan")
    net.eval()
    losses = []
    with torch.no_grad():
        for features, gains, mask, vad in batches:
            pred_gains, pred_vad = net(features)
            losses.append(float(total_loss(gains, pred_gains, mask, vad,
                                           pred_vad, vad_weight)))
    net.train()
    return float(np.mean(losses))


def train_model(windows: list[TrainingExample], epochs: int = 20,
                lr: float = 1e-3, seed: int = 0, batch_size: int = 10,
                holdout_fraction: float = 0.1,
                vad_weight: float = VAD_WEIGHT, shuffle: bool = True,
                log=None):
    """Train a fresh network; returns (net, history).

    history["holdout"][0] is the untrained baseline; training aborts with
    diagnostics if the loss stops being finite. Batches with no defined
    gain at all (pure silence) carry zero loss and are skipped outright,
    so they cannot perturb the optimizer.
    """
    torch.manual_seed(seed)
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(windows))
    else:
        order = np.arange(len(windows))
    n_hold = int(len(windows) * holdout_fraction)
    hold = [windows[i] for i in order[:n_hold]]
    train = [windows[i] for i in order[n_hold:]] or hold

    hold_batches = [_pad_batch(hold[i:i + batch_size])
                    for i in range(0, len(hold), batch_size)]
    train_batches = [_pad_batch(train[i:i + batch_size])
                     for i in range(0, len(train), batch_size)]

    net = GainNet(seed=seed)
    optimizer = torch.optim.Adam(net.parameters(), lr=lr)
    history = {"train": [], "holdout": [_evaluate(net, hold_batches,
                                                  vad_weight)]}
    if log:
        log(f"epoch  0: holdout {history['holdout'][0]:.5f} (untrained)")

    for epoch in range(1, epochs + 1):
        epoch_losses = []
        for features, gains, mask, vad in train_batches:
            if not bool(mask.any()):
                continue
            optimizer.zero_grad()
            pred_gains, pred_vad = net(features)
            loss = total_loss(gains, pred_gains, mask, vad, pred_vad,
                              vad_weight)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {epoch} "
                    f"(last holdout {history['holdout'][-1]:.5f}, lr {lr})")
            loss.backward()
            torch.nn.utils.clip_grad_norm_(net.parameters(), 5.0)
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        history["train"].append(float(np.mean(epoch_losses)))
        history["holdout"].append(_evaluate(net, hold_batches, vad_weight))
        if log:
            log(f"epoch {epoch:2d}: train {history['train'][-1]:.5f} "
                f"holdout {history['holdout'][-1]:.5f}")
    return net, history


def save_checkpoint(net: GainNet, path, history=None):
    torch.save({"tensors": net.export_tensors(), "history": history}, path)


def load_checkpoint(path) -> dict:
    return torch.load(path, weights_only=False)

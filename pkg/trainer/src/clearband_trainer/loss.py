"""Training objective.

Gain error is measured after raising both gains to gamma = 1/2 (mean
squared error on energy^(1/4)): square-root compression matches how over-
vs under-suppression is heard, where plain MSE or cross-entropy does not.
As gamma -> 0 the loss approaches squared log-gain error, which over-
suppresses for lack of a gain floor. Bands with undefined ground truth
contribute nothing; frames where every band is undefined (digital silence)
are also dropped from the VAD term so they cannot touch the gradients.
"""

from __future__ import annotations

import torch

GAMMA = 0.5
VAD_WEIGHT = 0.5


def gain_loss(target: torch.Tensor, predicted: torch.Tensor,
              mask: torch.Tensor, gamma: float = GAMMA) -> torch.Tensor:
    """Mean over defined entries of (g^gamma - g_hat^gamma)^2."""
    mask = mask.to(target.dtype)
    diff = (target.clamp(min=0.0) ** gamma
            - predicted.clamp(min=0.0) ** gamma) ** 2
    denom = mask.sum().clamp(min=1.0)
    return (diff * mask).sum() / denom


def vad_loss(target: torch.Tensor, predicted: torch.Tensor,
             frame_mask: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy over frames that carry any defined band."""
    frame_mask = frame_mask.to(target.dtype)
    eps = 1e-7
    p = predicted.clamp(eps, 1.0 - eps)
    bce = -(target * torch.log(p) + (1.0 - target) * torch.log(1.0 - p))
    denom = frame_mask.sum().clamp(min=1.0)
    return (bce * frame_mask).sum() / denom


def total_loss(target_gains, predicted_gains, mask, target_vad,
               predicted_vad, vad_weight: float = VAD_WEIGHT) -> torch.Tensor:
    frame_mask = mask.any(dim=-1)
    return (gain_loss(target_gains, predicted_gains, mask)
            + vad_weight * vad_loss(target_vad, predicted_vad, frame_mask))

"""Focal classification loss and the frequency-anchor regulariser."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import torch


def _alpha_weights(labels: torch.Tensor, alpha: Optional[float], dtype) -> torch.Tensor:
    if alpha is None:
        return torch.ones(labels.shape, dtype=dtype)
    return torch.where(labels == 1, alpha, 1.0 - alpha).to(dtype)


def focal_loss_from_log_probs(log_probs, labels, mask, alpha: Optional[float] = 0.25, gamma: float = 2.0):
    """Mean of ``-alpha_i (1 - p_i)^gamma log p_i`` over masked nodes.

    ``alpha`` weights the positive (bot) class and ``1 - alpha`` the other;
    ``alpha=None`` gives every node weight one.
    """
    idx = torch.as_tensor(np.flatnonzero(np.asarray(mask)))
    if idx.numel() == 0:
        raise ValueError("focal loss needs a non-empty mask")
    y = torch.as_tensor(np.asarray(labels))[idx].long()
    logp = log_probs[idx].gather(1, y[:, None]).squeeze(1)
    p = torch.exp(logp)
    w = _alpha_weights(y, alpha, log_probs.dtype)
    if gamma == 0:
        mod = torch.ones_like(p)
    else:
        mod = (1.0 - p).clamp_min(0.0) ** gamma
    return -(w * mod * logp).mean()


def focal_loss(probs, labels, mask, alpha: Optional[float] = 0.25, gamma: float = 2.0) -> float:
    probs = torch.as_tensor(np.asarray(probs, dtype=np.float64))
    return float(focal_loss_from_log_probs(torch.log(probs), labels, mask, alpha, gamma))


def freq_loss_torch(centers: Sequence[torch.Tensor], omega_bar: float) -> torch.Tensor:
    if len(centers) == 0:
        raise ValueError("frequency loss needs at least one windowed block")
    dev = torch.stack(list(centers)) - omega_bar
    return (dev**2).mean()


def freq_loss(banks, omega_bar: float) -> float:
    """``mean_c (omega_hat_c - omega_bar)^2`` with ``omega_hat_c = sum_s w_s omega_s``."""
    centers = [torch.tensor(b.center, dtype=torch.float64) for b in banks]
    return float(freq_loss_torch(centers, omega_bar))


@dataclass
class LossTerms:
    focal: float
    freq: float
    total: float
    lambda_f: float
    alpha: Optional[float]
    gamma: float


def total_loss(logits, centers, labels, mask, omega_bar, lambda_f, alpha, gamma):
    """Returns ``(total, focal, freq)`` tensors with ``total = focal + lambda_f * freq``."""
    focal = focal_loss_from_log_probs(torch.log_softmax(logits, dim=1), labels, mask, alpha, gamma)
    if centers:
        freq = freq_loss_torch(centers, omega_bar)
    else:
        freq = torch.zeros((), dtype=logits.dtype)
    return focal + lambda_f * freq, focal, freq

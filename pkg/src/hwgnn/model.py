"""Window-constrained spectral convolution blocks and the stacked classifier."""

from __future__ import annotations

from typing import NamedTuple, Optional

import torch
from torch import nn

from .basis import PolyBasis, chebyshev_states
from .windows import CoefficientOperator, WindowMLP


class HWConv(nn.Module):
    """``H -> sum_s w_s sum_k c_{s,k} P_k(L) H W_s``.

    The Chebyshev recurrence states of ``H`` are computed once per call and
    shared by every window, so one forward costs ``K`` sparse products.
    ``variant="plain"`` swaps the window bank for one directly learned
    coefficient vector and a single weight matrix.
    """

    def __init__(
        self,
        dim: int,
        basis: PolyBasis,
        n_windows: int = 5,
        variant: str = "windowed",
        coeff_mode: str = "overlap",
        sigma_min: float = 0.05,
        sigma_max: float = 1.0,
        mlp_hidden: int = 16,
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        self.basis = basis
        self.variant = variant
        self.register_buffer(
            "cheb", torch.as_tensor(basis.chebyshev_matrix, dtype=torch.float64)
        )
        if variant == "windowed":
            self.window_mlp = WindowMLP(n_windows, mlp_hidden, sigma_min, sigma_max, generator)
            self.logits = nn.Parameter(torch.zeros(n_windows))
            self.weight = nn.Parameter(torch.empty(n_windows, dim, dim))
            self.coeff_op = CoefficientOperator(basis, coeff_mode)
        elif variant == "plain":
            self.theta = nn.Parameter(torch.ones(basis.size))
            self.weight = nn.Parameter(torch.empty(1, dim, dim))
        else:
            raise ValueError(f"unknown variant {variant!r}")
        for s in range(self.weight.shape[0]):
            nn.init.xavier_uniform_(self.weight.data[s], generator=generator)

    @property
    def n_windows(self) -> int:
        return self.weight.shape[0]

    def window_params(self, omega_bar: float):
        """(omega, sigma, coeffs, mixture weights) for the current parameters."""
        omega, sigma = self.window_mlp(omega_bar)
        coeffs = self.coeff_op(omega, sigma)
        return omega, sigma, coeffs, torch.softmax(self.logits, dim=0)

    def forward(self, H, lap, omega_bar: float, trace: Optional[dict] = None, prefix: str = ""):
        states = torch.stack(chebyshev_states(lap, H, self.basis.order))
        cheb = self.cheb.to(H.dtype)
        if self.variant == "plain":
            mix = (self.theta @ cheb).unsqueeze(0)
            weights = torch.ones(1, dtype=H.dtype)
            center = None
        else:
            omega, sigma, coeffs, weights = self.window_params(omega_bar)
            mix = coeffs @ cheb
            center = (weights * omega).sum()
            if trace is not None:
                trace[prefix + "omega"] = omega
                trace[prefix + "sigma"] = sigma
                trace[prefix + "coeffs"] = coeffs
                trace[prefix + "weights"] = weights
        # sum_s w_s sum_j mix_sj T_j W_s == sum_j T_j V_j with V_j = sum_s w_s mix_sj W_s,
        # so the n-sized work is one product regardless of S
        V = torch.einsum("s,sj,sde->jde", weights, mix, self.weight)
        n, d = H.shape
        out = states.permute(1, 0, 2).reshape(n, -1) @ V.reshape(-1, V.shape[-1])
        if trace is not None:
            trace[prefix + "out"] = out
        return out, center


class ModelOutput(NamedTuple):
    logits: torch.Tensor
    centers: list


class HWModel(nn.Module):
    """Input projection, ``n_layers`` residual HW-Conv blocks, 2-way head.

    ``H <- relu(H + HWConv(H))`` per block; the projection output is passed
    through ReLU too, so a block whose convolution returns zero is an exact
    identity.
    """

    def __init__(
        self,
        in_dim: int,
        basis: PolyBasis,
        hidden: int = 64,
        n_layers: int = 2,
        n_windows: int = 5,
        variant: str = "windowed",
        coeff_mode: str = "overlap",
        sigma_min: float = 0.05,
        sigma_max: float = 1.0,
        mlp_hidden: int = 16,
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        self.basis = basis
        self.proj = nn.Linear(in_dim, hidden)
        self.blocks = nn.ModuleList(
            HWConv(hidden, basis, n_windows, variant, coeff_mode, sigma_min, sigma_max,
                   mlp_hidden, generator)
            for _ in range(n_layers)
        )
        self.head = nn.Linear(hidden, 2)
        for lin in (self.proj, self.head):
            nn.init.xavier_uniform_(lin.weight, generator=generator)
            nn.init.zeros_(lin.bias)

    def forward(self, X, lap, omega_bar: float, trace: Optional[dict] = None) -> ModelOutput:
        H = torch.relu(self.proj(X))
        if trace is not None:
            trace["proj"] = H
        centers = []
        for i, block in enumerate(self.blocks):
            conv, center = block(H, lap, omega_bar, trace, prefix=f"blocks.{i}.")
            H = torch.relu(H + conv)
            if center is not None:
                centers.append(center)
        logits = self.head(H)
        if trace is not None:
            trace["logits"] = logits
        return ModelOutput(logits, centers)

    def predict_proba(self, X, lap, omega_bar: float) -> torch.Tensor:
        with torch.no_grad():
            return torch.softmax(self(X, lap, omega_bar).logits, dim=1)

"""Gaussian spectral windows and their polynomial overlap coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import torch
from numpy.polynomial.legendre import leggauss
from torch import nn

from .basis import PolyBasis

SIGMA_MIN = 0.05
SIGMA_MAX = 1.0
COEFF_MODES = ("overlap", "projection")


@dataclass(frozen=True)
class GaussianWindow:
    omega: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("window bandwidth must be positive")


def eval_window(w: GaussianWindow, lam):
    lam = np.asarray(lam, dtype=np.float64)
    return np.exp(-((lam - w.omega) ** 2) / (2.0 * w.sigma**2))


@lru_cache(maxsize=8)
def quadrature_rule(panels: int = 64, points: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[0, 2]``.

    64 panels of 8 points resolve the narrowest legal window (sigma = 0.05)
    to machine precision; the nodes are fixed, so coefficients stay smooth
    functions of (omega, sigma).
    """
    t, wt = leggauss(points)
    edges = np.linspace(0.0, 2.0, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (t + 1.0)).ravel()
    weights = (0.5 * h[:, None] * wt).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class CoefficientOperator:
    """Maps window parameters to ``c_{s,k}`` for one basis (torch, differentiable)."""

    def __init__(self, basis: PolyBasis, mode: str = "overlap", panels: int = 64, points: int = 8):
        if mode not in COEFF_MODES:
            raise ValueError(f"unknown coefficient mode {mode!r}")
        self.basis = basis
        self.mode = mode
        nodes, weights = quadrature_rule(panels, points)
        table = basis.evaluate(nodes)
        self._nodes = nodes.copy()
        # fold quadrature weights into the basis table once
        self._weighted = weights[:, None] * table
        self._gram_inv = None
        if mode == "projection":
            gram = table.T @ self._weighted
            self._gram_inv = np.linalg.inv(gram)
        self._cache: dict = {}

    def _tensors(self, dtype):
        if dtype not in self._cache:
            nodes = torch.as_tensor(self._nodes, dtype=dtype)
            weighted = torch.as_tensor(self._weighted, dtype=dtype)
            ginv = None if self._gram_inv is None else torch.as_tensor(self._gram_inv, dtype=dtype)
            self._cache[dtype] = (nodes, weighted, ginv)
        return self._cache[dtype]

    def __call__(self, omega: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
        nodes, weighted, ginv = self._tensors(omega.dtype)
        G = torch.exp(-((nodes[None, :] - omega[:, None]) ** 2) / (2.0 * sigma[:, None] ** 2))
        c = G @ weighted
        if ginv is not None:
            c = c @ ginv  # Gram matrix is symmetric
        return c


def window_coefficients(
    w: GaussianWindow, basis: PolyBasis, mode: str = "overlap"
) -> np.ndarray:
    """``c_k = int_0^2 G(lam) P_k(lam) dlam`` for every basis index."""
    op = CoefficientOperator(basis, mode)
    omega = torch.tensor([w.omega], dtype=torch.float64)
    sigma = torch.tensor([w.sigma], dtype=torch.float64)
    return op(omega, sigma)[0].numpy()


def gaussian_integral(omega: float, sigma: float) -> float:
    """Closed form of ``int_0^2 exp(-(lam-omega)^2 / 2 sigma^2) dlam``."""
    phi = lambda z: 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))  # noqa: E731
    return sigma * math.sqrt(2.0 * math.pi) * (phi((2.0 - omega) / sigma) - phi(-omega / sigma))


def target_frequency(h: float) -> float:
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"homophily must lie in [0, 1], got {h}")
    return 2.0 * (1.0 - h)


def initial_centers(n_windows: int) -> np.ndarray:
    s = np.arange(1, n_windows + 1, dtype=np.float64)
    return 2.0 * (s - 0.5) / n_windows


def clip_ranges(n_windows: int) -> np.ndarray:
    """Per-window ``[s-, s+]`` of half-width ``1/S`` around the initial center."""
    c = initial_centers(n_windows)
    half = 1.0 / n_windows
    return np.stack([c - half, c + half], axis=1)


def _mlp(hidden: int, generator: Optional[torch.Generator]) -> nn.Sequential:
    net = nn.Sequential(
        nn.Linear(2, hidden), nn.Tanh(),
        nn.Linear(hidden, hidden), nn.Tanh(),
        nn.Linear(hidden, 1),
    )
    for layer in (net[0], net[2]):
        nn.init.xavier_uniform_(layer.weight, generator=generator)
        nn.init.zeros_(layer.bias)
    nn.init.zeros_(net[4].weight)
    nn.init.zeros_(net[4].bias)
    return net


class WindowMLP(nn.Module):
    """Produces (omega_s, sigma_s) from the homophily target and window index.

    Both outputs pass through scaled tanh squashing, so centers never leave
    their clip interval and bandwidths stay in ``[sigma_min, sigma_max]``.
    With the zero-initialised output layers the centers start exactly on the
    equally spaced grid.
    """

    def __init__(
        self,
        n_windows: int,
        hidden: int = 16,
        sigma_min: float = SIGMA_MIN,
        sigma_max: float = SIGMA_MAX,
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        if n_windows < 1:
            raise ValueError("need at least one window")
        if not 0 < sigma_min < sigma_max:
            raise ValueError("require 0 < sigma_min < sigma_max")
        self.n_windows = n_windows
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        self.mlp_omega = _mlp(hidden, generator)
        self.mlp_sigma = _mlp(hidden, generator)
        s = torch.arange(1, n_windows + 1, dtype=torch.float64)
        self.register_buffer("s_norm", (s - 0.5) / n_windows)
        self.register_buffer("centers", torch.as_tensor(initial_centers(n_windows)))
        self.half_width = 1.0 / n_windows

    def forward(self, omega_bar) -> tuple[torch.Tensor, torch.Tensor]:
        dtype = self.mlp_omega[0].weight.dtype
        s_norm = self.s_norm.to(dtype)
        inp = torch.stack([torch.full_like(s_norm, float(omega_bar)), s_norm], dim=1)
        raw_omega = self.mlp_omega(inp).squeeze(1)
        raw_sigma = self.mlp_sigma(inp).squeeze(1)
        omega = self.centers.to(dtype) + self.half_width * torch.tanh(raw_omega)
        span = self.sigma_max - self.sigma_min
        sigma = self.sigma_min + 0.5 * span * (1.0 + torch.tanh(raw_sigma))
        return omega, sigma


def produce_windows(mlps: WindowMLP, h: float, n_windows: Optional[int] = None) -> list[GaussianWindow]:
    if n_windows is not None and n_windows != mlps.n_windows:
        raise ValueError(f"MLP was built for {mlps.n_windows} windows, not {n_windows}")
    with torch.no_grad():
        omega, sigma = mlps(target_frequency(h))
    return [GaussianWindow(float(o), float(s)) for o, s in zip(omega, sigma)]


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = np.exp(z - z.max())
    return z / z.sum()


@dataclass
class WindowBank:
    """A set of windows with their coefficients and mixture logits."""

    windows: list[GaussianWindow]
    coeffs: np.ndarray
    logits: np.ndarray = field(default=None)
    clip: Optional[np.ndarray] = None

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=np.float64))
        if self.logits is None:
            self.logits = np.zeros(len(self.windows))
        self.logits = np.asarray(self.logits, dtype=np.float64)
        if self.coeffs.shape[0] != len(self.windows) or len(self.logits) != len(self.windows):
            raise ValueError("coefficients, logits and windows disagree on S")

    @classmethod
    def from_windows(
        cls, windows: Sequence[GaussianWindow], basis: PolyBasis, logits=None, mode: str = "overlap"
    ) -> "WindowBank":
        op = CoefficientOperator(basis, mode)
        omega = torch.tensor([w.omega for w in windows], dtype=torch.float64)
        sigma = torch.tensor([w.sigma for w in windows], dtype=torch.float64)
        coeffs = op(omega, sigma).numpy()
        return cls(list(windows), coeffs, logits, clip_ranges(len(windows)))

    @property
    def weights(self) -> np.ndarray:
        return softmax(self.logits)

    @property
    def center(self) -> float:
        """Importance-weighted center frequency ``sum_s w_s omega_s``."""
        return float(np.dot(self.weights, [w.omega for w in self.windows]))


def effective_response(bank: WindowBank, basis: PolyBasis, grid) -> tuple[np.ndarray, np.ndarray]:
    """Per-window polynomial responses and their softmax-weighted mix."""
    table = basis.evaluate(grid)
    per_window = bank.coeffs @ table.T
    combined = bank.weights @ per_window
    return per_window, combined

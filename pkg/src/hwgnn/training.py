"""Full-graph training with Adam, early stopping on validation Macro-F1."""

from __future__ import annotations

import copy
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from .basis import PolyBasis
from .config import RunConfig, derive_seed, thread_count
from .graph import Graph, Laplacian, build_laplacian, homophily_ratio
from .losses import LossTerms, total_loss
from .metrics import MetricsReport, macro_f1
from .model import HWModel
from .windows import GaussianWindow, WindowBank, target_frequency

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, tensor: str):
        super().__init__(f"non-finite loss at epoch {epoch}; first non-finite tensor: {tensor}")
        self.epoch = epoch
        self.tensor = tensor


def torch_dtype(precision: str) -> torch.dtype:
    return torch.float64 if precision == "float64" else torch.float32


def configure_threads() -> None:
    torch.set_num_threads(thread_count())


def make_basis(config: RunConfig) -> PolyBasis:
    return PolyBasis(config.basis, config.order, config.jacobi_a, config.jacobi_b)


def build_model(config: RunConfig, in_dim: int) -> HWModel:
    gen = torch.Generator().manual_seed(derive_seed(config.seed, "init"))
    model = HWModel(
        in_dim,
        make_basis(config),
        hidden=config.hidden,
        n_layers=config.n_layers,
        n_windows=config.n_windows,
        variant=config.variant,
        coeff_mode=config.coeff_mode,
        sigma_min=config.sigma_min,
        sigma_max=config.sigma_max,
        mlp_hidden=config.mlp_hidden,
        generator=gen,
    )
    return model.to(torch_dtype(config.precision))


def first_nonfinite(named) -> Optional[str]:
    for name, t in named:
        if t is not None and not torch.isfinite(t).all():
            return name
    return None


def backward(loss: torch.Tensor, model: HWModel, forward_trace=None, epoch: int = -1) -> dict:
    """Backpropagate ``loss`` and return ``{parameter name: gradient}``.

    A non-finite loss raises :class:`DivergenceError` naming the first
    non-finite parameter, or else the first non-finite forward intermediate
    (``forward_trace`` is a callable returning an ordered name->tensor dict).
    """
    if not torch.isfinite(loss):
        name = first_nonfinite(model.named_parameters())
        if name is None and forward_trace is not None:
            with torch.no_grad():
                name = first_nonfinite(forward_trace().items())
        raise DivergenceError(epoch, name or "loss")
    model.zero_grad(set_to_none=True)
    loss.backward()
    return {
        n: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for n, p in model.named_parameters()
    }


def block_banks(model: HWModel, omega_bar: float) -> list[WindowBank]:
    banks = []
    with torch.no_grad():
        for block in model.blocks:
            if block.variant != "windowed":
                continue
            omega, sigma, coeffs, _ = block.window_params(omega_bar)
            windows = [GaussianWindow(float(o), float(s)) for o, s in zip(omega, sigma)]
            banks.append(
                WindowBank(windows, coeffs.double().numpy(), block.logits.double().numpy())
            )
    return banks


@dataclass
class TrainRun:
    config: RunConfig
    model: HWModel
    graph: Graph
    laplacian: Laplacian
    homophily: float
    omega_bar: float
    history: list = field(default_factory=list)
    best_epoch: int = 0
    wall_clock_s: float = 0.0

    def _features(self, graph: Optional[Graph] = None):
        g = graph or self.graph
        return torch.as_tensor(g.features, dtype=torch_dtype(self.config.precision))

    def predict_proba(self, graph: Optional[Graph] = None) -> np.ndarray:
        g = graph or self.graph
        lap = self.laplacian if graph is None else build_laplacian(graph)
        self.model.eval()
        return self.model.predict_proba(self._features(g), lap, self.omega_bar).double().numpy()

    def predict(self, graph: Optional[Graph] = None) -> np.ndarray:
        return self.predict_proba(graph).argmax(axis=1)

    def report(self, split: str = "test", graph: Optional[Graph] = None) -> MetricsReport:
        g = graph or self.graph
        mask = getattr(g, f"{split}_mask")
        if mask is None:
            raise ValueError(f"graph has no {split} mask")
        pred = self.predict(graph)
        return MetricsReport.from_predictions(
            g.labels[mask], pred[mask], curve=self.history,
            wall_clock_s=self.wall_clock_s if self.config.record_wall_clock else None,
        )

    def banks(self) -> list[WindowBank]:
        return block_banks(self.model, self.omega_bar)

    def centers(self) -> list[float]:
        return [b.center for b in self.banks()]


def resolve_homophily(g: Graph, config: RunConfig) -> float:
    if config.homophily is not None:
        return float(config.homophily)
    return homophily_ratio(g, mask=g.train_mask)


def loss_terms(model, X, lap, g: Graph, mask, omega_bar, config) -> LossTerms:
    with torch.no_grad():
        out = model(X, lap, omega_bar)
        total, focal, freq = total_loss(
            out.logits, out.centers, g.labels, mask, omega_bar,
            config.lambda_f, config.alpha, config.gamma,
        )
    return LossTerms(float(focal), float(freq), float(total), config.lambda_f, config.alpha, config.gamma)


def train(g: Graph, config: RunConfig) -> TrainRun:
    """Optimise focal + lambda_f * frequency loss; keep the best-validation state."""
    if g.labels is None or g.train_mask is None or g.val_mask is None:
        raise ValueError("training needs labels plus train and val masks")
    if not g.train_mask.any() or not g.val_mask.any():
        raise ValueError("train and val masks must be non-empty")
    configure_threads()
    start = time.perf_counter()
    dtype = torch_dtype(config.precision)
    lap = build_laplacian(g)
    h = resolve_homophily(g, config)
    omega_bar = target_frequency(h)
    model = build_model(config, g.num_features)
    X = torch.as_tensor(g.features, dtype=dtype)
    y_val = g.labels[g.val_mask]
    y_train = g.labels[g.train_mask]
    opt = torch.optim.Adam(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)

    def evaluate(epoch: int, train_loss: Optional[LossTerms]) -> dict:
        model.eval()
        with torch.no_grad():
            out = model(X, lap, omega_bar)
            pred = out.logits.argmax(dim=1).numpy()
            val_total, _, _ = total_loss(
                out.logits, out.centers, g.labels, g.val_mask, omega_bar,
                config.lambda_f, config.alpha, config.gamma,
            )
            if train_loss is None:
                tr_total, tr_focal, tr_freq = total_loss(
                    out.logits, out.centers, g.labels, g.train_mask, omega_bar,
                    config.lambda_f, config.alpha, config.gamma,
                )
                train_loss = LossTerms(float(tr_focal), float(tr_freq), float(tr_total),
                                       config.lambda_f, config.alpha, config.gamma)
        return {
            "epoch": epoch,
            "train_loss": train_loss.total,
            "focal": train_loss.focal,
            "freq": train_loss.freq,
            "val_loss": float(val_total),
            "train_f1": macro_f1(y_train, pred[g.train_mask]),
            "val_f1": macro_f1(y_val, pred[g.val_mask]),
        }

    history = [evaluate(0, None)]
    best_f1 = history[0]["val_f1"]
    best_epoch = 0
    best_state = copy.deepcopy(model.state_dict())

    for epoch in range(1, config.epochs + 1):
        model.train()
        out = model(X, lap, omega_bar)
        total, focal, freq = total_loss(
            out.logits, out.centers, g.labels, g.train_mask, omega_bar,
            config.lambda_f, config.alpha, config.gamma,
        )

        def trace():
            t: dict = {}
            model(X, lap, omega_bar, trace=t)
            return t

        backward(total, model, trace, epoch)
        opt.step()
        terms = LossTerms(focal.item(), freq.item(), total.item(),
                          config.lambda_f, config.alpha, config.gamma)
        rec = evaluate(epoch, terms)
        history.append(rec)
        if rec["val_f1"] > best_f1:
            best_f1, best_epoch = rec["val_f1"], epoch
            best_state = copy.deepcopy(model.state_dict())
        elif epoch - best_epoch >= config.patience:
            log.debug("early stop at epoch %d (best %d)", epoch, best_epoch)
            break

    model.load_state_dict(best_state)
    model.eval()
    return TrainRun(
        config=config,
        model=model,
        graph=g,
        laplacian=lap,
        homophily=h,
        omega_bar=omega_bar,
        history=history,
        best_epoch=best_epoch,
        wall_clock_s=time.perf_counter() - start,
    )

"""Homophily-aware Gaussian-window polynomial spectral filters for node
anomaly (bot) detection."""

from .basis import PolyBasis, apply_basis, eval_basis
from .config import RunConfig, load_config
from .estimator import HWGNNClassifier, SpectralBasisFeatures
from .graph import (
    Graph,
    Laplacian,
    build_laplacian,
    count_spmm,
    exact_filter_oracle,
    homophily_ratio,
    spectral_energy_profile,
)
from .losses import focal_loss, freq_loss
from .model import HWConv, HWModel
from .synth import SBMSpec, generate, premise_check
from .training import TrainRun, train
from .windows import (
    GaussianWindow,
    WindowBank,
    WindowMLP,
    effective_response,
    eval_window,
    produce_windows,
    target_frequency,
    window_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "Graph", "Laplacian", "build_laplacian", "homophily_ratio", "exact_filter_oracle",
    "spectral_energy_profile", "count_spmm",
    "PolyBasis", "eval_basis", "apply_basis",
    "GaussianWindow", "WindowBank", "WindowMLP", "eval_window", "window_coefficients",
    "target_frequency", "produce_windows", "effective_response",
    "HWConv", "HWModel", "focal_loss", "freq_loss", "train", "TrainRun",
    "SBMSpec", "generate", "premise_check",
    "RunConfig", "load_config",
    "HWGNNClassifier", "SpectralBasisFeatures",
]

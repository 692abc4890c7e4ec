"""Two-class contextual stochastic block models with a calibrated homophily."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.stats import spearmanr

from .graph import Graph, build_laplacian, high_frequency_share, spectral_energy_profile


@dataclass(frozen=True)
class SBMSpec:
    n: int = 2000
    bot_fraction: float = 0.3
    homophily: float = 0.5
    mean_degree: float = 10.0
    n_features: int = 16
    mu: float = 1.0
    seed: int = 0

    def class_sizes(self) -> tuple[int, int]:
        n_bot = int(round(self.bot_fraction * self.n))
        return self.n - n_bot, n_bot

    def edge_probabilities(self) -> tuple[float, float]:
        """Intra- and inter-class edge probabilities ``(p_in, p_out)``.

        Chosen so the expected share of same-label edges is exactly the target
        homophily and the expected mean degree is ``mean_degree``, with the
        pair counts of unequal class sizes accounted for.
        """
        n0, n1 = self.class_sizes()
        m = self.n * self.mean_degree / 2.0
        intra_pairs = n0 * (n0 - 1) / 2.0 + n1 * (n1 - 1) / 2.0
        inter_pairs = float(n0 * n1)
        if intra_pairs <= 0 or inter_pairs <= 0:
            raise ValueError("both classes need at least two nodes")
        p_in = self.homophily * m / intra_pairs
        p_out = (1.0 - self.homophily) * m / inter_pairs
        if not (0.0 < p_in < 1.0 and 0.0 < p_out < 1.0):
            raise ValueError(
                f"degenerate edge probabilities p_in={p_in:.4g}, p_out={p_out:.4g}"
            )
        return p_in, p_out

    def validate(self) -> None:
        if self.n < 4:
            raise ValueError("n must be at least 4")
        if not 0.0 < self.bot_fraction < 1.0:
            raise ValueError("bot_fraction must lie in (0, 1)")
        if not 0.0 < self.homophily < 1.0:
            raise ValueError("homophily must lie in (0, 1)")
        if self.mean_degree <= 0 or self.n_features < 1 or self.mu < 0:
            raise ValueError("mean_degree > 0, n_features >= 1 and mu >= 0 required")
        self.edge_probabilities()


def _triangle_pairs(idx: np.ndarray, n_local: int) -> tuple[np.ndarray, np.ndarray]:
    # linear index over {(i, j): 0 <= i < j < n_local}, row-major
    idx = idx.astype(np.float64)
    i = np.floor(
        ((2 * n_local - 1) - np.sqrt((2 * n_local - 1) ** 2 - 8 * idx)) / 2
    ).astype(np.int64)
    start = i * (2 * n_local - i - 1) // 2
    # correct float rounding on either side
    over = start > idx
    i[over] -= 1
    start = i * (2 * n_local - i - 1) // 2
    nxt = (i + 1) * (2 * n_local - i - 2) // 2
    under = nxt <= idx
    i[under] += 1
    start = i * (2 * n_local - i - 1) // 2
    j = (idx.astype(np.int64) - start) + i + 1
    return i, j


def _sample_block(rng, n_pairs: int, p: float) -> np.ndarray:
    # per-pair Bernoulli(p) is Binomial(n_pairs, p) edges placed uniformly
    m = rng.binomial(n_pairs, p)
    return np.sort(rng.choice(n_pairs, size=m, replace=False))


def sample_edges(rng, members0: np.ndarray, members1: np.ndarray, p_in: float, p_out: float) -> np.ndarray:
    parts = []
    for members in (members0, members1):
        k = len(members)
        pairs = k * (k - 1) // 2
        if pairs == 0:
            continue
        idx = _sample_block(rng, pairs, p_in)
        i, j = _triangle_pairs(idx, k)
        parts.append(np.stack([members[i], members[j]], axis=1))
    idx = _sample_block(rng, len(members0) * len(members1), p_out)
    i, j = np.divmod(idx, len(members1))
    parts.append(np.stack([members0[i], members1[j]], axis=1))
    return np.concatenate(parts)


def stratified_masks(rng, labels: np.ndarray, fractions=(0.6, 0.2, 0.2)):
    n = len(labels)
    masks = [np.zeros(n, dtype=bool) for _ in fractions]
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_train = int(round(fractions[0] * len(idx)))
        n_val = int(round(fractions[1] * len(idx)))
        masks[0][idx[:n_train]] = True
        masks[1][idx[n_train:n_train + n_val]] = True
        masks[2][idx[n_train + n_val:]] = True
    return masks


def generate(spec: SBMSpec) -> Graph:
    """Sample a labelled graph with bot-like class 1 and 60/20/20 masks."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n0, n1 = spec.class_sizes()
    labels = np.zeros(spec.n, dtype=np.int64)
    perm = rng.permutation(spec.n)
    labels[perm[:n1]] = 1
    members0 = np.flatnonzero(labels == 0)
    members1 = np.flatnonzero(labels == 1)
    p_in, p_out = spec.edge_probabilities()
    edges = sample_edges(rng, members0, members1, p_in, p_out)

    direction = rng.standard_normal(spec.n_features)
    direction /= np.linalg.norm(direction)
    sign = np.where(labels == 1, 1.0, -1.0)
    features = spec.mu * sign[:, None] * direction[None, :]
    features = features + rng.standard_normal((spec.n, spec.n_features))

    train, val, test = stratified_masks(rng, labels)
    return Graph(spec.n, edges, features, labels, train, val, test)


def centered_label_signal(labels: np.ndarray) -> np.ndarray:
    s = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    return s - s.mean()


def premise_check(h_values: Iterable[float], template: Optional[SBMSpec] = None) -> list[tuple[float, float]]:
    """High-frequency energy share (lambda > 1) of the centered label signal per h."""
    template = template or SBMSpec(n=500)
    rows = []
    for h in h_values:
        spec = SBMSpec(**{**template.__dict__, "homophily": float(h)})
        g = generate(spec)
        lam, energy = spectral_energy_profile(build_laplacian(g), centered_label_signal(g.labels))
        rows.append((float(h), high_frequency_share(lam, energy)))
    return rows


def premise_correlation(rows) -> float:
    h, share = zip(*rows)
    return float(spearmanr(h, share).statistic)

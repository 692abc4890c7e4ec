"""Sparse attributed graphs, the symmetric normalized Laplacian and a dense
spectral oracle used for verification."""

from __future__ import annotations

import contextlib
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np
import scipy.sparse as sp
import torch

UNLABELED = -1
ORACLE_MAX_NODES = 512


class GraphError(ValueError):
    """Raised when a graph violates its structural invariants."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected single-relation attributed graph.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : ndarray of shape (m, 2)
        Undirected edges with ``u < v``, sorted and deduplicated.
    features : ndarray of shape (n, d0)
        Node feature matrix.
    labels : ndarray of shape (n,), optional
        Binary labels with ``-1`` for unlabeled nodes.
    train_mask, val_mask, test_mask : ndarray of bool, optional
        Disjoint node masks over labeled nodes.
    """

    n: int
    edges: np.ndarray
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    train_mask: Optional[np.ndarray] = None
    val_mask: Optional[np.ndarray] = None
    test_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        edges = canonical_edges(self.edges, self.n)
        object.__setattr__(self, "edges", edges)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != self.n:
            raise GraphError(
                f"feature matrix has shape {features.shape}, expected ({self.n}, d0)"
            )
        object.__setattr__(self, "features", features)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (self.n,):
                raise GraphError("labels must have one entry per node")
            if not np.isin(labels, (UNLABELED, 0, 1)).all():
                raise GraphError("labels must be 0, 1 or -1 (unlabeled)")
            object.__setattr__(self, "labels", labels)
        masks = []
        for name in ("train_mask", "val_mask", "test_mask"):
            mask = getattr(self, name)
            if mask is None:
                continue
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (self.n,):
                raise GraphError(f"{name} must have one entry per node")
            if self.labels is None or (self.labels[mask] == UNLABELED).any():
                raise GraphError(f"{name} contains unlabeled nodes")
            object.__setattr__(self, name, mask)
            masks.append(mask)
        for i in range(len(masks)):
            for j in range(i + 1, len(masks)):
                if (masks[i] & masks[j]).any():
                    raise GraphError("train/val/test masks must be disjoint")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form with sorted column indices."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        A = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n)
        )
        A.sort_indices()
        return A

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.float64)

    def with_masks(self, train=None, val=None, test=None) -> "Graph":
        return Graph(
            self.n, self.edges, self.features, self.labels,
            train_mask=train, val_mask=val, test_mask=test,
        )


def canonical_edges(edges, n: int) -> np.ndarray:
    """Return edges as a sorted, deduplicated ``(m, 2)`` array with ``u < v``.

    Self-loops and out-of-range endpoints are rejected rather than dropped.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) == 0:
        return e
    if (e < 0).any() or (e >= n).any():
        raise GraphError(f"edge endpoint out of range [0, {n})")
    if (e[:, 0] == e[:, 1]).any():
        raise GraphError("self-loops are not allowed")
    e = np.sort(e, axis=1)
    e = np.unique(e, axis=0)
    return e


@dataclass(frozen=True, eq=False)
class Laplacian:
    """Symmetric normalized Laplacian ``L = I - D^{-1/2} A D^{-1/2}``.

    Degree-0 nodes keep ``L_ii = 1`` so the spectrum stays inside ``[0, 2]``.
    """

    matrix: sp.csr_matrix
    degree: np.ndarray
    _torch_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def torch_csr(self, dtype: torch.dtype = torch.float64) -> torch.Tensor:
        cached = self._torch_cache.get(dtype)
        if cached is None:
            M = self.matrix
            with warnings.catch_warnings():
                warnings.filterwarnings("ignore", message="Sparse CSR tensor support")
                cached = torch.sparse_csr_tensor(
                    torch.from_numpy(M.indptr.astype(np.int64)),
                    torch.from_numpy(M.indices.astype(np.int64)),
                    torch.from_numpy(M.data).to(dtype),
                    size=M.shape,
                    check_invariants=False,
                )
            self._torch_cache[dtype] = cached
        return cached

    def matmul(self, X):
        """One sparse product ``L @ X`` for numpy arrays or torch tensors."""
        _SPMM_COUNTER.increment()
        if isinstance(X, torch.Tensor):
            return _SymmetricSpMM.apply(self.torch_csr(X.dtype), X)
        return np.asarray(self.matrix @ X)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


class _SymmetricSpMM(torch.autograd.Function):
    # Backward reuses L because L is symmetric: d(LX)/dX^T G = L G.

    @staticmethod
    def forward(ctx, L, X):
        ctx.L = L
        return L @ X

    @staticmethod
    def backward(ctx, grad):
        return None, ctx.L @ grad


class _Counter(threading.local):
    def __init__(self):
        self.stack: list[list[int]] = []

    def increment(self):
        for slot in self.stack:
            slot[0] += 1


_SPMM_COUNTER = _Counter()


class SpMMCount:
    def __init__(self):
        self._slot = [0]

    @property
    def count(self) -> int:
        return self._slot[0]


@contextlib.contextmanager
def count_spmm() -> Iterator[SpMMCount]:
    """Count sparse Laplacian products issued inside the block.

    >>> with count_spmm() as c:
    ...     _ = lap.matmul(X)
    >>> c.count
    1
    """
    counter = SpMMCount()
    _SPMM_COUNTER.stack.append(counter._slot)
    try:
        yield counter
    finally:
        _SPMM_COUNTER.stack.remove(counter._slot)


def build_laplacian(g: Graph) -> Laplacian:
    A = g.adjacency()
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    D = sp.diags(inv_sqrt)
    L = (sp.identity(g.n, format="csr") - D @ A @ D).tocsr()
    L.sort_indices()
    L.eliminate_zeros()
    return Laplacian(L, deg)


def homophily_ratio(g: Graph, mask: Optional[np.ndarray] = None) -> float:
    """Fraction of counted edges whose endpoints share a label.

    Only edges with both endpoints labeled (and, if ``mask`` is given, both
    inside ``mask``) are counted.
    """
    if g.labels is None:
        raise GraphError("homophily needs labels")
    known = g.labels != UNLABELED
    if mask is not None:
        known = known & np.asarray(mask, dtype=bool)
    u, v = g.edges[:, 0], g.edges[:, 1]
    counted = known[u] & known[v]
    if not counted.any():
        raise GraphError("no edge has both endpoints labeled")
    same = g.labels[u[counted]] == g.labels[v[counted]]
    return float(same.mean())


def _check_oracle_size(lap: Laplacian, cap: int):
    if lap.n > cap:
        raise GraphError(
            f"dense spectral oracle is limited to {cap} nodes, got {lap.n}"
        )


def eigh_laplacian(lap: Laplacian, cap: int = ORACLE_MAX_NODES):
    _check_oracle_size(lap, cap)
    return np.linalg.eigh(lap.dense())


def exact_filter_oracle(
    lap: Laplacian,
    response: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    cap: int = ORACLE_MAX_NODES,
) -> np.ndarray:
    """Apply ``response(L)`` to ``X`` through a full eigendecomposition."""
    lam, U = eigh_laplacian(lap, cap)
    X = np.asarray(X, dtype=np.float64)
    vec = X.ndim == 1
    if vec:
        X = X[:, None]
    gl = np.asarray(response(lam), dtype=np.float64) * np.ones_like(lam)
    out = U @ (gl[:, None] * (U.T @ X))
    return out[:, 0] if vec else out


def spectral_energy_profile(
    lap: Laplacian, signal: np.ndarray, cap: int = ORACLE_MAX_NODES
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and the signal energy ``|u_i^T x|^2`` at each."""
    lam, U = eigh_laplacian(lap, cap)
    coef = U.T @ np.asarray(signal, dtype=np.float64)
    return lam, coef**2


def high_frequency_share(lam: np.ndarray, energy: np.ndarray, cutoff: float = 1.0) -> float:
    total = energy.sum()
    if total == 0:
        return 0.0
    return float(energy[lam > cutoff].sum() / total)

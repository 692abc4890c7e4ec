"""Input checks shared by the estimator front end."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.utils.validation import check_array

from .graph import UNLABELED, Graph


def check_node_features(X) -> np.ndarray:
    return check_array(X, dtype=np.float64, ensure_2d=True)


def check_node_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {y.shape}")
    if not np.isin(y, (UNLABELED, 0, 1)).all():
        raise ValueError("y must contain 0, 1, or -1 for unlabeled nodes")
    return y.astype(np.int64)


def check_edges(adjacency, n: int) -> np.ndarray:
    """Accept a Graph, an ``(m, 2)`` edge array, or a scipy sparse adjacency.

    Dense adjacency matrices should be wrapped with ``scipy.sparse.csr_matrix``
    first; a bare 2-D array is always read as an edge list.
    """
    if isinstance(adjacency, Graph):
        if adjacency.n != n:
            raise ValueError("graph node count does not match X")
        return adjacency.edges
    if sp.issparse(adjacency):
        A = sp.coo_matrix(adjacency)
        if A.shape != (n, n):
            raise ValueError(f"adjacency must be {n}x{n}, got {A.shape}")
        keep = (A.data != 0) & (A.row != A.col)
        return np.stack([A.row[keep], A.col[keep]], axis=1)
    edges = np.asarray(adjacency)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError("adjacency must be a Graph, an (m, 2) edge array or an n x n matrix")
    return edges

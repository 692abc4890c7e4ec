"""scikit-learn style front ends.

:class:`HWGNNClassifier` is a transductive node classifier: ``X`` holds one
row per node, ``y`` uses ``-1`` for unlabeled nodes and the graph is passed to
``fit`` as ``adjacency``.  :class:`SpectralBasisFeatures` exposes the basis
outputs ``[P_0(L) X, ..., P_K(L) X]`` as a stateless transformer so any
sklearn model can sit on top of them.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_is_fitted

from .basis import PolyBasis, apply_basis
from .config import RunConfig
from .graph import UNLABELED, Graph, build_laplacian
from .training import train
from .validation import check_edges, check_node_features, check_node_labels


class HWGNNClassifier(ClassifierMixin, BaseEstimator):
    """Gaussian-window spectral GNN for binary node classification.

    Parameters
    ----------
    basis : {"bernstein", "jacobi", "beta"}
        Polynomial basis wrapped by the windows.
    n_windows : int
        Number of Gaussian windows per block.
    order : int
        Polynomial order K.
    n_layers : int
        Number of residual window blocks.
    hidden : int
        Hidden width.
    lambda_f : float
        Weight of the frequency-anchor loss, in [0, 1).
    alpha, gamma : float
        Focal loss class balance (weight of class 1) and focusing exponent.
        ``alpha=None`` weighs all nodes equally.
    lr, weight_decay : float
        Adam settings.
    max_epochs, patience : int
        Epoch cap and early-stopping patience on validation Macro-F1.
    variant : {"windowed", "plain"}
        ``"plain"`` learns per-basis coefficients directly (no windows).
    coeff_mode : {"overlap", "projection"}
        How window coefficients are derived from the windows.
    homophily : float or None
        Fixed homophily fed to the window MLPs; measured from training labels
        when None.
    precision : {"float64", "float32"}
    validation_fraction : float
        Share of labeled nodes held out for early stopping when ``fit`` gets no
        ``val_mask``.
    random_state : int
    """

    def __init__(
        self,
        basis: str = "bernstein",
        n_windows: int = 5,
        order: int = 4,
        n_layers: int = 2,
        hidden: int = 64,
        lambda_f: float = 0.3,
        alpha: Optional[float] = 0.25,
        gamma: float = 2.0,
        lr: float = 0.01,
        weight_decay: float = 5e-4,
        max_epochs: int = 500,
        patience: int = 50,
        variant: str = "windowed",
        coeff_mode: str = "overlap",
        homophily: Optional[float] = None,
        precision: str = "float64",
        validation_fraction: float = 0.25,
        random_state: int = 0,
    ):
        self.basis = basis
        self.n_windows = n_windows
        self.order = order
        self.n_layers = n_layers
        self.hidden = hidden
        self.lambda_f = lambda_f
        self.alpha = alpha
        self.gamma = gamma
        self.lr = lr
        self.weight_decay = weight_decay
        self.max_epochs = max_epochs
        self.patience = patience
        self.variant = variant
        self.coeff_mode = coeff_mode
        self.homophily = homophily
        self.precision = precision
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _run_config(self) -> RunConfig:
        return RunConfig(
            basis=self.basis, n_windows=self.n_windows, order=self.order,
            n_layers=self.n_layers, hidden=self.hidden, lambda_f=self.lambda_f,
            alpha=self.alpha, gamma=self.gamma, lr=self.lr,
            weight_decay=self.weight_decay, epochs=self.max_epochs,
            patience=self.patience, variant=self.variant,
            coeff_mode=self.coeff_mode, homophily=self.homophily,
            precision=self.precision, seed=self.random_state,
        )

    def _split(self, y: np.ndarray, val_mask):
        labeled = y != UNLABELED
        if val_mask is not None:
            val = np.asarray(val_mask, dtype=bool) & labeled
            return labeled & ~val, val
        idx = np.flatnonzero(labeled)
        tr, va = train_test_split(
            idx, test_size=self.validation_fraction, stratify=y[idx],
            random_state=self.random_state,
        )
        train_mask = np.zeros(len(y), dtype=bool)
        val_mask = np.zeros(len(y), dtype=bool)
        train_mask[tr] = True
        val_mask[va] = True
        return train_mask, val_mask

    def fit(self, X, y, adjacency, val_mask=None):
        """Fit on all nodes of one graph.

        Parameters
        ----------
        X : array-like of shape (n_nodes, n_features)
        y : array-like of shape (n_nodes,)
            0/1 labels, -1 for unlabeled nodes.
        adjacency : Graph, (m, 2) edge array or scipy sparse matrix
        val_mask : array-like of bool, optional
            Labeled nodes reserved for early stopping.
        """
        X = check_node_features(X)
        n = X.shape[0]
        y = check_node_labels(y, n)
        edges = check_edges(adjacency, n)
        train_mask, val_mask = self._split(y, val_mask)
        self.graph_ = Graph(n, edges, X, y, train_mask, val_mask)
        self.run_ = train(self.graph_, self._run_config())
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.homophily_ = self.run_.homophily
        self.omega_bar_ = self.run_.omega_bar
        self.best_epoch_ = self.run_.best_epoch
        self.history_ = self.run_.history
        return self

    def _graph_for(self, X, adjacency) -> Optional[Graph]:
        X = check_node_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if adjacency is None:
            if X.shape[0] != self.graph_.n:
                raise ValueError("pass adjacency when predicting on a different graph")
            return Graph(X.shape[0], self.graph_.edges, X)
        return Graph(X.shape[0], check_edges(adjacency, X.shape[0]), X)

    def predict_proba(self, X, adjacency=None) -> np.ndarray:
        """Class probabilities per node; reuses the fitted graph when
        ``adjacency`` is omitted."""
        check_is_fitted(self, "run_")
        return self.run_.predict_proba(self._graph_for(X, adjacency))

    def predict(self, X, adjacency=None) -> np.ndarray:
        proba = self.predict_proba(X, adjacency)
        return self.classes_[proba.argmax(axis=1)]

    def window_banks(self):
        check_is_fitted(self, "run_")
        return self.run_.banks()


class SpectralBasisFeatures(TransformerMixin, BaseEstimator):
    """Stack ``P_k(L) X`` for k = 0..order along the feature axis."""

    def __init__(self, adjacency=None, basis: str = "bernstein", order: int = 4):
        self.adjacency = adjacency
        self.basis = basis
        self.order = order

    def fit(self, X, y=None):
        X = check_node_features(X)
        self.n_features_in_ = X.shape[1]
        self.basis_ = PolyBasis(self.basis, self.order)
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_node_features(X)
        if self.adjacency is None:
            raise ValueError("SpectralBasisFeatures needs an adjacency")
        g = Graph(X.shape[0], check_edges(self.adjacency, X.shape[0]), X)
        outputs = apply_basis(self.basis_, build_laplacian(g), X)
        return np.hstack(outputs)

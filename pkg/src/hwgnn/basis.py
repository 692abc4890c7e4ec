"""Polynomial basis families on the Laplacian spectrum ``[0, 2]``.

Three families are supported:

* ``bernstein`` -- ``C(K,k) (lam/2)^k (1 - lam/2)^(K-k)``
* ``jacobi``    -- ``J_k^{(a,b)}(1 - lam)``, degree ``k``
* ``beta``      -- ``lam^k (2-lam)^(K-k) / (2^(K+1) B(k+1, K-k+1))``

Matrix application shares one Chebyshev recurrence in ``L - I`` across all
basis indices, so ``apply_basis`` issues exactly ``K`` sparse products no matter
how many outputs are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev
from scipy.special import betaln, gammaln

KINDS = ("bernstein", "jacobi", "beta")


@dataclass(frozen=True)
class PolyBasis:
    kind: str = "bernstein"
    order: int = 4
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}; expected one of {KINDS}")
        if int(self.order) != self.order or self.order < 0:
            raise ValueError("order must be a non-negative integer")
        if self.kind == "jacobi" and (self.a <= -1 or self.b <= -1):
            raise ValueError("Jacobi parameters must satisfy a, b > -1")

    @property
    def size(self) -> int:
        return self.order + 1

    def evaluate(self, lam) -> np.ndarray:
        """Table of all basis functions, shape ``(len(lam), K + 1)``."""
        lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
        if self.kind == "bernstein":
            return _bernstein_table(self.order, lam)
        if self.kind == "beta":
            return _beta_table(self.order, lam)
        return _jacobi_table(self.order, self.a, self.b, 1.0 - lam)

    @cached_property
    def chebyshev_matrix(self) -> np.ndarray:
        """Rows give each ``P_k`` in the Chebyshev basis ``T_j(lam - 1)``.

        Interpolation at ``K + 1`` Chebyshev points is exact for degree-K
        polynomials, so this is a change of basis, not an approximation.
        """
        K = self.order
        if K == 0:
            return self.evaluate([1.0]).reshape(1, 1)
        rows = []
        for k in range(K + 1):
            rows.append(
                chebyshev.chebinterpolate(
                    lambda x, k=k: self.evaluate(np.asarray(x) + 1.0)[:, k], K
                )
            )
        return np.array(rows)


def eval_basis(basis: PolyBasis, k: int, lam):
    if not 0 <= k <= basis.order:
        raise IndexError(f"basis index {k} outside [0, {basis.order}]")
    out = basis.evaluate(lam)[:, k]
    return float(out[0]) if np.ndim(lam) == 0 else out


def _log_binom(K: int, k: np.ndarray) -> np.ndarray:
    return gammaln(K + 1) - gammaln(k + 1) - gammaln(K - k + 1)


def _xlogy_pow(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    # p * log(x) with the 0^0 = 1 convention
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p == 0, 0.0, p * np.log(x))


def _power_products(K: int, lam: np.ndarray, log_scale: np.ndarray) -> np.ndarray:
    k = np.arange(K + 1, dtype=np.float64)
    x = np.clip(lam[:, None] / 2.0, 0.0, 1.0)
    if K < 20:
        table = x**k * (1.0 - x) ** (K - k)
        return np.exp(log_scale) * table
    logt = _xlogy_pow(x, k) + _xlogy_pow(1.0 - x, K - k) + log_scale
    return np.exp(logt)


def _bernstein_table(K: int, lam: np.ndarray) -> np.ndarray:
    k = np.arange(K + 1, dtype=np.float64)
    return _power_products(K, lam, _log_binom(K, k))


def _beta_table(K: int, lam: np.ndarray) -> np.ndarray:
    # lam^k (2-lam)^(K-k) = 2^K x^k (1-x)^(K-k) with x = lam/2
    k = np.arange(K + 1, dtype=np.float64)
    log_scale = -np.log(2.0) - betaln(k + 1, K - k + 1)
    return _power_products(K, lam, log_scale)


def _jacobi_table(K: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    out = np.empty((len(x), K + 1))
    out[:, 0] = 1.0
    if K == 0:
        return out
    out[:, 1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
    for n in range(2, K + 1):
        c = 2 * n + a + b
        a1 = 2 * n * (n + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (n + a - 1) * (n + b - 1) * c
        out[:, n] = ((a2 + a3 * x) * out[:, n - 1] - a4 * out[:, n - 2]) / a1
    return out


def chebyshev_states(lap, X, order: int) -> list:
    """``[T_j(L - I) X for j = 0..order]`` using ``order`` sparse products."""
    states = [X]
    if order == 0:
        return states
    states.append(lap.matmul(X) - X)
    for _ in range(2, order + 1):
        prev, cur = states[-2], states[-1]
        states.append(2.0 * (lap.matmul(cur) - cur) - prev)
    return states


def combine_states(states: list, matrix: np.ndarray) -> list:
    out = []
    for row in matrix:
        acc = float(row[0]) * states[0]
        for j in range(1, len(states)):
            acc = acc + float(row[j]) * states[j]
        out.append(acc)
    return out


def apply_basis(basis: PolyBasis, lap, X) -> list:
    """``[P_k(L) @ X for k = 0..K]`` for numpy arrays or torch tensors."""
    if X.shape[0] != lap.n:
        raise ValueError(
            f"feature rows ({X.shape[0]}) do not match Laplacian size ({lap.n})"
        )
    states = chebyshev_states(lap, X, basis.order)
    return combine_states(states, basis.chebyshev_matrix)

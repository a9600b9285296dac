"""Matrix ground truth for small truncations.

Operators are materialized in the orthonormal basis ``e_v / sqrt(beta_v)`` of
l^2(beta), where the adjoint is the conjugate transpose.  The matrix in the
basis ``{e_v}`` (with metric ``beta``) is derived from it on demand.  Nothing
here reuses the closed-form norm or adjoint formulas of the shift module.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceeded, NoConvergence
from .multiplier import Symbol
from .shift import TreeVector
from .weights import WeightSystem

DENSE_BUDGET = 3000


class DenseOperator:
    """Bounded operator on the stored vertices, kept in orthonormal form."""

    def __init__(self, ws: WeightSystem, ortho):
        self.ws = ws
        self.ortho = sp.csr_matrix(ortho, dtype=complex)
        self._sqrt_beta = np.sqrt(ws.beta)

    @property
    def n(self) -> int:
        return self.ortho.shape[0]

    def toarray(self) -> np.ndarray:
        return self.ortho.toarray()

    @property
    def matrix(self) -> np.ndarray:
        """Matrix acting on coefficient vectors in the basis ``{e_v}``."""
        s = self._sqrt_beta
        return self.toarray() * (1.0 / s)[:, None] * s[None, :]

    @property
    def metric_adjoint(self) -> np.ndarray:
        """``B`` with ``<A f, g>_beta = <f, B g>_beta``, i.e. ``D^{-1} A^H D``."""
        m = self.matrix
        b = self.ws.beta
        return np.conj(m.T) * (1.0 / b)[:, None] * b[None, :]

    def apply(self, f: TreeVector) -> TreeVector:
        y = self.ortho @ (self._sqrt_beta * f.values)
        return TreeVector(f.tree, y / self._sqrt_beta)

    def adjoint_apply(self, f: TreeVector) -> TreeVector:
        y = self.ortho.conj().T @ (self._sqrt_beta * f.values)
        return TreeVector(f.tree, y / self._sqrt_beta)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.ws, self.ortho @ other.ortho)

    def power(self, k: int) -> "DenseOperator":
        out = sp.identity(self.n, dtype=complex, format="csr")
        for _ in range(k):
            out = self.ortho @ out
        return DenseOperator(self.ws, out)

    def __repr__(self):
        return f"DenseOperator(n={self.n}, nnz={self.ortho.nnz})"


def _check_budget(ws: WeightSystem, budget: int):
    if ws.tree.n_vertices > budget:
        raise BudgetExceeded(f"{ws.tree.n_vertices} vertices exceed the dense budget of {budget}")


def materialize_shift(ws: WeightSystem, budget: int = DENSE_BUDGET) -> DenseOperator:
    """Entry ``(v, pa v)`` is ``lambda_v sqrt(beta_v / beta_pa(v))`` in orthonormal form."""
    _check_budget(ws, budget)
    t = ws.tree
    rows = np.arange(1, t.n_vertices)
    cols = t.parent[1:]
    vals = ws.lam[1:] * np.sqrt(ws.beta[1:] / ws.beta[cols])
    a = sp.csr_matrix((vals, (rows, cols)), shape=(t.n_vertices, t.n_vertices), dtype=complex)
    return DenseOperator(ws, a)


def materialize_multiplier(ws: WeightSystem, phi: Symbol, budget: int = DENSE_BUDGET) -> DenseOperator:
    """Entry ``(v, pa^k v)`` is ``lambda_{pa^k v | v} phi(k)`` (metric form)."""
    _check_budget(ws, budget)
    t = ws.tree
    n = t.n_vertices
    rows, cols, vals = [np.arange(n)], [np.arange(n)], [np.full(n, phi.coeff(0), dtype=complex)]
    anc = np.arange(n)
    prod = np.ones(n, dtype=complex)
    for k in range(1, t.max_depth + 1):
        live = t.depth >= k
        prod = np.where(live, prod * ws.lam[anc], 0)
        anc = np.where(live, t.parent[np.maximum(anc, 0)], anc)
        c = phi.coeff(k)
        idx = np.flatnonzero(live)
        if c != 0 and idx.size:
            rows.append(idx)
            cols.append(anc[idx])
            vals.append(c * prod[idx])
    rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    s = np.sqrt(ws.beta)
    vals = vals * s[rows] / s[cols]
    a = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)
    return DenseOperator(ws, a)


def dense_adjoint_apply(op: DenseOperator, f: TreeVector) -> TreeVector:
    return op.adjoint_apply(f)


def operator_norm(op: DenseOperator, *, rtol: float = 1e-10, seed: int = 0,
                  block: int = 8, max_iter: int = 20000) -> float:
    """Largest singular value by seeded block power iteration on ``A^H A``.

    A Rayleigh-Ritz step on the block after every sweep extracts the top Ritz
    value; iteration stops once it settles to ``rtol / 100`` between sweeps and
    its eigen-residual falls below ``rtol``.
    """
    a = op.ortho
    ah = a.conj().T.tocsr()
    n = op.n
    if a.nnz == 0:
        return 0.0
    b = min(block, n)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, b)) + 1j * rng.standard_normal((n, b))
    x, _ = np.linalg.qr(x)
    prev = None
    for _ in range(max_iter):
        y = ah @ (a @ x)
        h = x.conj().T @ y
        h = (h + h.conj().T) / 2
        evals, evecs = np.linalg.eigh(h)
        theta = float(evals[-1])
        if theta <= 0:
            x, _ = np.linalg.qr(y + rng.standard_normal((n, b)))
            continue
        top = x @ evecs[:, -1]
        resid = np.linalg.norm(ah @ (a @ top) - theta * top)
        if prev is not None and abs(theta - prev) <= 1e-2 * rtol * theta and resid <= rtol * theta:
            return float(np.sqrt(theta))
        prev = theta
        # rotate to the Ritz basis before the next sweep
        x, _ = np.linalg.qr(y @ evecs[:, ::-1])
    raise NoConvergence(f"operator norm did not settle within {max_iter} sweeps")

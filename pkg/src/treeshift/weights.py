"""Weight systems ``(beta, lambda)`` on truncated trees and their normalizations.

``beta`` weights the Hilbert space over the vertices, ``lambda`` weights the
edges (``lam[v]`` belongs to the edge ``pa(v) -> v``; ``lam[root]`` is unused
and stored as 0).
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ._numeric import grouped_sum
from .errors import NotAnAncestor, NotNormalized, ZeroWeight
from .tree import DirectedTree

DEFAULT_NORMALIZED_TOL = 1e-9


def propagate(tree: DirectedTree, edge_factor, root_value=1.0):
    """Products along root chains: ``out[v] = out[pa(v)] * edge_factor[v]``."""
    edge_factor = np.asarray(edge_factor)
    out = np.empty(tree.n_vertices, dtype=np.result_type(edge_factor, type(root_value)))
    out[0] = root_value
    for level in tree.levels[1:]:
        out[level] = out[tree.parent[level]] * edge_factor[level]
    return out


def accumulate(tree: DirectedTree, edge_term, root_value=0.0):
    """Sums along root chains: ``out[v] = out[pa(v)] + edge_term[v]``."""
    edge_term = np.asarray(edge_term)
    out = np.empty(tree.n_vertices, dtype=np.result_type(edge_term, type(root_value)))
    out[0] = root_value
    for level in tree.levels[1:]:
        out[level] = out[tree.parent[level]] + edge_term[level]
    return out


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


class WeightSystem:
    """Immutable pair of vertex weights ``beta > 0`` and edge weights ``lambda``."""

    def __init__(self, tree: DirectedTree, beta, lam, *, tol: float = DEFAULT_NORMALIZED_TOL):
        n = tree.n_vertices
        beta = np.broadcast_to(np.asarray(beta, dtype=float), (n,))
        lam = np.array(np.broadcast_to(np.asarray(lam, dtype=complex), (n,)))
        if not np.all(beta > 0) or not np.all(np.isfinite(beta)):
            raise ValueError("beta must be positive and finite on every vertex")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambda must be finite")
        lam[0] = 0.0
        self.tree = tree
        self.beta = _readonly(beta, float)
        self.lam = _readonly(lam, complex)
        self.tol = tol

    def __repr__(self):
        return (f"WeightSystem(tree={self.tree!r}, positive={self.is_positive}, "
                f"normalized={self.normalized})")

    # -- cached products -------------------------------------------------
    @cached_property
    def is_positive(self) -> bool:
        nonroot = self.lam[1:]
        return bool(np.all(nonroot.imag == 0) and np.all(nonroot.real > 0))

    @cached_property
    def root_product(self) -> np.ndarray:
        """``lambda_{root|v}`` for every stored vertex."""
        return _readonly(propagate(self.tree, self.lam, 1.0 + 0j), complex)

    @cached_property
    def log_abs_root_product(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(self.lam))
        return _readonly(accumulate(self.tree, logs, 0.0), float)

    def lambda_product(self, u: int, v: int) -> complex:
        """``lambda_{u|v}``: product of edge weights from ``u`` down to ``v``."""
        u, v = int(u), int(v)
        du, dv = self.tree.depth[u], self.tree.depth[v]
        prod = 1.0 + 0j
        x = v
        for _ in range(dv - du):
            prod *= self.lam[x]
            x = int(self.tree.parent[x])
        if x != u:
            raise NotAnAncestor(f"{u} is not an ancestor of {v}")
        return prod

    # -- normalization -----------------------------------------------------
    @cached_property
    def child_sums(self) -> np.ndarray:
        """Compensated ``sum_{v in Chi(u)} lambda_v`` for every vertex (0 at the frontier)."""
        t = self.tree
        return _readonly(grouped_sum(self.lam[t.child_idx], t.child_ptr), complex)

    def check_normalized(self, tol: float | None = None) -> list:
        """Interior vertices whose child weights do not sum to 1, as ``(u, sum)``."""
        tol = self.tol if tol is None else tol
        interior = np.flatnonzero(self.tree.expanded)
        dev = np.abs(self.child_sums[interior] - 1.0)
        bad = interior[dev > tol]
        return [(int(u), complex(self.child_sums[u])) for u in bad]

    def max_normalization_violation(self) -> float:
        interior = np.flatnonzero(self.tree.expanded)
        if interior.size == 0:
            return 0.0
        return float(np.abs(self.child_sums[interior] - 1.0).max())

    @cached_property
    def normalized(self) -> bool:
        return self.is_positive and not self.check_normalized()

    def require_positive(self):
        if not self.is_positive:
            raise NotNormalized("edge weights must be positive reals")

    def require_normalized(self):
        self.require_positive()
        bad = self.check_normalized()
        if bad:
            u, s = bad[0]
            raise NotNormalized(
                f"child weights of vertex {u} sum to {s.real:.17g}; "
                f"{len(bad)} interior vertices violate the unit child-sum condition")


def restrict(ws: WeightSystem, depth: int) -> WeightSystem:
    """The same weights on ``ws.tree.truncate(depth)``."""
    keep = ws.tree.depth <= depth
    return WeightSystem(ws.tree.truncate(depth), ws.beta[keep], ws.lam[keep], tol=ws.tol)


# -- weight families -------------------------------------------------------

def inverse_degree(tree: DirectedTree) -> np.ndarray:
    """``lambda_v = 1 / card Chi(pa v)``: the uniform normalized edge weights."""
    lam = np.zeros(tree.n_vertices)
    lam[1:] = 1.0 / tree.n_children[tree.parent[1:]]
    return lam


def kappa_pow(tree: DirectedTree, kappa: float) -> np.ndarray:
    return float(kappa) ** (-tree.depth.astype(float))


def four_pow_branch2(tree: DirectedTree) -> np.ndarray:
    """``beta = 4^{-j}`` on the ``(2, j)`` branch of T_{2,0}, 1 elsewhere.

    Unlabelled trees of the same shape are accepted; the branch below the
    root's second child plays the role of ``(2, j)``.
    """
    beta = np.ones(tree.n_vertices)
    if tree.kind == "t20" and tree.labels is not None:
        for v, (i, j) in enumerate(tree.labels):
            if i == 2:
                beta[v] = 4.0 ** (-j)
        return beta
    kids = tree.children(0)
    if kids.size != 2 or tree.branching_vertices() != {0}:
        raise ValueError("four_pow_branch2 needs a tree shaped like T_{2,0}")
    mark = np.zeros(tree.n_vertices)
    mark[kids[1]] = 1.0
    on_branch = accumulate(tree, mark) > 0
    beta[on_branch] = 4.0 ** (-tree.depth[on_branch].astype(float))
    return beta


def t20_weights(tree: DirectedTree) -> WeightSystem:
    """Edge weights 1/2 at the root then 1; ``beta`` as in :func:`four_pow_branch2`."""
    return WeightSystem(tree, four_pow_branch2(tree), inverse_degree(tree))


def kary_weights(tree: DirectedTree) -> WeightSystem:
    """``lambda = 1/kappa`` on every edge and ``beta_v = kappa^{-|v|}``."""
    kappa = tree.params.get("kappa")
    if kappa is None:
        raise ValueError("kary_weights needs a kappa-ary tree")
    lam = np.full(tree.n_vertices, 1.0 / kappa)
    return WeightSystem(tree, kappa_pow(tree, kappa), lam)


def ones(tree: DirectedTree) -> WeightSystem:
    return WeightSystem(tree, 1.0, 1.0)


def default_weights(tree: DirectedTree) -> WeightSystem:
    """The weights each named family carries in the examples of this package."""
    if tree.kind == "t20":
        return t20_weights(tree)
    if tree.kind == "kary":
        return kary_weights(tree)
    if tree.kind == "ray":
        return ones(tree)
    return WeightSystem(tree, 1.0, inverse_degree(tree))


def random_weights(tree: DirectedTree, seed, *, normalized: bool = False,
                   beta_range=(0.25, 4.0), lam_range=(0.1, 2.0)) -> WeightSystem:
    """Random positive weights; with ``normalized`` the child sums are rescaled to 1."""
    rng = np.random.default_rng(seed)
    n = tree.n_vertices
    beta = np.exp(rng.uniform(np.log(beta_range[0]), np.log(beta_range[1]), n))
    lam = rng.uniform(*lam_range, n)
    lam[0] = 0.0
    if normalized:
        sums = grouped_sum(lam[tree.child_idx], tree.child_ptr)
        lam[1:] = lam[1:] / sums[tree.parent[1:]]
    return WeightSystem(tree, beta, lam)


# -- unitary equivalences ------------------------------------------------

def _check_nonzero(mu):
    if np.any(np.asarray(mu)[1:] == 0):
        raise ZeroWeight("weights must be nonzero on every non-root vertex")


def normalize_mu(tree: DirectedTree, mu):
    """Normalized pair ``([mu], <mu>)`` for a shift with weights ``mu`` on unit ``beta``.

    ``[mu]_v = |mu_v|^2 / mu_[v]`` with ``mu_[v]`` the sum of ``|mu_u|^2`` over
    the siblings ``u`` of ``v`` (including ``v``), and
    ``<mu>_v = (mu_[root|v] / |mu_{root|v}|)^2``.  The resulting edge weights sum
    to one over every set of siblings.
    """
    mu = np.asarray(mu, dtype=complex)
    _check_nonzero(mu)
    sq = np.abs(mu) ** 2
    sq[0] = 0.0
    sibling = grouped_sum(sq[tree.child_idx], tree.child_ptr)  # indexed by parent
    lam = np.zeros(tree.n_vertices)
    lam[1:] = sq[1:] / sibling[tree.parent[1:]]
    factor = np.ones(tree.n_vertices)
    factor[1:] = sibling[tree.parent[1:]] / np.abs(mu[1:])
    beta = propagate(tree, factor, 1.0) ** 2
    return lam, beta


def weights_to_ones(ws: WeightSystem) -> np.ndarray:
    """Weights ``mu_v = sqrt(beta_v / beta_pa(v)) lambda_v`` of the equivalent shift on unit beta."""
    t = ws.tree
    mu = np.zeros(t.n_vertices, dtype=complex)
    mu[1:] = np.sqrt(ws.beta[1:] / ws.beta[t.parent[1:]]) * ws.lam[1:]
    return mu


def unitary_conjugation_factors(tree: DirectedTree, mu, lam):
    """``beta`` and diagonal of ``U`` with ``U S_mu = S_lambda U``.

    ``diag_u = lambda_{root|u} / mu_{root|u}`` and ``beta_u = |mu_{root|u} / lambda_{root|u}|^2``,
    so that ``U`` maps unit-weighted l^2 isometrically onto l^2(beta).
    """
    mu = np.asarray(mu, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    _check_nonzero(mu)
    if np.any(lam[1:].imag != 0) or np.any(lam[1:].real <= 0):
        if np.any(lam[1:] == 0):
            raise ZeroWeight("lambda must be nonzero")
        raise ValueError("lambda must be positive")
    ratio = np.ones(tree.n_vertices, dtype=complex)
    ratio[1:] = lam[1:] / mu[1:]
    diag = propagate(tree, ratio, 1.0 + 0j)
    beta = 1.0 / np.abs(diag) ** 2
    return beta, diag

"""The weighted shift ``S_lambda`` on l^2(beta) over a truncated tree.

``(S f)(v) = lambda_v f(pa v)`` and, in l^2(beta),
``(S* f)(u) = sum_{v in Chi(u)} conj(lambda_v) beta_v / beta_u f(v)``.

Norms of powers use the vertex-supremum formula
``||S^k||^2 = sup_u sum_{v in Chi<k>(u)} |lambda_{u|v}|^2 beta_v / beta_u``,
restricted to vertices whose full ``k``-level cone is stored, so each value is
exact for the truncated operator and a lower bound for the infinite one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._numeric import fsum_complex, grouped_sum
from .errors import HorizonTooShallow, TruncationLossWarning
from .tree import DirectedTree
from .weights import WeightSystem


class TreeVector:
    """Finitely supported function on the stored vertices of a tree.

    Values are held densely (one complex per stored vertex); the support is the
    set of nonzero entries.  ``truncated`` marks results that lost mass or may be
    inaccurate at the frontier.
    """

    __slots__ = ("tree", "values", "truncated")

    def __init__(self, tree: DirectedTree, values=None, truncated: bool = False):
        self.tree = tree
        if values is None:
            values = np.zeros(tree.n_vertices, dtype=complex)
        values = np.asarray(values, dtype=complex)
        if values.shape != (tree.n_vertices,):
            raise ValueError(f"expected {tree.n_vertices} values, got shape {values.shape}")
        self.values = values
        self.truncated = bool(truncated)

    @classmethod
    def basis(cls, tree: DirectedTree, u: int) -> "TreeVector":
        vals = np.zeros(tree.n_vertices, dtype=complex)
        vals[u] = 1.0
        return cls(tree, vals)

    @classmethod
    def from_dict(cls, tree: DirectedTree, mapping: dict) -> "TreeVector":
        vals = np.zeros(tree.n_vertices, dtype=complex)
        for v, x in mapping.items():
            vals[int(v)] = x
        return cls(tree, vals)

    @classmethod
    def random(cls, tree: DirectedTree, seed, *, max_depth=None, density=1.0, real=False):
        """Random vector supported on vertices of depth ``<= max_depth``."""
        rng = np.random.default_rng(seed)
        n = tree.n_vertices
        vals = rng.standard_normal(n) + (0 if real else 1j * rng.standard_normal(n))
        keep = rng.random(n) < density
        if max_depth is not None:
            keep &= tree.depth <= max_depth
        return cls(tree, np.where(keep, vals, 0))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def to_dict(self) -> dict:
        return {int(v): complex(self.values[v]) for v in self.support}

    def __getitem__(self, v):
        return self.values[v]

    def _wrap(self, values, other=None):
        flag = self.truncated or (other.truncated if isinstance(other, TreeVector) else False)
        return TreeVector(self.tree, values, flag)

    def __add__(self, other):
        return self._wrap(self.values + other.values, other)

    def __sub__(self, other):
        return self._wrap(self.values - other.values, other)

    def __neg__(self):
        return self._wrap(-self.values)

    def __mul__(self, scalar):
        return self._wrap(self.values * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"TreeVector(support={self.support.size}, truncated={self.truncated})"


def inner(ws: WeightSystem, f: TreeVector, g: TreeVector) -> complex:
    """``<f, g>_beta = sum_v f(v) conj(g(v)) beta_v``."""
    return fsum_complex(f.values * np.conj(g.values) * ws.beta)


def norm(ws: WeightSystem, f: TreeVector) -> float:
    return math.sqrt(math.fsum((np.abs(f.values) ** 2 * ws.beta).tolist()))


def apply_diagonal(diag, f: TreeVector) -> TreeVector:
    return TreeVector(f.tree, np.asarray(diag) * f.values, f.truncated)


def apply_shift(ws: WeightSystem, f: TreeVector, *, warn: bool = True) -> TreeVector:
    """``(S f)(v) = lambda_v f(pa v)``; mass pushed past the frontier is dropped."""
    t = ws.tree
    out = np.zeros(t.n_vertices, dtype=complex)
    out[1:] = ws.lam[1:] * f.values[t.parent[1:]]
    lost = bool(np.any(f.values[t.frontier] != 0))
    if lost and warn:
        warnings.warn("shift moved support past the truncation frontier",
                      TruncationLossWarning, stacklevel=2)
    return TreeVector(t, out, f.truncated or lost)


def apply_adjoint(ws: WeightSystem, f: TreeVector) -> TreeVector:
    """``(S* f)(u) = sum_{v in Chi(u)} conj(lambda_v) (beta_v / beta_u) f(v)``.

    Exact for finitely supported ``f``.  If ``f`` is nonzero on the frontier it
    is probably a restriction of a vector living beyond the horizon; the result
    is then flagged because values at frontier vertices miss unseen children.
    """
    t = ws.tree
    terms = np.zeros(t.n_vertices, dtype=complex)
    terms[1:] = np.conj(ws.lam[1:]) * ws.beta[1:] / ws.beta[t.parent[1:]] * f.values[1:]
    out = grouped_sum(terms[t.child_idx], t.child_ptr)
    flagged = bool(np.any(f.values[t.frontier] != 0))
    return TreeVector(t, out, f.truncated or flagged)


# -- norms of powers ---------------------------------------------------------

def _edge_gain(ws: WeightSystem) -> np.ndarray:
    t = ws.tree
    g = np.zeros(t.n_vertices)
    g[1:] = np.abs(ws.lam[1:]) ** 2 * ws.beta[1:] / ws.beta[t.parent[1:]]
    return g


def cone_sums(ws: WeightSystem, kmax: int):
    """Yield ``(k, r_k)`` with ``r_k(u) = sum_{Chi<k>(u)} |lambda_{u|v}|^2 beta_v / beta_u``.

    ``r_k(u)`` is only meaningful where ``cone_height(u) >= k``.
    """
    t = ws.tree
    gain = _edge_gain(ws)[t.child_idx]
    r = np.ones(t.n_vertices)
    for k in range(1, kmax + 1):
        r = grouped_sum(gain * r[t.child_idx], t.child_ptr)
        yield k, r


@dataclass
class PowerNorm:
    k: int
    value: float
    argmax: int
    stabilized_at: int
    per_depth_sq: list = field(repr=False)
    half_value: float | None = None

    @property
    def value_sq(self) -> float:
        return self.value ** 2

    @property
    def gap(self):
        return None if self.half_value is None else self.value - self.half_value


def _summarize(ws: WeightSystem, k: int, r: np.ndarray) -> PowerNorm:
    t = ws.tree
    eligible = t.cone_height >= k
    if not eligible.any():
        raise HorizonTooShallow(f"no vertex has {k} complete stored levels below it")
    masked = np.where(eligible, r, -np.inf)
    argmax = int(np.argmax(masked))
    per_depth = []
    for level in t.levels:
        vals = masked[level]
        per_depth.append(float(vals.max()) if vals.size and np.isfinite(vals.max()) else None)
    stabilized_at, running = 0, -np.inf
    for d, m in enumerate(per_depth):
        if m is not None and m > running:
            running, stabilized_at = m, d
    half = t.max_depth // 2
    half_mask = eligible & (t.depth + k <= half)
    half_value = math.sqrt(float(r[half_mask].max())) if half_mask.any() else None
    return PowerNorm(k, math.sqrt(float(masked[argmax])), argmax, stabilized_at,
                     per_depth, half_value)


def power_norm(ws: WeightSystem, k: int) -> PowerNorm:
    """``||S^k||`` on the truncation, with its argmax vertex and horizon diagnostics."""
    if k < 1:
        raise ValueError("k must be positive")
    for kk, r in cone_sums(ws, k):
        if kk == k:
            return _summarize(ws, k, r)


def power_norms(ws: WeightSystem, kmax: int) -> list:
    return [_summarize(ws, k, r) for k, r in cone_sums(ws, kmax)]


@dataclass
class Boundedness:
    value_sq: float
    per_depth: list
    trend: str  # "bounded" or "unbounded-trend"


def boundedness_margin(ws: WeightSystem) -> Boundedness:
    """``sup_u sum_{v in Chi(u)} |lambda_v|^2 beta_v / beta_u`` with a growth-trend flag.

    The trend is ``unbounded-trend`` when the per-depth maxima increase strictly
    across the tail half of the stored depths.
    """
    pn = power_norm(ws, 1)
    per_depth = [m for m in pn.per_depth_sq if m is not None]
    tail = per_depth[len(per_depth) // 2:]
    growing = len(tail) >= 2 and all(b > a for a, b in zip(tail, tail[1:])) \
        and tail[-1] > tail[0] * (1 + 1e-9)
    return Boundedness(pn.value_sq, per_depth, "unbounded-trend" if growing else "bounded")


@dataclass
class GelfandEstimate:
    sequence: list
    r_estimate: float
    trend: str


def _trend(seq, rtol=1e-12):
    diffs = np.diff(seq)
    scale = max(abs(x) for x in seq) if seq else 1.0
    tol = rtol * scale
    if np.all(np.abs(diffs) <= tol):
        return "constant"
    if np.all(diffs <= tol):
        return "nonincreasing"
    if np.all(diffs >= -tol):
        return "nondecreasing"
    return "mixed"


def spectral_radius_estimate(ws: WeightSystem, kmax: int) -> GelfandEstimate:
    """``||S^k||^{1/k}`` for ``k = 1..kmax``; the last term estimates ``r(S)``."""
    if kmax < 1:
        raise ValueError("kmax must be positive")
    seq = [pn.value ** (1.0 / pn.k) for pn in power_norms(ws, kmax)]
    return GelfandEstimate(seq, seq[-1], _trend(seq))

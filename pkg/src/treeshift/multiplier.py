"""Multiplier symbols and the operators they induce on a weighted tree.

A symbol is a coefficient sequence ``phi(k)``, ``k >= 0``.  It acts by the
ancestor sum

    (Gamma_phi f)(v) = sum_{k=0}^{|v|} lambda_{pa^k(v)|v} phi(k) f(pa^k(v)),

which is finite at every vertex and only reads ancestors, so it is exact on a
truncated tree.  Symbols compose by the Cauchy product, and
``Gamma_phi Gamma_psi = Gamma_{phi * psi}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DivergentSeries, TruncationLossWarning
from .shift import TreeVector, norm, power_norms
from .weights import WeightSystem

DEFAULT_GRID = 4096


@dataclass(frozen=True)
class Decay:
    """Coefficient bound ``|phi(k)| <= const * (k + 1)**power * ratio**k``."""

    ratio: float
    const: float = 1.0
    power: int = 0

    def bound(self, k):
        return self.const * (k + 1) ** self.power * self.ratio ** k


class Symbol:
    """Coefficient sequence, either finitely supported or lazily generated.

    Finite symbols hold their coefficients; lazy ones hold a generator ``fn(k)``
    and must carry :class:`Decay` metadata before they can be evaluated as a
    power series.
    """

    def __init__(self, coeffs=None, *, fn=None, decay=None, closed_form=None, label=None):
        if (coeffs is None) == (fn is None):
            raise ValueError("give exactly one of coeffs or fn")
        self._finite = None
        self._fn = fn
        self._cache: list = []
        if coeffs is not None:
            arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
            if arr.size == 0:
                arr = np.zeros(1, dtype=complex)
            arr.setflags(write=False)
            self._finite = arr
        self.decay = decay
        self._closed_form = closed_form
        self.label = label

    # -- constructors ------------------------------------------------------
    @classmethod
    def finite(cls, coeffs, label=None) -> "Symbol":
        return cls(coeffs, label=label)

    @classmethod
    def indicator(cls, n: int) -> "Symbol":
        """``chi_{n}``: 1 at ``n`` and 0 elsewhere; acts as ``S^n``."""
        c = np.zeros(n + 1, dtype=complex)
        c[n] = 1.0
        return cls(c, label=f"chi_{n}")

    @classmethod
    def geometric(cls, a, ratio) -> "Symbol":
        """``phi(k) = a * ratio**k``, summing to ``a / (1 - ratio z)``."""
        a, ratio = complex(a), complex(ratio)
        return cls(fn=lambda k: a * ratio ** k,
                   decay=Decay(abs(ratio), abs(a), 0),
                   closed_form=lambda z: a / (1 - ratio * z),
                   label=f"geometric({a}, {ratio})")

    @classmethod
    def ones(cls) -> "Symbol":
        return cls.geometric(1.0, 1.0)

    # -- access ------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self._finite is not None

    @property
    def support_bound(self):
        return self._finite.size - 1 if self.is_finite else None

    def coeff(self, k: int) -> complex:
        if k < 0:
            return 0j
        if self.is_finite:
            return complex(self._finite[k]) if k < self._finite.size else 0j
        while len(self._cache) <= k:
            self._cache.append(complex(self._fn(len(self._cache))))
        return self._cache[k]

    def coeffs(self, m: int) -> np.ndarray:
        """Coefficients ``phi(0..m)``."""
        if self.is_finite:
            out = np.zeros(m + 1, dtype=complex)
            n = min(m + 1, self._finite.size)
            out[:n] = self._finite[:n]
            return out
        self.coeff(m)
        return np.asarray(self._cache[:m + 1], dtype=complex)

    # -- series evaluation ---------------------------------------------------
    def _terms_needed(self, radius: float, eps: float = 1e-18) -> int:
        d = self.decay
        if d is None:
            raise DivergentSeries("symbol has no decay metadata; cannot certify convergence")
        q = d.ratio * radius
        if q >= 1:
            raise DivergentSeries(f"decay ratio {d.ratio} does not certify convergence at radius {radius}")
        if q == 0:
            return 0
        k = 0
        while d.const * (k + 1) ** d.power * q ** k / (1 - q) * (k + 2) ** d.power / (k + 1) ** d.power > eps:
            k += 1
        return k

    def tail_bound(self, m: int, radius: float) -> float:
        """Upper bound on ``sum_{k > m} |phi(k)| radius**k``."""
        if self.is_finite:
            return float(np.sum(np.abs(self._finite[m + 1:]) * radius ** np.arange(m + 1, self._finite.size)))
        d = self.decay
        if d is None or d.ratio * radius >= 1:
            return math.inf
        q = d.ratio * radius
        # (k+1)^p grows slower than any geometric factor; bound term by term ratio
        first = d.bound(m + 1) * radius ** (m + 1)
        growth = q * ((m + 3) / (m + 2)) ** d.power
        return first / (1 - growth) if growth < 1 else math.inf

    def evaluate(self, z):
        """``sum_k phi(k) z**k`` (vectorized over ``z``)."""
        z = np.asarray(z, dtype=complex)
        if self.is_finite:
            return np.polyval(self._finite[::-1], z)
        radius = float(np.max(np.abs(z))) if z.size else 0.0
        m = self._terms_needed(radius)
        if self._closed_form is not None:
            return self._closed_form(z)
        return np.polyval(self.coeffs(m)[::-1], z)

    __call__ = evaluate

    # -- linear structure -------------------------------------------------------
    def __add__(self, other: "Symbol") -> "Symbol":
        if self.is_finite and other.is_finite:
            m = max(self.support_bound, other.support_bound)
            return Symbol(self.coeffs(m) + other.coeffs(m))
        return Symbol(fn=lambda k: self.coeff(k) + other.coeff(k),
                      decay=_add_decay(self, other))

    def __mul__(self, scalar) -> "Symbol":
        scalar = complex(scalar)
        if self.is_finite:
            return Symbol(self._finite * scalar)
        d = self.decay
        return Symbol(fn=lambda k: scalar * self.coeff(k),
                      decay=None if d is None else Decay(d.ratio, d.const * abs(scalar), d.power))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        if self.is_finite:
            return f"Symbol.finite({self._finite.tolist()})"
        return f"Symbol({self.label or 'lazy'}, decay={self.decay})"


def _finite_as_decay(phi: Symbol, ratio: float) -> Decay:
    c = phi.coeffs(phi.support_bound)
    if ratio == 0:
        return Decay(0.0, float(np.abs(c).max()), 0)
    return Decay(ratio, float(np.sum(np.abs(c) * ratio ** -np.arange(c.size))), 0)


def _add_decay(a: Symbol, b: Symbol):
    da = a.decay if not a.is_finite else None
    db = b.decay if not b.is_finite else None
    if (not a.is_finite and da is None) or (not b.is_finite and db is None):
        return None
    ratio = max(d.ratio for d in (da, db) if d is not None)
    da = da or _finite_as_decay(a, ratio)
    db = db or _finite_as_decay(b, ratio)
    # constants add once both bounds use the larger ratio
    return Decay(ratio, da.const + db.const, max(da.power, db.power))


def cauchy_mult(phi: Symbol, psi: Symbol) -> Symbol:
    """``(phi * psi)(k) = sum_{j=0}^{k} phi(j) psi(k - j)``."""
    if phi.is_finite and psi.is_finite:
        return Symbol(np.convolve(phi.coeffs(phi.support_bound), psi.coeffs(psi.support_bound)))

    def fn(k):
        a = phi.coeffs(k)
        b = psi.coeffs(k)
        return complex(np.dot(a, b[::-1]))

    decay = None
    if phi.is_finite and psi.decay is not None:
        decay = Decay(psi.decay.ratio, psi.decay.const * _finite_as_decay(phi, psi.decay.ratio).const,
                      psi.decay.power)
    elif psi.is_finite and phi.decay is not None:
        decay = Decay(phi.decay.ratio, phi.decay.const * _finite_as_decay(psi, phi.decay.ratio).const,
                      phi.decay.power)
    elif phi.decay is not None and psi.decay is not None:
        decay = Decay(max(phi.decay.ratio, psi.decay.ratio), phi.decay.const * psi.decay.const,
                      phi.decay.power + psi.decay.power + 1)
    return Symbol(fn=fn, decay=decay)


def cesaro_symbol(phi: Symbol, k: int) -> Symbol:
    """Fejér-weighted truncation ``((k + 1 - n) / (k + 1)) phi(n)`` for ``n <= k + 1``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = np.arange(k + 2)
    return Symbol(phi.coeffs(k + 1) * (k + 1 - n) / (k + 1))


def truncate_symbol(phi: Symbol, n: int, *, include_zero: bool = True) -> Symbol:
    """Keep ``phi(k)`` for ``k <= n``.

    With ``include_zero=False`` the constant term is dropped as well, giving the
    sequence indexed by ``{1, ..., n}`` only.
    """
    if n < 1:
        raise ValueError("n must be positive")
    c = phi.coeffs(n).copy()
    if not include_zero:
        c[0] = 0
    return Symbol(c)


# -- operator action -----------------------------------------------------------

def gamma_apply(ws: WeightSystem, phi: Symbol, f: TreeVector) -> TreeVector:
    """Evaluate the ancestor sum ``Gamma_phi f`` at every stored vertex."""
    t = ws.tree
    vals = f.values
    out = phi.coeff(0) * vals.copy()
    support = np.flatnonzero(vals)
    if support.size == 0:
        return TreeVector(t, out, f.truncated)
    kmax = t.max_depth - int(t.depth[support].min())
    if phi.is_finite:
        kmax = min(kmax, phi.support_bound)
    active = np.flatnonzero(t.depth >= 1)
    anc = active.copy()
    prod = np.ones(active.size, dtype=complex)
    for k in range(1, kmax + 1):
        keep = t.depth[active] >= k
        active, anc, prod = active[keep], anc[keep], prod[keep]
        prod = prod * ws.lam[anc]
        anc = t.parent[anc]
        c = phi.coeff(k)
        if c != 0:
            out[active] += c * prod * vals[anc]
    return TreeVector(t, out, f.truncated)


def _support_depth(f: TreeVector) -> int:
    s = f.support
    return int(f.tree.depth[s].max()) if s.size else -1


def multiplier_product_check(ws: WeightSystem, phi: Symbol, psi: Symbol, f: TreeVector) -> float:
    """``|| Gamma_phi Gamma_psi f - Gamma_{phi*psi} f ||_beta``."""
    need = (phi.support_bound or 0) + (psi.support_bound or 0)
    if not (phi.is_finite and psi.is_finite) or _support_depth(f) + need > ws.tree.max_depth:
        warnings.warn("product reaches past the horizon; residual covers stored vertices only",
                      TruncationLossWarning, stacklevel=2)
    lhs = gamma_apply(ws, phi, gamma_apply(ws, psi, f))
    rhs = gamma_apply(ws, cauchy_mult(phi, psi), f)
    return norm(ws, lhs - rhs)


@dataclass
class CoefficientMargins:
    margins: list          # ||M_phi|| - |phi(k)| ||S^k||, k = 0..kmax
    power_norms: list      # ||S^k||, k = 0..kmax

    @property
    def worst(self) -> float:
        return min(self.margins)


def coefficient_bound_check(ws: WeightSystem, phi: Symbol, kmax: int, mult_norm: float) -> CoefficientMargins:
    """Margins of ``|phi(k)| ||S^k|| <= ||M_phi||`` for ``k <= kmax``."""
    norms = [1.0] + ([pn.value for pn in power_norms(ws, kmax)] if kmax >= 1 else [])
    coeffs = np.abs(phi.coeffs(kmax))
    margins = [float(mult_norm - c * s) for c, s in zip(coeffs, norms)]
    return CoefficientMargins(margins, norms)


@dataclass
class SupNorm:
    value: float
    coarse: float
    fine: float
    argmax_angle: float

    @property
    def rel_change(self) -> float:
        return abs(self.fine - self.coarse) / self.fine if self.fine else 0.0


def multiplier_norm_upper(phi: Symbol, norm_s: float, grid: int = DEFAULT_GRID) -> SupNorm:
    """``sup |phi(z)|`` over ``|z| <= norm_s``, the upper bound for ``||M_phi||``.

    By the maximum modulus principle the circle ``|z| = norm_s`` suffices.  The
    circle is sampled at ``grid`` and ``2 * grid`` points and the best sample is
    polished by a bounded 1-D maximization.
    """
    if norm_s < 0:
        raise ValueError("norm_s must be non-negative")
    if norm_s == 0:
        v = abs(phi.coeff(0))
        return SupNorm(v, v, v, 0.0)
    if not phi.is_finite:
        phi._terms_needed(norm_s)  # raises DivergentSeries when not certified

    def modulus(theta):
        return np.abs(phi.evaluate(norm_s * np.exp(1j * np.asarray(theta))))

    coarse_t = 2 * np.pi * np.arange(grid) / grid
    fine_t = 2 * np.pi * np.arange(2 * grid) / (2 * grid)
    coarse = float(modulus(coarse_t).max())
    fine_vals = modulus(fine_t)
    i = int(np.argmax(fine_vals))
    fine = float(fine_vals[i])
    h = 2 * np.pi / (2 * grid)
    res = minimize_scalar(lambda th: -float(modulus(th)), bounds=(fine_t[i] - h, fine_t[i] + h),
                          method="bounded", options={"xatol": 1e-13})
    best, angle = fine, float(fine_t[i])
    if -res.fun > best:
        best, angle = float(-res.fun), float(res.x)
    return SupNorm(best, coarse, fine, angle)


@dataclass
class NormInterval:
    lower: float
    upper: float
    lower_k: int


def multiplier_norm_interval(ws: WeightSystem, phi: Symbol, kmax: int | None = None,
                             grid: int = DEFAULT_GRID) -> NormInterval:
    """``max_k |phi(k)| ||S^k|| <= ||M_phi|| <= sup_{|z| <= ||S||} |phi(z)|``."""
    if kmax is None:
        kmax = phi.support_bound if phi.is_finite else ws.tree.max_depth // 2
    kmax = min(kmax, ws.tree.max_depth)
    norms = [1.0] + [pn.value for pn in power_norms(ws, kmax)] if kmax >= 1 else [1.0]
    prods = np.abs(phi.coeffs(kmax)) * np.asarray(norms)
    lower_k = int(np.argmax(prods))
    upper = multiplier_norm_upper(phi, norms[1] if len(norms) > 1 else 0.0, grid).value
    return NormInterval(float(prods[lower_k]), upper, lower_k)

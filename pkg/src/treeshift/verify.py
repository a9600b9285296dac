"""Self-check suite run by ``treeshift verify`` on one weighted tree.

Each check returns ``(value, tol)`` and passes when ``value <= tol``.  Checks
that need unit child sums surface :class:`NotNormalized` as a failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analysis, oracle
from .errors import IncompleteSlices, TreeShiftError
from .multiplier import (Symbol, cauchy_mult, coefficient_bound_check, gamma_apply,
                         multiplier_product_check)
from .shift import TreeVector, apply_adjoint, apply_shift, inner, norm, power_norm
from .weights import WeightSystem, restrict, unitary_conjugation_factors, weights_to_ones

DENSE_LIMIT = 1500


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float | None
    tol: float | None
    error: str | None = None
    skipped: bool = False

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "skipped": self.skipped,
                "value": self.value, "tol": self.tol, "error": self.error}


def _small(ws: WeightSystem) -> WeightSystem:
    """Shallowest-first restriction that fits the dense oracle comfortably."""
    d = ws.tree.max_depth
    while d > 1 and int((ws.tree.depth <= d).sum()) > DENSE_LIMIT:
        d -= 1
    return restrict(ws, d)


def _inner_depth(ws, margin):
    return max(0, ws.tree.max_depth - margin)


def check_adjoint_pairing(ws, rng):
    f = TreeVector.random(ws.tree, rng, max_depth=_inner_depth(ws, 1))
    g = TreeVector.random(ws.tree, rng)
    lhs = inner(ws, apply_shift(ws, f), g)
    rhs = inner(ws, f, apply_adjoint(ws, g))
    return abs(lhs - rhs) / (1 + norm(ws, f) * norm(ws, g) * max(1.0, power_norm(ws, 1).value)), 1e-12


def check_norm_oracle(ws, rng):
    small = _small(ws)
    worst = 0.0
    for k in range(1, min(3, small.tree.max_depth) + 1):
        pn = power_norm(small, k)
        est = oracle.operator_norm(oracle.materialize_shift(small).power(k))
        worst = max(worst, abs(est - pn.value) / max(pn.value, 1e-300))
    return worst, 1e-8


def check_gamma_shift(ws, rng):
    f = TreeVector.random(ws.tree, rng, max_depth=_inner_depth(ws, 1))
    diff = gamma_apply(ws, Symbol.indicator(1), f).values - apply_shift(ws, f).values
    return float(np.abs(diff).max()), 1e-13


def _random_poly(rng, deg):
    return Symbol.finite(rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1))


def check_product_law(ws, rng):
    worst = 0.0
    deg = max(0, min(3, ws.tree.max_depth // 3))
    for _ in range(5):
        phi, psi = _random_poly(rng, deg), _random_poly(rng, deg)
        f = TreeVector.random(ws.tree, rng, max_depth=_inner_depth(ws, 2 * deg))
        worst = max(worst, multiplier_product_check(ws, phi, psi, f) / (1 + norm(ws, f)))
    return worst, 1e-11


def check_algebra_laws(ws, rng):
    a, b, c = (_random_poly(rng, 6) for _ in range(3))
    m = 18
    comm = np.abs(cauchy_mult(a, b).coeffs(m) - cauchy_mult(b, a).coeffs(m)).max()
    assoc = np.abs(cauchy_mult(cauchy_mult(a, b), c).coeffs(m)
                   - cauchy_mult(a, cauchy_mult(b, c)).coeffs(m)).max()
    unit = np.abs(cauchy_mult(Symbol.indicator(0), a).coeffs(m) - a.coeffs(m)).max()
    return float(max(comm, assoc, unit)), 1e-13


def check_coefficient_bound(ws, rng):
    small = _small(ws)
    deg = min(3, small.tree.max_depth)
    phi = _random_poly(rng, deg)
    mnorm = oracle.operator_norm(oracle.materialize_multiplier(small, phi))
    margins = coefficient_bound_check(small, phi, deg, mnorm)
    return max(0.0, -margins.worst), 1e-9


def check_unitary_equivalence(ws, rng):
    ws.require_positive()
    t = ws.tree
    mu = weights_to_ones(ws)
    beta, diag = unitary_conjugation_factors(t, mu, ws.lam)
    ones = WeightSystem(t, 1.0, mu)
    target = WeightSystem(t, beta, ws.lam)
    f = TreeVector.random(t, rng, max_depth=_inner_depth(ws, 1))
    lhs = diag * apply_shift(ones, f).values
    rhs = apply_shift(target, TreeVector(t, diag * f.values)).values
    return float(np.abs(lhs - rhs).max() / (1 + np.abs(lhs).max())), 1e-12


def _w_grid(ws, n=5):
    r = analysis.bpe_profile(ws).radius_estimate
    return [0.8 * r * (j + 1) / n * np.exp(2j * np.pi * j / n) for j in range(n)]


def check_kernel_eigen(ws, rng):
    return max(analysis.adjoint_eigen_residual(ws, w) for w in _w_grid(ws)), 1e-10


def check_riesz(ws, rng):
    worst = 0.0
    for w in _w_grid(ws):
        f = TreeVector.random(ws.tree, rng, density=0.5)
        lhs = analysis.point_evaluation(f, w)
        rhs = inner(ws, f, analysis.kernel(ws, w).values)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
    return worst, 1e-12


def check_shift_covariance(ws, rng):
    ws.require_normalized()
    worst = 0.0
    for w in _w_grid(ws):
        f = TreeVector.random(ws.tree, rng, max_depth=_inner_depth(ws, 1))
        lhs = analysis.point_evaluation(apply_shift(ws, f), w)
        rhs = w * analysis.point_evaluation(f, w)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
    return worst, 1e-12


def check_intertwining(ws, rng):
    worst = 0.0
    for w in _w_grid(ws):
        phi = _random_poly(rng, 3)
        f = TreeVector.random(ws.tree, rng, max_depth=_inner_depth(ws, 3))
        worst = max(worst, analysis.intertwining_residual(ws, phi, f, w))
    return worst, 1e-10


def check_boundary_exclusion(ws, rng):
    ws.require_normalized()
    return max(0.0, -min(analysis.slice_monotonicity(ws))), 1e-12


CHECKS = [
    ("adjoint_pairing", check_adjoint_pairing),
    ("norm_vs_oracle", check_norm_oracle),
    ("multiplier_of_indicator_is_shift", check_gamma_shift),
    ("symbol_algebra_laws", check_algebra_laws),
    ("operator_product_law", check_product_law),
    ("coefficient_bound", check_coefficient_bound),
    ("unitary_equivalence", check_unitary_equivalence),
    ("riesz_identity", check_riesz),
    ("kernel_eigen_identity", check_kernel_eigen),
    ("shift_covariance", check_shift_covariance),
    ("intertwining", check_intertwining),
    ("boundary_exclusion", check_boundary_exclusion),
]


def run_suite(ws: WeightSystem, *, seed: int = 0, tol_scale: float = 1.0) -> list:
    results = []
    for name, fn in CHECKS:
        rng = np.random.default_rng([seed, len(results)])
        try:
            value, tol = fn(ws, rng)
            tol *= tol_scale
            ok = math.isfinite(value) and value <= tol
            results.append(CheckResult(name, ok, float(value), tol))
        except IncompleteSlices as exc:
            results.append(CheckResult(name, True, None, None, str(exc), skipped=True))
        except TreeShiftError as exc:
            results.append(CheckResult(name, False, None, None, f"{type(exc).__name__}: {exc}"))
    return results

"""Point evaluations, kernels, eigen-identities and path radii.

Asymptotic quantities (limsup / liminf over depth) are estimated on the tail
window ``[ceil(N/2), N]`` of a horizon-``N`` truncation; every estimate carries
the spread of its per-depth samples over that window.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._numeric import fsum_complex, log_sum_exp
from .errors import IncompleteSlices, TruncationLoss
from .multiplier import Symbol, gamma_apply, truncate_symbol
from .oracle import DENSE_BUDGET, materialize_multiplier
from .shift import TreeVector, _trend, apply_adjoint, power_norm, power_norms
from .tree import Path
from .weights import WeightSystem

GUARD_BAND = 1e-3
UNSTABLE_SPREAD = 1e-3
EIGEN_TOL = 1e-10


def tail_window(n: int):
    """Depths ``ceil(n/2) .. n`` (never including 0)."""
    return max(1, -(-n // 2)), n


def _spread(values):
    values = np.asarray(values, dtype=float)
    top = float(values.max())
    return float((top - values.min()) / top) if top > 0 else 0.0


# -- bounded point evaluations ---------------------------------------------

@dataclass
class BpeProfile:
    log_c: list              # log c_k, c_k = sum_{|v|=k} 1/beta_v
    roots: list              # c_k^{1/(2k)} for k >= 1 (index 0 unused, None)
    radius_estimate: float
    window: tuple
    window_low: float        # radius from the first half of the window
    window_high: float       # radius from the second half
    spread: float

    c: list = field(repr=False, default_factory=list)   # c_k where representable

    @property
    def unstable(self) -> bool:
        return self.spread > UNSTABLE_SPREAD


def bpe_profile(ws: WeightSystem, horizon: int | None = None) -> BpeProfile:
    """Slice sums of ``1/beta`` and the radius ``1 / max_window c_k^{1/(2k)}``."""
    t = ws.tree
    n = t.max_depth if horizon is None else horizon
    if n > t.max_depth:
        raise IncompleteSlices(f"horizon {n} is beyond the stored depth {t.max_depth}")
    if n < 1:
        raise IncompleteSlices("a horizon of at least 1 is needed")
    if not t.slices_complete:
        raise IncompleteSlices("depth slices are only partially stored (width-capped tree)")
    inv = 1.0 / ws.beta
    log_c, roots = [], [None]
    for k in range(n + 1):
        c = math.fsum(inv[t.slice(k)].tolist()) if np.isfinite(inv).all() else math.inf
        if math.isfinite(c):
            log_c.append(math.log(c))
            if k:
                roots.append(c ** (1.0 / (2 * k)))
        else:
            log_c.append(log_sum_exp(-np.log(ws.beta[t.slice(k)])))
            if k:
                roots.append(math.exp(log_c[k] / (2 * k)))
    lo, hi = tail_window(n)
    win = roots[lo:hi + 1]
    mid = len(win) // 2
    first, second = win[:max(mid, 1)], win[mid:] or win
    c = [math.fsum(inv[t.slice(k)].tolist()) for k in range(n + 1)]
    return BpeProfile(log_c, roots, 1.0 / max(win), (lo, hi),
                      1.0 / max(first), 1.0 / max(second), _spread(win), c)


@dataclass
class BpeVerdict:
    verdict: str            # inside | outside | boundary-indeterminate
    modulus: float
    radius: float
    log_terms: list = field(repr=False)   # log(c_k |w|^{2k}) over the tail window

    @property
    def ratio(self) -> float:
        return self.modulus / self.radius


def is_bpe(ws: WeightSystem, w, *, guard: float = GUARD_BAND, profile: BpeProfile | None = None) -> BpeVerdict:
    """Decide whether ``sum_v |w|^{2|v|} / beta_v`` converges.

    Away from the estimated radius the answer follows from the root test.
    Within the relative guard band the series is declared divergent only when
    its terms do not decrease anywhere on the tail window; otherwise the verdict
    is ``boundary-indeterminate``.
    """
    p = profile or bpe_profile(ws)
    r = abs(complex(w))
    lo, hi = p.window
    if r == 0:
        return BpeVerdict("inside", 0.0, p.radius_estimate, [p.log_c[0]])
    logs = [p.log_c[k] + 2 * k * math.log(r) for k in range(lo, hi + 1)]
    if r < p.radius_estimate * (1 - guard):
        verdict = "inside"
    elif r > p.radius_estimate * (1 + guard):
        verdict = "outside"
    elif all(b >= a - 1e-12 * max(1.0, abs(a)) for a, b in zip(logs, logs[1:])):
        verdict = "outside"
    else:
        verdict = "boundary-indeterminate"
    return BpeVerdict(verdict, r, p.radius_estimate, logs)


@dataclass
class EvaluationKernel:
    w: complex
    values: TreeVector
    warning: str | None = None


def kernel(ws: WeightSystem, w, *, profile: BpeProfile | None = None) -> EvaluationKernel:
    """``k_w(v) = conj(w)^{|v|} / beta_v`` (with ``0^0 = 1``)."""
    w = complex(w)
    t = ws.tree
    vals = np.power(np.conj(w), t.depth) / ws.beta
    note = None
    try:
        p = profile or bpe_profile(ws)
        if abs(w) >= p.radius_estimate:
            note = f"|w| = {abs(w):.6g} is not below the estimated radius {p.radius_estimate:.6g}"
    except IncompleteSlices:
        note = "radius unavailable on a width-capped tree"
    return EvaluationKernel(w, TreeVector(t, vals), note)


def point_evaluation(f: TreeVector, w) -> complex:
    """``V_w(f) = sum_v f(v) w^{|v|}``."""
    return fsum_complex(f.values * np.power(complex(w), f.tree.depth))


def _interior(ws: WeightSystem, interior_depth):
    t = ws.tree
    d = t.max_depth - 1 if interior_depth is None else interior_depth
    return np.flatnonzero((t.depth <= d) & t.expanded)


def adjoint_eigen_residual(ws: WeightSystem, w, interior_depth: int | None = None) -> float:
    """``max_v |(S* k_w)(v) - conj(w) k_w(v)| / (1 + |w| |k_w(v)|)`` over interior vertices.

    Interior means expanded and at depth ``<= interior_depth`` (default ``N - 1``),
    where every child of ``v`` is stored.
    """
    ws.require_normalized()
    k = kernel(ws, w).values
    lhs = apply_adjoint(ws, k).values
    rhs = np.conj(complex(w)) * k.values
    idx = _interior(ws, interior_depth)
    if idx.size == 0:
        return 0.0
    scale = 1 + abs(complex(w)) * np.abs(k.values[idx])
    return float((np.abs(lhs[idx] - rhs[idx]) / scale).max())


def _usable_degree(ws: WeightSystem, phi: Symbol, f: TreeVector):
    support = f.support
    if support.size == 0:
        return phi, 0
    room = int(ws.tree.cone_height[support].min())
    if phi.is_finite:
        if phi.support_bound > room:
            raise TruncationLoss(f"symbol degree {phi.support_bound} reaches past the stored cone "
                                 f"({room} levels) below the support of f")
        return phi, phi.support_bound
    return truncate_symbol(phi, max(room, 1)), room


def intertwining_residual(ws: WeightSystem, phi: Symbol, f: TreeVector, w) -> float:
    """``|V_w(Gamma_phi f) - phi(w) V_w(f)|`` relative to ``1 + sum_v |Gamma_phi f(v)| |w|^{|v|}``.

    A symbol of infinite support is cut at the depth still stored below the
    support of ``f``; both sides then use the same polynomial.
    """
    ws.require_normalized()
    phi, _ = _usable_degree(ws, phi, f)
    w = complex(w)
    g = gamma_apply(ws, phi, f)
    lhs = point_evaluation(g, w)
    rhs = complex(phi.evaluate(w)) * point_evaluation(f, w)
    scale = 1 + math.fsum((np.abs(g.values) * abs(w) ** f.tree.depth).tolist())
    return abs(lhs - rhs) / scale


def multiplier_adjoint_eigen_residual(ws: WeightSystem, phi: Symbol, w, *,
                                      interior_depth: int | None = None,
                                      budget: int = DENSE_BUDGET) -> float:
    """Interior residual of ``M_phi* k_w = conj(phi(w)) k_w`` with ``M_phi*`` from the dense oracle."""
    ws.require_normalized()
    t = ws.tree
    w = complex(w)
    if phi.is_finite:
        deg = phi.support_bound
    else:
        deg = max(1, t.max_depth // 2)
        phi = truncate_symbol(phi, deg)
    depth_cap = t.max_depth - deg if interior_depth is None else min(interior_depth, t.max_depth - deg)
    idx = np.flatnonzero((t.depth <= depth_cap) & (t.cone_height >= deg))
    if idx.size == 0:
        raise TruncationLoss("no vertex keeps the symbol's full cone inside the truncation")
    k = kernel(ws, w).values
    lhs = materialize_multiplier(ws, phi, budget).adjoint_apply(k).values
    rhs = np.conj(complex(phi.evaluate(w))) * k.values
    absum = float(np.sum(np.abs(phi.coeffs(deg)) * abs(w) ** np.arange(deg + 1)))
    scale = 1 + absum * np.abs(k.values[idx])
    return float((np.abs(lhs[idx] - rhs[idx]) / scale).max())


def slice_monotonicity(ws: WeightSystem) -> list:
    """Relative margins of ``sum_{|v|=k+1} s^{2k+2}/beta_v >= sum_{|v|=k} s^{2k}/beta_v``, ``s = ||S||``.

    Under unit child sums every margin is non-negative, so the series of
    :func:`is_bpe` cannot converge at ``|w| = ||S||``.
    """
    p = bpe_profile(ws)
    log_s2 = 2 * math.log(power_norm(ws, 1).value)
    return [math.expm1(p.log_c[k + 1] - p.log_c[k] + log_s2) for k in range(len(p.log_c) - 1)]


# -- paths -----------------------------------------------------------------------

@dataclass
class PathRadius:
    path: Path
    samples: list           # a_k, k = 1..len
    r2_estimate: float
    window: tuple
    spread: float
    trend: str


def _log_path_terms(ws: WeightSystem):
    """``log(sqrt(beta_v) |lambda_{root|v}|)`` for every vertex."""
    return 0.5 * np.log(ws.beta) + ws.log_abs_root_product


def path_r2(ws: WeightSystem, path: Path) -> PathRadius:
    """Samples ``a_k = (sqrt(beta_{v_k}) |lambda_{root|v_k}|)^{1/k}`` and their tail-window minimum."""
    n = path.length
    if n < 1:
        raise ValueError("path has no edges")
    logs = _log_path_terms(ws)[np.asarray(path.vertices[1:])]
    samples = np.exp(logs / np.arange(1, n + 1))
    lo, hi = tail_window(n)
    win = samples[lo - 1:hi]
    return PathRadius(path, samples.tolist(), float(win.min()), (lo, hi), _spread(win),
                      _trend(samples[lo - 1:].tolist()))


def classical_path_weights(ws: WeightSystem, path: Path) -> np.ndarray:
    """Weights of the unilateral shift unitarily equivalent to ``S`` compressed to the path."""
    v = np.asarray(path.vertices)
    return np.sqrt(ws.beta[v[1:]] / ws.beta[v[:-1]]) * np.abs(ws.lam[v[1:]])


def classical_r2(weights) -> float:
    """Tail-window minimum of ``(mu_1 ... mu_k)^{1/k}`` for a unilateral weighted shift."""
    w = np.asarray(weights, dtype=float)
    n = w.size
    samples = np.cumprod(w) ** (1.0 / np.arange(1, n + 1))
    lo, hi = tail_window(n)
    return float(samples[lo - 1:hi].min())


@dataclass
class PathBpe:
    path: Path
    samples: list           # (1/beta_{v_k})^{1/(2k)}
    radius: float
    spread: float


def path_bpe_radius(ws: WeightSystem, path: Path) -> PathBpe:
    n = path.length
    if n < 1:
        raise ValueError("path has no edges")
    v = np.asarray(path.vertices[1:])
    samples = np.exp(-np.log(ws.beta[v]) / (2 * np.arange(1, n + 1)))
    lo, hi = tail_window(n)
    win = samples[lo - 1:hi]
    return PathBpe(path, samples.tolist(), float(1.0 / win.max()), _spread(win))


@dataclass
class R2Plus:
    estimate: float
    path_max: float | None
    frontier_proxy: float | None
    paths: list = field(repr=False)
    paths_complete: bool = False


def frontier_r2_proxy(ws: WeightSystem) -> float | None:
    """Best tail-window minimum of ``a_k`` along the chain of any depth-``N`` vertex."""
    t = ws.tree
    n = t.max_depth
    lo, _ = tail_window(n)
    logs = _log_path_terms(ws)
    a = np.full(t.n_vertices, np.inf)
    nz = t.depth > 0
    a[nz] = logs[nz] / t.depth[nz]
    a[t.depth < lo] = np.inf
    # running minimum from the root down
    m = np.full(t.n_vertices, np.inf)
    for level in t.levels[1:]:
        m[level] = np.minimum(m[t.parent[level]], a[level])
    deepest = t.slice(n)
    if deepest.size == 0:
        return None
    return float(np.exp(m[deepest].max()))


def r2_plus(ws: WeightSystem, path_budget: int = 256) -> R2Plus:
    """``sup_P r2^P`` from enumerated paths and from the frontier-vertex proxy."""
    pl = ws.tree.enumerate_paths(path_budget)
    radii = [path_r2(ws, p) for p in pl.paths if p.length >= 1]
    path_max = max((r.r2_estimate for r in radii), default=None)
    proxy = frontier_r2_proxy(ws)
    estimate = max(x for x in (path_max, proxy) if x is not None)
    return R2Plus(estimate, path_max, proxy, radii, pl.complete)


# -- assembled report ---------------------------------------------------------------

def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


@dataclass
class SpectralReport:
    norm: dict
    gelfand_seq: list
    bpe_radius: dict
    r2_paths: list
    r2_plus: dict
    inclusions: list
    diagnostics: dict

    def to_dict(self) -> dict:
        return asdict(self)


def spectral_report(ws: WeightSystem, *, kmax: int | None = None, path_budget: int = 64,
                    eigen_check: bool = True) -> SpectralReport:
    t = ws.tree
    n = t.max_depth
    kmax = max(1, n // 2) if kmax is None else kmax
    pns = power_norms(ws, kmax)
    pn1 = pns[0]
    gel = [pn.value ** (1.0 / pn.k) for pn in pns]
    norm = {"value": pn1.value, "argmax": pn1.argmax, "stabilized_at": pn1.stabilized_at,
            "value_at_half_depth": pn1.half_value, "gap": pn1.gap}
    diagnostics = {"depth": n, "n_vertices": t.n_vertices, "slices_complete": t.slices_complete,
                   "normalized": ws.normalized,
                   "max_normalization_violation": ws.max_normalization_violation(),
                   "gelfand_kmax": kmax,
                   "gelfand_at_half_kmax": gel[max(0, kmax // 2 - 1)],
                   "notes": []}
    try:
        prof = bpe_profile(ws)
        bpe = {"value": prof.radius_estimate, "window": list(prof.window), "spread": prof.spread,
               "window_low": prof.window_low, "window_high": prof.window_high,
               "unstable": prof.unstable}
    except IncompleteSlices as exc:
        prof, bpe = None, None
        diagnostics["notes"].append(f"bpe radius unavailable: {exc}")

    rp = r2_plus(ws, path_budget)
    paths = []
    for pr in rp.paths:
        pb = path_bpe_radius(ws, pr.path)
        paths.append({"end": int(pr.path.end), "length": pr.path.length,
                      "r2": pr.r2_estimate, "r2_spread": pr.spread, "trend": pr.trend,
                      "bpe_radius": pb.radius, "bpe_spread": pb.spread})
    r2p = {"value": rp.estimate, "path_max": rp.path_max,
           "frontier_proxy": _finite_or_none(rp.frontier_proxy),
           "paths_complete": rp.paths_complete, "paths_sampled": len(rp.paths)}

    inclusions = []
    if bpe is not None and ws.normalized:
        inclusions.append({"kind": "bpe_disc_in_point_spectrum_of_adjoint",
                           "radius": bpe["value"], "status": "paper-asserted"})
        if eigen_check:
            w = 0.9 * bpe["value"]
            res = adjoint_eigen_residual(ws, w)
            inclusions.append({"kind": "kernel_eigen_identity", "radius": w,
                               "status": "verified" if res <= EIGEN_TOL else "failed",
                               "residual": res})
        margins = slice_monotonicity(ws)
        inclusions.append({"kind": "norm_circle_outside_bpe", "radius": norm["value"],
                           "status": "verified" if min(margins) >= -1e-12 else "failed",
                           "min_margin": min(margins)})
    inclusions.append({"kind": "r2plus_disc_in_point_spectrum_of_adjoint",
                       "radius": rp.estimate, "status": "paper-asserted"})
    lo, _ = tail_window(n)
    branching = t.branching_vertices()
    if ws.normalized and all(t.depth[b] < lo for b in branching):
        inclusions.append({"kind": "point_spectrum_of_adjoint_in_closed_r2plus_disc",
                           "radius": rp.estimate, "status": "paper-asserted"})
    else:
        diagnostics["notes"].append("branching persists into the tail window; "
                                    "no upper inclusion for the point spectrum is claimed")
    return SpectralReport(norm, gel, bpe, paths, r2p, inclusions, diagnostics)

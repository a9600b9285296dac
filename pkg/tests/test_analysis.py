import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treeshift.analysis import (adjoint_eigen_residual, bpe_profile, classical_path_weights,
                                classical_r2, frontier_r2_proxy, intertwining_residual, is_bpe,
                                kernel, multiplier_adjoint_eigen_residual, path_bpe_radius,
                                path_r2, point_evaluation, r2_plus, slice_monotonicity,
                                spectral_report)
from treeshift.errors import IncompleteSlices, NotNormalized, TruncationLoss
from treeshift.multiplier import Symbol
from treeshift.shift import TreeVector, apply_shift, inner, power_norm
from treeshift.tree import build_kary, build_random, build_ray, build_t20
from treeshift.weights import (WeightSystem, kary_weights, ones, random_weights, t20_weights)


def _branch(ws, i):
    return next(p for p in ws.tree.enumerate_paths(2).paths if ws.tree.label(p.vertices[1])[0] == i)


def test_bpe_t20(t20_60):
    p = bpe_profile(t20_60)
    assert p.c[:4] == [1, 5, 17, 65]
    assert all(c == 1 + 4 ** k for k, c in enumerate(p.c[:20]) if k)
    assert p.radius_estimate == 0.5
    assert p.spread < 1e-9 and not p.unstable


def test_bpe_kary_brute_force():
    for kappa in (2, 3, 4):
        ws = kary_weights(build_kary(kappa, 12 if kappa == 2 else 7))
        p = bpe_profile(ws)
        for k, c in enumerate(p.c):
            brute = sum(1 / ws.beta[v] for v in range(ws.tree.n_vertices) if ws.tree.depth[v] == k)
            assert c == pytest.approx(brute, rel=1e-14)
            assert c == pytest.approx(kappa ** (2 * k), rel=1e-13)
        assert p.radius_estimate == pytest.approx(1 / kappa, rel=1e-13)


def test_bpe_ray(ray_ones):
    p = bpe_profile(ray_ones)
    assert p.c == [1.0] * 41 and p.radius_estimate == 1.0


def test_bpe_needs_complete_slices():
    with pytest.raises(IncompleteSlices):
        bpe_profile(kary_weights(build_kary(3, 20, width=5)))
    with pytest.raises(IncompleteSlices):
        bpe_profile(ones(build_ray(4)), horizon=9)


def test_is_bpe(t20_60):
    assert is_bpe(t20_60, 0).verdict == "inside"
    assert is_bpe(t20_60, 0.49).verdict == "inside"
    assert is_bpe(t20_60, 0.51).verdict == "outside"
    assert is_bpe(t20_60, 1.0).verdict == "outside"


def test_is_bpe_at_norm_of_normalized_systems(t20_60, kary3, ray_ones):
    for ws in (t20_60, kary3, ray_ones):
        s = power_norm(ws, 1).value
        assert is_bpe(ws, s).verdict == "outside"
        assert is_bpe(ws, s * 1j).verdict == "outside"


def test_is_bpe_indeterminate_in_band():
    # c_k = 4^k (1+k)^2: the window estimate sits just inside 1/2 and the
    # series terms are still decreasing there
    r = build_ray(200)
    k = r.depth.astype(float)
    ws = WeightSystem(r, 0.25 ** k / (1 + k) ** 2, 1.0)
    rad = bpe_profile(ws).radius_estimate
    assert rad == pytest.approx(0.5 / 101 ** (1 / 100), rel=1e-13)
    assert is_bpe(ws, rad).verdict == "boundary-indeterminate"
    assert is_bpe(ws, rad * (1 + 5e-4) * 1j).verdict == "boundary-indeterminate"
    assert is_bpe(ws, 0.9 * rad).verdict == "inside"
    assert is_bpe(ws, 1.1 * rad).verdict == "outside"


@given(mod=st.floats(0, 2), a=st.floats(0, 2 * math.pi), b=st.floats(0, 2 * math.pi))
def test_is_bpe_is_circular(t20_60, mod, a, b):
    assert is_bpe(t20_60, mod * np.exp(1j * a)).verdict == is_bpe(t20_60, mod * np.exp(1j * b)).verdict


def test_kernel_values(t20_60):
    t = t20_60.tree
    k0 = kernel(t20_60, 0).values
    assert k0.to_dict() == {0: 1.0}
    k = kernel(t20_60, 0.3)
    assert k.values[t.vertex((2, 2))] == pytest.approx(0.09 * 16, rel=1e-14)
    assert k.warning is None
    assert kernel(t20_60, 0.6).warning is not None


def test_kernel_reproduces_basis(t20_60):
    t = t20_60.tree
    w = 0.3 + 0.1j
    k = kernel(t20_60, w).values
    for u in range(0, t.n_vertices, 7):
        assert inner(t20_60, TreeVector.basis(t, u), k) == pytest.approx(w ** t.depth[u], rel=1e-13)


def test_point_evaluation_examples(t20_60):
    t = t20_60.tree
    assert point_evaluation(TreeVector.basis(t, t.vertex((2, 4))), 0.5j) == pytest.approx(0.5j ** 4)
    f = TreeVector.from_dict(t, {0: 1, t.vertex((1, 1)): 1})
    assert point_evaluation(f, 0.2) == pytest.approx(1.2)


@given(seed=st.integers(0, 10_000), mod=st.floats(0, 0.95), phase=st.floats(0, 6.3))
def test_riesz_identity(seed, mod, phase):
    ws = random_weights(build_random(seed, 6, max_vertices=300), seed, normalized=True)
    w = mod * bpe_profile(ws).radius_estimate * np.exp(1j * phase)
    f = TreeVector.random(ws.tree, seed, density=0.5)
    lhs = point_evaluation(f, w)
    rhs = inner(ws, f, kernel(ws, w).values)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


@given(seed=st.integers(0, 10_000), mod=st.floats(0, 0.95), phase=st.floats(0, 6.3))
def test_shift_covariance(seed, mod, phase):
    ws = random_weights(build_random(seed, 6, max_vertices=300), seed, normalized=True)
    w = mod * bpe_profile(ws).radius_estimate * np.exp(1j * phase)
    f = TreeVector.random(ws.tree, seed, max_depth=5)
    lhs = point_evaluation(apply_shift(ws, f), w)
    assert abs(lhs - w * point_evaluation(f, w)) <= 1e-12 * (1 + abs(lhs))


def test_adjoint_eigen_residual(t20_60, kary3):
    assert adjoint_eigen_residual(t20_60, 0) == 0
    assert adjoint_eigen_residual(t20_60, 0.4, interior_depth=58) <= 1e-12
    assert adjoint_eigen_residual(kary3, 0.3) <= 1e-12
    with pytest.raises(NotNormalized):
        adjoint_eigen_residual(WeightSystem(build_ray(5), 1.0, 0.9), 0.1)


@pytest.mark.parametrize("ws_name", ["t20", "kary2", "kary3", "ray", "random"])
def test_eigen_residual_grid(ws_name):
    ws = {"t20": lambda: t20_weights(build_t20(60)),
          "kary2": lambda: kary_weights(build_kary(2, 10)),
          "kary3": lambda: kary_weights(build_kary(3, 7)),
          "ray": lambda: ones(build_ray(50)),
          "random": lambda: random_weights(build_random(2, 9), 2, normalized=True)}[ws_name]()
    r = bpe_profile(ws).radius_estimate
    for mod in np.linspace(0, 0.9, 6):
        for phase in np.linspace(0, 2 * np.pi, 5, endpoint=False):
            assert adjoint_eigen_residual(ws, mod * r * np.exp(1j * phase)) <= 1e-10


def test_t20_eigenvector_up_to_scale(t20_60):
    # the root value of an eigenvector is only a normalization
    t = t20_60.tree
    w = 0.35
    k = kernel(t20_60, w).values.values
    scaled = TreeVector(t, 0.5 * k)
    from treeshift.shift import apply_adjoint
    g = apply_adjoint(t20_60, scaled).values
    inner_v = t.depth < t.max_depth
    assert np.allclose(g[inner_v], w * scaled.values[inner_v], rtol=1e-13)


def test_intertwining(t20_60):
    f = TreeVector.random(t20_60.tree, 1, max_depth=40)
    assert intertwining_residual(t20_60, Symbol.indicator(0), f, 0.3) == 0
    rng = np.random.default_rng(3)
    for _ in range(10):
        phi = Symbol.finite(rng.standard_normal(5))
        assert intertwining_residual(t20_60, phi, f, 0.25) <= 1e-11
    w = 0.2 - 0.1j
    lhs = point_evaluation(apply_shift(t20_60, f), w)
    assert intertwining_residual(t20_60, Symbol.indicator(1), f, w) <= 1e-15 * (1 + abs(lhs)) * 10
    assert intertwining_residual(t20_60, Symbol.geometric(1, 0.5), f, 0.3) <= 1e-12


def test_intertwining_errors(t20_60):
    f = TreeVector.random(t20_60.tree, 2)
    with pytest.raises(TruncationLoss):
        intertwining_residual(t20_60, Symbol.indicator(3), f, 0.1)
    with pytest.raises(NotNormalized):
        intertwining_residual(random_weights(t20_60.tree, 0), Symbol.indicator(0), f, 0.1)


def test_multiplier_adjoint_eigen():
    ws = kary_weights(build_kary(2, 9))
    assert multiplier_adjoint_eigen_residual(ws, Symbol.indicator(0), 0.2) == 0
    r1 = multiplier_adjoint_eigen_residual(ws, Symbol.indicator(1), 0.3)
    r2 = adjoint_eigen_residual(ws, 0.3, interior_depth=8)
    assert r1 == pytest.approx(r2, abs=1e-15)
    assert multiplier_adjoint_eigen_residual(ws, Symbol.finite([0.5, -1, 2, 0.25]), 0.2) <= 1e-9


def test_path_r2_examples(t20_60):
    k3 = kary_weights(build_kary(3, 8))
    for p in k3.tree.enumerate_paths(5).paths:
        pr = path_r2(k3, p)
        assert np.allclose(pr.samples, 3 ** -1.5, rtol=1e-13)
        assert pr.r2_estimate == pytest.approx(1 / math.sqrt(27), rel=1e-13)
    ray = ones(build_ray(30))
    assert path_r2(ray, ray.tree.enumerate_paths(1).paths[0]).r2_estimate == 1.0
    pr = path_r2(t20_60, _branch(t20_60, 2))
    k = np.arange(1, 61)
    assert np.allclose(pr.samples, 2.0 ** ((-k - 1) / k), rtol=1e-13)
    assert pr.samples[-1] == pytest.approx(0.5, rel=0.02)
    assert pr.r2_estimate <= min(pr.samples[29:])


def test_path_r2_matches_classical_route(t20_60):
    for p in t20_60.tree.enumerate_paths(2).paths:
        mu = classical_path_weights(t20_60, p)
        assert classical_r2(mu) == pytest.approx(path_r2(t20_60, p).r2_estimate, rel=1e-13)


def test_r2_plus():
    for kappa in (2, 3):
        ws = kary_weights(build_kary(kappa, 9))
        assert r2_plus(ws).estimate == pytest.approx(kappa ** -1.5, rel=1e-13)
    ws = t20_weights(build_t20(400))
    r = r2_plus(ws)
    # the branch-1 limit is 1, approached like (1/2)^{1/k}
    assert r.estimate == pytest.approx(0.5 ** (1 / 200), rel=1e-13)
    assert r.path_max == r.frontier_proxy
    ray = ones(build_ray(10))
    assert r2_plus(ray).estimate == 1.0


def test_frontier_proxy_on_beam():
    ws = kary_weights(build_kary(4, 50, width=8))
    assert frontier_r2_proxy(ws) == pytest.approx(0.125, rel=1e-12)


def test_path_bpe(t20_60):
    assert path_bpe_radius(t20_60, _branch(t20_60, 2)).radius == pytest.approx(0.5, rel=1e-14)
    assert path_bpe_radius(t20_60, _branch(t20_60, 1)).radius == 1.0
    union = max(path_bpe_radius(t20_60, p).radius for p in t20_60.tree.enumerate_paths(2).paths)
    assert union >= bpe_profile(t20_60).radius_estimate


def test_union_bound_equality_for_finitely_many_paths():
    # on a tree with two rays the slice sums are sums over the two paths
    t = build_t20(80)
    beta = np.array([1.0] + [(0.5 if t.label(v)[0] == 1 else 0.8) ** t.depth[v] for v in range(1, t.n_vertices)])
    ws = WeightSystem(t, beta, 0.5)
    tree_r = bpe_profile(ws).radius_estimate
    radii = [path_bpe_radius(ws, p).radius for p in t.enumerate_paths(2).paths]
    assert tree_r <= min(radii) + 1e-12
    assert tree_r == pytest.approx(min(radii), rel=1e-2)


@pytest.mark.parametrize("ws", [t20_weights(build_t20(40)), kary_weights(build_kary(2, 10)),
                                kary_weights(build_kary(4, 5)), ones(build_ray(30))])
def test_slice_monotonicity(ws):
    assert min(slice_monotonicity(ws)) >= -1e-12


def test_report_kary():
    rep = spectral_report(kary_weights(build_kary(3, 8))).to_dict()
    assert rep["r2_plus"]["value"] == pytest.approx(3 ** -1.5, rel=1e-13)
    kinds = {i["kind"]: i for i in rep["inclusions"]}
    disc = kinds["bpe_disc_in_point_spectrum_of_adjoint"]
    assert disc["radius"] == pytest.approx(1 / 3) and disc["status"] == "paper-asserted"
    assert kinds["kernel_eigen_identity"]["status"] == "verified"
    assert "point_spectrum_of_adjoint_in_closed_r2plus_disc" not in kinds


def test_report_t20_and_ray():
    rep = spectral_report(t20_weights(build_t20(60))).to_dict()
    kinds = {i["kind"] for i in rep["inclusions"]}
    assert rep["bpe_radius"]["value"] == 0.5
    assert "point_spectrum_of_adjoint_in_closed_r2plus_disc" in kinds
    ray = spectral_report(ones(build_ray(40))).to_dict()
    assert ray["norm"]["value"] == 1.0 and ray["bpe_radius"]["value"] == 1.0
    assert ray["r2_plus"]["value"] == 1.0 and set(ray["gelfand_seq"]) == {1.0}


def test_report_mu_form_of_t20():
    # S_mu on unit weights: r2+ tends to 1, so the asserted disc is the unit disc
    from treeshift.weights import weights_to_ones
    t = build_t20(400)
    mu = weights_to_ones(t20_weights(t))
    rep = spectral_report(WeightSystem(t, 1.0, mu), kmax=4).to_dict()
    assert rep["r2_plus"]["value"] == pytest.approx(1.0, rel=1e-2)
    # two unit-weight rays: c_k = 2, largest root at the window start k = N/2
    assert rep["bpe_radius"]["value"] == pytest.approx(2 ** (-1 / 400), rel=1e-14)


def test_report_width_capped():
    rep = spectral_report(kary_weights(build_kary(4, 50, width=4)), kmax=2).to_dict()
    assert rep["bpe_radius"] is None
    assert rep["r2_plus"]["value"] == pytest.approx(0.125, rel=1e-12)

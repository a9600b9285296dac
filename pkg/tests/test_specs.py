import json

import numpy as np
import pytest

from treeshift.errors import WeightSpecError
from treeshift.specs import (csv_text, dumps, format_float, load_tree, parse_symbol,
                             symbol_from_spec, weights_from_spec)
from treeshift.tree import build_kary, build_t20
from treeshift.weights import t20_weights


def test_profiles():
    assert load_tree("t20").max_depth == 60
    assert load_tree("kary:3", depth=3).n_vertices == 40
    assert load_tree("kary", kappa=4, depth=2).n_vertices == 21
    assert load_tree("ray", depth=9).n_vertices == 10


def test_weight_families():
    t = build_t20(6)
    ws = weights_from_spec(t, {"beta": {"default": "four_pow_branch2"},
                               "lambda": {"default": "inverse_degree"}})
    ref = t20_weights(t)
    assert np.array_equal(ws.beta, ref.beta) and np.array_equal(ws.lam, ref.lam)
    k = build_kary(3, 3)
    ws = weights_from_spec(k, {"beta": {"default": {"family": "kappa_pow", "kappa": 2}},
                               "lambda": {"default": 0.5, "per_vertex": {"1": [0.1, 0.2], "1,2": 2}}})
    assert ws.beta[4] == 0.25
    assert ws.lam[1] == 0.1 + 0.2j and ws.lam[k.vertex((1, 2))] == 2 and ws.lam[3] == 0.5
    assert weights_from_spec(t, None).normalized


@pytest.mark.parametrize("spec", [
    {"beta": {"default": "nope"}},
    {"beta": {"default": -1}},
    {"beta": {"default": [1, 2]}},
    {"lambda": {"per_vertex": {"99": 1}}},
    {"lambda": {"per_vertex": {"7,7": 1}}},
    {"lambda": {"default": [1, 2, 3]}},
])
def test_weight_spec_errors(spec):
    with pytest.raises(WeightSpecError):
        weights_from_spec(build_t20(3), spec)


def test_symbols():
    assert symbol_from_spec({"kind": "finite", "coeffs": [1, [0, 1]]}).coeffs(1).tolist() == [1, 1j]
    assert symbol_from_spec({"kind": "indicator", "n": 2}).coeffs(2).tolist() == [0, 0, 1]
    assert symbol_from_spec({"kind": "geometric", "a": 2, "ratio": 0.5}).coeff(2) == 0.5
    assert parse_symbol("1,2,3").support_bound == 2
    assert parse_symbol('{"kind": "indicator", "n": 1}').coeff(1) == 1
    assert parse_symbol("1,2i").coeff(1) == 2j
    with pytest.raises(ValueError):
        symbol_from_spec({"kind": "other"})


def test_dumps_precision():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1.0"
    assert format_float(float("inf")) == "null"
    text = dumps({"a": [1, 2.5, None, True], "b": 1 + 2j, "c": np.float64(1 / 3), "d": np.int64(4)})
    assert text.endswith("\n")
    back = json.loads(text)
    assert back == {"a": [1, 2.5, None, True], "b": [1.0, 2.0], "c": 1 / 3, "d": 4}
    with pytest.raises(TypeError):
        dumps(object())


def test_csv_text():
    text = csv_text(["k", "v"], [(0, 0.5), (1, "x")])
    assert text == "k,v\n0,0.5\n1,x\n"

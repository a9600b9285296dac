"""Loading tree, weight and symbol descriptions; deterministic JSON and CSV output.

Tree arguments are either a path to a JSON tree spec or a built-in profile
name: ``t20``, ``ray``, ``kary`` or ``kary:<kappa>``.

Weight JSON::

    {"beta":   {"default": <expr>, "per_vertex": {"<id>": <value>}},
     "lambda": {"default": <expr>, "per_vertex": {...}}}

where ``<expr>`` is a number, ``[re, im]``, a family name (``"one"``,
``"inverse_degree"``, ``"kappa_pow"``, ``"four_pow_branch2"``) or
``{"family": "kappa_pow", "kappa": 3}``.  Vertex keys are integer ids, or
comma-joined labels such as ``"2,1"`` on labelled trees.  An omitted section
falls back to the tree's default weights.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path as FilePath

import numpy as np

from .errors import WeightSpecError
from .multiplier import Symbol
from .tree import DirectedTree, from_spec
from .weights import WeightSystem, default_weights, four_pow_branch2, inverse_degree, kappa_pow

PROFILE_DEPTHS = {"t20": 60, "ray": 64, "kary": 8}


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def is_profile(arg: str) -> bool:
    return arg.split(":", 1)[0] in PROFILE_DEPTHS and not FilePath(arg).exists()


def load_tree(arg: str, *, depth=None, kappa=None, width=None) -> DirectedTree:
    """Build a tree from a profile name or a tree-spec file; flags override the spec."""
    if is_profile(arg):
        name, _, k = arg.partition(":")
        spec = {"kind": name, "depth": depth or PROFILE_DEPTHS[name]}
        if name == "kary":
            spec["kappa"] = kappa or (int(k) if k else 2)
    else:
        spec = dict(load_json(arg))
        if depth is not None:
            spec["depth"] = depth
        if kappa is not None:
            spec["kappa"] = kappa
    if width is not None:
        spec["width"] = width
    return from_spec(spec)


def _scalar(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise WeightSpecError(f"complex values are [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return x
    raise WeightSpecError(f"not a number: {x!r}")


def _family(tree: DirectedTree, expr, which: str):
    if isinstance(expr, dict):
        name = expr.get("family")
        kappa = expr.get("kappa")
    else:
        name, kappa = expr, None
    if name == "one":
        return np.ones(tree.n_vertices)
    if name == "inverse_degree":
        return inverse_degree(tree)
    if name == "kappa_pow":
        kappa = kappa or tree.params.get("kappa")
        if kappa is None:
            raise WeightSpecError("kappa_pow needs a kappa")
        return kappa_pow(tree, kappa)
    if name == "four_pow_branch2":
        try:
            return four_pow_branch2(tree)
        except ValueError as exc:
            raise WeightSpecError(str(exc)) from None
    raise WeightSpecError(f"unknown {which} family {name!r}")


def _vertex_key(tree: DirectedTree, key: str) -> int:
    if "," in key:
        try:
            return tree.vertex(tuple(int(p) for p in key.split(",")))
        except (KeyError, ValueError):
            raise WeightSpecError(f"no vertex labelled {key!r}") from None
    v = int(key)
    if not 0 <= v < tree.n_vertices:
        raise WeightSpecError(f"vertex {v} is not stored")
    return v


def _section(tree: DirectedTree, section, fallback, which):
    if section is None:
        return fallback
    expr = section.get("default")
    if expr is None:
        values = np.array(fallback, dtype=complex)
    elif isinstance(expr, str) or isinstance(expr, dict):
        values = np.asarray(_family(tree, expr, which), dtype=complex)
    else:
        values = np.full(tree.n_vertices, _scalar(expr), dtype=complex)
    for key, x in (section.get("per_vertex") or {}).items():
        values[_vertex_key(tree, str(key))] = _scalar(x)
    return values


def weights_from_spec(tree: DirectedTree, spec: dict | None) -> WeightSystem:
    base = default_weights(tree)
    if not spec:
        return base
    beta = _section(tree, spec.get("beta"), base.beta, "beta")
    lam = _section(tree, spec.get("lambda"), base.lam, "lambda")
    beta = np.asarray(beta)
    if np.iscomplexobj(beta):
        if np.any(beta.imag != 0):
            raise WeightSpecError("beta must be real")
        beta = beta.real
    try:
        return WeightSystem(tree, beta, lam)
    except ValueError as exc:
        raise WeightSpecError(str(exc)) from None


def symbol_from_spec(spec: dict) -> Symbol:
    kind = spec.get("kind")
    if kind == "finite":
        return Symbol.finite([_scalar(c) for c in spec["coeffs"]])
    if kind == "geometric":
        return Symbol.geometric(_scalar(spec["a"]), _scalar(spec["ratio"]))
    if kind == "indicator":
        return Symbol.indicator(int(spec["n"]))
    raise ValueError(f"unknown symbol kind {kind!r}")


def parse_symbol(arg: str) -> Symbol:
    """A symbol from a JSON file, inline JSON, or comma-separated coefficients."""
    text = arg.strip()
    if text.startswith("{"):
        return symbol_from_spec(json.loads(text))
    if FilePath(arg).exists():
        return symbol_from_spec(load_json(arg))
    return Symbol.finite([complex(x.replace("i", "j")) if "j" in x or "i" in x else float(x)
                          for x in text.split(",")])


# -- deterministic output -------------------------------------------------------

def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _encode(obj, out: list):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        _encode([obj.real, obj.imag], out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k), ensure_ascii=False) + ": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with floats at 17 significant digits; newline-terminated."""
    out: list = []
    _encode(obj, out)
    return "".join(out) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()

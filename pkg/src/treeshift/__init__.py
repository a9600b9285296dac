"""Weighted shifts on truncated rooted directed trees.

Submodules: :mod:`~treeshift.tree`, :mod:`~treeshift.weights`,
:mod:`~treeshift.shift`, :mod:`~treeshift.multiplier`,
:mod:`~treeshift.analysis`, :mod:`~treeshift.oracle` and the
:mod:`~treeshift.cli` front end.
"""

from .analysis import bpe_profile, is_bpe, kernel, point_evaluation, r2_plus, spectral_report
from .multiplier import Symbol, cauchy_mult, gamma_apply
from .shift import TreeVector, apply_adjoint, apply_shift, power_norm
from .tree import DirectedTree, build_explicit, build_kary, build_random, build_ray, build_t20
from .weights import (WeightSystem, default_weights, kary_weights, normalize_mu, ones, t20_weights,
                      weights_to_ones)

__version__ = "0.1.0"

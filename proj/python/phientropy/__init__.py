"""Matrix phi-entropy kernels.

Models are plain dicts in the JSON model format used by the command-line tool.
"""

import json

import numpy as np

from . import _core
from ._core import PhiEntropyError, tail_bound

__all__ = [
    "PhiEntropyError",
    "entropy_report",
    "subadditivity_gap",
    "symmetrized_bound",
    "membership_check",
    "derivative_operator",
    "integral_inverse_derivative",
    "variance_measure",
    "tail_bound",
    "exact_tail",
    "herbst_slacks",
    "moment_bound",
    "rademacher_diagonal",
    "wigner_sign",
    "phi_value",
    "psi_value",
]


def _text(model):
    return model if isinstance(model, str) else json.dumps(model)


def phi_value(phi, t):
    return _core.phi_value(phi, float(t))


def psi_value(phi, t):
    return _core.psi_value(phi, float(t))


def entropy_report(phi, model):
    return _core.entropy_report(phi, _text(model))


def subadditivity_gap(phi, model):
    return _core.subadditivity_gap(phi, _text(model))


def symmetrized_bound(phi, model):
    return _core.symmetrized_bound(phi, _text(model))


def membership_check(phi, d, trials, seed):
    return _core.membership_check(phi, d, trials, seed)


def derivative_operator(f, a):
    """Matrix of D f(A) acting on column-stacked vec(H)."""
    return _core.derivative_operator(str(f), np.asarray(a, dtype=complex))


def integral_inverse_derivative(phi, a, nodes=64):
    return _core.integral_inverse_derivative(phi, np.asarray(a, dtype=complex), nodes)


def variance_measure(model):
    return _core.variance_measure(_text(model))


def exact_tail(model, t_grid):
    return _core.exact_tail(_text(model), list(t_grid))


def herbst_slacks(model, theta_grid):
    """(worst differential slack, worst integrated slack, scale)."""
    return _core.herbst_slacks(_text(model), list(theta_grid))


def moment_bound(model, q):
    return _core.moment_bound(_text(model), q)


def rademacher_diagonal(d, n, seed):
    return json.loads(_core.rademacher_diagonal(d, n, seed))


def wigner_sign(d):
    return json.loads(_core.wigner_sign(d))

import math

import numpy as np
import pytest

import phientropy as pe

HAND = {
    "factors": [[{"label": "a", "p": 0.5}, {"label": "b", "p": 0.5}]],
    "d": 1,
    "map": {
        "kind": "table",
        "entries": [
            {"x": ["a"], "matrix": {"d": 1, "re": [[1.0]]}},
            {"x": ["b"], "matrix": {"d": 1, "re": [[2.0]]}},
        ],
    },
}


def test_scalar_entropy_of_two_point_law():
    r = pe.entropy_report("entropy", HAND)
    expect = 0.5 * 2.0 * math.log(2.0) - 1.5 * math.log(1.5)
    assert r["h_phi"] == pytest.approx(expect, rel=1e-12)
    assert r["subadditivity_gap"] == pytest.approx(0.0, abs=1e-15)


def test_power_phi_values():
    assert pe.phi_value("power:1.5", 4.0) == pytest.approx(8.0)
    assert pe.psi_value("power:2.0", 3.0) == pytest.approx(6.0)


def test_subadditivity_on_builtin():
    model = pe.rademacher_diagonal(2, 3, 7)
    assert pe.variance_measure(model) > 0.0
    psd = pe.wigner_sign(2)
    with pytest.raises(pe.PhiEntropyError):
        pe.entropy_report("entropy", psd)


def test_membership_and_control():
    assert pe.membership_check("entropy", 2, 50, 1)["passed"]
    assert not pe.membership_check("power:4.0", 1, 200, 7)["passed"]


def test_derivative_operator_of_log_is_inverted_by_the_integral():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = g @ g.conj().T / 3 + 0.5 * np.eye(3)
    d = pe.derivative_operator("log", a)
    inv = pe.integral_inverse_derivative("entropy", a)
    assert np.max(np.abs(inv @ d - np.eye(9))) < 1e-6


def test_tail_and_moments():
    model = pe.rademacher_diagonal(3, 10, 1)
    v = pe.variance_measure(model)
    grid = [0.0, 1.0, 2.0, 4.0]
    for t, p in zip(grid, pe.exact_tail(model, grid)):
        assert p <= pe.tail_bound(3, v, t)
    diff, integ, scale = pe.herbst_slacks(model, [0.25, 0.5, 1.0])
    assert diff >= -1e-9 * scale and integ >= -1e-9 * scale
    r = pe.moment_bound(HAND, 2)
    assert r["lhs"] == pytest.approx(math.sqrt(2.5), abs=1e-9)
    assert r["rhs"] == pytest.approx(1.75, abs=1e-9)

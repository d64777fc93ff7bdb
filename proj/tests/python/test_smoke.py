"""Smoke tests for the Python bindings against the C++ core."""

import math

import pytest

import vortexgas as vg


def test_version():
    assert isinstance(vg.version(), str)
    assert vg.version()


def test_kernel_table_splitting():
    mass = 5.0
    g = vg.KernelTable("green", mass)
    w = vg.KernelTable("yukawa", mass)
    v = vg.KernelTable("smooth", mass)
    for i, j in [(1, 0), (3, 7), (64, 64), (17, 100)]:
        assert g.node(i, j) == pytest.approx(w.node(i, j) + v.node(i, j), abs=1e-10)


def test_smooth_diag_grows():
    assert vg.smooth_diag(20.0) > vg.smooth_diag(5.0)


def test_field_norm_deterministic():
    a = vg.field_norm_sq(8.0, 42)
    b = vg.field_norm_sq(8.0, 42)
    c = vg.field_norm_sq(8.0, 43)
    assert a == b
    assert a != c
    assert a > 0.0


def test_exp_moment_mc_matches_closed_form():
    mass = 8.0
    exact = vg.analytic_exp_moment(1.0, mass)
    est = vg.exp_moment_mc(1.0, mass, 2000, 7)
    assert 0.0 < exact < 1.0
    assert abs(est["value"] - exact) < 4.0 * est["stderr"]


def test_analytic_exp_moment_decays_with_mass():
    assert vg.analytic_exp_moment(1.0, 64.0) < vg.analytic_exp_moment(1.0, 8.0)


def test_remainder_expand_identity():
    e_values = [complex(0.4, 0.1), complex(-0.2, 0.3), complex(0.1, -0.5), complex(0.6, 0.0)]
    rep = vg.remainder_expand(e_values, 0.7, 2, 3)
    assert rep["identity_error"] <= 1e-12 * len(e_values)


def test_partition_estimate_jensen():
    est = vg.partition_estimate(1.0, 4, 4000, 11)
    assert est["value"] + 3.0 * est["stderr"] >= 1.0


def test_free_energy_uniform_is_zero():
    n = 8
    flat = [[1.0] * n for _ in range(n)]
    assert vg.free_energy(flat, flat, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_run_experiment_inequalities(tmp_path):
    result = vg.run_experiment(
        "inequalities", {"samples": "50"}, str(tmp_path / "ineq"), 5
    )
    assert result["all_passed"]
    assert (tmp_path / "ineq" / "manifest.json").exists()


def test_run_experiment_rejects_unknown_key(tmp_path):
    with pytest.raises(vg.VortexgasError):
        vg.run_experiment("inequalities", {"no-such-key": "1"}, str(tmp_path / "bad"), 5)

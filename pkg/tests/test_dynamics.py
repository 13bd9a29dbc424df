"""Master-equation integration, sensitivity propagation and the exact
coefficient propagator, cross-checked against closed forms and each other."""
import math

import numpy as np
import pytest

from qmetro.analytic import closed_form_expectation_n2
from qmetro.dynamics import (
    expectation_curve,
    integrate,
    precision_curve,
    sample_grid,
)
from qmetro.model import (
    ExperimentConfig,
    NoiseChannel,
    build_measurement,
)
from qmetro.pauliprop import backward_closure, build_engine, coefficient_curve
from qmetro.model import build_hamiltonian, site_letter_map, ChannelKind


def cfg(n=2, gamma=0.05, channel="dephasing", scheme="cluster", t_max=10.0,
        chi=1.0, spp=16):
    return ExperimentConfig(n=n, chi=chi,
                            channel=NoiseChannel(channel, gamma),
                            scheme=scheme, t_max=t_max,
                            samples_per_period=spp)


def test_sample_grid_resolution():
    grid = sample_grid(3, 1.0, 10.0, 16)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(10.0)
    period = 2 * math.pi / 3
    assert grid[1] - grid[0] <= period / 16 + 1e-12


def test_noiseless_cluster_cosine():
    for n in (1, 3):
        curve = precision_curve(cfg(n=n, gamma=0.0, t_max=4.0))
        np.testing.assert_allclose(
            curve.expM, np.cos(n * curve.times), atol=1e-8)


def test_integrator_matches_n2_closed_form():
    curve = precision_curve(cfg(t_max=20.0))
    for t, e in zip(curve.times, curve.expM):
        if t > 0:
            assert e == pytest.approx(
                closed_form_expectation_n2(1.0, 0.05, t), abs=1e-6)


def test_trace_stays_normalized():
    traj = integrate(cfg(n=3, gamma=0.2, t_max=10.0))
    assert traj.renormalizations == 0
    for rho in traj.rhos:
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-9)


def test_zero_time_sample_is_nonfinite():
    curve = precision_curve(cfg(t_max=5.0))
    assert not curve.finite[0]
    assert math.isnan(curve.deltachi_sqrtT[0])


def test_dense_output_matches_grid():
    traj = integrate(cfg(n=2, gamma=0.1, t_max=5.0))
    k = len(traj.times) // 2
    rho, sens = traj.state_at(traj.times[k])
    np.testing.assert_allclose(rho, traj.rhos[k], atol=1e-9)
    np.testing.assert_allclose(sens, traj.sens[k], atol=1e-9)


def test_sensitivity_matches_finite_difference():
    h = 1e-5
    base = cfg(n=3, gamma=0.05, t_max=3.0)
    c0 = precision_curve(base)
    cp = precision_curve(cfg(n=3, gamma=0.05, t_max=3.0, chi=1.0 + h))
    cm = precision_curve(cfg(n=3, gamma=0.05, t_max=3.0, chi=1.0 - h))
    fd = (cp.expM - cm.expM) / (2 * h)
    mask = np.abs(c0.dexpM_dchi) > 1e-3
    rel = np.abs(fd[mask] - c0.dexpM_dchi[mask]) / np.abs(c0.dexpM_dchi[mask])
    assert rel.max() < 1e-4


def test_tolerance_halving_convergence():
    base = cfg(n=2, gamma=0.1, t_max=10.0)
    a = precision_curve(base)
    b = precision_curve(base, rtol=0.5e-9, atol=0.5e-12)
    assert np.max(np.abs(a.expM - b.expM)) < 1e-8


def test_depolarizing_equals_dephasing_for_ref1():
    for scheme in ("ref1-max", "ref1-unc"):
        a = coefficient_curve(cfg(n=3, gamma=0.1, channel="dephasing",
                                  scheme=scheme))
        b = coefficient_curve(cfg(n=3, gamma=0.1, channel="depolarizing",
                                  scheme=scheme))
        np.testing.assert_allclose(a.expM, b.expM, atol=1e-12)
        np.testing.assert_allclose(a.dexpM_dchi, b.dexpM_dchi, atol=1e-12)
        np.testing.assert_allclose(a.deltaM, b.deltaM, atol=1e-12)


def test_damping_halves_ref1_max_decay():
    c = coefficient_curve(cfg(n=4, gamma=0.1, channel="damping",
                              scheme="ref1-max"))
    model = np.exp(-4 * 0.1 * c.times / 2) * np.cos(4 * c.times)
    np.testing.assert_allclose(c.expM, model, atol=1e-10)


def test_engine_matches_integrator():
    for channel, scheme in (("dephasing", "cluster"),
                            ("depolarizing", "cluster"),
                            ("damping", "cluster"),
                            ("dephasing", "ref2-unc")):
        base = cfg(n=3, gamma=0.1, channel=channel, scheme=scheme, t_max=8.0)
        a = precision_curve(base)
        b = coefficient_curve(base)
        np.testing.assert_allclose(a.expM, b.expM, atol=5e-8)
        np.testing.assert_allclose(a.dexpM_dchi, b.dexpM_dchi, atol=5e-7)
        np.testing.assert_allclose(a.deltaM, b.deltaM, atol=5e-7)


def test_backward_closure_is_generator_invariant():
    # no word outside the closure feeds back into it
    n = 4
    h = build_hamiltonian("cluster", n, 1.0)
    lm = site_letter_map(ChannelKind.DEPHASING, 0.1)
    words = backward_closure(["Z" * n], list(h.terms), lm)
    assert "Z" * n in words
    # the closure is a fixed point: re-closing it adds nothing
    again = backward_closure(sorted(words), list(h.terms), lm)
    assert set(again) == set(words)
    assert len(words) <= (1 << n) + 1


def test_engine_curve_evaluator_interpolates():
    base = cfg(n=2, gamma=0.05, t_max=10.0)
    c = coefficient_curve(base)
    k = len(c.times) // 2
    t_mid = 0.5 * (c.times[k] + c.times[k + 1])
    v = c.eval_deviation(t_mid)
    lo, hi = sorted((c.deltachi_sqrtT[k], c.deltachi_sqrtT[k + 1]))
    assert math.isfinite(v)
    assert lo * 0.5 <= v <= hi * 2.0


def test_measurement_identity_component_rejected():
    base = cfg(n=2)
    engine = build_engine(base)
    assert engine.msq_const == pytest.approx(1.0)  # M^2 = identity for ZZ


def test_expectation_curve_second_moment():
    base = cfg(n=2, gamma=0.1, t_max=5.0, scheme="ref1-unc")
    traj = integrate(base)
    m = build_measurement("ref1-unc", 2)
    curve = expectation_curve(traj, m)
    assert np.all(curve.deltaM >= 0)
    assert np.all(curve.deltaM <= 2.0 + 1e-9)  # operator norm of X1+X2

"""Closed forms, the 15x15 coefficient generator, envelopes and expansions."""
import math

import numpy as np
import pytest
from scipy.linalg import expm

from qmetro.analytic import (
    ROW_MAJOR_WORDS,
    OmegaDomainError,
    build_matrix_a,
    closed_form_deviation,
    closed_form_expectation_n2,
    derive_matrix_a,
    envelope,
    envelope_touch_times,
    epsilon_series,
    evolve_expm,
    extrapolated_deviation,
    hump_positions,
    initial_coefficients,
    minima_and_times,
    omega,
    scaling_expansion,
)
from qmetro.model import ExperimentConfig, NoiseChannel
from qmetro.pauliprop import coefficient_curve


def test_printed_matrix_reference_entries():
    a = build_matrix_a(1.0, 0.05)
    assert a[0, 0] == -0.05
    assert a[0, 5] == -1.0
    assert a[14, 1] == 1.0
    assert a[14, 7] == 1.0


def test_rederived_generator_is_real_and_dissipative():
    d = derive_matrix_a(1.0, 0.05)
    assert np.abs(d.imag).max() == 0.0
    assert np.linalg.eigvals(d).real.max() < 1e-12


def test_printed_matrix_differs_only_in_known_phantom_entries():
    """The printed matrix carries 8 spurious +-i*chi entries.

    For each of those word pairs the basis word anticommutes with the
    Hamiltonian term at both tensor factors, so the true commutator
    coupling vanishes; the rederived generator is zero there.
    """
    chi, gamma = 1.3, 0.07
    diff = build_matrix_a(chi, gamma) - derive_matrix_a(chi, gamma)
    nz = {(r, c): diff[r, c] for r, c in zip(*np.nonzero(np.abs(diff) > 1e-14))}
    expected = {(5, 10), (6, 9), (8, 13), (9, 6), (9, 12), (10, 5), (12, 9),
                (13, 8)}
    assert set(nz) == expected
    for val in nz.values():
        assert val in (1j * chi, -1j * chi)
    # the phantom block never couples into the measured chain
    chain = [ROW_MAJOR_WORDS.index(w) for w in ("IY", "XX", "YI", "ZZ")]
    assert not {r for r, _c in nz} & set(chain)
    assert not {c for _r, c in nz} & set(chain)


def test_both_generators_give_identical_expectation():
    chi, gamma = 1.0, 0.2
    c0 = initial_coefficients()
    for t in (0.5, 3.0, 10.0):
        printed = 4 * (expm(build_matrix_a(chi, gamma) * t) @ c0)[14].real
        derived = 4 * (expm(derive_matrix_a(chi, gamma) * t) @ c0)[14].real
        assert printed == pytest.approx(derived, abs=1e-12)


def test_evolve_expm_at_zero_time():
    _c, e = evolve_expm(1.0, 0.3, 0.0)
    assert e == pytest.approx(1.0, abs=1e-14)


def test_evolve_expm_noiseless_cosine():
    for t in np.linspace(0.1, 10, 23):
        _c, e = evolve_expm(1.0, 0.0, t)
        assert e == pytest.approx(math.cos(2 * t), abs=1e-10)


def test_evolve_expm_matches_closed_form():
    for ratio in (0.0, 0.01, 0.05, 0.2, 0.5):
        for t in np.linspace(0.25, 50, 40):
            _c, e = evolve_expm(1.0, ratio, t)
            assert e == pytest.approx(
                closed_form_expectation_n2(1.0, ratio, t), abs=1e-9)


def test_reconstructed_state_is_physical():
    # the rederived generator keeps the reconstruction a valid state; the
    # published matrix does not (its spurious entries leak imaginary parts
    # into the coefficients, though never into the measured chain)
    from qmetro.pauli import PauliString
    c = expm(derive_matrix_a(1.0, 0.1) * 2.5) @ initial_coefficients()
    rho = np.eye(4, dtype=complex) / 4
    for word, amp in zip(ROW_MAJOR_WORDS, c):
        rho += amp * PauliString(word).dense()
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    # the published matrix still yields a real measured expectation
    c_printed, e_printed = evolve_expm(1.0, 0.1, 2.5)
    assert e_printed == pytest.approx(4 * c_printed[14].real)
    assert abs(c_printed[14].imag) < 1e-14


def test_omega_domain():
    assert omega(1.0, 0.0) == pytest.approx(2.0)
    with pytest.raises(OmegaDomainError):
        omega(1.0, 2.0)
    with pytest.raises(OmegaDomainError):
        closed_form_expectation_n2(1.0, 2.5, 1.0)
    with pytest.raises(ValueError):
        closed_form_deviation(3, 1.0, 0.05, 1.0)


def test_closed_form_deviation_noiseless_heisenberg():
    for n in (1, 2):
        for t in (0.3, 1.7, 4.0):
            if abs(math.sin(n * t)) < 1e-3:
                continue
            assert closed_form_deviation(n, 1.0, 0.0, t) == pytest.approx(
                1.0 / (n * math.sqrt(t)), abs=1e-12)


def test_closed_form_deviation_matches_engine_curve():
    cfgs = ExperimentConfig(n=2, chi=1.0,
                            channel=NoiseChannel("dephasing", 0.05),
                            scheme="cluster", t_max=50.0)
    curve = coefficient_curve(cfgs)
    for t, dev, fin in zip(curve.times, curve.deltachi_sqrtT, curve.finite):
        if fin and t > 0:
            assert dev == pytest.approx(
                closed_form_deviation(2, 1.0, 0.05, t), abs=1e-9)


def test_envelope_values():
    n, gamma = 7, 0.05
    t = 1.0 / (2 * n * gamma)
    assert envelope("ref-max", n, 1.0, gamma, t) == pytest.approx(
        math.sqrt(2 * gamma * math.e / n), abs=1e-12)
    assert envelope("ref-unc", n, 1.0, gamma, 1.0 / (2 * gamma)) \
        == pytest.approx(math.sqrt(2 * gamma * math.e / n), abs=1e-12)
    t = 1.0 / (n * gamma)
    assert envelope("cluster-approx", n, 1.0, gamma, t) == pytest.approx(
        math.sqrt(gamma * math.e / n), abs=1e-12)
    # gamma = 0 reductions
    assert envelope("ref-max", 4, 1.0, 0.0, 2.0) == pytest.approx(
        1 / (4 * math.sqrt(2)))
    assert envelope("ref-unc", 4, 1.0, 0.0, 2.0) == pytest.approx(
        1 / math.sqrt(8))
    with pytest.raises(ValueError):
        envelope("cluster", 3, 1.0, 0.05, 1.0, exact=True)


def test_exact_envelope_touches_exact_deviation():
    chi, gamma = 1.0, 0.05
    for t in envelope_touch_times(chi, gamma, 40.0):
        dev = closed_form_deviation(2, chi, gamma, t)
        env = envelope("cluster", 2, chi, gamma, t, exact=True)
        assert dev == pytest.approx(env, rel=1e-12)


def test_exact_envelope_lower_bounds_curve():
    chi, gamma = 1.0, 0.05
    for t in np.linspace(0.2, 40, 400):
        dev = closed_form_deviation(2, chi, gamma, t)
        if math.isfinite(dev):
            assert dev >= envelope("cluster", 2, chi, gamma, t, exact=True) \
                - 1e-10


def test_extrapolation_tracks_numeric_curve_within_ten_percent():
    gamma = 0.05
    for n in (3, 4, 5, 6):
        cfgs = ExperimentConfig(n=n, chi=1.0,
                                channel=NoiseChannel("dephasing", gamma),
                                scheme="cluster")
        curve = coefficient_curve(cfgs)
        # compare at the per-lobe minima; toward the lobe edges both curves
        # diverge and the ratio is dominated by grid placement
        v = np.where(curve.finite, curve.deltachi_sqrtT, np.inf)
        gaps = []
        for i in range(1, v.size - 1):
            if np.isfinite(v[i]) and v[i] < v[i - 1] and v[i] < v[i + 1] \
                    and curve.times[i] > 1.0:
                t = curve.times[i]
                gaps.append(abs(v[i] - extrapolated_deviation(n, 1.0, gamma, t))
                            / v[i])
        gaps = np.array(gaps)
        assert gaps.max() < 0.10
        assert gaps.max() > 0.0


def test_minima_and_times():
    t_min, v_min = minima_and_times("cluster", 2, 1.0, 0.05)
    assert t_min == pytest.approx(1 / (2 * 0.05) - 0.05 / 8, abs=0.05)
    assert v_min == pytest.approx(math.sqrt(0.05 * math.e / 2), rel=5e-3)
    t_min, v_min = minima_and_times("cluster", 5, 1.0, 0.05)
    assert t_min == pytest.approx(1 / (5 * 0.05))
    assert v_min == pytest.approx(math.sqrt(0.05 * math.e / 5))
    # damping halves the reference rates (the printed minima table)
    t_min, v_min = minima_and_times("ref-max", 7, 1.0, 0.05, channel="damping")
    assert t_min == pytest.approx(1 / (7 * 0.05))
    assert v_min == pytest.approx(math.sqrt(0.05 * math.e / 7))
    t_min, _ = minima_and_times("ref-unc", 7, 1.0, 0.05, channel="damping")
    assert t_min == pytest.approx(1 / 0.05)
    # dephasing keeps the full rate
    t_min, v_min = minima_and_times("ref-max", 7, 1.0, 0.05)
    assert t_min == pytest.approx(1 / (2 * 7 * 0.05))
    assert v_min == pytest.approx(math.sqrt(2 * 0.05 * math.e / 7))
    with pytest.raises(ValueError):
        minima_and_times("ref-max", 3, 1.0, 0.0)


def test_epsilon_series():
    assert epsilon_series(0.0) == pytest.approx(1 - 1 / math.sqrt(2))
    assert epsilon_series(0.1) == pytest.approx(
        1 - 1 / math.sqrt(2) + 3 / (4 * math.sqrt(2)) * 0.01)
    assert epsilon_series(0.3) == epsilon_series(-0.3)


def test_hump_positions():
    humps = hump_positions(1.0, 7)
    assert humps == pytest.approx(
        [2 / math.sqrt(math.pi ** 2 + 1),
         2 / math.sqrt(9 * math.pi ** 2 + 1),
         2 / math.sqrt(25 * math.pi ** 2 + 1),
         2 / math.sqrt(49 * math.pi ** 2 + 1)])
    assert humps[1] == pytest.approx(0.2110, abs=5e-4)
    assert humps[2] == pytest.approx(0.1271, abs=5e-4)
    assert all(a > b for a, b in zip(humps, humps[1:]))


def test_scaling_expansion():
    first, offset, validity = scaling_expansion("cluster", 4, 0.01, 2.0)
    assert first == pytest.approx(1 / (4 * math.sqrt(2)))
    assert offset == pytest.approx(0.005 * math.sqrt(2))
    assert validity == pytest.approx(0.04)
    f_max, o_max, _ = scaling_expansion("ref-max", 4, 0.01, 2.0)
    assert f_max == pytest.approx(first)
    assert o_max == pytest.approx(2 * offset)
    f_unc, o_unc, v_unc = scaling_expansion("ref-unc", 4, 0.01, 2.0)
    assert f_unc == pytest.approx(1 / math.sqrt(8))
    assert v_unc == pytest.approx(0.02)
    _f, o_zero, _v = scaling_expansion("cluster", 4, 0.0, 2.0)
    assert o_zero == 0.0
    with pytest.raises(ValueError):
        scaling_expansion("ref-max", 6, 0.2, 1.0)

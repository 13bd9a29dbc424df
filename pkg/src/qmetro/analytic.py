"""Closed-form two-qubit solutions, envelopes, minima and scaling formulas.

All deviations are reported in delta-chi * sqrt(T) units so the total time
budget T drops out, matching the numerical PrecisionCurve convention.

The 15x15 coefficient generator acts on the two-qubit Pauli coefficients
c = (c01, c02, ..., c33), row-major over (i, j) in {0..3}^2 without (0, 0)
and with sigma_{1,2,3} = X, Y, Z.  Two versions are provided: the published
reference transcription (``build_matrix_a``) and an independent rederivation
from the master equation via Pauli-word commutator expansion
(``derive_matrix_a``); the test suite compares them entrywise.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .model import ChannelKind, build_hamiltonian, site_letter_map
from .pauliprop import word_generator

# row-major (i, j) without (0, 0), letters indexed I, X, Y, Z
ROW_MAJOR_WORDS = [
    "IXYZ"[i] + "IXYZ"[j]
    for i in range(4) for j in range(4) if (i, j) != (0, 0)
]

_IDX = {w: k for k, w in enumerate(ROW_MAJOR_WORDS)}


class OmegaDomainError(ValueError):
    """gamma >= 2 chi: the underdamped closed forms do not apply."""


def omega(chi: float, gamma: float) -> float:
    """Oscillation frequency sqrt(4 chi^2 - gamma^2) of the two-qubit chain."""
    if chi <= 0:
        raise ValueError("chi must be > 0")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    disc = 4.0 * chi * chi - gamma * gamma
    if disc <= 0:
        raise OmegaDomainError(f"gamma={gamma} >= 2*chi={2 * chi}")
    return math.sqrt(disc)


def build_matrix_a(chi: float, gamma: float) -> np.ndarray:
    """The published 15x15 coefficient generator, transcribed verbatim."""
    if chi <= 0:
        raise ValueError("chi must be > 0")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    c, g = chi, gamma
    a = np.zeros((15, 15), dtype=complex)
    entries = [
        (1, 1, -g), (1, 6, -c),
        (2, 2, -g), (2, 5, c), (2, 15, -c),
        (3, 14, c),
        (4, 4, -g), (4, 9, -c),
        (5, 2, -c), (5, 5, -2 * g), (5, 8, -c),
        (6, 1, c), (6, 6, -2 * g), (6, 11, 1j * c),
        (7, 7, -g), (7, 10, -1j * c),
        (8, 5, c), (8, 8, -g), (8, 15, -c),
        (9, 4, c), (9, 9, -2 * g), (9, 14, 1j * c),
        (10, 7, -1j * c), (10, 10, -2 * g), (10, 13, -1j * c),
        (11, 6, 1j * c), (11, 11, -g), (11, 12, -c),
        (12, 11, c),
        (13, 10, -1j * c), (13, 13, -g),
        (14, 3, -c), (14, 9, 1j * c), (14, 14, -g),
        (15, 2, c), (15, 8, c),
    ]
    for row, col, val in entries:
        a[row - 1, col - 1] = val
    return a


def derive_matrix_a(chi: float, gamma: float) -> np.ndarray:
    """Rederive the coefficient generator from the N=2 master equation.

    The commutator and dephasing parts are expanded over the two-qubit
    Pauli-word basis in the same row-major ordering; independent of
    ``build_matrix_a``'s transcription.
    """
    h = build_hamiltonian("cluster", 2, chi)
    letter_map = site_letter_map(ChannelKind.DEPHASING, gamma)
    g = word_generator(ROW_MAJOR_WORDS, list(h.terms), letter_map)
    return g.astype(complex)


def initial_coefficients() -> np.ndarray:
    """Two-qubit cluster probe: c11 = -1/4, c22 = c33 = 1/4, rest zero."""
    c0 = np.zeros(15, dtype=complex)
    c0[_IDX["XX"]] = -0.25
    c0[_IDX["YY"]] = 0.25
    c0[_IDX["ZZ"]] = 0.25
    return c0


def evolve_expm(chi: float, gamma: float, t: float):
    """(coefficients, <M_c>) at time t by Pade scaling-and-squaring expm."""
    if t < 0:
        raise ValueError("t must be >= 0")
    a = build_matrix_a(chi, gamma)
    c = expm(a * t) @ initial_coefficients()
    exp_m = 4.0 * c[_IDX["ZZ"]].real
    return c, exp_m


def closed_form_expectation_n2(chi: float, gamma: float, t: float) -> float:
    """<M_c>(t) = e^(-g t) (cos(Om t) + (g/Om) sin(Om t)) for N = 2."""
    om = omega(chi, gamma)
    return math.exp(-gamma * t) * (
        math.cos(om * t) + (gamma / om) * math.sin(om * t)
    )


def closed_form_deviation(n: int, chi: float, gamma: float, t: float) -> float:
    """Exact delta-chi*sqrt(T) of the chain scheme for n in {1, 2}.

    Non-finite (NaN) where the signal derivative in the denominator vanishes.
    """
    if n not in (1, 2):
        raise ValueError(f"closed form exists only for n in {{1, 2}}, got {n}")
    if t <= 0:
        raise ValueError("t must be > 0")
    return extrapolated_deviation(n, chi, gamma, t)


def extrapolated_deviation(n: int, chi: float, gamma: float, t: float) -> float:
    """n-qubit extrapolation: decay rate n*gamma/2, frequency n*Omega/2.

    Reduces exactly to the printed n=1 and n=2 chain solutions; for n > 2
    it tracks the numerical curve closely but not exactly.
    """
    om = omega(chi, gamma)
    rate = 0.5 * n * gamma
    freq = 0.5 * n * om
    alpha = gamma / om
    c, s = math.cos(freq * t), math.sin(freq * t)
    num = math.exp(rate * t) * math.sqrt(
        max(1.0 - math.exp(-2.0 * rate * t) * (c + alpha * s) ** 2, 0.0)
    )
    den = math.sqrt(t) * (2.0 * n * chi / om) * abs(
        alpha * c - (1.0 + rate / (freq * freq * t)) * s
    )
    if den < 1e-300:
        return math.nan
    return num / den


def envelope(family: str, n: int, chi: float, gamma: float, t: float,
             exact: bool = False) -> float:
    """Deviation envelope, delta-chi*sqrt(T) units.

    family: 'ref-max' e^(n g t)/(n sqrt t); 'ref-unc' e^(g t)/sqrt(n t);
    'cluster' e^(n g t/2)/(n sqrt t), or the exact two-qubit envelope
    e^(g t) Om^2 sqrt(t)/(2 (g + 4 chi^2 t)) when n=2 and exact is set.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if family == "cluster-approx":
        family = "cluster"
    if family == "ref-max":
        return math.exp(n * gamma * t) / (n * math.sqrt(t))
    if family == "ref-unc":
        return math.exp(gamma * t) / math.sqrt(n * t)
    if family == "cluster":
        if exact:
            if n != 2:
                raise ValueError("exact cluster envelope exists only for n=2")
            om2 = omega(chi, gamma) ** 2
            return (math.exp(gamma * t) * om2 * math.sqrt(t)
                    / (2.0 * (gamma + 4.0 * chi * chi * t)))
        return math.exp(0.5 * n * gamma * t) / (n * math.sqrt(t))
    raise ValueError(f"unknown envelope family {family!r}")


def envelope_touch_times(chi: float, gamma: float, t_max: float) -> np.ndarray:
    """Times where the exact n=2 deviation touches its envelope.

    Solutions of Omega t = arccot(-alpha) mod pi with alpha = gamma/Omega.
    """
    om = omega(chi, gamma)
    alpha = gamma / om
    base = 0.5 * math.pi + math.atan(alpha)
    out = []
    m = 0
    while True:
        t = (base + m * math.pi) / om
        if t > t_max:
            break
        out.append(t)
        m += 1
    return np.array(out)


def minima_and_times(family: str, n: int, chi: float, gamma: float,
                     channel: str | ChannelKind = ChannelKind.DEPHASING):
    """Closed-form (t_min, deviation_min) of the requested envelope.

    The chain ('cluster') scheme always carries the halved dephasing rate;
    the reference envelopes use the full rate under dephasing/depolarizing
    and the halved rate under damping.  For the two-qubit chain the exact
    envelope minimizer is used instead of the generic 1/(2 rate).
    """
    if gamma <= 0:
        raise ValueError("gamma = 0 has no finite minimizer (unbounded)")
    if family == "cluster-approx":
        family = "cluster"
    kind = ChannelKind(channel)
    half = kind is ChannelKind.DAMPING
    if family == "cluster":
        if kind is not ChannelKind.DEPHASING:
            raise ValueError("closed-form cluster minima exist only for dephasing")
        if n == 2:
            r = gamma / chi
            t_min = (1.0 + math.sqrt(1.0 - 3.0 * r * r + 0.25 * r ** 4)) \
                / (4.0 * gamma) - gamma / (8.0 * chi * chi)
            return t_min, envelope("cluster", 2, chi, gamma, t_min, exact=True)
        t_min = 1.0 / (n * gamma)
        return t_min, math.sqrt(gamma * math.e / n)
    if family == "ref-max":
        rate = 0.5 * n * gamma if half else n * gamma
    elif family == "ref-unc":
        rate = 0.5 * gamma if half else gamma
    else:
        raise ValueError(f"unknown envelope family {family!r}")
    t_min = 1.0 / (2.0 * rate)
    return t_min, envelope("ref-max" if family == "ref-max" else "ref-unc",
                           n, chi, gamma / 2.0 if half else gamma, t_min)


def epsilon_series(gamma_over_chi: float) -> float:
    """Two-term improvement expansion 1 - 1/sqrt2 + (3/(4 sqrt2)) (g/chi)^2."""
    if not 0 <= abs(gamma_over_chi) < 1:
        raise ValueError("series valid for |gamma/chi| < 1")
    x = gamma_over_chi
    return 1.0 - 1.0 / math.sqrt(2.0) + 3.0 / (4.0 * math.sqrt(2.0)) * x * x


def hump_positions(chi: float, k_max: int) -> list[float]:
    """gamma_k = 2 chi / sqrt((k pi)^2 + 1) for odd k <= k_max, descending."""
    if chi <= 0:
        raise ValueError("chi must be > 0")
    return [2.0 * chi / math.sqrt((k * math.pi) ** 2 + 1.0)
            for k in range(1, k_max + 1, 2)]


def scaling_expansion(family: str, n: int, gamma: float, t: float):
    """(heisenberg_term, offset_term, validity) of the small-(gamma t) expansion.

    validity is the expansion parameter (n g t/2 for the chain scheme,
    n g t for ref-max, g t for ref-unc); values >= 1 raise.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if family == "cluster-approx":
        family = "cluster"
    if family == "cluster":
        first = 1.0 / (n * math.sqrt(t))
        offset = 0.5 * gamma * math.sqrt(t)
        validity = 0.5 * n * gamma * t
    elif family == "ref-max":
        first = 1.0 / (n * math.sqrt(t))
        offset = gamma * math.sqrt(t)
        validity = n * gamma * t
    elif family == "ref-unc":
        first = 1.0 / math.sqrt(n * t)
        offset = gamma * math.sqrt(t) / math.sqrt(n)
        validity = gamma * t
    else:
        raise ValueError(f"unknown scheme family {family!r}")
    if validity >= 1.0:
        raise ValueError(f"expansion parameter {validity:g} >= 1")
    return first, offset, validity

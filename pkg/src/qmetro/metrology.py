"""Headline quantities: window minima, improvement sweeps, estimator
Monte Carlo and fixed-(gamma t) scaling tables.

Minima are taken over the actual numeric curve (not the envelope), then
refined by golden-section search on the curve's continuous evaluator.
Sweeps run cell by cell; every cell is pure, so results are independent of
evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import scaling_expansion
from .dynamics import PrecisionCurve
from .model import (
    ChannelKind,
    ExperimentConfig,
    NoiseChannel,
    Scheme,
    default_final_time,
)
from .pauliprop import coefficient_curve

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NoFiniteSampleError(ValueError):
    pass


def _golden_min(f, lo: float, hi: float, tol: float = 1e-6):
    """Golden-section minimum of f on [lo, hi]; NaN evaluations count as +inf."""

    def g(t):
        v = f(t)
        return v if math.isfinite(v) else math.inf

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = g(c), g(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = g(d)
    t = c if fc <= fd else d
    return t, g(t)


def min_deviation(curve: PrecisionCurve, t_f: float):
    """(t_star, value) of delta-chi*sqrt(T) over finite samples in (0, t_f].

    The grid minimum is refined by golden-section search (1e-6 in t) over
    one grid spacing on each side; ties break toward smaller t.
    """
    mask = curve.finite & (curve.times > 0) & (curve.times <= t_f)
    if not mask.any():
        raise NoFiniteSampleError("no finite samples inside the window")
    vals = np.where(mask, curve.deltachi_sqrtT, np.inf)
    best = int(np.argmin(vals))       # argmin takes the first (smallest t) tie
    t_best, v_best = float(curve.times[best]), float(vals[best])
    if curve._evaluator is None:
        return t_best, v_best
    dt = float(curve.times[1] - curve.times[0]) if curve.times.size > 1 else 0.0
    lo = max(curve.times[best] - dt, curve.times[1] * 0.5 if curve.times.size > 1 else 0.0)
    hi = min(curve.times[best] + dt, t_f)
    t_ref, v_ref = _golden_min(curve.eval_deviation, lo, hi)
    if v_ref < v_best:
        return float(t_ref), float(v_ref)
    return t_best, v_best


def _curve_for(n: int, chi: float, channel: NoiseChannel, scheme,
               t_f: float, samples_per_period: int = 16) -> PrecisionCurve:
    cfg = ExperimentConfig(n=n, chi=chi, channel=channel, scheme=scheme,
                           t_max=t_f, samples_per_period=samples_per_period)
    return coefficient_curve(cfg)


def improvement(gamma: float, n: int, channel_kind, reference_scheme,
                t_f: float | None = None, chi: float = 1.0,
                samples_per_period: int = 16) -> float:
    """epsilon = 1 - min_t dev_cluster / min_t dev_reference over (0, t_f]."""
    if t_f is None:
        t_f = default_final_time(n)
    channel = NoiseChannel(ChannelKind(channel_kind), gamma)
    _, v_c = min_deviation(
        _curve_for(n, chi, channel, Scheme.CLUSTER, t_f, samples_per_period), t_f)
    _, v_r = min_deviation(
        _curve_for(n, chi, channel, Scheme(reference_scheme), t_f,
                   samples_per_period), t_f)
    return 1.0 - v_c / v_r


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    n: int
    scheme: str
    channel: str
    t_min_found: float
    deltachi_min_sqrtT: float
    epsilon: float


def gamma_sweep(gammas, n_list, channel_kind, reference_scheme,
                chi: float = 1.0, t_f=None,
                samples_per_period: int = 16) -> list[SweepRow]:
    """One SweepRow per (gamma, n): cluster minimum plus epsilon vs reference.

    ``t_f`` may be a number or a callable of n; default is the standard
    final-time schedule.  Rows are ordered by (gamma, n) regardless of
    evaluation order.
    """
    kind = ChannelKind(channel_kind)
    ref = Scheme(reference_scheme)
    rows = []
    for gamma in gammas:
        if gamma <= 0:
            raise ValueError("sweep gammas must be positive")
        for n in n_list:
            window = t_f(n) if callable(t_f) else (t_f or default_final_time(n))
            channel = NoiseChannel(kind, gamma)
            t_c, v_c = min_deviation(
                _curve_for(n, chi, channel, Scheme.CLUSTER, window,
                           samples_per_period), window)
            _, v_r = min_deviation(
                _curve_for(n, chi, channel, ref, window,
                           samples_per_period), window)
            rows.append(SweepRow(
                gamma=gamma, n=n, scheme=Scheme.CLUSTER.value,
                channel=kind.value, t_min_found=t_c,
                deltachi_min_sqrtT=v_c, epsilon=1.0 - v_c / v_r,
            ))
    return rows


def simulate_estimator(config: ExperimentConfig, nu: int, seed: int,
                       t: float | None = None, repeats: int = 1):
    """Monte Carlo inversion of the product-measurement estimator.

    Each repeat draws nu i.i.d. +-1 outcomes with P(+1) = (1 + <M>)/2 at
    evolution time t (default: the config window) and inverts the sample
    mean through the clamped arccos.  Returns (chi_est samples, bias,
    spread); spread is NaN for a single repeat.
    """
    scheme = Scheme(config.scheme)
    if not scheme.has_product_measurement:
        raise ValueError(f"scheme {scheme.value} has no two-outcome product measurement")
    if nu < 1 or repeats < 1:
        raise ValueError("nu and repeats must be >= 1")
    if t is None:
        t = config.t_max
    cfg = ExperimentConfig(n=config.n, chi=config.chi, channel=config.channel,
                           scheme=scheme, t_max=t,
                           samples_per_period=config.samples_per_period)
    curve = coefficient_curve(cfg)
    exp_m = float(curve.expM[-1])
    p = min(max(0.5 * (1.0 + exp_m), 0.0), 1.0)

    rng = np.random.default_rng(np.uint64(seed))
    ups = rng.binomial(nu, p, size=repeats)
    means = 2.0 * ups / nu - 1.0
    chi_est = np.arccos(np.clip(means, -1.0, 1.0)) / (config.n * t)
    bias = float(chi_est.mean() - config.chi)
    spread = float(chi_est.std(ddof=1)) if repeats > 1 else math.nan
    return chi_est, bias, spread


@dataclass(frozen=True)
class ScalingRow:
    n: int
    family: str
    numeric_deviation: float
    predicted_deviation: float
    heisenberg_term: float
    offset_term: float
    validity: float
    heisenberg_dominated: bool


def heisenberg_dominated_limit(family: str, gamma_t: float) -> int:
    """Largest N whose expansion offset stays below 25% of the total.

    offset/first = N*gamma*t/2 (chain scheme), N*gamma*t (ref-max) and
    gamma*t independent of N (ref-unc, unbounded when below 1/3).
    """
    if gamma_t <= 0:
        raise ValueError("gamma_t must be > 0")
    if family == "cluster":
        return int(math.floor(2.0 / (3.0 * gamma_t)))
    if family == "ref-max":
        return int(math.floor(1.0 / (3.0 * gamma_t)))
    if family == "ref-unc":
        return -1 if gamma_t >= 1.0 / 3.0 else 10 ** 9
    raise ValueError(f"unknown scheme family {family!r}")


_FAMILY_SCHEME = {
    "cluster": Scheme.CLUSTER,
    "ref-max": Scheme.REF1_MAX,
    "ref-unc": Scheme.REF1_UNC,
}


def scaling_table(n_list, gamma_t: float, t: float, chi: float = 1.0,
                  channel_kind=ChannelKind.DEPHASING) -> list[ScalingRow]:
    """Numeric deviation at fixed gamma*t vs the two-term expansions.

    For each n and scheme family the curve is evaluated at evolution time t
    with gamma = gamma_t / t and compared to the expansion's two leading
    terms; ``heisenberg_dominated`` flags offsets below 25% of the total.
    """
    if gamma_t >= 1.0:
        raise ValueError("gamma_t must be < 1 for the expansions to apply")
    gamma = gamma_t / t
    rows = []
    for n in n_list:
        for family, scheme in _FAMILY_SCHEME.items():
            first, offset, validity = scaling_expansion(family, n, gamma, t)
            channel = NoiseChannel(ChannelKind(channel_kind), gamma)
            curve = _curve_for(n, chi, channel, scheme, t)
            _, numeric = min_deviation(curve, t)
            rows.append(ScalingRow(
                n=n, family=family, numeric_deviation=numeric,
                predicted_deviation=first + offset,
                heisenberg_term=first, offset_term=offset, validity=validity,
                heisenberg_dominated=offset < 0.25 * (first + offset),
            ))
    return rows

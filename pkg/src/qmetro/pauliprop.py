"""Exact propagation of Pauli-word coefficients.

The Liouvillian of every scheme/channel combination is time independent and,
written in the Hermitian Pauli-word basis rho = sum_W a_W W (a_W real), it is
a sparse real matrix G with

* Hamiltonian part: a word W couples to the word of W*K with rate -+2*coeff
  for every Hamiltonian term K it anticommutes with,
* channel part: site-local letter maps (diagonal decay rates; the damping
  channel additionally pumps identity letters toward Z).

Only the words backward-reachable from the measurement operator's words are
needed to evaluate <M>, <M^2> and the chi-sensitivity, so the state space is
restricted to that closure (e.g. 2**n + 1 words for the cluster scheme under
dephasing instead of 4**n).  The augmented (a, da/dchi) system is then solved
exactly by matrix exponentials on the uniform output grid.

Results are bit-for-bit deterministic and agree with ``dynamics.integrate``
to integrator accuracy; the equivalence is asserted in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .dynamics import DERIVATIVE_FLOOR, PrecisionCurve, sample_grid
from .model import (
    ChannelKind,
    ExperimentConfig,
    build_hamiltonian,
    build_measurement,
    build_probe_state,
    site_letter_map,
)
from .pauli import ObservableOperator, PauliString, apply_string, pauli_multiply

DENSE_LIMIT = 1400          # max augmented dimension for the dense-expm path
TAYLOR_MAX_STEP = 1.0       # substep threshold on ||G||_inf * dt


def _h_neighbors(word: str, h_words: list[PauliString]):
    """(target_word, rate/chi) pairs of the commutator coupling out of `word`."""
    w = PauliString(word)
    out = []
    for coeff, k in h_words:
        if w.commutes_with(k):
            continue
        prod = pauli_multiply(w, k)
        # i[W, K] = 2i * W*K; the product phase is +-i, so the rate is real
        rate = (2j * coeff * prod.phase).real
        out.append((prod.word, rate))
    return out


def _channel_neighbors(word: str, letter_map: dict):
    """Off-diagonal (target_word, rate) pairs of the dissipator on `word`."""
    out = []
    for j, letter in enumerate(word):
        for rate, target in letter_map[letter]:
            if target != letter:
                out.append((word[:j] + target + word[j + 1:], rate))
    return out


def _diag_rate(word: str, letter_map: dict) -> float:
    total = 0.0
    for letter in word:
        for rate, target in letter_map[letter]:
            if target == letter:
                total += rate
    return total


def backward_closure(seeds, h_terms, letter_map) -> list[str]:
    """All words whose coefficients can influence the seed words' dynamics.

    Predecessor edges coincide with successor edges for the commutator part
    (multiplication by a Hamiltonian word is an involution on words) and are
    reversed letter maps for the channel part.
    """
    reverse_letter = {letter: [] for letter in "IXYZ"}
    for letter, targets in letter_map.items():
        for rate, target in targets:
            if target != letter:
                reverse_letter[target].append(letter)
    frontier = list(dict.fromkeys(seeds))
    seen = set(frontier)
    while frontier:
        word = frontier.pop()
        for nxt, _rate in _h_neighbors(word, h_terms):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
        for j, letter in enumerate(word):
            for src in reverse_letter[letter]:
                nxt = word[:j] + src + word[j + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return sorted(seen)


def word_generator(words: list[str], h_terms, letter_map) -> np.ndarray:
    """Real generator matrix G with da/dt = G a on the given word basis.

    ``h_terms`` are (coefficient, PauliString) pairs of the full Hamiltonian
    (chi included); all target words must lie inside ``words``.
    """
    index = {w: i for i, w in enumerate(words)}
    d = len(words)
    g = np.zeros((d, d))
    for w, col in index.items():
        for target, rate in _h_neighbors(w, h_terms):
            g[index[target], col] += rate
        g[col, col] += _diag_rate(w, letter_map)
        for target, rate in _channel_neighbors(w, letter_map):
            if target in index:
                g[index[target], col] += rate
    return g


def _taylor_apply(mat, v, t):
    """e^(mat*t) @ v by scaled Taylor series (mat real sparse or dense)."""
    norm = np.abs(mat).sum(axis=1).max() if isinstance(mat, np.ndarray) \
        else abs(mat).sum(axis=1).max()
    steps = max(1, int(math.ceil(abs(t) * float(norm) / TAYLOR_MAX_STEP)))
    h = t / steps
    for _ in range(steps):
        term = v
        acc = v.copy()
        for k in range(1, 60):
            term = (mat @ term) * (h / k)
            acc += term
            if np.max(np.abs(term)) < 1e-16 * max(np.max(np.abs(acc)), 1e-300):
                break
        v = acc
    return v


@dataclass
class _Engine:
    words: list[str]
    aug: object                 # (2d, 2d) generator, dense ndarray or csr
    a0: np.ndarray              # (2d,) initial coefficients, sensitivity zero
    m_vec: np.ndarray           # <M> = m_vec . a
    msq_vec: np.ndarray         # <M^2> = msq_vec . a
    msq_const: float            # identity-word contribution to <M^2>
    config: ExperimentConfig


def _operator_vector(op: ObservableOperator, index: dict, scale: float):
    """Split an operator into (vector over basis words, identity constant)."""
    vec = np.zeros(len(index))
    const = 0.0
    for coeff, string in op.terms:
        if set(string.word) == {"I"}:
            const += coeff
            continue
        if string.word not in index:
            # coefficient of this word is identically zero on the closure
            continue
        vec[index[string.word]] += coeff * scale
    return vec, const


def build_engine(config: ExperimentConfig) -> _Engine:
    n = config.n
    h = build_hamiltonian(config.scheme, n, config.chi)
    h0 = build_hamiltonian(config.scheme, n, 1.0)
    m = build_measurement(config.scheme, n)
    msq = m @ m
    letter_map = site_letter_map(config.channel.kind, config.channel.gamma)
    no_channel = site_letter_map(config.channel.kind, 0.0)

    seeds = [s.word for _c, s in list(m.terms) + list(msq.terms)]
    words = backward_closure(seeds, list(h.terms), letter_map)
    index = {w: i for i, w in enumerate(words)}
    d = len(words)

    g = word_generator(words, list(h.terms), letter_map)
    b = word_generator(words, list(h0.terms), no_channel)
    aug = np.zeros((2 * d, 2 * d))
    aug[:d, :d] = g
    aug[d:, d:] = g
    aug[d:, :d] = b
    if 2 * d > DENSE_LIMIT:
        aug = sp.csr_matrix(aug)

    psi = build_probe_state(config.scheme, n)
    scale = 1.0 / (1 << n)
    a0 = np.zeros(2 * d)
    for i, w in enumerate(words):
        a0[i] = np.vdot(psi, apply_string(PauliString(w), psi)).real * scale

    m_vec, m_const = _operator_vector(m, index, float(1 << n))
    if m_const != 0.0:
        raise ValueError("measurement operator has an identity component")
    msq_vec, msq_const = _operator_vector(msq, index, float(1 << n))
    return _Engine(words=words, aug=aug, a0=a0, m_vec=m_vec,
                   msq_vec=msq_vec, msq_const=msq_const, config=config)


def _curve_values(engine: _Engine, t: float, v: np.ndarray):
    d = len(engine.words)
    exp_m = float(engine.m_vec @ v[:d])
    second = engine.msq_const + float(engine.msq_vec @ v[:d])
    var = max(second - exp_m * exp_m, 0.0)
    dm = float(engine.m_vec @ v[d:])
    if t <= 0.0 or abs(dm) < DERIVATIVE_FLOOR:
        dev = math.nan
    else:
        dev = math.sqrt(var) * math.sqrt(t) / abs(dm)
    return exp_m, math.sqrt(var), dm, dev


def coefficient_curve(config: ExperimentConfig) -> PrecisionCurve:
    """PrecisionCurve from exact matrix-exponential propagation."""
    engine = build_engine(config)
    grid = sample_grid(config.n, config.chi, config.t_max,
                       config.samples_per_period)
    dt = grid[1] - grid[0]
    aug = engine.aug
    dense = isinstance(aug, np.ndarray)
    if dense:
        step = expm(aug * dt)

    n_t = grid.size
    vs = np.empty((n_t, engine.a0.size))
    vs[0] = engine.a0
    for k in range(1, n_t):
        if dense:
            vs[k] = step @ vs[k - 1]
        else:
            vs[k] = _taylor_apply(aug, vs[k - 1], dt)

    exp_m = np.empty(n_t)
    delta_m = np.empty(n_t)
    dm_dchi = np.empty(n_t)
    dev = np.empty(n_t)
    for k in range(n_t):
        exp_m[k], delta_m[k], dm_dchi[k], dev[k] = _curve_values(
            engine, grid[k], vs[k])

    def evaluator(t: float) -> float:
        k = min(int(np.searchsorted(grid, t, side="right")) - 1, n_t - 1)
        k = max(k, 0)
        v = _taylor_apply(aug, vs[k].copy(), t - grid[k])
        return _curve_values(engine, t, v)[3]

    return PrecisionCurve(
        times=grid, expM=exp_m, deltaM=delta_m, dexpM_dchi=dm_dchi,
        deltachi_sqrtT=dev, finite=np.isfinite(dev), _evaluator=evaluator,
    )

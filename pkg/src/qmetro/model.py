"""Probe states, Hamiltonians, measurements, stabilizers and noise channels.

Five schemes are compared throughout:

* ``cluster``   -- chain-stabilizer Hamiltonian, cluster-superposition probe,
                   product-of-Z measurement
* ``ref1-max``  -- single-body Z Hamiltonian, GHZ probe, product-of-X
* ``ref1-unc``  -- single-body Z Hamiltonian, product |+> probe, sum-of-X
* ``ref2-max``  -- chain-stabilizer Hamiltonian, GHZ probe, product-of-X
* ``ref2-unc``  -- chain-stabilizer Hamiltonian, product |+> probe, sum-of-X

Only 1D chain topology is supported.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import (
    MAX_QUBITS,
    ObservableOperator,
    PauliError,
    PauliString,
    left_mul,
    right_mul,
    sandwich,
)


class Scheme(str, enum.Enum):
    CLUSTER = "cluster"
    REF1_MAX = "ref1-max"
    REF1_UNC = "ref1-unc"
    REF2_MAX = "ref2-max"
    REF2_UNC = "ref2-unc"

    @property
    def uses_chain_hamiltonian(self) -> bool:
        return self in (Scheme.CLUSTER, Scheme.REF2_MAX, Scheme.REF2_UNC)

    @property
    def has_product_measurement(self) -> bool:
        """True when the measurement is a single +-1-valued Pauli word."""
        return self in (Scheme.CLUSTER, Scheme.REF1_MAX, Scheme.REF2_MAX)


class ChannelKind(str, enum.Enum):
    DEPHASING = "dephasing"
    DEPOLARIZING = "depolarizing"
    DAMPING = "damping"


@dataclass(frozen=True)
class NoiseChannel:
    kind: ChannelKind
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


def default_final_time(n: int) -> float:
    """Default evolution window ceil(1/(0.005 n))."""
    return float(math.ceil(1.0 / (0.005 * n)))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    chi: float
    channel: NoiseChannel
    scheme: Scheme
    t_max: float = 0.0
    samples_per_period: int = 16
    total_time_T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n={self.n} outside 1..{MAX_QUBITS}")
        if self.chi <= 0:
            raise ValueError("chi must be > 0")
        if self.t_max == 0.0:
            object.__setattr__(self, "t_max", default_final_time(self.n))
        if self.t_max <= 0:
            raise ValueError("t_max must be > 0")
        if self.samples_per_period < 16:
            raise ValueError("samples_per_period must be >= 16")
        if self.total_time_T <= 0:
            raise ValueError("total_time_T must be > 0")


def stabilizer(i: int, n: int) -> PauliString:
    """Chain correlator Z_(i-1) X_i Z_(i+1); boundary neighbors are dropped."""
    if not 1 <= i <= n:
        raise ValueError(f"vertex {i} outside 1..{n}")
    letters = ["I"] * n
    letters[i - 1] = "X"
    if i > 1:
        letters[i - 2] = "Z"
    if i < n:
        letters[i] = "Z"
    return PauliString("".join(letters))


def build_cluster_state(n: int) -> np.ndarray:
    """|+...+> with a CZ on every adjacent pair; +1 eigenstate of all stabilizers."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n={n} outside 1..{MAX_QUBITS}")
    dim = 1 << n
    v = np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    idx = np.arange(dim)
    for j in range(n - 1):
        b1 = n - 1 - j
        b2 = n - 2 - j
        both = ((idx >> b1) & 1) & ((idx >> b2) & 1)
        v = np.where(both == 1, -v, v)
    return v


def build_probe_state(scheme: Scheme, n: int) -> np.ndarray:
    scheme = Scheme(scheme)
    dim = 1 << n
    if scheme is Scheme.CLUSTER:
        plus = build_cluster_state(n)
        minus = plus.copy()
        idx = np.arange(dim)
        parity = np.zeros(dim, dtype=np.int64)
        for bit in range(n):
            parity ^= (idx >> bit) & 1
        minus = np.where(parity == 1, -minus, minus)
        return (plus + minus) / math.sqrt(2.0)
    if scheme in (Scheme.REF1_MAX, Scheme.REF2_MAX):
        v = np.zeros(dim, dtype=complex)
        v[0] = v[dim - 1] = 1.0 / math.sqrt(2.0)
        return v
    if scheme in (Scheme.REF1_UNC, Scheme.REF2_UNC):
        return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    raise ValueError(f"unknown scheme {scheme}")


def build_hamiltonian(scheme: Scheme, n: int, chi: float) -> ObservableOperator:
    """chi/2 times the sum of chain stabilizers, or of single-site Z terms."""
    scheme = Scheme(scheme)
    if scheme.uses_chain_hamiltonian:
        words = [stabilizer(j, n) for j in range(1, n + 1)]
    else:
        words = []
        for j in range(n):
            letters = ["I"] * n
            letters[j] = "Z"
            words.append(PauliString("".join(letters)))
    return ObservableOperator.from_terms([(0.5 * chi, w) for w in words])


def build_measurement(scheme: Scheme, n: int) -> ObservableOperator:
    scheme = Scheme(scheme)
    if scheme is Scheme.CLUSTER:
        return ObservableOperator.from_terms([(1.0, PauliString("Z" * n))])
    if scheme in (Scheme.REF1_MAX, Scheme.REF2_MAX):
        return ObservableOperator.from_terms([(1.0, PauliString("X" * n))])
    terms = []
    for j in range(n):
        letters = ["I"] * n
        letters[j] = "X"
        terms.append((1.0, PauliString("".join(letters))))
    return ObservableOperator.from_terms(terms)


def _site_string(letter: str, j: int, n: int) -> PauliString:
    letters = ["I"] * n
    letters[j] = letter
    return PauliString("".join(letters))


@dataclass(frozen=True)
class Dissipator:
    """Per-qubit Lindblad dissipator of one of the three channels.

    ``weight`` is the printed prefactor (gamma/2 for dephasing and damping,
    gamma/4 for depolarizing).  ``__call__`` evaluates D(rho) on a dense
    density matrix using Pauli index-permutation kernels only.
    """

    channel: NoiseChannel
    n: int
    _x: tuple = field(default_factory=tuple, repr=False)
    _y: tuple = field(default_factory=tuple, repr=False)
    _z: tuple = field(default_factory=tuple, repr=False)

    @property
    def weight(self) -> float:
        if self.channel.kind is ChannelKind.DEPOLARIZING:
            return self.channel.gamma / 4.0
        return self.channel.gamma / 2.0

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if rho.shape[0] != 1 << self.n:
            raise PauliError("dimension mismatch")
        g = self.channel.gamma
        out = np.zeros_like(rho)
        if g == 0.0:
            return out
        kind = self.channel.kind
        for j in range(self.n):
            x, y, z = self._x[j], self._y[j], self._z[j]
            if kind is ChannelKind.DEPHASING:
                out += (g / 2.0) * (sandwich(z, rho, z) - rho)
            elif kind is ChannelKind.DEPOLARIZING:
                out += (g / 4.0) * (
                    sandwich(x, rho, x) + sandwich(y, rho, y)
                    + sandwich(z, rho, z) - 3.0 * rho
                )
            else:
                # 2 s+ rho s- - s- s+ rho - rho s- s+, with s+- = (X +- iY)/2
                jump = 0.5 * (sandwich(x, rho, x) + sandwich(y, rho, y)) \
                    + 0.5j * (sandwich(y, rho, x) - sandwich(x, rho, y))
                out += (g / 2.0) * (
                    jump - rho + 0.5 * (left_mul(z, rho) + right_mul(z, rho))
                )
        return out


def jump_operators(channel: NoiseChannel, n: int) -> Dissipator:
    """Dissipator for the channel acting independently on each of n qubits."""
    xs = tuple(_site_string("X", j, n) for j in range(n))
    ys = tuple(_site_string("Y", j, n) for j in range(n))
    zs = tuple(_site_string("Z", j, n) for j in range(n))
    return Dissipator(channel=channel, n=n, _x=xs, _y=ys, _z=zs)


# Action of each dissipator on a single site letter, as a linear map on the
# {I, X, Y, Z} coefficients: letter -> list of (rate, letter).  Damping pumps
# identity toward Z (decay into |0>); everything else is diagonal.
def site_letter_map(kind: ChannelKind, gamma: float) -> dict:
    g = gamma
    if kind is ChannelKind.DEPHASING:
        return {"I": [], "X": [(-g, "X")], "Y": [(-g, "Y")], "Z": []}
    if kind is ChannelKind.DEPOLARIZING:
        return {"I": [], "X": [(-g, "X")], "Y": [(-g, "Y")], "Z": [(-g, "Z")]}
    if kind is ChannelKind.DAMPING:
        return {
            "I": [(g, "Z")],
            "X": [(-g / 2.0, "X")],
            "Y": [(-g / 2.0, "Y")],
            "Z": [(-g, "Z")],
        }
    raise ValueError(f"unknown channel kind {kind}")

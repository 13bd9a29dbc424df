"""Pauli-string algebra and dense linear-algebra kernels.

States are plain complex numpy arrays of length 2**n, density matrices are
dense (2**n, 2**n) complex arrays.  Qubit j (1-based) corresponds to position
j-1 of the letter string and to bit n-j of the basis index, i.e. the basis
index read in binary is the qubit string from left to right.

Pauli strings are never materialized as 2**n x 2**n matrices; they act as
index permutations with per-index phases (X permutes, Z flips signs, Y does
both with +-i).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

LETTERS = "IXYZ"
PHASES = (1 + 0j, -1 + 0j, 1j, -1j)

MAX_QUBITS = 10

# single-site products: (a, b) -> (phase, c) with sigma_a sigma_b = phase * sigma_c
_SITE_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """A phased word over {I, X, Y, Z}: phase * sigma_{w[0]} x ... x sigma_{w[n-1]}."""

    word: str
    phase: complex = 1 + 0j

    def __post_init__(self):
        if any(c not in LETTERS for c in self.word):
            raise PauliError(f"invalid Pauli word {self.word!r}")
        if self.phase not in PHASES:
            raise PauliError(f"phase must be a fourth root of unity, got {self.phase!r}")
        if not 1 <= len(self.word) <= MAX_QUBITS:
            raise PauliError(f"word length {len(self.word)} outside 1..{MAX_QUBITS}")

    @property
    def n(self) -> int:
        return len(self.word)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def commutes_with(self, other: "PauliString") -> bool:
        if len(self.word) != len(other.word):
            raise PauliError("length mismatch")
        anti = sum(
            1
            for a, b in zip(self.word, other.word)
            if a != "I" and b != "I" and a != b
        )
        return anti % 2 == 0

    def is_hermitian(self) -> bool:
        return self.phase.imag == 0

    def dense(self) -> np.ndarray:
        """Kronecker-product matrix; test oracle only, O(4**n) memory."""
        m = np.array([[self.phase]])
        for c in self.word:
            m = np.kron(m, SIGMA[c])
        return m


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product a*b with accumulated phase."""
    if len(a.word) != len(b.word):
        raise PauliError(f"length mismatch: {len(a.word)} vs {len(b.word)}")
    phase = a.phase * b.phase
    out = []
    for x, y in zip(a.word, b.word):
        p, c = _SITE_PRODUCT[(x, y)]
        phase *= p
        out.append(c)
    return PauliString("".join(out), phase)


@lru_cache(maxsize=4096)
def _kernel(word: str, phase: complex):
    """Signed-permutation action: (P v)[i] = coeff[i ^ xmask] * v[i ^ xmask].

    Returns (perm, coeff) with perm = index ^ xmask and coeff[b] the amplitude
    P contributes when acting on basis state |b>.
    """
    n = len(word)
    dim = 1 << n
    idx = np.arange(dim)
    xmask = 0
    zbits = []
    ny = 0
    for k, c in enumerate(word):
        bit = n - 1 - k
        if c in "XY":
            xmask |= 1 << bit
        if c in "ZY":
            zbits.append(bit)
        if c == "Y":
            ny += 1
    parity = np.zeros(dim, dtype=np.int64)
    for bit in zbits:
        parity ^= (idx >> bit) & 1
    coeff = phase * (1j**ny) * np.where(parity == 1, -1.0, 1.0)
    return idx ^ xmask, coeff.astype(complex)


def string_kernel(p: PauliString):
    return _kernel(p.word, p.phase)


def apply_string(p: PauliString, v: np.ndarray) -> np.ndarray:
    """p @ v in O(2**n) without materializing a matrix."""
    if v.shape[0] != 1 << p.n:
        raise PauliError(f"dimension mismatch: {v.shape[0]} vs 2**{p.n}")
    perm, coeff = string_kernel(p)
    return coeff[perm] * v[perm]


def left_mul(p: PauliString, rho: np.ndarray) -> np.ndarray:
    """p @ rho."""
    perm, coeff = string_kernel(p)
    return coeff[perm][:, None] * rho[perm, :]


def right_mul(p: PauliString, rho: np.ndarray) -> np.ndarray:
    """rho @ p."""
    perm, coeff = string_kernel(p)
    return coeff[None, :] * rho[:, perm]


def sandwich(a: PauliString, rho: np.ndarray, b: PauliString) -> np.ndarray:
    """a @ rho @ b."""
    pa, ca = string_kernel(a)
    pb, cb = string_kernel(b)
    return ca[pa][:, None] * rho[np.ix_(pa, pb)] * cb[None, :]


def string_trace(p: PauliString, rho: np.ndarray) -> complex:
    """tr(p rho) without forming the product."""
    if rho.shape[0] != 1 << p.n:
        raise PauliError("dimension mismatch")
    perm, coeff = string_kernel(p)
    idx = np.arange(rho.shape[0])
    return complex(np.sum(coeff * rho[idx, perm]))


@dataclass(frozen=True)
class ObservableOperator:
    """Real-weighted sum of Pauli strings, canonicalized on construction.

    Duplicate words are merged (phases folded into the coefficients) and
    terms with |coeff| < 1e-15 dropped.  Hermitian by construction when every
    folded coefficient is real, which is asserted.
    """

    terms: tuple = field(default_factory=tuple)

    @staticmethod
    def from_terms(terms) -> "ObservableOperator":
        acc: dict[str, complex] = {}
        n = None
        for coeff, string in terms:
            if n is None:
                n = string.n
            elif string.n != n:
                raise PauliError("mixed word lengths in operator")
            acc[string.word] = acc.get(string.word, 0j) + coeff * string.phase
        out = []
        for word in sorted(acc):
            amp = acc[word]
            if abs(amp) < 1e-15:
                continue
            if abs(amp.imag) > 1e-12 * max(1.0, abs(amp.real)):
                raise PauliError(f"non-Hermitian term {amp} * {word}")
            out.append((amp.real, PauliString(word)))
        return ObservableOperator(tuple(out))

    @property
    def n(self) -> int:
        if not self.terms:
            raise PauliError("empty operator has no size")
        return self.terms[0][1].n

    def __matmul__(self, other: "ObservableOperator") -> "ObservableOperator":
        prods = []
        for ca, sa in self.terms:
            for cb, sb in other.terms:
                prods.append((ca * cb, sa * sb))
        return ObservableOperator.from_terms(prods)

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for coeff, string in self.terms:
            out += coeff * apply_string(string, v)
        return out

    def dense(self) -> np.ndarray:
        dim = 1 << self.n
        m = np.zeros((dim, dim), dtype=complex)
        for coeff, string in self.terms:
            m += coeff * string.dense()
        return m


def expectation(o: ObservableOperator, rho: np.ndarray) -> float:
    """Re tr(O rho); asserts the imaginary residual is < 1e-9."""
    tr = 0j
    for coeff, string in o.terms:
        tr += coeff * string_trace(string, rho)
    if abs(tr.imag) > 1e-9:
        raise PauliError(f"imaginary expectation residual {tr.imag:g}")
    return tr.real


def variance(o: ObservableOperator, rho: np.ndarray) -> float:
    """<O^2> - <O>^2, clamped to 0 from below."""
    mean = expectation(o, rho)
    second = expectation(o @ o, rho)
    var = second - mean * mean
    if var < -1e-9:
        raise PauliError(f"variance {var:g} below tolerance")
    return max(var, 0.0)


def check_state(v: np.ndarray, atol: float = 1e-12) -> None:
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > atol:
        raise PauliError(f"state norm {nrm} deviates from 1")


def check_density(rho: np.ndarray, herm_tol: float = 1e-10,
                  trace_tol: float = 1e-10, eig_tol: float = 1e-8,
                  check_positivity: bool = False) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise PauliError("density matrix not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise PauliError("density matrix trace deviates from 1")
    if check_positivity:
        w = np.linalg.eigvalsh(rho)
        if w.min() < -eig_tol:
            raise PauliError(f"negative eigenvalue {w.min():g}")

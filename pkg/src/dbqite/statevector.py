"""Statevectors and Pauli strings.

Bit ordering: qubit ``q`` is bit ``q`` of the amplitude index, so qubit 0 is
the least-significant bit. For two qubits the index ``1`` is ``|q1 q0> = |01>``.

Every function here accepts either a :class:`StateVector` or a plain 1-D
complex array and never mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from dbqite import kernels

AXES = ("X", "Y", "Z")


class StateVector:
    """Immutable vector of ``2**L`` complex amplitudes."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes, copy=True):
        amps = np.array(amplitudes, dtype=np.complex128, copy=copy)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        n = amps.size
        if n < 2 or n & (n - 1):
            raise ValueError(f"length {n} is not a power of two >= 2")
        amps.setflags(write=False)
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return self._amps.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def normalized(self) -> StateVector:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self._amps / nrm, copy=False)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._amps if not copy else self._amps.copy()
        return self._amps.astype(dtype)

    def __len__(self):
        return self._amps.size

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


def as_array(psi) -> np.ndarray:
    """Amplitude array of a StateVector or array-like, without copying when possible."""
    if isinstance(psi, StateVector):
        return psi.amplitudes
    arr = np.asarray(psi, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("state must be one-dimensional")
    return arr


def num_qubits_of(psi) -> int:
    n = as_array(psi).size
    if n < 2 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two >= 2")
    return n.bit_length() - 1


def _check_same(a: np.ndarray, b: np.ndarray):
    if a.size != b.size:
        raise ValueError("incompatible qubit counts")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli factors, e.g. ``((0, "X"), (1, "X"))``.

    The empty string is the identity.
    """

    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        facs = tuple((int(q), str(a).upper()) for q, a in self.factors)
        prev = -1
        for q, a in facs:
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
            if q <= prev:
                raise ValueError("qubit indices must be non-negative and strictly increasing")
            prev = q
        object.__setattr__(self, "factors", facs)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a dense label such as ``"XIZ"``; character ``q`` acts on qubit ``q``."""
        return cls(tuple((q, c) for q, c in enumerate(label.upper()) if c != "I"))

    @classmethod
    def of(cls, *pairs) -> PauliString:
        """Build from unsorted ``(qubit, axis)`` pairs."""
        return cls(tuple(sorted(pairs)))

    @cached_property
    def xmask(self) -> int:
        return sum(1 << q for q, a in self.factors if a in "XY")

    @cached_property
    def zmask(self) -> int:
        return sum(1 << q for q, a in self.factors if a in "YZ")

    @cached_property
    def phase(self) -> complex:
        """``i**nY`` so that P|b> = phase * (-1)**popcount(b & zmask) |b ^ xmask>."""
        return 1j ** sum(1 for _, a in self.factors if a == "Y")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    @property
    def weight(self) -> int:
        return len(self.factors)

    def max_qubit(self) -> int:
        return self.factors[-1][0] if self.factors else -1

    def label(self, num_qubits: int) -> str:
        chars = ["I"] * num_qubits
        for q, a in self.factors:
            chars[q] = a
        return "".join(chars)

    def to_list(self) -> list:
        return [[q, a] for q, a in self.factors]


def _check_pauli(P: PauliString, L: int):
    if P.max_qubit() >= L:
        raise IndexError(f"Pauli string acts on qubit {P.max_qubit()} but the state has {L} qubits")


def inner_product(a, b) -> complex:
    """Return <a|b> = sum conj(a_i) b_i."""
    x, y = as_array(a), as_array(b)
    _check_same(x, y)
    return complex(np.vdot(x, y))


def fidelity(a, b) -> float:
    """Return |<a|b>|**2 for unit vectors."""
    return abs(inner_product(a, b)) ** 2


def apply_pauli(psi, P: PauliString) -> np.ndarray:
    """Return P psi as an array."""
    arr = as_array(psi)
    _check_pauli(P, num_qubits_of(arr))
    return kernels.apply_pauli_sum(arr, [P.xmask], [P.zmask], [P.phase])


def apply_pauli_exponential(psi, P: PauliString, theta: float) -> StateVector:
    """Return exp(i theta P) psi. Pass ``-theta`` for exp(-i theta P)."""
    arr = as_array(psi)
    _check_pauli(P, num_qubits_of(arr))
    out = kernels.apply_rotations(arr, [P.xmask], [P.zmask], [P.phase], [float(theta)])
    return StateVector(out, copy=False)


def basis_state(num_qubits: int, index: int = 0) -> StateVector:
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if not 0 <= index < 2**num_qubits:
        raise ValueError("basis index out of range")
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, copy=False)


def singlet_state(L: int) -> StateVector:
    """Product of singlets (|10> - |01>)/sqrt(2) on pairs (0,1), (2,3), ...

    Kets are written most-significant qubit first, so the L=2 amplitudes are
    (0, -1/sqrt2, 1/sqrt2, 0).
    """
    if L < 2 or L % 2:
        raise ValueError("singlet_state needs an even number of qubits >= 2")
    pair = np.array([0.0, -1.0, 1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)
    amps = np.ones(1, dtype=np.complex128)
    for _ in range(L // 2):
        # later pairs occupy more significant bits
        amps = np.kron(pair, amps)
    return StateVector(amps, copy=False)


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random unit vector."""
    z = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return StateVector(z / np.linalg.norm(z), copy=False)


def apply_one_qubit_gate(psi, gate, qubit: int) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit."""
    arr = as_array(psi)
    L = num_qubits_of(arr)
    if not 0 <= qubit < L:
        raise IndexError("qubit out of range")
    t = arr.reshape(2 ** (L - qubit - 1), 2, 2**qubit)
    return np.einsum("ab,ibj->iaj", np.asarray(gate, dtype=np.complex128), t).reshape(-1)

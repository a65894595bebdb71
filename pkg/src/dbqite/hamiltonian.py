"""Pauli-sum Hamiltonians: matrix-free action, observables, spectra and real-time evolution."""

from __future__ import annotations

import os
import re
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from dbqite import kernels
from dbqite.statevector import (
    PauliString,
    StateVector,
    as_array,
    num_qubits_of,
)

DEFAULT_DENSE_THRESHOLD = 12


class DenseThresholdError(RuntimeError):
    """A dense operation was requested above the dense qubit threshold."""


class ConvergenceError(RuntimeError):
    """The iterative eigensolver did not converge."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def dense_threshold() -> int:
    """Largest L for dense diagonalization; override with ``DBQITE_DENSE_THRESHOLD``."""
    raw = os.environ.get("DBQITE_DENSE_THRESHOLD")
    if raw is None:
        return DEFAULT_DENSE_THRESHOLD
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"DBQITE_DENSE_THRESHOLD must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings plus a scalar identity offset.

    Duplicate strings are merged and identity strings are folded into
    ``offset`` on construction. Exact zero coefficients are dropped.
    """

    num_qubits: int
    terms: tuple[tuple[float, PauliString], ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        L = int(self.num_qubits)
        if L < 1:
            raise ValueError("num_qubits must be >= 1")
        merged: dict[PauliString, float] = {}
        offset = float(self.offset)
        for coeff, P in self.terms:
            if not isinstance(P, PauliString):
                P = PauliString(tuple(P))
            c = float(coeff)
            if not np.isfinite(c):
                raise ValueError("coefficients must be finite")
            if P.max_qubit() >= L:
                raise IndexError(f"term acts on qubit {P.max_qubit()} outside {L} qubits")
            if P.weight == 0:
                offset += c
            else:
                merged[P] = merged.get(P, 0.0) + c
        terms = tuple((c, P) for P, c in merged.items() if c != 0.0)
        object.__setattr__(self, "num_qubits", L)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @cached_property
    def _masks(self):
        xm = np.array([P.xmask for _, P in self.terms], dtype=np.int64)
        zm = np.array([P.zmask for _, P in self.terms], dtype=np.int64)
        ph = np.array([P.phase for _, P in self.terms], dtype=np.complex128)
        co = np.array([c for c, _ in self.terms], dtype=np.float64)
        return xm, zm, ph, co

    @cached_property
    def is_real(self) -> bool:
        """True when the matrix in the computational basis is real."""
        return all(P.phase.imag == 0 for _, P in self.terms)

    def coefficient_norm(self) -> float:
        """Sum of |coefficients| plus |offset|, an upper bound on the spectral norm."""
        return float(sum(abs(c) for c, _ in self.terms) + abs(self.offset))

    def shifted(self, c: float) -> PauliSum:
        return PauliSum(self.num_qubits, self.terms, self.offset + float(c))

    def scaled(self, a: float) -> PauliSum:
        a = float(a)
        out = PauliSum(self.num_qubits, tuple((a * c, P) for c, P in self.terms), a * self.offset)
        if a > 0:
            _EIGEN_CACHE.derive(self, out, a)
        return out

    def without_offset(self) -> PauliSum:
        return PauliSum(self.num_qubits, self.terms, 0.0)

    def to_dense(self) -> np.ndarray:
        """Dense matrix, for oracles and small systems."""
        n = self.dim
        dtype = np.float64 if self.is_real else np.complex128
        M = np.zeros((n, n), dtype=dtype)
        idx = np.arange(n, dtype=np.int64)
        for (c, P), x, z in zip(self.terms, *self._masks[:2]):
            sign = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
            val = c * P.phase * sign
            M[idx ^ x, idx] += val.real if dtype == np.float64 else val
        M[idx, idx] += self.offset
        return M

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "offset": self.offset,
            "terms": [{"coeff": c, "paulis": P.to_list()} for c, P in self.terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> PauliSum:
        try:
            L = int(data["num_qubits"])
            raw_terms = data["terms"]
        except (KeyError, TypeError) as exc:
            raise ValueError("Hamiltonian JSON needs 'num_qubits' and 'terms'") from exc
        terms = []
        for t in raw_terms:
            if isinstance(t, dict):
                coeff, paulis = t["coeff"], t["paulis"]
            else:
                coeff, paulis = t
            terms.append((float(coeff), PauliString.of(*[(int(q), str(a)) for q, a in paulis])))
        return cls(L, tuple(terms), float(data.get("offset", 0.0)))


def heisenberg_chain(L: int) -> PauliSum:
    """Open XXX chain with unit couplings on bonds (i, i+1)."""
    if L < 2:
        raise ValueError("heisenberg_chain needs L >= 2")
    terms = []
    for i in range(L - 1):
        for a in "XYZ":
            terms.append((1.0, PauliString(((i, a), (i + 1, a)))))
    return PauliSum(L, tuple(terms))


def bond_restriction(H: PauliSum, parity: int) -> PauliSum:
    """Terms supported on nearest-neighbour bonds (i, i+1) with ``i % 2 == parity``.

    For the chain, parity 0 collects the bonds inside the singlet pairs and
    parity 1 the bonds between them.
    """
    terms = tuple(
        (c, P)
        for c, P in H.terms
        if len(P.support) == 2 and P.support[1] == P.support[0] + 1 and P.support[0] % 2 == parity
    )
    return PauliSum(H.num_qubits, terms)


def random_pauli_sum(L: int, rng: np.random.Generator, num_terms: int | None = None) -> PauliSum:
    """Random Hermitian Pauli sum with coefficients uniform in [-1, 1].

    Strings are drawn uniformly from the non-identity strings; duplicates merge.
    """
    if num_terms is None:
        num_terms = 3 * L
    terms = []
    while len(terms) < num_terms:
        axes = rng.integers(0, 4, size=L)
        if not axes.any():
            continue
        P = PauliString(tuple((q, "XYZ"[a - 1]) for q, a in enumerate(axes) if a))
        terms.append((float(rng.uniform(-1.0, 1.0)), P))
    return PauliSum(L, tuple(terms))


def random_gapped_hamiltonian(L: int, rng: np.random.Generator, min_rel_gap: float = 1e-3,
                              max_tries: int = 100) -> PauliSum:
    """Random Pauli sum shifted so that lambda0 = 0, with ||H|| >= 1 and a unique ground state.

    Instances whose gap is below ``min_rel_gap * ||H||`` are redrawn.
    """
    for _ in range(max_tries):
        H = random_pauli_sum(L, rng)
        w = np.linalg.eigvalsh(H.to_dense())
        width = w[-1] - w[0]
        if width <= 0 or (w[1] - w[0]) <= min_rel_gap * width:
            continue
        H = H.shifted(-w[0])
        if width < 1.0:
            H = H.scaled(1.0 / width)
        return H
    raise RuntimeError("could not draw a gapped Hamiltonian")


def _check_dims(H: PauliSum, arr: np.ndarray):
    if arr.size != H.dim:
        raise ValueError("incompatible qubit counts")


def apply_hamiltonian(H: PauliSum, psi) -> np.ndarray:
    """Return H psi (unnormalized array), including the identity offset."""
    arr = as_array(psi)
    _check_dims(H, arr)
    xm, zm, ph, co = H._masks
    out = kernels.apply_pauli_sum(arr, xm, zm, ph * co)
    if H.offset:
        out += H.offset * arr
    return out


def energy_and_variance(H: PauliSum, psi) -> tuple[float, float]:
    """Energy <H> and variance <H^2> - <H>^2 of a unit vector.

    The variance is evaluated as ||(H - E) psi||^2, which equals the textbook
    form in exact arithmetic but does not cancel catastrophically near eigenstates.
    """
    arr = as_array(psi)
    h = apply_hamiltonian(H, arr)
    E = float(np.vdot(arr, h).real)
    V = float(np.vdot(h - E * arr, h - E * arr).real)
    if abs(V) <= 1e-12:
        V = 0.0
    return E, V


class _EigenCache:
    """Small LRU of dense eigendecompositions keyed by the term list.

    The offset is excluded from the key, so shifted copies share one entry.
    """

    def __init__(self, maxsize=4):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()

    @staticmethod
    def _key(H):
        return (H.num_qubits, H.terms)

    def get(self, H):
        key = self._key(H)
        if key in self._data:
            self._data.move_to_end(key)
            return self._data[key]
        return None

    def put(self, H, value):
        self._data[self._key(H)] = value
        self._data.move_to_end(self._key(H))
        while len(self._data) > self.maxsize:
            self._data.popitem(last=False)

    def derive(self, H, scaled, a):
        hit = self.get(H)
        if hit is not None and self._key(H) != self._key(scaled):
            w, V = hit
            self.put(scaled, (a * w, V))

    def clear(self):
        self._data.clear()


_EIGEN_CACHE = _EigenCache()


def invariant_blocks(M: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of the basis states coupled by nonzero entries of ``M``.

    Each component spans an exactly invariant subspace, e.g. a magnetization
    sector of the Heisenberg chain.
    """
    rows, cols = np.nonzero(M)
    graph = sp.coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=M.shape)
    return csgraph.connected_components(graph, directed=False)


def _block_eigh(H: PauliSum):
    """Dense eigh, done block by block when H splits into invariant subspaces."""
    M = H.to_dense()
    ncomp, labels = invariant_blocks(M)
    if ncomp == 1:
        return np.linalg.eigh(M)
    n = H.dim
    w = np.empty(n)
    V = np.zeros((n, n), dtype=M.dtype)
    pos = 0
    for c in range(ncomp):
        sel = np.flatnonzero(labels == c)
        wb, vb = np.linalg.eigh(M[np.ix_(sel, sel)])
        w[pos:pos + sel.size] = wb
        V[sel, pos:pos + sel.size] = vb
        pos += sel.size
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eigensystem(H: PauliSum, force: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Dense eigenpairs of H (offset included), ascending, cached.

    Raises :class:`DenseThresholdError` above the dense threshold unless
    ``force`` is set or a decomposition is already cached.
    """
    hit = _EIGEN_CACHE.get(H)
    if hit is None:
        if H.num_qubits > dense_threshold() and not force:
            raise DenseThresholdError(
                f"L={H.num_qubits} exceeds the dense threshold {dense_threshold()}"
            )
        hit = _block_eigh(H.without_offset())
        _EIGEN_CACHE.put(H, hit)
    w, V = hit
    return w + H.offset, V


def real_matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """M @ v without promoting a real M to complex (a full copy at L = 12)."""
    if np.isrealobj(M) and np.iscomplexobj(v):
        return M @ v.real + 1j * (M @ v.imag)
    return M @ v


def has_cached_eigensystem(H: PauliSum) -> bool:
    return _EIGEN_CACHE.get(H) is not None


@dataclass(frozen=True)
class SpectralSummary:
    """Extremal spectral data of a Hamiltonian."""

    lambda0: float
    lambda1: float
    gap: float
    spectral_norm: float
    lambda_max: float
    ground_state: StateVector
    degenerate_ground: bool

    @property
    def width(self) -> float:
        """lambda_max - lambda0, the spectral norm after shifting lambda0 to zero."""
        return self.lambda_max - self.lambda0


def _summary(l0, l1, lmax, gs, L) -> SpectralSummary:
    nrm = max(abs(l0), abs(lmax))
    gap = max(l1 - l0, 0.0)
    return SpectralSummary(
        lambda0=float(l0),
        lambda1=float(l1),
        gap=float(gap),
        spectral_norm=float(nrm),
        lambda_max=float(lmax),
        ground_state=StateVector(gs),
        degenerate_ground=bool(gap <= 1e-8 * nrm),
    )


def spectral_summary(H: PauliSum, mode: str = "dense", tol: float = 1e-10,
                     maxiter: int | None = None) -> SpectralSummary:
    """Extremal eigenvalues, gap, spectral norm and ground state of H.

    ``mode="dense"`` diagonalizes fully (and caches the result);
    ``mode="iterative"`` uses Lanczos on the matrix-free action.
    """
    if mode == "dense":
        w, V = eigensystem(H)
        l1 = w[1] if w.size > 1 else w[0]
        return _summary(w[0], l1, w[-1], V[:, 0], H.num_qubits)
    if mode != "iterative":
        raise ValueError(f"unknown mode {mode!r}")
    n = H.dim
    if n <= 4:
        # ARPACK needs k < n - 1; tiny systems go dense
        return spectral_summary(H, "dense")
    dtype = np.float64 if H.is_real else np.complex128

    def matvec(v):
        out = apply_hamiltonian(H, np.asarray(v).reshape(-1))
        return out.real if dtype == np.float64 else out

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=dtype)
    v0 = np.ones(n, dtype=dtype) / np.sqrt(n)
    try:
        wl, vl = spla.eigsh(op, k=2, which="SA", tol=tol, maxiter=maxiter, v0=v0)
        wh = spla.eigsh(op, k=1, which="LA", tol=tol, maxiter=maxiter, v0=v0,
                        return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        res = float("nan")
        if exc.eigenvectors is not None and exc.eigenvectors.size:
            v = exc.eigenvectors[:, 0]
            res = float(np.linalg.norm(matvec(v) - exc.eigenvalues[0] * v))
        raise ConvergenceError("iterative eigensolver did not converge", res) from exc
    order = np.argsort(wl)
    wl, vl = wl[order], vl[:, order]
    gs = vl[:, 0].astype(np.complex128)
    gs /= np.linalg.norm(gs)
    return _summary(wl[0], wl[1], wh[0], gs, H.num_qubits)


def shift(H: PauliSum, c: float) -> PauliSum:
    """H + c * I with the offset tracked symbolically."""
    return H.shifted(c)


@dataclass(frozen=True)
class Evolution:
    """How to apply exp(itH): ``exact`` (eigenbasis) or ``trotter2`` with ``steps`` repetitions."""

    method: str = "exact"
    steps: int = 1

    def __post_init__(self):
        if self.method not in ("exact", "trotter2"):
            raise ValueError(f"unknown evolution method {self.method!r}")
        if int(self.steps) < 1:
            raise ValueError("trotter steps must be >= 1")
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def parse(cls, spec) -> Evolution:
        """Accept an Evolution, ``"exact"``, ``"trotter2"``, ``"trotter2(4)"`` or a dict."""
        if isinstance(spec, Evolution):
            return spec
        if spec is None:
            return cls()
        if isinstance(spec, dict):
            return cls(spec.get("method", "exact"), spec.get("steps", 1))
        m = re.fullmatch(r"\s*(exact|trotter2)\s*(?:\(\s*(\d+)\s*\))?\s*", str(spec))
        if not m:
            raise ValueError(f"cannot parse evolution {spec!r}")
        return cls(m.group(1), int(m.group(2) or 1))

    def __str__(self):
        return "exact" if self.method == "exact" else f"trotter2({self.steps})"


def trotter_layers(H: PauliSum) -> tuple[list[int], list[int]]:
    """Split term indices into two colors by the parity of each term's lowest qubit.

    On the nearest-neighbour chain each color is a set of disjoint bonds.
    """
    even, odd = [], []
    for j, (_, P) in enumerate(H.terms):
        (even if P.support[0] % 2 == 0 else odd).append(j)
    return even, odd


def _trotter2_sequence(H: PauliSum, t: float, steps: int):
    even, odd = trotter_layers(H)
    order = even + odd
    xm, zm, ph, co = H._masks
    dt = t / steps
    half = np.array(order + order[::-1], dtype=np.int64)
    idx = np.tile(half, steps)
    thetas = 0.5 * dt * co[idx]
    return xm[idx], zm[idx], ph[idx], thetas


def evolve(H: PauliSum, psi, t: float, method="exact") -> StateVector:
    """Return exp(i t H) psi.

    ``trotter2`` applies the palindromic second-order product over the
    even/odd coloring ``steps`` times; the offset contributes a global phase.
    """
    arr = as_array(psi)
    _check_dims(H, arr)
    evo = Evolution.parse(method)
    t = float(t)
    if t == 0.0:
        return StateVector(arr)
    if evo.method == "exact":
        w, V = eigensystem(H)
        coeffs = real_matvec(V.conj().T, arr)
        out = real_matvec(V, np.exp(1j * t * w) * coeffs)
        return StateVector(out, copy=False)
    xm, zm, ph, th = _trotter2_sequence(H, t, evo.steps)
    out = kernels.apply_rotations(arr, xm, zm, ph, th)
    if H.offset:
        out *= np.exp(1j * t * H.offset)
    return StateVector(out, copy=False)


def terms_commute(H: PauliSum) -> bool:
    xm, zm = H._masks[:2]
    for i in range(len(xm)):
        anti = np.bitwise_count(xm[i] & zm) + np.bitwise_count(zm[i] & xm)
        if np.any(anti & 1):
            return False
    return True


def evolve_commuting(H: PauliSum, psi, t: float) -> StateVector:
    """exp(i t H) psi as an exact product of Pauli rotations; all terms must commute."""
    arr = as_array(psi)
    _check_dims(H, arr)
    if not terms_commute(H):
        raise ValueError("terms do not commute")
    xm, zm, ph, co = H._masks
    out = kernels.apply_rotations(arr, xm, zm, ph, t * co)
    if H.offset:
        out *= np.exp(1j * t * H.offset)
    return StateVector(out, copy=False)


__all__ = [
    "ConvergenceError",
    "DenseThresholdError",
    "Evolution",
    "PauliSum",
    "SpectralSummary",
    "apply_hamiltonian",
    "bond_restriction",
    "dense_threshold",
    "eigensystem",
    "energy_and_variance",
    "evolve",
    "evolve_commuting",
    "heisenberg_chain",
    "num_qubits_of",
    "random_gapped_hamiltonian",
    "random_pauli_sum",
    "shift",
    "spectral_summary",
    "trotter_layers",
]

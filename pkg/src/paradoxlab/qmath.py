"""Dense linear algebra and quantum-information primitives.

Registers are little-endian: qubit 0 is the least significant bit of a
basis index, so ``tensor(a, b)`` places ``a`` on the high-order qubits.
Everything works on explicit numpy matrices; the register ceiling is
six qubits, so dense is always fine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadTargets,
    DimensionMismatch,
    InvalidState,
    NonUnitary,
    NotTracePreserving,
)

# Numerical tolerances used across the package.
UNITARY_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_FLOOR = -1e-10
ENTROPY_EIG_FLOOR = 1e-12
KRAUS_ATOL = 1e-9


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; row index of the result is i_a * rows_b + i_b."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    """Tensor factors listed qubit-0-first (qubit 0 least significant)."""
    mats = list(factors)
    if not mats:
        raise DimensionMismatch("kron_all needs at least one factor")
    return reduce(tensor, reversed(mats))


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(adjoint(u) @ u - np.eye(u.shape[0]))) <= atol)


def _qubit_count(dim: int, what: str) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2 ** n != dim:
        raise DimensionMismatch(f"{what} dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over ``n`` qubits; amplitudes indexed little-endian."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n,):
            raise InvalidState(f"expected {2 ** self.n} amplitudes, got {amps.shape}")
        if abs(np.vdot(amps, amps).real - 1.0) > 1e-10:
            raise InvalidState("state vector is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.from_statevector(self)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite matrix over n qubits."""

    n: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        dim = 2 ** self.n
        if mat.shape != (dim, dim):
            raise InvalidState(f"expected {dim}x{dim} matrix, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_ATOL:
            raise InvalidState("density matrix is not hermitian")
        if abs(np.trace(mat).real - 1.0) > TRACE_ATOL:
            raise InvalidState(f"trace is {np.trace(mat).real}, expected 1")
        if np.min(np.linalg.eigvalsh(mat)) < PSD_FLOOR:
            raise InvalidState("density matrix has a negative eigenvalue")
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "DensityMatrix":
        mat = np.asarray(mat, dtype=complex)
        return cls(_qubit_count(mat.shape[0], "density matrix"), mat)

    @classmethod
    def from_statevector(cls, sv: StateVector) -> "DensityMatrix":
        return cls(sv.n, np.outer(sv.amplitudes, sv.amplitudes.conj()))

    @classmethod
    def sanitized(cls, mat: np.ndarray) -> "DensityMatrix":
        """Hermitize, clip eigenvalues within the PSD floor, renormalize."""
        mat = np.asarray(mat, dtype=complex)
        mat = (mat + mat.conj().T) / 2
        vals, vecs = np.linalg.eigh(mat)
        if np.min(vals) < PSD_FLOOR:
            raise InvalidState("matrix is negative beyond the PSD floor")
        vals = np.clip(vals, 0.0, None)
        mat = (vecs * vals) @ vecs.conj().T
        mat = mat / np.trace(mat).real
        return cls.from_matrix(mat)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Trace-preserving set of Kraus operators over a fixed dimension."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise DimensionMismatch("empty Kraus set")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise DimensionMismatch("Kraus operators differ in shape")
        total = sum(adjoint(k) @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim))) > KRAUS_ATOL:
            raise NotTracePreserving("sum of K^dag K deviates from identity")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


def _check_targets(targets: Sequence[int], n: int, op_dim: int) -> list:
    targets = list(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise BadTargets(f"repeated target in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise BadTargets(f"target {t} outside register of {n} qubits")
    if op_dim != 2 ** len(targets):
        raise DimensionMismatch(
            f"operator dimension {op_dim} does not match {len(targets)} targets"
        )
    return targets


def embed_operator(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` to the full 2^n-dimensional space.

    targets[p] carries bit p of the operator's own index.
    """
    op = np.asarray(op, dtype=complex)
    targets = _check_targets(targets, n, op.shape[0])
    k = len(targets)
    dim = 2 ** n
    mask = 0
    for t in targets:
        mask |= 1 << t
    rest = np.array([i for i in range(dim) if i & mask == 0], dtype=int)
    place = [
        sum(((j >> p) & 1) << targets[p] for p in range(k)) for j in range(2 ** k)
    ]
    full = np.zeros((dim, dim), dtype=complex)
    for jr in range(2 ** k):
        for jc in range(2 ** k):
            full[rest + place[jr], rest + place[jc]] = op[jr, jc]
    return full


def evolve_density(rho: DensityMatrix, u: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    """Conjugate ``rho`` by a unitary acting on ``targets``."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise NonUnitary("operator fails the unitarity check")
    full = embed_operator(u, targets, rho.n)
    return DensityMatrix(rho.n, full @ rho.mat @ full.conj().T)


def apply_kraus(rho: DensityMatrix, kraus: KrausSet, targets: Sequence[int]) -> DensityMatrix:
    """Apply a trace-preserving channel given by Kraus operators on ``targets``."""
    _check_targets(targets, rho.n, kraus.dim)
    out = np.zeros_like(rho.mat)
    for k in kraus.operators:
        full = embed_operator(k, targets, rho.n)
        out += full @ rho.mat @ full.conj().T
    return DensityMatrix(rho.n, (out + out.conj().T) / 2)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out all qubits not in ``keep``; kept qubits stay in ascending order."""
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise BadTargets("keep list must be nonempty")
    for q in keep:
        if not 0 <= q < rho.n:
            raise BadTargets(f"kept qubit {q} outside register of {rho.n} qubits")
    traced = [q for q in range(rho.n) if q not in keep]
    dk = 2 ** len(keep)
    # index map from the kept sub-basis into the full basis, per traced assignment
    base = np.zeros(dk, dtype=int)
    for p, q in enumerate(keep):
        base |= ((np.arange(dk) >> p) & 1) << q
    out = np.zeros((dk, dk), dtype=complex)
    for t in range(2 ** len(traced)):
        offset = 0
        for p, q in enumerate(traced):
            offset |= ((t >> p) & 1) << q
        idx = base + offset
        out += rho.mat[np.ix_(idx, idx)]
    return DensityMatrix(len(keep), out)


def vn_entropy_bits(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits; eigenvalues at or below 1e-12 contribute 0."""
    vals = np.linalg.eigvalsh(rho.mat)
    vals = vals[vals > ENTROPY_EIG_FLOOR]
    return float(-np.sum(vals * np.log2(vals)))


def _mat_of(state) -> np.ndarray:
    return state.mat if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference; accepts DensityMatrix or ndarray."""
    diff = _mat_of(a) - _mat_of(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


# --- common states ---------------------------------------------------------


def basis_state(n: int, index: int = 0) -> StateVector:
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def maximally_mixed(n: int) -> DensityMatrix:
    dim = 2 ** n
    return DensityMatrix(n, np.eye(dim, dtype=complex) / dim)


# --- matrix file format ----------------------------------------------------


def matrix_to_entries(m: np.ndarray) -> list:
    """Row-major [[re, im], ...] listing of a square complex matrix."""
    m = np.asarray(m, dtype=complex)
    return [[float(v.real), float(v.imag)] for v in m.reshape(-1)]


def entries_to_matrix(dim: int, entries: Sequence[Sequence[float]]) -> np.ndarray:
    if len(entries) != dim * dim:
        raise DimensionMismatch(f"expected {dim * dim} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries])
    if not np.all(np.isfinite(flat)):
        raise InvalidState("matrix file contains non-finite entries")
    return flat.reshape(dim, dim)


def save_unitary(path: str, m: np.ndarray, validate: bool = True) -> None:
    m = np.asarray(m, dtype=complex)
    if validate and not is_unitary(m):
        raise NonUnitary("refusing to save a non-unitary matrix")
    payload = {"dim": int(m.shape[0]), "entries": matrix_to_entries(m)}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_unitary(path: str) -> np.ndarray:
    """Read a matrix file and validate unitarity on load."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        dim = int(data["dim"])
        entries = data["entries"]
    except (KeyError, TypeError) as exc:
        raise DimensionMismatch(f"malformed matrix file: {exc}") from exc
    m = entries_to_matrix(dim, entries)
    if not is_unitary(m):
        raise NonUnitary(f"matrix in {path} fails the unitarity check")
    return m

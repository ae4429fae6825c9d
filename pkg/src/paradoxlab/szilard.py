"""Single-particle information engine with an explicit erasure ledger.

One engine cycle on four qubits: a particle whose position is the working
medium, a one-qubit demon memory, and a two-qubit unary weight register that
embodies the extracted work.  The particle is randomized, its position is
recorded into the memory, and a shift conditioned on whether the record
agrees with the particle moves the weight up or down one level.  A blank
memory always produces an agreeing record (one unit of work out); a stale
uncorrelated record guesses the side and averages to zero.  Resetting the
memory restores the blank state and costs the one bit the record carried,
which is the erasure charge the ledger tracks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .circuit import Circuit, apply_instruction, depolarizing_kraus
from .errors import (
    BadMemoryState,
    BadParams,
    BadPartition,
    BadProbability,
    DimensionMismatch,
)
from .qmath import (
    DensityMatrix,
    basis_state,
    kron_all,
    partial_trace,
    vn_entropy_bits,
)

PARTICLE = 0
MEMORY = 1
W1 = 2
W0 = 3

_GROUND = np.diag([1.0, 0.0]).astype(complex)

# Unary weight ladder: local index bits are (w1, w0), energy is the bit sum,
# and the cycle starts from |01> so one level of headroom exists either way.
_ENERGY = np.diag([0.0, 1.0, 1.0, 2.0]).astype(complex)
_START_ENERGY = 1.0


def weight_energy(index: int) -> int:
    """Energy level of a weight basis state, in work units."""
    if not isinstance(index, int) or not 0 <= index < 4:
        raise BadParams(f"weight index must be 0..3, got {index!r}")
    return int(bin(index).count("1"))


def work_expectation(weight_state: DensityMatrix) -> float:
    """Expected work stored in the weight register relative to its start level."""
    if weight_state.n != 2:
        raise DimensionMismatch(
            f"weight register has 2 qubits, got a {weight_state.n}-qubit state"
        )
    energy = float(np.real(np.trace(weight_state.mat @ _ENERGY)))
    return energy - _START_ENERGY


def mutual_information(
    joint: DensityMatrix, part_a: Sequence[int], part_b: Sequence[int]
) -> float:
    """Quantum mutual information S(A) + S(B) - S(AB) in bits.

    ``part_a`` and ``part_b`` must be disjoint and together cover every qubit
    of ``joint``.
    """
    a = list(part_a)
    b = list(part_b)
    everything = sorted(a + b)
    if not a or not b or set(a) & set(b) or everything != list(range(joint.n)):
        raise BadPartition(
            f"parts {a} and {b} do not split a {joint.n}-qubit state"
        )
    s_a = vn_entropy_bits(partial_trace(joint, a))
    s_b = vn_entropy_bits(partial_trace(joint, b))
    s_ab = vn_entropy_bits(joint)
    return max(0.0, s_a + s_b - s_ab)


@dataclass(frozen=True)
class SzilardConfig:
    """Engine run parameters.

    ``depolarize_p`` sets the strength of the randomizing channel applied to
    the particle at the start of each cycle and again after the work stroke;
    1.0 is the standard engine, 0.0 leaves the particle wherever it was
    prepared (useful for tracing the logic).
    """

    cycles: int = 1
    skip_reset: bool = False
    depolarize_p: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.cycles, int) or self.cycles < 1:
            raise BadParams(f"cycles must be a positive integer, got {self.cycles!r}")
        if not 0.0 <= self.depolarize_p <= 1.0:
            raise BadProbability(
                f"depolarize_p must lie in [0, 1], got {self.depolarize_p!r}"
            )


@dataclass(frozen=True)
class CycleRecord:
    """Bookkeeping for one engine cycle."""

    cycle: int
    expected_work: float
    sampled_work: Optional[int]
    memory_entropy_pre_reset: float
    memory_entropy_post: float
    mutual_info_particle_memory: float

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "expected_work": self.expected_work,
            "sampled_work": self.sampled_work,
            "memory_entropy_pre_reset": self.memory_entropy_pre_reset,
            "memory_entropy_post": self.memory_entropy_post,
            "mutual_info_particle_memory": self.mutual_info_particle_memory,
        }


@dataclass(frozen=True)
class CycleLedger:
    records: Tuple[CycleRecord, ...]
    shots: int
    seed: int

    @property
    def total_expected_work(self) -> float:
        return sum(rec.expected_work for rec in self.records)

    def to_dict(self) -> dict:
        return {
            "records": [rec.to_dict() for rec in self.records],
            "shots": self.shots,
            "seed": self.seed,
            "total_expected_work": self.total_expected_work,
        }


def _check_memory(memory_in: DensityMatrix) -> None:
    if not isinstance(memory_in, DensityMatrix) or memory_in.n != 1:
        raise BadMemoryState("memory must be a single-qubit density matrix")


def _assemble(skip_reset: bool, depolarize_p: float) -> Tuple[Circuit, int, int]:
    """Build one cycle; also return the measurement and work-stroke markers."""
    c = Circuit(4)
    c.channel(depolarizing_kraus(depolarize_p), [PARTICLE])
    c.x(W0)
    c.cx(PARTICLE, MEMORY)  # record the particle position into the memory
    measured_at = len(c.instructions) - 1
    # Fold the particle onto the record: memory now holds the agreement bit,
    # 0 when the record matches the particle and the weight should rise.
    c.cx(PARTICLE, MEMORY)
    c.x(MEMORY)
    c.cx(MEMORY, W1)
    c.x(MEMORY)
    c.cx(MEMORY, W0)
    c.cx(PARTICLE, MEMORY)  # unfold, leaving the record in place
    c.channel(depolarizing_kraus(depolarize_p), [PARTICLE])  # rethermalize
    stroke_done_at = len(c.instructions) - 1
    if not skip_reset:
        c.reset(MEMORY)
    return c, measured_at, stroke_done_at


def build_cycle(
    memory_in: DensityMatrix, skip_reset: bool = False, depolarize_p: float = 1.0
) -> Circuit:
    """One engine cycle as a plain circuit on (particle, memory, w1, w0)."""
    _check_memory(memory_in)
    if not 0.0 <= depolarize_p <= 1.0:
        raise BadProbability(f"depolarize_p must lie in [0, 1], got {depolarize_p!r}")
    circuit, _, _ = _assemble(skip_reset, depolarize_p)
    return circuit


def run_single_cycle(
    memory_in: DensityMatrix,
    skip_reset: bool = False,
    depolarize_p: float = 1.0,
) -> Tuple[CycleRecord, DensityMatrix]:
    """Run one cycle from a fresh particle and the given memory state.

    Returns the cycle record (with ``cycle`` set to 1 and no sampled work)
    and the memory state handed to the next cycle.
    """
    _check_memory(memory_in)
    if not 0.0 <= depolarize_p <= 1.0:
        raise BadProbability(f"depolarize_p must lie in [0, 1], got {depolarize_p!r}")
    circuit, measured_at, stroke_done_at = _assemble(skip_reset, depolarize_p)

    rho = DensityMatrix(4, kron_all([_GROUND, memory_in.mat, _GROUND, _GROUND]))
    mutual = expected = pre_entropy = 0.0
    for k, instr in enumerate(circuit.instructions):
        rho = apply_instruction(rho, instr)
        if k == measured_at:
            pair = partial_trace(rho, [PARTICLE, MEMORY])
            mutual = mutual_information(pair, [0], [1])
        if k == stroke_done_at:
            expected = work_expectation(partial_trace(rho, [W1, W0]))
            pre_entropy = vn_entropy_bits(partial_trace(rho, [MEMORY]))
    memory_out = partial_trace(rho, [MEMORY])
    post_entropy = pre_entropy if skip_reset else vn_entropy_bits(memory_out)

    record = CycleRecord(
        cycle=1,
        expected_work=expected,
        sampled_work=None,
        memory_entropy_pre_reset=pre_entropy,
        memory_entropy_post=post_entropy,
        mutual_info_particle_memory=mutual,
    )
    return record, memory_out


def _sample_trajectories(cfg: SzilardConfig, shots: int, seed: int) -> List[int]:
    """Classical per-shot unraveling of the engine.

    Valid because every state the exact run visits is diagonal in the
    computational basis, so the channel reduces to "replace the particle by a
    fair coin with probability p" and the gates to bit arithmetic.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    memory = np.zeros(shots, dtype=np.int8)
    totals: List[int] = []
    for _ in range(cfg.cycles):
        particle = np.zeros(shots, dtype=np.int8)
        if cfg.depolarize_p > 0.0:
            hit = rng.random(shots) < cfg.depolarize_p
            coin = rng.integers(0, 2, shots, dtype=np.int8)
            particle = np.where(hit, coin, particle)
        work = np.where(memory == 0, 1, -1)
        memory = memory ^ particle
        if not cfg.skip_reset:
            memory[:] = 0
        totals.append(int(work.sum()))
    return totals


def run_cycles(cfg: SzilardConfig, shots: int = 0, seed: int = 0) -> CycleLedger:
    """Run the configured number of cycles, carrying the memory state across.

    With ``shots`` > 0 a seeded trajectory sample is attached to each record;
    the exact expectation values are computed either way.
    """
    if not isinstance(shots, int) or shots < 0:
        raise BadParams(f"shots must be a non-negative integer, got {shots!r}")
    memory = basis_state(1).density()
    records: List[CycleRecord] = []
    for k in range(1, cfg.cycles + 1):
        rec, memory = run_single_cycle(memory, cfg.skip_reset, cfg.depolarize_p)
        records.append(replace(rec, cycle=k))
    if shots > 0:
        totals = _sample_trajectories(cfg, shots, seed)
        records = [replace(r, sampled_work=t) for r, t in zip(records, totals)]
    return CycleLedger(tuple(records), shots, seed)

"""Gate library, circuit IR, and the two reference backends.

The density backend is the primary one: measurements branch the state
and the exact joint outcome distribution is accumulated, never sampled.
Sampling is a separate seeded post-process over that distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadParams,
    BadProbability,
    BadTargets,
    InvalidCircuit,
    NonUnitaryInstruction,
    TooManyQubits,
    UnknownKind,
)
from . import qmath
from .qmath import DensityMatrix, KrausSet, StateVector

MAX_QUBITS = 6

_SQ2 = 1 / math.sqrt(2)

_FIXED_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
}


def _permutation(dim, mapping):
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        m[mapping.get(col, col), col] = 1
    return m


# Multi-qubit gates index their local basis little-endian over the target
# list: targets[0] carries local bit 0. Controls come first in the list.
_FIXED_MATRICES["CNOT"] = _permutation(4, {1: 3, 3: 1})
_FIXED_MATRICES["SWAP"] = _permutation(4, {1: 2, 2: 1})
_FIXED_MATRICES["CCX"] = _permutation(8, {3: 7, 7: 3})

_ch = np.eye(4, dtype=complex)
_ch[1, 1] = _ch[1, 3] = _ch[3, 1] = _SQ2
_ch[3, 3] = -_SQ2
_FIXED_MATRICES["CH"] = _ch

GATE_KINDS = ("H", "X", "Y", "Z", "I", "RX", "CNOT", "SWAP", "CH", "CCX")


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    matrix: np.ndarray
    theta: Optional[float] = None

    @property
    def arity(self) -> int:
        return int(self.matrix.shape[0]).bit_length() - 1


def make_gate(kind: str, theta: Optional[float] = None) -> Gate:
    """Build a gate from the fixed library; RX is the only parameterized kind."""
    if kind == "RX":
        if theta is None:
            raise BadParams("RX needs an angle")
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        m = np.array([[c, -1j * s], [-1j * s, c]])
        return Gate("RX", m, float(theta))
    if kind not in _FIXED_MATRICES:
        raise UnknownKind(f"no gate kind {kind!r}")
    if theta is not None:
        raise BadParams(f"{kind} takes no angle")
    return Gate(kind, _FIXED_MATRICES[kind].copy())


@dataclass(frozen=True)
class Instruction:
    """One circuit step: unitary, channel, reset, or measure."""

    op: str
    targets: tuple
    gate: Optional[Gate] = None
    kraus: Optional[KrausSet] = None
    clbit: Optional[int] = None

    @classmethod
    def unitary(cls, gate: Gate, targets: Sequence[int]) -> "Instruction":
        targets = _distinct(targets)
        if len(targets) != gate.arity:
            raise BadTargets(f"{gate.kind} expects {gate.arity} targets, got {len(targets)}")
        return cls("unitary", targets, gate=gate)

    @classmethod
    def channel(cls, kraus: KrausSet, targets: Sequence[int]) -> "Instruction":
        targets = _distinct(targets)
        if kraus.dim != 2 ** len(targets):
            raise BadTargets("Kraus dimension does not match the target count")
        return cls("channel", targets, kraus=kraus)

    @classmethod
    def reset(cls, target: int) -> "Instruction":
        return cls("reset", (int(target),))

    @classmethod
    def measure(cls, target: int, clbit: int) -> "Instruction":
        return cls("measure", (int(target),), clbit=int(clbit))


def _distinct(targets) -> tuple:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise BadTargets(f"repeated target in {targets}")
    return targets


@dataclass
class Circuit:
    """Instruction list over a fixed register; built once, run read-only."""

    n_qubits: int
    n_clbits: int = 0
    instructions: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise TooManyQubits(f"{self.n_qubits} qubits exceeds the limit of {MAX_QUBITS}")
        if self.n_qubits < 1:
            raise InvalidCircuit(["circuit needs at least one qubit"])

    # -- builder helpers ----------------------------------------------------

    def append_gate(self, gate: Gate, targets: Sequence[int]) -> "Circuit":
        instr = Instruction.unitary(gate, targets)
        self._check_range(instr)
        self.instructions.append(instr)
        return self

    def h(self, q):
        return self.append_gate(make_gate("H"), [q])

    def x(self, q):
        return self.append_gate(make_gate("X"), [q])

    def y(self, q):
        return self.append_gate(make_gate("Y"), [q])

    def z(self, q):
        return self.append_gate(make_gate("Z"), [q])

    def i(self, q):
        return self.append_gate(make_gate("I"), [q])

    def rx(self, theta, q):
        return self.append_gate(make_gate("RX", theta), [q])

    def cx(self, control, target):
        return self.append_gate(make_gate("CNOT"), [control, target])

    def swap(self, a, b):
        return self.append_gate(make_gate("SWAP"), [a, b])

    def ch(self, control, target):
        return self.append_gate(make_gate("CH"), [control, target])

    def ccx(self, c1, c2, target):
        return self.append_gate(make_gate("CCX"), [c1, c2, target])

    def channel(self, kraus: KrausSet, targets: Sequence[int]) -> "Circuit":
        instr = Instruction.channel(kraus, targets)
        self._check_range(instr)
        self.instructions.append(instr)
        return self

    def reset(self, q) -> "Circuit":
        instr = Instruction.reset(q)
        self._check_range(instr)
        self.instructions.append(instr)
        return self

    def measure(self, q, clbit) -> "Circuit":
        instr = Instruction.measure(q, clbit)
        self._check_range(instr)
        self.instructions.append(instr)
        return self

    def _check_range(self, instr: Instruction):
        for t in instr.targets:
            if not 0 <= t < self.n_qubits:
                raise BadTargets(f"target {t} outside register of {self.n_qubits} qubits")
        if instr.clbit is not None and not 0 <= instr.clbit < self.n_clbits:
            raise BadTargets(f"clbit {instr.clbit} outside register of {self.n_clbits} bits")

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        out = []
        for instr in self.instructions:
            if instr.op == "unitary":
                doc = {"op": "unitary", "kind": instr.gate.kind, "targets": list(instr.targets)}
                if instr.gate.theta is not None:
                    doc = {
                        "op": "unitary",
                        "kind": instr.gate.kind,
                        "theta": instr.gate.theta,
                        "targets": list(instr.targets),
                    }
                out.append(doc)
            elif instr.op == "channel":
                out.append(
                    {
                        "op": "channel",
                        "dim": instr.kraus.dim,
                        "operators": [qmath.matrix_to_entries(k) for k in instr.kraus.operators],
                        "targets": list(instr.targets),
                    }
                )
            elif instr.op == "reset":
                out.append({"op": "reset", "target": instr.targets[0]})
            else:
                out.append({"op": "measure", "target": instr.targets[0], "clbit": instr.clbit})
        return {"n_qubits": self.n_qubits, "n_clbits": self.n_clbits, "instructions": out}

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, doc: dict) -> "Circuit":
        c = cls(int(doc["n_qubits"]), int(doc.get("n_clbits", 0)))
        for item in doc.get("instructions", []):
            op = item["op"]
            if op == "unitary":
                c.append_gate(make_gate(item["kind"], item.get("theta")), item["targets"])
            elif op == "channel":
                ops = tuple(
                    qmath.entries_to_matrix(int(item["dim"]), e) for e in item["operators"]
                )
                c.channel(KrausSet(ops), item["targets"])
            elif op == "reset":
                c.reset(item["target"])
            elif op == "measure":
                c.measure(item["target"], item["clbit"])
            else:
                raise UnknownKind(f"no instruction op {op!r}")
        return c


def validate(c: Circuit) -> list:
    """Return a list of problems; empty means the circuit is runnable."""
    problems = []
    used_clbits = set()
    for i, instr in enumerate(c.instructions):
        if len(set(instr.targets)) != len(instr.targets):
            problems.append(f"instruction {i}: repeated targets {instr.targets}")
        for t in instr.targets:
            if not 0 <= t < c.n_qubits:
                problems.append(f"instruction {i}: target {t} out of range")
        if instr.op == "unitary" and len(instr.targets) != instr.gate.arity:
            problems.append(f"instruction {i}: arity mismatch for {instr.gate.kind}")
        if instr.op == "channel" and instr.kraus.dim != 2 ** len(instr.targets):
            problems.append(f"instruction {i}: channel dimension mismatch")
        if instr.op == "measure":
            if not 0 <= instr.clbit < c.n_clbits:
                problems.append(f"instruction {i}: clbit {instr.clbit} out of range")
            elif instr.clbit in used_clbits:
                problems.append(f"instruction {i}: clbit {instr.clbit} written twice")
            else:
                used_clbits.add(instr.clbit)
    return problems


# -- backends ----------------------------------------------------------------


def run_statevector(c: Circuit) -> StateVector:
    """Evolve |0...0> through a unitary-only circuit."""
    _require_valid(c)
    amps = np.zeros(2 ** c.n_qubits, dtype=complex)
    amps[0] = 1
    for instr in c.instructions:
        if instr.op != "unitary":
            raise NonUnitaryInstruction(f"statevector backend cannot run {instr.op!r}")
        amps = qmath.embed_operator(instr.gate.matrix, instr.targets, c.n_qubits) @ amps
    return StateVector(c.n_qubits, amps)


_RESET_KRAUS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 1], [0, 0]], dtype=complex),
)

_PROJ = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
)

_BRANCH_FLOOR = 1e-15


def apply_instruction(rho: DensityMatrix, instr: Instruction) -> DensityMatrix:
    """Apply a non-measuring instruction to a density matrix."""
    if instr.op == "unitary":
        return qmath.evolve_density(rho, instr.gate.matrix, instr.targets)
    if instr.op == "channel":
        return qmath.apply_kraus(rho, instr.kraus, instr.targets)
    if instr.op == "reset":
        return qmath.apply_kraus(rho, KrausSet(_RESET_KRAUS), instr.targets)
    raise NonUnitaryInstruction("measurement must be handled by the branch runner")


@dataclass
class RunResult:
    """Exact joint outcome distribution plus the ensemble-averaged state."""

    distribution: dict
    final_state: DensityMatrix
    reduced_states: list


def run_density(c: Circuit, initial: Optional[DensityMatrix] = None) -> RunResult:
    """Exact density evolution; measurements branch on the joint outcomes."""
    _require_valid(c)
    n = c.n_qubits
    if initial is None:
        initial = qmath.basis_state(n, 0).density()
    elif initial.n != n:
        raise BadTargets(f"initial state has {initial.n} qubits, circuit has {n}")
    branches = [(1.0, initial, (0,) * c.n_clbits)]
    for instr in c.instructions:
        if instr.op != "measure":
            branches = [(w, apply_instruction(rho, instr), bits) for w, rho, bits in branches]
            continue
        q = instr.targets[0]
        new_branches = []
        for w, rho, bits in branches:
            for outcome in (0, 1):
                proj = qmath.embed_operator(_PROJ[outcome], [q], n)
                unnorm = proj @ rho.mat @ proj
                p = float(np.trace(unnorm).real)
                if w * p <= _BRANCH_FLOOR:
                    continue
                new_bits = list(bits)
                new_bits[instr.clbit] = outcome
                new_branches.append((w * p, DensityMatrix(n, unnorm / p), tuple(new_bits)))
        branches = new_branches
    distribution = {}
    for w, _, bits in branches:
        key = "".join(str(b) for b in bits)
        distribution[key] = distribution.get(key, 0.0) + w
    total = sum(w for w, _, _ in branches)
    mixed = sum(w * rho.mat for w, rho, _ in branches) / total
    final = DensityMatrix(n, mixed)
    reduced = [qmath.partial_trace(final, [q]) for q in range(n)]
    return RunResult(distribution, final, reduced)


def _require_valid(c: Circuit):
    problems = validate(c)
    if problems:
        raise InvalidCircuit(problems)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Full-register matrix of a unitary-only circuit, in time order."""
    u = np.eye(2 ** c.n_qubits, dtype=complex)
    for instr in c.instructions:
        if instr.op != "unitary":
            raise NonUnitaryInstruction(f"circuit contains {instr.op!r}")
        u = qmath.embed_operator(instr.gate.matrix, instr.targets, c.n_qubits) @ u
    return u


def sample(result: RunResult, shots: int, seed: int = 0) -> dict:
    """Multinomial draw over the exact distribution.

    Uses numpy's PCG64 generator, seeded explicitly, so identical
    invocations reproduce identical counts on any platform.
    """
    if shots < 0:
        raise BadParams("shots must be nonnegative")
    keys = sorted(result.distribution)
    probs = np.array([result.distribution[k] for k in keys])
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(shots, probs)
    return {k: int(v) for k, v in zip(keys, counts)}


def depolarizing_kraus(p: float) -> KrausSet:
    """Depolarizing channel: rho -> (1 - p) rho + p I/2 at p = 1 fully mixes."""
    if not 0.0 <= p <= 1.0:
        raise BadProbability(f"depolarizing strength {p} outside [0, 1]")
    if p == 0.0:
        return KrausSet((np.eye(2, dtype=complex),))
    x, y, z = (_FIXED_MATRICES[k] for k in ("X", "Y", "Z"))
    return KrausSet(
        (
            math.sqrt(1 - 3 * p / 4) * np.eye(2, dtype=complex),
            math.sqrt(p / 4) * x,
            math.sqrt(p / 4) * y,
            math.sqrt(p / 4) * z,
        )
    )

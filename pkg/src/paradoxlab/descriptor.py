"""Heisenberg-picture tracking of per-qubit Pauli observables.

A frame carries, for every qubit, the conjugated images of its three
bare Pauli operators after the circuit prefix applied so far. Where a
gate does not touch a qubit, its images must stay put; the locality
audit checks exactly that, numerically, with no shortcuts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import qmath
from .circuit import MAX_QUBITS, Circuit, Instruction, validate
from .errors import (
    BadParams,
    BadTargets,
    InvalidCircuit,
    NonUnitaryInstruction,
    ShapeMismatch,
    TooManyQubits,
)
from .qmath import StateVector

LOCALITY_ATOL = 1e-10
DEPENDENCE_ATOL = 1e-9

_PAULIS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

AXES = ("x", "y", "z")


@dataclass(frozen=True, eq=False)
class DescriptorFrame:
    """Evolved (x, y, z) observable triple for each qubit at step ``t``.

    ``prefix`` is the accumulated circuit unitary; each stored image is
    the bare Pauli conjugated by it, so the latest gate sits innermost.
    """

    n: int
    t: int
    prefix: np.ndarray
    triples: tuple  # per qubit: (x image, y image, z image) as full matrices


def _bare_triples(n: int) -> tuple:
    return tuple(
        tuple(qmath.embed_operator(_PAULIS[ax], [q], n) for ax in AXES) for q in range(n)
    )


def init_frame(n: int) -> DescriptorFrame:
    if n < 1:
        raise BadParams("frame needs at least one qubit")
    if n > MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds the limit of {MAX_QUBITS}")
    return DescriptorFrame(n, 0, np.eye(2 ** n, dtype=complex), _bare_triples(n))


def advance(frame: DescriptorFrame, instr: Instruction) -> DescriptorFrame:
    """Extend the tracked prefix by one unitary step and refresh all images."""
    if instr.op != "unitary":
        raise NonUnitaryInstruction(f"descriptors are defined for unitary steps, not {instr.op!r}")
    prefix = qmath.embed_operator(instr.gate.matrix, instr.targets, frame.n) @ frame.prefix
    pdag = prefix.conj().T
    triples = tuple(
        tuple(pdag @ m @ prefix for m in triple) for triple in _bare_triples(frame.n)
    )
    return DescriptorFrame(frame.n, frame.t + 1, prefix, triples)


@dataclass(frozen=True)
class AuditStep:
    instr: int
    max_offsupport_delta: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "instr": self.instr,
            "max_offsupport_delta": self.max_offsupport_delta,
            "pass": self.ok,
        }


@dataclass(frozen=True)
class AuditReport:
    steps: tuple
    overall: bool

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps], "overall": self.overall}


def locality_audit(c: Circuit) -> AuditReport:
    """Advance a frame through ``c`` and bound the off-support drift per step."""
    problems = validate(c)
    if problems:
        raise InvalidCircuit(problems)
    frame = init_frame(c.n_qubits)
    steps: List[AuditStep] = []
    for i, instr in enumerate(c.instructions):
        after = advance(frame, instr)
        support = set(instr.targets)
        delta = 0.0
        for q in range(c.n_qubits):
            if q in support:
                continue
            for before_m, after_m in zip(frame.triples[q], after.triples[q]):
                delta = max(delta, float(np.max(np.abs(after_m - before_m))))
        steps.append(AuditStep(i, delta, delta <= LOCALITY_ATOL))
        frame = after
    return AuditReport(tuple(steps), all(s.ok for s in steps))


def _shape_signature(c: Circuit) -> list:
    return [(i.op, i.gate.kind if i.gate else None, i.targets) for i in c.instructions]


def dependence_probe(
    build: Callable[[float], Circuit],
    qubit: int,
    value_a: float,
    value_b: float,
) -> Tuple[bool, float]:
    """Compare one qubit's evolved triple under two parameter values.

    ``build`` must return circuits of identical shape (same ops, kinds
    and targets) for both values; only gate angles may differ.
    """
    circuits = [build(float(v)) for v in (value_a, value_b)]
    if circuits[0].n_qubits != circuits[1].n_qubits or _shape_signature(
        circuits[0]
    ) != _shape_signature(circuits[1]):
        raise ShapeMismatch("the two parameter values produce circuits of different shape")
    n = circuits[0].n_qubits
    if not 0 <= qubit < n:
        raise BadTargets(f"qubit {qubit} outside register of {n} qubits")
    frames = []
    for c in circuits:
        f = init_frame(n)
        for instr in c.instructions:
            f = advance(f, instr)
        frames.append(f)
    delta = max(
        float(np.max(np.abs(a - b)))
        for a, b in zip(frames[0].triples[qubit], frames[1].triples[qubit])
    )
    return delta > DEPENDENCE_ATOL, delta


def expectation(frame: DescriptorFrame, observable: Dict[int, str], initial: StateVector) -> float:
    """Expectation of a product of evolved per-qubit Pauli axes.

    ``observable`` maps qubit index to one of 'x', 'y', 'z'; the value is
    taken in ``initial`` against the frame's evolved operators.
    """
    if not observable:
        raise BadParams("observable must name at least one qubit")
    if initial.n != frame.n:
        raise BadParams(f"initial state has {initial.n} qubits, frame has {frame.n}")
    op = np.eye(2 ** frame.n, dtype=complex)
    for q in sorted(observable):
        ax = observable[q]
        if not 0 <= q < frame.n:
            raise BadTargets(f"qubit {q} outside register of {frame.n} qubits")
        if ax not in _PAULIS:
            raise BadParams(f"axis {ax!r} is not one of x, y, z")
        op = op @ frame.triples[q][AXES.index(ax)]
    val = complex(initial.amplitudes.conj() @ op @ initial.amplitudes)
    if abs(val.imag) > 1e-9:
        raise BadParams(f"observable expectation has imaginary residue {val.imag}")
    return float(val.real)

"""Shared generators for randomized tests (not oracles)."""

import numpy as np

from paradoxlab.circuit import Circuit, make_gate

ONE_QUBIT = ("H", "X", "Y", "Z", "I", "RX")
TWO_QUBIT = ("CNOT", "SWAP", "CH")


def random_unitary_circuit(n, depth, rng) -> Circuit:
    c = Circuit(n)
    for _ in range(depth):
        roll = rng.random()
        if n >= 3 and roll < 0.1:
            a, b, t = rng.choice(n, size=3, replace=False)
            c.ccx(int(a), int(b), int(t))
        elif n >= 2 and roll < 0.45:
            kind = TWO_QUBIT[int(rng.integers(len(TWO_QUBIT)))]
            a, b = rng.choice(n, size=2, replace=False)
            c.append_gate(make_gate(kind), [int(a), int(b)])
        else:
            kind = ONE_QUBIT[int(rng.integers(len(ONE_QUBIT)))]
            theta = float(rng.uniform(-np.pi, np.pi)) if kind == "RX" else None
            q = int(rng.integers(n))
            c.append_gate(make_gate(kind, theta), [q])
    return c

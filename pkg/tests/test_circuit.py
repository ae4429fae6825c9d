from __future__ import annotations

import numpy as np
import pytest

import oracle
import util
from paradoxlab.circuit import (
    Circuit,
    RunResult,
    circuit_unitary,
    depolarizing_kraus,
    make_gate,
    run_density,
    run_statevector,
    sample,
    validate,
)
from paradoxlab.errors import (
    BadParams,
    BadProbability,
    BadTargets,
    InvalidCircuit,
    NonUnitaryInstruction,
    TooManyQubits,
    UnknownKind,
)
from paradoxlab.qmath import DensityMatrix, maximally_mixed


SQ2 = 1 / np.sqrt(2)


class TestGates:
    def test_hadamard(self):
        np.testing.assert_allclose(make_gate("H").matrix, oracle.H, atol=1e-15)

    def test_rx_zero_is_identity(self):
        np.testing.assert_allclose(make_gate("RX", 0.0).matrix, np.eye(2), atol=1e-15)

    def test_rx_pi_is_minus_i_x(self):
        np.testing.assert_allclose(make_gate("RX", np.pi).matrix, -1j * oracle.X, atol=1e-12)

    def test_rx_matches_canonical_form(self):
        theta = 0.7
        got = make_gate("RX", theta).matrix
        np.testing.assert_allclose(got, oracle.rx(theta), atol=1e-15)

    def test_cnot_permutation(self):
        """Control is targets[0], carried in the low local bit."""
        want = np.zeros((4, 4))
        want[0, 0] = want[3, 1] = want[2, 2] = want[1, 3] = 1
        np.testing.assert_allclose(make_gate("CNOT").matrix, want, atol=1e-15)

    def test_swap_permutation(self):
        want = np.zeros((4, 4))
        want[0, 0] = want[2, 1] = want[1, 2] = want[3, 3] = 1
        np.testing.assert_allclose(make_gate("SWAP").matrix, want, atol=1e-15)

    def test_ch_applies_h_only_when_control_set(self):
        want = np.zeros((4, 4))
        want[0, 0] = want[2, 2] = 1
        want[1, 1] = want[1, 3] = want[3, 1] = SQ2
        want[3, 3] = -SQ2
        np.testing.assert_allclose(make_gate("CH").matrix, want, atol=1e-12)

    def test_ccx_flips_target_when_both_controls_set(self):
        m = make_gate("CCX").matrix
        want = np.eye(8)
        want[3, 3] = want[7, 7] = 0
        want[3, 7] = want[7, 3] = 1
        np.testing.assert_allclose(m, want, atol=1e-15)

    def test_all_gates_unitary(self):
        for kind in ("H", "X", "Y", "Z", "I", "CNOT", "SWAP", "CH", "CCX"):
            m = make_gate(kind).matrix
            np.testing.assert_allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12)
        m = make_gate("RX", 1.3).matrix
        np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(UnknownKind):
            make_gate("T")

    def test_bad_params(self):
        with pytest.raises(BadParams):
            make_gate("H", 0.3)
        with pytest.raises(BadParams):
            make_gate("RX")


class TestValidate:
    def test_clean_circuit(self):
        c = Circuit(2, 1)
        c.h(0).cx(0, 1).measure(1, 0)
        assert validate(c) == []

    def test_repeated_targets_flagged(self):
        with pytest.raises(BadTargets):
            Circuit(2).cx(0, 0)

    def test_out_of_range_flagged(self):
        with pytest.raises(BadTargets):
            Circuit(2).x(5)

    def test_clbit_range(self):
        with pytest.raises(BadTargets):
            Circuit(2, 1).measure(0, 3)

    def test_duplicate_clbit_write_reported(self):
        c = Circuit(2, 1)
        c.measure(0, 0)
        c.measure(1, 0)
        problems = validate(c)
        assert problems and "clbit" in problems[0]

    def test_qubit_ceiling(self):
        with pytest.raises(TooManyQubits):
            Circuit(7)
        with pytest.raises(InvalidCircuit):
            Circuit(0)


class TestStatevector:
    def test_hadamard(self):
        sv = run_statevector(Circuit(1).h(0))
        np.testing.assert_allclose(sv.amplitudes, [SQ2, SQ2], atol=1e-12)

    def test_bell_pair(self):
        sv = run_statevector(Circuit(2).h(0).cx(0, 1))
        np.testing.assert_allclose(sv.amplitudes, [SQ2, 0, 0, SQ2], atol=1e-12)

    def test_rejects_measurement(self):
        c = Circuit(1, 1).h(0).measure(0, 0)
        with pytest.raises(NonUnitaryInstruction):
            run_statevector(c)

    def test_rejects_reset(self):
        with pytest.raises(NonUnitaryInstruction):
            run_statevector(Circuit(1).reset(0))

    def test_matches_oracle_on_random_circuits(self):
        rng = np.random.default_rng(101)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            c = util.random_unitary_circuit(n, 12, rng)
            got = run_statevector(c).amplitudes
            want = np.zeros(2 ** n, dtype=complex)
            want[0] = 1
            for instr in c.instructions:
                want = oracle.lift(instr.gate.matrix, list(instr.targets), n) @ want
            np.testing.assert_allclose(got, want, atol=1e-10)


class TestRunDensity:
    def test_measure_plus_state(self):
        r = run_density(Circuit(1, 1).h(0).measure(0, 0))
        assert r.distribution["0"] == pytest.approx(0.5, abs=1e-12)
        assert r.distribution["1"] == pytest.approx(0.5, abs=1e-12)

    def test_distribution_sums_to_one(self):
        rng = np.random.default_rng(53)
        c = util.random_unitary_circuit(3, 10, rng)
        c.n_clbits = 3
        for q in range(3):
            c.measure(q, q)
        r = run_density(c)
        assert sum(r.distribution.values()) == pytest.approx(1.0, abs=1e-9)

    def test_bitstrings_render_clbit_zero_leftmost(self):
        c = Circuit(2, 2).x(0).measure(0, 0).measure(1, 1)
        r = run_density(c)
        assert r.distribution == {"10": 1.0}

    def test_reset_clears_mixed_qubit(self):
        c = Circuit(1)
        c.channel(depolarizing_kraus(1.0), [0])
        c.reset(0)
        r = run_density(c)
        np.testing.assert_allclose(r.final_state.mat, [[1, 0], [0, 0]], atol=1e-12)

    def test_reset_idempotent(self):
        rng = np.random.default_rng(71)
        for _ in range(5):
            base = util.random_unitary_circuit(2, 6, rng)
            once = Circuit(2, 0, list(base.instructions))
            once.reset(0)
            twice = Circuit(2, 0, list(base.instructions))
            twice.reset(0).reset(0)
            a = run_density(once).final_state
            b = run_density(twice).final_state
            assert np.max(np.abs(a.mat - b.mat)) <= 1e-12

    def test_depolarized_half_of_bell(self):
        c = Circuit(2).h(0).cx(0, 1)
        c.channel(depolarizing_kraus(1.0), [0])
        r = run_density(c)
        np.testing.assert_allclose(r.final_state.mat, np.eye(4) / 4, atol=1e-12)

    def test_reduced_states_of_bell(self):
        r = run_density(Circuit(2).h(0).cx(0, 1))
        for q in range(2):
            np.testing.assert_allclose(r.reduced_states[q].mat, np.eye(2) / 2, atol=1e-12)

    def test_backends_agree_on_random_circuits(self):
        """Terminal-measurement distribution equals squared amplitudes."""
        rng = np.random.default_rng(157)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            c = util.random_unitary_circuit(n, 15, rng)
            amps = run_statevector(c).amplitudes
            c.n_clbits = n
            for q in range(n):
                c.measure(q, q)
            dist = run_density(c).distribution
            for idx in range(2 ** n):
                key = "".join(str((idx >> q) & 1) for q in range(n))
                assert dist.get(key, 0.0) == pytest.approx(
                    float(abs(amps[idx]) ** 2), abs=1e-9
                )

    def test_initial_state_override(self):
        rho = DensityMatrix.from_matrix(np.array([[0.0, 0], [0, 1.0]]))
        c = Circuit(1).x(0)
        r = run_density(c, initial=rho)
        np.testing.assert_allclose(r.final_state.mat, [[1, 0], [0, 0]], atol=1e-12)

    def test_invalid_circuit_rejected(self):
        c = Circuit(2, 1)
        c.instructions.append(Circuit(2, 1).measure(0, 0).instructions[0])
        c.measure(1, 0)
        with pytest.raises(InvalidCircuit):
            run_density(c)


class TestSample:
    def test_certain_outcome(self):
        r = run_density(Circuit(1, 1).measure(0, 0))
        assert sample(r, 100, seed=0) == {"0": 100}

    def test_same_seed_same_counts(self):
        r = run_density(Circuit(1, 1).h(0).measure(0, 0))
        a = sample(r, 5000, seed=42)
        b = sample(r, 5000, seed=42)
        assert a == b

    def test_counts_total_and_spread(self):
        r = run_density(Circuit(1, 1).h(0).measure(0, 0))
        counts = sample(r, 10000, seed=7)
        assert sum(counts.values()) == 10000
        # 3 sigma for a fair coin over 10^4 draws
        assert abs(counts["0"] - 5000) <= 150


class TestDepolarizing:
    def test_probability_range(self):
        with pytest.raises(BadProbability):
            depolarizing_kraus(-0.1)
        with pytest.raises(BadProbability):
            depolarizing_kraus(1.1)

    def test_zero_strength_is_identity(self):
        ks = depolarizing_kraus(0.0)
        assert len(ks.operators) == 1
        np.testing.assert_allclose(ks.operators[0], np.eye(2), atol=1e-15)

    def test_full_strength_mixes_any_state(self):
        rng = np.random.default_rng(211)
        ks = depolarizing_kraus(1.0)
        for _ in range(5):
            c = Circuit(1)
            c.rx(float(rng.uniform(0, np.pi)), 0)
            c.channel(ks, [0])
            r = run_density(c)
            np.testing.assert_allclose(r.final_state.mat, np.eye(2) / 2, atol=1e-12)

    def test_partial_strength_interpolates(self):
        p = 0.3
        c = Circuit(1).x(0)
        c.channel(depolarizing_kraus(p), [0])
        r = run_density(c)
        want = (1 - p) * np.diag([0.0, 1.0]) + p * np.eye(2) / 2
        np.testing.assert_allclose(r.final_state.mat, want, atol=1e-12)


class TestSerialization:
    def build(self):
        c = Circuit(3, 2)
        c.h(0).rx(0.3, 1).cx(0, 2).ch(2, 1).swap(0, 1).ccx(0, 1, 2)
        c.channel(depolarizing_kraus(0.25), [2])
        c.reset(1)
        c.measure(0, 0).measure(2, 1)
        return c

    def test_round_trip_structure(self):
        c = self.build()
        back = Circuit.from_json(c.to_json())
        assert back.n_qubits == c.n_qubits and back.n_clbits == c.n_clbits
        assert len(back.instructions) == len(c.instructions)
        for a, b in zip(c.instructions, back.instructions):
            assert a.op == b.op
            assert a.targets == b.targets

    def test_round_trip_behavior(self):
        c = self.build()
        back = Circuit.from_json(c.to_json())
        a = run_density(c)
        b = run_density(back)
        assert np.max(np.abs(a.final_state.mat - b.final_state.mat)) <= 1e-12
        assert set(a.distribution) == set(b.distribution)

    def test_unitary_json_fields(self):
        import json

        doc = json.loads(Circuit(1).rx(0.3, 0).to_json())
        assert doc["instructions"][0] == {
            "op": "unitary",
            "kind": "RX",
            "theta": 0.3,
            "targets": [0],
        }


class TestCircuitUnitary:
    def test_composes_in_time_order(self):
        c = Circuit(1).h(0).z(0)
        u = circuit_unitary(c)
        np.testing.assert_allclose(u, oracle.Z @ oracle.H, atol=1e-12)

    def test_rejects_non_unitary_ops(self):
        with pytest.raises(NonUnitaryInstruction):
            circuit_unitary(Circuit(1).reset(0))

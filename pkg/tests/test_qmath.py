from __future__ import annotations

import numpy as np
import pytest

import oracle
from paradoxlab import qmath
from paradoxlab.errors import (
    BadTargets,
    DimensionMismatch,
    InvalidState,
    NonUnitary,
    NotTracePreserving,
)
from paradoxlab.qmath import (
    DensityMatrix,
    KrausSet,
    StateVector,
    adjoint,
    apply_kraus,
    evolve_density,
    partial_trace,
    tensor,
    trace_distance,
    vn_entropy_bits,
)


def dm(mat):
    return DensityMatrix.from_matrix(np.asarray(mat, dtype=complex))


class TestTensor:
    def test_high_order_factor_comes_first(self):
        """tensor(a, b) indexes rows as i_a * rows_b + i_b."""
        got = tensor(oracle.X, oracle.I2)
        want = np.kron(oracle.X, oracle.I2)
        np.testing.assert_allclose(got, want, atol=1e-15)
        # X on the high bit swaps the two 2x2 blocks
        assert got[0, 2] == 1 and got[2, 0] == 1 and got[0, 1] == 0

    def test_vectors(self):
        got = tensor(oracle.KET1, oracle.KET0)
        np.testing.assert_allclose(got, [0, 0, 1, 0], atol=1e-15)

    def test_hadamard_pair_on_00(self):
        amps = tensor(oracle.H, oracle.H) @ tensor(oracle.KET0, oracle.KET0)
        np.testing.assert_allclose(amps, [0.5, 0.5, 0.5, 0.5], atol=1e-12)


class TestAdjoint:
    def test_hermitian_fixed_points(self):
        for m in (oracle.H, oracle.X, oracle.Y, oracle.Z):
            np.testing.assert_allclose(adjoint(m), m, atol=1e-15)

    def test_reverses_products(self):
        rng = np.random.default_rng(7)
        a = oracle.random_unitary(4, rng)
        b = oracle.random_unitary(4, rng)
        np.testing.assert_allclose(adjoint(a @ b), adjoint(b) @ adjoint(a), atol=1e-12)


class TestStates:
    def test_statevector_norm_checked(self):
        with pytest.raises(InvalidState):
            StateVector(1, np.array([1.0, 1.0], dtype=complex))

    def test_density_invariants_checked(self):
        with pytest.raises(InvalidState):
            dm([[0.5, 0.4], [0.3, 0.5]])  # not hermitian
        with pytest.raises(InvalidState):
            dm([[0.9, 0], [0, 0.2]])  # trace off
        with pytest.raises(InvalidState):
            dm([[1.5, 0], [0, -0.5]])  # negative eigenvalue

    def test_from_statevector(self):
        sv = StateVector(1, oracle.PLUS.copy())
        rho = DensityMatrix.from_statevector(sv)
        np.testing.assert_allclose(rho.mat, oracle.density(oracle.PLUS), atol=1e-12)


class TestEvolveDensity:
    def test_bit_flip(self):
        rho = evolve_density(dm([[1, 0], [0, 0]]), oracle.X, [0])
        np.testing.assert_allclose(rho.mat, [[0, 0], [0, 1]], atol=1e-12)

    def test_bell_corners(self):
        """H then CNOT on |00> leaves 0.5 at the four corners."""
        rho = dm(oracle.density(tensor(oracle.KET0, oracle.KET0)))
        rho = evolve_density(rho, oracle.H, [0])
        cnot = np.zeros((4, 4), dtype=complex)
        cnot[0, 0] = cnot[1, 3] = cnot[3, 1] = cnot[2, 2] = 1
        rho = evolve_density(rho, cnot, [0, 1])
        for i, j in [(0, 0), (0, 3), (3, 0), (3, 3)]:
            assert rho.mat[i, j] == pytest.approx(0.5, abs=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitary):
            evolve_density(dm([[1, 0], [0, 0]]), np.array([[1, 0], [0, 2.0]]), [0])

    def test_rejects_bad_targets(self):
        rho = dm(np.eye(4) / 4)
        with pytest.raises(BadTargets):
            evolve_density(rho, np.eye(4), [0, 0])
        with pytest.raises(BadTargets):
            evolve_density(rho, oracle.X, [5])

    def test_mixed_state_invariant_under_unitary(self):
        rng = np.random.default_rng(3)
        u = oracle.random_unitary(2, rng)
        rho = evolve_density(dm(np.eye(4) / 4), u, [1])
        np.testing.assert_allclose(rho.mat, np.eye(4) / 4, atol=1e-12)

    def test_matches_oracle_on_random_circuits(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(1, 4))
            raw = oracle.random_density(2 ** n, rng)
            rho = dm(raw)
            k = int(rng.integers(1, n + 1))
            targets = list(rng.choice(n, size=k, replace=False))
            u = oracle.random_unitary(2 ** k, rng)
            got = evolve_density(rho, u, targets)
            full = oracle.lift(u, targets, n)
            np.testing.assert_allclose(got.mat, full @ raw @ full.conj().T, atol=1e-10)


class TestApplyKraus:
    def test_identity_set(self):
        ks = KrausSet((np.eye(2, dtype=complex),))
        rho = dm([[0.25, 0], [0, 0.75]])
        got = apply_kraus(rho, ks, [0])
        np.testing.assert_allclose(got.mat, rho.mat, atol=1e-12)

    def test_full_depolarize_by_hand(self):
        """The four-Pauli set at weight 1/2 sends any qubit state to I/2."""
        ops = tuple(0.5 * m for m in (oracle.I2, oracle.X, oracle.Y, oracle.Z))
        ks = KrausSet(ops)
        got = apply_kraus(dm([[0, 0], [0, 1]]), ks, [0])
        np.testing.assert_allclose(got.mat, np.eye(2) / 2, atol=1e-12)

    def test_depolarized_half_of_bell_leaves_other_marginal_mixed(self):
        bell = (tensor(oracle.KET0, oracle.KET0) + tensor(oracle.KET1, oracle.KET1)) / np.sqrt(2)
        rho = dm(oracle.density(bell))
        ops = tuple(0.5 * m for m in (oracle.I2, oracle.X, oracle.Y, oracle.Z))
        got = apply_kraus(rho, KrausSet(ops), [0])
        np.testing.assert_allclose(got.mat, np.eye(4) / 4, atol=1e-12)

    def test_trace_preservation_enforced(self):
        with pytest.raises(NotTracePreserving):
            KrausSet((oracle.X * 0.9,))

    def test_trace_preserved_on_random_sets(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            n = int(rng.integers(1, 4))
            k = int(rng.integers(1, n + 1))
            targets = list(rng.choice(n, size=k, replace=False))
            ops = oracle.random_kraus_set(2 ** k, int(rng.integers(1, 4)), rng)
            rho = dm(oracle.random_density(2 ** n, rng))
            got = apply_kraus(rho, KrausSet(tuple(ops)), targets)
            assert np.trace(got.mat) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        ks = KrausSet((np.eye(2, dtype=complex),))
        with pytest.raises(DimensionMismatch):
            apply_kraus(dm(np.eye(4) / 4), ks, [0, 1])


class TestPartialTrace:
    def test_bell_marginal_is_mixed(self):
        bell = (tensor(oracle.KET0, oracle.KET0) + tensor(oracle.KET1, oracle.KET1)) / np.sqrt(2)
        rho = dm(oracle.density(bell))
        got = partial_trace(rho, [0])
        np.testing.assert_allclose(got.mat, np.eye(2) / 2, atol=1e-12)

    def test_product_state_factors(self):
        rho = dm(np.kron(oracle.density(oracle.PLUS), oracle.density(oracle.KET1)))
        got = partial_trace(rho, [1])
        np.testing.assert_allclose(got.mat, oracle.density(oracle.PLUS), atol=1e-12)
        got0 = partial_trace(rho, [0])
        np.testing.assert_allclose(got0.mat, oracle.density(oracle.KET1), atol=1e-12)

    def test_keep_all_is_identity(self):
        rng = np.random.default_rng(5)
        raw = oracle.random_density(8, rng)
        got = partial_trace(dm(raw), [0, 1, 2])
        np.testing.assert_allclose(got.mat, raw, atol=1e-12)

    def test_matches_oracle_on_random_states(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n = int(rng.integers(2, 5))
            raw = oracle.random_density(2 ** n, rng)
            k = int(rng.integers(1, n))
            keep = sorted(rng.choice(n, size=k, replace=False))
            got = partial_trace(dm(raw), keep)
            np.testing.assert_allclose(got.mat, oracle.ptrace(raw, keep, n), atol=1e-10)

    def test_random_product_states_recover_factors(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            n = int(rng.integers(2, 5))
            factors = [oracle.random_density(2, rng) for _ in range(n)]
            joint = dm(oracle.kron_chain(factors))
            for q in range(n):
                got = partial_trace(joint, [q])
                np.testing.assert_allclose(got.mat, factors[q], atol=1e-10)

    def test_empty_keep_rejected(self):
        with pytest.raises(BadTargets):
            partial_trace(dm(np.eye(2) / 2), [])


class TestEntropy:
    def test_pure_state_zero(self):
        assert vn_entropy_bits(dm([[1, 0], [0, 0]])) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed_one_bit(self):
        assert vn_entropy_bits(dm(np.eye(2) / 2)) == pytest.approx(1.0, abs=1e-12)

    def test_three_quarters_split(self):
        got = vn_entropy_bits(dm([[0.75, 0], [0, 0.25]]))
        assert got == pytest.approx(0.8112781244591328, abs=1e-9)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            raw = oracle.random_density(4, rng)
            u = oracle.random_unitary(4, rng)
            a = vn_entropy_bits(dm(raw))
            b = vn_entropy_bits(dm(u @ raw @ u.conj().T))
            assert a == pytest.approx(b, abs=1e-9)


class TestTraceDistance:
    def test_identical_states(self):
        rho = dm(np.eye(2) / 2)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        a = dm([[1, 0], [0, 0]])
        b = dm([[0, 0], [0, 1]])
        assert trace_distance(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_zero_versus_plus(self):
        a = dm([[1, 0], [0, 0]])
        b = dm(oracle.density(oracle.PLUS))
        assert trace_distance(a, b) == pytest.approx(0.7071067811865476, abs=1e-9)

    def test_metric_properties(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            a, b, c = (dm(oracle.random_density(4, rng)) for _ in range(3))
            assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-9)
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9
            assert trace_distance(a, b) >= -1e-12


class TestMatrixFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(41)
        u = oracle.random_unitary(4, rng)
        path = tmp_path / "u.json"
        qmath.save_unitary(str(path), u)
        got = qmath.load_unitary(str(path))
        np.testing.assert_allclose(got, u, atol=1e-12)

    def test_rejects_non_unitary(self, tmp_path):
        path = tmp_path / "bad.json"
        qmath.save_unitary(str(path), np.eye(2), validate=False)
        import json

        data = json.loads(path.read_text())
        data["entries"][0] = [2.0, 0.0]
        path.write_text(json.dumps(data))
        with pytest.raises(NonUnitary):
            qmath.load_unitary(str(path))

    def test_rejects_bad_shape(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dim": 2, "entries": [[1.0, 0.0]]}')
        with pytest.raises(DimensionMismatch):
            qmath.load_unitary(str(path))

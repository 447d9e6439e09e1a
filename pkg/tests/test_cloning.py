import itertools

import numpy as np
import pytest

from qmimo import (
    DensityMatrix,
    clone_1to2,
    clone_1toM,
    clone_fidelity_law,
    fidelity_pure,
    haar_state,
    orthogonal_complement,
    sym_projector,
)
from qmimo.linalg import basis_state


def dicke_vector(n_qubits: int, n_ones: int) -> np.ndarray:
    """Equal superposition of all weight-n_ones basis states (qubit 0 most
    significant)."""
    vec = np.zeros(2**n_qubits, dtype=np.complex128)
    for ones in itertools.combinations(range(n_qubits), n_ones):
        idx = sum(1 << (n_qubits - 1 - q) for q in ones)
        vec[idx] = 1.0
    return vec / np.linalg.norm(vec)


class TestFidelityLaw:
    @pytest.mark.parametrize(
        "n_clones,expected",
        [(1, 1.0), (2, 5 / 6), (3, 7 / 9), (4, 3 / 4), (8, 17 / 24)],
    )
    def test_exact_fractions(self, n_clones, expected):
        assert clone_fidelity_law(n_clones) == pytest.approx(expected, abs=1e-15)

    def test_monotone_decreasing_to_two_thirds(self):
        values = [clone_fidelity_law(m) for m in range(1, 40)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] > 2 / 3

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            clone_fidelity_law(0)


class TestCloneOneToTwo:
    def test_explicit_structure(self, gen):
        psi = haar_state(2, gen)
        perp = orthogonal_complement(psi)
        pair = np.kron(psi.amplitudes, psi.amplitudes)
        cross = np.kron(psi.amplitudes, perp.amplitudes) + np.kron(
            perp.amplitudes, psi.amplitudes
        )
        expected = (2 / 3) * np.outer(pair, pair.conj()) + (1 / 6) * np.outer(
            cross, cross.conj()
        )
        np.testing.assert_allclose(clone_1to2(psi).joint.entries, expected, atol=1e-14)

    def test_agrees_with_general_cloner(self, gen):
        psi = haar_state(2, gen)
        np.testing.assert_allclose(
            clone_1to2(psi).joint.entries, clone_1toM(psi, 2).joint.entries, atol=1e-13
        )

    def test_marginal_decomposition(self, gen):
        # single-clone state: 5/6 psi + 1/6 perp
        psi = haar_state(2, gen)
        marg = clone_1to2(psi).marginal(0)
        perp = orthogonal_complement(psi)
        expected = (5 / 6) * psi.projector() + (1 / 6) * perp.projector()
        np.testing.assert_allclose(marg.entries, expected, atol=1e-13)


class TestCloneOneToM:
    @pytest.mark.parametrize("n_clones", [1, 2, 3, 4])
    def test_marginal_fidelity_law(self, n_clones, gen):
        for _ in range(5):
            psi = haar_state(2, gen)
            batch = clone_1toM(psi, n_clones)
            for k in range(n_clones):
                got = fidelity_pure(batch.marginal(k), psi)
                assert got == pytest.approx(clone_fidelity_law(n_clones), abs=1e-12)

    def test_supported_on_symmetric_subspace(self, gen):
        psi = haar_state(2, gen)
        joint = clone_1toM(psi, 3).joint.entries
        proj = sym_projector(3)
        np.testing.assert_allclose(proj @ joint @ proj, joint, atol=1e-12)

    def test_dicke_spectrum_for_basis_input(self):
        # with |0> input the joint state is diagonal in the Dicke basis with
        # weights 2 (M - j) / (M (M + 1)) for j excitations
        for n_clones in (2, 3, 4):
            joint = clone_1toM(basis_state(0, 2), n_clones).joint.entries
            for j in range(n_clones + 1):
                vec = dicke_vector(n_clones, j)
                expected = 2 * (n_clones - j) / (n_clones * (n_clones + 1))
                assert np.vdot(vec, joint @ vec).real == pytest.approx(expected, abs=1e-12)
            # off-diagonal Dicke blocks vanish
            v0, v1 = dicke_vector(n_clones, 0), dicke_vector(n_clones, 1)
            assert abs(np.vdot(v0, joint @ v1)) < 1e-13

    def test_unitary_covariance(self, gen):
        # cloning commutes with collective single-qubit rotations
        psi = haar_state(2, gen)
        phi = haar_state(2, gen)
        # unitary sending psi to phi (Householder-free construction)
        u = np.outer(phi.amplitudes, psi.amplitudes.conj()) + np.outer(
            orthogonal_complement(phi).amplitudes,
            orthogonal_complement(psi).amplitudes.conj(),
        )
        big_u = np.kron(u, u)
        rotated = big_u @ clone_1to2(psi).joint.entries @ big_u.conj().T
        np.testing.assert_allclose(rotated, clone_1to2(phi).joint.entries, atol=1e-13)

    def test_trace_one(self, gen):
        psi = haar_state(2, gen)
        for n_clones in (2, 5, 8):
            joint = clone_1toM(psi, n_clones).joint
            assert np.trace(joint.entries).real == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self, gen):
        psi = haar_state(2, gen)
        with pytest.raises(ValueError):
            clone_1toM(psi, 0)
        with pytest.raises(ValueError):
            clone_1toM(psi, 9)

import numpy as np
import pytest

from qmimo import (
    Branch,
    BranchEnsemble,
    ChannelParams,
    CrosstalkStage,
    DensityMatrix,
    DepolarizeStage,
    EraseStage,
    PipelineOrderError,
    apply_pipeline,
    crosstalk_dilation,
    crosstalk_mixture,
    depolarize,
    erase,
    fidelity_pure,
    haar_state,
    maximally_mixed,
    mode_fidelity,
    partial_trace,
    tensor_product,
)

from conftest import random_density


def product_ensemble(gen, n_modes):
    state = random_density(gen, 2)
    for _ in range(n_modes - 1):
        state = tensor_product(state, random_density(gen, 2))
    return BranchEnsemble.from_density(state, n_modes)


class TestChannelParams:
    def test_valid(self):
        p = ChannelParams(0.2, 0.3, 0.4)
        assert (p.eta, p.eps, p.lam) == (0.2, 0.3, 0.4)

    @pytest.mark.parametrize("kwargs", [
        {"eta": -0.1, "eps": 0.0, "lam": 0.0},
        {"eta": 0.0, "eps": 1.5, "lam": 0.0},
        {"eta": 0.0, "eps": 0.0, "lam": float("nan")},
    ])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            ChannelParams(**kwargs)


class TestBranchEnsemble:
    def test_from_density(self, gen):
        ens = product_ensemble(gen, 2)
        assert len(ens.branches) == 1
        assert ens.branches[0].prob == 1.0
        assert ens.branches[0].erased == 0
        assert ens.total_prob() == pytest.approx(1.0)

    def test_branch_position_skips_erased(self):
        br = Branch(prob=1.0, erased=0b010, state=DensityMatrix(np.eye(4) / 4))
        assert br.is_erased(1)
        assert not br.is_erased(0)
        assert br.position(0) == 0
        assert br.position(2) == 1

    def test_rejects_probability_overflow(self, gen):
        rho = random_density(gen, 2)
        with pytest.raises(ValueError):
            BranchEnsemble(1, (Branch(0.7, 0, rho), Branch(0.7, 0, rho)))

    def test_rejects_dim_mask_mismatch(self, gen):
        with pytest.raises(ValueError):
            BranchEnsemble(2, (Branch(1.0, 0, random_density(gen, 2)),))


class TestDepolarize:
    def test_lambda_zero_is_identity(self, gen):
        ens = product_ensemble(gen, 2)
        out = depolarize(ens, 0.0, 0)
        np.testing.assert_allclose(
            out.branches[0].state.entries, ens.branches[0].state.entries, atol=1e-14
        )

    def test_lambda_one_replaces_marginal(self, gen):
        ens = product_ensemble(gen, 2)
        out = depolarize(ens, 1.0, 0)
        marg = partial_trace(out.branches[0].state, [0], [2, 2])
        np.testing.assert_allclose(marg.entries, np.eye(2) / 2, atol=1e-12)
        # the other mode is untouched
        other = partial_trace(out.branches[0].state, [1], [2, 2])
        np.testing.assert_allclose(
            other.entries,
            partial_trace(ens.branches[0].state, [1], [2, 2]).entries,
            atol=1e-12,
        )

    def test_fidelity_shrinks_linearly(self, gen):
        psi = haar_state(2, gen)
        ens = BranchEnsemble.from_density(DensityMatrix.from_pure(psi), 1)
        for lam in (0.0, 0.3, 0.7, 1.0):
            out = depolarize(ens, lam, 0)
            want = (1 - lam) * 1.0 + lam * 0.5
            assert mode_fidelity(out, 0, psi) == pytest.approx(want, abs=1e-12)

    def test_skips_erased_mode(self, gen):
        ens = erase(product_ensemble(gen, 2), 1.0, 0)
        out = depolarize(ens, 0.5, 0)
        assert out.branches[0].state.entries == pytest.approx(
            ens.branches[0].state.entries
        )


class TestErase:
    def test_branch_split(self, gen):
        ens = erase(product_ensemble(gen, 2), 0.3, 1)
        assert len(ens.branches) == 2
        kept, lost = ens.branches
        assert kept.prob == pytest.approx(0.7)
        assert lost.prob == pytest.approx(0.3)
        assert kept.erased == 0
        assert lost.erased == 0b010
        assert kept.state.dim == 4
        assert lost.state.dim == 2

    def test_eps_zero_no_split(self, gen):
        ens = erase(product_ensemble(gen, 2), 0.0, 0)
        assert len(ens.branches) == 1
        assert ens.branches[0].erased == 0

    def test_eps_one_total_loss(self, gen):
        ens = erase(product_ensemble(gen, 2), 1.0, 0)
        assert len(ens.branches) == 1
        assert ens.branches[0].erased == 0b001
        assert ens.branches[0].state.dim == 2

    def test_erasing_last_survivor(self, gen):
        ens = erase(erase(product_ensemble(gen, 2), 1.0, 0), 1.0, 1)
        assert ens.branches[0].state.dim == 1
        assert ens.branches[0].erased == 0b011

    def test_erased_mode_fidelity_zero(self, gen):
        psi = haar_state(2, gen)
        ens = BranchEnsemble.from_density(DensityMatrix.from_pure(psi), 1)
        out = erase(ens, 0.4, 0)
        assert mode_fidelity(out, 0, psi) == pytest.approx(0.6, abs=1e-12)

    def test_repeated_erasure_compounds(self, gen):
        once = erase(product_ensemble(gen, 2), 0.5, 0)
        twice = erase(once, 0.5, 0)
        # already-erased branch passes through; the survivor splits again
        assert [b.erased for b in twice.branches] == [0, 1, 1]
        assert twice.branches[0].prob == pytest.approx(0.25)
        assert twice.total_prob() == pytest.approx(1.0)


class TestCrosstalk:
    def test_eta_zero_identity(self, gen):
        rho = random_density(gen, 4)
        out = crosstalk_mixture(rho, 0.0, (0,), (1,))
        np.testing.assert_array_equal(out.entries, rho.entries)

    def test_eta_one_swaps_product(self, gen):
        a, b = random_density(gen, 2), random_density(gen, 2)
        out = crosstalk_mixture(tensor_product(a, b), 1.0, (0,), (1,))
        np.testing.assert_allclose(out.entries, tensor_product(b, a).entries, atol=1e-14)

    def test_composition_rule(self, gen):
        # two swaps in a row compose to eta1 + eta2 - 2 eta1 eta2
        rho = random_density(gen, 4)
        for eta1, eta2 in [(0.2, 0.5), (0.9, 0.3), (0.5, 0.5)]:
            twice = crosstalk_mixture(
                crosstalk_mixture(rho, eta1, (0,), (1,)), eta2, (0,), (1,)
            )
            combined = eta1 + eta2 - 2 * eta1 * eta2
            once = crosstalk_mixture(rho, combined, (0,), (1,))
            np.testing.assert_allclose(twice.entries, once.entries, atol=1e-13)

    def test_block_swap(self, gen):
        a, b = random_density(gen, 4), random_density(gen, 4)
        joint = tensor_product(a, b)  # modes 0,1 hold a; modes 2,3 hold b
        out = crosstalk_mixture(joint, 1.0, (0, 1), (2, 3))
        np.testing.assert_allclose(out.entries, tensor_product(b, a).entries, atol=1e-14)

    def test_dilation_matches_mixture(self, gen):
        for _ in range(10):
            rho = random_density(gen, 4)
            eta = float(gen.random())
            np.testing.assert_allclose(
                crosstalk_dilation(rho, eta).entries,
                crosstalk_mixture(rho, eta, (0,), (1,)).entries,
                atol=1e-13,
            )


class TestPipeline:
    def test_crosstalk_after_erasure_rejected(self, gen):
        ens = product_ensemble(gen, 2)
        stages = [EraseStage(0.5, 0), CrosstalkStage(0.3, (0,), (1,))]
        with pytest.raises(PipelineOrderError):
            apply_pipeline(ens, stages)

    def test_erase_then_depolarize_semantics(self, gen):
        # depolarizing acts only on the surviving branch
        psi = haar_state(2, gen)
        ens = BranchEnsemble.from_density(DensityMatrix.from_pure(psi), 1)
        out = apply_pipeline(ens, [EraseStage(0.3, 0), DepolarizeStage(0.4, 0)])
        want = (1 - 0.3) * ((1 - 0.4) * 1.0 + 0.4 * 0.5)
        assert mode_fidelity(out, 0, psi) == pytest.approx(want, abs=1e-12)

    def test_full_2x2_matches_hand_formula(self, gen):
        # own-stream fidelity through swap -> erasure -> depolarizing
        psi = haar_state(2, gen)
        joint = tensor_product(DensityMatrix.from_pure(psi), maximally_mixed())
        for eta, eps, lam in [(0.2, 0.1, 0.3), (0.8, 0.0, 0.0), (0.5, 0.5, 0.5)]:
            out = apply_pipeline(
                BranchEnsemble.from_density(joint, 2),
                [
                    CrosstalkStage(eta, (0,), (1,)),
                    EraseStage(eps, 0),
                    EraseStage(eps, 1),
                    DepolarizeStage(lam, 0),
                    DepolarizeStage(lam, 1),
                ],
            )
            want = 0.5 * (1 - eps) * (1 + (1 - eta) * (1 - lam))
            assert mode_fidelity(out, 0, psi) == pytest.approx(want, abs=1e-12)

    def test_mode_fidelity_ignores_other_modes(self, gen):
        psi = haar_state(2, gen)
        joint = tensor_product(DensityMatrix.from_pure(psi), random_density(gen, 2))
        ens = BranchEnsemble.from_density(joint, 2)
        assert mode_fidelity(ens, 0, psi) == pytest.approx(1.0, abs=1e-12)

    def test_fidelity_against_maximally_mixed_mode(self, gen):
        psi = haar_state(2, gen)
        joint = tensor_product(DensityMatrix.from_pure(psi), maximally_mixed())
        ens = BranchEnsemble.from_density(joint, 2)
        assert mode_fidelity(ens, 1, psi) == pytest.approx(0.5, abs=1e-12)

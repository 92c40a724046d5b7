"""Propose-accept/reject layer: proposal decompositions, acceptance rules,
energy-dependent tables, and the discriminant decomposition
Q = (G (.) A) (.) S + R."""

import numpy as np
import pytest

from parwalk.errors import (
    BadWeights,
    DimensionMismatch,
    FunctionalEquationViolated,
    NotSymmetric,
    ParwalkError,
    WeightMismatch,
)
from parwalk.markov import GibbsModel, gibbs_distribution, discriminant
from parwalk.parchain import (
    ProposalDecomposition,
    acceptance_matrix,
    compress,
    compress_dense,
    custom_rule,
    decompose_discriminant,
    g_matrix,
    ga_matrix,
    glauber,
    hypercube_proposal,
    metropolis,
    proposal_from_permutations,
    r_matrix,
    rejection_matrix,
    transition_matrix,
)

LN2 = np.log(2.0)
RT = np.sqrt(0.5)


def two_state_model():
    return GibbsModel(energies=np.array([0, 1]), levels=2, beta=LN2)


def swap_proposal():
    return ProposalDecomposition(perms=(np.array([1, 0]),), weights=np.array([1.0]))


def cycle_pair_proposal():
    # 3-cycle plus its inverse with equal weights: symmetric but not involutions
    return proposal_from_permutations(
        np.array([0.5, 0.5]), (np.array([1, 2, 0]), np.array([2, 0, 1]))
    )


class TestProposalDecomposition:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(BadWeights):
            ProposalDecomposition(
                perms=(np.array([1, 0]), np.array([0, 1])),
                weights=np.array([0.5, 0.4]),
            )

    def test_weight_count_must_match_perm_count(self):
        with pytest.raises(WeightMismatch):
            ProposalDecomposition(perms=(np.array([1, 0]),), weights=np.array([0.5, 0.5]))

    def test_weights_must_be_positive(self):
        with pytest.raises(BadWeights):
            ProposalDecomposition(
                perms=(np.array([1, 0]), np.array([0, 1])),
                weights=np.array([1.2, -0.2]),
            )

    def test_perms_must_be_bijections(self):
        with pytest.raises(ParwalkError):
            ProposalDecomposition(perms=(np.array([0, 0]),), weights=np.array([1.0]))

    def test_asymmetric_mix_rejected(self):
        # a lone 3-cycle gives S = Pi which is not symmetric
        with pytest.raises(NotSymmetric):
            proposal_from_permutations(np.array([1.0]), (np.array([1, 2, 0]),))

    def test_cycle_pair_is_symmetric_but_not_involutive(self):
        prop = cycle_pair_proposal()
        assert not prop.all_involutions
        s = prop.assemble()
        assert np.abs(s - s.T).max() < 1e-15

    def test_assemble_doubly_stochastic(self):
        s = hypercube_proposal(3).assemble()
        assert np.abs(s.sum(axis=0) - 1.0).max() < 1e-15
        assert np.abs(s.sum(axis=1) - 1.0).max() < 1e-15

    def test_hypercube_proposal_structure(self):
        prop = hypercube_proposal(3)
        assert prop.kappa == 3
        assert prop.all_involutions
        s = prop.assemble()
        # single-bit-flip adjacency: eigenvalues (1 - 2k/3) with binomial
        # multiplicity
        eigs = np.sort(np.linalg.eigvalsh(s))
        expect = np.sort(np.array([1.0, -1.0] + [1 / 3] * 3 + [-1 / 3] * 3))
        assert np.abs(eigs - expect).max() < 1e-12

    def test_inverses(self):
        prop = cycle_pair_proposal()
        for p, pinv in zip(prop.perms, prop.inverses):
            assert np.array_equal(p[pinv], np.arange(3))


class TestAcceptanceRules:
    def test_metropolis_values(self):
        rule = metropolis()
        assert rule.f(0, LN2) == 1.0
        assert abs(rule.f(1, LN2) - 0.5) < 1e-15
        assert rule.f(-1, LN2) == 1.0

    def test_glauber_values(self):
        rule = glauber()
        assert abs(rule.f(0, LN2) - 0.5) < 1e-15
        assert abs(rule.f(1, LN2) - 1.0 / 3.0) < 1e-15
        assert abs(rule.f(-1, LN2) - 2.0 / 3.0) < 1e-15

    def test_table_symmetrized_functional_equation(self):
        for rule in (metropolis(), glauber()):
            vals = rule.table(0.7, 5)
            deltas = np.arange(-4, 5)
            sym = np.exp(0.35 * deltas) * vals
            assert np.abs(sym - sym[::-1]).max() < 1e-12

    def test_scaled_metropolis_is_valid(self):
        rule = custom_rule(lambda d, b: 0.5 * min(1.0, np.exp(-b * d)))
        vals = rule.table(1.0, 3)
        assert vals.max() <= 0.5

    def test_functional_equation_violation(self):
        rule = custom_rule(lambda d, b: 0.7)
        with pytest.raises(FunctionalEquationViolated):
            rule.table(1.0, 3)

    def test_range_violation(self):
        rule = custom_rule(lambda d, b: 2.0 * np.exp(-0.5 * b * d))
        with pytest.raises(ParwalkError):
            rule.table(1.0, 2)


class TestEnergyTables:
    def test_g_table_two_state(self):
        table = g_matrix(two_state_model()).compressed
        assert abs(table[1, 0] - np.sqrt(2.0)) < 1e-15
        assert abs(table[0, 1] - RT) < 1e-15
        assert np.allclose(np.diag(table), 1.0)

    def test_ga_table_two_state_metropolis(self):
        table = ga_matrix(two_state_model(), metropolis()).compressed
        assert np.abs(table - np.array([[1.0, RT], [RT, 1.0]])).max() < 1e-15

    def test_ga_table_symmetric_for_any_valid_rule(self):
        model = GibbsModel(energies=np.array([0, 3, 1, 2]), levels=4, beta=1.3)
        for rule in (metropolis(), glauber()):
            table = ga_matrix(model, rule).compressed
            assert np.abs(table - table.T).max() < 1e-12

    def test_ga_diag_is_f0(self):
        table = ga_matrix(two_state_model(), glauber()).compressed
        assert np.allclose(np.diag(table), 0.5)

    def test_reject_table_two_state_metropolis(self):
        table = rejection_matrix(two_state_model(), metropolis()).compressed
        assert np.abs(table - np.array([[0.0, 0.0], [0.5, 0.0]])).max() < 1e-15

    def test_expand_matches_function(self):
        model = GibbsModel(energies=np.array([2, 0, 1, 2]), levels=3, beta=0.9)
        mat = ga_matrix(model, glauber())
        dense = mat.expand(model.energies)
        e = model.energies
        for y in range(4):
            for x in range(4):
                assert abs(dense[y, x] - mat.compressed[e[y], e[x]]) < 1e-15

    def test_compress_dense_round_trip(self):
        model = GibbsModel(energies=np.array([2, 0, 1, 2]), levels=3, beta=0.9)
        mat = ga_matrix(model, metropolis())
        dense = mat.expand(model.energies)
        table = compress_dense(dense, model.energies, model.levels)
        assert np.abs(table - mat.compressed).max() < 1e-15

    def test_compress_dense_rejects_inconsistent(self):
        dense = np.array([[0.1, 0.2], [0.3, 0.4]])
        with pytest.raises(DimensionMismatch):
            compress_dense(dense, np.array([0, 0]), 1)

    def test_compress_norm_bound(self):
        model = GibbsModel(energies=np.array([0, 1, 2, 3]), levels=4, beta=0.6)
        table = compress(ga_matrix(model, metropolis()))
        spec = np.linalg.norm(table, 2)
        l1 = np.abs(table).sum(axis=0).max()
        linf = np.abs(table).sum(axis=1).max()
        assert spec <= np.sqrt(l1 * linf) + 1e-9
        assert np.sqrt(l1 * linf) <= model.levels + 1e-9


class TestChainAssembly:
    def test_acceptance_matrix_two_state(self):
        a = acceptance_matrix(two_state_model(), metropolis())
        assert np.abs(a - np.array([[1.0, 1.0], [0.5, 1.0]])).max() < 1e-15

    def test_acceptance_diag_forced_one(self):
        a = acceptance_matrix(two_state_model(), glauber())
        assert np.all(np.diag(a) == 1.0)

    def test_transition_two_state(self):
        a = acceptance_matrix(two_state_model(), metropolis())
        p = transition_matrix(swap_proposal(), a)
        assert np.abs(p.entries - np.array([[0.5, 1.0], [0.5, 0.0]])).max() < 1e-15

    def test_r_matrix_two_state(self):
        a = acceptance_matrix(two_state_model(), metropolis())
        r = r_matrix(swap_proposal(), a)
        assert np.abs(r - np.diag([0.5, 0.0])).max() < 1e-15

    def test_r_matrix_is_diagonal_for_cycles(self):
        model = GibbsModel(energies=np.array([0, 2, 1]), levels=3, beta=1.1)
        prop = cycle_pair_proposal()
        a = acceptance_matrix(model, glauber())
        r = r_matrix(prop, a)
        assert np.abs(r - np.diag(np.diag(r))).max() == 0.0

    def test_shape_guards(self):
        a = acceptance_matrix(two_state_model(), metropolis())
        with pytest.raises(DimensionMismatch):
            transition_matrix(hypercube_proposal(2), a)
        with pytest.raises(DimensionMismatch):
            r_matrix(hypercube_proposal(2), a)


class TestDecomposition:
    def test_two_state_oracle(self):
        dec = decompose_discriminant(two_state_model(), swap_proposal(), metropolis())
        assert np.abs(dec.ga - np.array([[1.0, RT], [RT, 1.0]])).max() < 1e-14
        assert np.abs(dec.r - np.diag([0.5, 0.0])).max() < 1e-14
        assert np.abs(dec.q - np.array([[0.5, RT], [RT, 0.0]])).max() < 1e-14
        assert dec.deviation < 1e-14

    def test_glauber_diagonal_cancellation(self):
        # the f(0) diagonal of GA and the rejection diagonal jointly
        # reproduce q_xx even though neither matches p_xx alone
        model = GibbsModel(energies=np.array([0, 2, 1, 1]), levels=3, beta=0.8)
        prop = hypercube_proposal(2)
        dec = decompose_discriminant(model, prop, glauber())
        assert dec.deviation < 1e-14

    def test_cycle_pair_proposal_decomposes(self):
        model = GibbsModel(energies=np.array([0, 2, 1]), levels=3, beta=1.1)
        dec = decompose_discriminant(model, cycle_pair_proposal(), metropolis())
        assert dec.deviation < 1e-12

    def test_composed_equals_independent_discriminant(self):
        model = GibbsModel(energies=np.array([1, 0, 3, 2]), levels=4, beta=0.5)
        prop = hypercube_proposal(2)
        rule = glauber()
        dec = decompose_discriminant(model, prop, rule)
        p = transition_matrix(prop, acceptance_matrix(model, rule))
        q = discriminant(p, gibbs_distribution(model))
        assert np.abs(dec.q - q).max() == 0.0

    @pytest.mark.parametrize("beta", [0.0, 0.5, 2.0])
    @pytest.mark.parametrize("kind", ["metropolis", "glauber"])
    def test_random_energy_sweep(self, beta, kind):
        rng = np.random.default_rng(17)
        rule = metropolis() if kind == "metropolis" else glauber()
        for n in (2, 3):
            energies = rng.integers(0, 5, size=1 << n)
            model = GibbsModel(energies=energies, levels=5, beta=beta)
            dec = decompose_discriminant(model, hypercube_proposal(n), rule)
            assert dec.deviation < 1e-12

"""Walk eigenphase extraction, the arccos phase mapping, and the
quadratic gap lower bound."""

import math

import numpy as np
import pytest

from parwalk.blockenc import ZeroIsometry, build_ancilla_efficient_Q
from parwalk.errors import BoundViolated, SpectrumMismatch, SpectrumOutOfRange
from parwalk.markov import (
    GibbsModel,
    StochasticMatrix,
    discriminant,
    gibbs_distribution,
    lazy,
    qsample,
    spectral_gaps,
    stationary_distribution,
)
from parwalk.parchain import (
    acceptance_matrix,
    decompose_discriminant,
    hypercube_proposal,
    metropolis,
    transition_matrix,
)
from parwalk.spectra import (
    eigenbasis_embedding,
    phase_gap_check,
    walk_spectrum,
)
from parwalk.szegedy import par_walk, quantum_enhanced_walk, standard_walk

TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def two_state():
    model = GibbsModel(energies=np.array([0, 1]), levels=2, beta=math.log(2.0))
    prop = hypercube_proposal(1)
    return model, prop


# ------------------------------------------------------------ the embedding


def test_embedding_identity_spectrum():
    emb = eigenbasis_embedding(np.eye(3))
    assert np.abs(emb.thetas).max() == 0.0
    spec = walk_spectrum(emb, np.eye(3))
    assert spec.phase_gap == 0.0
    assert np.abs(spec.measured).max() == 0.0
    assert spec.b_perp_dim == 3  # the three partner directions


def test_embedding_single_state_half_turn():
    q = np.zeros((1, 1))
    emb = eigenbasis_embedding(q)
    spec = walk_spectrum(emb, q)
    assert abs(spec.phase_gap - math.pi / 2.0) < 1e-12
    assert spec.b_perp_dim == 0
    report = phase_gap_check(spec, 1.0)
    assert report.holds and abs(report.lower_bound - math.sqrt(2.0)) < 1e-12


def test_embedding_verifies_its_own_relations():
    model, prop = two_state()
    dec = decompose_discriminant(model, prop, metropolis())
    emb = eigenbasis_embedding(dec.q)
    n = 2
    assert np.abs(emb.t.T @ emb.t - np.eye(n)).max() < 1e-12
    assert np.abs(emb.t.T @ emb.s @ emb.t - dec.q).max() < 1e-12
    assert np.abs(emb.u @ emb.u.T - np.eye(2 * n)).max() < 1e-12


def test_embedding_rejects_out_of_range_spectra():
    with pytest.raises(SpectrumOutOfRange):
        eigenbasis_embedding(2.0 * np.eye(2))
    # periodic edge: beta = 0 two-state chain has Q with eigenvalue -1
    with pytest.raises(SpectrumOutOfRange, match="lazy"):
        eigenbasis_embedding(np.array([[0.0, 1.0], [1.0, 0.0]]))


# ------------------------------------------------------- phase mapping, gap


def test_two_state_gap_across_constructions():
    model, prop = two_state()
    rule = metropolis()
    dec = decompose_discriminant(model, prop, rule)
    a = acceptance_matrix(model, rule)
    p = transition_matrix(prop, a)
    walks = [
        standard_walk(p),
        par_walk(prop, a),
        quantum_enhanced_walk(np.array([[0.0, 1.0], [1.0, 0.0]]), a),
        eigenbasis_embedding(dec.q),
    ]
    for walk in walks:
        spec = walk_spectrum(walk, dec.q)
        assert abs(spec.phase_gap - TWO_THIRDS_PI) < 1e-10
        report = phase_gap_check(spec, 1.5)
        assert report.holds
        assert abs(report.predicted - TWO_THIRDS_PI) < 1e-12
        assert abs(report.lower_bound - math.sqrt(3.0)) < 1e-12


def test_standard_walk_complement_is_trivial():
    model, prop = two_state()
    rule = metropolis()
    p = transition_matrix(prop, acceptance_matrix(model, rule))
    dec = decompose_discriminant(model, prop, rule)
    spec = walk_spectrum(standard_walk(p), dec.q)
    assert spec.b_perp_dim == 1  # 4-dim walk, 3 matched phases
    assert np.abs(spec.measured - spec.predicted).max() < 1e-10


def test_block_encoding_pair_spectrum():
    model, prop = two_state()
    rule = metropolis()
    be = build_ancilla_efficient_Q(model, prop, rule)
    dec = decompose_discriminant(model, prop, rule)
    iso = ZeroIsometry(be.sys_dim, be.anc_qubits)
    spec = walk_spectrum((be, iso), dec.q / be.gamma)
    lam = np.linalg.eigvalsh(dec.q)[::-1] / be.gamma
    assert abs(spec.phase_gap - math.acos(lam[0])) < 1e-9
    assert np.abs(spec.measured - np.arccos(lam)).max() < 1e-9


def test_lazy_cube_spectrum_and_bound():
    # beta = 0 proposal walk on the 2-cube is periodic; its lazy version has
    # discriminant eigenvalues {1, 1/2, 1/2, 0}
    model = GibbsModel(energies=np.array([0, 1, 1, 2]), levels=3, beta=0.0)
    prop = hypercube_proposal(2)
    a = acceptance_matrix(model, metropolis())
    p = transition_matrix(prop, a)
    gaps = spectral_gaps(discriminant(p, gibbs_distribution(model)))
    assert gaps.periodic
    p_lazy = lazy(p)
    q_lazy = discriminant(p_lazy, gibbs_distribution(model))
    lam = np.sort(np.linalg.eigvalsh(q_lazy))
    assert np.abs(lam - np.array([0.0, 0.5, 0.5, 1.0])).max() < 1e-12

    emb = eigenbasis_embedding(q_lazy)
    spec = walk_spectrum(emb, q_lazy)
    assert abs(spec.phase_gap - math.pi / 3.0) < 1e-10
    lazy_gaps = spectral_gaps(q_lazy)
    report = phase_gap_check(spec, lazy_gaps.delta_plus)
    assert report.holds
    assert spec.phase_gap >= math.sqrt(2.0 * lazy_gaps.delta_plus) - 1e-12


def test_walk_fixed_point_is_stationary_qsample():
    model = GibbsModel(energies=np.array([0, 1, 1, 2]), levels=3, beta=0.8)
    prop = hypercube_proposal(2)
    a = acceptance_matrix(model, metropolis())
    p = transition_matrix(prop, a)
    walk = standard_walk(p)
    psi = walk.t @ qsample(stationary_distribution(p))
    assert np.linalg.norm(walk.w @ psi - psi) < 1e-9


def test_cube_phase_mapping_matches_predictions():
    model = GibbsModel(
        energies=np.array([0, 1, 1, 2, 1, 2, 2, 3]), levels=4, beta=1.0
    )
    prop = hypercube_proposal(3)
    a = acceptance_matrix(model, metropolis())
    p = transition_matrix(prop, a)
    dec = decompose_discriminant(model, prop, metropolis())
    spec = walk_spectrum(standard_walk(p), dec.q)
    assert np.abs(spec.measured - spec.predicted).max() <= 1e-8
    gaps = spectral_gaps(dec.q)
    report = phase_gap_check(spec, gaps.delta_plus)
    assert report.holds


# ------------------------------------------------------------------ failures


def test_mismatched_reference_spectrum_raises():
    model, prop = two_state()
    p = transition_matrix(prop, acceptance_matrix(model, metropolis()))
    walk = standard_walk(p)
    wrong_q = np.full((2, 2), 0.5)  # eigenvalues {1, 0}: phases pi/2 missing
    with pytest.raises(SpectrumMismatch):
        walk_spectrum(walk, wrong_q)


def test_phase_gap_check_flags_wrong_gap():
    model, prop = two_state()
    dec = decompose_discriminant(model, prop, metropolis())
    spec = walk_spectrum(eigenbasis_embedding(dec.q), dec.q)
    with pytest.raises(BoundViolated):
        phase_gap_check(spec, 0.5)  # arccos(0.5) != the walk's 2pi/3
    with pytest.raises(BoundViolated):
        phase_gap_check(spec, -0.1)


def test_walk_spectrum_input_guards():
    with pytest.raises(SpectrumOutOfRange):
        walk_spectrum(np.eye(2) * 2.0, np.eye(2))  # not unitary
    with pytest.raises(TypeError):
        walk_spectrum("walk", np.eye(2))
    with pytest.raises(SpectrumOutOfRange):
        walk_spectrum(np.eye(2), 3.0 * np.eye(2))  # reference out of range


def test_delta_plus_one_keeps_quadratic_bound():
    entries = np.full((2, 2), 0.5)
    p = StochasticMatrix(entries)
    q = discriminant(p, stationary_distribution(p))
    spec = walk_spectrum(eigenbasis_embedding(q), q)
    assert abs(spec.phase_gap - math.pi / 2.0) < 1e-10
    report = phase_gap_check(spec, 1.0)
    assert report.holds
    assert report.lower_bound == math.sqrt(2.0) and spec.phase_gap > report.lower_bound

"""Ancilla-efficient block encodings of propose-accept/reject chain
discriminants, with Szegedy-walk oracles and gap-amplification checks."""

from .blockenc import (
    BlockEncoding,
    ZeroIsometry,
    build_ancilla_efficient_Q,
    combine_two,
    compressed_hadamard_be,
    extract_block,
    hadamard_be,
    lcu,
    reflectionize,
    svd_block_encoding,
    unitary_encoding,
    verify_encoding,
)
from .cnf import CnfFormula, gibbs_from_cnf, load_dimacs, parse_dimacs
from .errors import ParwalkError
from .markov import (
    Distribution,
    GibbsModel,
    StochasticMatrix,
    check_detailed_balance,
    discriminant,
    gibbs_distribution,
    lazy,
    qsample,
    spectral_gaps,
    stationary_distribution,
)
from .models import build_cnf, build_hypercube
from .parchain import (
    AcceptanceRule,
    ProposalDecomposition,
    acceptance_matrix,
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
from .spectra import eigenbasis_embedding, phase_gap_check, walk_spectrum
from .szegedy import (
    ancilla_comparison,
    comparison_counts,
    par_walk,
    quantum_enhanced_walk,
    standard_walk,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRule",
    "BlockEncoding",
    "CnfFormula",
    "Distribution",
    "GibbsModel",
    "ParwalkError",
    "ProposalDecomposition",
    "StochasticMatrix",
    "ZeroIsometry",
    "acceptance_matrix",
    "ancilla_comparison",
    "build_ancilla_efficient_Q",
    "build_cnf",
    "build_hypercube",
    "check_detailed_balance",
    "combine_two",
    "comparison_counts",
    "compressed_hadamard_be",
    "custom_rule",
    "decompose_discriminant",
    "discriminant",
    "eigenbasis_embedding",
    "extract_block",
    "g_matrix",
    "ga_matrix",
    "gibbs_distribution",
    "gibbs_from_cnf",
    "glauber",
    "hadamard_be",
    "hypercube_proposal",
    "lazy",
    "lcu",
    "load_dimacs",
    "metropolis",
    "par_walk",
    "parse_dimacs",
    "phase_gap_check",
    "proposal_from_permutations",
    "qsample",
    "quantum_enhanced_walk",
    "r_matrix",
    "reflectionize",
    "rejection_matrix",
    "spectral_gaps",
    "standard_walk",
    "stationary_distribution",
    "svd_block_encoding",
    "transition_matrix",
    "unitary_encoding",
    "verify_encoding",
    "walk_spectrum",
]

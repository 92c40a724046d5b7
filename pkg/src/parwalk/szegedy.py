"""Reference quantum walks on doubled state space, used as independent
oracles for the compressed constructions and for ancilla-count comparison.

All walks here are dense by design; they exist to be checked against, not
to scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DecompositionMismatch,
    DimensionMismatch,
    NotSymmetricUnitary,
)
from .markov import GibbsModel, StochasticMatrix, discriminant, stationary_distribution
from .parchain import AcceptanceRule, ProposalDecomposition

IDENT_TOL = 1e-10


@dataclass(frozen=True)
class SzegedyWalk:
    """Isometry, reflector, and one walk step W = reflector (2 T T^dag - I)."""

    variant: str
    total_dim: int
    t: np.ndarray
    reflector: np.ndarray
    w: np.ndarray


def _swap_matrix(n: int) -> np.ndarray:
    s = np.zeros((n * n, n * n))
    x = np.repeat(np.arange(n), n)
    y = np.tile(np.arange(n), n)
    s[y * n + x, x * n + y] = 1.0
    return s


def _walk_from(variant: str, t: np.ndarray, reflector: np.ndarray) -> SzegedyWalk:
    dim = t.shape[0]
    gram = t.conj().T @ t
    if np.abs(gram - np.eye(t.shape[1])).max() > IDENT_TOL:
        raise DecompositionMismatch("isometry columns are not orthonormal")
    w = reflector @ (2.0 * (t @ t.conj().T) - np.eye(dim))
    return SzegedyWalk(variant=variant, total_dim=dim, t=t, reflector=reflector, w=w)


def standard_walk(p: StochasticMatrix) -> SzegedyWalk:
    """Walk on C^N (x) C^N from |psi_x> = |x> (x) sum_y sqrt(p_yx) |y>.

    Verifies T^dag T = I, T T^dag = projector onto span{psi_x}, and
    T^dag S T = discriminant(P), each within 1e-10.
    """
    n = p.n
    pi = stationary_distribution(p)
    q = discriminant(p, pi)  # raises NotReversible first if unbalanced
    amps = np.sqrt(p.entries)
    t = np.zeros((n * n, n))
    for x in range(n):
        t[x * n : (x + 1) * n, x] = amps[:, x]
    walk = _walk_from("standard", t, _swap_matrix(n))
    tst = t.T @ walk.reflector @ t
    if np.abs(tst - q).max() > IDENT_TOL:
        raise DecompositionMismatch(
            f"T^dag S T deviates from the discriminant by {np.abs(tst - q).max():.3e}"
        )
    return walk


def _par_q(s: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Discriminant of the chain proposed by s and accepted by a."""
    q = np.sqrt(a * a.T) * s
    stay = 1.0 - (a * s).sum(axis=0) + np.diag(a * s)
    np.fill_diagonal(q, stay)
    return q


def par_walk(prop: ProposalDecomposition, a: np.ndarray) -> SzegedyWalk:
    """Walk on C^N (x) C^N (x) C^2 whose extra flag records acceptance.

    |psi_x> carries amplitude sqrt(s_yx a_yx) on |x,y,0> and
    sqrt(s_yx (1 - a_yx)) on |x,y,1>; the reflector swaps the state
    registers only on the accepted branch. T^dag R T reproduces the chain's
    discriminant without ever forming the transition matrix.
    """
    n = prop.n
    if a.shape != (n, n):
        raise DimensionMismatch(f"acceptance shape {a.shape} vs proposal dim {n}")
    s = prop.assemble()
    t = np.zeros((2 * n * n, n))
    for x in range(n):
        block = slice(x * n * 2, (x + 1) * n * 2)
        col = np.empty(2 * n)
        col[0::2] = np.sqrt(s[:, x] * a[:, x])
        col[1::2] = np.sqrt(s[:, x] * (1.0 - a[:, x]))
        t[block, x] = col
    swap = _swap_matrix(n)
    refl = np.zeros((2 * n * n, 2 * n * n))
    refl[0::2, 0::2] = swap
    refl[1::2, 1::2] = np.eye(n * n)
    walk = _walk_from("par", t, refl)
    trt = t.T @ refl @ t
    expected = _par_q(s, a)
    dev = np.abs(trt - expected).max()
    if dev > IDENT_TOL:
        raise DecompositionMismatch(f"T^dag R T deviates from Q by {dev:.3e}")
    return walk


def quantum_enhanced_walk(u_prop: np.ndarray, a: np.ndarray) -> SzegedyWalk:
    """PAR walk whose proposal amplitudes come from a symmetric unitary.

    The induced classical proposal is s_yx = |u_yx|^2; T^dag R T equals the
    discriminant of that induced chain. Symmetry of u makes the swap term
    real and nonnegative, which the construction requires.
    """
    u = np.asarray(u_prop)
    n = u.shape[0]
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch("proposal unitary must be square")
    if np.abs(u @ u.conj().T - np.eye(n)).max() > IDENT_TOL:
        raise NotSymmetricUnitary("proposal matrix is not unitary")
    if np.abs(u - u.T).max() > IDENT_TOL:
        raise NotSymmetricUnitary("proposal unitary is not symmetric")
    if a.shape != (n, n):
        raise DimensionMismatch(f"acceptance shape {a.shape} vs unitary dim {n}")
    t = np.zeros((2 * n * n, n), dtype=complex)
    for x in range(n):
        block = slice(x * n * 2, (x + 1) * n * 2)
        col = np.empty(2 * n, dtype=complex)
        col[0::2] = u[:, x] * np.sqrt(a[:, x])
        col[1::2] = u[:, x] * np.sqrt(1.0 - a[:, x])
        t[block, x] = col
    swap = _swap_matrix(n)
    refl = np.zeros((2 * n * n, 2 * n * n))
    refl[0::2, 0::2] = swap
    refl[1::2, 1::2] = np.eye(n * n)
    walk = _walk_from("quantum_enhanced", t, refl)
    trt = t.conj().T @ refl @ t
    expected = _par_q(np.abs(u) ** 2, a)
    dev = np.abs(trt - expected).max()
    if dev > IDENT_TOL:
        raise DecompositionMismatch(
            f"T^dag R T deviates from the induced Q by {dev:.3e}"
        )
    return walk


@dataclass(frozen=True)
class AncillaComparison:
    """Ancilla registers beyond the system register, and the scales."""

    szegedy_qubits: int
    paper_qubits: int
    logical_qubits: Optional[int]
    szegedy_gamma: float
    paper_gamma: float


def comparison_counts(n_states: int, kappa: int, levels: int) -> AncillaComparison:
    """Count-only comparison: doubled-space walk needs ceil(log N) + 1
    qubits (second register plus accept flag); the compressed encoding
    needs 2 ceil(log kappa) + ceil(log B) + 2 at scale 4B."""
    log_n = (n_states - 1).bit_length() if n_states > 1 else 0
    log_k = (kappa - 1).bit_length() if kappa > 1 else 0
    log_b = (levels - 1).bit_length() if levels > 1 else 0
    return AncillaComparison(
        szegedy_qubits=log_n + 1,
        paper_qubits=2 * log_k + log_b + 2,
        logical_qubits=None,
        szegedy_gamma=1.0,
        paper_gamma=float(4 * (1 << log_b)),
    )


def ancilla_comparison(
    model: GibbsModel, prop: ProposalDecomposition, rule: AcceptanceRule
) -> AncillaComparison:
    """Comparison with the logical count of an actually built encoding."""
    from .blockenc import build_ancilla_efficient_Q

    counts = comparison_counts(model.n, prop.kappa, model.levels)
    be = build_ancilla_efficient_Q(model, prop, rule)
    return AncillaComparison(
        szegedy_qubits=counts.szegedy_qubits,
        paper_qubits=counts.paper_qubits,
        logical_qubits=be.anc_qubits,
        szegedy_gamma=1.0,
        paper_gamma=be.gamma,
    )

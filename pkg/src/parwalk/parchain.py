"""Propose-accept/reject chains: permutation-sum proposals, acceptance
rules, transition assembly, and the decompositions

    P = A(.)S + R        and        Q = (G(.)A)(.)S + R

where (.) is the entrywise product, S is the symmetric proposal, A the
acceptance matrix, R the diagonal rejection matrix, and G the Boltzmann
reweighting g_yx = e^{beta(E_y - E_x)/2}.  Matrices whose entries depend
only on the endpoint energies compress to tables indexed by energy level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BadWeights,
    BoundViolated,
    DecompositionMismatch,
    DimensionMismatch,
    FunctionalEquationViolated,
    NegativeDiagonal,
    NotDiagonal,
    NotSymmetricProposal,
    WeightMismatch,
)
from .markov import GibbsModel, StochasticMatrix, discriminant, gibbs_distribution

RATIO_TOL = 1e-12
DECOMP_TOL = 1e-10


@dataclass(frozen=True)
class ProposalDecomposition:
    """Symmetric proposal given as a convex sum of permutation matrices.

    perms[k] is an index map: state x is proposed to move to perms[k][x].
    """

    weights: np.ndarray
    perms: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        perms = tuple(np.asarray(p, dtype=np.intp) for p in self.perms)
        if w.ndim != 1 or w.size == 0:
            raise BadWeights("weights must be a nonempty vector")
        if w.size != len(perms):
            raise WeightMismatch(f"{w.size} weights for {len(perms)} permutations")
        if w.min() <= 0:
            raise BadWeights("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise BadWeights(f"weights sum to {w.sum()!r}, expected 1")
        n = perms[0].size
        ref = np.arange(n)
        for p in perms:
            if p.size != n or np.any(np.sort(p) != ref):
                raise DimensionMismatch("each perm must be a bijection on {0..N-1}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "perms", perms)
        s = self.assemble()
        if np.abs(s - s.T).max() > 1e-12:
            raise NotSymmetricProposal("assembled proposal matrix is not symmetric")

    @property
    def n(self) -> int:
        return self.perms[0].size

    @property
    def kappa(self) -> int:
        return len(self.perms)

    @property
    def inverses(self) -> tuple:
        return tuple(np.argsort(p) for p in self.perms)

    @property
    def all_involutions(self) -> bool:
        return all(np.array_equal(p[p], np.arange(self.n)) for p in self.perms)

    def assemble(self) -> np.ndarray:
        """Dense S = sum_k w_k Pi_k."""
        s = np.zeros((self.n, self.n))
        cols = np.arange(self.n)
        for w, p in zip(self.weights, self.perms):
            s[p, cols] += w
        return s


def proposal_from_permutations(weights, perms) -> ProposalDecomposition:
    return ProposalDecomposition(np.asarray(weights, dtype=float), tuple(perms))


def hypercube_proposal(n: int) -> ProposalDecomposition:
    """Uniform single-bit-flip proposal on the n-cube.

    Permutation k flips the bit of place value 2^k, i.e. x -> x XOR 2^k.
    """
    if n < 1:
        raise DimensionMismatch("need at least one bit")
    states = np.arange(1 << n)
    perms = tuple(states ^ (1 << k) for k in range(n))
    return ProposalDecomposition(np.full(n, 1.0 / n), perms)


@dataclass(frozen=True)
class AcceptanceRule:
    """Acceptance probability as a function of the integer energy change.

    f(delta, beta) must satisfy f(delta) = e^{-beta delta} f(-delta) and
    take values in (0, 1]; checked over the full delta range in table().
    """

    kind: str
    f: Callable[[int, float], float]

    def table(self, beta: float, levels: int) -> np.ndarray:
        """Acceptance values for delta in {-(levels-1), ..., levels-1},
        validated against the functional equation.

        Index by table[delta + levels - 1].
        """
        deltas = np.arange(-(levels - 1), levels)
        vals = np.array([self.f(int(d), beta) for d in deltas], dtype=float)
        if vals.min() <= 0 or vals.max() > 1 + RATIO_TOL:
            raise FunctionalEquationViolated(
                f"{self.kind}: acceptance values must lie in (0, 1]"
            )
        # f(d) = e^{-beta d} f(-d), checked as e^{beta d/2}f(d) = e^{-beta d/2}f(-d);
        # both sides stay <= 1 for valid rules, so an absolute tolerance is safe
        half = np.exp(0.5 * beta * deltas)
        sym = half * vals
        if np.abs(sym - sym[::-1]).max() > RATIO_TOL:
            raise FunctionalEquationViolated(
                f"{self.kind}: f(d) = e^(-beta d) f(-d) fails at beta={beta}"
            )
        return vals


def metropolis() -> AcceptanceRule:
    return AcceptanceRule("metropolis", lambda d, beta: min(1.0, math.exp(-beta * d)))


def glauber() -> AcceptanceRule:
    def f(d, beta):
        w = math.exp(-beta * d)
        return w / (1.0 + w)

    return AcceptanceRule("glauber", f)


def custom_rule(f: Callable[[int, float], float]) -> AcceptanceRule:
    return AcceptanceRule("custom", f)


@dataclass(frozen=True)
class EnergyDependentMatrix:
    """Matrix whose (y, x) entry is a function of (E_y, E_x) only.

    The compressed form is the levels x levels table of that function;
    the expanded form on N states is table[E_y, E_x].
    """

    fn: Callable[[int, int], float]
    levels: int
    compressed: np.ndarray

    @classmethod
    def from_function(cls, fn: Callable[[int, int], float], levels: int):
        table = np.array(
            [[fn(e1, e2) for e2 in range(levels)] for e1 in range(levels)],
            dtype=float,
        )
        return cls(fn=fn, levels=levels, compressed=table)

    def expand(self, energies: np.ndarray) -> np.ndarray:
        e = np.asarray(energies, dtype=np.intp)
        return self.compressed[np.ix_(e, e)]


def g_matrix(model: GibbsModel) -> EnergyDependentMatrix:
    """Boltzmann reweighting g(E', E) = e^{beta(E' - E)/2}; g_yx g_xy = 1."""
    beta = model.beta
    return EnergyDependentMatrix.from_function(
        lambda e1, e2: math.exp(0.5 * beta * (e1 - e2)), model.levels
    )


def ga_matrix(model: GibbsModel, rule: AcceptanceRule) -> EnergyDependentMatrix:
    """Symmetric table e^{beta(E'-E)/2} f(E'-E); entries in [0, 1].

    The diagonal carries f(0), not the forced unit acceptance of staying
    put; the discrepancy cancels against rejection_matrix's diagonal.
    """
    beta = model.beta
    vals = rule.table(beta, model.levels)
    off = model.levels - 1

    def fn(e1, e2):
        return math.exp(0.5 * beta * (e1 - e2)) * vals[e1 - e2 + off]

    return EnergyDependentMatrix.from_function(fn, model.levels)


def rejection_matrix(model: GibbsModel, rule: AcceptanceRule) -> EnergyDependentMatrix:
    """Rejection probability table 1 - f(E' - E); entries in [0, 1)."""
    vals = rule.table(model.beta, model.levels)
    off = model.levels - 1
    return EnergyDependentMatrix.from_function(
        lambda e1, e2: 1.0 - vals[e1 - e2 + off], model.levels
    )


def acceptance_matrix(model: GibbsModel, rule: AcceptanceRule) -> np.ndarray:
    """Dense A with a_yx = f(E_y - E_x) off the diagonal and a_xx = 1."""
    vals = rule.table(model.beta, model.levels)
    e = model.energies
    deltas = np.subtract.outer(e, e)
    a = vals[deltas + model.levels - 1]
    np.fill_diagonal(a, 1.0)
    # detailed-balance ratio a_yx / a_xy = e^{-beta delta}, in product form
    half = np.exp(0.5 * model.beta * deltas)
    sym = half * a
    dev = np.abs(sym - sym.T)
    np.fill_diagonal(dev, 0.0)
    if dev.max() > RATIO_TOL:
        raise FunctionalEquationViolated(
            f"acceptance ratio check fails by {dev.max():.3e}"
        )
    return a


def transition_matrix(prop: ProposalDecomposition, a: np.ndarray) -> StochasticMatrix:
    """P with p_yx = a_yx s_yx off the diagonal, columns topped up to 1."""
    if a.shape != (prop.n, prop.n):
        raise DimensionMismatch(f"acceptance shape {a.shape} vs proposal dim {prop.n}")
    s = prop.assemble()
    p = a * s
    off_sum = p.sum(axis=0) - np.diag(p)
    stay = 1.0 - off_sum
    if stay.min() < -1e-12:
        raise NegativeDiagonal(f"column overflow {stay.min():.3e}")
    np.fill_diagonal(p, np.maximum(stay, 0.0))
    return StochasticMatrix(p)


def r_matrix(prop: ProposalDecomposition, a: np.ndarray) -> np.ndarray:
    """Diagonal rejection matrix R = sum_k w_k Pi_k^T ((J - A) (.) Pi_k).

    Each term is diagonal because Pi_k has one entry per column; the
    NotDiagonal guard catches corrupted permutation data.
    """
    if a.shape != (prop.n, prop.n):
        raise DimensionMismatch(f"acceptance shape {a.shape} vs proposal dim {prop.n}")
    n = prop.n
    cols = np.arange(n)
    r = np.zeros((n, n))
    for w, p in zip(prop.weights, prop.perms):
        term = np.zeros((n, n))
        term[p, cols] = 1.0 - a[p, cols]
        term = term[p, :]  # left-multiply by Pi_k^T (row permutation)
        offdiag = term - np.diag(np.diag(term))
        if np.abs(offdiag).max() > 1e-14:
            raise NotDiagonal("rejection term is not diagonal")
        r += w * term
    if np.diag(r).min() < -1e-12 or np.diag(r).max() > 1 + 1e-12:
        raise NegativeDiagonal("rejection probabilities must lie in [0, 1]")
    return r


@dataclass(frozen=True)
class DiscriminantDecomposition:
    """Factors of Q = ga (.) s + r together with the verified deviation."""

    ga: np.ndarray
    s: np.ndarray
    r: np.ndarray
    q: np.ndarray
    deviation: float


def decompose_discriminant(
    model: GibbsModel, prop: ProposalDecomposition, rule: AcceptanceRule
) -> DiscriminantDecomposition:
    """Build the chain and verify Q = (G(.)A)(.)S + R within 1e-10."""
    if model.n != prop.n:
        raise DimensionMismatch(f"model dim {model.n} vs proposal dim {prop.n}")
    a = acceptance_matrix(model, rule)
    s = prop.assemble()
    p = transition_matrix(prop, a)
    r = r_matrix(prop, a)
    pi = gibbs_distribution(model)
    q = discriminant(p, pi)

    # P = A(.)S + R holds verbatim because a_xx is forced to 1
    p_dev = np.abs(a * s + r - p.entries).max()
    if p_dev > 1e-12:
        raise DecompositionMismatch(f"P = A(.)S + R fails by {p_dev:.3e}")

    ga = g_matrix(model).expand(model.energies) * a
    if np.abs(ga - ga.T).max() > 1e-12:
        raise DecompositionMismatch("G(.)A is not symmetric")
    if ga.min() < 0 or ga.max() > 1 + 1e-12:
        raise DecompositionMismatch("G(.)A entries leave [0, 1]")

    deviation = float(np.abs(ga * s + r - q).max())
    if deviation > DECOMP_TOL:
        raise DecompositionMismatch(
            f"(G(.)A)(.)S + R deviates from Q by {deviation:.3e}"
        )
    return DiscriminantDecomposition(ga=ga, s=s, r=r, q=q, deviation=deviation)


def compress(mat: EnergyDependentMatrix) -> np.ndarray:
    """Compressed table, with the norm bound ||L|| <= sqrt(||L||_1 ||L||_inf)
    checked, and <= levels additionally when entries lie in [0, 1]."""
    t = mat.compressed
    bound = math.sqrt(np.abs(t).sum(axis=0).max() * np.abs(t).sum(axis=1).max())
    spec = np.linalg.norm(t, 2)
    if spec > bound + 1e-9:
        raise BoundViolated(f"spectral norm {spec:.6f} exceeds bound {bound:.6f}")
    if t.min() >= -1e-12 and t.max() <= 1 + 1e-12 and bound > mat.levels + 1e-9:
        raise BoundViolated(f"bound {bound:.6f} exceeds level count {mat.levels}")
    return t.copy()


def compress_dense(mat: np.ndarray, energies: np.ndarray, levels: int) -> np.ndarray:
    """Recover the table of an energy-dependent dense matrix.

    Entries sharing an energy pair must agree within 1e-12; unoccupied
    pairs are filled with 0.
    """
    e = np.asarray(energies, dtype=np.intp)
    n = e.size
    if mat.shape != (n, n):
        raise DimensionMismatch(f"matrix shape {mat.shape} vs {n} energies")
    table = np.zeros((levels, levels))
    seen = np.zeros((levels, levels), dtype=bool)
    for y in range(n):
        for x in range(n):
            ey, ex = e[y], e[x]
            if seen[ey, ex]:
                if abs(table[ey, ex] - mat[y, x]) > 1e-12:
                    raise DimensionMismatch(
                        f"entries for energy pair ({ey}, {ex}) disagree"
                    )
            else:
                table[ey, ex] = mat[y, x]
                seen[ey, ex] = True
    return table

"""Reversible Markov chain fundamentals: Gibbs models, stationary
distributions, discriminant matrices and spectral gaps.

Conventions: transition matrices are column-stochastic, entry (y, x) is the
probability of moving from x to y. Energies are integers in {0, ..., B-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NotErgodic,
    NotReversible,
    SpectrumOutOfRange,
)

COLUMN_SUM_TOL = 1e-12
STRUCT_TOL = 1e-10
EIG_TOL = 1e-9


@dataclass(frozen=True)
class StochasticMatrix:
    """Column-stochastic matrix with entries in [0, 1]."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionMismatch("transition matrix must be square")
        if p.min() < -COLUMN_SUM_TOL or p.max() > 1 + COLUMN_SUM_TOL:
            raise SpectrumOutOfRange("transition probabilities must lie in [0, 1]")
        colsums = p.sum(axis=0)
        if np.abs(colsums - 1.0).max() > COLUMN_SUM_TOL:
            raise DimensionMismatch(
                f"columns must sum to 1 (max deviation {np.abs(colsums - 1).max():.3e})"
            )
        object.__setattr__(self, "entries", p)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Distribution:
    """Strictly positive probability vector."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1:
            raise DimensionMismatch("distribution must be a vector")
        if abs(p.sum() - 1.0) > COLUMN_SUM_TOL:
            raise DimensionMismatch(f"probabilities sum to {p.sum()!r}, expected 1")
        if p.min() <= 0:
            raise NotErgodic("distribution has a nonpositive entry")
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class GibbsModel:
    """Integer-energy model with Boltzmann weights e^{-beta E_x}."""

    energies: np.ndarray
    levels: int  # number of allowed energy levels B; energies lie in {0..B-1}
    beta: float

    def __post_init__(self):
        e = np.asarray(self.energies)
        if not np.issubdtype(e.dtype, np.integer):
            raise DimensionMismatch("energies must be integers")
        if e.min() < 0 or e.max() >= self.levels:
            raise SpectrumOutOfRange(
                f"energies must lie in [0, {self.levels - 1}], got range "
                f"[{e.min()}, {e.max()}]"
            )
        if self.beta < 0:
            raise DimensionMismatch("beta must be nonnegative")
        object.__setattr__(self, "energies", e.astype(np.intp))

    @property
    def n(self) -> int:
        return self.energies.size

    @property
    def partition_function(self) -> float:
        return float(np.exp(-self.beta * self.energies).sum())


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues (descending) and the derived gap quantities."""

    eigenvalues: np.ndarray
    delta: float        # 1 - max{lambda_2, |lambda_min|}
    delta_plus: float   # 1 - lambda_2
    lazy_delta: float   # gap of the half-lazy chain, (1 - lambda_2)/2
    periodic: bool = field(default=False)


def gibbs_distribution(model: GibbsModel) -> Distribution:
    """Boltzmann distribution pi_x = e^{-beta E_x} / Z."""
    w = np.exp(-model.beta * model.energies.astype(float))
    return Distribution(w / w.sum())


def stationary_distribution(p: StochasticMatrix, tol: float = 1e-9) -> Distribution:
    """Unique eigenvalue-1 eigenvector of p, normalized to a distribution.

    Raises NotErgodic when eigenvalue 1 is degenerate or the eigenvector is
    not strictly positive.
    """
    vals, vecs = np.linalg.eig(p.entries)
    close = np.abs(vals - 1.0) < tol
    if close.sum() != 1:
        raise NotErgodic(
            f"eigenvalue 1 has multiplicity {int(close.sum())}; chain is not ergodic"
        )
    v = np.real(vecs[:, close.argmax()])
    v = v / v.sum()
    if v.min() <= 0:
        raise NotErgodic("stationary eigenvector is not strictly positive")
    return Distribution(v)


def check_detailed_balance(p: StochasticMatrix, pi: Distribution, tol: float = STRUCT_TOL) -> bool:
    """True when p_xy pi_y = p_yx pi_x entrywise within tol."""
    if p.n != pi.n:
        raise DimensionMismatch(f"matrix dim {p.n} vs distribution dim {pi.n}")
    flow = p.entries * pi.probs[None, :]
    return bool(np.abs(flow - flow.T).max() <= tol)


def discriminant(p: StochasticMatrix, pi: Distribution) -> np.ndarray:
    """Symmetric discriminant D^{-1/2} P D^{1/2} of a reversible chain.

    Checks reversibility first, then verifies the entrywise form
    sqrt(p_xy p_yx) and symmetry within 1e-10.
    """
    if not check_detailed_balance(p, pi):
        raise NotReversible("detailed balance fails, discriminant would not be symmetric")
    root = np.sqrt(pi.probs)
    q = (p.entries * root[None, :]) / root[:, None]
    entrywise = np.sqrt(p.entries * p.entries.T)
    if np.abs(q - entrywise).max() > STRUCT_TOL:
        raise NotReversible("discriminant disagrees with sqrt(p_xy p_yx) form")
    if np.abs(q - q.T).max() > STRUCT_TOL:
        raise NotReversible("discriminant is not symmetric")
    return 0.5 * (q + q.T)


def spectral_gaps(q: np.ndarray) -> SpectralReport:
    """Eigenvalues and gaps of a symmetric contraction (descending order)."""
    q = np.asarray(q, dtype=float)
    if np.abs(q - q.T).max() > STRUCT_TOL:
        raise NotReversible("spectral_gaps expects a symmetric matrix")
    vals = np.linalg.eigvalsh(q)[::-1]
    if np.abs(vals).max() > 1 + EIG_TOL:
        raise SpectrumOutOfRange(f"eigenvalue {vals[np.abs(vals).argmax()]} outside [-1, 1]")
    lam2 = vals[1] if vals.size > 1 else -1.0
    lam_min = vals[-1]
    delta = 1.0 - max(lam2, abs(lam_min)) if vals.size > 1 else 1.0 - abs(lam_min)
    delta_plus = 1.0 - lam2 if vals.size > 1 else 2.0
    periodic = bool(lam_min <= -1 + 1e-12)
    report = SpectralReport(
        eigenvalues=vals,
        delta=float(delta),
        delta_plus=float(delta_plus),
        lazy_delta=float(delta_plus / 2.0),
        periodic=periodic,
    )
    if report.delta_plus < report.delta - 1e-12:
        raise SpectrumOutOfRange("delta_plus < delta, spectrum ordering is broken")
    return report


def lazy(p: StochasticMatrix) -> StochasticMatrix:
    """Half-lazy chain (I + P)/2; shifts the spectrum to [0, 1]."""
    return StochasticMatrix(0.5 * (np.eye(p.n) + p.entries))


def qsample(pi: Distribution) -> np.ndarray:
    """Amplitude vector sum_x sqrt(pi_x)|x>; the +1 eigenvector of the
    discriminant."""
    return np.sqrt(pi.probs)

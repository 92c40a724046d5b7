"""Walk spectra and gap amplification.

A symmetric contraction Q with eigenvalues lambda_j embeds into a product
of two reflections whose eigenphases are +-arccos(lambda_j); the smallest
nonzero phase, arccos(1 - Delta+), grows like the square root of the
classical one-sided gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blockenc import BlockEncoding, Isometry
from .errors import BoundViolated, SpectrumMismatch, SpectrumOutOfRange
from .linops import DENSE_CAP
from .szegedy import SzegedyWalk

PHASE_TOL = 1e-8
SNAP = 1e-10
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class WalkSpectrum:
    """All walk eigenphases, the matched per-eigenvalue phases, and the gap.

    lambdas, predicted, measured are aligned arrays: for each eigenvalue of
    Q (descending) the phase arccos(lambda) it predicts and the matched
    nonnegative walk phase.
    """

    eigenphases: np.ndarray
    phase_gap: float
    b_perp_dim: int
    lambdas: np.ndarray
    predicted: np.ndarray
    measured: np.ndarray


@dataclass(frozen=True)
class GapReport:
    phase_gap: float
    predicted: float
    lower_bound: float
    holds: bool


@dataclass(frozen=True)
class EigenbasisEmbedding:
    """Isometry t into C^N (x) C^2, reflection s = I (x) Z, and the
    two-reflection walk u built from them."""

    t: np.ndarray
    s: np.ndarray
    u: np.ndarray
    thetas: np.ndarray


def _circular_gap(a: float, b: float) -> float:
    d = (a - b + math.pi) % (2.0 * math.pi) - math.pi
    return abs(d)


def _unitary_eigenphases(w: np.ndarray) -> np.ndarray:
    """Eigenphases of a numerically unitary matrix.

    Nonsymmetric QR splits degenerate real eigenvalues into spurious
    complex pairs with O(sqrt(eps)) phase error, which swamps the 1e-8
    matching tolerance. Instead diagonalize the commuting hermitian parts:
    eigh gives the cosines exactly, and the sine operator restricted to
    each cosine cluster separates the +- pairs.
    """
    wc = np.asarray(w, dtype=complex)
    unit_dev = np.abs(wc @ wc.conj().T - np.eye(wc.shape[0])).max()
    if unit_dev > 1e-9:
        raise SpectrumOutOfRange(f"walk operator is not unitary (dev {unit_dev:.3e})")
    hc = 0.5 * (wc + wc.conj().T)
    hs = (wc - wc.conj().T) / 2j
    cos_vals, vecs = np.linalg.eigh(hc)
    phases = np.empty(wc.shape[0])
    i = 0
    while i < cos_vals.size:
        j = i + 1
        while j < cos_vals.size and cos_vals[j] - cos_vals[j - 1] < 1e-8:
            j += 1
        block = vecs[:, i:j]
        sin_vals = np.linalg.eigvalsh(block.conj().T @ hs @ block)
        c = float(cos_vals[i:j].mean())
        phases[i:j] = [math.atan2(float(s), c) for s in sin_vals]
        i = j
    return phases


def _walk_unitary(walk) -> np.ndarray:
    if isinstance(walk, SzegedyWalk):
        return walk.w
    if isinstance(walk, EigenbasisEmbedding):
        return walk.u
    if isinstance(walk, tuple) and len(walk) == 2:
        be, iso = walk
        if isinstance(be, BlockEncoding) and isinstance(iso, Isometry):
            w = be.dense(DENSE_CAP)
            t = iso.dense(DENSE_CAP)
            proj = t @ t.conj().T
            return w @ (2.0 * proj - np.eye(w.shape[0]))
    if isinstance(walk, np.ndarray):
        return walk
    raise TypeError(f"cannot interpret {type(walk).__name__} as a walk operator")


def walk_spectrum(walk, q: np.ndarray) -> WalkSpectrum:
    """Diagonalize the walk and match its phases to +-arccos(lambda_j).

    Phases for eigenvalues in (-1, 1) come in +- pairs; lambda = +-1
    contributes a single phase 0 or pi. Everything left after matching must
    sit on the trivial phases {0, pi} of the complementary subspace.
    """
    w = _walk_unitary(walk)
    q = np.asarray(q)
    lams = np.linalg.eigvalsh(q)[::-1]
    if np.abs(lams).max() > 1 + 1e-9:
        raise SpectrumOutOfRange(f"eigenvalue {lams[np.abs(lams).argmax()]} outside [-1, 1]")
    lams = np.clip(lams, -1.0, 1.0)
    # +-1 eigenvalues are structural; arccos would turn eps noise into
    # sqrt(eps) phases
    lams[lams >= 1.0 - 1e-12] = 1.0
    lams[lams <= -1.0 + 1e-12] = -1.0

    phases = _unitary_eigenphases(w)
    phases[np.abs(phases) < SNAP] = 0.0

    expected = []  # (lambda index, expected phase)
    for j, lam in enumerate(lams):
        theta = math.acos(lam)
        if lam >= 1.0 - 1e-12:
            expected.append((j, 0.0))
        elif lam <= -1.0 + 1e-12:
            expected.append((j, math.pi))
        else:
            expected.append((j, theta))
            expected.append((j, -theta))

    used = np.zeros(phases.size, dtype=bool)
    measured = np.full(lams.size, np.nan)
    unmatched = []
    for j, target in expected:
        free = np.flatnonzero(~used)
        dists = np.array([_circular_gap(phases[i], target) for i in free])
        pick = free[dists.argmin()]
        if dists.min() > PHASE_TOL:
            unmatched.append((target, float(dists.min())))
            continue
        used[pick] = True
        if target >= 0.0:
            measured[j] = abs(phases[pick])
    if unmatched:
        raise SpectrumMismatch(
            "expected phases with no walk counterpart: "
            + ", ".join(f"{t:.6f} (off by {d:.2e})" for t, d in unmatched)
        )

    leftovers = phases[~used]
    bad = [p for p in leftovers if min(abs(p), abs(_circular_gap(p, math.pi))) > PHASE_TOL]
    if bad:
        raise SpectrumMismatch(
            f"{len(bad)} complementary-subspace phases off the trivial set: "
            + ", ".join(f"{p:.6f}" for p in bad[:8])
        )

    matched_abs = np.array(
        [abs(phases[i]) for i in range(phases.size) if used[i]]
    )
    nonzero = matched_abs[matched_abs > SNAP]
    gap = float(nonzero.min()) if nonzero.size else 0.0
    predicted = np.arccos(lams)
    return WalkSpectrum(
        eigenphases=np.sort(phases),
        phase_gap=gap,
        b_perp_dim=int(leftovers.size),
        lambdas=lams,
        predicted=predicted,
        measured=measured,
    )


def phase_gap_check(spec: WalkSpectrum, delta_plus: float) -> GapReport:
    """phase_gap = arccos(1 - Delta+) within 1e-8, and at least
    sqrt(2 Delta+)."""
    if delta_plus < 0:
        raise BoundViolated(f"one-sided gap must be nonnegative, got {delta_plus}")
    predicted = math.acos(max(-1.0, min(1.0, 1.0 - delta_plus)))
    if abs(spec.phase_gap - predicted) > PHASE_TOL:
        raise BoundViolated(
            f"phase gap {spec.phase_gap:.10f} != arccos(1 - Delta+) = {predicted:.10f}"
        )
    lower = math.sqrt(2.0 * delta_plus)
    if spec.phase_gap < lower - 1e-12:
        raise BoundViolated(
            f"phase gap {spec.phase_gap:.10f} below sqrt(2 Delta+) = {lower:.10f}"
        )
    return GapReport(
        phase_gap=spec.phase_gap, predicted=predicted, lower_bound=lower, holds=True
    )


def eigenbasis_embedding(q: np.ndarray) -> EigenbasisEmbedding:
    """Embed Q into C^N (x) C^2 via |chi_j> = |v_j> (x) (cos(theta_j/2),
    sin(theta_j/2)) with theta_j = arccos(lambda_j).

    Verifies t^dag s t = q and the two-reflection eigenvector relations:
    u (chi - mu s chi) = mu (chi - mu s chi) for mu = e^{+-i theta}, with
    the partner vectors |v_j> (x) |1> fixed by u when lambda_j = 1.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    lam, vecs = np.linalg.eigh(q)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    if lam.max() > 1 + 1e-9:
        raise SpectrumOutOfRange(f"eigenvalue {lam.max()} above 1")
    if lam.min() <= -1 + 1e-12:
        raise SpectrumOutOfRange(
            f"eigenvalue {lam.min()} at the periodic edge -1; embed the lazy chain"
        )
    lam = np.clip(lam, -1.0, 1.0)
    # arccos amplifies eps-level noise near 1 to sqrt(eps) phases; unit
    # eigenvalues are structural (fixed points), so land them exactly
    lam[lam >= 1.0 - 1e-12] = 1.0
    thetas = np.arccos(lam)

    chi = np.zeros((2 * n, n))
    for j in range(n):
        chi[0::2, j] = math.cos(thetas[j] / 2.0) * vecs[:, j]
        chi[1::2, j] = math.sin(thetas[j] / 2.0) * vecs[:, j]
    # t sends the original basis through the eigenbasis: t = sum_j chi_j v_j^T
    t = chi @ vecs.T
    s = np.diag(np.tile([1.0, -1.0], n))
    u = s @ (2.0 * (t @ t.T) - np.eye(2 * n))

    if np.abs(t.T @ t - np.eye(n)).max() > RESIDUAL_TOL:
        raise SpectrumOutOfRange("embedding isometry lost orthonormality")
    if np.abs(t.T @ s @ t - q).max() > RESIDUAL_TOL:
        raise SpectrumOutOfRange("t^dag s t deviates from q")

    for j in range(n):
        chi_j = chi[:, j]
        if thetas[j] < 1e-8:
            if np.linalg.norm(u @ chi_j - chi_j) > RESIDUAL_TOL:
                raise SpectrumOutOfRange("unit eigenvalue is not fixed by the walk")
            partner = np.zeros(2 * n)
            partner[1::2] = vecs[:, j]
            if np.linalg.norm(u @ partner - partner) > RESIDUAL_TOL:
                raise SpectrumOutOfRange("partner of a unit eigenvalue moved")
            continue
        for sign in (1.0, -1.0):
            mu = complex(math.cos(thetas[j]), sign * math.sin(thetas[j]))
            vec = chi_j - mu * (s @ chi_j)
            if np.linalg.norm(u @ vec - mu * vec) > RESIDUAL_TOL:
                raise SpectrumOutOfRange(
                    f"two-reflection eigenvector relation fails at theta={thetas[j]:.6f}"
                )
    return EigenbasisEmbedding(t=t, s=s, u=u, thetas=thetas)

"""Equilibrium Markov measures for expanding piecewise-affine graph systems.

Given a system whose transition matrix A has been weighted by
w_i(s) = |alpha_i| * gamma_i^-(s-1) at the parameter s where the spectral
radius is 1, the Perron data of that weighted matrix induces a stationary
Markov measure on the symbol space.  This module builds the measure, computes
its entropy and Lyapunov exponents, and evaluates the entropy-over-exponents
dimension formula that ties the measure back to the dimension of the graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dimension import spectral_radius, theoretical_box_dim, weighted_matrix
from .errors import PreconditionFailed
from .graphs import MarkovFif
from .symbolic import irreducible_aperiodic

_POWER_TOL = 1e-13
_POWER_MAX_ITERS = 500_000


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure from the Perron data of a weighted matrix.

    s is the parameter with rho(A^(s)) = 1; p the positive right Perron
    vector of A^(s) (normalized to sum 1); P the stochastic matrix
    P_ij = A^(s)_ij * p_j / p_i, row-renormalized; q the stationary row
    vector of P.  The mass of a cylinder [i_1 ... i_n] is
    q_{i_1} P_{i_1 i_2} ... P_{i_{n-1} i_n}.
    """

    s: float
    p: np.ndarray
    P: np.ndarray
    q: np.ndarray

    @property
    def m(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class ErgodicStats:
    """Entropy, Lyapunov exponents, and measure dimension in one record.

    h: entropy in nats; chi1: base expansion rate sum q_i log gamma_i;
    chi2: fiber expansion rate -sum q_i log |alpha_i|; dim: the
    entropy-over-exponents dimension.  For the equilibrium measure of an
    expanding system with s > 1 the exponents satisfy 0 < chi2 < chi1.
    """

    h: float
    chi1: float
    chi2: float
    dim: float


def _diagnose_adjacency(matrix: np.ndarray) -> str:
    """Human-readable reason why an adjacency matrix is not primitive."""
    a = (np.asarray(matrix) != 0).astype(np.int64)
    m = a.shape[0]
    reach = np.eye(m, dtype=np.int64)
    for _ in range(m):
        reach = np.clip(reach + reach @ a, 0, 1)
    bad = np.argwhere(reach == 0)
    if len(bad):
        i, j = bad[0]
        return f"reducible: symbol {j + 1} is unreachable from symbol {i + 1}"
    period = 0
    ak = np.eye(m, dtype=np.int64)
    for k in range(1, m * m + 1):
        ak = np.clip(ak @ a, 0, 1)
        if ak[0, 0]:
            period = math.gcd(period, k)
    return f"irreducible but periodic with period {period}"


def _power_iterate(matrix: np.ndarray, label: str) -> np.ndarray:
    """Dominant eigenvector of a primitive nonnegative matrix, sum 1."""
    v = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for _ in range(_POWER_MAX_ITERS):
        nxt = matrix @ v
        total = nxt.sum()
        if total <= 0:
            raise PreconditionFailed(f"{label}: power iteration collapsed")
        nxt /= total
        if np.max(np.abs(nxt - v)) < _POWER_TOL:
            return nxt
        v = nxt
    return v


def _spectral_root(sys: MarkovFif) -> float:
    """Root of rho(A^(s)) = 1 on [1, 2], capped at 2."""
    if spectral_radius(weighted_matrix(sys, 2.0).matrix) >= 1.0:
        return 2.0
    lo, hi = 1.0, 2.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if spectral_radius(weighted_matrix(sys, mid).matrix) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equilibrium_markov(sys: MarkovFif) -> MarkovMeasure:
    """Stationary Markov measure whose dimension equals the graph dimension.

    Requires a primitive (irreducible and aperiodic) transition matrix and
    rho(A^(1)) > 1, i.e. a genuinely fractal graph.  The parameter s is taken
    from the dimension solver; p, P, q follow by power iteration.
    """
    irr, aper, _ = irreducible_aperiodic(sys.sft)
    if not (irr and aper):
        raise PreconditionFailed(
            "equilibrium measure needs a primitive transition matrix; "
            + _diagnose_adjacency(sys.sft.matrix()))
    rho1 = spectral_radius(weighted_matrix(sys, 1.0).matrix)
    if rho1 <= 1.0 + 1e-13:
        raise PreconditionFailed(
            f"rho(A^(1)) = {rho1:.12g} <= 1: the graph is not fractal and "
            "the equilibrium construction degenerates")
    report = theoretical_box_dim(sys)
    s = report.s_root if report.s_root is not None else _spectral_root(sys)

    a_s = weighted_matrix(sys, s).matrix
    p = _power_iterate(a_s, "Perron vector")
    if np.min(p) <= 0:
        raise PreconditionFailed("Perron vector is not strictly positive")
    transition = a_s * p[None, :] / p[:, None]
    transition /= transition.sum(axis=1, keepdims=True)
    q = _power_iterate(transition.T, "stationary vector")
    return MarkovMeasure(s=float(s), p=p, P=transition, q=q)


def entropy(mm: MarkovMeasure) -> float:
    """Entropy -sum_ij q_i P_ij log P_ij in nats, with 0 log 0 = 0."""
    total = 0.0
    for i in range(mm.m):
        for j in range(mm.m):
            pij = mm.P[i, j]
            if pij > 0:
                total -= mm.q[i] * pij * math.log(pij)
    return total


def lyapunov(mm: MarkovMeasure, sys: MarkovFif) -> tuple[float, float]:
    """Lyapunov exponents (chi1, chi2) of the measure on the given system.

    chi1 = sum q_i log gamma_i is the expansion rate along the base and
    chi2 = -sum q_i log |alpha_i| the expansion rate transverse to the
    fibers; the weighted-matrix identity
    -sum q_i log(|alpha_i| gamma_i^-(s-1)) = chi2 + (s-1) chi1 pins both.
    """
    if len(sys.gamma) != mm.m:
        raise ValueError("measure and system have different symbol counts")
    chi1 = sum(float(mm.q[i]) * math.log(float(sys.gamma[i])) for i in range(mm.m))
    chi2 = -sum(
        float(mm.q[i]) * math.log(abs(float(sys.scalings[i]))) for i in range(mm.m))
    return chi1, chi2


def ly_dimension(h: float, chi1: float, chi2: float) -> float:
    """Dimension of an ergodic measure from entropy and exponents.

    With 0 < chi2 <= chi1 the measure fills the fiber direction first:
    D = h/chi2 while h <= chi2, then D = 1 + (h - chi2)/chi1, capped at the
    ambient dimension 2.  This is the unique continuous formula that returns
    D = s whenever h = chi2 + (s - 1) chi1, which is how the equilibrium
    measure certifies the dimension of the graph.
    """
    if h < 0:
        raise ValueError("entropy must be nonnegative")
    if chi2 <= 0:
        raise PreconditionFailed("fiber exponent chi2 must be positive")
    if chi2 > chi1:
        raise PreconditionFailed(
            f"exponents out of order: chi2 = {chi2:.6g} > chi1 = {chi1:.6g}")
    if h <= chi2:
        return h / chi2
    return min(2.0, 1.0 + (h - chi2) / chi1)


def ergodic_stats(sys: MarkovFif) -> ErgodicStats:
    """Equilibrium-measure statistics (h, chi1, chi2, dim) of a system."""
    mm = equilibrium_markov(sys)
    h = entropy(mm)
    chi1, chi2 = lyapunov(mm, sys)
    return ErgodicStats(h=h, chi1=chi1, chi2=chi2, dim=ly_dimension(h, chi1, chi2))


def markov_cylinder_mass(mm: MarkovMeasure, word: Sequence[int]) -> float:
    """Mass q_{w_1} P_{w_1 w_2} ... P_{w_{n-1} w_n} of the cylinder [word].

    Symbols are 1-based; words stepping along a missing transition get mass 0.
    """
    w = tuple(word)
    if not w:
        raise ValueError("cylinder word must be nonempty")
    if any(not 1 <= sym <= mm.m for sym in w):
        raise ValueError(f"symbols must lie in 1..{mm.m}")
    mass = float(mm.q[w[0] - 1])
    for a, b in zip(w, w[1:]):
        mass *= float(mm.P[a - 1, b - 1])
    return mass

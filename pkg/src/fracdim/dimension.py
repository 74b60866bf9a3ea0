"""Theoretical dimension formulas for self-affine function graphs.

Box dimension comes in two computable shapes:

* full-shift interpolation systems: the Moran-type equation
  sum_i |alpha_i| (x_i - x_{i-1})^(s-1) = 1 (dimension 1 when the scalings
  sum to at most 1, or when the data are collinear);
* Markov interpolation systems: the unique s in [1, 2] with
  rho(A^(s)) = 1, where A^(s) weighs row i of the adjacency by
  |alpha_i| gamma_i^(-(s-1)).

Hausdorff dimension equals the box dimension under checkable witnesses:
for full shifts, not all adjusted difference quotients of the data agree;
for Markov systems, two same-length words with identical weight products
whose composed maps nevertheless differ.  Both checks run exactly when the
system was built from rational data.

The stopping-time cover reproduces the lower-bound box count behind the
Markov dimension formula, and ledrappier_sample draws truncated samples of
the fiber-derivative series Y_x used to probe when the dimension drops.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionFailed
from .graphs import DataSet, MarkovFif, PiecewiseLinearPhi, SeriesSpec
from .symbolic import Word, abelianization, admissible_words

_BISECT_TOL = 1e-12
_REL_TOL = 1e-9


def _all_rational(*values) -> bool:
    return all(isinstance(v, (int, Fraction)) or isinstance(v, numbers.Rational)
               for v in values)


# ---------------------------------------------------------------------------
# Moran equation and spectral radius
# ---------------------------------------------------------------------------


def moran_solve(scalings, lengths) -> float:
    """The unique s in [1, 2] with sum |alpha_i| lengths_i^(s-1) = 1.

    Requires sum |alpha_i| >= 1 (strictly below signals the dimension-1
    branch to the caller); equality returns the boundary root s = 1.  The
    left side strictly decreases in s because every length is < 1.
    """
    al = [abs(float(a)) for a in (scalings.values if hasattr(scalings, "values") else scalings)]
    ln = [float(v) for v in lengths]
    if len(al) != len(ln):
        raise ValueError("scalings and lengths must have equal length")
    if any(v <= 0 for v in ln):
        raise ValueError("lengths must be positive")
    if abs(sum(ln) - 1.0) > 1e-12:
        raise ValueError("lengths must sum to 1")
    total = sum(al)
    if total < 1.0 - 1e-15:
        raise PreconditionFailed(
            f"sum of |alpha_i| = {total:.6g} <= 1: dimension-1 branch")
    if abs(total - 1.0) <= 1e-15:
        return 1.0

    def lhs(s: float) -> float:
        return sum(a * v ** (s - 1.0) for a, v in zip(al, ln))

    lo, hi = 1.0, 2.0
    # lhs(2) = sum |alpha_i| * lengths_i <= max|alpha| < 1, so the bracket holds
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if lhs(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spectral_radius(matrix) -> float:
    """Spectral radius of a nonnegative square matrix by power iteration.

    A diagonal shift of 1e-3 * max entry defeats periodicity (the shifted
    matrix is primitive on its dominant class); the shift is subtracted from
    the converged norm ratio.  Relative accuracy ~1e-10 for the matrices the
    dimension solvers produce.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    top = float(m.max(initial=0.0))
    if top == 0.0:
        return 0.0
    delta = 1e-3 * top
    shifted = m + delta * np.eye(m.shape[0])
    v = np.full(m.shape[0], 1.0 / m.shape[0])
    lam = 0.0
    for _ in range(200_000):
        w = shifted @ v
        new_lam = float(w.max())
        w /= new_lam
        if abs(new_lam - lam) <= 1e-13 * max(1.0, new_lam) and np.max(np.abs(w - v)) <= 1e-13:
            return new_lam - delta
        lam = new_lam
        v = w
    return lam - delta


@dataclass(frozen=True)
class WeightedMatrix:
    """Adjacency weighted for the dimension equation: row i carries
    |alpha_i| * gamma_i^(-(s-1))."""

    matrix: np.ndarray
    s: float
    system: MarkovFif

    def rho(self) -> float:
        return spectral_radius(self.matrix)


def weighted_matrix(sys: MarkovFif, s: float) -> WeightedMatrix:
    if not 1.0 <= s <= 2.0:
        raise ValueError("s must lie in [1, 2]")
    weights = np.array([
        abs(float(sys.scalings[i])) * float(sys.gamma[i]) ** (-(s - 1.0))
        for i in range(sys.m)
    ])
    a = sys.sft.matrix().astype(float)
    return WeightedMatrix(matrix=weights[:, None] * a, s=s, system=sys)


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------


def check_collinear(data: DataSet, tol: float = 1e-12) -> bool:
    """Whether all knots lie on the line through the first and last knot.

    Rational inputs are compared exactly; floats within `tol` of the chord
    (measured by the cross product, normalized by the chord's y-span) count
    as collinear.
    """
    xs, ys = data.xs, data.ys
    dx = xs[-1] - xs[0]
    dy = ys[-1] - ys[0]
    exact = _all_rational(*xs, *ys)
    for i in range(1, len(xs) - 1):
        cross = dy * (xs[i] - xs[0]) - (ys[i] - ys[0]) * dx
        if exact:
            if cross != 0:
                return False
        elif abs(float(cross)) > tol * max(1.0, abs(float(dy))):
            return False
    return True


def check_quotient_condition(data: DataSet, scalings) -> tuple[bool, tuple[int, int] | None]:
    """Adjusted difference quotients of the data are not all equal.

    The quotient of interval i is
    (y_i - y_{i-1} - alpha_i (y_m - y_0)) / (x_i - x_{i-1} - alpha_i);
    when some pair differs, the attractor's Hausdorff dimension matches its
    box dimension.  Returns (holds, first differing pair (i, j)) with 1-based
    interval indices.  A vanishing denominator means map i is parabolic; the
    check still succeeds if two other quotients differ, and raises only when
    the outcome would hinge on the undefined quotients.
    """
    values = scalings.values if hasattr(scalings, "values") else tuple(scalings)
    xs, ys = data.xs, data.ys
    if len(values) != data.m:
        raise ValueError("one scaling per interval required")
    exact = _all_rational(*xs, *ys, *values)
    quotients: dict[int, object] = {}
    parabolic = []
    closing = ys[-1] - ys[0]
    for i in range(1, data.m + 1):
        den = xs[i] - xs[i - 1] - values[i - 1]
        if (den == 0) if exact else (float(den) == 0.0):
            parabolic.append(i)
        else:
            quotients[i] = (ys[i] - ys[i - 1] - values[i - 1] * closing) / den
    # The condition asks for *some* pair of distinct quotients, so a differing
    # pair among the defined ones settles it even if other maps are parabolic.
    for i in range(1, data.m + 1):
        for j in range(i + 1, data.m + 1):
            if i not in quotients or j not in quotients:
                continue
            qi, qj = quotients[i], quotients[j]
            if exact:
                differ = qi != qj
            else:
                differ = abs(float(qi) - float(qj)) > _REL_TOL * max(
                    1.0, abs(float(qi)), abs(float(qj)))
            if differ:
                return True, (i, j)
    if parabolic:
        # all defined quotients are equal; the undefined ones would decide,
        # and the theory does not cover them
        i = parabolic[0]
        raise PreconditionFailed(
            f"parabolic map {i}: x_{i} - x_{i - 1} = alpha_{i}; "
            "quotient condition inapplicable")
    return False, None


@dataclass(frozen=True)
class WeightWitness:
    """Two same-length admissible words with the same first and last symbol
    and the same symbol counts (hence exactly equal alpha- and gamma-products)
    whose composed maps differ in the shear entry."""

    omega: Word
    tau: Word
    length: int


def search_coincident_weights(sys: MarkovFif, l_max: int = 6) -> WeightWitness | None:
    """Scan word lengths 2..l_max for a coincident-weight witness pair.

    Words are grouped by (first symbol, last symbol, symbol counts); within a
    group both weight products agree exactly, so only the composed shear is
    compared (exactly for rational systems, else at relative 1e-9).  The
    first differing pair in lexicographic scan order is returned; None means
    the search was inconclusive within the budget, not a refutation.
    """
    if l_max < 2:
        raise ValueError("l_max must be >= 2")
    exact = _all_rational(*(mp.c for mp in sys.maps), *(mp.a for mp in sys.maps),
                          *(mp.d for mp in sys.maps))
    for length in range(2, l_max + 1):
        groups: dict[tuple, list[tuple[Word, object]]] = {}
        for word in admissible_words(sys.sft, length):
            comp = sys.maps[word[0] - 1]
            for sym in word[1:]:
                comp = comp.compose(sys.maps[sym - 1])
            key = (word[0], word[-1], abelianization(word, sys.m))
            for other, other_c in groups.setdefault(key, []):
                if exact:
                    differ = comp.c != other_c
                else:
                    differ = abs(float(comp.c) - float(other_c)) > _REL_TOL * max(
                        1.0, abs(float(comp.c)), abs(float(other_c)))
                if differ:
                    return WeightWitness(omega=other, tau=word, length=length)
            groups[key].append((word, comp.c))
    return None


# ---------------------------------------------------------------------------
# the box-dimension report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionReport:
    theoretical_box: float
    hausdorff_equals_box: str  # "yes" | "not-established" | "degenerate"
    s_root: float | None
    branch: str  # "collinear" | "sum<=1" | "moran" | "spectral<=1" | "spectral"
    witnesses: dict


def theoretical_box_dim(sys: MarkovFif, search_depth: int = 6) -> DimensionReport:
    """Box dimension of the attractor graph, with the branch that decided it.

    Collinear data give a line (dimension 1).  Full-shift systems go through
    the Moran equation (dimension 1 when sum |alpha_i| <= 1); Markov systems
    through the root of rho(A^(s)) = 1 (dimension 1 when rho(A^(1)) <= 1).
    Hausdorff evidence: the quotient condition (full shift) or a
    coincident-weight witness (Markov).
    """
    witnesses: dict = {}
    if check_collinear(sys.data):
        return DimensionReport(1.0, "degenerate", None, "collinear", witnesses)

    if sys.is_full_shift:
        total = sum(abs(float(a)) for a in sys.scalings.values)
        lengths = [sys.data.xs[i + 1] - sys.data.xs[i] for i in range(sys.m)]
        if total <= 1.0 + 1e-15:
            witnesses["sum_abs_alpha"] = total
            return DimensionReport(1.0, "degenerate", None, "sum<=1", witnesses)
        s = moran_solve(sys.scalings, lengths)
        try:
            holds, pair = check_quotient_condition(sys.data, sys.scalings)
        except PreconditionFailed as exc:
            witnesses["note"] = str(exc)
            holds, pair = False, None
        if pair is not None:
            witnesses["quotient_pair"] = pair
        return DimensionReport(
            theoretical_box=s,
            hausdorff_equals_box="yes" if holds else "not-established",
            s_root=s,
            branch="moran",
            witnesses=witnesses,
        )

    rho1 = spectral_radius(weighted_matrix(sys, 1.0).matrix)
    witnesses["rho_at_1"] = rho1
    if rho1 <= 1.0:
        return DimensionReport(1.0, "degenerate", None, "spectral<=1", witnesses)
    rho2 = spectral_radius(weighted_matrix(sys, 2.0).matrix)
    if rho2 >= 1.0:
        s = 2.0
    else:
        lo, hi = 1.0, 2.0
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if spectral_radius(weighted_matrix(sys, mid).matrix) > 1.0:
                lo = mid
            else:
                hi = mid
        s = 0.5 * (lo + hi)
    witness = search_coincident_weights(sys, l_max=search_depth)
    if witness is not None:
        witnesses["word_pair"] = witness
    return DimensionReport(
        theoretical_box=s,
        hausdorff_equals_box="yes" if witness is not None else "not-established",
        s_root=s,
        branch="spectral",
        witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
# stopping-time cover (the lower-bound box count)
# ---------------------------------------------------------------------------


def stopping_words(sys: MarkovFif, r: float) -> list[Word]:
    """The stopping set at scale r: admissible words whose accumulated
    x-contraction first drops to <= r (gamma_word^{-1} <= r < the parent's)."""
    if not 0.0 < r < 1.0:
        raise ValueError("scale r must lie in (0, 1)")
    gamma = [float(g) for g in sys.gamma]
    out: list[Word] = []

    def descend(word: tuple[int, ...], inv_gamma: float) -> None:
        if inv_gamma <= r:
            out.append(word)
            return
        for j in sys.sft.successors(word[-1]):
            descend(word + (j,), inv_gamma / gamma[j - 1])

    for i in range(1, sys.m + 1):
        descend((i,), 1.0 / gamma[i - 1])
    return out


def stopping_time_cover(sys: MarkovFif, r: float) -> int:
    """Lower-bound count of r-boxes meeting the graph: over the stopping set,
    each word's cylinder has width ~ r and height |D| |alpha_word|, so it
    meets at least ceil(|D| |alpha_word| gamma_word) boxes of side r."""
    lo, hi = sys.d_interval
    d_len = hi - lo
    alphas = [abs(float(a)) for a in sys.scalings.values]
    gammas = [float(g) for g in sys.gamma]
    total = 0
    for word in stopping_words(sys, r):
        a_prod = math.prod(alphas[s - 1] for s in word)
        g_prod = math.prod(gammas[s - 1] for s in word)
        total += math.ceil(d_len * a_prod * g_prod)
    return total


# ---------------------------------------------------------------------------
# fiber-derivative sampling
# ---------------------------------------------------------------------------


def ledrappier_sample(
    spec: SeriesSpec,
    x: float,
    n_terms: int,
    count: int,
    seed: int | None = None,
) -> np.ndarray:
    """Truncated i.i.d. samples of the fiber-derivative series
    Y_x = sum_{n>=1} (b alpha)^{-n} phi'(v_n), where v_n runs over uniformly
    random b-adic preimages of x (v_n = (v_{n-1} + digit) / b).

    phi' is the right derivative at kink points.  Requires the expanding
    regime b * alpha > 1; the truncation tail is bounded by
    max|phi'| (b alpha)^{-N} / (1 - (b alpha)^{-1}).
    """
    if n_terms < 1 or count < 1:
        raise ValueError("n_terms and count must be >= 1")
    b_alpha = spec.b * float(spec.alpha)
    if b_alpha <= 1.0:
        raise PreconditionFailed(
            f"b * alpha = {b_alpha:.6g} <= 1: fiber series diverges")
    phi_data = spec.phi()
    rng = np.random.default_rng(seed)
    v = np.full(count, float(x) % 1.0)
    acc = np.zeros(count)
    w = 1.0
    for _ in range(n_terms):
        w /= b_alpha
        digits = rng.integers(0, spec.b, size=count)
        v = (v + digits) / spec.b
        acc += w * _phi_right_derivative(spec, phi_data, v)
    return acc


def _phi_right_derivative(spec: SeriesSpec, phi_data: PiecewiseLinearPhi | None,
                          v: np.ndarray) -> np.ndarray:
    if spec.kind == "weierstrass":
        return -2.0 * np.pi * np.sin(2.0 * np.pi * v)
    if spec.kind == "takagi":
        return np.where(v < 0.5, 1.0, -1.0)
    cells = np.clip((v * phi_data.m).astype(np.int64), 0, phi_data.m - 1)
    slopes = np.array([float(c) * phi_data.m for c in phi_data.coefs])
    return slopes[cells]

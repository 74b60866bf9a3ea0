"""Expanding interval maps B_beta and their generalized Takagi graphs.

B_beta is the piecewise-linear map with two increasing branches of slope
beta in (1, 2]: x -> beta*x on [0, 1/2] and x -> 1 - beta*(1-x) on
(1/2, 1].  It is discontinuous at 1/2 (jump from beta/2 down to
1 - beta/2) and satisfies B(x) = 1 - B(1-x) away from the jump.  The
graph object of interest is

    T_{alpha,beta}(x) = sum_{k>=0} alpha^k psi(B_beta^k(x)),

with psi(z) = dist(z, Z), which for beta = 2 is the classical Takagi
series and for beta < 2 a self-affine function driven by a non-Markov
symbolic space in general.

The module provides the map itself, an exact-orbit evaluator for T plus
a contracting on-graph sampler for box counting, itinerary-cylinder
trees with admissible-word counts and the ratio entropy estimator,
detection of Markov parameters via critical-orbit closure, and the
weighted-adjacency dimension value s_m for a Markov partition.

Everything is deterministic; the cylinder refinement is level-vectorized
with children emitted in left-endpoint order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dimension import spectral_radius
from .errors import DiagnosticsFailed, InvalidConfig, PreconditionFailed

__all__ = [
    "QuadraticNumber",
    "golden_ratio",
    "TentSystem",
    "CylinderTree",
    "MarkovPartition",
    "tent_eval",
    "takagi_beta_eval",
    "takagi_beta_samples",
    "sample_graph",
    "self_affinity_residual",
    "self_affinity_max_residual",
    "cylinder_tree",
    "count_admissible",
    "entropy_estimate",
    "detect_markov",
    "markov_dim",
]

_HALF = Fraction(1, 2)


class QuadraticNumber:
    """Exact element a + b*sqrt(d) of a real quadratic field.

    Small substitute for a symbolic package: just enough arithmetic and
    ordering to run critical orbits of B_beta exactly when beta is a
    quadratic irrational (golden ratio, sqrt(2)-type).  `a` and `b` are
    Fractions, `d` a fixed positive non-square integer; values with
    different `d` do not mix.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        if int(d) != d or d <= 0:
            raise ValueError("d must be a positive integer")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = int(d)

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ValueError("mixed quadratic fields")
            return QuadraticNumber(other.a, other.b, self.d)
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(
            self.a * o.a + self.b * o.b * self.d,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        norm = o.a * o.a - o.b * o.b * o.d
        if norm == 0:
            raise ZeroDivisionError("division by zero quadratic number")
        # multiply by the conjugate (a - b sqrt(d)) / norm
        return self * QuadraticNumber(o.a / norm, -o.b / norm, self.d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def _sign(self):
        a, b = self.a, self.b
        if b == 0:
            return -1 if a < 0 else (0 if a == 0 else 1)
        if a == 0:
            return -1 if b < 0 else 1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 against b^2 d
        lhs, rhs = a * a, b * b * self.d
        if lhs == rhs:
            return 0
        bigger_rational = lhs > rhs
        return (1 if bigger_rational else -1) if a > 0 else (-1 if bigger_rational else 1)

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            return None
        return (self - o)._sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadraticNumber({self.a}, {self.b}, {self.d})"


def golden_ratio() -> QuadraticNumber:
    """(1 + sqrt(5)) / 2 as an exact quadratic number."""
    return QuadraticNumber(_HALF, _HALF, 5)


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, QuadraticNumber)) and not isinstance(
        value, bool
    )


def _lift(value, other):
    """Coerce `value` into the exact field of `other` (if quadratic)."""
    if isinstance(other, QuadraticNumber) and not isinstance(value, QuadraticNumber):
        return QuadraticNumber(Fraction(value), 0, other.d)
    return value


@dataclass(frozen=True)
class TentSystem:
    """Parameter pair (beta, alpha) with beta in (1,2], alpha in (0,1), alpha*beta > 1."""

    beta: object
    alpha: object

    def __post_init__(self):
        b, a = float(self.beta), float(self.alpha)
        if not 1.0 < b <= 2.0:
            raise InvalidConfig(f"beta must lie in (1, 2], got {b}")
        if not 0.0 < a < 1.0:
            raise InvalidConfig(f"alpha must lie in (0, 1), got {a}")
        if not a * b > 1.0:
            raise InvalidConfig(f"alpha*beta = {a * b} must exceed 1")

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)


def tent_eval(beta, x):
    """One step of B_beta.  Exact when beta and x are exact types.

    beta*x on [0, 1/2]; 1 - beta*(1 - x) on (1/2, 1].  The slope is +beta
    on both branches; the value jumps from beta/2 down to 1 - beta/2 at 1/2.
    """
    if not 1.0 < float(beta) <= 2.0:
        raise InvalidConfig(f"beta must lie in (1, 2], got {float(beta)}")
    if isinstance(beta, QuadraticNumber) or isinstance(x, QuadraticNumber):
        beta = _lift(beta, x)
        x = _lift(x, beta)
    if x < 0 or x > 1:
        raise ValueError(f"x = {float(x)} outside [0, 1]")
    if x <= _HALF:
        return beta * x
    return 1 - beta * (1 - x)


def _exact_beta(beta):
    """Exact value of beta: quadratic numbers pass through, floats become
    their exact binary rationals."""
    if isinstance(beta, QuadraticNumber):
        return beta
    return Fraction(beta)


def _exact_consts(b):
    """(zero, one, half) in the arithmetic of the exact beta `b`."""
    zero, one, half = Fraction(0), Fraction(1), _HALF
    if isinstance(b, QuadraticNumber):
        zero, one, half = (QuadraticNumber(v, 0, b.d) for v in (zero, one, half))
    return zero, one, half


def _tent_step_exact(b, one, half, x):
    return b * x if x <= half else one - b * (one - x)


def _truncation_terms(alpha: float, eps: float) -> int:
    # alpha^N / (2 (1-alpha)) <= eps since psi <= 1/2
    if eps <= 0:
        raise ValueError("eps must be positive")
    target = 2.0 * eps * (1.0 - alpha)
    if target >= 1.0:
        return 1
    return max(1, math.ceil(math.log(target) / math.log(alpha)))


def _series_rational(bn: int, bd: int, alpha: float, xn: int, xd: int, n: int) -> float:
    """Truncated psi-series along an exact B_beta orbit, beta = bn/bd.

    The orbit point is carried as num/den with den = xd * bd^k left
    unreduced: both branches multiply the denominator by bd, and the
    numerator needs one small-by-big integer multiply per step, so there
    is no gcd cost.  Each psi value enters the float accumulator through
    a correctly-rounded big-int division, so the only float error is one
    rounding per term.
    """
    num, den = xn, xd
    acc = 0.0
    coef = 1.0
    for _ in range(n):
        acc += coef * (min(num, den - num) / den)
        coef *= alpha
        if 2 * num <= den:
            num = bn * num
        else:
            num = bd * den - bn * (den - num)
        den = bd * den
    return acc


def _series_field(b, one, half, alpha: float, x, n: int) -> float:
    """Truncated psi-series with the orbit in exact field arithmetic."""
    z = x
    acc = 0.0
    coef = 1.0
    for _ in range(n):
        psi = z if z <= half else one - z
        acc += coef * float(psi)
        coef *= alpha
        z = _tent_step_exact(b, one, half, z)
    return acc


def takagi_beta_eval(sys: TentSystem, x, eps: float = 1e-10) -> float:
    """T_{alpha,beta}(x) as a truncated series with tail <= eps.

    Double-precision orbit iteration cannot work here: the error of
    B^k(x) grows like beta^k ulp while the weights shrink only like
    alpha^k, and alpha*beta > 1.  The orbit is therefore run exactly
    (integer tracking for rational/float beta, quadratic-field arithmetic
    otherwise), leaving only the truncation tail and one float rounding
    per term.
    """
    n = _truncation_terms(sys.alpha_float, eps)
    alpha = sys.alpha_float
    if isinstance(sys.beta, QuadraticNumber) or isinstance(x, QuadraticNumber):
        if isinstance(sys.beta, QuadraticNumber):
            b = sys.beta
            xq = _lift(x if isinstance(x, QuadraticNumber) else Fraction(x), b)
        else:
            xq = x
            b = _lift(_exact_beta(sys.beta), xq)
        zero, one, half = _exact_consts(b)
        if xq < zero or xq > one:
            raise ValueError(f"x = {float(xq)} outside [0, 1]")
        return _series_field(b, one, half, alpha, xq, n)
    xf = Fraction(x)
    if not 0 <= xf <= 1:
        raise ValueError(f"x = {float(xf)} outside [0, 1]")
    bq = Fraction(sys.beta)
    return _series_rational(
        bq.numerator, bq.denominator, alpha, xf.numerator, xf.denominator, n
    )


def takagi_beta_samples(sys: TentSystem, xs, eps: float = 1e-10) -> np.ndarray:
    """T_{alpha,beta} at each point of xs (exact orbit per point).

    Pointwise cost is ~n_terms big-int operations, so this is meant for
    grids up to a few thousand points; bulk graph coverage for box
    counting should use sample_graph instead.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 0.0 or xs.max() > 1.0):
        raise ValueError("sample points must lie in [0, 1]")
    n = _truncation_terms(sys.alpha_float, eps)
    alpha = sys.alpha_float
    if isinstance(sys.beta, QuadraticNumber):
        b = sys.beta
        zero, one, half = _exact_consts(b)
        return np.array(
            [_series_field(b, one, half, alpha, _lift(Fraction(x), b), n)
             for x in xs.ravel()]
        ).reshape(xs.shape)
    bq = Fraction(sys.beta)
    bn, bd = bq.numerator, bq.denominator
    out = np.empty(xs.size)
    for i, x in enumerate(xs.ravel()):
        f = Fraction(x)
        out[i] = _series_rational(bn, bd, alpha, f.numerator, f.denominator, n)
    return out.reshape(xs.shape)


def sample_graph(
    sys: TentSystem, depth: int, cap: int = 6_000_000, seed_grid: int = 64
) -> tuple:
    """Dense point cloud near the graph of T_{alpha,beta} for box counting.

    The graph is the attractor of the two fiber maps
    (x, y) -> (x/beta, x/beta + alpha*y)            over J_1 = [0, beta/2],
    (x, y) -> (1-(1-x)/beta, (1-x)/beta + alpha*y)  over J_2 = [1-beta/2, 1],
    so pushing graph points down `depth` compositions produces on-graph
    samples whose errors CONTRACT (x by 1/beta, y by alpha) instead of
    amplifying: the cloud stays within ~1e-14 of the graph set.  Seeds
    are exact evaluations on a dyadic grid (a single point would stall:
    0 is a fixed point of the left map); x-gaps then shrink from
    1/seed_grid by a factor beta per level while the size grows like
    beta^depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if seed_grid < 2:
        raise ValueError("seed_grid must be >= 2")
    b, a = sys.beta_float, sys.alpha_float
    xs = np.arange(seed_grid + 1) / seed_grid
    ys = takagi_beta_samples(sys, xs, eps=1e-12)
    for _ in range(depth):
        m1 = xs <= b / 2.0
        m2 = xs >= 1.0 - b / 2.0
        u1 = xs[m1] / b
        u2 = 1.0 - (1.0 - xs[m2]) / b
        ys = np.concatenate([u1 + a * ys[m1], (1.0 - u2) + a * ys[m2]])
        xs = np.concatenate([u1, u2])
        if xs.size > cap:
            raise PreconditionFailed(
                f"graph sample needs {xs.size} points, cap is {cap}"
            )
    return xs, ys


def self_affinity_residual(sys: TentSystem, x, eps: float = 1e-10) -> float:
    """Max pointwise self-affinity defect at x over applicable branches.

    The graph over I_1 = [0, 1/2] is the image of the graph over
    J_1 = [0, beta/2] under (x, y) -> (x/beta, x/beta + alpha*y), and the
    graph over I_2 = (1/2, 1] the image of the graph over
    J_2 = [1 - beta/2, 1] under (x, y) -> (1-(1-x)/beta, (1-x)/beta +
    alpha*y); pointwise T(u) = psi(u) + alpha*T(x) for the base image u
    of x.  The identity only survives at tolerance 3*eps if u is formed
    EXACTLY: T is Hoelder of small exponent, so even one float rounding
    in u costs ~1e-3.  x itself is taken at its exact (binary) value.
    """
    alpha = sys.alpha_float
    if isinstance(sys.beta, QuadraticNumber):
        b = sys.beta
        xe = _lift(x if isinstance(x, QuadraticNumber) else Fraction(x), b)
    else:
        b = Fraction(sys.beta)
        xe = Fraction(x)
    zero, one, half = _exact_consts(b)
    if xe < zero or xe > one:
        raise ValueError(f"x = {float(xe)} outside [0, 1]")
    t_x = takagi_beta_eval(sys, xe, eps)
    res = []
    if xe <= b * half:  # x in J_1; u <= 1/2 so psi(u) = u
        u = xe / b
        res.append(abs(takagi_beta_eval(sys, u, eps) - (float(u) + alpha * t_x)))
    if xe >= one - b * half:  # x in J_2; u >= 1/2 so psi(u) = 1 - u
        u = one - (one - xe) / b
        res.append(abs(takagi_beta_eval(sys, u, eps) - (float(one - u) + alpha * t_x)))
    return max(res)


def self_affinity_max_residual(
    sys: TentSystem, count: int = 1000, eps: float = 1e-10, seed: int = 0
) -> float:
    """Max self-affinity residual over `count` uniform random points."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    return max(self_affinity_residual(sys, x, eps) for x in rng.uniform(0.0, 1.0, count))


@dataclass(frozen=True)
class CylinderTree:
    """Depth-n itinerary cylinders of B_beta.

    Leaves are the maximal intervals on which the first n symbols of the
    itinerary (1 for [0,1/2], 2 for (1/2,1], read from B^0) are constant;
    they tile [0,1] and are ordered by left endpoint.  `words` packs the
    symbols as bits (0 -> symbol 1, 1 -> symbol 2), most significant bit
    first.  `level_counts[k]` is the leaf count at depth k+1, so the last
    entry is the admissible-word count at depth n.
    """

    beta: object
    depth: int
    lefts: np.ndarray
    rights: np.ndarray
    words: object
    level_counts: tuple
    exact: bool

    @property
    def count(self) -> int:
        return len(self.lefts)

    def word(self, i: int) -> tuple:
        bits = int(self.words[i])
        return tuple(((bits >> (self.depth - 1 - k)) & 1) + 1 for k in range(self.depth))

    def leaves(self):
        for i in range(self.count):
            yield float(self.lefts[i]), float(self.rights[i]), self.word(i)


def _refine_level_float(beta, a, b, lo, hi, w):
    straddle = (lo < 0.5) & (hi > 0.5)
    lmask = straddle | (hi <= 0.5)
    rmask = straddle | (lo >= 0.5)
    n_child = lmask.astype(np.intp) + rmask.astype(np.intp)
    total = int(n_child.sum())
    pos = np.cumsum(n_child) - n_child
    span = np.where(straddle, hi - lo, 1.0)
    xstar = a + (b - a) * (0.5 - lo) / span
    na = np.empty(total)
    nb = np.empty(total)
    nlo = np.empty(total)
    nhi = np.empty(total)
    nw = np.empty(total, dtype=np.uint64)
    li = pos[lmask]
    na[li] = a[lmask]
    nb[li] = np.where(straddle, xstar, b)[lmask]
    nlo[li] = beta * lo[lmask]
    nhi[li] = beta * np.where(straddle, 0.5, hi)[lmask]
    nw[li] = w[lmask] << np.uint64(1)
    ri = (pos + straddle)[rmask]
    na[ri] = np.where(straddle, xstar, a)[rmask]
    nb[ri] = b[rmask]
    nlo[ri] = 1.0 - beta * (1.0 - np.where(straddle, 0.5, lo))[rmask]
    nhi[ri] = 1.0 - beta * (1.0 - hi[rmask])
    nw[ri] = (w[rmask] << np.uint64(1)) | np.uint64(1)
    return na, nb, nlo, nhi, nw


def _refine_level_exact(b, one, half, leaves):
    out = []
    for a, bb, lo, hi, w in leaves:
        if lo < half < hi:
            xstar = a + (bb - a) * (half - lo) / (hi - lo)
            out.append((a, xstar, b * lo, b * half, w << 1))
            out.append((xstar, bb, one - b * (one - half), one - b * (one - hi), w << 1 | 1))
        elif hi <= half:
            out.append((a, bb, b * lo, b * hi, w << 1))
        else:
            out.append((a, bb, one - b * (one - lo), one - b * (one - hi), w << 1 | 1))
    return out


def cylinder_tree(beta, n: int, max_leaves: int = 4_000_000) -> CylinderTree:
    """Itinerary-cylinder tree of depth n, built by splitting leaves at the
    affine preimages of 1/2 (closed form per branch, no root finding).

    Exact beta (int / Fraction / QuadraticNumber) refines in exact
    arithmetic; float beta uses a vectorized double-precision pass.
    Raises PreconditionFailed with the offending count when a level would
    exceed `max_leaves`.
    """
    if n < 1:
        raise ValueError("depth must be >= 1")
    bf = float(beta)
    if not 1.0 < bf <= 2.0:
        raise InvalidConfig(f"beta must lie in (1, 2], got {bf}")
    counts = []
    if _is_exact(beta):
        # cheap automaton pre-pass so an over-budget request fails with the
        # count bound before any leaf materialization
        _count_levels(beta, n, max_leaves)
        b = _exact_beta(beta)
        zero, one, half = _exact_consts(b)
        leaves = [(zero, one, zero, one, 0)]
        for _ in range(n):
            leaves = _refine_level_exact(b, one, half, leaves)
            if len(leaves) > max_leaves:
                raise PreconditionFailed(
                    f"cylinder tree needs {len(leaves)} leaves, cap is {max_leaves}"
                )
            counts.append(len(leaves))
        return CylinderTree(
            beta=beta,
            depth=n,
            lefts=np.array([float(v[0]) for v in leaves]),
            rights=np.array([float(v[1]) for v in leaves]),
            words=tuple(v[4] for v in leaves),
            level_counts=tuple(counts),
            exact=True,
        )
    if n > 63:
        raise ValueError("float-mode words are limited to 63 symbols")
    a = np.array([0.0])
    b_arr = np.array([1.0])
    lo = np.array([0.0])
    hi = np.array([1.0])
    w = np.array([0], dtype=np.uint64)
    for _ in range(n):
        a, b_arr, lo, hi, w = _refine_level_float(bf, a, b_arr, lo, hi, w)
        if len(a) > max_leaves:
            raise PreconditionFailed(
                f"cylinder tree needs {len(a)} leaves, cap is {max_leaves}"
            )
        counts.append(len(a))
    return CylinderTree(
        beta=beta,
        depth=n,
        lefts=a,
        rights=b_arr,
        words=w,
        level_counts=tuple(counts),
        exact=False,
    )


def _count_levels(beta, n: int, max_leaves: int) -> list:
    """Admissible-word counts at depths 1..n without storing leaves.

    Exact beta runs an automaton over distinct image intervals with
    multiplicities (the future of a cylinder depends only on its image),
    which stays small even when the leaf count is astronomical.  Float
    beta refines endpoint arrays only.
    """
    if n < 1:
        raise ValueError("depth must be >= 1")
    bf = float(beta)
    if not 1.0 < bf <= 2.0:
        raise InvalidConfig(f"beta must lie in (1, 2], got {bf}")
    counts = []
    if _is_exact(beta):
        b = _exact_beta(beta)
        zero, one, half = _exact_consts(b)
        states = {(zero, one): 1}
        for _ in range(n):
            nxt: dict = {}
            for (lo, hi), c in states.items():
                if lo < half:
                    key = (b * lo, b * (hi if hi <= half else half))
                    nxt[key] = nxt.get(key, 0) + c
                if half < hi:
                    key = (one - b * (one - (lo if lo >= half else half)),
                           one - b * (one - hi))
                    nxt[key] = nxt.get(key, 0) + c
            states = nxt
            total = sum(states.values())
            if total > max_leaves:
                raise PreconditionFailed(
                    f"word count {total} exceeds cap {max_leaves}"
                )
            counts.append(total)
        return counts
    lo = np.array([0.0])
    hi = np.array([1.0])
    for _ in range(n):
        straddle = (lo < 0.5) & (hi > 0.5)
        lmask = straddle | (hi <= 0.5)
        rmask = straddle | (lo >= 0.5)
        total = int(lmask.sum() + rmask.sum())
        if total > max_leaves:
            raise PreconditionFailed(f"word count {total} exceeds cap {max_leaves}")
        nlo = np.empty(total)
        nhi = np.empty(total)
        n_child = lmask.astype(np.intp) + rmask.astype(np.intp)
        pos = np.cumsum(n_child) - n_child
        li = pos[lmask]
        nlo[li] = bf * lo[lmask]
        nhi[li] = bf * np.where(straddle, 0.5, hi)[lmask]
        ri = (pos + straddle)[rmask]
        nlo[ri] = 1.0 - bf * (1.0 - np.where(straddle, 0.5, lo))[rmask]
        nhi[ri] = 1.0 - bf * (1.0 - hi[rmask])
        lo, hi = nlo, nhi
        counts.append(total)
    return counts


def count_admissible(beta, n: int, max_leaves: int = 16_000_000) -> int:
    """Number of depth-n itinerary words of B_beta (equals the leaf count)."""
    return _count_levels(beta, n, max_leaves)[-1]


def entropy_estimate(beta, n: int, max_leaves: int = 16_000_000) -> float:
    """log(count(n+1) / count(n)) -> log(beta).

    The ratio form drops the O(1/n) bias of (1/n) log count(n); see
    docs/entropy-estimator.md for the measured convergence of both.
    """
    counts = _count_levels(beta, n + 1, max_leaves)
    return math.log(counts[-1] / counts[-2])


@dataclass(frozen=True)
class MarkovPartition:
    """Breakpoints of [0,1] whose cells map onto exact unions of cells.

    `transition[i, j] = 1` iff the image of cell i covers cell j.  `exact`
    records whether the closure was certified in exact arithmetic or only
    within a numerical tolerance.
    """

    breakpoints: tuple
    transition: np.ndarray
    exact: bool

    @property
    def label(self) -> str:
        return "exact Markov" if self.exact else "numerically Markov"

    @property
    def cells(self) -> tuple:
        bp = self.breakpoints
        return tuple((bp[i], bp[i + 1]) for i in range(len(bp) - 1))


def _orbit_until_return(b, one, half, start, seen, steps, tol, exact):
    """Append the orbit of `start` to `seen` until it returns to a known
    point (True) or the budget runs out (False)."""

    def known(v):
        if exact:
            return v in seen
        fv = float(v)
        return any(abs(fv - p) <= tol for p in seen)

    v = start
    for _ in range(steps + 1):
        if known(v):
            return True
        if exact:
            seen.add(v)
        else:
            seen.append(float(v))
        v = _tent_step_exact(b, one, half, v)
    return False


def detect_markov(beta, steps: int = 60, tol: float = 1e-11):
    """Markov partition from critical-orbit closure, or None.

    Follows both one-sided critical values — c1 = B(1/2) = beta/2 and the
    right limit c2 = B(1/2+) = 1 - beta/2 — until each orbit lands on an
    already-seen point (int / Fraction / QuadraticNumber beta: exact
    equality; float beta: within tol).  Both orbits appear among the
    image endpoints of any partition containing 1/2, so both must close
    for the breakpoint set {0, 1, 1/2} + orbits to be finite.  The
    candidate is then verified: every cell image must land on breakpoints
    and cover a contiguous block of cells; verification failure returns
    None rather than a wrong partition.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    bf = float(beta)
    if not 1.0 < bf <= 2.0:
        raise InvalidConfig(f"beta must lie in (1, 2], got {bf}")
    exact = _is_exact(beta)
    b = _exact_beta(beta) if exact else bf
    zero, one, half = _exact_consts(b) if exact else (0.0, 1.0, 0.5)
    seen = (set() if exact else [])
    if not _orbit_until_return(b, one, half, b * half, seen, steps, tol, exact):
        return None
    if not _orbit_until_return(b, one, half, one - b * half, seen, steps, tol, exact):
        return None

    points = list(seen) + [zero, one, half]
    if exact:
        points = sorted(set(points))
        breakpoints = points
    else:
        points.sort()
        merged = [points[0]]
        for p in points[1:]:
            if p - merged[-1] <= tol:
                # prefer the canonical constant when a cluster contains one
                if p in (0.0, 0.5, 1.0):
                    merged[-1] = p
            else:
                merged.append(p)
        breakpoints = merged
    m = len(breakpoints) - 1
    if m < 2:
        return None

    def locate(v):
        if exact:
            try:
                return breakpoints.index(v)
            except ValueError:
                return None
        fv = float(v)
        for j, p in enumerate(breakpoints):
            if abs(fv - float(p)) <= max(tol, 4.0 * abs(fv) * 2.2e-16):
                return j
        return None

    transition = np.zeros((m, m), dtype=np.int8)
    for i in range(m):
        a, c = breakpoints[i], breakpoints[i + 1]
        if c <= half:
            img_lo, img_hi = b * a, b * c
        else:
            img_lo, img_hi = one - b * (one - a), one - b * (one - c)
        j_lo, j_hi = locate(img_lo), locate(img_hi)
        if j_lo is None or j_hi is None or j_hi <= j_lo:
            return None
        transition[i, j_lo:j_hi] = 1
    return MarkovPartition(
        breakpoints=tuple(float(p) for p in breakpoints),
        transition=transition,
        exact=exact,
    )


def _scc_classes(adj: np.ndarray) -> list:
    """Strongly connected components as index lists (order of first member)."""
    m = adj.shape[0]
    reach = (np.eye(m, dtype=np.int64) + (adj > 0)) > 0
    for _ in range(max(1, math.ceil(math.log2(max(m, 2))))):
        step = reach.astype(np.int64)
        reach = (step @ step) > 0
    mutual = reach & reach.T
    classes, assigned = [], np.zeros(m, dtype=bool)
    for i in range(m):
        if not assigned[i]:
            members = np.nonzero(mutual[i])[0]
            assigned[members] = True
            classes.append(list(members))
    return classes


def markov_dim(sys: TentSystem, part: MarkovPartition) -> float:
    """Value s_m with rho(alpha * beta^{-(s-1)} * A) = 1 for the partition's
    adjacency A, restricted to the dominant recurrent class.

    The entries are homogeneous in s, so rho(s) = alpha * beta^{1-s} *
    rho(A) and the root has the closed form 1 + log(alpha*rho(A))/log(beta);
    the value is nevertheless found by bisection on [1, 2] and the two
    routes are cross-checked.  rho(A) is the max spectral radius over
    strongly connected classes (block-triangular structure), which also
    names the recurrent class realizing it.
    """
    adj = np.asarray(part.transition, dtype=float)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("transition matrix must be square")
    rho_adj, best = 0.0, None
    for cls in _scc_classes(adj):
        rho_c = spectral_radius(adj[np.ix_(cls, cls)])
        if rho_c > rho_adj:
            rho_adj, best = rho_c, cls
    alpha, beta = sys.alpha_float, sys.beta_float
    rho_at_1 = alpha * rho_adj
    if rho_at_1 <= 1.0 + 1e-13:
        raise PreconditionFailed(
            f"degenerate: rho at s=1 is {rho_at_1:.6g} <= 1 on every recurrent "
            f"class (best class {best})"
        )
    closed_form = 1.0 + math.log(rho_at_1) / math.log(beta)
    lo, hi = 1.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if alpha * beta ** (1.0 - mid) * rho_adj > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    s_m = 0.5 * (lo + hi)
    if abs(s_m - closed_form) > 1e-9 and closed_form <= 2.0:
        raise DiagnosticsFailed(
            f"bisection {s_m} and closed form {closed_form} disagree"
        )
    return s_m

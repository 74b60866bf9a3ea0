"""Dynamically defined function graphs.

Three constructions share one geometry:

* lacunary series G(x) = sum_{n>=0} alpha^n phi(b^n x) with phi 1-periodic
  Lipschitz (cosine gives Weierstrass-type graphs, the distance-to-integers
  tent gives Takagi-type graphs, and piecewise-linear data-driven phi gives
  fractal interpolation graphs on equally spaced knots);
* fractal interpolation functions through a data set Delta = {(x_i, y_i)}
  with vertical scaling factors alpha_i, realized as the attractor of m
  lower-triangular affine contractions;
* Markov interpolation systems, where branch i expands [x_{i-1}, x_i] onto
  [x_{l(i)}, x_{r(i)}] instead of the whole interval, giving a subshift of
  finite type in place of the full shift.

Every graph is simultaneously the repeller of an expanding map
F_i(x, y) = (f_i(x), g_i(x, y)) and the attractor of the local inverses
F~_i; both directions are implemented, together with the natural projection
from symbol space and vectorized samplers used by the box-count estimator.

All coefficient arithmetic is plain field operations, so passing
`fractions.Fraction` data produces exact maps (used by the rational-mode
condition checks in the dimension module).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidConfig
from .symbolic import Sft, Word

_ENDPOINT_TOL = 1e-12
_D_INTERVAL_TOL = 1e-10

SERIES_KINDS = ("weierstrass", "takagi", "piecewise-linear-from-data")


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap2:
    """Lower-triangular planar affine map (x, y) -> (a x + tx, c x + d y + ty)."""

    a: object
    c: object
    d: object
    tx: object
    ty: object

    def apply(self, x, y):
        return self.a * x + self.tx, self.c * x + self.d * y + self.ty

    def compose(self, other: "AffineMap2") -> "AffineMap2":
        """self after other (apply `other` first)."""
        return AffineMap2(
            a=self.a * other.a,
            c=self.c * other.a + self.d * other.c,
            d=self.d * other.d,
            tx=self.a * other.tx + self.tx,
            ty=self.c * other.tx + self.d * other.ty + self.ty,
        )

    def fixed_point(self):
        x = self.tx / (1 - self.a)
        y = (self.c * x + self.ty) / (1 - self.d)
        return x, y

    def as_floats(self) -> "AffineMap2":
        return AffineMap2(float(self.a), float(self.c), float(self.d),
                          float(self.tx), float(self.ty))


# ---------------------------------------------------------------------------
# data sets and scalings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataSet:
    """Interpolation knots (x_0, y_0), ..., (x_m, y_m) with x_0 = 0 < ... < x_m = 1."""

    xs: tuple
    ys: tuple

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must have equal length")
        if len(self.xs) < 3:
            raise ValueError("need at least two intervals (three knots)")
        if float(self.xs[0]) != 0.0 or float(self.xs[-1]) != 1.0:
            raise ValueError("knots must start at x=0 and end at x=1")
        for u, v in zip(self.xs, self.xs[1:]):
            if not float(u) < float(v):
                raise ValueError("knot abscissae must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.xs) - 1

    def equally_spaced(self, tol: float = 1e-12) -> bool:
        m = self.m
        return all(abs(float(self.xs[i]) - i / m) <= tol for i in range(m + 1))


@dataclass(frozen=True)
class VerticalScalings:
    """Vertical scaling factors alpha_i, each in (-1, 1) and nonzero."""

    values: tuple

    def __post_init__(self) -> None:
        for v in self.values:
            fv = float(v)
            if not (abs(fv) < 1.0) or fv == 0.0:
                raise ValueError("each vertical scaling must satisfy 0 < |alpha_i| < 1")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _as_scalings(values, m: int) -> VerticalScalings:
    sc = values if isinstance(values, VerticalScalings) else VerticalScalings(tuple(values))
    if len(sc) != m:
        raise ValueError(f"expected {m} vertical scalings, got {len(sc)}")
    return sc


# ---------------------------------------------------------------------------
# 1-periodic displacement functions phi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinearPhi:
    """1-periodic piecewise-linear phi on the equally spaced knots i/m.

    On [(i-1)/m, i/m) the value is coef_i (m x - (i-1)) + base_i with
    coef_i = y_i - y_{i-1} - alpha (y_m - y_0) and base_i = y_{i-1} - alpha y_0;
    for y_0 = y_m = 0 this is exactly the piecewise-linear interpolant of the
    data (base_i = y_{i-1}, knot values exact).
    """

    m: int
    coefs: tuple
    bases: tuple

    def eval_scalar(self, t) -> float:
        u = t - math.floor(t) if isinstance(t, float) else t % 1
        i = min(int(u * self.m), self.m - 1)
        return float(self.coefs[i] * (self.m * u - i) + self.bases[i])

    def eval_array(self, t: np.ndarray) -> np.ndarray:
        u = t - np.floor(t)
        i = np.minimum((u * self.m).astype(np.int64), self.m - 1)
        coefs = np.array([float(c) for c in self.coefs])
        bases = np.array([float(b) for b in self.bases])
        return coefs[i] * (self.m * u - i) + bases[i]

    def right_slope(self, t: float) -> float:
        u = t - math.floor(t)
        i = min(int(u * self.m), self.m - 1)
        return float(self.coefs[i]) * self.m

    def max_abs(self) -> float:
        # piecewise linear: extrema at cell endpoints; a grid is scanned as
        # well so the bound stays valid if the cell structure ever changes
        ends = [abs(float(b)) for b in self.bases]
        ends += [abs(float(b) + float(c)) for b, c in zip(self.bases, self.coefs)]
        grid = self.eval_array(np.linspace(0.0, 1.0, 10_001))
        return max(max(ends), float(np.max(np.abs(grid))))


def build_phi_from_data(data: DataSet, alpha) -> PiecewiseLinearPhi:
    """Piecewise-linear displacement from equally spaced data, extended
    1-periodically.  Requires x_i = i/m and y_0 = y_m (continuity of the
    periodic extension)."""
    if not data.equally_spaced():
        raise ValueError("data knots must be equally spaced (x_i = i/m)")
    if float(data.ys[0]) != float(data.ys[-1]):
        raise ValueError("periodic extension needs y_0 = y_m")
    ys = data.ys
    m = data.m
    closing = ys[-1] - ys[0]
    coefs = tuple(ys[i + 1] - ys[i] - alpha * closing for i in range(m))
    bases = tuple(ys[i] - alpha * ys[0] for i in range(m))
    return PiecewiseLinearPhi(m=m, coefs=coefs, bases=bases)


# ---------------------------------------------------------------------------
# lacunary series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesSpec:
    """G(x) = sum_{n>=0} alpha^n phi(b^n x).

    The series converges for any 0 < alpha < 1; the graph is fractal (and the
    dimension formulas apply) only in the regime b * alpha > 1, which the
    dimension-side routines enforce as their own precondition.  alpha = 1/b
    (the classical b=2 Takagi function) is therefore accepted here.
    """

    kind: str
    alpha: float
    b: int
    data: DataSet | None = None

    def __post_init__(self) -> None:
        if self.kind not in SERIES_KINDS:
            raise ValueError(f"kind must be one of {SERIES_KINDS}")
        if self.b < 2:
            raise ValueError("base b must be an integer >= 2")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError("alpha must satisfy 0 < alpha < 1")
        if self.kind == "piecewise-linear-from-data" and self.data is None:
            raise ValueError("data kind requires a DataSet")

    @property
    def fractal_regime(self) -> bool:
        return float(self.alpha) * self.b > 1.0

    def phi(self) -> "PiecewiseLinearPhi | None":
        if self.kind == "piecewise-linear-from-data":
            return build_phi_from_data(self.data, self.alpha)
        return None


def _phi_scalar(spec: SeriesSpec, phi_data: PiecewiseLinearPhi | None, t) -> float:
    if spec.kind == "weierstrass":
        return math.cos(2.0 * math.pi * float(t))
    if spec.kind == "takagi":
        u = t % 1
        return float(min(u, 1 - u))
    return phi_data.eval_scalar(t)


def _phi_array(spec: SeriesSpec, phi_data: PiecewiseLinearPhi | None, t: np.ndarray) -> np.ndarray:
    if spec.kind == "weierstrass":
        return np.cos(2.0 * np.pi * t)
    if spec.kind == "takagi":
        return np.minimum(t, 1.0 - t)
    return phi_data.eval_array(t)


def _phi_max_abs(spec: SeriesSpec, phi_data: PiecewiseLinearPhi | None) -> float:
    if spec.kind == "weierstrass":
        return 1.0
    if spec.kind == "takagi":
        return 0.5
    return phi_data.max_abs()


def truncation_terms(spec: SeriesSpec, eps: float) -> int:
    """Smallest N with tail bound alpha^N max|phi| / (1 - alpha) <= eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    alpha = float(spec.alpha)
    max_phi = _phi_max_abs(spec, spec.phi())
    arg = eps * (1.0 - alpha) / max_phi
    if arg >= 1.0:
        return 1
    return max(1, math.ceil(math.log(arg) / math.log(alpha)))


def eval_series(spec: SeriesSpec, x, eps: float = 1e-10) -> float:
    """Evaluate the series at one point with truncation error <= eps.

    The arguments b^n x mod 1 are reduced in exact integer arithmetic (floats
    convert to exact dyadic rationals), so rounding never compounds through
    the expanding factor b^n; the only float error is one rounding per term.
    """
    phi_data = spec.phi()
    n_terms = truncation_terms(spec, eps)
    fr = Fraction(x)
    fr -= math.floor(fr)
    num, den = fr.numerator, fr.denominator
    alpha = float(spec.alpha)
    acc = 0.0
    apow = 1.0
    for _ in range(n_terms):
        acc += apow * _phi_scalar(spec, phi_data, Fraction(num, den))
        apow *= alpha
        num = (num * spec.b) % den
    return acc


def self_similarity_residual(spec: SeriesSpec, x, eps: float = 1e-10) -> float:
    """|G(x) - alpha G(bx mod 1) - phi(x)|; bounded by 3 eps for the exact G."""
    phi_data = spec.phi()
    u = Fraction(x)
    u -= math.floor(u)
    bu = (u * spec.b) % 1
    g_x = eval_series(spec, u, eps)
    g_bu = eval_series(spec, bu, eps)
    return abs(g_x - float(spec.alpha) * g_bu - _phi_scalar(spec, phi_data, u))


def series_step(spec: SeriesSpec, x: float, y: float) -> tuple[float, float, int]:
    """One step of the expanding dynamics F(x, y) = (bx mod 1, (y - phi(x))/alpha).

    Returns (x', y', branch) with branch = floor(b x) in 0..b-1.
    """
    u = x - math.floor(x)
    branch = min(int(u * spec.b), spec.b - 1)
    phi_data = spec.phi()
    x_new = u * spec.b - branch
    y_new = (y - _phi_scalar(spec, phi_data, u)) / float(spec.alpha)
    return x_new, y_new, branch


def series_samples(spec: SeriesSpec, depth: int, cap: int = 20_000_000) -> tuple[np.ndarray, np.ndarray]:
    """Graph samples at every b-adic point k / b^depth, k = 0..b^depth.

    The arguments b^n k / b^depth mod 1 are exact integers mod b^depth, and
    the tail beyond n = depth collapses to the closed form
    alpha^depth phi(0) / (1 - alpha), so each sample carries only rounding
    error (~1e-15) regardless of depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    big_k = spec.b ** depth
    if big_k + 1 > cap:
        raise ValueError(f"{big_k + 1} sample points exceed the cap {cap}")
    phi_data = spec.phi()
    alpha = float(spec.alpha)
    r = np.arange(big_k + 1, dtype=np.int64)
    x = r / big_k
    r = r % big_k
    acc = np.zeros(big_k + 1)
    apow = 1.0
    for _ in range(depth):
        acc += apow * _phi_array(spec, phi_data, r / big_k)
        apow *= alpha
        r = (r * spec.b) % big_k
    acc += apow / (1.0 - alpha) * _phi_scalar(spec, phi_data, 0.0)
    return x, acc


# ---------------------------------------------------------------------------
# interpolation systems
# ---------------------------------------------------------------------------


def fif_maps(data: DataSet, scalings) -> list[AffineMap2]:
    """The m affine contractions whose attractor interpolates the data:

        x' = (x_i - x_{i-1}) x + x_{i-1}
        y' = (y_i - y_{i-1} - alpha_i (y_m - y_0)) x + alpha_i y
             + y_{i-1} - alpha_i y_0

    Map i sends (0, y_0) to (x_{i-1}, y_{i-1}) and (1, y_m) to (x_i, y_i)
    exactly.
    """
    sc = _as_scalings(scalings, data.m)
    xs, ys = data.xs, data.ys
    maps = []
    for i in range(1, data.m + 1):
        al = sc[i - 1]
        maps.append(AffineMap2(
            a=xs[i] - xs[i - 1],
            c=ys[i] - ys[i - 1] - al * (ys[-1] - ys[0]),
            d=al,
            tx=xs[i - 1],
            ty=ys[i - 1] - al * ys[0],
        ))
    return maps


@dataclass(frozen=True)
class MarkovFif:
    """Markov interpolation system.

    Branch i expands [x_{i-1}, x_i] onto [x_{l(i)}, x_{r(i)}] through
    f_i(x) = gamma_i (x - x_{i-1}) + x_{l(i)} with gamma_i > 1, and the fiber
    map g_i(x, y) = y / alpha_i + a_i x + t_i matches the knots at both ends.
    The local inverses F~_i are lower-triangular affine contractions; the
    subshift has A[i][j] = 1 iff l(i) + 1 <= j <= r(i).  The full shift
    (classic interpolation) is the special case l = 0, r = m.
    """

    data: DataSet
    scalings: VerticalScalings
    ell: tuple[int, ...]
    r: tuple[int, ...]
    gamma: tuple
    a_coef: tuple
    t_coef: tuple
    maps: tuple[AffineMap2, ...]
    sft: Sft
    d_interval: tuple[float, float]

    @property
    def m(self) -> int:
        return self.data.m

    @property
    def is_full_shift(self) -> bool:
        return all(l == 0 for l in self.ell) and all(rr == self.m for rr in self.r)

    def anchor(self, i: int):
        """Left endpoint (x_{l(i)}, y_{l(i)}) of branch i's expanded interval."""
        return self.data.xs[self.ell[i - 1]], self.data.ys[self.ell[i - 1]]

    def branch_of(self, x) -> int:
        """Branch index i with x in [x_{i-1}, x_i); knots belong to the
        interval on their right, and the last interval is right-closed.

        Comparisons use the stored knot values directly, so exact inputs
        (fractions against fraction knots) select branches exactly.
        """
        if x < 0 or x > 1:
            raise ValueError("x outside [0, 1]")
        for i in range(1, self.m):
            if x < self.data.xs[i]:
                return i
        return self.m

    def f(self, i: int, x):
        return self.gamma[i - 1] * (x - self.data.xs[i - 1]) + self.data.xs[self.ell[i - 1]]

    def g(self, i: int, x, y):
        return y / self.scalings[i - 1] + self.a_coef[i - 1] * x + self.t_coef[i - 1]


def markov_fif_system(data: DataSet, scalings, ell: Sequence[int], r: Sequence[int]) -> MarkovFif:
    """Build a Markov interpolation system from knots, scalings and the
    expansion ranges (l(i), r(i))."""
    sc = _as_scalings(scalings, data.m)
    m = data.m
    ell = tuple(int(v) for v in ell)
    r = tuple(int(v) for v in r)
    if len(ell) != m or len(r) != m:
        raise ValueError("ell and r must list one index per interval")
    for i in range(m):
        if not (0 <= ell[i] < r[i] <= m):
            raise ValueError(f"need 0 <= l(i) < r(i) <= m, got ({ell[i]}, {r[i]}) at i={i + 1}")
    xs, ys = data.xs, data.ys
    gamma, a_coef, t_coef, maps = [], [], [], []
    for i in range(1, m + 1):
        al = sc[i - 1]
        li, ri = ell[i - 1], r[i - 1]
        width = xs[i] - xs[i - 1]
        g_i = (xs[ri] - xs[li]) / width
        if float(g_i) <= 1.0:
            raise InvalidConfig(
                f"branch {i} is not expanding: gamma_{i} = {float(g_i):.6g} <= 1"
            )
        a_i = (ys[ri] - ys[li] - (ys[i] - ys[i - 1]) / al) / width
        t_i = ys[li] - ys[i - 1] / al - a_i * xs[i - 1]
        tx = xs[i - 1] - xs[li] / g_i
        c = -al * a_i / g_i
        ty = -al * (a_i * tx + t_i)
        gamma.append(g_i)
        a_coef.append(a_i)
        t_coef.append(t_i)
        maps.append(AffineMap2(a=1 / g_i, c=c, d=al, tx=tx, ty=ty))

    adjacency = tuple(
        tuple(1 if ell[i] + 1 <= j <= r[i] else 0 for j in range(1, m + 1))
        for i in range(m)
    )
    sft = Sft(m, adjacency)

    # endpoint matching conditions, checked numerically on top of the algebra
    for i in range(1, m + 1):
        li, ri = ell[i - 1], r[i - 1]
        g_left = float(ys[li]) - (float(ys[i - 1]) / float(sc[i - 1])
                                  + float(a_coef[i - 1]) * float(xs[i - 1]) + float(t_coef[i - 1]))
        g_right = float(ys[ri]) - (float(ys[i]) / float(sc[i - 1])
                                   + float(a_coef[i - 1]) * float(xs[i]) + float(t_coef[i - 1]))
        if abs(g_left) > _ENDPOINT_TOL or abs(g_right) > _ENDPOINT_TOL:
            raise ValueError(f"fiber endpoint conditions violated at branch {i}")

    d_lo, d_hi = _bounding_interval(xs, ys, maps, ell, r)
    return MarkovFif(
        data=data, scalings=sc, ell=ell, r=r,
        gamma=tuple(gamma), a_coef=tuple(a_coef), t_coef=tuple(t_coef),
        maps=tuple(maps), sft=sft, d_interval=(d_lo, d_hi),
    )


def fif_system(data: DataSet, scalings) -> MarkovFif:
    """Classic interpolation system: every branch expands onto [0, 1]."""
    m = data.m
    return markov_fif_system(data, scalings, ell=(0,) * m, r=(m,) * m)


def _bounding_interval(xs, ys, maps, ell, r) -> tuple[float, float]:
    """Smallest interval D containing the knot ordinates and invariant under
    the fiber parts of the local inverses over their full strips, found by
    iterating the monotone interval map from [min y, max y]; geometric
    convergence since every |alpha_i| < 1."""
    lo = min(float(y) for y in ys)
    hi = max(float(y) for y in ys)
    strips = [(float(xs[ell[i]]), float(xs[r[i]])) for i in range(len(maps))]
    fmaps = [mp.as_floats() for mp in maps]
    for _ in range(100_000):
        new_lo, new_hi = lo, hi
        for mp, (xl, xr) in zip(fmaps, strips):
            cx = (mp.c * xl, mp.c * xr)
            dy = (mp.d * lo, mp.d * hi)
            new_lo = min(new_lo, mp.ty + min(cx) + min(dy))
            new_hi = max(new_hi, mp.ty + max(cx) + max(dy))
        if new_lo >= lo - 1e-13 and new_hi <= hi + 1e-13:
            return lo, hi
        lo, hi = new_lo, new_hi
    raise RuntimeError("bounding interval iteration failed to converge")


def bounding_interval(sys: MarkovFif) -> tuple[float, float]:
    """The invariant fiber interval D of the system (see _bounding_interval)."""
    return sys.d_interval


def invariance_residual(sys: MarkovFif) -> float:
    """How far the images of [x_l, x_r] x D stick out of D (0 when invariant)."""
    lo, hi = sys.d_interval
    worst = 0.0
    for i, mp in enumerate(sys.maps):
        fm = mp.as_floats()
        xl = float(sys.data.xs[sys.ell[i]])
        xr = float(sys.data.xs[sys.r[i]])
        cx = (fm.c * xl, fm.c * xr)
        dy = (fm.d * lo, fm.d * hi)
        worst = max(worst, lo - (fm.ty + min(cx) + min(dy)))
        worst = max(worst, (fm.ty + max(cx) + max(dy)) - hi)
    return max(worst, 0.0)


# ---------------------------------------------------------------------------
# natural projection, expanding dynamics, samplers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectedPoint:
    x: float
    y: float
    diameter: float


def natural_project(sys: MarkovFif, word: Sequence[int]) -> ProjectedPoint:
    """Image of a finite word under the natural projection:
    F~_{w_1} o ... o F~_{w_n} applied to the left anchor of the last symbol.

    The reported diameter bounds the image of the whole anchor strip
    [x_{l(w_n)}, x_{r(w_n)}] x D, i.e. the cylinder containing every
    continuation of the word; it decays like
    max(gamma_min^{-n}, alpha_max^n) up to a constant.
    """
    word = tuple(word)
    if not word:
        raise ValueError("word must be nonempty")
    if not sys.sft.is_admissible(word):
        raise ValueError(f"word {word} is not admissible")
    comp = sys.maps[word[0] - 1]
    for s in word[1:]:
        comp = comp.compose(sys.maps[s - 1])
    ax, ay = sys.anchor(word[-1])
    x, y = comp.apply(ax, ay)
    fm = comp.as_floats()
    last = word[-1]
    width = float(sys.data.xs[sys.r[last - 1]]) - float(sys.data.xs[sys.ell[last - 1]])
    d_len = sys.d_interval[1] - sys.d_interval[0]
    diam = abs(fm.a) * width + abs(fm.c) * width + abs(fm.d) * d_len
    return ProjectedPoint(x=float(x), y=float(y), diameter=diam)


def expanding_step(sys: MarkovFif, x, y) -> tuple:
    """One step of F(x, y) = (f_i(x), g_i(x, y)) on branch i containing x.

    Arithmetic follows the input types: exact inputs on a system built from
    exact data give an exact orbit, which matters because the expansion
    amplifies double-precision noise by prod(gamma) and prod(1/|alpha|).
    """
    i = sys.branch_of(x)
    return sys.f(i, x), sys.g(i, x, y), i


def graph_eval(sys: MarkovFif, x: float, depth: int = 60) -> float:
    """Evaluate the interpolation function at x through the expanding
    dynamics: follow the branch itinerary forward, then unwind
    G(x) = alpha_i (G(f_i(x)) - a_i x - t_i) backwards from a seed in D.

    The seed error contracts like prod |alpha_i|; double-precision noise in
    the forward orbit enters through the Hoelder modulus of G, so accuracy
    saturates around 1e-6..1e-9 depending on the system.
    """
    trail: list[tuple[int, float]] = []
    t = float(x)
    for _ in range(depth):
        i = sys.branch_of(t)
        trail.append((i, t))
        t = float(sys.f(i, t))
        t = min(max(t, 0.0), 1.0)
    y = 0.5 * (sys.d_interval[0] + sys.d_interval[1])
    for i, xt in reversed(trail):
        al = float(sys.scalings[i - 1])
        y = al * (y - float(sys.a_coef[i - 1]) * xt - float(sys.t_coef[i - 1]))
    return y


def sample_count(sys: MarkovFif, depth: int) -> int:
    """Number of admissible words of the given length (sum of A^(depth-1))."""
    power = np.eye(sys.m, dtype=np.int64)
    a = sys.sft.matrix()
    for _ in range(depth - 1):
        power = power @ a
    return int(power.sum())


def sample_graph(sys: MarkovFif, depth: int, cap: int = 6_000_000) -> tuple[np.ndarray, np.ndarray]:
    """One graph point per admissible word of the given length, in
    lexicographic word order: the natural projection of each word.

    The level-by-level expansion composes the per-symbol inverse maps with
    vectorized arithmetic, so deep Markov trees stay cheap.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    total = sample_count(sys, depth)
    if total > cap:
        raise ValueError(f"{total} admissible words exceed the cap {cap}")
    m = sys.m
    adj = np.array(sys.sft.adjacency, dtype=bool)
    pa = np.array([float(mp.a) for mp in sys.maps])
    pc = np.array([float(mp.c) for mp in sys.maps])
    pd = np.array([float(mp.d) for mp in sys.maps])
    ptx = np.array([float(mp.tx) for mp in sys.maps])
    pty = np.array([float(mp.ty) for mp in sys.maps])

    a = pa.copy()
    c = pc.copy()
    d = pd.copy()
    tx = ptx.copy()
    ty = pty.copy()
    last = np.arange(m, dtype=np.int64)

    out_degree = adj.sum(axis=1)
    for _ in range(depth - 1):
        counts = out_degree[last]
        offsets = np.concatenate(([0], np.cumsum(counts)))
        n_new = int(offsets[-1])
        na = np.empty(n_new)
        nc = np.empty(n_new)
        nd = np.empty(n_new)
        ntx = np.empty(n_new)
        nty = np.empty(n_new)
        nlast = np.empty(n_new, dtype=np.int64)
        placed = np.zeros(len(last), dtype=np.int64)
        for j in range(m):
            sel = np.nonzero(adj[last, j])[0]
            if len(sel) == 0:
                continue
            pos = offsets[sel] + placed[sel]
            na[pos] = a[sel] * pa[j]
            nc[pos] = c[sel] * pa[j] + d[sel] * pc[j]
            nd[pos] = d[sel] * pd[j]
            ntx[pos] = a[sel] * ptx[j] + tx[sel]
            nty[pos] = c[sel] * ptx[j] + d[sel] * pty[j] + ty[sel]
            nlast[pos] = j
            placed[sel] += 1
        a, c, d, tx, ty, last = na, nc, nd, ntx, nty, nlast

    anchor_x = np.array([float(sys.data.xs[sys.ell[j]]) for j in range(m)])
    anchor_y = np.array([float(sys.data.ys[sys.ell[j]]) for j in range(m)])
    ax = anchor_x[last]
    ay = anchor_y[last]
    return a * ax + tx, c * ax + d * ay + ty

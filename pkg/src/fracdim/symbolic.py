"""Subshifts of finite type and n-block Bernoulli approximations of Markov measures.

Words are tuples of 1-based symbols over {1, ..., m}.  A subshift of finite
type (SFT) is given by a 0/1 adjacency matrix A: the word (w_1, ..., w_l) is
admissible iff A[w_k, w_{k+1}] = 1 for every k.

The n-block Bernoulli approximation of a shift-invariant measure mu glues
length-(n-2k) mu-cylinders between fixed connector pads so that arbitrary
concatenations of the resulting n-blocks remain admissible: every padded block
starts with a fixed symbol j and ends with a fixed symbol i where A[i, j] = 1.
Averaging the i.i.d. block measure over the n shift offsets gives a
shift-invariant n-th order approximation whose entropy and cylinder masses
converge to those of mu.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionFailed

Word = tuple[int, ...]

_MASS_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class Sft:
    """Subshift of finite type over {1..m} with 0/1 adjacency matrix."""

    m: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("alphabet size m must be >= 1")
        if len(self.adjacency) != self.m or any(len(r) != self.m for r in self.adjacency):
            raise ValueError("adjacency must be an m x m matrix")
        if any(e not in (0, 1) for row in self.adjacency for e in row):
            raise ValueError("adjacency entries must be 0 or 1")

    @classmethod
    def full_shift(cls, m: int) -> "Sft":
        return cls(m, tuple((1,) * m for _ in range(m)))

    def allows(self, i: int, j: int) -> bool:
        """Whether symbol j may follow symbol i (1-based)."""
        return self.adjacency[i - 1][j - 1] == 1

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.m + 1) if self.allows(i, j))

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not (1 <= s <= self.m) for s in word):
            return False
        return all(self.allows(word[k], word[k + 1]) for k in range(len(word) - 1))

    def matrix(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=np.int64)


def admissible_words(sft: Sft, length: int) -> list[Word]:
    """All admissible words of the given length, in lexicographic order."""
    if length < 1:
        raise ValueError("word length must be >= 1")
    words: list[Word] = [(s,) for s in range(1, sft.m + 1)]
    for _ in range(length - 1):
        words = [w + (j,) for w in words for j in sft.successors(w[-1])]
    return words


def irreducible_aperiodic(sft: Sft) -> tuple[bool, bool, int | None]:
    """(irreducible, aperiodic, witness_power).

    Irreducible: every symbol reaches every symbol through admissible paths.
    Aperiodic is checked in the primitive sense: some power A^k with k <= m^2
    is strictly positive (Wielandt's bound (m-1)^2 + 1 <= m^2 makes the cap
    sufficient); witness_power is the smallest such k, None if there is none.
    """
    a = np.minimum(sft.matrix(), 1)
    reach = a.copy()
    np.fill_diagonal(reach, 1)
    for _ in range(sft.m):
        reach = np.minimum(reach @ reach, 1)
    irreducible = bool((reach > 0).all())

    power = a.copy()
    witness: int | None = None
    for k in range(1, sft.m * sft.m + 1):
        if (power > 0).all():
            witness = k
            break
        power = np.minimum(power @ a, 1)
    return irreducible, witness is not None, witness


def abelianization(word: Sequence[int], m: int) -> tuple[int, ...]:
    """Occurrence counts of each symbol 1..m in the word."""
    counts = [0] * m
    for s in word:
        if not (1 <= s <= m):
            raise ValueError(f"symbol {s} outside alphabet 1..{m}")
        counts[s - 1] += 1
    return tuple(counts)


# ---------------------------------------------------------------------------
# connector pads
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadSet:
    """Connector pads for the n-block construction.

    prefixes[l] is the lexicographically smallest admissible word of length k
    that starts with anchor j and may be followed by l; suffixes[l] ends with
    anchor i and may follow l.  Every padded block then starts with j, ends
    with i, and A[i, j] = 1 keeps arbitrary concatenations admissible.
    """

    k: int
    anchor: tuple[int, int]
    prefixes: dict[int, Word]
    suffixes: dict[int, Word]


def _lex_smallest_pad(
    sft: Sft, k: int, *, first: int | None, last: int | None,
    follows: int | None, precedes: int | None,
) -> Word | None:
    """Lex-smallest admissible length-k word with fixed first/last symbol,
    optionally required to admissibly follow `follows` / precede `precedes`."""
    def extend(prefix: Word) -> Word | None:
        if len(prefix) == k:
            if last is not None and prefix[-1] != last:
                return None
            if precedes is not None and not sft.allows(prefix[-1], precedes):
                return None
            return prefix
        start = prefix[-1] if prefix else None
        for s in range(1, sft.m + 1):
            if not prefix:
                if first is not None and s != first:
                    continue
                if follows is not None and not sft.allows(follows, s):
                    continue
            elif not sft.allows(start, s):
                continue
            hit = extend(prefix + (s,))
            if hit is not None:
                return hit
        return None

    return extend(())


def nbern_pads(sft: Sft, anchor: tuple[int, int], max_k: int | None = None) -> PadSet:
    """Deterministic connector pads with the smallest feasible length k.

    k is searched from 1 upward: it is feasible when for every symbol l there
    exist a prefix p(l) (starts with j, p(l) l admissible) and a suffix s(l)
    (ends with i, l s(l) admissible).  Each choice is the lexicographically
    smallest valid word, so the construction is reproducible.
    """
    i, j = anchor
    if not (1 <= i <= sft.m and 1 <= j <= sft.m):
        raise ValueError("anchor symbols outside alphabet")
    if not sft.allows(i, j):
        raise PreconditionFailed(f"anchor pair ({i},{j}) is not an admissible transition")
    cap = max_k if max_k is not None else max(sft.m * sft.m, 4)
    for k in range(1, cap + 1):
        prefixes: dict[int, Word] = {}
        suffixes: dict[int, Word] = {}
        for sym in range(1, sft.m + 1):
            p = _lex_smallest_pad(sft, k, first=j, last=None, follows=None, precedes=sym)
            s = _lex_smallest_pad(sft, k, first=None, last=i, follows=sym, precedes=None)
            if p is None or s is None:
                break
            prefixes[sym] = p
            suffixes[sym] = s
        else:
            return PadSet(k=k, anchor=(i, j), prefixes=prefixes, suffixes=suffixes)
    raise PreconditionFailed(
        f"no feasible connector pads up to k={cap}; adjacency too sparse for anchor {anchor}"
    )


# ---------------------------------------------------------------------------
# explicit n-block construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BernoulliApprox:
    """Explicit n-block Bernoulli approximation.

    block_masses maps each padded ("hatted") word of length n to the mass of
    the underlying length-(n-2k) cylinder.  The masses sum to 1.
    """

    sft: Sft
    n: int
    pads: PadSet
    block_masses: dict[Word, float] = field(repr=False)

    @property
    def k(self) -> int:
        return self.pads.k

    @property
    def anchor(self) -> tuple[int, int]:
        return self.pads.anchor


def nbern_construct(
    sft: Sft,
    mu_masses: Callable[[Word], float],
    n: int,
    anchor: tuple[int, int],
    max_blocks: int = 2_000_000,
) -> BernoulliApprox:
    """Build the explicit n-block approximation of a measure given by cylinder
    masses.

    mu_masses is called once per admissible word of length n - 2k and must
    return nonnegative masses; they are renormalized only if their sum is off
    by more than 1e-12.
    """
    pads = nbern_pads(sft, anchor)
    k = pads.k
    if n < 2 * k + 1:
        raise PreconditionFailed(f"n must be >= 2k+1 = {2 * k + 1} (pads have length k={k})")
    middle = n - 2 * k
    words = admissible_words(sft, middle)
    if len(words) > max_blocks:
        raise ValueError(
            f"{len(words)} admissible words of length {middle} exceed the block budget {max_blocks}"
        )
    masses: dict[Word, float] = {}
    total = 0
    for w in words:
        mass = mu_masses(w)
        if mass < 0:
            raise ValueError(f"negative mass for cylinder {w}")
        hatted = pads.prefixes[w[0]] + w + pads.suffixes[w[-1]]
        masses[hatted] = mass
        total = total + mass
    if abs(total - 1) > _MASS_NORMALIZATION_TOL:
        if total <= 0:
            raise ValueError("cylinder masses sum to zero")
        masses = {w: mass / total for w, mass in masses.items()}
    return BernoulliApprox(sft=sft, n=n, pads=pads, block_masses=masses)


def nbern_entropy(b: BernoulliApprox):
    """Entropy of the n-block approximation: -(1/n) sum_tau mass log mass,
    with 0 log 0 = 0."""
    acc = 0.0
    for mass in b.block_masses.values():
        if mass > 0:
            acc -= mass * math.log(mass)
    return acc / b.n


def nbern_cylinder_mass(b: BernoulliApprox, w: Sequence[int]):
    """Mass of the cylinder [w] under the offset-averaged block measure.

    For each of the n shift offsets the matched window covers at most two
    consecutive i.i.d. blocks, so the offset mass is a product of at most two
    block-prefix/suffix sums.  Pure-python sums: exact when masses are exact.
    """
    w = tuple(w)
    lw = len(w)
    if not 1 <= lw <= b.n:
        raise ValueError(f"cylinder length must be in 1..{b.n}")
    blocks = list(b.block_masses.items())
    n = b.n
    total = 0
    for i in range(n):
        if i + lw <= n:
            part = sum(mass for block, mass in blocks if block[i:i + lw] == w)
        else:
            head, tail = w[:n - i], w[n - i:]
            m1 = sum(mass for block, mass in blocks if block[i:] == head)
            m2 = sum(mass for block, mass in blocks if block[:len(tail)] == tail)
            part = m1 * m2
        total = total + part
    return total / n


# ---------------------------------------------------------------------------
# closed-form path for Markov base measures
# ---------------------------------------------------------------------------
#
# For a stationary Markov measure (q, P) the explicit block enumeration is not
# needed: stationarity collapses the entropy sum, and block-content events are
# marginals of at most (first symbol, a consecutive run, last symbol), which
# are products of transition-matrix powers.  Both functions agree exactly with
# the explicit construction (cross-checked in the tests) and stay tractable at
# n where the number of blocks would be astronomically large.


def markov_nbern_entropy(q: np.ndarray, p_matrix: np.ndarray, n: int, k: int) -> float:
    """Entropy of the n-block approximation of the Markov measure (q, P).

    sum_tau mu([tau]) log mu([tau]) over length-L words equals
    sum q log q + (L-1) sum q_i P_ij log P_ij by stationarity, so the value is
    (H(q) + (L-1) h(mu)) / n with L = n - 2k.
    """
    middle = n - 2 * k
    if middle < 1:
        raise PreconditionFailed(f"n must be >= 2k+1 = {2 * k + 1}")
    q = np.asarray(q, dtype=float)
    p_matrix = np.asarray(p_matrix, dtype=float)
    h_q = -sum(x * math.log(x) for x in q if x > 0)
    h_mu = 0.0
    for i in range(len(q)):
        for j in range(len(q)):
            pij = p_matrix[i, j]
            if pij > 0:
                h_mu -= q[i] * pij * math.log(pij)
    return (h_q + (middle - 1) * h_mu) / n


def _segment_mass(
    pads: PadSet,
    q: np.ndarray,
    p_pow: list[np.ndarray],
    n: int,
    a: int,
    bb: int,
    t: Word,
) -> float:
    """Probability that a random padded block matches t on positions a..bb
    (1-based, inclusive).

    Block layout: positions 1..k hold prefix(omega_1), k+1..k+L hold omega,
    k+L+1..n hold suffix(omega_L).  The event factors into a symbol set for
    omega_1 (prefix match), a fixed consecutive run inside omega, and a symbol
    set for omega_L (suffix match); its mu-probability is a sum of products of
    powers of P.
    """
    k = pads.k
    middle = n - 2 * k
    m = len(q)

    allowed_first = list(range(1, m + 1))
    allowed_last = list(range(1, m + 1))
    run_lo = None  # 1-based positions within omega
    run: list[int] = []

    for pos in range(a, bb + 1):
        sym = t[pos - a]
        if pos <= k:
            allowed_first = [u for u in allowed_first if pads.prefixes[u][pos - 1] == sym]
        elif pos <= k + middle:
            if run_lo is None:
                run_lo = pos - k
            run.append(sym)
        else:
            allowed_last = [v for v in allowed_last if pads.suffixes[v][pos - k - middle - 1] == sym]

    if not allowed_first or not allowed_last:
        return 0.0

    if run_lo is not None:
        # run occupies omega positions run_lo .. run_hi
        run_hi = run_lo + len(run) - 1
        inner = 1.0
        for idx in range(len(run) - 1):
            inner *= p_pow[1][run[idx] - 1, run[idx + 1] - 1]
        if inner == 0.0:
            return 0.0
        acc = 0.0
        for u in allowed_first:
            left = p_pow[run_lo - 1][u - 1, run[0] - 1]
            if left == 0.0:
                continue
            for v in allowed_last:
                right = p_pow[middle - run_hi][run[-1] - 1, v - 1]
                acc += q[u - 1] * left * inner * right
        return acc

    acc = 0.0
    for u in allowed_first:
        for v in allowed_last:
            acc += q[u - 1] * p_pow[middle - 1][u - 1, v - 1]
    return acc


def markov_nbern_cylinder_mass(
    pads: PadSet,
    q: np.ndarray,
    p_matrix: np.ndarray,
    n: int,
    w: Sequence[int],
) -> float:
    """Cylinder mass of [w] under the n-block approximation of the Markov
    measure (q, P), computed without enumerating blocks."""
    w = tuple(w)
    lw = len(w)
    if not 1 <= lw <= n:
        raise ValueError(f"cylinder length must be in 1..{n}")
    middle = n - 2 * pads.k
    if middle < 1:
        raise PreconditionFailed("n too small for the pad length")
    q = np.asarray(q, dtype=float)
    p_matrix = np.asarray(p_matrix, dtype=float)
    p_pow: list[np.ndarray] = [np.eye(len(q))]
    for _ in range(middle):
        p_pow.append(p_pow[-1] @ p_matrix)

    total = 0.0
    for i in range(n):
        if i + lw <= n:
            total += _segment_mass(pads, q, p_pow, n, i + 1, i + lw, w)
        else:
            head, tail = w[:n - i], w[n - i:]
            m1 = _segment_mass(pads, q, p_pow, n, i + 1, n, head)
            m2 = _segment_mass(pads, q, p_pow, n, 1, len(tail), tail)
            total += m1 * m2
    return total / n

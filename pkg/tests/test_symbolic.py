"""Tests for subshifts and the n-block Bernoulli construction.

Expected values come from an independent brute-force oracle (direct
product-filter enumeration, exhaustive pad candidates, explicit two-block
Fraction enumeration of offset masses); rationals are frozen exactly.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from fracdim.errors import PreconditionFailed
from fracdim.symbolic import (
    BernoulliApprox,
    Sft,
    abelianization,
    admissible_words,
    irreducible_aperiodic,
    markov_nbern_cylinder_mass,
    markov_nbern_entropy,
    nbern_construct,
    nbern_cylinder_mass,
    nbern_entropy,
    nbern_pads,
)

# the three-symbol adjacency used throughout (row i lists who may follow i)
A3 = ((0, 1, 0), (0, 1, 1), (1, 1, 0))

# rational Markov chain supported on A3, stationary vector computed by hand
P_FRAC = (
    (Fraction(0), Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1, 2), Fraction(1, 2)),
    (Fraction(1, 3), Fraction(2, 3), Fraction(0)),
)
Q_FRAC = (Fraction(1, 10), Fraction(3, 5), Fraction(3, 10))


def markov_mass(w):
    mass = Q_FRAC[w[0] - 1]
    for u, v in zip(w, w[1:]):
        mass *= P_FRAC[u - 1][v - 1]
    return mass


def test_sft_validation():
    with pytest.raises(ValueError):
        Sft(2, ((0, 1),))
    with pytest.raises(ValueError):
        Sft(2, ((0, 2), (1, 0)))
    with pytest.raises(ValueError):
        Sft(0, ())
    s = Sft.full_shift(2)
    assert s.allows(1, 2) and s.allows(2, 2)
    assert s.successors(1) == (1, 2)


def test_admissible_words_full_shift():
    s = Sft.full_shift(2)
    words = admissible_words(s, 3)
    assert len(words) == 8
    assert words == sorted(words)
    assert words[0] == (1, 1, 1) and words[-1] == (2, 2, 2)


def test_admissible_words_markov_matrix():
    s = Sft(3, A3)
    assert admissible_words(s, 2) == [(1, 2), (2, 2), (2, 3), (3, 1), (3, 2)]
    words3 = admissible_words(s, 3)
    # oracle: A^2 = [[0,1,1],[1,2,1],[0,2,1]], total 9
    assert len(words3) == 9
    assert words3 == sorted(words3)
    assert all(s.is_admissible(w) for w in words3)


def test_word_count_matches_matrix_power():
    s = Sft(3, A3)
    a = s.matrix()
    for length in range(1, 7):
        count = len(admissible_words(s, length))
        assert count == int(np.linalg.matrix_power(a, length - 1).sum())


def test_irreducible_aperiodic():
    s = Sft(3, A3)
    # oracle: A^2 has zeros, A^3 is strictly positive
    assert irreducible_aperiodic(s) == (True, True, 3)
    two_cycle = Sft(2, ((0, 1), (1, 0)))
    assert irreducible_aperiodic(two_cycle) == (True, False, None)
    ones = Sft.full_shift(2)
    assert irreducible_aperiodic(ones) == (True, True, 1)
    reducible = Sft(2, ((1, 1), (0, 1)))
    irr, aper, wit = irreducible_aperiodic(reducible)
    assert not irr and not aper and wit is None


def test_abelianization():
    assert abelianization((1, 2, 1), 2) == (2, 1)
    assert abelianization((2, 2, 2), 3) == (0, 3, 0)
    assert abelianization((3, 1, 2, 2), 3) == (1, 2, 1)
    with pytest.raises(ValueError):
        abelianization((0, 1), 2)


def test_nbern_pads_markov_example():
    s = Sft(3, A3)
    pads = nbern_pads(s, (2, 2))
    # oracle: k=1 infeasible, k=2 first feasible; lex-smallest candidates
    assert pads.k == 2
    assert pads.prefixes == {1: (2, 3), 2: (2, 2), 3: (2, 2)}
    assert pads.suffixes == {1: (2, 2), 2: (2, 2), 3: (1, 2)}


def test_nbern_pads_constraints_hold():
    s = Sft(3, A3)
    pads = nbern_pads(s, (2, 2))
    i, j = pads.anchor
    for sym in (1, 2, 3):
        p, suf = pads.prefixes[sym], pads.suffixes[sym]
        assert p[0] == j and s.is_admissible(p + (sym,))
        assert suf[-1] == i and s.is_admissible((sym,) + suf)
    # an alternative all-(2,2) suffix choice also satisfies the constraints,
    # but is not the lexicographic minimum for symbol 3
    assert s.is_admissible((3, 2, 2))
    assert (1, 2) < (2, 2)


def test_nbern_pads_bad_anchor():
    s = Sft(3, A3)
    with pytest.raises(PreconditionFailed):
        nbern_pads(s, (1, 1))  # A[1][1] = 0
    with pytest.raises(ValueError):
        nbern_pads(s, (0, 2))


def test_nbern_construct_blocks_and_junctions():
    s = Sft(3, A3)
    b = nbern_construct(s, markov_mass, 6, (2, 2))
    assert b.k == 2 and b.n == 6
    # oracle: 5 admissible middles of length 2, exact block masses
    expected = {
        (2, 2, 2, 2, 2, 2): Fraction(3, 10),
        (2, 2, 2, 3, 1, 2): Fraction(3, 10),
        (2, 2, 3, 1, 2, 2): Fraction(1, 10),
        (2, 2, 3, 2, 2, 2): Fraction(1, 5),
        (2, 3, 1, 2, 2, 2): Fraction(1, 10),
    }
    assert b.block_masses == expected
    # every hatted word is admissible, and junctions glue admissibly
    for w1 in b.block_masses:
        assert s.is_admissible(w1)
        for w2 in b.block_masses:
            assert s.allows(w1[-1], w2[0])


def test_nbern_construct_n_too_small():
    s = Sft(3, A3)
    with pytest.raises(PreconditionFailed):
        nbern_construct(s, markov_mass, 4, (2, 2))  # needs n >= 2k+1 = 5


def test_nbern_entropy_uniform_and_degenerate():
    s = Sft.full_shift(2)
    n = 6
    b = nbern_construct(s, lambda w: Fraction(1, 2 ** len(w)), n, (1, 2))
    k = b.k
    assert k == 1
    assert nbern_entropy(b) == pytest.approx((n - 2 * k) / n * math.log(2), abs=1e-14)

    single = BernoulliApprox(sft=s, n=4, pads=b.pads, block_masses={(2, 1, 1, 1): 1.0})
    assert nbern_entropy(single) == 0.0


def test_nbern_entropy_matches_shannon_of_blocks():
    s = Sft(3, A3)
    b = nbern_construct(s, markov_mass, 6, (2, 2))
    shannon = -sum(float(p) * math.log(float(p)) for p in b.block_masses.values() if p)
    assert nbern_entropy(b) == pytest.approx(shannon / 6, abs=1e-14)
    # frozen oracle value, equal to (H(q) + h(mu)) / 6 for the rational chain
    assert nbern_entropy(b) == pytest.approx(0.25079804728019844, abs=1e-13)


def test_nbern_cylinder_mass_exact_at_n6():
    s = Sft(3, A3)
    b = nbern_construct(s, markov_mass, 6, (2, 2))
    # frozen brute-force enumeration oracle (exact rationals)
    oracle = {
        (1,): Fraction(1, 12),
        (2,): Fraction(4, 5),
        (3,): Fraction(7, 60),
        (2, 2): Fraction(41, 60),
        (3, 1): Fraction(1, 12),
        (1, 2): Fraction(1, 12),
        (2, 3): Fraction(7, 60),
        (2, 2, 2): Fraction(17, 30),
        (3, 1, 2, 2): Fraction(1, 12),
    }
    for w, want in oracle.items():
        assert nbern_cylinder_mass(b, w) == want
    assert sum(nbern_cylinder_mass(b, (sym,)) for sym in (1, 2, 3)) == 1


def test_nbern_cylinder_mass_full_shift_anchor_dependence():
    s = Sft.full_shift(2)
    uniform = lambda w: Fraction(1, 2 ** len(w))
    # anchor (1,2): prefix symbol 2, suffix symbol 1 -> exact symmetry at all n
    b = nbern_construct(s, uniform, 6, (1, 2))
    assert nbern_cylinder_mass(b, (1,)) == Fraction(1, 2)
    # anchor (1,1): both pad symbols are 1, which biases finite n
    b11 = nbern_construct(s, uniform, 6, (1, 1))
    assert nbern_cylinder_mass(b11, (1,)) == Fraction(2, 3)


def test_nbern_cylinder_mass_length_guard():
    s = Sft.full_shift(2)
    b = nbern_construct(s, lambda w: Fraction(1, 2 ** len(w)), 4, (1, 2))
    with pytest.raises(ValueError):
        nbern_cylinder_mass(b, (1,) * 5)
    with pytest.raises(ValueError):
        nbern_cylinder_mass(b, ())


def test_markov_closed_forms_match_explicit_construction():
    s = Sft(3, A3)
    q = np.array([float(x) for x in Q_FRAC])
    p = np.array([[float(x) for x in row] for row in P_FRAC])
    for n in (6, 8):
        b = nbern_construct(s, markov_mass, n, (2, 2))
        assert markov_nbern_entropy(q, p, n, b.k) == pytest.approx(
            nbern_entropy(b), abs=1e-13
        )
        for w in [(1,), (2,), (3,), (2, 2), (3, 1), (1, 2), (2, 2, 3, 1), (3, 1, 2)]:
            assert markov_nbern_cylinder_mass(b.pads, q, p, n, w) == pytest.approx(
                float(nbern_cylinder_mass(b, w)), abs=1e-13
            )


def test_markov_closed_form_frozen_values():
    s = Sft(3, A3)
    pads = nbern_pads(s, (2, 2))
    q = np.array([float(x) for x in Q_FRAC])
    p = np.array([[float(x) for x in row] for row in P_FRAC])
    # frozen from the brute-force oracle at n=8
    assert markov_nbern_cylinder_mass(pads, q, p, 8, (1,)) == pytest.approx(7 / 80, abs=1e-14)
    assert markov_nbern_cylinder_mass(pads, q, p, 8, (2, 2)) == pytest.approx(47 / 80, abs=1e-14)
    assert markov_nbern_cylinder_mass(pads, q, p, 8, (3, 1, 2)) == pytest.approx(7 / 80, abs=1e-14)
    assert markov_nbern_cylinder_mass(pads, q, p, 8, (2, 2, 3, 1)) == pytest.approx(1 / 16, abs=1e-14)


def test_single_symbol_sft():
    s = Sft(1, ((1,),))
    assert admissible_words(s, 4) == [(1, 1, 1, 1)]
    assert irreducible_aperiodic(s) == (True, True, 1)
    b = nbern_construct(s, lambda w: 1.0, 5, (1, 1))
    assert list(b.block_masses.values()) == [1.0]
    assert nbern_entropy(b) == 0.0
    assert nbern_cylinder_mass(b, (1, 1)) == 1.0

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from fractalframes.errors import PreconditionError
from fractalframes.lattice import DigitSet, ExpandingMatrix, complete_residues
from fractalframes.triples import (
    analyze_triple,
    build_F,
    dual_triple,
    exp_vector,
    rational_phase,
    tight_frame_from_complete,
)

from conftest import ds, em


def test_rational_phase_exact():
    R = em(4)
    assert rational_phase(R, (2,), (1,)) == Fraction(1, 2)
    assert rational_phase(R, (2,), (2,)) == Fraction(0)
    R2 = em([[0, -2], [1, 0]])
    # R2^{-1} = [[0,1],[-1/2,0]]
    assert rational_phase(R2, (1, 1), (1, 0)) == Fraction(1)  % 1


def test_exp_vector_unit_norm():
    R = em(5)
    B = ds([0, 1, 3])
    v = exp_vector(R, B, (2,))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_example_riesz_only_bounds():
    # digits {0,1,3} collide mod 3, but two frequencies still give a Riesz pair
    rep = analyze_triple(em(3), ds([0, 1, 3]), ds([0, 1]))
    assert rep.classification == "RieszSequenceOnly"
    lo, hi = rep.riesz_bounds
    assert abs(lo - (1 - 1 / math.sqrt(3))) < 1e-9
    assert abs(hi - (1 + 1 / math.sqrt(3))) < 1e-9
    assert rep.frame_bounds is None


def test_example_rank_deficient_neither():
    rep = analyze_triple(em(3), ds([0, 1, 3]), ds([0, 1, 2]))
    assert rep.rank == 2
    assert rep.classification == "Neither"
    assert rep.frame_bounds is None and rep.riesz_bounds is None


def test_quarter_hadamard():
    rep = analyze_triple(em(4), ds([0, 2]), ds([0, 1]))
    assert rep.classification == "Hadamard"
    assert abs(rep.frame_bounds[0] - 1) < 1e-9
    assert abs(rep.frame_bounds[1] - 1) < 1e-9


def test_dft_hadamard():
    rep = analyze_triple(em(3), ds([0, 1, 2]), ds([0, 1, 2]))
    assert rep.classification == "Hadamard"


def test_tight_frame_law_example():
    rep = tight_frame_from_complete(em(3), ds([0, 2]))
    assert abs(rep.frame_bounds[0] - 1.5) < 1e-9
    assert abs(rep.frame_bounds[1] - 1.5) < 1e-9


def test_tight_frame_rejects_repeated_residues():
    with pytest.raises(PreconditionError):
        tight_frame_from_complete(em(3), ds([0, 3]))


def _random_expanding(rng, dmax=2):
    d = rng.choice([1, 2]) if dmax == 2 else 1
    while True:
        rows = tuple(tuple(rng.randint(-5, 5) for _ in range(d)) for _ in range(d))
        try:
            R = ExpandingMatrix(rows)
        except PreconditionError:
            continue
        if abs(R.det) <= 32:
            return R


def _random_distinct_digits(rng, R, count):
    reps = list(complete_residues(R).representatives)
    rng.shuffle(reps)
    chosen = reps[:count]
    # shift by random lattice vectors, keeping residues distinct
    out = []
    for p in chosen:
        shift = tuple(rng.randint(-2, 2) for _ in range(R.d))
        out.append(tuple(a + b for a, b in zip(p, R.matvec(shift))))
    return DigitSet(tuple(dict.fromkeys(out)))


def test_tight_frame_law_randomized():
    rng = random.Random(12345)
    for _ in range(200):
        R = _random_expanding(rng)
        count = rng.randint(1, min(8, abs(R.det)))
        B = _random_distinct_digits(rng, R, count)
        rep = tight_frame_from_complete(R, B)  # raises on any law violation
        expected = abs(R.det) / len(B)
        assert abs(rep.frame_bounds[0] - expected) <= 1e-9 * expected


def test_duality_randomized():
    rng = random.Random(99)
    for _ in range(200):
        R = _random_expanding(rng)
        nb = rng.randint(1, min(12, abs(R.det)))
        nl = rng.randint(1, 12)
        B = _random_distinct_digits(rng, R, nb)
        L = DigitSet(
            tuple(
                dict.fromkeys(
                    [tuple([0] * R.d)]
                    + [
                        tuple(rng.randint(-6, 6) for _ in range(R.d))
                        for _ in range(nl - 1)
                    ]
                )
            )
        )
        # dual_triple raises InternalCheckError if the scaled bounds disagree
        dual_triple(R, B, L)


def test_build_F_shape():
    F = build_F(em(4), ds([0, 2]), ds([0, 1, 2]))
    assert F.shape == (3, 2)

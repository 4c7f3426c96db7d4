import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalframes.errors import PreconditionError
from fractalframes.lattice import (
    DigitSet,
    ExpandingMatrix,
    complete_residues,
    coset_residue,
    distinct_residues,
    int_adjugate,
    int_det,
    int_matmul,
    int_matvec,
    is_expanding,
    smith_normal_form,
)

matrices = st.integers(1, 3).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(-6, 6), min_size=n, max_size=n),
        min_size=n,
        max_size=n,
    ).map(lambda rows: tuple(tuple(r) for r in rows))
)


@given(matrices)
@settings(max_examples=300, deadline=None)
def test_smith_normal_form_properties(mat):
    n = len(mat)
    u, s, v = smith_normal_form(mat)
    assert int_matmul(int_matmul(u, s), v) == mat
    assert abs(int_det(u)) == 1
    assert abs(int_det(v)) == 1
    diag = [s[i][i] for i in range(n)]
    assert all(s[i][j] == 0 for i in range(n) for j in range(n) if i != j)
    assert all(x >= 0 for x in diag)
    for i in range(n - 1):
        if diag[i] == 0:
            assert diag[i + 1] == 0
        else:
            assert diag[i + 1] % diag[i] == 0


@given(matrices)
@settings(max_examples=200, deadline=None)
def test_int_det_matches_numpy(mat):
    expected = round(float(np.linalg.det(np.array(mat, dtype=float))))
    assert int_det(mat) == expected


@given(matrices)
@settings(max_examples=200, deadline=None)
def test_adjugate_identity(mat):
    n = len(mat)
    d = int_det(mat)
    prod = int_matmul(mat, int_adjugate(mat))
    assert prod == tuple(
        tuple(d if i == j else 0 for j in range(n)) for i in range(n)
    )


def test_is_expanding_examples():
    ok, m = is_expanding(((2,),))
    assert ok and m == 2.0
    ok, m = is_expanding(((0, -2), (1, 0)))
    assert ok and abs(m - math.sqrt(2)) < 1e-9
    ok, _ = is_expanding(((1, 0), (0, 2)))
    assert not ok
    ok, _ = is_expanding(((1,),))
    assert not ok


def test_expanding_matrix_rejects_non_expanding():
    with pytest.raises(PreconditionError):
        ExpandingMatrix(((1,),))
    with pytest.raises(PreconditionError):
        ExpandingMatrix(((2, 0), (0, 1)))


def test_expanding_matrix_rejects_non_integer():
    with pytest.raises(PreconditionError):
        ExpandingMatrix(((2.5,),))


def test_coset_residue_examples():
    R3 = ExpandingMatrix(((3,),))
    R4 = ExpandingMatrix(((4,),))
    assert coset_residue((3,), R3) == (0,)
    assert coset_residue((5,), R4) == (1,)
    R2I = ExpandingMatrix(((2, 0), (0, 2)))
    assert coset_residue((3, 1), R2I) == (1, 1)


expanding_2d = st.sampled_from(
    [
        ((2,),),
        ((3,),),
        ((-4,),),
        ((2, 0), (0, 2)),
        ((0, -2), (1, 0)),
        ((3, 1), (0, 2)),
        ((3, 1), (1, 3)),
        ((-2, 1), (1, 3)),
    ]
)


@given(expanding_2d, st.lists(st.integers(-30, 30), min_size=2, max_size=2))
@settings(max_examples=200, deadline=None)
def test_coset_residue_idempotent_and_congruent(mat, vec):
    R = ExpandingMatrix(mat)
    v = tuple(vec[: R.d])
    r = coset_residue(v, R)
    assert coset_residue(r, R) == r
    diff = tuple(a - b for a, b in zip(v, r))
    # v - r must lie in R(Z^d): adj(R) @ diff divisible by det
    x = int_matvec(R.adjugate, diff)
    assert all(xi % R.det == 0 for xi in x)


@given(expanding_2d)
@settings(max_examples=50, deadline=None)
def test_complete_residues_are_complete_and_distinct(mat):
    R = ExpandingMatrix(mat)
    reps = complete_residues(R).representatives
    assert len(reps) == abs(R.det)
    assert len({coset_residue(p, R) for p in reps}) == abs(R.det)


def test_complete_residues_deterministic_order():
    R = ExpandingMatrix(((4,),))
    a = complete_residues(R).representatives
    b = complete_residues(ExpandingMatrix(((4,),))).representatives
    assert a == b
    assert (0,) in a


def test_digit_set_validation():
    with pytest.raises(PreconditionError):
        DigitSet(((0,), (0,)))
    with pytest.raises(PreconditionError):
        DigitSet(((0,), (0, 1)))
    d = DigitSet.of([0, 2])
    assert d.contains_zero and len(d) == 2 and d.d == 1


def test_distinct_residues():
    R3 = ExpandingMatrix(((3,),))
    assert distinct_residues(DigitSet.of([0, 2]), R3)
    assert not distinct_residues(DigitSet.of([0, 1, 3]), R3)


def test_matmul_and_transpose():
    R = ExpandingMatrix(((0, -2), (1, 0)))
    assert R.transpose.entries == ((0, 1), (-2, 0))
    sq = R.matmul(R)
    assert sq.entries == ((-2, 0), (0, -2))
    assert R.matvec((1, 1)) == (-2, 1)

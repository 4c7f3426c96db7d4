"""Integer lattice and expanding-matrix arithmetic.

All arithmetic on matrices and digit vectors is carried out in exact Python
integers; floating point enters only for eigenvalue modulus checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError

IntVector = tuple[int, ...]
IntMatrix = tuple[tuple[int, ...], ...]

EXPANSION_MARGIN = 1e-9


def _as_int_matrix(entries) -> IntMatrix:
    rows = []
    for row in entries:
        r = []
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
                raise PreconditionError(f"matrix entry {x!r} is not an integer")
            r.append(int(x))
        rows.append(tuple(r))
    mat = tuple(rows)
    if not mat or any(len(r) != len(mat) for r in mat):
        raise PreconditionError("matrix must be square and nonempty")
    return mat


def _as_int_vector(v, d: int | None = None) -> IntVector:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        v = (int(v),)
    vec = tuple(int(x) for x in v)
    if d is not None and len(vec) != d:
        raise PreconditionError(f"vector {vec} has length {len(vec)}, expected {d}")
    return vec


def int_det(mat: IntMatrix) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    n = len(mat)
    a = [list(row) for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def int_matvec(a: IntMatrix, v: IntVector) -> IntVector:
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def int_adjugate(mat: IntMatrix) -> IntMatrix:
    """Adjugate matrix, so that mat @ adj = det * I, in exact integers."""
    n = len(mat)
    if n == 1:
        return ((1,),)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = tuple(
                tuple(mat[r][c] for c in range(n) if c != j)
                for r in range(n)
                if r != i
            )
            adj[j][i] = (-1) ** (i + j) * int_det(minor)
    return tuple(tuple(row) for row in adj)


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(mat: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Decompose an integer matrix as mat = U @ S @ V.

    S is diagonal with nonnegative entries satisfying the divisibility chain
    s_1 | s_2 | ... ; U and V are unimodular. All arithmetic is exact.
    """
    n = len(mat)
    a = [list(row) for row in mat]
    p = _identity(n)
    q = _identity(n)

    # Diagonalize first, then repair the divisibility chain pairwise.
    for t in range(n):
        while True:
            nz = [(i, j) for i in range(t, n) for j in range(t, n) if a[i][j] != 0]
            if not nz:
                break
            i0, j0 = min(nz, key=lambda ij: abs(a[ij[0]][ij[1]]))
            if i0 != t:
                a[t], a[i0] = a[i0], a[t]
                p[t], p[i0] = p[i0], p[t]
            if j0 != t:
                for k in range(n):
                    a[k][t], a[k][j0] = a[k][j0], a[k][t]
                    q[k][t], q[k][j0] = q[k][j0], q[k][t]
            done = True
            for i in range(t + 1, n):
                if a[i][t] != 0:
                    c = a[i][t] // a[t][t]
                    for k in range(n):
                        a[i][k] -= c * a[t][k]
                        p[i][k] -= c * p[t][k]
                    if a[i][t] != 0:
                        done = False
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    c = a[t][j] // a[t][t]
                    for k in range(n):
                        a[k][j] -= c * a[k][t]
                        q[k][j] -= c * q[k][t]
                    if a[t][j] != 0:
                        done = False
            if done and all(a[i][t] == 0 for i in range(t + 1, n)) and all(
                a[t][j] == 0 for j in range(t + 1, n)
            ):
                break

    # Fix the divisibility chain pairwise via 2x2 SNF steps.
    changed = True
    while changed:
        changed = False
        for t in range(n - 1):
            for j in range(t + 1, n):
                dt, dj = a[t][t], a[j][j]
                if dt != 0 and dj % dt != 0:
                    # add column j to column t, then rediagonalize the 2x2 block
                    for k in range(n):
                        a[k][t] += a[k][j]
                        q[k][t] += q[k][j]
                    _rediag_block(a, p, q, t, j, n)
                    changed = True

    for t in range(n):
        if a[t][t] < 0:
            for k in range(n):
                a[t][k] = -a[t][k]
                p[t][k] = -p[t][k]

    u = _unimodular_inverse(tuple(tuple(r) for r in p))
    v = _unimodular_inverse(tuple(tuple(r) for r in q))
    s = tuple(tuple(a[i][j] if i == j else 0 for j in range(n)) for i in range(n))
    return u, s, v


def _rediag_block(a, p, q, t, j, n):
    """Euclidean elimination confined to rows/cols t and j."""
    while a[j][t] != 0 or a[t][j] != 0:
        if a[j][t] != 0:
            if a[t][t] == 0 or (a[j][t] != 0 and abs(a[j][t]) < abs(a[t][t])):
                a[t], a[j] = a[j], a[t]
                p[t], p[j] = p[j], p[t]
            if a[j][t] != 0 and a[t][t] != 0:
                c = a[j][t] // a[t][t]
                for k in range(n):
                    a[j][k] -= c * a[t][k]
                    p[j][k] -= c * p[t][k]
        if a[t][j] != 0:
            if a[t][t] == 0 or (a[t][j] != 0 and abs(a[t][j]) < abs(a[t][t])):
                for k in range(n):
                    a[k][t], a[k][j] = a[k][j], a[k][t]
                    q[k][t], q[k][j] = q[k][j], q[k][t]
            if a[t][j] != 0 and a[t][t] != 0:
                c = a[t][j] // a[t][t]
                for k in range(n):
                    a[k][j] -= c * a[k][t]
                    q[k][j] -= c * q[k][t]


def _unimodular_inverse(mat: IntMatrix) -> IntMatrix:
    d = int_det(mat)
    if d not in (1, -1):
        raise AssertionError("matrix is not unimodular")
    adj = int_adjugate(mat)
    if d == 1:
        return adj
    return tuple(tuple(-x for x in row) for row in adj)


@dataclass(frozen=True)
class ExpandingMatrix:
    """d x d integer matrix with all eigenvalue moduli > 1."""

    entries: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_int_matrix(self.entries))
        ok, margin = is_expanding(self.entries)
        if not ok:
            raise PreconditionError(
                f"matrix {self.entries} is not expanding (min eigenvalue modulus "
                f"{margin:.6g})"
            )
        if self.det == 0:
            raise PreconditionError("matrix is singular")

    @property
    def d(self) -> int:
        return len(self.entries)

    @cached_property
    def det(self) -> int:
        return int_det(self.entries)

    @cached_property
    def transpose(self) -> "ExpandingMatrix":
        return ExpandingMatrix(tuple(zip(*self.entries)))

    @cached_property
    def adjugate(self) -> IntMatrix:
        return int_adjugate(self.entries)

    @cached_property
    def snf(self) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
        return smith_normal_form(self.entries)

    @cached_property
    def _snf_p(self) -> IntMatrix:
        # p with p @ entries @ (V^{-1}) ...: we need U^{-1} = inverse of U
        u, _, _ = self.snf
        return _unimodular_inverse(u)

    def matvec(self, v: Sequence[int]) -> IntVector:
        return int_matvec(self.entries, _as_int_vector(v, self.d))

    def matmul(self, other: "ExpandingMatrix") -> "ExpandingMatrix":
        return ExpandingMatrix(int_matmul(self.entries, other.entries))

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def __repr__(self):
        return f"ExpandingMatrix({list(map(list, self.entries))})"


@dataclass(frozen=True)
class DigitSet:
    """Finite list of integer d-vectors; order is significant and preserved."""

    points: tuple[IntVector, ...]

    def __post_init__(self):
        pts = tuple(_as_int_vector(p) for p in self.points)
        if len(set(pts)) != len(pts):
            seen = set()
            dup = next(p for p in pts if p in seen or seen.add(p))
            raise PreconditionError(f"duplicate point {dup} in digit set")
        if pts and any(len(p) != len(pts[0]) for p in pts):
            raise PreconditionError("digit set mixes vector dimensions")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, values: Iterable) -> "DigitSet":
        return cls(tuple(_as_int_vector(v) for v in values))

    @property
    def contains_zero(self) -> bool:
        return any(all(x == 0 for x in p) for p in self.points)

    @property
    def d(self) -> int:
        return len(self.points[0]) if self.points else 0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"DigitSet({[list(p) for p in self.points]})"


@dataclass(frozen=True)
class ResidueSystem:
    """One representative per coset of Z^d / R(Z^d), canonically ordered."""

    matrix: ExpandingMatrix
    representatives: tuple[IntVector, ...]


def is_expanding(entries) -> tuple[bool, float]:
    """Check that every eigenvalue modulus exceeds 1 (with a small margin).

    Returns (verdict, minimum eigenvalue modulus).
    """
    mat = _as_int_matrix(entries)
    moduli = np.abs(np.linalg.eigvals(np.array(mat, dtype=float)))
    m = float(moduli.min())
    return m > 1.0 + EXPANSION_MARGIN, m


def coset_residue(v, R: ExpandingMatrix) -> IntVector:
    """Canonical representative of v modulo R(Z^d).

    With R = U S V (Smith form), v and w are congruent iff U^{-1} v and
    U^{-1} w agree componentwise modulo diag(S); the canonical representative
    is U applied to the reduced label. Idempotent by construction.
    """
    vec = _as_int_vector(v, R.d)
    u, s, _ = R.snf
    label = int_matvec(R._snf_p, vec)
    reduced = tuple(x % s[i][i] for i, x in enumerate(label))
    return int_matvec(u, reduced)


def distinct_residues(B: DigitSet, R: ExpandingMatrix) -> bool:
    """True iff coset_residue is injective on B."""
    seen = set()
    for b in B:
        r = coset_residue(b, R)
        if r in seen:
            return False
        seen.add(r)
    return True


def complete_residues(R: ExpandingMatrix) -> ResidueSystem:
    """All |det R| coset representatives, ordered by lexicographic Smith label."""
    u, s, _ = R.snf
    sizes = [s[i][i] for i in range(R.d)]
    reps = tuple(
        int_matvec(u, label) for label in itertools.product(*[range(k) for k in sizes])
    )
    assert len(reps) == abs(R.det)
    return ResidueSystem(matrix=R, representatives=reps)

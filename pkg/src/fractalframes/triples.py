"""Exponential matrices F_{L,B} and frame/Riesz-sequence triple analysis.

Phases <R^{-1}b, lambda> are computed as exact rationals (adjugate over
determinant, reduced mod 1) before any complex exponential is evaluated, so
entries stay accurate for products of many expanding matrices.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InternalCheckError, PreconditionError
from .lattice import (
    DigitSet,
    ExpandingMatrix,
    _as_int_vector,
    complete_residues,
    distinct_residues,
    int_matvec,
)

RANK_TOL = 1e-10  # sigma^2 <= RANK_TOL * sigma_max^2 counts as zero
HADAMARD_TOL = 1e-9
DUALITY_TOL = 1e-9


def rational_phase(R: ExpandingMatrix, b, lam) -> Fraction:
    """<R^{-1} b, lambda> as an exact rational, reduced mod 1."""
    bv = _as_int_vector(b, R.d)
    lv = _as_int_vector(lam, R.d)
    adj_b = int_matvec(R.adjugate, bv)
    num = sum(l * x for l, x in zip(lv, adj_b))
    return Fraction(num, R.det) % 1


def _unit_root(frac: Fraction) -> complex:
    return cmath.exp(2j * cmath.pi * float(frac))


def exp_vector(R: ExpandingMatrix, B: DigitSet, lam) -> np.ndarray:
    """The unit-norm vector e_{R,lambda} in C^{#B}, in the stored order of B."""
    scale = 1.0 / np.sqrt(len(B))
    return np.array(
        [scale * _unit_root(rational_phase(R, b, lam)) for b in B], dtype=complex
    )


@dataclass(frozen=True, eq=False)
class ExponentialMatrix:
    """(#L) x (#B) matrix with rows e_{R,lambda}, lambda in L."""

    R: ExpandingMatrix
    B: DigitSet
    L: DigitSet
    values: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.values.shape


def build_F(R: ExpandingMatrix, B: DigitSet, L: DigitSet) -> ExponentialMatrix:
    values = np.array([exp_vector(R, B, lam) for lam in L], dtype=complex)
    values = values.reshape(len(L), len(B))
    return ExponentialMatrix(R=R, B=B, L=L, values=values)


@dataclass(frozen=True)
class TripleReport:
    classification: str  # Hadamard | FrameOnly | RieszSequenceOnly | FrameAndRiesz | Neither
    rank: int
    singular_values: tuple[float, ...]
    frame_bounds: Optional[tuple[float, float]] = None
    riesz_bounds: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "rank": self.rank,
            "singular_values": list(self.singular_values),
            "frame_bounds": list(self.frame_bounds) if self.frame_bounds else None,
            "riesz_bounds": list(self.riesz_bounds) if self.riesz_bounds else None,
        }


def analyze_triple(R: ExpandingMatrix, B: DigitSet, L: DigitSet) -> TripleReport:
    """Classify (R, B, L) and compute frame / Riesz-sequence bounds.

    Frame bounds are the extreme squared singular values of F when F has full
    column rank; Riesz bounds are the extreme eigenvalues of the Gram matrix
    F F^H when F has full row rank.
    """
    F = build_F(R, B, L).values
    sigma = np.linalg.svd(F, compute_uv=False)
    smax2 = float(sigma[0] ** 2) if sigma.size else 0.0
    rank = int(np.sum(sigma**2 > RANK_TOL * smax2)) if smax2 > 0 else 0

    frame_bounds = None
    riesz_bounds = None
    if rank == len(B):
        frame_bounds = (float(sigma[len(B) - 1] ** 2), float(sigma[0] ** 2))
    if rank == len(L):
        riesz_bounds = (float(sigma[len(L) - 1] ** 2), float(sigma[0] ** 2))

    if (
        frame_bounds
        and riesz_bounds
        and len(B) == len(L)
        and abs(frame_bounds[0] - 1.0) <= HADAMARD_TOL
        and abs(frame_bounds[1] - 1.0) <= HADAMARD_TOL
    ):
        cls = "Hadamard"
    elif frame_bounds and riesz_bounds:
        cls = "FrameAndRiesz"
    elif frame_bounds:
        cls = "FrameOnly"
    elif riesz_bounds:
        cls = "RieszSequenceOnly"
    else:
        cls = "Neither"

    return TripleReport(
        classification=cls,
        rank=rank,
        singular_values=tuple(float(s) for s in sigma),
        frame_bounds=frame_bounds,
        riesz_bounds=riesz_bounds,
    )


def dual_triple(
    R: ExpandingMatrix, B: DigitSet, L: DigitSet
) -> tuple[tuple[ExpandingMatrix, DigitSet, DigitSet], float]:
    """Dual triple (R^T, L, B) with the bound scale #B/#L.

    Frame bounds of (R,B,L) times #B/#L must equal the Riesz bounds of the
    dual; a mismatch signals a bug in the numerical kernels.
    """
    scale = len(B) / len(L)
    primal = analyze_triple(R, B, L)
    dual = analyze_triple(R.transpose, L, B)
    if primal.frame_bounds is not None:
        if dual.riesz_bounds is None:
            raise InternalCheckError("duality rank mismatch")
        for p, q in zip(primal.frame_bounds, dual.riesz_bounds):
            if abs(p * scale - q) > DUALITY_TOL * max(1.0, abs(q)):
                raise InternalCheckError(
                    f"duality violated: {p} * {scale} != {q}"
                )
    return (R.transpose, L, B), scale


def tight_frame_from_complete(R: ExpandingMatrix, B: DigitSet) -> TripleReport:
    """Frame report for L = a complete residue system of R^T.

    By the tight-frame law the bounds must both equal |det R| / #B.
    """
    if not distinct_residues(B, R):
        raise PreconditionError("digit set has repeated residues mod R(Z^d)")
    Lbar = DigitSet(complete_residues(R.transpose).representatives)
    report = analyze_triple(R, B, Lbar)
    expected = abs(R.det) / len(B)
    if report.frame_bounds is None:
        raise InternalCheckError("complete residue frame is rank deficient")
    for bound in report.frame_bounds:
        if abs(bound - expected) > 1e-9 * max(1.0, expected):
            raise InternalCheckError(
                f"tight frame constant {bound} != |det R|/#B = {expected}"
            )
    return report

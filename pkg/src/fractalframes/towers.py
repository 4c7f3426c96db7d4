"""Towers of triples: concatenation, spectrum enumeration, exactness
classification and finite-level witnesses.

A tower is a finite or periodic list of levels (R_j, B_j, L_j). Every level
must have distinct residues in B_j (the checkable sufficient condition for
the no-overlap property) and must be a frame triple or a Riesz-sequence
triple according to the declared tower kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InternalCheckError, PreconditionError
from .lattice import (
    DigitSet,
    ExpandingMatrix,
    IntVector,
    _as_int_vector,
    complete_residues,
    coset_residue,
)
from .triples import TripleReport, analyze_triple, build_F

BRACKET_SLACK = 1e-8
WITNESS_RESIDUAL_TOL = 1e-10
UNIT_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class TowerLevel:
    R: ExpandingMatrix
    B: DigitSet
    L: DigitSet


@dataclass(frozen=True)
class Tower:
    """Sequence of triples with per-level bounds and cached partial products."""

    levels: tuple[TowerLevel, ...]
    kind: str  # "frame" | "riesz"
    mode: str = "finite"  # "finite" | "periodic"

    def __post_init__(self):
        if self.kind not in ("frame", "riesz"):
            raise PreconditionError(f"unknown tower kind {self.kind!r}")
        if self.mode not in ("finite", "periodic"):
            raise PreconditionError(f"unknown tower mode {self.mode!r}")
        if not self.levels:
            raise PreconditionError("tower has no levels")
        for i, lev in enumerate(self.levels):
            if not lev.B.contains_zero or not lev.L.contains_zero:
                raise PreconditionError(f"level {i + 1}: 0 must belong to B and L")
            # repeated B residues are allowed here; they surface as digit
            # collisions in concatenate or as witness infeasibility

    @cached_property
    def block_reports(self) -> tuple[TripleReport, ...]:
        reports = []
        for i, lev in enumerate(self.levels):
            rep = analyze_triple(lev.R, lev.B, lev.L)
            if self.kind == "frame" and rep.frame_bounds is None:
                raise PreconditionError(
                    f"level {i + 1} is not a frame triple (rank {rep.rank} < #B)"
                )
            if self.kind == "riesz" and rep.riesz_bounds is None:
                raise PreconditionError(
                    f"level {i + 1} is not a Riesz-sequence triple "
                    f"(rank {rep.rank} < #L)"
                )
            reports.append(rep)
        return tuple(reports)

    def level(self, j: int) -> TowerLevel:
        """Level j (1-based); periodic towers unroll."""
        if j < 1:
            raise PreconditionError("level index must be >= 1")
        if self.mode == "periodic":
            return self.levels[(j - 1) % len(self.levels)]
        if j > len(self.levels):
            raise PreconditionError(
                f"level {j} beyond the {len(self.levels)} levels of a finite tower"
            )
        return self.levels[j - 1]

    def level_report(self, j: int) -> TripleReport:
        if self.mode == "periodic":
            return self.block_reports[(j - 1) % len(self.levels)]
        return self.block_reports[j - 1]

    def level_bounds(self, j: int) -> tuple[float, float]:
        rep = self.level_report(j)
        return rep.frame_bounds if self.kind == "frame" else rep.riesz_bounds

    def max_level(self) -> int | None:
        return None if self.mode == "periodic" else len(self.levels)

    def bound_products(self, n: int) -> tuple[float, float, int]:
        """(prod C_j, prod D_j, prod #B_j) over levels 1..n."""
        C = D = 1.0
        M = 1
        for j in range(1, n + 1):
            c, d = self.level_bounds(j)
            C *= c
            D *= d
            M *= len(self.level(j).B)
        return C, D, M

    @cached_property
    def products_certified(self) -> bool:
        """Whether prod C_j stays away from 0 and prod D_j stays bounded.

        Finite towers: trivially true. Periodic towers: true iff every level
        has C_j = D_j = 1 up to tolerance (any other fixed constant makes the
        infinite product diverge to 0 or infinity).
        """
        if self.mode == "finite":
            return True
        return all(
            abs(c - 1.0) <= UNIT_BOUND_TOL and abs(d - 1.0) <= UNIT_BOUND_TOL
            for c, d in (self.level_bounds(j) for j in range(1, len(self.levels) + 1))
        )


@dataclass(frozen=True, eq=False)
class ConcatenatedTriple:
    R: ExpandingMatrix
    B: DigitSet
    Lambda: DigitSet
    n: int
    report: TripleReport


@dataclass(frozen=True, eq=False)
class StepFunction:
    """f = sum_b w_b 1_{K_{b,n}} on the level-n cell decomposition."""

    level: int
    digits: DigitSet  # B_n, indexing the weights
    weights: np.ndarray = field(repr=False)

    @property
    def norm_l2mu(self) -> float:
        """||f||_{L2(mu_n)} via the step-function norm identity."""
        return float(np.sqrt(np.sum(np.abs(self.weights) ** 2) / len(self.digits)))


@dataclass(frozen=True, eq=False)
class ExactnessVerdict:
    verdict: str  # RieszBasis | OvercompleteFrame | IncompleteRieszSequence | Indeterminate
    reason: str
    level_cardinalities: tuple[tuple[int, int], ...]  # (#B_j, #L_j) per block level
    witness: StepFunction | None = None
    removable_set_description: str | None = None


def _concat_digits(T: Tower, n: int) -> tuple[ExpandingMatrix, DigitSet]:
    """(R_n...R_1, B_n) with B_j = R_j(B_{j-1}) + B_j, collision-checked."""
    lev1 = T.level(1)
    Rn = lev1.R
    digits: list[IntVector] = list(lev1.B)
    for j in range(2, n + 1):
        lev = T.level(j)
        new = []
        for prev in digits:
            mapped = lev.R.matvec(prev)
            for b in lev.B:
                new.append(tuple(m + x for m, x in zip(mapped, b)))
        if len(set(new)) != len(new):
            raise PreconditionError(
                f"digit collision in B_{j} (distinct-residue assumption violated)"
            )
        digits = new
        Rn = lev.R.matmul(Rn)
    return Rn, DigitSet(tuple(digits))


def _lambda_levels(T: Tower, n: int):
    """Yield (level j, new lambda values in canonical order) for j = 1..n.

    Level-j newcomers are sums with l_j != 0, ordered lexicographically by
    their digit tuple (l_1, ..., l_j). Duplicate values raise.
    """
    seen: set[IntVector] = set()
    d = T.level(1).R.d
    zero = tuple([0] * d)
    seen.add(zero)
    yield 0, [zero]
    # partial sums of levels 1..j-1 paired with their digit tuples
    prefix: list[tuple[tuple[IntVector, ...], IntVector]] = [((), zero)]
    RT = None  # R_1^T ... R_{j-1}^T as ExpandingMatrix
    for j in range(1, n + 1):
        lev = T.level(j)
        if j > 1:
            prev_R = T.level(j - 1).R
            RT = prev_R.transpose if RT is None else RT.matmul(prev_R.transpose)
        new_entries = []
        next_prefix = []
        for tup, val in prefix:
            for l in lev.L:
                shift = l if j == 1 else RT.matvec(l)
                point = tuple(v + s for v, s in zip(val, shift))
                next_prefix.append((tup + (l,), point))
                if any(x != 0 for x in l):
                    new_entries.append((tup + (l,), point))
        new_entries.sort(key=lambda e: e[0])
        out = []
        for tup, point in new_entries:
            if point in seen:
                raise PreconditionError(
                    f"frequency collision at level {j}: {point} appears twice in Lambda_{j}"
                )
            seen.add(point)
            out.append(point)
        prefix = next_prefix
        yield j, out


def enumerate_spectrum(
    T: Tower,
    up_to_level: int | None = None,
    radius: float | None = None,
    max_levels: int = 24,
) -> tuple[IntVector, ...]:
    """Lambda (or Lambda intersected with the ball B(0, radius)) as an ordered
    list: level of first appearance, then lexicographic digit tuple.

    Radius mode scans levels until the certified lower bound on new-point
    norms exceeds the radius over a lookahead window; if that never happens
    within max_levels, a CertificationError is raised rather than returning a
    possibly incomplete truncation.
    """
    if up_to_level is None and radius is None:
        raise PreconditionError("need up_to_level or radius")
    if up_to_level is not None:
        if up_to_level < 0:
            raise PreconditionError("level must be >= 0")
        out = []
        for j, news in _lambda_levels(T, up_to_level):
            out.extend(news)
        return tuple(out)

    cap = max_levels
    if T.mode == "finite":
        cap = min(cap, len(T.levels))
    out = []
    reach = 0.0  # max norm over Lambda_j
    done = False
    for j, news in _lambda_levels(T, cap):
        out.extend(p for p in news if float(np.linalg.norm(p)) <= radius)
        if news:
            reach = max(reach, max(float(np.linalg.norm(p)) for p in news))
        if j >= 1 and _radius_scan_complete(T, j, reach, radius, cap):
            done = True
            break
    if not done and T.mode == "periodic":
        from .errors import CertificationError

        raise CertificationError(
            f"could not certify completeness of the radius-{radius} scan "
            f"within {cap} levels"
        )
    return tuple(out)


def _radius_scan_complete(
    T: Tower, j: int, reach: float, radius: float, cap: int, lookahead: int = 8
) -> bool:
    """True when every point first appearing after level j certifiably lies
    outside B(0, radius).

    A level-i newcomer (i > j) has norm >= smin(R_1^T..R_{i-1}^T) - reach.
    The bound is checked over a lookahead window and required to be
    increasing, which covers the geometric growth regime of expanding
    products; otherwise scanning continues.
    """
    if T.mode == "finite" and j >= len(T.levels):
        return True
    prev = -np.inf
    for i in range(j + 1, j + 1 + lookahead):
        if T.mode == "finite" and i > len(T.levels):
            break
        RT = _rt_product(T, i - 1)
        smin = float(np.linalg.svd(RT.as_array(), compute_uv=False)[-1])
        if smin - reach <= radius or smin < prev:
            return False
        prev = smin
    return True


def _rt_product(T: Tower, j: int) -> ExpandingMatrix:
    """R_1^T R_2^T ... R_j^T (j >= 1)."""
    acc = T.level(1).R.transpose
    for k in range(2, j + 1):
        acc = acc.matmul(T.level(k).R.transpose)
    return acc


def concatenate(T: Tower, n: int) -> ConcatenatedTriple:
    """(R_n, B_n, Lambda_n) with the Prop-2.5-style bound bracket asserted."""
    if n < 1:
        raise PreconditionError("concatenation level must be >= 1")
    if T.mode == "finite" and n > len(T.levels):
        raise PreconditionError("level beyond finite tower")
    Rn, Bn = _concat_digits(T, n)
    lam = []
    for _, news in _lambda_levels(T, n):
        lam.extend(news)
    Lam = DigitSet(tuple(lam))
    report = analyze_triple(Rn, Bn, Lam)
    C, D, _ = T.bound_products(n)
    bounds = report.frame_bounds if T.kind == "frame" else report.riesz_bounds
    if bounds is None:
        raise InternalCheckError(
            f"concatenated triple at level {n} lost the {T.kind} property"
        )
    if bounds[0] < C - BRACKET_SLACK or bounds[1] > D + BRACKET_SLACK:
        raise InternalCheckError(
            f"concatenated bounds {bounds} outside bracket [{C}, {D}]"
        )
    return ConcatenatedTriple(R=Rn, B=Bn, Lambda=Lam, n=n, report=report)


def _block_cardinalities(T: Tower) -> tuple[tuple[int, int], ...]:
    return tuple((len(lev.B), len(lev.L)) for lev in T.levels)


def exactness_classify(T: Tower, delta_positive: bool | None = None) -> ExactnessVerdict:
    """Classify the tower's spectrum per the exactness trichotomy.

    delta_positive is the certification flag for the tail quantity produced
    by the fourier module; it is only consulted for frame towers.
    """
    cards = _block_cardinalities(T)
    T.block_reports  # validates the declared kind

    if T.kind == "riesz":
        deficient = [j + 1 for j, (nb, nl) in enumerate(cards) if nl < nb]
        if deficient:
            return ExactnessVerdict(
                verdict="IncompleteRieszSequence",
                reason=f"#L_j < #B_j at level(s) {deficient}",
                level_cardinalities=cards,
            )
        # all square: the tower is simultaneously a frame tower
        if delta_positive:
            return ExactnessVerdict(
                verdict="RieszBasis",
                reason="all #B_j = #L_j and delta(Lambda) certified positive",
                level_cardinalities=cards,
            )
        return ExactnessVerdict(
            verdict="Indeterminate",
            reason="all levels square but delta(Lambda) not certified",
            level_cardinalities=cards,
        )

    # frame tower
    if not delta_positive:
        return ExactnessVerdict(
            verdict="Indeterminate",
            reason="delta(Lambda) positivity not certified",
            level_cardinalities=cards,
        )
    surplus = [j + 1 for j, (nb, nl) in enumerate(cards) if nb < nl]
    if not surplus:
        return ExactnessVerdict(
            verdict="RieszBasis",
            reason="frame tower, delta(Lambda) > 0, all #B_j = #L_j",
            level_cardinalities=cards,
        )
    j0 = surplus[0]
    lam_removed = _removable_frequency(T, j0)
    desc = (
        f"R_1^T..R_{j0 - 1}^T lambda_{j0} + "
        f"{{finite sums over j != {j0} of R_1^T..R_(j-1)^T l_j}}, "
        f"lambda_{j0} = {list(lam_removed)}"
    )
    return ExactnessVerdict(
        verdict="OvercompleteFrame",
        reason=f"frame tower, delta(Lambda) > 0, #B_j < #L_j at level {j0}",
        level_cardinalities=cards,
        removable_set_description=desc,
    )


def _removable_frequency(T: Tower, j0: int) -> IntVector:
    """First frequency of L_{j0} whose removal keeps the level a frame triple."""
    lev = T.level(j0)
    for lam in lev.L:
        if all(x == 0 for x in lam):
            continue  # keep 0 so the reduced tower still nests
        reduced = DigitSet(tuple(p for p in lev.L if p != lam))
        if analyze_triple(lev.R, lev.B, reduced).frame_bounds is not None:
            return lam
    raise InternalCheckError(f"no removable frequency found at level {j0}")


def exactness_witness(T: Tower, lam0, n: int) -> StepFunction:
    """Unit-norm step function orthogonal to e_lambda for all lambda in
    Lambda_n except lam0, with the pre-tail lower bound verified."""
    if n == 0:
        d = T.level(1).R.d
        return StepFunction(
            level=0,
            digits=DigitSet((tuple([0] * d),)),
            weights=np.array([1.0 + 0.0j]),
        )
    for j in range(1, n + 1):
        lev = T.level(j)
        if len(lev.B) != len(lev.L):
            raise PreconditionError(
                f"exactness witness needs #B_j = #L_j at every level (level {j})"
            )
    lam0 = _as_int_vector(lam0, T.level(1).R.d)
    cat = concatenate(T, n)
    if lam0 not in cat.Lambda.points:
        raise PreconditionError(f"{lam0} is not in Lambda_{n}")
    F = build_F(cat.R, cat.B, cat.Lambda).values
    m = len(cat.B)
    if F.shape[0] != m or cat.report.rank != m:
        raise PreconditionError(
            f"finite frame at level {n} is not exact (rank {cat.report.rank}, #B {m})"
        )
    idx = cat.Lambda.points.index(lam0)
    A = np.conj(F)
    target = np.zeros(m, dtype=complex)
    target[idx] = 1.0
    w = np.linalg.solve(A, target)
    w *= np.sqrt(m) / np.linalg.norm(w)
    # rotate the phase so <f, e_lam0> is real positive (deterministic output)
    val = (A @ w)[idx]
    w *= np.conj(val) / abs(val)

    inner = (A @ w) / np.sqrt(m)  # <f, e_lambda> for each lambda
    off = np.abs(np.delete(inner, idx))
    if off.size and off.max() > WITNESS_RESIDUAL_TOL:
        raise InternalCheckError(f"witness residual {off.max():.3e} too large")
    C, _, _ = T.bound_products(n)
    if abs(inner[idx]) ** 2 < C - BRACKET_SLACK:
        raise InternalCheckError(
            f"witness lower bound violated: {abs(inner[idx]) ** 2} < {C}"
        )
    return StepFunction(level=n, digits=cat.B, weights=w)


def incompleteness_witness(T: Tower, n: int) -> tuple[IntVector, StepFunction]:
    """Extension frequency lambda_1 and the minimal-norm step function that
    vanishes against Lambda_n and pairs to 1 with e_{lambda_1}."""
    if T.kind != "riesz":
        raise PreconditionError("incompleteness witness requires a Riesz tower")
    lev1 = T.level(1)
    if len(lev1.L) >= len(lev1.B):
        raise PreconditionError("needs #L_1 < #B_1 at the first level")
    RT = lev1.R.transpose
    used = {coset_residue(l, RT) for l in lev1.L}
    lam1 = None
    for cand in complete_residues(RT).representatives:
        if coset_residue(cand, RT) in used:
            continue
        extended = DigitSet(tuple(lev1.L) + (cand,))
        if analyze_triple(lev1.R, lev1.B, extended).riesz_bounds is not None:
            lam1 = cand
            break
    if lam1 is None:
        raise PreconditionError(
            "no extension frequency preserves the Riesz-sequence property "
            "(repeated residues in B_1?)"
        )

    ext_levels = (TowerLevel(lev1.R, lev1.B, DigitSet(tuple(lev1.L) + (lam1,))),) + tuple(
        T.level(j) for j in range(2, n + 1)
    )
    ext = Tower(levels=ext_levels, kind="riesz", mode="finite")
    cat = concatenate(ext, n)
    F = build_F(cat.R, cat.B, cat.Lambda).values
    m = len(cat.B)
    target_idx = cat.Lambda.points.index(lam1)
    c = np.zeros(len(cat.Lambda), dtype=complex)
    c[target_idx] = 1.0

    A = np.conj(F) / np.sqrt(m)  # row lambda: w -> <f, e_lambda>_{L2(mu_n)}
    w = np.linalg.pinv(A) @ c
    f = StepFunction(level=n, digits=cat.B, weights=w)

    inner = A @ w
    resid = np.abs(inner - c)
    if resid.max() > WITNESS_RESIDUAL_TOL:
        raise InternalCheckError(f"interpolation residual {resid.max():.3e}")
    C, _, _ = ext.bound_products(n)
    if f.norm_l2mu > 1.0 / C + BRACKET_SLACK:
        raise InternalCheckError(
            f"interpolant norm {f.norm_l2mu} exceeds bound {1.0 / C}"
        )
    return lam1, f


def finite_level_frame_check(
    T: Tower, n: int, lambda_test: DigitSet | None = None
) -> tuple[float, float, int]:
    """Extreme eigenvalues of the frame operator of {e_lambda} on the level-n
    step-function space, plus the operator rank.

    For lambda_test = Lambda_n the result must land inside the bound bracket.
    """
    Rn, Bn = _concat_digits(T, n)
    if lambda_test is None:
        lam = []
        for _, news in _lambda_levels(T, n):
            lam.extend(news)
        lambda_test = DigitSet(tuple(lam))
    F = build_F(Rn, Bn, lambda_test).values
    sigma = np.linalg.svd(F, compute_uv=False)
    smax2 = float(sigma[0] ** 2) if sigma.size else 0.0
    rank = int(np.sum(sigma**2 > 1e-10 * smax2)) if smax2 > 0 else 0
    nonzero = sigma[:rank] ** 2
    return float(nonzero[-1]), float(nonzero[0]), rank

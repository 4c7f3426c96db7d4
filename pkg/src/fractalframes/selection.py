"""Constructive Riesz-sequence selection and Beurling density analysis.

The selection routines replace an existence theorem (partitioning a tight
frame into Riesz sequences with bounds 1 +/- eps) by verified search:
exhaustive where the candidate pool is small, greedy with optional local
swaps otherwise. Every returned set is re-verified through the triples
module before it leaves this module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InternalCheckError, PreconditionError
from .lattice import (
    DigitSet,
    ExpandingMatrix,
    IntVector,
    complete_residues,
    distinct_residues,
    int_matvec,
)
from .towers import Tower, TowerLevel, _concat_digits, enumerate_spectrum
from .triples import analyze_triple, exp_vector

BOUND_TOL = 1e-9
STRATEGIES = ("exhaustive", "greedy", "greedy+local-swap")


@dataclass(frozen=True)
class SelectionConfig:
    epsilon: float
    strategy: str = "exhaustive"
    exhaustive_threshold: int = 16  # max pool size for exhaustive search
    c0_surrogate: float = 1.0  # reporting only; never a correctness input

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise PreconditionError("epsilon must lie in (0,1)")
        if self.strategy not in STRATEGIES:
            raise PreconditionError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )
        if self.exhaustive_threshold < 1:
            raise PreconditionError("exhaustive_threshold must be >= 1")


@dataclass(frozen=True)
class SelectionResult:
    L: DigitSet
    achieved_bounds: tuple[float, float]
    achieved_cardinality: int
    target_cardinality_paper: int
    strategy_used: str
    epsilon: float

    def to_dict(self):
        return {
            "L": [list(p) for p in self.L],
            "achieved_bounds": list(self.achieved_bounds),
            "achieved_cardinality": self.achieved_cardinality,
            "target_cardinality_paper": self.target_cardinality_paper,
            "strategy_used": self.strategy_used,
            "epsilon": self.epsilon,
        }


def _pool_rows(R: ExpandingMatrix, B: DigitSet, pool) -> np.ndarray:
    return np.array([exp_vector(R, B, lam) for lam in pool], dtype=complex)


def _subset_bounds(rows: np.ndarray, idx: tuple[int, ...]) -> tuple[float, float]:
    gram = rows[list(idx)] @ rows[list(idx)].conj().T
    ev = np.linalg.eigvalsh(gram)
    return float(ev[0]), float(ev[-1])


def _feasible(rows, idx, eps) -> tuple[bool, tuple[float, float]]:
    lo, hi = _subset_bounds(rows, idx)
    ok = lo >= 1.0 - eps - BOUND_TOL and hi <= 1.0 + eps + BOUND_TOL
    return ok, (lo, hi)


def _exhaustive_best(rows, pool_size, eps, anchor: int | None, max_card):
    """Largest feasible subset; ties broken by lower bound, then lex order."""
    indices = list(range(pool_size))
    if anchor is not None:
        indices.remove(anchor)
    for c in range(min(max_card, pool_size), 0, -1):
        free = c - (1 if anchor is not None else 0)
        if free < 0:
            continue
        best = None
        for combo in itertools.combinations(indices, free):
            idx = tuple(sorted(((anchor,) if anchor is not None else ()) + combo))
            ok, bounds = _feasible(rows, idx, eps)
            if ok and (best is None or bounds[0] > best[1][0] + BOUND_TOL):
                best = (idx, bounds)
        if best is not None:
            return best
    return None


def _greedy(rows, pool_size, eps, anchor: int, max_card, swaps: bool):
    chosen = [anchor]
    while len(chosen) < max_card:
        best = None
        for cand in range(pool_size):
            if cand in chosen:
                continue
            idx = tuple(sorted(chosen + [cand]))
            ok, bounds = _feasible(rows, idx, eps)
            if ok and (best is None or bounds[0] > best[1][0] + BOUND_TOL):
                best = (cand, bounds)
        if best is None:
            break
        chosen.append(best[0])
    if swaps:
        chosen = _local_swaps(rows, pool_size, eps, anchor, chosen, max_card)
    idx = tuple(sorted(chosen))
    _, bounds = _feasible(rows, idx, eps)
    return idx, bounds


def _local_swaps(rows, pool_size, eps, anchor, chosen, max_card, passes: int = 4):
    """Try replacing one member by two outsiders; keeps the anchor."""
    for _ in range(passes):
        improved = False
        outside = [i for i in range(pool_size) if i not in chosen]
        for drop in list(chosen):
            if drop == anchor:
                continue
            base = [i for i in chosen if i != drop]
            if len(base) + 2 > max_card:
                continue
            found = None
            for c1, c2 in itertools.combinations(outside, 2):
                idx = tuple(sorted(base + [c1, c2]))
                if _feasible(rows, idx, eps)[0]:
                    found = (c1, c2)
                    break
            if found:
                chosen = base + list(found)
                improved = True
                break
        if not improved:
            break
    # grow again after swaps in case space opened up
    while len(chosen) < max_card:
        best = None
        for cand in range(pool_size):
            if cand in chosen:
                continue
            idx = tuple(sorted(chosen + [cand]))
            ok, bounds = _feasible(rows, idx, eps)
            if ok and (best is None or bounds[0] > best[1][0] + BOUND_TOL):
                best = cand
        if best is None:
            break
        chosen.append(best)
    return chosen


def riesz_subset_search(
    R: ExpandingMatrix,
    B: DigitSet,
    config: SelectionConfig,
    pool: tuple[IntVector, ...] | None = None,
) -> SelectionResult:
    """Find a large L (always containing 0) in the complete residue pool of
    R^T with Riesz bounds inside [1 - eps, 1 + eps]."""
    if not distinct_residues(B, R):
        raise PreconditionError("digit set has repeated residues mod R(Z^d)")
    if pool is None:
        pool = complete_residues(R.transpose).representatives
    rows = _pool_rows(R, B, pool)
    zero = tuple([0] * R.d)
    try:
        anchor = pool.index(zero)
    except ValueError:
        raise PreconditionError("candidate pool must contain 0")
    max_card = len(B)  # Riesz sequences are linearly independent

    strategy = config.strategy
    if strategy == "exhaustive" and len(pool) > config.exhaustive_threshold:
        raise PreconditionError(
            f"pool of {len(pool)} exceeds exhaustive threshold "
            f"{config.exhaustive_threshold}"
        )
    if strategy == "exhaustive":
        found = _exhaustive_best(rows, len(pool), config.epsilon, anchor, max_card)
        idx = found[0]
    else:
        idx, _ = _greedy(
            rows,
            len(pool),
            config.epsilon,
            anchor,
            max_card,
            swaps=(strategy == "greedy+local-swap"),
        )

    L = DigitSet(tuple(pool[i] for i in idx))
    report = analyze_triple(R, B, L)  # independent re-verification
    if report.riesz_bounds is None:
        raise InternalCheckError("selected set lost the Riesz property on re-check")
    lo, hi = report.riesz_bounds
    if lo < 1.0 - config.epsilon - 1e-7 or hi > 1.0 + config.epsilon + 1e-7:
        raise InternalCheckError(
            f"re-verified bounds ({lo}, {hi}) outside 1 +/- {config.epsilon}"
        )
    target = math.ceil(len(B) * config.epsilon**4 / config.c0_surrogate)
    return SelectionResult(
        L=L,
        achieved_bounds=(lo, hi),
        achieved_cardinality=len(L),
        target_cardinality_paper=target,
        strategy_used=strategy,
        epsilon=config.epsilon,
    )


def partition_into_riesz_classes(
    R: ExpandingMatrix, B: DigitSet, epsilon: float, exhaustive_threshold: int = 16
) -> list[DigitSet]:
    """Partition the complete residue pool of R^T into classes, each a
    Riesz-sequence set with bounds inside [1 - eps, 1 + eps]."""
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError("epsilon must lie in (0,1)")
    pool = list(complete_residues(R.transpose).representatives)
    rows_all = _pool_rows(R, B, tuple(pool))
    classes = []
    remaining = list(range(len(pool)))
    while remaining:
        rows = rows_all[remaining]
        anchor = 0  # first remaining candidate in canonical order
        if len(remaining) <= exhaustive_threshold:
            found = _exhaustive_best(rows, len(remaining), epsilon, anchor, len(B))
            idx = found[0]
        else:
            idx, _ = _greedy(rows, len(remaining), epsilon, anchor, len(B), swaps=True)
        member_ids = [remaining[i] for i in idx]
        classes.append(DigitSet(tuple(pool[i] for i in member_ids)))
        remaining = [i for i in remaining if i not in member_ids]
    return classes


@dataclass(frozen=True)
class GroupRecord:
    group_index: int
    level_span: tuple[int, int]  # 1-based inclusive range of raw levels
    epsilon: float
    achieved_cardinality: int
    pool_size: int
    bounds: tuple[float, float]


@dataclass(frozen=True, eq=False)
class RieszTowerBuild:
    tower: Tower
    groups: tuple[GroupRecord, ...]

    @property
    def epsilons(self) -> tuple[float, ...]:
        return tuple(g.epsilon for g in self.groups)


def _group_concat(levels) -> tuple[ExpandingMatrix, DigitSet]:
    """Concatenate consecutive (R, B) levels into one (R_g, B_g)."""
    helper = Tower(
        levels=tuple(
            TowerLevel(R, B, DigitSet((tuple([0] * R.d),))) for R, B in levels
        ),
        kind="riesz",
        mode="finite",
    )
    return _concat_digits(helper, len(levels))


def _auto_epsilon(j: int, card: int, c0: float) -> float:
    return min(0.9, max(j**-2.0, (c0 / card) ** 0.25))


def build_riesz_tower(
    measure_levels,
    num_groups: int,
    mode: str = "periodic",
    config: SelectionConfig | None = None,
    epsilons: tuple[float, ...] | None = None,
) -> RieszTowerBuild:
    """Regroup the measure's levels so group j has at least 2^j digits, then
    select a Riesz frequency set with #L >= 2 per group.

    measure_levels: list of (ExpandingMatrix, DigitSet); periodic mode cycles
    through them. The auto epsilon schedule is summable; when a group is
    infeasible at its scheduled epsilon the epsilon is escalated (capped at
    0.9) before giving up.
    """
    levels = [(R, B) for R, B in measure_levels]
    if any(len(B) < 2 for _, B in levels):
        raise PreconditionError("every level needs #B_j >= 2")
    if config is None:
        config = SelectionConfig(epsilon=0.5, strategy="greedy+local-swap")

    def raw_level(k):  # 1-based
        if mode == "periodic":
            return levels[(k - 1) % len(levels)]
        if k > len(levels):
            raise PreconditionError(
                f"finite measure exhausted while forming group (level {k})"
            )
        return levels[k - 1]

    tower_levels = []
    records = []
    next_raw = 1
    for j in range(1, num_groups + 1):
        group = []
        card = 1
        start = next_raw
        while card < 2**j:
            group.append(raw_level(next_raw))
            card *= len(group[-1][1])
            next_raw += 1
        Rg, Bg = _group_concat(group)
        eps = epsilons[j - 1] if epsilons else _auto_epsilon(j, len(Bg), config.c0_surrogate)
        result = _search_with_escalation(Rg, Bg, eps, config)
        if result is None:
            raise PreconditionError(
                f"group {j}: no frequency set with #L >= 2 found up to epsilon 0.9"
            )
        eps_used, sel = result
        tower_levels.append(TowerLevel(Rg, Bg, sel.L))
        records.append(
            GroupRecord(
                group_index=j,
                level_span=(start, next_raw - 1),
                epsilon=eps_used,
                achieved_cardinality=sel.achieved_cardinality,
                pool_size=abs(Rg.det),
                bounds=sel.achieved_bounds,
            )
        )
    tower = Tower(levels=tuple(tower_levels), kind="riesz", mode="finite")
    return RieszTowerBuild(tower=tower, groups=tuple(records))


def _search_with_escalation(Rg, Bg, eps, config):
    pool = complete_residues(Rg.transpose).representatives
    strategy = _pick_strategy(len(pool), config)
    while True:
        sel = riesz_subset_search(
            Rg,
            Bg,
            SelectionConfig(
                epsilon=eps,
                strategy=strategy,
                exhaustive_threshold=config.exhaustive_threshold,
                c0_surrogate=config.c0_surrogate,
            ),
        )
        if sel.achieved_cardinality >= 2:
            return eps, sel
        if eps >= 0.9:
            return None
        eps = min(0.9, eps * 1.5)


def _pick_strategy(pool_size: int, config: SelectionConfig) -> str:
    if pool_size <= config.exhaustive_threshold:
        return "exhaustive"
    return "greedy+local-swap" if pool_size <= 100 else "greedy"


@dataclass(frozen=True)
class SelfSimilarDescriptor:
    """R = rho * O with O orthogonal; digits are distinct residues."""

    R: ExpandingMatrix
    B: DigitSet
    c0_surrogate: float = 1.0
    epsilons: tuple[float, ...] | None = None

    def __post_init__(self):
        if not distinct_residues(self.B, self.R):
            raise PreconditionError("digit set has repeated residues mod R(Z^d)")
        rho = self.rho
        O = np.array(self.R.entries, dtype=float) / rho
        if not np.allclose(O @ O.T, np.eye(self.R.d), atol=1e-9):
            raise PreconditionError("matrix is not a similarity (rho * orthogonal)")

    @property
    def rho(self) -> float:
        return abs(self.R.det) ** (1.0 / self.R.d)

    def epsilon_for(self, k: int) -> float:
        """Summable schedule; the k^-5 floor target is reported, not enforced."""
        if self.epsilons is not None:
            return self.epsilons[k - 1]
        return _auto_epsilon(k, len(self.B) ** k, self.c0_surrogate)


@dataclass(frozen=True, eq=False)
class BeurlingReport:
    radii: tuple[float, ...]
    counts: tuple[int, ...]
    dim_estimate: float
    residual: float
    dim_ceiling: float
    paper_targets: tuple[int, ...] = ()
    achieved: tuple[int, ...] = ()

    def to_dict(self):
        return {
            "radii": list(self.radii),
            "counts": list(self.counts),
            "dim_estimate": None if math.isnan(self.dim_estimate) else self.dim_estimate,
            "residual": None if math.isnan(self.residual) else self.residual,
            "dim_ceiling": self.dim_ceiling,
            "paper_targets": list(self.paper_targets),
            "achieved": list(self.achieved),
        }


@dataclass(frozen=True, eq=False)
class DimensionSchedule:
    tower: Tower | None
    spectrum: tuple[IntVector, ...]
    report: BeurlingReport
    groups: tuple[GroupRecord, ...]


def _matrix_power(R: ExpandingMatrix, k: int) -> ExpandingMatrix:
    acc = R
    for _ in range(k - 1):
        acc = acc.matmul(R)
    return acc


def _reduce_into_box(rep: IntVector, RTk: ExpandingMatrix) -> IntVector:
    """Shift a residue representative by RTk(Z^d) into the centered
    fundamental box (coordinates of RTk^{-1} rep in [-1/2, 1/2])."""
    adj = RTk.adjugate
    det = RTk.det
    coeffs = [Fraction(c, det) for c in int_matvec(adj, rep)]
    shift = tuple(int(round(float(c))) for c in coeffs)
    move = RTk.matvec(shift)
    return tuple(r - m for r, m in zip(rep, move))


def maximal_dimension_schedule(
    S: SelfSimilarDescriptor,
    max_k: int,
    config: SelectionConfig | None = None,
) -> DimensionSchedule:
    """Grouped selection schedule n_k = k for a self-similar measure, with
    ball counts against the radii h_k and the resulting dimension estimate."""
    if config is None:
        config = SelectionConfig(epsilon=0.5, strategy="greedy+local-swap")
    d = S.R.d
    rho = S.rho
    ceiling = math.log(len(S.B)) / math.log(rho)
    zero = tuple([0] * d)
    if max_k == 0:
        report = BeurlingReport(
            radii=(),
            counts=(),
            dim_estimate=0.0,
            residual=0.0,
            dim_ceiling=ceiling,
        )
        return DimensionSchedule(tower=None, spectrum=(zero,), report=report, groups=())

    tower_levels = []
    records = []
    raw_done = 0
    for k in range(1, max_k + 1):
        Rk = _matrix_power(S.R, k)
        _, Bg = _group_concat([(S.R, S.B)] * k)
        RTk = Rk.transpose
        pool = tuple(
            _reduce_into_box(rep, RTk)
            for rep in complete_residues(RTk).representatives
        )
        eps = S.epsilon_for(k)
        strategy = _pick_strategy(len(pool), config)
        sel = riesz_subset_search(
            Rk,
            Bg,
            SelectionConfig(
                epsilon=eps,
                strategy=strategy,
                exhaustive_threshold=config.exhaustive_threshold,
                c0_surrogate=config.c0_surrogate,
            ),
            pool=pool,
        )
        tower_levels.append(TowerLevel(Rk, Bg, sel.L))
        records.append(
            GroupRecord(
                group_index=k,
                level_span=(raw_done + 1, raw_done + k),
                epsilon=eps,
                achieved_cardinality=sel.achieved_cardinality,
                pool_size=len(pool),
                bounds=sel.achieved_bounds,
            )
        )
        raw_done += k

    tower = Tower(levels=tuple(tower_levels), kind="riesz", mode="finite")
    spectrum = tuple(enumerate_spectrum(tower, up_to_level=max_k))
    radii = tuple(
        math.sqrt(d) * rho ** (k * (k + 1) / 2.0 + 1) for k in range(1, max_k + 1)
    )
    counts = tuple(
        sum(1 for p in spectrum if math.sqrt(sum(x * x for x in p)) <= h)
        for h in radii
    )
    paper_targets = tuple(
        max(1, math.ceil(len(S.B) ** k / k**5)) for k in range(1, max_k + 1)
    )
    achieved = tuple(r.achieved_cardinality for r in records)
    if len(radii) >= 3 and max(radii) / min(radii) >= 100.0:
        est = beurling_dim_estimate(radii, counts)
        dim_estimate, residual = est.slope, est.residual
    else:
        dim_estimate, residual = float("nan"), float("nan")
    if not math.isnan(dim_estimate) and dim_estimate > ceiling + 0.05:
        raise InternalCheckError(
            f"dimension estimate {dim_estimate} exceeds ceiling {ceiling} + 0.05"
        )
    report = BeurlingReport(
        radii=radii,
        counts=counts,
        dim_estimate=dim_estimate,
        residual=residual,
        dim_ceiling=ceiling,
        paper_targets=paper_targets,
        achieved=achieved,
    )
    return DimensionSchedule(
        tower=tower, spectrum=spectrum, report=report, groups=tuple(records)
    )


def beurling_density(points, alpha: float, radii, centers=None) -> float:
    """Finite-truncation proxy of the upper Beurling density: max over the
    given radii and centers of count / h^alpha."""
    pts = np.array([p if hasattr(p, "__len__") else (p,) for p in points], dtype=float)
    radii = [float(h) for h in radii]
    if any(h <= 0 for h in radii):
        raise PreconditionError("radii must be positive")
    if centers is None:
        centers = [tuple([0.0] * pts.shape[1])]
    best = 0.0
    for x in centers:
        xv = np.array(x if hasattr(x, "__len__") else (x,), dtype=float)
        dist = np.linalg.norm(pts - xv, axis=1)
        for h in radii:
            best = max(best, float(np.sum(dist <= h)) / h**alpha)
    return best


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    residual: float


def beurling_dim_estimate(radii, counts) -> DimensionEstimate:
    """Least-squares slope of log count against log h.

    Requires at least 3 distinct radii spanning at least two decades.
    """
    radii = [float(h) for h in radii]
    counts = [int(c) for c in counts]
    if len(set(radii)) < 3:
        raise PreconditionError("need at least 3 distinct radii")
    if max(radii) / min(radii) < 100.0:
        raise PreconditionError("radii must span at least two decades")
    if any(c <= 0 for c in counts):
        raise PreconditionError("counts must be positive")
    x = np.log(np.array(radii))
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DimensionEstimate(slope=float(slope), residual=resid)

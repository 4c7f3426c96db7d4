"""FastAPI service exposing the frame/Riesz toolbox.

Every endpoint is a pure computation: no state, no side effects, and
deterministic responses, so the CLI can run it in-process.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import CertificationError, InternalCheckError, PreconditionError
from ..fourier import MeasureModel, certify_delta_positive, delta_lower_estimate, muhat
from ..lattice import DigitSet, ExpandingMatrix
from ..selection import (
    SelectionConfig,
    SelfSimilarDescriptor,
    beurling_density,
    beurling_dim_estimate,
    maximal_dimension_schedule,
    partition_into_riesz_classes,
    riesz_subset_search,
)
from ..towers import (
    concatenate,
    enumerate_spectrum,
    exactness_classify,
    exactness_witness,
    incompleteness_witness,
)
from ..triples import analyze_triple
from . import models as m


def _cvec(z) -> list[float]:
    return [float(z.real), float(z.imag)]


def create_app() -> FastAPI:
    app = FastAPI(title="fractalframes", version=__version__)

    @app.exception_handler(PreconditionError)
    async def _precondition(request: Request, exc: PreconditionError):
        kind = "certification" if isinstance(exc, CertificationError) else "precondition"
        return JSONResponse(status_code=422, content={"error": str(exc), "kind": kind})

    @app.exception_handler(InternalCheckError)
    async def _internal(request: Request, exc: InternalCheckError):
        return JSONResponse(
            status_code=500, content={"error": str(exc), "kind": "internal"}
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/check-triple")
    def check_triple(req: m.CheckTripleRequest):
        t = req.triple
        report = analyze_triple(t.matrix(), t.digits(), t.freqs())
        return report.to_dict()

    @app.post("/tower-report")
    def tower_report(req: m.TowerReportRequest):
        T = req.tower.build()
        n = req.levels
        reports = [T.level_report(j).to_dict() for j in range(1, n + 1)]
        prod_c, prod_d, prod_m = T.bound_products(n)
        ct = concatenate(T, n)
        delta = None
        delta_positive = None
        if req.certify_delta:
            M = MeasureModel.from_tower(T)
            try:
                cert = certify_delta_positive(M, T, target_error=req.target_error)
                delta = {"certified": cert.certified, "lower_bound": cert.lower_bound}
                delta_positive = cert.certified and cert.lower_bound > 0
            except CertificationError as exc:
                delta = {"certified": False, "lower_bound": 0.0, "error": str(exc)}
                delta_positive = None
        verdict = exactness_classify(T, delta_positive=delta_positive)
        return {
            "level_reports": reports,
            "products": {"C": prod_c, "D": prod_d, "M": prod_m},
            "products_certified": T.products_certified,
            "concatenated": {
                "level": n,
                "R": [list(r) for r in ct.R.entries],
                "num_digits": len(ct.B),
                "num_frequencies": len(ct.Lambda),
                "report": ct.report.to_dict(),
            },
            "delta": delta,
            "verdict": {
                "verdict": verdict.verdict,
                "reason": verdict.reason,
                "level_cardinalities": [list(c) for c in verdict.level_cardinalities],
                "removable_set_description": verdict.removable_set_description,
            },
        }

    @app.post("/spectrum")
    def spectrum(req: m.SpectrumRequest):
        T = req.tower.build()
        if (req.up_to_level is None) == (req.radius is None):
            raise PreconditionError("give exactly one of up_to_level or radius")
        if req.up_to_level is not None:
            pts = enumerate_spectrum(T, up_to_level=req.up_to_level)
        else:
            pts = enumerate_spectrum(T, radius=req.radius)
        return {"points": [list(p) for p in pts], "count": len(pts)}

    @app.post("/tail-delta")
    def tail_delta(req: m.TailDeltaRequest):
        T = req.tower.build()
        M = MeasureModel.from_tower(T)
        value, argn, arglam = delta_lower_estimate(
            M, T, max_level=req.max_level, target_error=req.target_error
        )
        certified = False
        certified_lower = None
        if req.certify:
            try:
                cert = certify_delta_positive(M, T, target_error=req.target_error)
                certified = cert.certified
                certified_lower = cert.lower_bound
            except CertificationError:
                certified = False
        return {
            "delta_lower": value,
            "argmin_level": argn,
            "argmin_lambda": list(arglam),
            "levels_scanned": req.max_level,
            "certified": certified,
            "certified_lower_bound": certified_lower,
        }

    @app.post("/muhat")
    def muhat_rows(req: m.MuhatRequest):
        T = req.tower.build()
        M = MeasureModel.from_tower(T)
        if T.levels[0].R.d != 1:
            raise PreconditionError("muhat scan expects a one-dimensional measure")
        rows = []
        for xi in req.xis:
            est = muhat(M, xi, target_error=req.target_error)
            rows.append(
                {
                    "xi": xi,
                    "re": float(est.value.real),
                    "im": float(est.value.imag),
                    "error_bound": est.error_bound,
                }
            )
        return {"rows": rows}

    @app.post("/search-riesz")
    def search_riesz(req: m.SearchRieszRequest):
        R = ExpandingMatrix(tuple(tuple(r) for r in req.R))
        B = DigitSet(tuple((b,) if isinstance(b, int) else tuple(b) for b in req.B))
        config = SelectionConfig(
            epsilon=req.epsilon,
            strategy=req.strategy,
            exhaustive_threshold=req.exhaustive_threshold,
        )
        result = riesz_subset_search(R, B, config).to_dict()
        if req.partition:
            classes = partition_into_riesz_classes(
                R, B, req.epsilon, exhaustive_threshold=req.exhaustive_threshold
            )
            result["partition"] = [[list(p) for p in c] for c in classes]
            result["partition_size"] = len(classes)
        return result

    @app.post("/schedule-57")
    def schedule_57(req: m.Schedule57Request):
        S = SelfSimilarDescriptor(
            R=ExpandingMatrix(tuple(tuple(r) for r in req.R)),
            B=DigitSet(tuple((b,) if isinstance(b, int) else tuple(b) for b in req.B)),
            epsilons=tuple(req.epsilons) if req.epsilons else None,
        )
        sched = maximal_dimension_schedule(S, req.max_k)
        return {
            "groups": [
                {
                    "k": g.group_index,
                    "epsilon": g.epsilon,
                    "achieved_cardinality": g.achieved_cardinality,
                    "pool_size": g.pool_size,
                    "bounds": list(g.bounds),
                }
                for g in sched.groups
            ],
            "spectrum_size": len(sched.spectrum),
            "report": sched.report.to_dict(),
        }

    @app.post("/beurling")
    def beurling(req: m.BeurlingRequest):
        points = [(p,) if isinstance(p, int) else tuple(p) for p in req.points]
        centers = [tuple(c) for c in req.centers] if req.centers else None
        densities = [
            {
                "alpha": a,
                "density": beurling_density(points, a, req.radii, centers=centers),
            }
            for a in req.alpha_grid
        ]
        counts = [
            sum(1 for p in points if math.sqrt(sum(x * x for x in p)) <= h)
            for h in req.radii
        ]
        out = {
            "densities": densities,
            "radii": list(req.radii),
            "counts": counts,
        }
        try:
            est = beurling_dim_estimate(req.radii, counts)
            out["dim_estimate"] = est.slope
            out["residual"] = est.residual
        except PreconditionError as exc:
            out["dim_estimate"] = None
            out["dim_estimate_unavailable"] = str(exc)
        return out

    @app.post("/witness")
    def witness(req: m.WitnessRequest):
        T = req.tower.build()
        if req.witness_kind == "exactness":
            if req.lam0 is None:
                raise PreconditionError("exactness witness requires lam0")
            lam0 = (req.lam0,) if isinstance(req.lam0, int) else tuple(req.lam0)
            f = exactness_witness(T, lam0, req.level)
            return {
                "witness_kind": "exactness",
                "level": f.level,
                "digits": [list(b) for b in f.digits],
                "weights": [_cvec(w) for w in f.weights],
                "norm": f.norm_l2mu,
            }
        lam1, f = incompleteness_witness(T, req.level)
        return {
            "witness_kind": "incompleteness",
            "extension_frequency": list(lam1),
            "level": f.level,
            "digits": [list(b) for b in f.digits],
            "weights": [_cvec(w) for w in f.weights],
            "norm": f.norm_l2mu,
        }

    @app.post("/validate")
    def validate(req: m.ValidateRequest):
        return {"diagnostics": validate_payload(req.command, req.payload)}

    return app


_REQUEST_TYPES = {
    "check-triple": m.CheckTripleRequest,
    "tower-report": m.TowerReportRequest,
    "spectrum": m.SpectrumRequest,
    "tail-delta": m.TailDeltaRequest,
    "muhat": m.MuhatRequest,
    "search-riesz": m.SearchRieszRequest,
    "schedule-57": m.Schedule57Request,
    "beurling": m.BeurlingRequest,
    "witness": m.WitnessRequest,
}


def validate_payload(command: str, payload: dict) -> list[str]:
    """Diagnostics for a job payload; empty iff the payload is valid."""
    if command not in _REQUEST_TYPES:
        return [f"unknown command {command!r}"]
    import pydantic

    diags = []
    try:
        req = _REQUEST_TYPES[command].model_validate(payload)
    except pydantic.ValidationError as exc:
        return [
            f"{'.'.join(str(x) for x in err['loc'])}: {err['msg']}"
            for err in exc.errors()
        ]
    # construct domain objects so lattice-level checks also run
    try:
        tower = getattr(req, "tower", None)
        if tower is not None:
            tower.build().block_reports
        triple = getattr(req, "triple", None)
        if triple is not None:
            triple.matrix(), triple.digits(), triple.freqs()
        if isinstance(req, (m.SearchRieszRequest, m.Schedule57Request)):
            ExpandingMatrix(tuple(tuple(r) for r in req.R))
            DigitSet(tuple((b,) if isinstance(b, int) else tuple(b) for b in req.B))
    except PreconditionError as exc:
        diags.append(str(exc))
    return diags


app = create_app()

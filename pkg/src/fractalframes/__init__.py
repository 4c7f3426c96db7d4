"""Exponential frames and Riesz sequences for Cantor-type fractal measures."""

__version__ = "0.1.0"

from .lattice import (
    ExpandingMatrix,
    DigitSet,
    ResidueSystem,
    is_expanding,
    coset_residue,
    distinct_residues,
    complete_residues,
)
from .triples import (
    TripleReport,
    exp_vector,
    build_F,
    analyze_triple,
    dual_triple,
    tight_frame_from_complete,
)
from .towers import (
    Tower,
    ConcatenatedTriple,
    StepFunction,
    ExactnessVerdict,
    concatenate,
    enumerate_spectrum,
    exactness_classify,
    exactness_witness,
    incompleteness_witness,
    finite_level_frame_check,
)
from .fourier import (
    MeasureModel,
    TailEstimate,
    mask_eval,
    muhat,
    tail_muhat,
    delta_lower_estimate,
    certify_delta_positive,
    frame_energy,
)
from .selection import (
    SelectionConfig,
    SelectionResult,
    SelfSimilarDescriptor,
    BeurlingReport,
    riesz_subset_search,
    partition_into_riesz_classes,
    build_riesz_tower,
    maximal_dimension_schedule,
    beurling_density,
    beurling_dim_estimate,
)

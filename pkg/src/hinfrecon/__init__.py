"""Worst-case optimal digital reconstruction of sampled analog signals.

Designs the slow-rate FIR filter that minimizes the worst-case L2 gain
from the analog signal class to the reconstruction error, resolved on a
fast intersample grid, and benchmarks it against truncated-sinc and
consistent-resampling spline reconstruction.
"""

from .statespace import (
    ContinuousStateSpace,
    DiscreteStateSpace,
    SignalGrid,
    FirFilter,
    ResolventSingularError,
    expm,
    c2d_zoh,
    series,
    cseries,
    parallel,
    simulate,
    frequency_response,
    fir_to_statespace,
)
from .lifting import (
    DesignProblem,
    GeneralizedPlant,
    lift,
    delay_line,
    build_generalized_plant,
    close_loop,
)
from .hinfnorm import (
    NormResult,
    UnstableSystemError,
    NormInconclusiveError,
    hinf_norm,
    grid_lower_bound,
    spectral_radius,
)
from .design import (
    SynthesisReport,
    UncertaintySpec,
    RobustnessReport,
    design_fir,
    evaluate_J,
    robustness_check,
)
from .sampling import (
    Kernel,
    LaurentFilter,
    RealizabilityReport,
    GramNotInvertibleError,
    bspline_value,
    kernel_eval,
    sinc_reconstruct,
    gram_filter,
    analyze_roots,
    invert_gram,
    causal_inverse,
    consistency_residual,
)
from .pipelines import (
    PipelineSpec,
    PipelineResult,
    GainProbeResult,
    CompareRow,
    run_pipeline,
    gain_probe,
    compare,
    trapezoid_l2,
)
from .tfparse import RationalExpr, ParseError, parse_tf, realize

__version__ = "0.1.0"

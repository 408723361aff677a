"""Shape algebras, finite shape topologies and retrospective continuity analysis."""

from .analysis import (
    AnalysisReport,
    OpennessPolicy,
    Rule,
    Trace,
    TraceError,
    TraceStep,
    added_parts,
    analyze,
    check_step,
)
from .mappings import (
    CATALOG_IDS,
    PRODUCTION,
    StepContext,
    Undefined,
    Verdict,
    classify,
    closed_form,
    evaluate,
    mapping_describes,
    oracle_preimage,
    parse_formula,
    preimage,
)
from .parametric import Assignment, Schema, instantiate, run_parametric
from .shapes import (
    U0,
    U1,
    LabeledPoint,
    Segment,
    Shape,
    ShapeError,
    atomize,
    canonicalize,
    difference,
    part_of,
    product,
    sum_,
    sym_difference,
)
from .textio import emit_report, format_shape, parse_shape, parse_trace
from .topology import Topology, generate, is_boolean, reduced_basis
from .transforms import Transform, TransformGroup, apply, enumerate_matches

__version__ = "0.1.0"

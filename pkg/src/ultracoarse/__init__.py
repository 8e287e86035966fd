"""Exact coarse geometry of finite ultrametric spaces."""
from .cu import build_pu_prefix, embed_into_cu, embed_into_cu_d, embed_into_pu
from .fu import build_fu, build_fu_literal, embed_into_fu, enumerate_ultrametrics, oracle_embed_search
from .groups import BitVector, Filtration, embed_into_group, filtration_metric, filtrations_equivalent
from .io import dump_space, parse_space
from .metric import (
    DSet,
    Dist,
    FiniteMetricSpace,
    ValidationReport,
    Violation,
    chain_ultrametric,
    discretize,
    r_components,
    separated_net,
    validate_isosceles,
    validate_metric,
    validate_ultrametric,
    value_set,
)
from .resolution import assemble_total, lego_decompose, top_split
from .splice import SpliceSpec, coarse_union, splice_metric, verify_union_at_scale

__version__ = "0.1.0"

__all__ = [
    "BitVector", "DSet", "Dist", "Filtration", "FiniteMetricSpace", "SpliceSpec",
    "ValidationReport", "Violation", "assemble_total", "build_fu", "build_fu_literal",
    "build_pu_prefix", "chain_ultrametric", "coarse_union", "discretize", "dump_space",
    "embed_into_cu", "embed_into_cu_d", "embed_into_fu", "embed_into_group", "embed_into_pu",
    "enumerate_ultrametrics", "filtration_metric", "filtrations_equivalent", "lego_decompose",
    "oracle_embed_search", "parse_space", "r_components", "separated_net", "splice_metric",
    "top_split", "validate_isosceles", "validate_metric", "validate_ultrametric", "value_set",
    "verify_union_at_scale",
]

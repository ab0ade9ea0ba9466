"""Pseudoadditive information contents, nonextensive entropies and an axiom verifier."""

from .axioms import AxiomReport, CheckRecord, GridSpec, verify
from .content import (
    ContentSpec,
    QPoint,
    info_content,
    info_content_stable,
    preset,
    pseudoadditivity_residual,
)
from .entropy import Distribution, Observable, entropy, g_expectation, kl_divergence
from .exprlang import Expr, evaluate, parse
from .recover import RecoveryResult, SampleTable, recover

__version__ = "0.1.0"

__all__ = [
    "AxiomReport", "CheckRecord", "ContentSpec", "Distribution", "Expr", "GridSpec",
    "Observable", "QPoint", "RecoveryResult", "SampleTable",
    "entropy", "evaluate", "g_expectation", "info_content", "info_content_stable",
    "kl_divergence", "parse", "preset", "pseudoadditivity_residual", "recover", "verify",
]

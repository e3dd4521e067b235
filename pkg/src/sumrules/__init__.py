"""Exactly solvable quantum sum rules, verified two independent ways.

Two models in reduced units (infinite square well on [0, 1]; single
attractive delta well with kappa_0 = 1), four sum rules (closure,
Thomas-Reiche-Kuhn, monopole, Bethe) and second-order Stark shifts.
Each quantity is computed along a closed analytic route and a
brute-force numerical route; `engine.verify` compares both against the
analytic right-hand side.
"""

from .core import (
    ArcDivergenceError,
    ConvergenceError,
    DomainError,
    InconsistencyError,
    InvalidSpecError,
    ModelKind,
    ModelSpec,
    PoleError,
    ReducedModel,
    SumRuleError,
    TruncationTrace,
    UnitScales,
    VerificationReport,
    to_reduced,
)
from .engine import (
    BetheComponents,
    Operator,
    OscillatorStrengthTable,
    RulePaths,
    RuleVerification,
    StarkVerification,
    SumRuleSpec,
    analytic_rhs,
    bethe_components,
    lhs_delta,
    lhs_isw,
    oscillator_strength_integral,
    oscillator_strengths,
    stark_verify,
    verify,
)
from .quadrature import QuadratureResult
from .series import Parity

__version__ = "0.1.0"

__all__ = [
    "ArcDivergenceError",
    "BetheComponents",
    "ConvergenceError",
    "DomainError",
    "InconsistencyError",
    "InvalidSpecError",
    "ModelKind",
    "ModelSpec",
    "Operator",
    "OscillatorStrengthTable",
    "Parity",
    "PoleError",
    "QuadratureResult",
    "ReducedModel",
    "RulePaths",
    "RuleVerification",
    "StarkVerification",
    "SumRuleError",
    "SumRuleSpec",
    "TruncationTrace",
    "UnitScales",
    "VerificationReport",
    "analytic_rhs",
    "bethe_components",
    "lhs_delta",
    "lhs_isw",
    "oscillator_strength_integral",
    "oscillator_strengths",
    "stark_verify",
    "to_reduced",
    "verify",
    "__version__",
]

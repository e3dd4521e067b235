"""Shared model descriptions, reduced units, and verification records.

Everything numerical in this package runs in reduced units (hbar = m = 1,
and well width a = 1 for the box model or kappa0 = 1 for the delta model).
The types here carry the scale factors needed to move results back to
dimensional form, plus the bookkeeping records produced by the brute-force
and quadrature routes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

DEFAULT_TOL = 1e-9
REL_ERR_FLOOR = 1e-300

DEFAULT_MAX_TERMS = 10_000_000
KMAX_ENV_VAR = "SUMRULE_KMAX"


class SumRuleError(Exception):
    """Base class for errors raised by this package."""


class InvalidSpecError(SumRuleError, ValueError):
    """Model or rule specification violates a precondition."""


class DomainError(SumRuleError, ValueError):
    """Function evaluated outside its mathematical domain."""


class PoleError(SumRuleError, ValueError):
    """Closed-form evaluation requested too close to a real pole."""


class ConvergenceError(SumRuleError, RuntimeError):
    """An iterative limit or extrapolation failed to settle."""


class InconsistencyError(SumRuleError, RuntimeError):
    """Two routes that must agree internally did not."""


class ArcDivergenceError(SumRuleError, ValueError):
    """Rational integrand decays too slowly for a closable contour."""


def default_max_terms() -> int:
    """Truncation cap for brute-force sums; SUMRULE_KMAX overrides."""
    raw = os.environ.get(KMAX_ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_TERMS
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidSpecError(f"{KMAX_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InvalidSpecError(f"{KMAX_ENV_VAR} must be positive, got {value}")
    return value


class ModelKind(Enum):
    ISW = "isw"
    DELTA = "delta"


@dataclass(frozen=True)
class UnitScales:
    """Dimensional constants fixed at the API boundary."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        for name in ("hbar", "mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidSpecError(f"{name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class ModelSpec:
    """One of the two solvable models plus its dimensional inputs.

    ISW uses `isw_width` (the well sits on [0, a]); DELTA uses `kappa0`,
    the inverse decay length of the single bound state.  The delta
    coupling g follows from kappa0 = m g / hbar^2.
    """

    kind: ModelKind
    isw_width: float | None = None
    kappa0: float | None = None
    scales: UnitScales = field(default_factory=UnitScales)

    def __post_init__(self) -> None:
        if self.kind is ModelKind.ISW:
            if self.kappa0 is not None:
                raise InvalidSpecError("kappa0 is meaningless for the ISW model")
            if self.isw_width is None or not (math.isfinite(self.isw_width) and self.isw_width > 0):
                raise InvalidSpecError(f"ISW requires a finite positive width, got {self.isw_width}")
        elif self.kind is ModelKind.DELTA:
            if self.isw_width is not None:
                raise InvalidSpecError("isw_width is meaningless for the DELTA model")
            if self.kappa0 is None or not (math.isfinite(self.kappa0) and self.kappa0 > 0):
                raise InvalidSpecError(f"DELTA requires finite positive kappa0, got {self.kappa0}")
        else:
            raise InvalidSpecError(f"unknown model kind {self.kind!r}")

    @property
    def coupling(self) -> float:
        """Delta-potential strength g = hbar^2 kappa0 / m."""
        if self.kind is not ModelKind.DELTA:
            raise InvalidSpecError("coupling is defined only for the DELTA model")
        return self.scales.hbar**2 * self.kappa0 / self.scales.mass

    @property
    def bound_length(self) -> float:
        """Natural length 1/kappa0 of the delta bound state."""
        if self.kind is not ModelKind.DELTA:
            raise InvalidSpecError("bound_length is defined only for the DELTA model")
        return 1.0 / self.kappa0


@dataclass(frozen=True)
class ReducedModel:
    """Scale pair mapping reduced results back to dimensional ones.

    energies: E_dim = E_reduced * energy_unit
    lengths:  x_dim = x_reduced * length_unit
    """

    kind: ModelKind
    energy_unit: float
    length_unit: float

    def to_dimensional_energy(self, e_reduced: float) -> float:
        return e_reduced * self.energy_unit

    def to_dimensional_length(self, x_reduced: float) -> float:
        return x_reduced * self.length_unit


def to_reduced(spec: ModelSpec) -> ReducedModel:
    """Strip a ModelSpec down to reduced units plus its scale pair.

    ISW: length unit a, energy unit hbar^2/(m a^2), so reduced
    E_n = (n pi)^2 / 2.  DELTA: length unit 1/kappa0, energy unit
    hbar^2 kappa0^2 / m, so the reduced bound energy is -1/2.
    """
    hbar, mass = spec.scales.hbar, spec.scales.mass
    if spec.kind is ModelKind.ISW:
        length_unit = spec.isw_width
        energy_unit = hbar**2 / (mass * spec.isw_width**2)
    else:
        length_unit = 1.0 / spec.kappa0
        energy_unit = hbar**2 * spec.kappa0**2 / mass
    return ReducedModel(kind=spec.kind, energy_unit=energy_unit, length_unit=length_unit)


@dataclass(frozen=True)
class TruncationTrace:
    """Record of one brute-force partial summation.

    `value` is the returned estimate: the raw partial sum plus an
    integral tail correction.  `partial_sums` holds raw partial sums at
    geometrically spaced checkpoints (always ending with the final one).
    `tail_estimate` bounds the residual error left after the correction,
    so `converged` means both the last term and the tail estimate fell
    below the requested tolerance.
    """

    value: float
    partial_sums: tuple[float, ...]
    terms_used: int
    last_term: float
    tail_estimate: float
    converged: bool

    def __post_init__(self) -> None:
        if not self.partial_sums:
            raise InvalidSpecError("partial_sums must be nonempty")
        if self.terms_used < 0:
            raise InvalidSpecError("terms_used must be nonnegative")
        if self.tail_estimate < 0:
            raise InvalidSpecError("tail_estimate must be nonnegative")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of comparing one numerical route against the analytic value."""

    rule_id: str
    analytic: float
    numeric: float
    abs_err: float
    rel_err: float
    trace: object | None
    passed: bool


def make_report(
    rule_id: str,
    analytic: float,
    numeric: float,
    trace: object | None = None,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Build a VerificationReport with the standard error arithmetic.

    abs_err = |analytic - numeric|; rel_err divides by
    max(|analytic|, floor) so exact zeros cannot blow up the ratio;
    passed means rel_err <= tol.
    """
    abs_err = abs(analytic - numeric)
    rel_err = abs_err / max(abs(analytic), REL_ERR_FLOOR)
    return VerificationReport(
        rule_id=rule_id,
        analytic=analytic,
        numeric=numeric,
        abs_err=abs_err,
        rel_err=rel_err,
        trace=trace,
        passed=rel_err <= tol,
    )


def checkpoint_indices(n: int) -> Sequence[int]:
    """1-based geometric checkpoint schedule 1, 2, 4, ... capped at n."""
    out = []
    i = 1
    while i < n:
        out.append(i)
        i *= 2
    out.append(n)
    return out

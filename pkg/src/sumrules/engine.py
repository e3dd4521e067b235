"""Dual-route sum-rule verification.

Every rule is checked along two independent numerical routes and both
are compared against the analytic right-hand side:

  closed   lattice sums collapsed through cotangent identities (box) or
           half-line moments and contour residues (delta well)
  brute    direct truncated summation with a tail correction (box) or
           adaptive quadrature of the defining integral (delta well)

`verify` returns one report per route; a rule only passes if both do.
The two routes share nothing past the matrix elements, which is the
point: agreement is evidence the algebra and the numerics are each
right, disagreement raises or flags instead of averaging away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from . import delta, isw, quadrature, residue, series
from .core import (
    DEFAULT_TOL,
    InconsistencyError,
    InvalidSpecError,
    ModelKind,
    TruncationTrace,
    VerificationReport,
    make_report,
)
from .quadrature import QuadratureResult
from .series import Parity

_PI = math.pi

# Residue and quadrature evaluate the same Bethe component integrals;
# they must agree even when the rule itself is being stressed.
_CROSS_CHECK_TOL = 1e-8


class Operator(Enum):
    X = "x"
    X2 = "x2"
    EXP_IQX = "exp_iqx"


_RULE_NAMES = {
    (Operator.X, 0): "closure",
    (Operator.X, 1): "trk",
    (Operator.X2, 1): "monopole",
    (Operator.EXP_IQX, 1): "bethe",
}


@dataclass(frozen=True)
class SumRuleSpec:
    """One rule: sum of (E_k - E_n)^power |<n|op|k>|^2 over final states.

    power 0 with X is plain closure; power 1 gives the energy-weighted
    rules (TRK for X, monopole for X^2, Bethe for exp(iqx)).  `n` is the
    box quantum number and is ignored by the delta well, whose initial
    state is always the single bound level.  `q` is required by and only
    by EXP_IQX.
    """

    operator: Operator
    power: int = 1
    n: int = 1
    q: float | None = None

    def __post_init__(self) -> None:
        if (self.operator, self.power) not in _RULE_NAMES:
            raise InvalidSpecError(
                f"unsupported rule: operator={self.operator}, power={self.power}"
            )
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise InvalidSpecError(f"n must be an integer, got {self.n!r}")
        if self.n < 1:
            raise InvalidSpecError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.operator is Operator.EXP_IQX:
            if self.q is None:
                raise InvalidSpecError("EXP_IQX needs a momentum transfer q")
            q = float(self.q)
            if not math.isfinite(q) or q <= 0.0:
                raise InvalidSpecError(f"q must be finite and > 0, got {self.q!r}")
            object.__setattr__(self, "q", q)
        elif self.q is not None:
            raise InvalidSpecError("q is only meaningful for EXP_IQX")

    @property
    def rule_name(self) -> str:
        return _RULE_NAMES[(self.operator, self.power)]


@dataclass(frozen=True)
class RuleVerification:
    """Both routes for one rule, plus the analytic target they chase."""

    rule_id: str
    model: ModelKind
    params: Mapping[str, float]
    analytic: float
    closed: VerificationReport
    brute: VerificationReport
    passed: bool


@dataclass(frozen=True)
class BetheComponents:
    """Parity-resolved pieces of the Bethe sum at one q.

    closed entries come from the rational closed forms, residue entries
    from the contour engine, quadrature entries from adaptive
    integration of the matrix elements.  The three must agree; the
    constructor is dumb storage, `bethe_components` does the checking.
    """

    q: float
    odd_closed: float
    even_closed: float
    odd_residue: float
    even_residue: float
    odd_quadrature: float
    even_quadrature: float
    odd_trace: QuadratureResult
    even_trace: QuadratureResult

    @property
    def total_closed(self) -> float:
        return self.odd_closed + self.even_closed

    @property
    def total_residue(self) -> float:
        return self.odd_residue + self.even_residue

    @property
    def total_quadrature(self) -> float:
        return self.odd_quadrature + self.even_quadrature


def half_line_moment(w: int, p: int) -> float:
    """Exact integral of k^(2w) / (1 + k^2)^p over [0, inf).

    Equals Gamma(w + 1/2) Gamma(p - w - 1/2) / (2 Gamma(p)); needs
    p > w + 1/2 for convergence.
    """
    if w < 0 or p < 1:
        raise InvalidSpecError(f"need w >= 0 and p >= 1, got w={w}, p={p}")
    if 2 * p <= 2 * w + 1:
        raise InvalidSpecError(f"moment diverges for w={w}, p={p}")
    return math.gamma(w + 0.5) * math.gamma(p - w - 0.5) / (2.0 * math.gamma(p))


def analytic_rhs(spec: SumRuleSpec, model: ModelKind) -> float:
    """Right-hand side of the rule in reduced units."""
    rule = spec.rule_name
    if model is ModelKind.ISW:
        if rule == "closure":
            return isw.x2_me(spec.n, spec.n)
        if rule == "trk":
            return 0.5
        if rule == "monopole":
            return 2.0 * isw.x2_me(spec.n, spec.n)
        raise InvalidSpecError("the box has no Bethe rule here; use the delta well")
    if rule == "closure":
        return 0.5
    if rule == "trk":
        return 0.5
    if rule == "monopole":
        return 1.0
    return 0.5 * spec.q * spec.q


def bethe_component_closed(parity: Parity, q: float) -> float:
    """Rational closed form of one parity channel of the Bethe sum.

    odd:  (q^2/2) (1 + q^2/2) / (1 + q^2)
    even: (q^2/2) (q^2/2) / (1 + q^2)

    The channels sum to q^2/2 identically.
    """
    q = float(q)
    if not math.isfinite(q) or q <= 0.0:
        raise InvalidSpecError(f"q must be finite and > 0, got {q!r}")
    half_q2 = 0.5 * q * q
    if parity is Parity.ODD:
        return half_q2 * (1.0 + half_q2) / (1.0 + q * q)
    if parity is Parity.EVEN:
        return half_q2 * half_q2 / (1.0 + q * q)
    raise InvalidSpecError("Bethe components are even or odd")


def _bethe_residue_component(parity: Parity, q: float) -> float:
    full_line = residue.contour_integral_uhp(
        residue.build_bethe_integrand(parity, q, 1.0)
    )
    prefactor = 4.0 * q * q / _PI if parity is Parity.ODD else 4.0 * q**4 / _PI
    return prefactor * full_line


def _bethe_quadrature_component(
    parity: Parity, q: float, tol: float
) -> QuadratureResult:
    def integrand(k):
        me = delta.bethe_me(parity, q, k)
        return 0.5 * (k * k + 1.0) * me * me

    return quadrature.integrate_semi_inf(integrand, scale=max(1.0, q), tol=tol)


def bethe_components(q: float, tol: float = DEFAULT_TOL) -> BetheComponents:
    """Evaluate both Bethe channels three ways and cross-check them.

    Raises InconsistencyError if residue and quadrature values for the
    same channel drift apart by more than an internal guard tolerance;
    that can only mean a bug, not a hard integral.
    """
    values = {}
    traces = {}
    for parity in (Parity.ODD, Parity.EVEN):
        res = _bethe_residue_component(parity, q)
        quad = _bethe_quadrature_component(parity, q, tol)
        dev = abs(res - quad.value) / max(abs(res), 1e-300)
        if dev > _CROSS_CHECK_TOL:
            raise InconsistencyError(
                f"Bethe {parity.value} channel at q={q}: residue {res!r} vs "
                f"quadrature {quad.value!r} (rel dev {dev:.3e})"
            )
        values[parity] = (bethe_component_closed(parity, q), res, quad.value)
        traces[parity] = quad
    return BetheComponents(
        q=q,
        odd_closed=values[Parity.ODD][0],
        even_closed=values[Parity.EVEN][0],
        odd_residue=values[Parity.ODD][1],
        even_residue=values[Parity.EVEN][1],
        odd_quadrature=values[Parity.ODD][2],
        even_quadrature=values[Parity.EVEN][2],
        odd_trace=traces[Parity.ODD],
        even_trace=traces[Parity.EVEN],
    )


def _opposite_parity(n: int) -> Parity:
    return Parity.EVEN if n % 2 else Parity.ODD


@dataclass(frozen=True)
class RulePaths:
    """Left-hand side of one rule along both numerical routes.

    `closed` is the route through identities (cotangent chains or exact
    moments and residues), `brute` the direct truncated sum or adaptive
    quadrature, with its trace.  For the Bethe rule `components` holds
    the parity-resolved values from all three evaluators; it is None
    for every other rule.
    """

    closed: float
    brute: float
    trace: TruncationTrace | QuadratureResult
    components: BetheComponents | None = None


def lhs_isw(
    spec: SumRuleSpec,
    n: int | None = None,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> RulePaths:
    """Box-rule left side along both routes, diagonal terms included.

    `n` overrides the state carried by `spec` when given; the default
    uses spec.n.  X and X2 rules only.
    """
    if spec.operator is Operator.EXP_IQX:
        raise InvalidSpecError("the box has no Bethe rule here; use the delta well")
    if n is not None and n != spec.n:
        spec = SumRuleSpec(spec.operator, spec.power, n, spec.q)
    n = spec.n
    rule = spec.rule_name
    opp = _opposite_parity(n)
    if rule == "closure":
        prefactor = 64.0 * n * n / _PI**4
        closed = 0.25 + prefactor * series.weighted_k2_sum(4, n)
        trace = series.brute_sum(
            4, n, parity=opp, weight_k2=True, tol=tol, max_terms=max_terms
        )
        return RulePaths(closed, 0.25 + prefactor * trace.value, trace)
    if rule == "trk":
        prefactor = 32.0 * n * n / _PI**2
        closed = prefactor * series.weighted_k2_sum(3, n)
        trace = series.brute_sum(
            3, n, parity=opp, weight_k2=True, tol=tol, max_terms=max_terms
        )
        return RulePaths(closed, prefactor * trace.value, trace)
    # monopole: x^2 couples to every k, so the sum runs over the full
    # lattice with the k = n term struck out.
    prefactor = 32.0 * n * n / _PI**2
    closed = prefactor * series.removed_term_limit_closed(n)
    trace = series.brute_sum(
        3, n, parity=Parity.ALL, weight_k2=True, exclude=n,
        tol=tol, max_terms=max_terms,
    )
    return RulePaths(closed, prefactor * trace.value, trace)


def lhs_delta(spec: SumRuleSpec, tol: float = DEFAULT_TOL) -> RulePaths:
    """Delta-well left side: exact moments/residues vs quadrature.

    The initial state is always the single bound level.  For the Bethe
    rule the closed route is the residue total and `components` carries
    the parity split from all three evaluators.
    """
    rule = spec.rule_name
    if rule == "closure":
        closed = (16.0 / _PI) * half_line_moment(1, 4)
        result = quadrature.integrate_semi_inf(
            lambda k: delta.x_me_bound(k) ** 2, tol=tol
        )
        return RulePaths(closed, result.value, result)
    if rule == "trk":
        closed = (8.0 / _PI) * half_line_moment(1, 3)
        result = quadrature.integrate_semi_inf(
            lambda k: delta.energy_gap(k) * delta.x_me_bound(k) ** 2, tol=tol
        )
        return RulePaths(closed, result.value, result)
    if rule == "monopole":
        closed = (32.0 / _PI) * half_line_moment(1, 4)
        result = quadrature.integrate_semi_inf(
            lambda k: delta.energy_gap(k) * delta.x2_me_bound(k) ** 2, tol=tol
        )
        return RulePaths(closed, result.value, result)
    parts = bethe_components(spec.q, tol=tol)
    trace = QuadratureResult(
        value=parts.total_quadrature,
        est_error=parts.odd_trace.est_error + parts.even_trace.est_error,
        evaluations=parts.odd_trace.evaluations + parts.even_trace.evaluations,
        converged=parts.odd_trace.converged and parts.even_trace.converged,
    )
    return RulePaths(parts.total_residue, parts.total_quadrature, trace, parts)


def isw_brute_trace(
    spec: SumRuleSpec,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> TruncationTrace:
    """Raw lattice-sum trace behind the brute route of one box rule.

    The partial sums are in lattice units, before the rule's matrix
    element prefactor (and any diagonal term) is applied.
    """
    return lhs_isw(spec, tol=tol, max_terms=max_terms).trace


def verify(
    spec: SumRuleSpec,
    model: ModelKind,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> RuleVerification:
    """Check one rule along both routes against its analytic value."""
    if not isinstance(model, ModelKind):
        raise InvalidSpecError(f"model must be a ModelKind, got {model!r}")
    analytic = analytic_rhs(spec, model)
    if model is ModelKind.ISW:
        paths = lhs_isw(spec, tol=tol, max_terms=max_terms)
        params: dict[str, float] = {"n": spec.n}
    else:
        paths = lhs_delta(spec, tol=tol)
        params = {"q": spec.q} if spec.operator is Operator.EXP_IQX else {}
    rule_id = f"{model.value}.{spec.rule_name}"
    closed_report = make_report(rule_id + ".closed", analytic, paths.closed, None, tol)
    brute_report = make_report(
        rule_id + ".brute", analytic, paths.brute, paths.trace, tol
    )
    return RuleVerification(
        rule_id=rule_id,
        model=model,
        params=params,
        analytic=analytic,
        closed=closed_report,
        brute=brute_report,
        passed=closed_report.passed and brute_report.passed,
    )


@dataclass(frozen=True)
class OscillatorStrengthTable:
    """Oscillator strengths f_{n,k} and their (partial) sum.

    For the box `entries` holds (k, f_nk) pairs for final states of
    opposite parity out to the cutoff (the others vanish) and `sum` is
    their truncated total.  For the delta well the strengths form a
    continuum, so `entries` is empty and `sum` carries the integral of
    the density over k instead.  Either way `tail_bound` is an upper
    bound on what the truncation or quadrature can still be missing,
    so sum + tail_bound brackets the f-sum value 1 from above.
    """

    entries: tuple[tuple[float, float], ...]
    sum: float
    tail_bound: float
    n: int = 1


def oscillator_strengths(
    model: ModelKind, n: int = 1, k_max: int = 10_000
) -> OscillatorStrengthTable:
    """Oscillator strengths f_{n,k} = 2 (E_k - E_n) |<n|x|k>|^2.

    The delta well has a single bound state, so its table is the
    continuum version: `n` is ignored and `k_max` only in that it must
    still be sensible.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise InvalidSpecError(f"n must be an integer >= 1, got {n!r}")
    if k_max <= n + 1:
        raise InvalidSpecError(f"k_max must exceed n + 1, got {k_max}")
    if model is ModelKind.DELTA:
        result = quadrature.integrate_semi_inf(delta.oscillator_strength_density)
        return OscillatorStrengthTable(
            entries=(), sum=result.value, tail_bound=result.est_error, n=1
        )
    if model is not ModelKind.ISW:
        raise InvalidSpecError(f"model must be a ModelKind, got {model!r}")
    start = 2 if n % 2 else 1
    k = np.arange(start, k_max + 1, 2, dtype=float)
    f = (64.0 * n * n / _PI**2) * k * k / (k * k - float(n * n)) ** 3
    # f ~ (64 n^2/pi^2) k^-4: bound the tail by the integral from the
    # cutoff, inflated by the worst (1 - n^2/k^2)^-3 factor.
    edge = float(k[-1]) + 1.0
    tail = (64.0 * n * n / _PI**2) / (3.0 * edge**3) / (1.0 - n * n / edge**2) ** 3
    return OscillatorStrengthTable(
        entries=tuple((float(kv), float(fv)) for kv, fv in zip(k, f)),
        sum=math.fsum(f),
        tail_bound=tail,
        n=int(n),
    )


def oscillator_strength_integral(tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Continuum f-sum for the delta well; the integral equals 1."""
    return quadrature.integrate_semi_inf(delta.oscillator_strength_density, tol=tol)


@dataclass(frozen=True)
class StarkVerification:
    """Second-order Stark shift along both routes."""

    rule_id: str
    model: ModelKind
    params: Mapping[str, float]
    analytic: float
    closed: VerificationReport
    brute: VerificationReport
    passed: bool


def stark_verify(
    model: ModelKind,
    n_or_bound: int | str | None = None,
    F: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_terms: int | None = None,
) -> StarkVerification:
    """Compare the closed-form second-order shift with the summed one.

    `n_or_bound` names the unperturbed state: a quantum number for the
    box (default 1), and None or "bound" for the delta well, whose only
    discrete state is the bound level.  For the box the summation route
    is the k^2-weighted p = 5 lattice sum, evaluated once through the
    cotangent chain and once by brute truncation.  For the delta well
    the perturbation integral is done exactly (half-line moment) and by
    adaptive quadrature.
    """
    F = float(F)
    if not math.isfinite(F):
        raise InvalidSpecError(f"field strength must be finite, got {F!r}")
    if model is ModelKind.ISW:
        n = 1 if n_or_bound is None else n_or_bound
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise InvalidSpecError(f"box state must be an integer >= 1, got {n!r}")
        n = int(n)
        analytic = isw.stark_shift2(n, F)
        closed = isw.stark_shift2_series(n, F)
        trace = series.brute_sum(
            5, n, parity=_opposite_parity(n), weight_k2=True,
            tol=tol, max_terms=max_terms,
        )
        brute = -F * F * 2.0 * (8.0 * n / _PI**2) ** 2 * trace.value
        params: dict[str, float] = {"n": n, "F": F}
        rule_id = "isw.stark2"
    elif model is ModelKind.DELTA:
        if n_or_bound not in (None, "bound"):
            raise InvalidSpecError(
                f"the delta well has one bound state; got state {n_or_bound!r}"
            )
        analytic = delta.stark_shift2_delta(F)
        closed = -F * F * 2.0 * (16.0 / _PI) * half_line_moment(1, 5)
        result = quadrature.integrate_semi_inf(
            lambda k: delta.x_me_bound(k) ** 2 / delta.energy_gap(k), tol=tol
        )
        trace = result
        brute = -F * F * result.value
        params = {"F": F}
        rule_id = "delta.stark2"
    else:
        raise InvalidSpecError(f"model must be a ModelKind, got {model!r}")
    closed_report = make_report(rule_id + ".closed", analytic, closed, None, tol)
    brute_report = make_report(rule_id + ".brute", analytic, brute, trace, tol)
    return StarkVerification(
        rule_id=rule_id,
        model=model,
        params=params,
        analytic=analytic,
        closed=closed_report,
        brute=brute_report,
        passed=closed_report.passed and brute_report.passed,
    )

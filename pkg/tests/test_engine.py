"""The dual-route verification engine across every supported rule."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumrules import engine, isw
from sumrules.core import InconsistencyError, InvalidSpecError, ModelKind
from sumrules.engine import (
    Operator,
    SumRuleSpec,
    analytic_rhs,
    bethe_component_closed,
    bethe_components,
    half_line_moment,
    lhs_delta,
    lhs_isw,
    oscillator_strength_integral,
    oscillator_strengths,
    stark_verify,
    verify,
)
from sumrules.quadrature import QuadratureResult
from sumrules.series import Parity

PI = math.pi

CLOSURE = SumRuleSpec(Operator.X, 0)
TRK = SumRuleSpec(Operator.X, 1)
MONOPOLE = SumRuleSpec(Operator.X2, 1)

# raw lattice tail estimates scale into rule units through these
ISW_PREFACTOR = {
    "closure": lambda n: 64.0 * n * n / PI**4,
    "trk": lambda n: 32.0 * n * n / PI**2,
    "monopole": lambda n: 32.0 * n * n / PI**2,
}


def spec_for(rule, n=1, q=None):
    operator, power = {
        "closure": (Operator.X, 0),
        "trk": (Operator.X, 1),
        "monopole": (Operator.X2, 1),
        "bethe": (Operator.EXP_IQX, 1),
    }[rule]
    return SumRuleSpec(operator, power, n, q)


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.X2, 0)  # x^2 closure is out of scope
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.X, 2)
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.X, 1, 0)
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.EXP_IQX, 1)  # q missing
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.EXP_IQX, 1, 1, -2.0)
    with pytest.raises(InvalidSpecError):
        SumRuleSpec(Operator.X, 1, 1, 1.0)  # q meaningless for X
    assert SumRuleSpec(Operator.EXP_IQX, 1, 1, 2.0).rule_name == "bethe"


def test_analytic_rhs_values():
    assert analytic_rhs(CLOSURE, ModelKind.ISW) == pytest.approx(
        1.0 / 3.0 - 1.0 / (2.0 * PI**2), rel=1e-15
    )
    assert analytic_rhs(TRK, ModelKind.ISW) == 0.5
    assert analytic_rhs(MONOPOLE, ModelKind.ISW) == pytest.approx(
        2.0 * (1.0 / 3.0 - 1.0 / (2.0 * PI**2)), rel=1e-15
    )
    assert analytic_rhs(CLOSURE, ModelKind.DELTA) == 0.5
    assert analytic_rhs(TRK, ModelKind.DELTA) == 0.5
    assert analytic_rhs(MONOPOLE, ModelKind.DELTA) == 1.0
    bethe = spec_for("bethe", q=2.0)
    assert analytic_rhs(bethe, ModelKind.DELTA) == 2.0
    with pytest.raises(InvalidSpecError):
        analytic_rhs(bethe, ModelKind.ISW)


def test_half_line_moment_frozen_values():
    assert half_line_moment(1, 3) == pytest.approx(PI / 16.0, rel=1e-15)
    assert half_line_moment(1, 4) == pytest.approx(PI / 32.0, rel=1e-15)
    assert half_line_moment(1, 5) == pytest.approx(5.0 * PI / 256.0, rel=1e-15)
    assert half_line_moment(0, 1) == pytest.approx(PI / 2.0, rel=1e-15)
    with pytest.raises(InvalidSpecError):
        half_line_moment(1, 1)  # divergent
    with pytest.raises(InvalidSpecError):
        half_line_moment(-1, 3)


def test_lhs_isw_examples():
    paths = lhs_isw(CLOSURE, n=1)
    assert paths.closed == pytest.approx(1.0 / 3.0 - 1.0 / (2.0 * PI**2), rel=1e-14)
    paths = lhs_isw(TRK, n=2)
    assert paths.closed == pytest.approx(0.5, rel=1e-14)
    paths = lhs_isw(MONOPOLE, n=1)
    assert paths.closed == pytest.approx(
        2.0 * (1.0 / 3.0 - 1.0 / (2.0 * PI**2)), rel=1e-13
    )
    assert paths.components is None


def test_lhs_isw_state_override():
    by_spec = lhs_isw(spec_for("trk", n=4))
    by_override = lhs_isw(TRK, n=4)
    assert by_override.closed == by_spec.closed
    assert by_override.brute == by_spec.brute


def test_lhs_isw_rejects_bethe():
    with pytest.raises(InvalidSpecError):
        lhs_isw(spec_for("bethe", q=1.0))


def test_lhs_delta_examples():
    assert lhs_delta(CLOSURE).closed == pytest.approx(0.5, rel=1e-14)
    assert lhs_delta(MONOPOLE).brute == pytest.approx(1.0, rel=1e-11)
    paths = lhs_delta(spec_for("bethe", q=1.0))
    assert paths.components is not None
    assert paths.components.odd_closed == pytest.approx(0.375, rel=1e-13)
    assert paths.components.even_closed == pytest.approx(0.125, rel=1e-13)
    assert paths.closed == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("rule", ["closure", "trk", "monopole"])
@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_isw_saturation(rule, n):
    """Closed path hits the analytic value at 1e-12; the brute path
    lands within its own (rescaled) tail estimate."""
    spec = spec_for(rule, n=n)
    report = verify(spec, ModelKind.ISW, tol=1e-9)
    assert report.passed
    assert report.closed.rel_err < 1e-12
    scaled_tail = ISW_PREFACTOR[rule](n) * report.brute.trace.tail_estimate
    assert report.brute.abs_err <= scaled_tail + 1e-13 * abs(report.analytic)


@pytest.mark.parametrize("rule", ["closure", "trk", "monopole"])
def test_delta_saturation(rule):
    report = verify(spec_for(rule), ModelKind.DELTA, tol=1e-9)
    assert report.passed
    assert report.closed.rel_err < 1e-12
    assert report.brute.abs_err <= report.brute.trace.est_error + 1e-13


def test_verify_report_structure():
    report = verify(spec_for("trk", n=3), ModelKind.ISW)
    assert report.rule_id == "isw.trk"
    assert report.params == {"n": 3}
    assert report.closed.rule_id == "isw.trk.closed"
    assert report.brute.rule_id == "isw.trk.brute"
    assert report.analytic == 0.5
    bethe = verify(spec_for("bethe", q=2.0), ModelKind.DELTA)
    assert bethe.rule_id == "delta.bethe"
    assert bethe.params == {"q": 2.0}
    with pytest.raises(InvalidSpecError):
        verify(TRK, "isw")


def test_verify_forced_failure():
    report = verify(spec_for("trk"), ModelKind.ISW, tol=1e-30, max_terms=50)
    assert not report.passed


@pytest.mark.parametrize("q", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
def test_bethe_split(q):
    parts = bethe_components(q)
    target = 0.5 * q * q
    # closed channel split is exact algebra
    assert parts.total_closed == pytest.approx(target, rel=1e-12)
    assert parts.total_residue == pytest.approx(target, rel=1e-9)
    assert parts.total_quadrature == pytest.approx(target, rel=1e-9)
    # channels individually match their closed forms
    assert parts.odd_residue == pytest.approx(parts.odd_closed, rel=1e-9)
    assert parts.even_residue == pytest.approx(parts.even_closed, rel=1e-9)
    assert parts.odd_quadrature == pytest.approx(parts.odd_closed, rel=1e-9)
    assert parts.even_quadrature == pytest.approx(parts.even_closed, rel=1e-9)


def test_bethe_small_q_limits():
    """B_o exhausts the rule and B_e dies out as q -> 0."""
    q = 1e-3
    target = 0.5 * q * q
    assert bethe_component_closed(Parity.ODD, q) / target == pytest.approx(
        1.0, abs=1e-5
    )
    assert bethe_component_closed(Parity.EVEN, q) / target == pytest.approx(
        0.0, abs=1e-5
    )
    parts = bethe_components(q)
    assert parts.odd_residue / target == pytest.approx(1.0, abs=1e-5)
    assert parts.even_residue / target == pytest.approx(0.0, abs=1e-5)


def test_bethe_cross_check_guard(monkeypatch):
    """A corrupted quadrature value must raise, not average away."""
    real = engine.quadrature.integrate_semi_inf

    def corrupted(f, **kwargs):
        result = real(f, **kwargs)
        return QuadratureResult(
            result.value * 1.001, result.est_error, result.evaluations,
            result.converged,
        )

    monkeypatch.setattr(engine.quadrature, "integrate_semi_inf", corrupted)
    with pytest.raises(InconsistencyError):
        bethe_components(1.0)


def test_diagonal_handling():
    """Closure carries the k = n term; energy-weighted rules do not
    care whether it is included because the gap factor kills it."""
    n = 2
    direct = sum(isw.x_me(n, k) ** 2 for k in range(1, 400))
    assert direct == pytest.approx(analytic_rhs(spec_for("closure", n=n), ModelKind.ISW), rel=1e-9)
    # strip the diagonal and the sum falls short by exactly (1/2)^2
    assert direct - isw.x_me(n, n) ** 2 == pytest.approx(direct - 0.25, rel=1e-12)
    # the k = n contribution to TRK/monopole is identically zero
    assert (isw.energy(n) - isw.energy(n)) * isw.x2_me(n, n) ** 2 == 0.0


def test_oscillator_strengths_isw():
    table = oscillator_strengths(ModelKind.ISW, 1, 10_000)
    assert table.n == 1
    k2, f12 = table.entries[0]
    assert k2 == 2.0
    assert f12 == pytest.approx(256.0 / (27.0 * PI**2), rel=1e-14)
    assert table.sum == pytest.approx(math.fsum(f for _, f in table.entries), rel=1e-14)
    assert table.sum < 1.0
    assert 1.0 - table.sum <= table.tail_bound


def test_oscillator_strengths_monotone_after_n():
    """All terms with k > n are positive, so partial sums only grow;
    negative strengths occur only for k < n."""
    table = oscillator_strengths(ModelKind.ISW, 4, 2000)
    below = [f for k, f in table.entries if k < 4]
    above = [f for k, f in table.entries if k > 4]
    assert all(f < 0 for f in below)
    assert all(f > 0 for f in above)
    partial = 0.0
    partials = []
    for _, f in table.entries:
        partial += f
        partials.append(partial)
    tail = [p for (k, _), p in zip(table.entries, partials) if k > 4]
    assert all(a < b for a, b in zip(tail, tail[1:]))


def test_oscillator_strengths_delta():
    table = oscillator_strengths(ModelKind.DELTA)
    assert table.entries == ()
    assert table.sum == pytest.approx(1.0, rel=1e-9)
    integral = oscillator_strength_integral(tol=1e-12)
    assert integral.value == pytest.approx(1.0, rel=1e-12)


def test_oscillator_strengths_validation():
    with pytest.raises(InvalidSpecError):
        oscillator_strengths(ModelKind.ISW, 0)
    with pytest.raises(InvalidSpecError):
        oscillator_strengths(ModelKind.ISW, 5, 6)
    with pytest.raises(InvalidSpecError):
        oscillator_strengths("isw", 1)


def test_stark_verify_isw():
    report = stark_verify(ModelKind.ISW, 1, 1.0)
    assert report.passed
    assert report.analytic == pytest.approx(-(15.0 - PI**2) / (24.0 * PI**2), rel=1e-14)
    assert report.closed.rel_err < 1e-12
    assert report.brute.rel_err < 1e-10
    assert report.rule_id == "isw.stark2"
    assert report.params == {"n": 1, "F": 1.0}


def test_stark_verify_isw_sign_flip():
    assert stark_verify(ModelKind.ISW, 1, 2.0).analytic < 0
    for n in range(2, 7):
        assert stark_verify(ModelKind.ISW, n, 2.0).analytic > 0


def test_stark_verify_delta():
    for state in (None, "bound"):
        report = stark_verify(ModelKind.DELTA, state, 1.0)
        assert report.passed
        assert report.analytic == -0.625
        assert report.closed.rel_err < 1e-12
        assert report.brute.rel_err < 1e-10
    assert stark_verify(ModelKind.DELTA, F=2.0).analytic == -2.5


@settings(max_examples=20, deadline=None)
@given(F=st.floats(0.01, 50.0), sign=st.sampled_from([-1.0, 1.0]))
def test_ground_state_stark_negativity(F, sign):
    assert isw.stark_shift2(1, sign * F) < 0
    assert stark_verify(ModelKind.DELTA, F=sign * F).analytic < 0


def test_stark_verify_validation():
    with pytest.raises(InvalidSpecError):
        stark_verify(ModelKind.ISW, 0, 1.0)
    with pytest.raises(InvalidSpecError):
        stark_verify(ModelKind.ISW, "bound", 1.0)
    with pytest.raises(InvalidSpecError):
        stark_verify(ModelKind.DELTA, 3, 1.0)
    with pytest.raises(InvalidSpecError):
        stark_verify(ModelKind.ISW, 1, math.inf)
    with pytest.raises(InvalidSpecError):
        stark_verify("delta")

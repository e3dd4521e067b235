"""Unit reduction, report arithmetic, and the shared record types."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumrules.core import (
    DEFAULT_MAX_TERMS,
    InvalidSpecError,
    KMAX_ENV_VAR,
    ModelKind,
    ModelSpec,
    TruncationTrace,
    UnitScales,
    checkpoint_indices,
    default_max_terms,
    make_report,
    to_reduced,
)

positive = st.floats(min_value=1e-3, max_value=1e3)


def test_isw_identity_scaling():
    red = to_reduced(ModelSpec(ModelKind.ISW, isw_width=1.0))
    assert red.energy_unit == 1.0
    assert red.length_unit == 1.0
    # reduced ground state energy pi^2/2 maps back to itself
    assert red.to_dimensional_energy(math.pi**2 / 2) == math.pi**2 / 2


def test_isw_width_two():
    red = to_reduced(ModelSpec(ModelKind.ISW, isw_width=2.0))
    assert red.length_unit == 2.0
    assert red.energy_unit == 0.25
    assert red.to_dimensional_energy(math.pi**2 / 2) == pytest.approx(math.pi**2 / 8)


def test_delta_kappa_three():
    red = to_reduced(ModelSpec(ModelKind.DELTA, kappa0=3.0))
    assert red.length_unit == pytest.approx(1.0 / 3.0)
    assert red.energy_unit == pytest.approx(9.0)
    assert red.to_dimensional_energy(-0.5) == pytest.approx(-4.5)


def test_delta_derived_accessors():
    spec = ModelSpec(ModelKind.DELTA, kappa0=2.0, scales=UnitScales(hbar=3.0, mass=4.0))
    assert spec.coupling == pytest.approx(9.0 * 2.0 / 4.0)
    assert spec.bound_length == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(a=positive, hbar=positive, mass=positive, n=st.integers(1, 12))
def test_isw_round_trip(a, hbar, mass, n):
    """Re-dimensionalized energies match the dimensional formula."""
    spec = ModelSpec(ModelKind.ISW, isw_width=a, scales=UnitScales(hbar, mass))
    red = to_reduced(spec)
    e_red = 0.5 * (n * math.pi) ** 2
    e_dim = hbar**2 * n**2 * math.pi**2 / (2 * mass * a**2)
    assert red.to_dimensional_energy(e_red) == pytest.approx(e_dim, rel=1e-14)
    assert red.to_dimensional_length(0.5) == pytest.approx(a / 2, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(kappa0=positive, hbar=positive, mass=positive)
def test_delta_round_trip(kappa0, hbar, mass):
    spec = ModelSpec(ModelKind.DELTA, kappa0=kappa0, scales=UnitScales(hbar, mass))
    red = to_reduced(spec)
    e_dim = -(hbar**2) * kappa0**2 / (2 * mass)
    assert red.to_dimensional_energy(-0.5) == pytest.approx(e_dim, rel=1e-14)


@pytest.mark.parametrize("width", [0.0, -1.0, math.inf, math.nan, None])
def test_isw_rejects_bad_width(width):
    with pytest.raises(InvalidSpecError):
        ModelSpec(ModelKind.ISW, isw_width=width)


@pytest.mark.parametrize("kappa0", [0.0, -2.0, math.inf, math.nan, None])
def test_delta_rejects_bad_kappa(kappa0):
    with pytest.raises(InvalidSpecError):
        ModelSpec(ModelKind.DELTA, kappa0=kappa0)


def test_cross_parameters_rejected():
    with pytest.raises(InvalidSpecError):
        ModelSpec(ModelKind.ISW, isw_width=1.0, kappa0=1.0)
    with pytest.raises(InvalidSpecError):
        ModelSpec(ModelKind.DELTA, kappa0=1.0, isw_width=1.0)


@pytest.mark.parametrize("hbar,mass", [(0.0, 1.0), (1.0, -1.0), (math.nan, 1.0)])
def test_scales_reject_nonpositive(hbar, mass):
    with pytest.raises(InvalidSpecError):
        UnitScales(hbar=hbar, mass=mass)


@settings(max_examples=50, deadline=None)
@given(
    analytic=st.floats(-1e6, 1e6, allow_nan=False),
    numeric=st.floats(-1e6, 1e6, allow_nan=False),
)
def test_report_arithmetic_recomputable(analytic, numeric):
    rep = make_report("prop", analytic, numeric, tol=1e-9)
    assert rep.abs_err == abs(analytic - numeric)
    assert rep.rel_err == rep.abs_err / max(abs(analytic), 1e-300)
    assert rep.passed == (rep.rel_err <= 1e-9)


def test_report_zero_analytic_does_not_divide_by_zero():
    rep = make_report("zero", 0.0, 1e-12)
    assert math.isfinite(rep.rel_err)
    assert not rep.passed


def test_truncation_trace_validation():
    with pytest.raises(InvalidSpecError):
        TruncationTrace(0.0, (), 0, 0.0, 0.0, True)
    with pytest.raises(InvalidSpecError):
        TruncationTrace(0.0, (0.0,), -1, 0.0, 0.0, True)
    with pytest.raises(InvalidSpecError):
        TruncationTrace(0.0, (0.0,), 1, 0.0, -1.0, True)


def test_checkpoint_indices_schedule():
    assert list(checkpoint_indices(1)) == [1]
    assert list(checkpoint_indices(7)) == [1, 2, 4, 7]
    assert list(checkpoint_indices(8)) == [1, 2, 4, 8]
    idx = checkpoint_indices(100)
    assert idx[-1] == 100
    assert all(a < b for a, b in zip(idx, idx[1:]))


def test_kmax_env_override(monkeypatch):
    monkeypatch.delenv(KMAX_ENV_VAR, raising=False)
    assert default_max_terms() == DEFAULT_MAX_TERMS
    monkeypatch.setenv(KMAX_ENV_VAR, "5000")
    assert default_max_terms() == 5000
    monkeypatch.setenv(KMAX_ENV_VAR, "zero")
    with pytest.raises(InvalidSpecError):
        default_max_terms()
    monkeypatch.setenv(KMAX_ENV_VAR, "-3")
    with pytest.raises(InvalidSpecError):
        default_max_terms()

"""Attractive delta well in reduced units: hbar = m = 1, kappa_0 = 1.

One bound state psi_0(x) = exp(-|x|) at E_0 = -1/2 plus a two-fold
continuum at E_k = k^2/2.  Odd scattering states never feel the well;
even ones pick up the 1/sqrt(1 + k^2) admixture.  All bound-continuum
matrix elements close in elementary form, e.g.

    <0|x|k, odd> = (4/sqrt(pi)) k / (1 + k^2)^2

so the sum rules turn into half-line integrals of rational functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidSpecError
from .series import Parity

_PI = math.pi


def _check_k(k: float) -> float:
    k = float(k)
    if not math.isfinite(k) or k <= 0.0:
        raise InvalidSpecError(f"continuum wavenumber must be > 0, got {k!r}")
    return k


def _check_q(q: float) -> float:
    q = float(q)
    if not math.isfinite(q) or q <= 0.0:
        raise InvalidSpecError(f"momentum transfer must be > 0, got {q!r}")
    return q


@dataclass(frozen=True)
class DeltaContinuumState:
    """One scattering state, labelled by wavenumber and parity."""

    k: float
    parity: Parity

    def __post_init__(self) -> None:
        _check_k(self.k)
        if self.parity is Parity.ALL:
            raise InvalidSpecError("continuum states are even or odd")

    def energy(self) -> float:
        return energy_continuum(self.k)

    def psi(self, x):
        return psi_continuum(self.parity, self.k, x)


def bound_energy() -> float:
    return -0.5


def psi_bound(x):
    """Normalized bound state exp(-|x|)."""
    x = np.asarray(x, dtype=float)
    value = np.exp(-np.abs(x))
    return float(value) if value.ndim == 0 else value


def energy_continuum(k):
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    value = 0.5 * k * k
    return float(value) if value.ndim == 0 else value


def energy_gap(k):
    """E_k - E_0 = (k^2 + 1)/2, the weight in every energy-weighted rule."""
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    value = 0.5 * (k * k + 1.0)
    return float(value) if value.ndim == 0 else value


def psi_continuum(parity: Parity, k: float, x):
    """Delta-normalized scattering state of the given parity.

    Odd: sin(kx)/sqrt(pi).  Even: (sin(k|x|) - k cos(kx)) / sqrt(pi (1+k^2)),
    which carries the kink at the origin that the well imposes.
    """
    k = _check_k(k)
    x = np.asarray(x, dtype=float)
    if parity is Parity.ODD:
        value = np.sin(k * x) / math.sqrt(_PI)
    elif parity is Parity.EVEN:
        value = (np.sin(k * np.abs(x)) - k * np.cos(k * x)) / math.sqrt(
            _PI * (1.0 + k * k)
        )
    else:
        raise InvalidSpecError("continuum states are even or odd")
    return float(value) if value.ndim == 0 else value


def x_me_bound(k):
    """<0|x|k, odd> = (4/sqrt(pi)) k/(1+k^2)^2; even states give zero."""
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    value = (4.0 / math.sqrt(_PI)) * k / (1.0 + k * k) ** 2
    return float(value) if value.ndim == 0 else value


def x2_me_bound(k):
    """<0|x^2|k, even> = 8k / (sqrt(pi (1+k^2)) (1+k^2)^2); odd give zero."""
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    value = 8.0 * k / (np.sqrt(_PI * (1.0 + k * k)) * (1.0 + k * k) ** 2)
    return float(value) if value.ndim == 0 else value


def bethe_me(parity: Parity, q: float, k):
    """<0|e^{iqx}|k> split by parity of the final state.

    With D = ((k+q)^2 + 1)((k-q)^2 + 1):

        odd:  sqrt(4/pi) * 2kq / D          (times i, dropped as phase)
        even: sqrt(4/(pi(1+k^2))) * (-2kq^2) / D
    """
    q = _check_q(q)
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    denom = ((k + q) ** 2 + 1.0) * ((k - q) ** 2 + 1.0)
    if parity is Parity.ODD:
        value = math.sqrt(4.0 / _PI) * 2.0 * k * q / denom
    elif parity is Parity.EVEN:
        value = np.sqrt(4.0 / (_PI * (1.0 + k * k))) * (-2.0 * k * q * q) / denom
    else:
        raise InvalidSpecError("continuum states are even or odd")
    return float(value) if value.ndim == 0 else value


def oscillator_strength_density(k):
    """df/dk = 2 (E_k - E_0) |<0|x|k>|^2 = (16/pi) k^2/(1+k^2)^3.

    Integrates to exactly 1 over the half line (the f-sum rule with a
    single bound state and no discrete excited spectrum).
    """
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0.0):
        raise InvalidSpecError("continuum wavenumber must be > 0")
    value = (16.0 / _PI) * k * k / (1.0 + k * k) ** 3
    return float(value) if value.ndim == 0 else value


def stark_shift2_delta(F: float) -> float:
    """Second-order shift of the bound level: -(5/8) F^2."""
    return -0.625 * F * F

"""Photon statistics of a numerical steady state.

Delayed correlations use the quantum regression theorem: the conditioned
operator ``X(0) = a rho_s a^+`` is propagated with the same Liouvillian and
``g2(tau) = Tr[a^+ a X(tau)] / nbar^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, UndefinedCorrelationError
from .hilbert import adjoint
from .liouville import Liouvillian, propagate

NBAR_FLOOR = 1e-14
IMAG_TOL = 1e-9
VIOLATION_TOL = 1e-6


@dataclass(frozen=True)
class G2Curve:
    tau: np.ndarray
    values: np.ndarray

    @property
    def g2_zero(self) -> float:
        return float(self.values[0])


def _mat(rho) -> np.ndarray:
    return getattr(rho, "matrix", rho)


def _real(z: complex, what: str, scale: float = 1.0) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(scale)):
        raise ConvergenceError(f"{what} has imaginary residue {z.imag:.3e}")
    return float(z.real)


def mean_photon(rho, a: np.ndarray) -> float:
    """Tr(rho a^+ a)."""
    rho = _mat(rho)
    return _real(np.trace(rho @ adjoint(a) @ a), "mean photon number")


def g2_zero(rho, a: np.ndarray) -> float:
    """<a^+ a^+ a a> / <a^+ a>^2."""
    rho = _mat(rho)
    n = mean_photon(rho, a)
    if n <= NBAR_FLOOR:
        raise UndefinedCorrelationError(f"mean photon number {n:.3e} too small for g2")
    ad = adjoint(a)
    pairs = _real(np.trace(rho @ ad @ ad @ a @ a), "pair correlation")
    return pairs / n**2


def g2_tau(l: Liouvillian, rho_s, a: np.ndarray, tau_grid: Sequence[float], method: str = "expm") -> G2Curve:
    rho_s = _mat(rho_s)
    n = mean_photon(rho_s, a)
    if n <= NBAR_FLOOR:
        raise UndefinedCorrelationError(f"mean photon number {n:.3e} too small for g2")
    ad = adjoint(a)
    number = ad @ a
    seed = a @ rho_s @ ad
    xs = propagate(l, seed, tau_grid, method=method)
    # Tr[N X] as an elementwise product: N^T is the pairing with column-stacked X
    vals = np.array([np.sum(number.T * x) for x in xs]) / n**2
    scale = np.max(np.abs(vals.real)) if vals.size else 1.0
    if np.max(np.abs(vals.imag)) > IMAG_TOL * max(1.0, scale):
        raise ConvergenceError(f"g2(tau) imaginary residue {np.max(np.abs(vals.imag)):.3e}")
    return G2Curve(np.asarray(tau_grid, dtype=float), vals.real.copy())


@dataclass(frozen=True)
class Violation:
    violated: bool
    tau: float | None
    excess: float

    def __bool__(self) -> bool:
        return self.violated


def schwarz_violation(curve: G2Curve, tol: float = VIOLATION_TOL) -> Violation:
    """Does g2(tau) exceed g2(0) by more than ``tol`` somewhere at tau > 0?"""
    tau, vals = np.asarray(curve.tau), np.asarray(curve.values)
    later = tau > 0
    if not np.any(later):
        return Violation(False, None, float("-inf"))
    i = np.flatnonzero(later)[np.argmax(vals[later])]
    excess = float(vals[i] - vals[0])
    return Violation(excess > tol, float(tau[i]), excess)

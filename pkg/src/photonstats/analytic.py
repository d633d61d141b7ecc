"""Weak-drive amplitude approach.

Under weak drive the state is truncated to at most two excitations and evolved
with the damped (non-Hermitian) Hamiltonian. Both models give the same
five-amplitude ladder

    |0>  --Omega-->  |1> <--g--> |1'>  --Omega-->  |2> <--sqrt(2) g--> |2'>

JC:  |0,g>, |1,g>, |0,e>, |2,g>, |1,e>  with K = kappa + i Delta, G = gamma + i delta
COM: |0,0,g>, |1,0,g>, |0,1,e>, |2,0,g>, |1,1,e>
     with K = kappa + i (delta + nu), G = gamma + Gamma + i (delta + nu)

and the ground amplitude fixed to 1. Keeping terms to leading order in Omega
(drive feedback from second- into first-order amplitudes dropped):

    A1  = -i Omega G / (g^2 + G K)
    A1' = -g Omega / (g^2 + G K)
    A2  = Omega^2 (g^2 - G (G + K)) / (sqrt(2) (g^2 + G K) (g^2 + K^2 + G K))
    A2' = i g Omega^2 (G + K) / ((g^2 + G K) (g^2 + K^2 + G K))

and g2(0) = 2 |A2|^2 / |A1|^4, nbar = |A1|^2.

Notes on printed closed forms:

* The JC two-photon amplitude above matches the widely quoted one up to an
  overall sign. The quoted one-photon/excited amplitude carries g^2 where the
  derivation gives g, and the quoted JC g2(0) carries |g^2 + gamma + i delta|^2
  where the amplitudes give |g^2 + (gamma + i delta)(kappa + i Delta)|^2.
* The quoted COM amplitudes omit the direct drive |1,0,g> -> |2,0,g>; their
  A2 numerator is g^2 rather than g^2 - G (G + K). That version is available as
  :func:`printed_com_amplitudes` / :func:`printed_com_g2` for comparison only;
  it disagrees with the master equation (up to a factor ~9 at the blockade dips).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .correlations import G2Curve
from .errors import ConvergenceError, ParameterError, SingularPointError, UndefinedCorrelationError
from .models import ModelParams

SQRT2 = math.sqrt(2.0)
SINGULAR_TOL = 1e-12
WEAK_DRIVE_LIMIT = 0.5


@dataclass(frozen=True)
class JcAmplitudes:
    a0g: complex
    a1g: complex
    a0e: complex
    a1e: complex
    a2g: complex

    @property
    def p1(self) -> float:
        return abs(self.a1g) ** 2

    @property
    def p2(self) -> float:
        return abs(self.a2g) ** 2


@dataclass(frozen=True)
class ComAmplitudes:
    a00: complex
    a10: complex
    a01: complex
    a11: complex
    a20: complex

    @property
    def p1(self) -> float:
        return abs(self.a10) ** 2

    @property
    def p2(self) -> float:
        return abs(self.a20) ** 2


def jc_rates(p: ModelParams) -> tuple[complex, complex]:
    """(K, G) = (kappa + i Delta, gamma + i delta)."""
    return complex(p.kappa, p.delta_c), complex(p.gamma, p.delta_a)


def com_rates(p: ModelParams) -> tuple[complex, complex]:
    """(kappa~, gamma~) = (kappa + i(delta + nu), gamma + Gamma + i(delta + nu))."""
    w = p.delta_a + p.nu
    return complex(p.kappa, w), complex(p.gamma + p.Gamma, w)


def _warn_drive(p: ModelParams) -> None:
    if p.omega > WEAK_DRIVE_LIMIT * p.kappa:
        warnings.warn(f"Omega/kappa = {p.omega / p.kappa:g} is outside the weak-drive regime", stacklevel=3)


def _ladder(K: complex, G: complex, g: float, omega: float):
    d1 = g * g + G * K
    d2 = g * g + K * K + G * K
    if abs(d1) < SINGULAR_TOL or abs(d2) < SINGULAR_TOL:
        raise SingularPointError("closed-form amplitude denominator vanishes")
    a1 = -1j * omega * G / d1
    a1x = -g * omega / d1
    a2 = omega**2 * (g * g - G * (G + K)) / (SQRT2 * d1 * d2)
    a2x = 1j * g * omega**2 * (G + K) / (d1 * d2)
    return a1, a1x, a2, a2x


def ladder_residuals(K: complex, G: complex, g: float, omega: float, a1, a1x, a2, a2x, a0: complex = 1.0) -> np.ndarray:
    """Right-hand sides of the truncated amplitude equations at a candidate steady state.

    Order of rows: first-order bright, first-order dark, two-photon, mixed.
    """
    return np.array([
        -K * a1 - 1j * omega * a0 - 1j * g * a1x,
        -G * a1x - 1j * g * a1,
        -2 * K * a2 - 1j * SQRT2 * g * a2x - 1j * SQRT2 * omega * a1,
        -(K + G) * a2x - 1j * SQRT2 * g * a2 - 1j * omega * a1x,
    ])


def jc_steady_amplitudes(p: ModelParams) -> JcAmplitudes:
    _warn_drive(p)
    K, G = jc_rates(p)
    a1, a1x, a2, a2x = _ladder(K, G, p.g, p.omega)
    return JcAmplitudes(a0g=1.0, a1g=a1, a0e=a1x, a1e=a2x, a2g=a2)


def com_steady_amplitudes(p: ModelParams) -> ComAmplitudes:
    _warn_drive(p)
    K, G = com_rates(p)
    a1, a1x, a2, a2x = _ladder(K, G, p.g, p.omega)
    return ComAmplitudes(a00=1.0, a10=a1, a01=a1x, a11=a2x, a20=a2)


def _g2_from(p1: float, p2: float) -> float:
    if p1 < 1e-28:
        raise UndefinedCorrelationError("one-photon amplitude vanishes")
    return 2 * p2 / p1**2


def jc_analytic_g2(p: ModelParams) -> float:
    """2 |A_2g|^2 / |A_1g|^4."""
    amp = jc_steady_amplitudes(p)
    if abs(amp.a1g) < 1e-14:
        raise UndefinedCorrelationError("one-photon amplitude vanishes")
    return _g2_from(amp.p1, amp.p2)


def jc_analytic_nbar(p: ModelParams) -> float:
    """Omega^2 |gamma + i delta|^2 / |g^2 + (gamma + i delta)(kappa + i Delta)|^2."""
    K, G = jc_rates(p)
    d1 = p.g**2 + G * K
    if abs(d1) < SINGULAR_TOL:
        raise SingularPointError("closed-form amplitude denominator vanishes")
    return p.omega**2 * abs(G) ** 2 / abs(d1) ** 2


def com_analytic_g2(p: ModelParams) -> float:
    amp = com_steady_amplitudes(p)
    if abs(amp.a10) < 1e-14:
        raise UndefinedCorrelationError("one-photon amplitude vanishes")
    return _g2_from(amp.p1, amp.p2)


def com_analytic_nbar(p: ModelParams) -> float:
    """Omega^2 |gamma~|^2 / |g^2 + gamma~ kappa~|^2."""
    K, G = com_rates(p)
    d1 = p.g**2 + G * K
    if abs(d1) < SINGULAR_TOL:
        raise SingularPointError("closed-form amplitude denominator vanishes")
    return p.omega**2 * abs(G) ** 2 / abs(d1) ** 2


def printed_com_amplitudes(p: ModelParams) -> ComAmplitudes:
    """Closed forms as usually quoted for the motional model (no |1,0,g> -> |2,0,g> drive)."""
    K, G = com_rates(p)
    g, om = p.g, p.omega
    d1 = g * g + G * K
    d2 = g * g + K * K + G * K
    if abs(d1) < SINGULAR_TOL or abs(d2) < SINGULAR_TOL:
        raise SingularPointError("closed-form amplitude denominator vanishes")
    return ComAmplitudes(
        a00=1.0,
        a10=-1j * om * G / d1,
        a01=-g * om / d1,
        a11=-1j * g * K * om**2 / (d1 * d2),
        a20=g * g * om**2 / (SQRT2 * d1 * d2),
    )


def printed_com_g2(p: ModelParams) -> float:
    """g^4 (g^2 + G* K*)(g^2 + G K) / ((g^2 + K*^2 + G* K*)(g^2 + K^2 + G K) |G|^4)."""
    K, G = com_rates(p)
    g2 = p.g**2
    num = p.g**4 * (g2 + (G * K).conjugate()) * (g2 + G * K)
    den = (g2 + (K * K + G * K).conjugate()) * (g2 + K * K + G * K) * abs(G) ** 4
    if abs(den) < SINGULAR_TOL:
        raise SingularPointError("closed-form denominator vanishes")
    return float((num / den).real)


def amplitude_ode_g2tau(p: ModelParams, tau_grid: Sequence[float], model: str = "com",
                        rtol: float = 1e-10, atol: float = 1e-12) -> G2Curve:
    """Delayed correlation from the conditional state after one photodetection.

    Annihilating a photon from the steady state leaves
    A1 |0> + A2' |1'> + sqrt(2) A2 |1>; the first-order amplitudes then evolve
    under the damped Hamiltonian with the ground amplitude held at its
    conditioned value, and g2(tau) = |A_1(tau)|^2 / |A1|^4.
    """
    if model == "com":
        K, G = com_rates(p)
    elif model == "jc":
        K, G = jc_rates(p)
    else:
        raise ParameterError(f"unknown model {model!r}; expected 'com' or 'jc'")
    _warn_drive(p)
    a1, a1x, a2, a2x = _ladder(K, G, p.g, p.omega)
    if abs(a1) < 1e-14:
        raise UndefinedCorrelationError("one-photon amplitude vanishes")
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0 or tau[0] < 0 or np.any(np.diff(tau) < 0):
        raise ParameterError("tau grid must be nonnegative and increasing")

    ground = a1
    g, om = p.g, p.omega
    M = np.array([[-K, -1j * g], [-1j * g, -G]])
    src = np.array([-1j * om * ground, 0.0])
    y0 = np.array([SQRT2 * a2, a2x], dtype=complex)
    if tau[-1] == 0.0:
        ys = np.repeat(y0[:, None], tau.size, axis=1)
    else:
        sol = solve_ivp(lambda _t, y: M @ y + src, (0.0, tau[-1]), y0, method="DOP853",
                        t_eval=tau, rtol=rtol, atol=atol)
        if not sol.success:
            raise ConvergenceError(f"amplitude integration failed: {sol.message}")
        ys = sol.y
    vals = np.abs(ys[0]) ** 2 / abs(a1) ** 4
    return G2Curve(tau, vals)

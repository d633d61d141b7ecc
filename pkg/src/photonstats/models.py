"""Hamiltonians of the driven atom-cavity system, with and without atomic motion.

All energies and rates are in units of the cavity decay rate kappa, in the
frame rotating at the drive frequency:

* ``delta_c``  cavity-drive detuning (omega_a - omega_L)
* ``delta_a``  atom-drive detuning (omega_e - omega_L)
* ``delta_tilde = delta_a - delta_c``  atom-cavity detuning (derived)
* ``nu``       trap frequency of the atomic centre-of-mass motion

Printed-formula caveats (kept here, not in code paths):

* The manifold splitting must be sqrt(4 n g^2 + delta_tilde^2); the version
  without the square on delta_tilde is dimensionally inconsistent and disagrees
  with diagonalization (see ``tests/test_models.py``).
* The closed-form dressed eigenvectors in circulation repeat the coefficient
  sqrt(1/2 + delta_tilde/(2 Delta')) in both components of |n->, which is not
  normalized; eigenvectors here always come from diagonalizing the 2x2 block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonHermitianError, ParameterError
from .hilbert import SpaceSpec, adjoint, mode_operators

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    delta_c: float = 0.0
    delta_a: float = 0.0
    nu: float = 0.0
    g: float = 0.0
    omega: float = 0.0
    kappa: float = 1.0
    gamma: float = 0.0
    Gamma: float = 0.0

    def __post_init__(self):
        for name in ("delta_c", "delta_a", "nu", "g", "omega", "kappa", "gamma", "Gamma"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
        if self.kappa <= 0:
            raise ParameterError("kappa must be > 0")
        for name in ("nu", "omega", "gamma", "Gamma"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def delta_tilde(self) -> float:
        return self.delta_a - self.delta_c

    @classmethod
    def jc(cls, delta_c: float, delta_tilde: float, **kw) -> "ModelParams":
        """Atom detuning tied to the cavity one: delta_a = delta_c + delta_tilde."""
        return cls(delta_c=delta_c, delta_a=delta_c + delta_tilde, **kw)

    @classmethod
    def com(cls, delta_a: float, nu: float, **kw) -> "ModelParams":
        """Three-mode resonance: delta_c = delta_a + nu."""
        return cls(delta_c=delta_a + nu, delta_a=delta_a, nu=nu, **kw)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {
            "delta_c": self.delta_c,
            "delta_a": self.delta_a,
            "delta_tilde": self.delta_tilde,
            "nu": self.nu,
            "g": self.g,
            "omega": self.omega,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "Gamma": self.Gamma,
        }


@dataclass(frozen=True)
class DressedLevel:
    n: int
    sign: str
    energy: float
    state: np.ndarray = field(repr=False, compare=False)


def _require_phonons(space: SpaceSpec, want: bool) -> None:
    if want and space.phonon_cutoff < 1:
        raise ParameterError("motional model needs phonon_cutoff >= 1")
    if not want and space.phonon_cutoff != 0:
        raise ParameterError("Jaynes-Cummings model requires phonon_cutoff = 0")


def _drive(p: ModelParams, space: SpaceSpec) -> np.ndarray:
    a = mode_operators(space).a
    return p.omega * (a + adjoint(a))


def build_jc_hamiltonian(p: ModelParams, space: SpaceSpec) -> np.ndarray:
    """Delta a'a + delta s+s- + g(a's- + a s+) + Omega(a' + a)."""
    _require_phonons(space, False)
    a, _, sm = mode_operators(space)
    ad, sp = adjoint(a), adjoint(sm)
    return p.delta_c * ad @ a + p.delta_a * sp @ sm + p.g * (ad @ sm + a @ sp) + _drive(p, space)


def build_com_effective_hamiltonian(p: ModelParams, space: SpaceSpec) -> np.ndarray:
    """(delta + nu)(a'a + b'b) + g(a' b s- + a b' s+) + Omega(a' + a).

    Valid near the three-mode resonance Delta = delta + nu for |delta| >> g/2.
    """
    _require_phonons(space, True)
    a, b, sm = mode_operators(space)
    ad, bd, sp = adjoint(a), adjoint(b), adjoint(sm)
    w = p.delta_a + p.nu
    return w * (ad @ a + bd @ b) + p.g * (ad @ b @ sm + a @ bd @ sp) + _drive(p, space)


def build_full_com_hamiltonian(p: ModelParams, space: SpaceSpec) -> np.ndarray:
    """Rotating-frame Hamiltonian with position-dependent coupling, before any RWA.

    Delta a'a + delta s+s- + nu b'b + g(a's- + a s+)(b' + b) + Omega(a' + a).
    """
    _require_phonons(space, True)
    a, b, sm = mode_operators(space)
    ad, bd, sp = adjoint(a), adjoint(b), adjoint(sm)
    return (
        p.delta_c * ad @ a
        + p.delta_a * sp @ sm
        + p.nu * bd @ b
        + p.g * (ad @ sm + a @ sp) @ (bd + b)
        + _drive(p, space)
    )


def damped_hamiltonian(h: np.ndarray, p: ModelParams, space: SpaceSpec) -> np.ndarray:
    """h - i(kappa a'a + gamma s+s- + Gamma b'b); the Gamma term vanishes without phonons."""
    check_hermitian(h)
    ops = mode_operators(space)
    loss = p.kappa * ops.n_photon + p.gamma * ops.n_atom
    if space.phonon_cutoff > 0:
        loss = loss + p.Gamma * ops.n_phonon
    return h - 1j * loss


def check_hermitian(h: np.ndarray, atol: float = HERMITIAN_ATOL) -> None:
    err = np.max(np.abs(h - adjoint(h))) if h.size else 0.0
    if err > atol * max(1.0, np.max(np.abs(h))):
        raise NonHermitianError(f"matrix is not Hermitian (max deviation {err:.3e})")


def jc_manifold_splitting(n: int, p: ModelParams) -> float:
    """Delta' = sqrt(4 n g^2 + delta_tilde^2)."""
    return math.sqrt(4 * n * p.g**2 + p.delta_tilde**2)


def jc_energies(n: int, p: ModelParams) -> tuple[float, float]:
    """(E+, E-) of manifold n: (n - 1/2) Delta + delta/2 ± Delta'/2."""
    if n < 1:
        raise ParameterError("manifold index must be >= 1")
    centre = (n - 0.5) * p.delta_c + 0.5 * p.delta_a
    half = 0.5 * jc_manifold_splitting(n, p)
    return centre + half, centre - half


def _diagonalize_pair(block: np.ndarray, i0: int, i1: int, dim: int, n: int, energies):
    w, v = np.linalg.eigh(block)
    levels = []
    for sign, energy, col in (("+", energies[0], v[:, 1]), ("-", energies[1], v[:, 0])):
        # fix the global phase: first nonzero component real positive
        k = 0 if abs(col[0]) > 1e-12 else 1
        col = col * (abs(col[k]) / col[k])
        state = np.zeros(dim, dtype=complex)
        state[i0], state[i1] = col
        levels.append(DressedLevel(n=n, sign=sign, energy=energy, state=state))
    return tuple(levels)


def jc_dressed_levels(n: int, p: ModelParams, space: SpaceSpec | None = None) -> tuple[DressedLevel, DressedLevel]:
    """Levels |n+>, |n-> of the drive-free JC Hamiltonian.

    Energies are the closed forms; states come from diagonalizing the block
    spanned by |n, g> and |n-1, e>.
    """
    if n < 1:
        raise ParameterError("manifold index must be >= 1")
    space = space or SpaceSpec(max(n, 2), 0)
    if n > space.photon_cutoff:
        raise ParameterError(f"manifold {n} exceeds photon cutoff {space.photon_cutoff}")
    c = math.sqrt(n) * p.g
    block = np.array([[n * p.delta_c, c], [c, (n - 1) * p.delta_c + p.delta_a]], dtype=float)
    i0, i1 = space.index(n, 0, 0), space.index(n - 1, 0, 1)
    return _diagonalize_pair(block, i0, i1, space.dim, n, jc_energies(n, p))


def com_dressed_levels(n: int, p: ModelParams, space: SpaceSpec | None = None) -> tuple[DressedLevel, DressedLevel]:
    """|n±> = (|n,0,g> ± |n-1,1,e>)/sqrt(2) of the drive-free effective COM Hamiltonian.

    Energies n (delta + nu) ± sqrt(n) g; only n = 1, 2 are needed for weak drive
    but any n within the cutoffs works.
    """
    if n < 1:
        raise ParameterError("manifold index must be >= 1")
    space = space or SpaceSpec(max(n, 2), 1)
    if n > space.photon_cutoff or space.phonon_cutoff < 1:
        raise ParameterError("space too small for the requested manifold")
    w = n * (p.delta_a + p.nu)
    c = math.sqrt(n) * p.g
    block = np.array([[w, c], [c, w]], dtype=float)
    i0, i1 = space.index(n, 0, 0), space.index(n - 1, 1, 1)
    return _diagonalize_pair(block, i0, i1, space.dim, n, (w + c, w - c))


def two_photon_resonances(p: ModelParams) -> dict[str, list[float]]:
    """Cavity detunings at which the drive resonantly reaches a dressed manifold.

    With the atom tied to the cavity (delta = Delta + delta_tilde), the n-photon
    condition E±(n)(Delta) = 0 is linear in Delta:
    Delta = (-delta_tilde ∓ Delta'_n) / (2 n).
    Returns ``{"single": [...], "two_photon": [...]}``, each sorted ascending.
    """
    if p.g < 0:
        raise ParameterError("g must be >= 0")
    out = {}
    for key, n in (("single", 1), ("two_photon", 2)):
        root = jc_manifold_splitting(n, p)
        out[key] = sorted((-p.delta_tilde + s * root) / (2 * n) for s in (1.0, -1.0))
    return out

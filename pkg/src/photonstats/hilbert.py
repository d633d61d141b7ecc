"""Truncated photon ⊗ phonon ⊗ atom Hilbert spaces and their ladder operators.

Subsystem ordering is fixed everywhere in the package::

    photon (0..photon_cutoff) ⊗ phonon (0..phonon_cutoff) ⊗ atom (|g>=0, |e>=1)

so the composite index of ``|n_a, n_b, i>`` is
``(n_a * (phonon_cutoff + 1) + n_b) * 2 + i``. A Jaynes-Cummings model without
atomic motion uses ``phonon_cutoff=0``, which makes the phonon factor
one-dimensional.

Matrices are plain dense ``numpy`` complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, ParameterError

SLOTS = ("photon", "phonon", "atom")
ATOM_DIM = 2


@dataclass(frozen=True)
class SpaceSpec:
    photon_cutoff: int
    phonon_cutoff: int = 0
    atom_dim: int = ATOM_DIM

    def __post_init__(self):
        if self.photon_cutoff < 2:
            raise ParameterError("photon_cutoff must be >= 2 to resolve two-photon statistics")
        if self.phonon_cutoff < 0:
            raise ParameterError("phonon_cutoff must be >= 0")
        if self.atom_dim != ATOM_DIM:
            raise ParameterError("atom_dim is fixed at 2")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.photon_cutoff + 1, self.phonon_cutoff + 1, self.atom_dim)

    @property
    def dim(self) -> int:
        n_a, n_b, n_s = self.dims
        return n_a * n_b * n_s

    def slot_dim(self, slot: str) -> int:
        return self.dims[_slot_index(slot)]

    def index(self, n_photon: int, n_phonon: int = 0, atom: int = 0) -> int:
        """Composite index of the basis state ``|n_photon, n_phonon, atom>``."""
        n_a, n_b, n_s = self.dims
        if not (0 <= n_photon < n_a and 0 <= n_phonon < n_b and 0 <= atom < n_s):
            raise DimensionError(f"basis state ({n_photon}, {n_phonon}, {atom}) outside {self}")
        return (n_photon * n_b + n_phonon) * n_s + atom

    def basis(self, n_photon: int, n_phonon: int = 0, atom: int = 0) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(n_photon, n_phonon, atom)] = 1.0
        return v

    def bigger(self, extra: int = 1) -> "SpaceSpec":
        """Same layout with every bosonic cutoff raised by ``extra``.

        A zero phonon cutoff stays zero: no phonon mode is not a truncation.
        """
        phonon = self.phonon_cutoff + extra if self.phonon_cutoff > 0 else 0
        return SpaceSpec(self.photon_cutoff + extra, phonon)


def _slot_index(slot: str) -> int:
    try:
        return SLOTS.index(slot)
    except ValueError:
        raise DimensionError(f"unknown subsystem {slot!r}; expected one of {SLOTS}") from None


def annihilation(cutoff: int) -> np.ndarray:
    """Bosonic lowering operator on ``0..cutoff``: entry sqrt(n) at (n-1, n)."""
    if cutoff < 0:
        raise ParameterError("cutoff must be >= 0")
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def sigma_minus() -> np.ndarray:
    """Atomic lowering operator |g><e| in the basis (|g>, |e>)."""
    return np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def adjoint(op: np.ndarray) -> np.ndarray:
    return np.asarray(op).conj().T


def embed(op: np.ndarray, slot: str, space: SpaceSpec) -> np.ndarray:
    """Tensor ``op`` with identities on the other two subsystems."""
    op = np.asarray(op, dtype=complex)
    i = _slot_index(slot)
    d = space.dims[i]
    if op.shape != (d, d):
        raise DimensionError(f"operator of shape {op.shape} does not fit {slot} slot of dimension {d}")
    factors = [np.eye(n, dtype=complex) for n in space.dims]
    factors[i] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def allclose_abs(x: np.ndarray, y: np.ndarray, atol: float) -> bool:
    """Entrywise comparison with an explicit absolute tolerance only."""
    x, y = np.asarray(x), np.asarray(y)
    return x.shape == y.shape and bool(np.all(np.abs(x - y) <= atol))


class ModeOperators(NamedTuple):
    """Cavity, phonon and atomic lowering operators embedded in one space."""

    a: np.ndarray
    b: np.ndarray
    sm: np.ndarray

    @property
    def n_photon(self) -> np.ndarray:
        return adjoint(self.a) @ self.a

    @property
    def n_phonon(self) -> np.ndarray:
        return adjoint(self.b) @ self.b

    @property
    def n_atom(self) -> np.ndarray:
        return adjoint(self.sm) @ self.sm


@lru_cache(maxsize=64)
def mode_operators(space: SpaceSpec) -> ModeOperators:
    """Cached read-only ``a``, ``b``, ``sigma_-`` for ``space``."""
    a = embed(annihilation(space.photon_cutoff), "photon", space)
    b = embed(annihilation(space.phonon_cutoff), "phonon", space)
    sm = embed(sigma_minus(), "atom", space)
    for m in (a, b, sm):
        m.setflags(write=False)
    return ModeOperators(a, b, sm)

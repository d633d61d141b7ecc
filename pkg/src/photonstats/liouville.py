"""Lindblad superoperators, steady states and time propagation.

Density matrices are vectorized by column stacking, ``vec(A X B) = (B^T ⊗ A) vec(X)``.
The dissipator keeps the convention in which each rate multiplies the full
``2 d rho d^+ - d^+ d rho - rho d^+ d``; a bare cavity therefore loses energy
at rate ``2 kappa`` and its field amplitude at rate ``kappa``.

Superoperators are stored as ``scipy.sparse`` CSR matrices: the motional model
at strong drive reaches Hilbert dimension ~100, where a dense D^2 x D^2 array
would not fit comfortably in memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, NonUniqueSteadyStateError, ParameterError
from .hilbert import SpaceSpec, mode_operators
from .models import ModelParams, check_hermitian

RESIDUAL_TOL = 1e-10
TRACE_TOL = 1e-9
RK_RTOL = 1e-10
RK_ATOL = 1e-12
DENSE_SOLVE_MAX = 256
DENSE_EXPM_MAX = 512


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True)
class Liouvillian:
    dim: int
    matrix: sp.csr_matrix

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """rho_dot for a D x D matrix."""
        return unvec(self.matrix @ vec(rho), self.dim)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10, pos_tol: float = 1e-8) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ConvergenceError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > trace_tol:
            raise ConvergenceError(f"density matrix trace {np.trace(m)} != 1")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -pos_tol:
            raise ConvergenceError(f"density matrix has negative eigenvalue {lo:.3e}")


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def build_liouvillian(h: np.ndarray, collapse: Iterable[tuple[float, np.ndarray]] = ()) -> Liouvillian:
    """Generator of rho_dot = -i[H, rho] + sum_k r_k (2 d rho d^+ - d^+ d rho - rho d^+ d)."""
    h = np.asarray(h, dtype=complex)
    check_hermitian(h)
    n = h.shape[0]
    eye = sp.identity(n, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    L = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    for rate, d in collapse:
        if rate < 0:
            raise ParameterError(f"collapse rate must be >= 0, got {rate}")
        if rate == 0:
            continue
        ds = sp.csr_matrix(np.asarray(d, dtype=complex))
        dd = (ds.conj().T @ ds).tocsr()
        L = L + rate * (2 * sp.kron(ds.conj(), ds) - sp.kron(eye, dd) - sp.kron(dd.T, eye))
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return Liouvillian(n, L)


def collapse_operators(p: ModelParams, space: SpaceSpec) -> list[tuple[float, np.ndarray]]:
    """(kappa, a), (gamma, s-) and, with a phonon mode, (Gamma, b)."""
    ops = mode_operators(space)
    out = [(p.kappa, ops.a), (p.gamma, ops.sm)]
    if space.phonon_cutoff > 0:
        out.append((p.Gamma, ops.b))
    return out


def smallest_eigenvalues(l: Liouvillian, k: int = 2) -> np.ndarray:
    """The ``k`` Liouvillian eigenvalues of smallest modulus, sorted by modulus."""
    n2 = l.matrix.shape[0]
    if n2 <= 400:
        w = np.linalg.eigvals(l.dense())
    else:
        # shift off the origin: L itself is singular
        sigma = 1e-3 * max(1.0, spla.norm(l.matrix, ord=1) / n2)
        w = spla.eigs(l.matrix.tocsc(), k=min(k + 2, n2 - 2), sigma=sigma, which="LM",
                      return_eigenvectors=False, tol=1e-12)
    return w[np.argsort(np.abs(w))][:k]


def _component_labels(L: sp.csr_matrix) -> np.ndarray:
    graph = sp.csr_matrix((np.ones(L.nnz), L.indices, L.indptr), shape=L.shape)
    return connected_components(graph, directed=False)[1]


def _support_block(L: sp.csr_matrix, v0: np.ndarray) -> np.ndarray:
    """Indices of the sparsity blocks of L that the vector v0 touches.

    exp(L t) v0 never leaves these blocks, so propagation can run on them alone.
    """
    labels = _component_labels(L)
    return np.flatnonzero(np.isin(labels, np.unique(labels[v0 != 0])))


def _diagonal_component(L: sp.csr_matrix, n: int) -> np.ndarray:
    """Indices of vec(rho) in the connected components of L that touch the diagonal.

    L is block diagonal over the components of its sparsity graph, so a unique
    unit-trace null vector is supported only on the block containing the
    diagonal of rho; every other block must vanish. Populations spread over
    several blocks mean a degenerate zero eigenspace.
    """
    labels = _component_labels(L)
    diag = np.arange(n) * (n + 1)
    touched = np.unique(labels[diag])
    if touched.size > 1:
        # each such block conserves its own share of the trace
        raise NonUniqueSteadyStateError(f"populations split into {touched.size} disconnected blocks")
    return np.flatnonzero(labels == touched[0])


def steadystate(l: Liouvillian, check_unique: bool = True) -> DensityMatrix:
    """Null vector of L normalized to unit trace.

    One row of L is replaced by the trace functional and the square system is
    solved directly; the residual is checked on the unmodified L. The solve is
    restricted to the part of Liouville space connected to the populations.
    """
    n = l.dim
    idx = _diagonal_component(l.matrix, n)
    sub = l.matrix[idx][:, idx]
    trace_row = vec(np.eye(n)).real[idx]
    rhs = np.zeros(idx.size, dtype=complex)
    rhs[0] = 1.0
    try:
        if idx.size <= DENSE_SOLVE_MAX:
            m = sub.toarray()
            m[0, :] = trace_row
            w = np.linalg.solve(m, rhs)
        else:
            m = sub.tolil()
            m[0, :] = trace_row
            w = spla.splu(m.tocsc()).solve(rhs)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        raise NonUniqueSteadyStateError(f"trace-constrained system is singular: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NonUniqueSteadyStateError("trace-constrained system is singular")
    v = np.zeros(n * n, dtype=complex)
    v[idx] = w
    if check_unique:
        ev = smallest_eigenvalues(l, 2)
        scale = max(1.0, spla.norm(l.matrix, ord=1))
        if len(ev) > 1 and abs(ev[1]) < 1e-10 * scale:
            raise NonUniqueSteadyStateError(f"zero eigenspace is degenerate (second eigenvalue {ev[1]:.3e})")
    resid = np.max(np.abs(l.matrix @ v))
    if resid > RESIDUAL_TOL:
        raise ConvergenceError(f"steady-state residual {resid:.3e} exceeds {RESIDUAL_TOL}")
    rho = unvec(v, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix(rho)


def steady_state_residual(l: Liouvillian, rho) -> float:
    return float(np.max(np.abs(l.matrix @ vec(_as_array(rho)))))


def _check_grid(t_grid: Sequence[float]) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ParameterError("time grid must be a nonempty 1-D sequence")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise ParameterError("time grid must be nonnegative and increasing")
    return t


def _is_uniform_from_zero(t: np.ndarray) -> bool:
    if t.size < 3 or t[0] != 0.0:
        return False
    step = t[-1] / (t.size - 1)
    return step > 0 and np.allclose(t, step * np.arange(t.size), rtol=0, atol=1e-14 * max(1.0, t[-1]))


def propagate(l: Liouvillian, rho0, t_grid: Sequence[float], method: str = "expm",
              rtol: float = RK_RTOL, atol: float = RK_ATOL) -> list[np.ndarray]:
    """rho(t_i) = exp(L t_i) rho0 for every t_i of an increasing grid.

    Only the sparsity blocks of L touched by rho0 are evolved.
    ``method="expm"`` uses dense exponentials for blocks up to
    ``DENSE_EXPM_MAX`` unknowns and scipy's action-of-matrix-exponential
    routine above; ``method="rk"`` integrates the vectorized ODE with
    adaptive DOP853.
    """
    t = _check_grid(t_grid)
    rho0 = _as_array(rho0)
    n = l.dim
    if rho0.shape != (n, n):
        raise ParameterError(f"initial state shape {rho0.shape} does not match dimension {n}")
    if method not in ("expm", "rk"):
        raise ParameterError(f"unknown propagation method {method!r}")
    v0 = vec(rho0)
    idx = _support_block(l.matrix, v0)
    sub = l.matrix[idx][:, idx]
    if method == "expm":
        ws = _propagate_expm(sub, v0[idx], t)
    else:
        ws = _propagate_rk(sub, v0[idx], t, rtol, atol)
    out = []
    for ti, w in zip(t, ws):
        if ti == 0.0:
            out.append(rho0.copy())
            continue
        v = np.zeros(n * n, dtype=complex)
        v[idx] = w
        out.append(unvec(v, n))
    tr0 = np.trace(rho0)
    drift = max(abs(np.trace(r) - tr0) for r in out)
    if drift > TRACE_TOL * max(1.0, abs(tr0)):
        raise ConvergenceError(f"trace drifted by {drift:.3e} during propagation")
    return out


def _propagate_expm(L: sp.csr_matrix, v0: np.ndarray, t: np.ndarray) -> list[np.ndarray]:
    if L.shape[0] <= DENSE_EXPM_MAX:
        return _propagate_dense(L.toarray(), v0, t)
    L = L.tocsc()
    if _is_uniform_from_zero(t):
        vs = spla.expm_multiply(L, v0, start=0.0, stop=t[-1], num=t.size, endpoint=True)
        return list(vs)
    out, v, prev = [], v0, 0.0
    for ti in t:
        if ti > prev:
            v = spla.expm_multiply(L * (ti - prev), v)
            prev = ti
        out.append(v)
    return out


def _propagate_dense(L: np.ndarray, v0: np.ndarray, t: np.ndarray) -> list[np.ndarray]:
    """Dense exponentials, one per distinct step length (a uniform grid needs one)."""
    props: dict[float, np.ndarray] = {}
    out, v, prev = [], v0, 0.0
    for ti in t:
        dt = ti - prev
        if dt > 0:
            key = round(dt, 12)
            if key not in props:
                props[key] = sla.expm(L * dt)
            v = props[key] @ v
            prev = ti
        out.append(v)
    return out


def _propagate_rk(L: sp.csr_matrix, v0: np.ndarray, t: np.ndarray, rtol: float, atol: float) -> list[np.ndarray]:
    if t[-1] == 0.0:
        return [v0] * t.size
    sol = solve_ivp(lambda _t, y: L @ y, (0.0, t[-1]), v0, method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    if not sol.success:
        raise ConvergenceError(f"integration failed: {sol.message}")
    return [sol.y[:, i] for i in range(t.size)]


MODELS = ("jc", "com-effective", "com-full")


def system_hamiltonian(model: str, p: ModelParams, space: SpaceSpec) -> np.ndarray:
    from .models import build_com_effective_hamiltonian, build_full_com_hamiltonian, build_jc_hamiltonian

    builders = {
        "jc": build_jc_hamiltonian,
        "com-effective": build_com_effective_hamiltonian,
        "com-full": build_full_com_hamiltonian,
    }
    try:
        return builders[model](p, space)
    except KeyError:
        raise ParameterError(f"unknown model {model!r}; expected one of {MODELS}") from None


def _hamiltonian_terms(model: str, space: SpaceSpec) -> list[tuple[str, np.ndarray]]:
    """(coefficient name, operator) pairs with H = sum coefficient * operator."""
    a, b, sm = mode_operators(space)
    ad, bd, sp_ = a.conj().T, b.conj().T, sm.conj().T
    drive = ("omega", a + ad)
    if model == "jc":
        return [("delta_c", ad @ a), ("delta_a", sp_ @ sm), ("g", ad @ sm + a @ sp_), drive]
    if model == "com-effective":
        return [("delta_a+nu", ad @ a + bd @ b), ("g", ad @ b @ sm + a @ bd @ sp_), drive]
    if model == "com-full":
        return [("delta_c", ad @ a), ("delta_a", sp_ @ sm), ("nu", bd @ b),
                ("g", (ad @ sm + a @ sp_) @ (bd + b)), drive]
    raise ParameterError(f"unknown model {model!r}; expected one of {MODELS}")


def _coefficient(name: str, p: ModelParams) -> float:
    if name == "delta_a+nu":
        return p.delta_a + p.nu
    return getattr(p, name)


@lru_cache(maxsize=32)
def _superoperator_pieces(model: str, space: SpaceSpec):
    """Shared sparsity pattern plus one aligned data vector per model term."""
    terms = [(name, build_liouvillian(op).matrix) for name, op in _hamiltonian_terms(model, space)]
    ops = mode_operators(space)
    dissipators = [("kappa", ops.a), ("gamma", ops.sm)]
    if space.phonon_cutoff > 0:
        dissipators.append(("Gamma", ops.b))
    zero = np.zeros((space.dim, space.dim))
    terms += [(name, build_liouvillian(zero, [(1.0, d)]).matrix) for name, d in dissipators]

    pattern = sum(abs(m) for _, m in terms).tocsr()
    pattern.sort_indices()
    n2 = pattern.shape[0]
    rows = np.repeat(np.arange(n2), np.diff(pattern.indptr))
    keys = rows * n2 + pattern.indices
    names, data = [], []
    for name, m in terms:
        c = m.tocoo()
        pos = np.searchsorted(keys, c.row.astype(np.int64) * n2 + c.col)
        d = np.zeros(keys.size, dtype=complex)
        np.add.at(d, pos, c.data)
        names.append(name)
        data.append(d)
    arrays = (np.array(data), pattern.indices.copy(), pattern.indptr.copy())
    for arr in arrays:
        arr.setflags(write=False)
    return (tuple(names),) + arrays


def system_liouvillian(model: str, p: ModelParams, space: SpaceSpec) -> Liouvillian:
    """Master-equation generator for one of the named models.

    Equivalent to ``build_liouvillian(system_hamiltonian(...), collapse_operators(...))``
    but assembled from cached parameter-independent pieces.
    """
    if model == "jc" and space.phonon_cutoff != 0:
        raise ParameterError("Jaynes-Cummings model requires phonon_cutoff = 0")
    if model != "jc" and space.phonon_cutoff < 1:
        raise ParameterError("motional model needs phonon_cutoff >= 1")
    names, data, indices, indptr = _superoperator_pieces(model, space)
    coeffs = np.array([_coefficient(nm, p) for nm in names])
    n2 = space.dim**2
    # copy the cached index arrays: eliminate_zeros works in place
    L = sp.csr_matrix((coeffs @ data, indices.copy(), indptr.copy()), shape=(n2, n2))
    L.eliminate_zeros()
    return Liouvillian(space.dim, L)

"""Dense complex linear algebra and multi-index tensor operations.

Multi-index convention: party 0 is the slowest-varying index of the
row-major flattening (the leftmost tensor factor).  Every module relies on
this ordering.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    NotHermitian,
    NotInRange,
    NotPSD,
    NumericalFailure,
    ShapeError,
    SizeLimit,
)

HERMITIAN_TOL = 1e-12
PSD_SLACK = 1e-9
RANK_TOL = 1e-10
RANGE_TOL = 1e-8

DEFAULT_MAX_DIM = 10**6
INT64_MAX = 2**63 - 1


def max_dim() -> int:
    """Largest vector-space dimension any routine will materialize.

    Overridable through the ``BOSESEP_MAX_DIM`` environment variable.
    """
    raw = os.environ.get("BOSESEP_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise SizeLimit(f"BOSESEP_MAX_DIM is not an integer: {raw!r}") from exc
    if value < 1:
        raise SizeLimit("BOSESEP_MAX_DIM must be positive")
    return value


def check_dim(dim: int, what: str = "dimension") -> int:
    limit = max_dim()
    if dim > limit:
        raise SizeLimit(f"{what} {dim} exceeds the configured limit {limit}")
    return dim


@dataclass(frozen=True)
class SystemShape:
    """Local dimension ``n`` and number of parties ``k``."""

    n: int
    k: int
    full_dim: int = field(init=False, repr=False, compare=False)
    sym_dim: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ShapeError(f"local dimension must be an integer >= 2, got {self.n!r}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ShapeError(f"party count must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "full_dim", self.n**self.k)
        object.__setattr__(self, "sym_dim", math.comb(self.n + self.k - 1, self.k))

    @property
    def dims(self):
        return (self.n,) * self.k


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
    return a


def hermiticity_error(a: np.ndarray) -> float:
    """Relative Frobenius distance of ``a`` from its adjoint."""
    scale = max(1.0, float(np.linalg.norm(a)))
    return float(np.linalg.norm(a - a.conj().T)) / scale


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and hermiticity_error(a) <= tol


def _check_hermitian(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"matrix is not square: {a.shape}")
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL:
        raise NotHermitian(f"relative anti-Hermitian part {err:.3e} exceeds {HERMITIAN_TOL}")


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(a⊗b)[i*rb+p, j*cb+q] = a[i, j] * b[p, q]``."""
    a = as_matrix(a)
    b = as_matrix(b)
    check_dim(a.shape[0] * b.shape[0], "kron row count")
    check_dim(a.shape[1] * b.shape[1], "kron column count")
    return np.kron(a, b)


def _real_if_exact(a: np.ndarray) -> np.ndarray:
    # LAPACK's real path is ~4x cheaper; only taken when nothing is lost.
    if np.iscomplexobj(a) and not np.any(a.imag):
        return np.ascontiguousarray(a.real)
    return a


def hermitian_eigensystem(a) -> EigenSystem:
    """Full spectral decomposition of a Hermitian matrix, ascending."""
    a = as_matrix(a)
    _check_hermitian(a)
    try:
        w, v = np.linalg.eigh(_real_if_exact(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return EigenSystem(w, v.astype(complex, copy=False))


def hermitian_eigenvalues(a) -> np.ndarray:
    a = as_matrix(a)
    _check_hermitian(a)
    try:
        return np.linalg.eigvalsh(_real_if_exact(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def rank_from_spectrum(w: np.ndarray, rel_tol: float = RANK_TOL, scale=None) -> int:
    """Count eigenvalues above ``rel_tol * scale``.

    ``scale`` defaults to the largest eigenvalue.  Pass the ``λ_max`` of a
    reference matrix to rank a small residual against the matrix it came
    from, so that pure rounding noise counts as rank zero.
    """
    if w.size == 0:
        return 0
    lam_max = float(w.max()) if scale is None else float(scale)
    if lam_max <= 0.0:
        if float(w.min()) < -rel_tol:
            raise NotPSD(f"minimum eigenvalue {w.min():.3e} with no positive part")
        return 0
    floor = -rel_tol * max(1.0, lam_max)
    if float(w.min()) < floor:
        raise NotPSD(f"minimum eigenvalue {w.min():.3e} below {floor:.3e}")
    return int(np.count_nonzero(w > rel_tol * lam_max))


def eps_rank(a, rel_tol: float = RANK_TOL, scale=None) -> int:
    """Number of eigenvalues above ``rel_tol * scale`` of a PSD matrix.

    ``scale`` defaults to ``λ_max(a)``.
    """
    return rank_from_spectrum(hermitian_eigenvalues(a), rel_tol, scale)


def range_basis(a, rel_tol: float = RANK_TOL) -> tuple:
    """Orthonormal basis of the range and the matching eigenvalues.

    Eigenvalues are selected by magnitude so indefinite inputs are allowed.
    """
    w, v = hermitian_eigensystem(a)
    scale = float(np.abs(w).max()) if w.size else 0.0
    if scale == 0.0:
        return v[:, :0], w[:0]
    keep = np.abs(w) > rel_tol * scale
    return v[:, keep], w[keep]


def range_projector(a, rel_tol: float = RANK_TOL) -> np.ndarray:
    u, _ = range_basis(a, rel_tol)
    return u @ u.conj().T


def _parties(parties: Iterable[int], k: int) -> list:
    out = sorted({int(p) for p in parties})
    for p in out:
        if p < 0 or p >= k:
            raise IndexError(f"party index {p} out of range for {k} parties")
    return out


def _check_operator(rho: np.ndarray, shape: SystemShape) -> None:
    if rho.shape != (shape.full_dim, shape.full_dim):
        raise ShapeError(
            f"operator shape {rho.shape} does not match full dimension {shape.full_dim}"
        )


def partial_trace(rho, shape: SystemShape, parties: Iterable[int]) -> np.ndarray:
    """Trace out ``parties``; the survivors keep their relative order."""
    rho = as_matrix(rho)
    _check_operator(rho, shape)
    traced = _parties(parties, shape.k)
    keep = [p for p in range(shape.k) if p not in traced]
    k = shape.k
    t = rho.reshape(shape.dims * 2)
    # Bring traced row/column axes to the back in matching pairs, then sum the diagonal.
    order = keep + [k + p for p in keep] + traced + [k + p for p in traced]
    t = t.transpose(order)
    d_keep = shape.n ** len(keep)
    d_tr = shape.n ** len(traced)
    t = t.reshape(d_keep, d_keep, d_tr, d_tr)
    return np.trace(t, axis1=2, axis2=3)


def partial_transpose(rho, shape: SystemShape, parties: Iterable[int]) -> np.ndarray:
    """Transpose the row and column indices of ``parties``.

    A pure index permutation, so applying it twice is bit-exact identity.
    """
    rho = as_matrix(rho)
    _check_operator(rho, shape)
    k = shape.k
    order = list(range(2 * k))
    for p in _parties(parties, k):
        order[p], order[k + p] = order[k + p], order[p]
    t = rho.reshape(shape.dims * 2).transpose(order)
    return np.ascontiguousarray(t).reshape(shape.full_dim, shape.full_dim)


def realign(rho, shape: SystemShape, parties: Iterable[int]) -> np.ndarray:
    """Realignment across the bipartition ``parties`` | complement.

    With ``S`` the listed parties and ``T`` the rest,
    ``R[(s, s'), (t, t')] = rho[(s, t), (s', t')]``.
    """
    rho = as_matrix(rho)
    _check_operator(rho, shape)
    k = shape.k
    side = _parties(parties, k)
    rest = [p for p in range(k) if p not in side]
    t = rho.reshape(shape.dims * 2)
    order = side + [k + p for p in side] + rest + [k + p for p in rest]
    ds = shape.n ** (2 * len(side))
    dt = shape.n ** (2 * len(rest))
    return t.transpose(order).reshape(ds, dt)


def schmidt_decompose(psi, dim_a: int, dim_b: int):
    """Schmidt form ``psi = Σ_j s_j |a_j⟩|b_j⟩``.

    Returns ``(s, a, b)`` with coefficients descending and the local bases as
    the columns of ``a`` (dim_a × r) and ``b`` (dim_b × r), r = min(dim_a, dim_b).
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dim_a * dim_b:
        raise ShapeError(f"vector of length {psi.size} cannot be split as {dim_a}x{dim_b}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-10:
        raise ShapeError(f"Schmidt decomposition expects a unit vector, norm is {norm}")
    u, s, vh = np.linalg.svd(psi.reshape(dim_a, dim_b), full_matrices=False)
    return s, u, vh.T


def trace_norm(a) -> float:
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    return 0.5 * trace_norm(as_matrix(a) - as_matrix(b))


def psd_subtraction_weight(rho, v, rank_tol: float = RANK_TOL, range_tol: float = RANGE_TOL,
                           scale=None) -> float:
    """Largest ``λ`` with ``rho - λ|v⟩⟨v|`` still positive semidefinite.

    For ``v`` in the range of ``rho`` this is ``1 / ⟨v|rho⁺|v⟩`` and the
    subtraction lowers the rank by exactly one.  The range keeps the
    eigenvalues above ``rank_tol * scale``; ``scale`` defaults to
    ``λ_max(rho)`` (see ``eps_rank``).

    Raises
    ------
    NotPSD
        An eigenvalue lies below ``-1e-9 * scale``.
    NotInRange
        ``v`` leaves the range by more than ``range_tol``.
    """
    rho = as_matrix(rho)
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != rho.shape[0]:
        raise ShapeError(f"vector length {v.size} does not match operator {rho.shape}")
    w_all, vecs = hermitian_eigensystem(rho)
    top = max(float(w_all[-1]), 0.0) if scale is None else float(scale)
    if float(w_all[0]) < -PSD_SLACK * top:
        raise NotPSD(f"psd_subtraction_weight needs a positive semidefinite operator "
                     f"(minimum eigenvalue {w_all[0]:.3e})")
    keep = w_all > rank_tol * top
    u, w = vecs[:, keep], w_all[keep]
    coeffs = u.conj().T @ v
    outside = float(np.linalg.norm(v - u @ coeffs))
    if w.size == 0 or outside > range_tol * max(1.0, float(np.linalg.norm(v))):
        raise NotInRange(f"range-membership residual {outside:.3e} exceeds {range_tol}")
    return float(1.0 / np.sum(np.abs(coeffs) ** 2 / w))

"""The symmetric (bosonic) subspace of (C^n)^{⊗k}.

Basis vectors are labelled by occupation vectors ``(m_0, ..., m_{n-1})``
with ``Σ m_i = k``, listed in lexicographically descending order.  That
order is fixed: the symmetric-basis file format depends on it.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import NotSymmetricSupport, ShapeError, SizeLimit
from .linalg import INT64_MAX, SystemShape, as_matrix, check_dim

SUPPORT_TOL = 1e-9
PERMUTATION_SUM_MAX = 120


def bosonic_dim(n: int, k: int) -> int:
    """Dimension ``C(n+k-1, k)`` of the symmetric subspace."""
    if n < 1 or k < 0:
        raise ShapeError(f"bosonic_dim needs n >= 1 and k >= 0, got n={n}, k={k}")
    dim = math.comb(n + k - 1, k)
    if dim > INT64_MAX:
        raise SizeLimit(f"symmetric dimension for n={n}, k={k} overflows 64 bits")
    return dim


def _compositions(n, k):
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(n - 1, k - first):
            yield (first,) + rest


def occupation_basis(n: int, k: int) -> list:
    """All occupation vectors for ``k`` bosons in ``n`` modes, descending."""
    check_dim(bosonic_dim(n, k), "symmetric dimension")
    return list(_compositions(n, k))


@lru_cache(maxsize=None)
def _occupation_index(n, k):
    return {occ: i for i, occ in enumerate(occupation_basis(n, k))}


def _multinomial(occ):
    out = math.factorial(sum(occ))
    for m in occ:
        out //= math.factorial(m)
    return out


@lru_cache(maxsize=None)
def monomial_tables(n: int, k: int):
    """Exponent table and Dicke normalizations for ``f^{⊗k}``.

    The Dicke coordinates of ``f^{⊗k}`` are
    ``coef[m] * prod_j f[j] ** exps[m, j]``.
    """
    basis = occupation_basis(n, k)
    exps = np.array(basis, dtype=np.int_).reshape(len(basis), n)
    coef = np.sqrt([float(_multinomial(occ)) for occ in basis])
    exps.setflags(write=False)
    coef.setflags(write=False)
    return exps, coef


def product_coordinates(f, k: int) -> np.ndarray:
    """Dicke coordinates of ``f^{⊗k}`` (unit norm when ``f`` is)."""
    f = np.asarray(f, dtype=complex).ravel()
    exps, coef = monomial_tables(f.size, k)
    return coef * np.prod(f[None, :] ** exps, axis=1)


def _check_occ(occ, shape):
    occ = tuple(int(m) for m in occ)
    if len(occ) != shape.n or any(m < 0 for m in occ) or sum(occ) != shape.k:
        raise ShapeError(f"occupation {occ} is inconsistent with n={shape.n}, k={shape.k}")
    return occ


def _digits(shape):
    # digits[t, p] = local index of party p in flat index t (party 0 slowest)
    t = np.arange(shape.full_dim)
    powers = shape.n ** np.arange(shape.k - 1, -1, -1)
    return (t[:, None] // powers[None, :]) % shape.n


def dicke_vector(occ, shape: SystemShape) -> np.ndarray:
    occ = _check_occ(occ, shape)
    check_dim(shape.full_dim, "full dimension")
    counts = np.stack([(_digits(shape) == j).sum(axis=1) for j in range(shape.n)], axis=1)
    hit = np.all(counts == np.array(occ)[None, :], axis=1)
    vec = np.zeros(shape.full_dim, dtype=complex)
    vec[hit] = 1.0 / math.sqrt(_multinomial(occ))
    return vec


@dataclass(frozen=True)
class SymmetricIsometry:
    """``V`` maps symmetric coordinates into the full tensor space."""

    V: np.ndarray
    shape: SystemShape

    def compress(self, rho):
        return self.V.conj().T @ as_matrix(rho) @ self.V

    def expand(self, rho_sym):
        return self.V @ as_matrix(rho_sym) @ self.V.conj().T

    @property
    def projector(self):
        return self.V @ self.V.conj().T


@lru_cache(maxsize=32)
def _isometry_matrix(n, k):
    shape = SystemShape(n, k)
    check_dim(shape.full_dim, "full dimension")
    index = _occupation_index(n, k)
    digits = _digits(shape)
    counts = np.stack([(digits == j).sum(axis=1) for j in range(n)], axis=1)
    cols = np.array([index[tuple(row)] for row in counts.tolist()], dtype=np.int_)
    weights = np.array(
        [1.0 / math.sqrt(_multinomial(occ)) for occ in occupation_basis(n, k)]
    )
    V = np.zeros((shape.full_dim, shape.sym_dim), dtype=complex)
    V[np.arange(shape.full_dim), cols] = weights[cols]
    V.setflags(write=False)
    return V


def symmetric_isometry(shape: SystemShape) -> SymmetricIsometry:
    """Isometry whose columns are the Dicke vectors in basis order."""
    return SymmetricIsometry(_isometry_matrix(shape.n, shape.k), shape)


@lru_cache(maxsize=16)
def _first_party_isometry(n, k):
    W = np.kron(np.eye(n), _isometry_matrix(n, k - 1)) if k > 1 else np.eye(n, dtype=complex)
    W.setflags(write=False)
    return W


def first_party_isometry(shape: SystemShape) -> np.ndarray:
    """``I_n ⊗ V_{k-1}``: party 0 free, the remaining parties symmetric.

    Partial transposes on party 0 of symmetric states are supported here.
    """
    return _first_party_isometry(shape.n, shape.k)


def permutation_indices(shape: SystemShape, perm) -> np.ndarray:
    """Index map of the operator that moves tensor factor ``perm[p]`` to slot ``p``."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(shape.k)):
        raise ShapeError(f"{perm} is not a permutation of {shape.k} parties")
    digits = _digits(shape)
    powers = shape.n ** np.arange(shape.k - 1, -1, -1)
    return digits[:, perm] @ powers


def permutation_operator(shape: SystemShape, perm) -> np.ndarray:
    check_dim(shape.full_dim, "full dimension")
    U = np.zeros((shape.full_dim, shape.full_dim), dtype=complex)
    U[permutation_indices(shape, perm), np.arange(shape.full_dim)] = 1.0
    return U


def symmetrizer_by_permutations(shape: SystemShape) -> np.ndarray:
    """``(1/k!) Σ_π U_π`` accumulated index-wise."""
    check_dim(shape.full_dim, "full dimension")
    d = shape.full_dim
    acc = np.zeros((d, d), dtype=float)
    cols = np.arange(d)
    for perm in permutations(range(shape.k)):
        acc[permutation_indices(shape, perm), cols] += 1.0
    return (acc / math.factorial(shape.k)).astype(complex)


def symmetrizer(shape: SystemShape) -> np.ndarray:
    """Orthogonal projector onto the symmetric subspace."""
    if math.factorial(shape.k) <= PERMUTATION_SUM_MAX:
        return symmetrizer_by_permutations(shape)
    return symmetric_isometry(shape).projector


def symmetric_support_residual(rho, shape: SystemShape) -> float:
    """``‖PρP − ρ‖_F`` for the symmetrizer ``P``."""
    rho = as_matrix(rho)
    if rho.shape != (shape.full_dim, shape.full_dim):
        raise ShapeError(f"operator shape {rho.shape} does not match full dimension {shape.full_dim}")
    iso = symmetric_isometry(shape)
    return float(np.linalg.norm(iso.expand(iso.compress(rho)) - rho))


def compress(rho, shape: SystemShape, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Full-space operator to symmetric coordinates, ``V† ρ V``."""
    residual = symmetric_support_residual(rho, shape)
    if residual > tol:
        raise NotSymmetricSupport(f"support residual {residual:.3e} exceeds {tol}")
    return symmetric_isometry(shape).compress(rho)


def expand(rho_sym, shape: SystemShape) -> np.ndarray:
    """Symmetric coordinates back to the full space, ``V ρ V†``."""
    rho_sym = as_matrix(rho_sym)
    if rho_sym.shape != (shape.sym_dim, shape.sym_dim):
        raise ShapeError(f"operator shape {rho_sym.shape} does not match symmetric dimension {shape.sym_dim}")
    return symmetric_isometry(shape).expand(rho_sym)

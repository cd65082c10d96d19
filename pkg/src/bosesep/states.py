"""Named and random bosonic states.

Generators build states in symmetric (Dicke) coordinates and expand them to
the full tensor space on request.  With ``basis=None`` the full basis is
used up to three parties and the symmetric basis beyond that.

Randomness comes from ``Seed(master, stream)``, which maps to numpy's
PCG64 bit generator seeded by ``SeedSequence(master, spawn_key=(stream,))``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bosonic import (
    SUPPORT_TOL,
    expand,
    occupation_basis,
    product_coordinates,
    symmetric_isometry,
    symmetric_support_residual,
)
from .errors import NormError, NotSymmetricSupport, RankTooLarge, ShapeError
from .linalg import (
    HERMITIAN_TOL,
    PSD_SLACK,
    SystemShape,
    hermiticity_error,
    trace_distance,
)

BASES = ("full", "symmetric")
TRACE_TOL = 1e-9
UNIT_TOL = 1e-10
MAX_MIXTURE_TERMS = 4096
RNG_ALGORITHM = "numpy-PCG64/SeedSequence"


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise ValueError(f"seed {name} must be an unsigned 64-bit integer, got {value}")

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def describe(self) -> str:
        return f"{RNG_ALGORITHM}(master={self.master}, stream={self.stream})"


def _as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    if isinstance(seed, tuple):
        return Seed(*seed)
    return Seed(int(seed))


@dataclass
class Certificate:
    """Separable decomposition ``Σ_i p_i (|f_i⟩⟨f_i|)^{⊗k}``.

    ``vectors[i]`` is the local unit vector of term ``i``.
    """

    shape: SystemShape
    weights: np.ndarray
    vectors: np.ndarray
    trace_distance: Optional[float] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.vectors = np.asarray(self.vectors, dtype=complex).reshape(-1, self.shape.n)
        if self.weights.size != self.vectors.shape[0]:
            raise ShapeError("certificate needs one weight per vector")

    def __len__(self):
        return self.weights.size

    def reconstruct_sym(self) -> np.ndarray:
        d = self.shape.sym_dim
        if len(self) == 0:
            return np.zeros((d, d), dtype=complex)
        coords = np.stack([product_coordinates(f, self.shape.k) for f in self.vectors])
        return (coords.T * self.weights) @ coords.conj()

    def reconstruct(self, basis: str = "symmetric") -> np.ndarray:
        rho = self.reconstruct_sym()
        return expand(rho, self.shape) if basis == "full" else rho

    def distance_to(self, state: "StateRecord") -> float:
        return trace_distance(state.sym_matrix(), self.reconstruct_sym())


@dataclass
class StateRecord:
    shape: SystemShape
    basis: str
    matrix: np.ndarray
    provenance: str = ""
    certificate: Optional[Certificate] = field(default=None, repr=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise ShapeError(f"basis must be one of {BASES}, got {self.basis!r}")
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.shape.full_dim if self.basis == "full" else self.shape.sym_dim
        if self.matrix.shape != (dim, dim):
            raise ShapeError(
                f"{self.basis}-basis matrix for n={self.shape.n}, k={self.shape.k} "
                f"must be {dim}x{dim}, got {self.matrix.shape}"
            )

    def full_matrix(self) -> np.ndarray:
        if self.basis == "full":
            return self.matrix
        return expand(self.matrix, self.shape)

    def sym_matrix(self) -> np.ndarray:
        if self.basis == "symmetric":
            return self.matrix
        residual = symmetric_support_residual(self.matrix, self.shape)
        if residual > SUPPORT_TOL:
            raise NotSymmetricSupport(f"support residual {residual:.3e} exceeds {SUPPORT_TOL}")
        return symmetric_isometry(self.shape).compress(self.matrix)

    def in_basis(self, basis: str) -> "StateRecord":
        if basis == self.basis:
            return self
        matrix = self.full_matrix() if basis == "full" else self.sym_matrix()
        return StateRecord(self.shape, basis, matrix, self.provenance, self.certificate)

    def problems(self) -> list:
        """Violated state invariants, empty when the record is valid."""
        out = []
        rho = self.matrix
        if not np.all(np.isfinite(rho)):
            return ["matrix has non-finite entries"]
        herm = hermiticity_error(rho)
        if herm > HERMITIAN_TOL:
            out.append(f"not Hermitian (relative error {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            out.append(f"trace {tr.real:.12g}{tr.imag:+.3g}j differs from 1")
        w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        floor = -PSD_SLACK * max(1.0, float(w.max()))
        if w.min() < floor:
            out.append(f"not PSD (minimum eigenvalue {w.min():.3e})")
        if self.basis == "full":
            residual = symmetric_support_residual(rho, self.shape)
            if residual > SUPPORT_TOL:
                out.append(f"not supported on the symmetric subspace (residual {residual:.3e})")
        return out


def _default_basis(shape: SystemShape, basis):
    if basis is None:
        return "full" if shape.k <= 3 else "symmetric"
    if basis not in BASES:
        raise ShapeError(f"basis must be one of {BASES}, got {basis!r}")
    return basis


def _record(shape, rho_sym, provenance, basis, certificate=None):
    rho_sym = 0.5 * (rho_sym + rho_sym.conj().T)
    basis = _default_basis(shape, basis)
    if basis == "full":
        rho = expand(rho_sym, shape)
        rho = 0.5 * (rho + rho.conj().T)
    else:
        rho = rho_sym
    return StateRecord(shape, basis, rho, provenance, certificate)


def _pure(c):
    return np.outer(c, c.conj())


def _haar_vector(rng, dim):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def product_power(f, k: int, basis=None) -> StateRecord:
    """``(|f⟩⟨f|)^{⊗k}`` for a unit vector ``f``."""
    f = np.asarray(f, dtype=complex).ravel()
    norm = float(np.linalg.norm(f))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NormError(f"local vector must have unit norm, got {norm}")
    shape = SystemShape(f.size, k)
    cert = Certificate(shape, [1.0], [f], 0.0)
    return _record(shape, _pure(product_coordinates(f, k)), "product_power", basis, cert)


def ghz_like(n: int, k: int, basis=None) -> StateRecord:
    """Projector on ``Σ_i |i⟩^{⊗k} / √n``."""
    shape = SystemShape(n, k)
    if k < 2:
        raise ShapeError("ghz_like needs at least two parties")
    index = {occ: i for i, occ in enumerate(occupation_basis(n, k))}
    c = np.zeros(shape.sym_dim, dtype=complex)
    for i in range(n):
        occ = tuple(k if j == i else 0 for j in range(n))
        c[index[occ]] = 1.0 / np.sqrt(n)
    return _record(shape, _pure(c), f"ghz_like(n={n}, k={k})", basis)


def dicke_state(occ, shape: SystemShape, basis=None) -> StateRecord:
    occ = tuple(int(m) for m in occ)
    if len(occ) != shape.n or any(m < 0 for m in occ) or sum(occ) != shape.k:
        raise ShapeError(f"occupation {occ} is inconsistent with n={shape.n}, k={shape.k}")
    c = np.zeros(shape.sym_dim, dtype=complex)
    c[occupation_basis(shape.n, shape.k).index(occ)] = 1.0
    return _record(shape, _pure(c), f"dicke_state(occ={list(occ)})", basis)


def random_symmetric_pure(shape: SystemShape, seed, basis=None) -> StateRecord:
    seed = _as_seed(seed)
    c = _haar_vector(seed.rng(), shape.sym_dim)
    return _record(shape, _pure(c), f"random_symmetric_pure; {seed.describe()}", basis)


def random_separable_mixture(shape: SystemShape, r: int, seed, basis=None) -> StateRecord:
    """Dirichlet mixture of ``r`` Haar-random product powers.

    The construction itself is attached as ``record.certificate``.
    """
    if not 1 <= r <= MAX_MIXTURE_TERMS:
        raise ShapeError(f"number of terms must lie in [1, {MAX_MIXTURE_TERMS}], got {r}")
    seed = _as_seed(seed)
    rng = seed.rng()
    vectors = np.stack([_haar_vector(rng, shape.n) for _ in range(r)])
    weights = rng.dirichlet(np.ones(r))
    cert = Certificate(shape, weights, vectors, 0.0)
    provenance = f"random_separable_mixture(r={r}); {seed.describe()}"
    return _record(shape, cert.reconstruct_sym(), provenance, basis, cert)


def random_rank_r_symmetric(shape: SystemShape, r: int, seed, basis=None) -> StateRecord:
    """Dirichlet mixture of ``r`` random symmetric pure states."""
    if r < 1:
        raise ShapeError(f"rank must be positive, got {r}")
    if r > shape.sym_dim:
        raise RankTooLarge(f"rank {r} exceeds the symmetric dimension {shape.sym_dim}")
    seed = _as_seed(seed)
    rng = seed.rng()
    coords = np.stack([_haar_vector(rng, shape.sym_dim) for _ in range(r)])
    weights = rng.dirichlet(np.ones(r))
    rho = (coords.T * weights) @ coords.conj()
    provenance = f"random_rank_r_symmetric(r={r}); {seed.describe()}"
    return _record(shape, rho, provenance, basis)

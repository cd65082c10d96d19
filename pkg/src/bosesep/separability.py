"""PPT testing, rank-threshold classification and separable certificates.

Rank thresholds for a PPT state supported on the symmetric subspace of k
copies of C^n, below or at which the state is separable:

=========  ==================  ===================================
rule       shapes              threshold
=========  ==================  ===================================
R-T1       k = 3, n >= 3       n**2
R-T2       k >= 4, n >= 3      dim Sym^{k-1}(C^n)
R-2B       k = 2               max(n, n(n+1)/2 - 2)
R-3Q       n = 2, k = 3        4 (the full symmetric dimension)
R-KQ       n = 2, k >= 4       k (everything but maximal rank)
=========  ==================  ===================================

The tests are one-sided.  A PPT state above its threshold is reported as
Undetermined together with the rank window where bound entanglement could
still occur; nothing here ever asserts bound entanglement.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .bosonic import (
    bosonic_dim,
    first_party_isometry,
    monomial_tables,
    product_coordinates,
    symmetric_isometry,
)
from .errors import (
    ExtractionFailed,
    NotInRange,
    NotPSD,
    PreconditionFailed,
    Unsupported,
)
from .linalg import (
    PSD_SLACK,
    RANK_TOL,
    SystemShape,
    as_matrix,
    hermitian_eigenvalues,
    partial_transpose,
    psd_subtraction_weight,
    range_basis,
    rank_from_spectrum,
    realign,
    trace_distance,
    trace_norm,
)
from .states import Certificate, Seed, StateRecord, _as_seed, _haar_vector

__all__ = [
    "Certificate",
    "PPTResult",
    "ProductSearch",
    "RankWindow",
    "Rule",
    "SeparabilityReport",
    "Verdict",
    "bound_window",
    "ccnr_value",
    "classify",
    "extract_certificate",
    "find_symmetric_product_in_range",
    "ppt_check",
    "pt_spectrum",
    "rank_threshold",
]

PRODUCT_TOL = 1e-8
CCNR_TOL = 1e-8
CERTIFICATE_TOL = 1e-7
RESIDUAL_TRACE_TOL = 1e-9


class Verdict(str, Enum):
    SEPARABLE = "Separable"
    ENTANGLED_NPT = "EntangledNPT"
    UNDETERMINED = "Undetermined"
    INVALID_INPUT = "InvalidInput"


class Rule(str, Enum):
    T1 = "R-T1"
    T2 = "R-T2"
    TWO_BOSONS = "R-2B"
    THREE_QUBITS = "R-3Q"
    K_QUBITS = "R-KQ"
    NPT = "R-NPT"
    NONE = "R-NONE"


CITED_NOTE = "threshold taken from a published background result; no independent proof in bosesep"

RULE_NOTES = {
    Rule.T1: "three parties: PPT with rank <= n^2 is separable",
    Rule.T2: "k >= 4 parties: PPT with rank <= dim Sym^(k-1)(C^n) is separable",
    Rule.TWO_BOSONS: "two bosons: PPT with rank n or n(n+1)/2-2 is separable; " + CITED_NOTE,
    Rule.THREE_QUBITS: "three qubits: every symmetric PPT state is separable; " + CITED_NOTE,
    Rule.K_QUBITS: "k >= 4 qubits: PPT below maximal rank is separable; " + CITED_NOTE,
}


class PPTResult(NamedTuple):
    cut: tuple
    min_eigenvalue: float
    passed: bool


@dataclass(frozen=True)
class RankWindow:
    """Inclusive rank range ``[lo, hi]`` where PPT entanglement is not excluded."""

    lo: int
    hi: int
    shape: SystemShape

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __contains__(self, rank) -> bool:
        return self.lo <= rank <= self.hi

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n": self.shape.n, "k": self.shape.k}


@dataclass
class SeparabilityReport:
    verdict: Verdict
    rule_fired: Rule
    rank: int
    min_pt_eigenvalue_per_cut: list
    threshold_used: int
    notes: str = ""
    window: Optional[RankWindow] = None
    shape: Optional[SystemShape] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "rule_fired": self.rule_fired.value,
            "rank": self.rank,
            "min_pt_eigenvalue_per_cut": [float(x) for x in self.min_pt_eigenvalue_per_cut],
            "threshold_used": self.threshold_used,
            "notes": self.notes,
        }


def _single_cuts(k):
    return [(p,) for p in range(k)]


def pt_spectrum(state: StateRecord, cut) -> np.ndarray:
    """Ascending eigenvalues of the partial transpose over ``cut``."""
    pt = partial_transpose(state.full_matrix(), state.shape, cut)
    return np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))


def ppt_check(state: StateRecord, cuts=None) -> list:
    """Minimum partial-transpose eigenvalue and pass flag for every cut.

    ``cuts`` defaults to every single party.
    """
    if cuts is None:
        cuts = _single_cuts(state.shape.k)
    out = []
    for cut in cuts:
        cut = tuple(sorted(int(p) for p in cut))
        w = pt_spectrum(state, cut)
        lam_min = float(w[0])
        passed = lam_min >= -PSD_SLACK * max(1.0, float(w[-1]))
        out.append(PPTResult(cut, lam_min, passed))
    return out


def rank_threshold(shape: SystemShape):
    """Largest rank at which PPT implies separability, with the rule used."""
    n, k = shape.n, shape.k
    if k < 2:
        raise Unsupported("rank thresholds need at least two parties")
    if k == 2:
        return max(n, n * (n + 1) // 2 - 2), Rule.TWO_BOSONS
    if n == 2:
        if k == 3:
            return shape.sym_dim, Rule.THREE_QUBITS
        return shape.sym_dim - 1, Rule.K_QUBITS
    if k == 3:
        return n * n, Rule.T1
    return bosonic_dim(n, k - 1), Rule.T2


def bound_window(shape: SystemShape) -> RankWindow:
    threshold, _ = rank_threshold(shape)
    return RankWindow(threshold + 1, shape.sym_dim, shape)


def _window_note(shape, window):
    note = f"PPT above the separability threshold; bound entanglement would need rank in [{window.lo},{window.hi}]"
    if shape.k >= 4 and shape.n >= 3:
        note += (
            f"; some statements of this window start at dim Sym^{shape.k - 1} = {window.lo - 1}, "
            f"but that rank is itself covered by the threshold"
        )
    return note


def classify(state: StateRecord) -> SeparabilityReport:
    """Run the verdict pipeline: validity, support, PPT, rank threshold."""
    shape = state.shape
    problems = state.problems()
    if problems:
        return SeparabilityReport(
            Verdict.INVALID_INPUT, Rule.NONE, 0, [], 0, "; ".join(problems), shape=shape
        )
    rho = state.sym_matrix()
    rank = rank_from_spectrum(hermitian_eigenvalues(0.5 * (rho + rho.conj().T)))

    if shape.k == 1:
        return SeparabilityReport(
            Verdict.SEPARABLE, Rule.NONE, rank, [], shape.n,
            "single party: every state is trivially separable", shape=shape,
        )

    threshold, rule = rank_threshold(shape)
    checks = ppt_check(state)
    mins = [c.min_eigenvalue for c in checks]
    failed = [c.cut for c in checks if not c.passed]
    if failed:
        return SeparabilityReport(
            Verdict.ENTANGLED_NPT, Rule.NPT, rank, mins, threshold,
            f"negative partial transpose on cuts {[list(c) for c in failed]}", shape=shape,
        )
    if rank <= threshold:
        return SeparabilityReport(
            Verdict.SEPARABLE, rule, rank, mins, threshold, RULE_NOTES[rule], shape=shape
        )
    window = bound_window(shape)
    return SeparabilityReport(
        Verdict.UNDETERMINED, Rule.NONE, rank, mins, threshold,
        _window_note(shape, window), window=window, shape=shape,
    )


class ProductSearch(NamedTuple):
    vector: np.ndarray
    overlap: float
    found: bool
    iterations: int


def _to_sym(q, shape):
    q = as_matrix(q)
    if q.shape == (shape.sym_dim, shape.sym_dim):
        return q
    if q.shape == (shape.full_dim, shape.full_dim):
        return symmetric_isometry(shape).compress(q)
    raise ValueError(f"projector shape {q.shape} fits neither basis of n={shape.n}, k={shape.k}")


def _km1_tables(shape):
    if shape.k == 1:
        return np.zeros((1, shape.n), dtype=np.int_), np.ones(1)
    return monomial_tables(shape.n, shape.k - 1)


def find_symmetric_product_in_range(
    q,
    shape: SystemShape,
    seed=0,
    restarts: int = 64,
    max_iter: int = 500,
    g_tol: float = 1e-12,
    pt_range=None,
    polish_iter: int = 0,
    step_tol: float = 1e-14,
) -> ProductSearch:
    """Multi-start power iteration for ``max_f ⟨f^{⊗k}|Q|f^{⊗k}⟩``.

    Parameters
    ----------
    q : array
        Range projector, in symmetric coordinates or in the full space.
    seed : int, tuple or Seed
        Restarts are Haar-random and drawn in order from this seed; ties
        keep the earliest restart.
    pt_range : array, optional
        Projector on ``C^n ⊗ Sym^{k-1}`` (see ``first_party_isometry``).
        When given, the objective averages in
        ``⟨f̄ ⊗ f^{⊗(k-1)}|pt_range|f̄ ⊗ f^{⊗(k-1)}⟩`` so that only product
        vectors whose partial conjugate lies in that range score 1.
    polish_iter : int
        Extra iterations on the winning restart, stopped once the iterate
        moves less than ``step_tol``.

    Returns
    -------
    ProductSearch
        ``found`` is False when the best overlap is below ``1 - 1e-8``.
    """
    q_sym = _to_sym(q, shape)
    exps, coef = monomial_tables(shape.n, shape.k)
    exps1, coef1 = _km1_tables(shape)
    rng = _as_seed(seed).rng()
    starts = np.stack([_haar_vector(rng, shape.n) for _ in range(restarts)])
    q_pt = None if pt_range is None else np.ascontiguousarray(pt_range, dtype=complex)
    f, g, iters = _kernels.ascend(
        q_sym, q_pt, exps, coef, exps1, coef1, starts, max_iter, g_tol, np.inf, 0.0
    )
    best = int(np.argmax(g))
    vec, overlap, used = f[best], float(g[best]), int(iters[best])
    if polish_iter > 0:
        f2, g2, it2 = _kernels.ascend(
            q_sym, q_pt, exps, coef, exps1, coef1, vec[None, :], polish_iter, np.inf, step_tol, 0.0
        )
        vec, overlap, used = f2[0], float(g2[0]), used + int(it2[0])
    # fix the global phase: largest component real and positive
    j = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[j]) / vec[j])
    return ProductSearch(vec, overlap, overlap >= 1.0 - PRODUCT_TOL, used)


def _pt_range_projector(rho_sym, shape):
    iso = symmetric_isometry(shape)
    pt = partial_transpose(iso.expand(rho_sym), shape, [0])
    W = first_party_isometry(shape)
    pt_small = W.conj().T @ pt @ W
    u, _ = range_basis(0.5 * (pt_small + pt_small.conj().T))
    return u @ u.conj().T


def _spectral_certificate(rho, shape):
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    keep = w > RANK_TOL * max(float(w.max()), 0.0)
    return w[keep], v[:, keep].T


def extract_certificate(
    state: StateRecord,
    seed=0,
    force: bool = False,
    restarts: int = 64,
    max_iter: int = 500,
    polish_iter: int = 5000,
    tol: float = CERTIFICATE_TOL,
    max_terms: Optional[int] = None,
) -> Certificate:
    """Greedy separable decomposition ``ρ ≈ Σ p_i (|f_i⟩⟨f_i|)^{⊗k}``.

    Each step searches the current residual's range for a product power
    whose partial conjugate also lies in the range of the residual's
    partial transpose, removes the largest PSD-preserving multiple of it,
    and repeats until the residual trace drops below 1e-9.

    Raises
    ------
    PreconditionFailed
        The state is not classified Separable and ``force`` is False, or it
        is not a valid symmetric state at all.
    ExtractionFailed
        Some step found no product vector, or the final reconstruction is
        farther than ``tol`` in trace distance.  This says nothing about
        whether the state is separable.
    """
    report = classify(state)
    if report.verdict is Verdict.INVALID_INPUT:
        raise PreconditionFailed(f"invalid state: {report.notes}")
    if report.verdict is not Verdict.SEPARABLE and not force:
        raise PreconditionFailed(f"state classified {report.verdict.value}; pass force=True to try anyway")
    shape = state.shape
    rho = state.sym_matrix()
    rho = 0.5 * (rho + rho.conj().T)
    seed = _as_seed(seed)
    if max_terms is None:
        max_terms = 4 * shape.sym_dim

    if shape.k == 1:
        weights, vectors = _spectral_certificate(rho, shape)
        cert = Certificate(shape, weights / weights.sum(), vectors)
        cert.trace_distance = trace_distance(rho, cert.reconstruct_sym())
        return cert

    residual = rho.copy()
    weights, vectors = [], []
    # Ranks of residuals are measured against the input's scale: once the
    # last term is removed only round-off remains, and a threshold relative
    # to round-off would count it as rank.
    scale = float(np.linalg.eigvalsh(rho)[-1])
    rank = rank_from_spectrum(np.linalg.eigvalsh(residual), scale=scale)

    def fail(msg):
        return ExtractionFailed(msg, list(zip(weights, vectors)), float(np.trace(residual).real))

    for step in range(max_terms):
        if np.trace(residual).real < RESIDUAL_TRACE_TOL or rank == 0:
            break
        u = _range_at_scale(residual, scale)
        q_sym = u @ u.conj().T
        q_pt = _pt_range_projector(residual, shape)
        search = find_symmetric_product_in_range(
            q_sym, shape, Seed(seed.master, (seed.stream + step) % 2**64),
            restarts=restarts, max_iter=max_iter, pt_range=q_pt, polish_iter=polish_iter,
        )
        if not search.found:
            raise fail(f"no product vector in range at step {step} (best overlap {search.overlap:.12f})")
        c = product_coordinates(search.vector, shape.k)
        try:
            lam = psd_subtraction_weight(residual, c, scale=scale)
        except (NotInRange, NotPSD) as exc:
            raise fail(f"subtraction failed at step {step}: {exc}") from exc
        nxt = residual - lam * np.outer(c, c.conj())
        nxt = 0.5 * (nxt + nxt.conj().T)
        try:
            new_rank = rank_from_spectrum(np.linalg.eigvalsh(nxt), scale=scale)
        except NotPSD as exc:
            raise fail(f"residual lost positivity at step {step}: {exc}") from exc
        if new_rank != rank - 1:
            raise fail(f"subtraction changed rank {rank} -> {new_rank} at step {step}")
        weights.append(lam)
        vectors.append(search.vector)
        residual, rank = nxt, new_rank
    else:
        raise fail(f"term budget {max_terms} exhausted")

    w = np.array(weights)
    cert = Certificate(shape, w / w.sum(), np.array(vectors).reshape(-1, shape.n))
    cert.trace_distance = trace_distance(rho, cert.reconstruct_sym())
    if cert.trace_distance > tol:
        raise fail(f"reconstruction trace distance {cert.trace_distance:.3e} exceeds {tol}")
    return cert


def _range_at_scale(rho, scale):
    w, v = np.linalg.eigh(rho)
    return v[:, w > RANK_TOL * scale]


def ccnr_value(state: StateRecord, cut) -> float:
    """Trace norm of the realignment across ``cut`` | complement.

    Values above ``1 + 1e-8`` certify entanglement.
    """
    return trace_norm(realign(state.full_matrix(), state.shape, cut))


def ccnr_flags(values) -> bool:
    return any(v > 1.0 + CCNR_TOL for v in values)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosesep.errors import NotHermitian, NotInRange, NotPSD, ShapeError, SizeLimit
from bosesep.linalg import (
    SystemShape,
    eps_rank,
    hermitian_eigensystem,
    kron,
    partial_trace,
    partial_transpose,
    psd_subtraction_weight,
    realign,
    schmidt_decompose,
    trace_norm,
)

from conftest import random_hermitian, random_psd


def basis_vec(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def ket(n, *digits):
    idx = 0
    for dgt in digits:
        idx = idx * n + dgt
    return basis_vec(n ** len(digits), idx)


def pt_bruteforce(rho, n, k, parties):
    """Elementwise definition: swap row/column digits of the listed parties."""
    d = n**k
    out = np.zeros_like(rho)
    for r in range(d):
        for c in range(d):
            rd = list(np.unravel_index(r, (n,) * k))
            cd = list(np.unravel_index(c, (n,) * k))
            for p in parties:
                rd[p], cd[p] = cd[p], rd[p]
            out[np.ravel_multi_index(rd, (n,) * k), np.ravel_multi_index(cd, (n,) * k)] = rho[r, c]
    return out


# --- SystemShape -----------------------------------------------------------

def test_shape_dims():
    s = SystemShape(3, 4)
    assert s.full_dim == 81
    assert s.sym_dim == 15


@pytest.mark.parametrize("n,k", [(1, 3), (3, 0), (2.5, 2)])
def test_shape_rejects(n, k):
    with pytest.raises(ShapeError):
        SystemShape(n, k)


# --- kron ------------------------------------------------------------------

def test_kron_identity_block_diagonal(rng):
    a = random_hermitian(rng, 3)
    out = kron(np.eye(2), a)
    assert np.array_equal(out[:3, :3], a)
    assert np.array_equal(out[3:, 3:], a)
    assert not np.any(out[:3, 3:])


def test_kron_scalar_identity(rng):
    a = random_hermitian(rng, 4)
    assert np.array_equal(kron(a, np.eye(1)), a)


def test_kron_diagonals():
    out = kron(np.diag([1, 2]), np.diag([3, 4]))
    assert np.array_equal(out, np.diag([3, 4, 6, 8]).astype(complex))


def test_kron_index_formula(rng):
    a = rng.standard_normal((2, 3)) + 1j
    b = rng.standard_normal((4, 2))
    out = kron(a, b)
    for i in range(2):
        for j in range(3):
            for p in range(4):
                for q in range(2):
                    assert out[i * 4 + p, j * 2 + q] == a[i, j] * b[p, q]


def test_kron_size_limit(monkeypatch):
    monkeypatch.setenv("BOSESEP_MAX_DIM", "8")
    with pytest.raises(SizeLimit):
        kron(np.eye(3), np.eye(3))


# --- eigensystem and rank --------------------------------------------------

def test_eigensystem_identity():
    w, _ = hermitian_eigensystem(np.eye(5))
    assert np.allclose(w, 1.0)


def test_eigensystem_diagonal_ascending():
    w, _ = hermitian_eigensystem(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])


def test_eigensystem_pauli_x():
    w, _ = hermitian_eigensystem([[0, 1], [1, 0]])
    assert np.allclose(w, [-1, 1], atol=1e-15)


def test_eigensystem_contract(rng):
    a = random_hermitian(rng, 30)
    w, v = hermitian_eigensystem(a)
    scale = max(1.0, np.linalg.norm(a))
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(v.conj().T @ v - np.eye(30)) < 1e-10
    for j in range(30):
        assert np.linalg.norm(a @ v[:, j] - w[j] * v[:, j]) <= 1e-10 * scale
    assert np.linalg.norm(a - (v * w) @ v.conj().T) <= 1e-9 * scale


def test_eigensystem_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eigensystem([[0, 1], [0, 0]])


def test_eps_rank_examples():
    assert eps_rank(np.zeros((4, 4))) == 0
    assert eps_rank(np.eye(10) / 10) == 10
    rho = sum(np.outer(ket(3, i, i, i), ket(3, i, i, i)) for i in range(3)) / 3
    assert eps_rank(rho) == 3


def test_eps_rank_reference_scale():
    noise = np.diag([1e-17, 0.0])
    assert eps_rank(noise) == 1
    assert eps_rank(noise, scale=1.0) == 0
    assert eps_rank(np.diag([1.0, 1e-12]), scale=0.05) == 1


def test_eps_rank_rejects_negative():
    with pytest.raises(NotPSD):
        eps_rank(np.diag([1.0, -0.1]))


# --- partial trace ---------------------------------------------------------

def test_partial_trace_product(rng):
    shape = SystemShape(3, 2)
    a, b = random_psd(rng, 3, 3), random_psd(rng, 3, 2)
    out = partial_trace(np.kron(a, b), shape, [0])
    assert np.allclose(out, np.trace(a) * b)


def test_partial_trace_everything(rng):
    shape = SystemShape(2, 3)
    rho = random_psd(rng, 8, 8)
    out = partial_trace(rho, shape, [0, 1, 2])
    assert out.shape == (1, 1)
    assert np.isclose(out[0, 0], np.trace(rho))


def test_partial_trace_ghz_qutrits():
    shape = SystemShape(3, 3)
    psi = sum(ket(3, i, i, i) for i in range(3)) / np.sqrt(3)
    rho = np.outer(psi, psi.conj())
    # index contraction by hand: Tr_A |iii><jjj| = δ_ij |ii><jj|
    expected = sum(np.outer(ket(3, i, i), ket(3, i, i)) for i in range(3)) / 3
    assert np.allclose(partial_trace(rho, shape, [0]), expected, atol=1e-15)


def test_partial_trace_middle_party_loop(rng):
    shape = SystemShape(2, 3)
    rho = random_hermitian(rng, 8)
    t = rho.reshape(2, 2, 2, 2, 2, 2)
    expected = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for c in range(2):
            for a2 in range(2):
                for c2 in range(2):
                    expected[a * 2 + c, a2 * 2 + c2] = sum(t[a, b, c, a2, b, c2] for b in range(2))
    assert np.allclose(partial_trace(rho, shape, [1]), expected)


def test_partial_trace_bad_party():
    with pytest.raises(IndexError):
        partial_trace(np.eye(4), SystemShape(2, 2), [2])


def test_partial_trace_preserves_trace_1000(rng):
    shape = SystemShape(2, 3)
    for i in range(1000):
        rho = random_hermitian(rng, 8)
        parties = [p for p in range(3) if (i >> p) & 1] or [i % 3]
        assert abs(np.trace(partial_trace(rho, shape, parties)) - np.trace(rho)) <= 1e-12 * max(
            1.0, abs(np.trace(rho))
        ) * 10


# --- partial transpose -----------------------------------------------------

def test_pt_diagonal_fixed(rng):
    rho = np.diag(rng.random(27)).astype(complex)
    assert np.array_equal(partial_transpose(rho, SystemShape(3, 3), [1]), rho)


def test_pt_matches_bruteforce(rng):
    rho = random_hermitian(rng, 12)
    for n, k in [(2, 2), (3, 2)]:
        shape = SystemShape(n, k)
        m = random_hermitian(rng, shape.full_dim)
        for parties in ([0], [1], [0, 1]):
            assert np.array_equal(partial_transpose(m, shape, parties), pt_bruteforce(m, n, k, parties))
    shape = SystemShape(2, 3)
    m = random_hermitian(rng, 8)
    for parties in ([0], [2], [0, 2]):
        assert np.array_equal(partial_transpose(m, shape, parties), pt_bruteforce(m, 2, 3, parties))


def test_pt_bell_min_eigenvalue():
    psi = (ket(2, 0, 0) + ket(2, 1, 1)) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    pt = partial_transpose(rho, SystemShape(2, 2), [0])
    # by hand: 0.5 * SWAP, eigenvalues {-1/2, 1/2, 1/2, 1/2}
    assert np.allclose(pt, 0.5 * np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))
    assert np.isclose(np.linalg.eigvalsh(pt)[0], -0.5)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mask=st.integers(1, 7))
def test_pt_involution_bit_exact(seed, mask):
    rng = np.random.default_rng(seed)
    shape = SystemShape(2, 3)
    rho = random_hermitian(rng, 8)
    parties = [p for p in range(3) if (mask >> p) & 1]
    once = partial_transpose(rho, shape, parties)
    assert np.array_equal(partial_transpose(once, shape, parties), rho)
    assert np.allclose(once, once.conj().T)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pt_spectrum_invariant_under_other_party_unitary(seed):
    rng = np.random.default_rng(seed)
    shape = SystemShape(2, 3)
    rho = random_psd(rng, 8, 4)
    rho /= np.trace(rho)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u, _ = np.linalg.qr(z)
    big = np.kron(np.eye(2), u)
    rotated = big @ rho @ big.conj().T
    w1 = np.linalg.eigvalsh(partial_transpose(rho, shape, [0]))
    w2 = np.linalg.eigvalsh(partial_transpose(rotated, shape, [0]))
    assert np.max(np.abs(w1 - w2)) <= 1e-10


# --- Schmidt, trace norm, realignment --------------------------------------

def test_schmidt_product():
    s, _, _ = schmidt_decompose(ket(2, 0, 0), 2, 2)
    assert np.allclose(s, [1, 0])


def test_schmidt_bell():
    s, _, _ = schmidt_decompose((ket(2, 0, 0) + ket(2, 1, 1)) / np.sqrt(2), 2, 2)
    assert np.allclose(s, [2**-0.5, 2**-0.5])


def test_schmidt_already_in_form():
    a, b = 0.8, 0.6j
    s, _, _ = schmidt_decompose(a * ket(2, 0, 0) + b * ket(2, 1, 1), 2, 2)
    assert np.allclose(s, [0.8, 0.6])


def test_schmidt_length_mismatch():
    with pytest.raises(ShapeError):
        schmidt_decompose(np.ones(6) / np.sqrt(6), 2, 2)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), da=st.integers(1, 4), db=st.integers(1, 5))
def test_schmidt_reconstructs(seed, da, db):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(da * db) + 1j * rng.standard_normal(da * db)
    psi /= np.linalg.norm(psi)
    s, a, b = schmidt_decompose(psi, da, db)
    sv = np.linalg.svd(psi.reshape(da, db), compute_uv=False)
    assert np.max(np.abs(s - sv)) <= 1e-12
    assert np.all(np.diff(s) <= 0)
    assert abs(np.sum(s**2) - 1) <= 1e-10
    recon = sum(s[j] * np.kron(a[:, j], b[:, j]) for j in range(s.size))
    assert np.allclose(recon, psi)


def test_trace_norm_examples(rng):
    assert trace_norm(np.zeros((3, 3))) == 0.0
    u, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    assert np.isclose(trace_norm(u), 5.0)
    assert np.isclose(trace_norm(np.diag([1.0, -2.0])), 3.0)


def test_realign_index_rule(rng):
    shape = SystemShape(2, 2)
    rho = random_hermitian(rng, 4)
    r = realign(rho, shape, [0])
    t = rho.reshape(2, 2, 2, 2)
    for i in range(2):
        for j in range(2):
            for i2 in range(2):
                for j2 in range(2):
                    assert r[i * 2 + i2, j * 2 + j2] == t[i, j, i2, j2]


# --- PSD subtraction -------------------------------------------------------

def test_subtraction_pure():
    v = np.array([0.6, 0.8j])
    rho = np.outer(v, v.conj())
    lam = psd_subtraction_weight(rho, v)
    assert np.isclose(lam, 1.0)
    assert np.allclose(rho - lam * np.outer(v, v.conj()), 0)


def test_subtraction_diagonal():
    assert np.isclose(psd_subtraction_weight(np.diag([0.5, 0.5]), [1, 0]), 0.5)


def test_subtraction_two_term_mixture():
    v = np.array([1, 1j, 0]) / np.sqrt(2)
    w = np.array([1, -1j, 0]) / np.sqrt(2)
    rho = 2 / 3 * np.outer(v, v.conj()) + 1 / 3 * np.outer(w, w.conj())
    # pseudo-inverse on span{v, w} is (3/2)|v><v| + 3|w><w|, so <v|rho+|v> = 3/2
    assert np.isclose(psd_subtraction_weight(rho, v), 2 / 3)


def test_subtraction_not_in_range():
    with pytest.raises(NotInRange):
        psd_subtraction_weight(np.diag([1.0, 0.0]), [0.6, 0.8])


def test_subtraction_drops_rank_200(rng):
    for i in range(200):
        d = 3 + i % 8
        r = 1 + i % d
        rho = random_psd(rng, d, r)
        coeffs = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        w, vecs = np.linalg.eigh(rho)
        v = vecs[:, -r:] @ coeffs
        v /= np.linalg.norm(v)
        lam = psd_subtraction_weight(rho, v)
        out = rho - lam * np.outer(v, v.conj())
        assert eps_rank(0.5 * (out + out.conj().T), scale=w[-1]) == r - 1


def test_subtraction_tolerates_rounding_negatives():
    rho = np.diag([3e-5, 2e-5, -4e-15])
    assert np.isclose(psd_subtraction_weight(rho, [1, 0, 0], scale=0.5), 3e-5)
    with pytest.raises(NotPSD):
        psd_subtraction_weight(np.diag([1.0, -1e-6]), [1, 0])

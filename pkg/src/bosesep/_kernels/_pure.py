"""Pure numpy implementation of the product-vector ascent kernel.

Symmetric-tensor coordinates: for a unit ``f`` in C^n the Dicke coordinates
of ``f^{⊗k}`` are ``coef_m * prod_j f_j**m_j`` over the occupation table
``m``.  The objective is

    G(f) = ⟨c(f)|Q|c(f)⟩                                  (q_pt is None)
    G(f) = (⟨c(f)|Q|c(f)⟩ + ⟨x(f)|Q_pt|x(f)⟩) / 2          otherwise

where ``x(f) = conj(f) ⊗ d(f)`` and ``d(f)`` are the Dicke coordinates of
``f^{⊗(k-1)}``.  Each step replaces ``f`` by the normalized Wirtinger
gradient ``∂G/∂conj(f)`` plus ``shift * f``.
"""

import numpy as np


def _powers(f, kmax):
    # out[r, j, p] = f[r, j] ** p
    out = np.empty(f.shape + (kmax + 1,), dtype=complex)
    out[..., 0] = 1.0
    for p in range(1, kmax + 1):
        out[..., p] = out[..., p - 1] * f
    return out


def _monomials(pw, exps):
    n = exps.shape[1]
    return np.prod(pw[:, np.arange(n), exps], axis=2)


def _lowered(exps):
    """Exponent tables with one power of each variable removed.

    Returns ``(low, mult)`` with ``low[j] = exps - e_j`` (clipped at zero)
    and ``mult[j] = exps[:, j]``.
    """
    n = exps.shape[1]
    low = np.repeat(exps[None, :, :], n, axis=0)
    for j in range(n):
        low[j, :, j] = np.maximum(low[j, :, j] - 1, 0)
    mult = exps.T.astype(float)
    return low, mult


def _derivative_monomials(pw_conj, low, mult, coef):
    # D[r, j, m] = coef_m * m_j * conj(f)^(m - e_j)
    n = low.shape[0]
    out = np.empty((pw_conj.shape[0], n, low.shape[1]), dtype=complex)
    for j in range(n):
        out[:, j, :] = _monomials(pw_conj, low[j]) * (coef * mult[j])[None, :]
    return out


def evaluate(q_sym, q_pt, exps_k, coef_k, exps_km1, coef_km1, f):
    """Objective value and ascent direction for a batch ``f`` of shape (R, n)."""
    k = int(exps_k[0].sum())
    pw = _powers(f, k)
    pwc = pw.conj()
    c = coef_k[None, :] * _monomials(pw, exps_k)
    w = c @ q_sym.T
    g = np.einsum("rm,rm->r", c.conj(), w).real
    low, mult = _lowered(exps_k)
    grad = np.einsum("rjm,rm->rj", _derivative_monomials(pwc, low, mult, coef_k), w)
    if q_pt is None:
        return g, grad
    n = f.shape[1]
    s2 = exps_km1.shape[0]
    d = coef_km1[None, :] * _monomials(pw, exps_km1)
    x = (f.conj()[:, :, None] * d[:, None, :]).reshape(f.shape[0], n * s2)
    y = x @ q_pt.T
    g2 = np.einsum("ra,ra->r", x.conj(), y).real
    y = y.reshape(f.shape[0], n, s2)
    low1, mult1 = _lowered(exps_km1)
    dm = _derivative_monomials(pwc, low1, mult1, coef_km1)
    grad_a = np.einsum("ra,rjm,ram->rj", f, dm, y)
    grad_b = np.einsum("rm,rjm->rj", d.conj(), y).conj()
    return 0.5 * (g + g2), 0.5 * (grad + grad_a + grad_b)


def ascend(q_sym, q_pt, exps_k, coef_k, exps_km1, coef_km1, f0,
           max_iter, g_tol, step_tol, shift):
    """Run the ascent independently from every row of ``f0``.

    A row stops once ``|ΔG| < g_tol`` and the phase-aligned step is below
    ``step_tol``, or after ``max_iter`` updates.  Returns ``(f, G, iters)``
    with ``G`` evaluated at the returned ``f``.
    """
    f = np.array(f0, dtype=complex, copy=True)
    f /= np.linalg.norm(f, axis=1, keepdims=True)
    n_rows = f.shape[0]
    iters = np.zeros(n_rows, dtype=np.int64)
    active = np.ones(n_rows, dtype=bool)
    g_prev = np.full(n_rows, -np.inf)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        fa = f[idx]
        g, grad = evaluate(q_sym, q_pt, exps_k, coef_k, exps_km1, coef_km1, fa)
        step = grad + shift * fa
        norms = np.linalg.norm(step, axis=1)
        dead = norms == 0.0
        norms[dead] = 1.0
        new = step / norms[:, None]
        new[dead] = fa[dead]
        overlap = np.einsum("rj,rj->r", new.conj(), fa)
        mag = np.abs(overlap)
        phase = np.where(mag > 0, overlap / np.where(mag > 0, mag, 1.0), 1.0)
        moved = np.linalg.norm(new * phase[:, None] - fa, axis=1)
        f[idx] = new
        iters[idx] += 1
        done = (np.abs(g - g_prev[idx]) < g_tol) & (moved < step_tol) | dead
        g_prev[idx] = g
        active[idx[done]] = False
    g, _ = evaluate(q_sym, q_pt, exps_k, coef_k, exps_km1, coef_km1, f)
    return f, g, iters

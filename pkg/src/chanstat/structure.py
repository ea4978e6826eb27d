"""Projection onto multilevel Toeplitz matrices and structure metrics.

For domain sizes ``(d_1, ..., d_q)`` a matrix of side ``M = prod(d)`` is
multilevel Toeplitz when entry ``(i, j)`` depends only on the per-domain lags
``i_k - j_k`` of the multi-indices of ``i`` and ``j`` (C order, last domain
fastest).  The orthogonal projection averages all entries sharing a lag
vector.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np


def _as_dims(dims) -> tuple[int, ...]:
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"domain sizes must be a nonempty list of positive ints, got {dims}")
    return dims


@lru_cache(maxsize=64)
def _lag_groups(dims: tuple[int, ...]):
    """Lag-vector id of every entry, its negated-lag id and group sizes."""
    idx = np.indices(dims).reshape(len(dims), -1)  # (q, M)
    lag_id = np.zeros((idx.shape[1], idx.shape[1]), dtype=np.int64)
    radix = 1
    for k, d in enumerate(dims):
        lag = idx[k][:, None] - idx[k][None, :] + d - 1  # in [0, 2d-2]
        lag_id = lag_id * (2 * d - 1) + lag
        radix *= 2 * d - 1
    n_groups = radix
    flat = lag_id.ravel()
    counts = np.bincount(flat, minlength=n_groups).astype(float)
    # id of the negated lag vector: every per-domain digit l -> 2(d-1) - l
    ids = np.arange(n_groups)
    neg = np.zeros(n_groups, dtype=np.int64)
    rem = ids.copy()
    mult = 1
    for d in reversed(dims):
        base = 2 * d - 1
        digit = rem % base
        rem //= base
        neg += (2 * (d - 1) - digit) * mult
        mult *= base
    flat.setflags(write=False)
    return flat, neg, counts


def multilevel_toeplitz_project(c, dims, hermitian: bool = False) -> np.ndarray:
    """Frobenius-orthogonal projection onto multilevel Toeplitz matrices.

    Parameters
    ----------
    c : array_like, shape (M, M) or (..., M, M)
        Matrix or stack of matrices.
    dims : int or sequence of int
        Domain sizes whose product is ``M``.
    hermitian : bool
        Project onto the Hermitian multilevel Toeplitz matrices instead, by
        also averaging lag ``t`` with the conjugate of lag ``-t``.
    """
    dims = _as_dims(dims)
    c = np.asarray(c)
    m = int(np.prod(dims))
    if c.ndim < 2 or c.shape[-1] != m or c.shape[-2] != m:
        raise ValueError(f"matrix shape {c.shape[-2:]} does not match domain sizes {dims}")
    flat, neg, counts = _lag_groups(dims)
    batch = c.shape[:-2]
    x = c.reshape(-1, m * m)
    out = np.empty(x.shape, dtype=np.result_type(x.dtype, float))
    for b in range(x.shape[0]):
        row = x[b]
        if np.iscomplexobj(row):
            s = np.bincount(flat, weights=row.real, minlength=counts.size) \
                + 1j * np.bincount(flat, weights=row.imag, minlength=counts.size)
        else:
            s = np.bincount(flat, weights=row, minlength=counts.size)
        means = s / np.maximum(counts, 1)
        if hermitian:
            means = 0.5 * (means + np.conj(means[neg]))
        out[b] = means[flat]
    return out.reshape(*batch, m, m)


def toeplitz_residual(c, dims, hermitian: bool = False) -> np.ndarray:
    """``c`` minus its multilevel Toeplitz projection."""
    c = np.asarray(c)
    return c - multilevel_toeplitz_project(c, dims, hermitian)


def structure_nmse(cs, dims, hermitian: bool = False) -> float:
    """Mean over matrices of ``||C - P(C)||_F^2 / ||C||_F^2``.

    ``cs`` is a sequence of matrices or an array of shape (n, M, M).
    """
    cs = np.asarray(cs)
    if cs.ndim == 2:
        cs = cs[None]
    if cs.ndim != 3 or cs.shape[0] == 0:
        raise ValueError("expected a nonempty batch of square matrices")
    norms = np.sum(np.abs(cs) ** 2, axis=(1, 2))
    if np.any(norms == 0):
        raise ValueError("structure nMSE is undefined for a zero matrix")
    res = np.sum(np.abs(toeplitz_residual(cs, dims, hermitian)) ** 2, axis=(1, 2))
    return float(np.mean(res / norms))


def zero_mean_mse(mus: Sequence) -> float:
    """Mean squared Euclidean norm of a batch of mean vectors."""
    mus = [np.asarray(mu) for mu in mus]
    if not mus:
        raise ValueError("empty list of mean vectors")
    if len({mu.shape for mu in mus}) != 1:
        raise ValueError("mean vectors must have equal lengths")
    return float(np.mean([np.vdot(mu, mu).real for mu in mus]))


def toeplitz_basis(dims) -> np.ndarray:
    """Indicator matrices of every lag vector, shape (n_lags, M, M).

    Spans the multilevel Toeplitz space; used as a least-squares oracle.
    """
    dims = _as_dims(dims)
    flat, _, counts = _lag_groups(dims)
    m = int(np.prod(dims))
    basis = np.zeros((counts.size, m * m))
    basis[flat, np.arange(m * m)] = 1.0
    return basis.reshape(-1, m, m)

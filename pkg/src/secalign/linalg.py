"""Small complex linear-algebra helpers used throughout the package.

Everything here operates on complex128 arrays and follows two conventions
that make results reproducible:

* eigen/singular vectors are phase-normalized so that their first
  significantly nonzero component is real and positive;
* numerical rank uses the relative threshold
  ``max(m, n) * sigma_max * RANK_RCOND``.
"""

from __future__ import annotations

import numpy as np

#: Relative singular-value threshold below which a direction counts as null.
RANK_RCOND = 1e-12

#: Relative eigenvalue gap under which the cut between kept and discarded
#: eigenvectors is considered degenerate (basis no longer unique).
DEGENERACY_RTOL = 1e-12

# Named sub-streams of the master seed, so channel realizations, filter
# initializations and Monte Carlo draws never overlap.
STREAM_CHANNEL = 0
STREAM_INIT = 1
STREAM_EVE = 2


def stream_rng(seed, *key):
    """Return a Generator on an independent sub-stream of ``seed``.

    ``key`` selects the stream (e.g. ``stream_rng(seed, STREAM_EVE, 3)``);
    distinct keys yield statistically independent streams of one master
    seed.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def complex_gaussian(rng, shape):
    """Draw i.i.d. CN(0, 1) entries (real/imag parts each N(0, 1/2))."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def fix_phase(v):
    """Rotate each column so its first nonzero component is real-positive.

    Accepts a vector or a matrix; returns a new array of the same shape.
    Components below ``1e-12`` of the column norm are treated as zero when
    locating the reference entry.
    """
    v = np.array(v, dtype=np.complex128, copy=True)
    cols = v[:, None] if v.ndim == 1 else v
    for j in range(cols.shape[1]):
        col = cols[:, j]
        norm = np.linalg.norm(col)
        if norm == 0.0:
            continue
        nz = np.flatnonzero(np.abs(col) > 1e-12 * norm)
        if nz.size:
            ref = col[nz[0]]
            cols[:, j] = col * (np.conj(ref) / abs(ref))
    return cols[:, 0] if v.ndim == 1 else cols


def least_dominant_eigvecs(gram, m):
    """Eigen-decompose a Hermitian matrix and keep the ``m`` smallest modes.

    Parameters
    ----------
    gram : (n, n) complex Hermitian ndarray
    m : int
        Number of least-dominant eigenvectors to return.

    Returns
    -------
    eigvals : (n,) ndarray
        All eigenvalues in ascending order.
    vecs : (n, m) ndarray
        Phase-normalized eigenvectors of the ``m`` smallest eigenvalues, in
        the decomposition's natural (ascending) order.
    degenerate : bool
        True when the eigenvalue gap at the cut is negligible, i.e. the
        selected subspace is not uniquely determined.
    """
    eigvals, vecs = np.linalg.eigh(gram)
    n = eigvals.shape[0]
    if not 0 < m <= n:
        raise ValueError(f"cannot take {m} eigenvectors from a {n}x{n} matrix")
    degenerate = False
    if m < n:
        scale = max(abs(eigvals[-1]), 1.0)
        degenerate = bool((eigvals[m] - eigvals[m - 1]) <= DEGENERACY_RTOL * scale)
    return eigvals, fix_phase(vecs[:, :m]), degenerate


def numerical_rank(singular_values, shape):
    """Rank per the package-wide relative threshold."""
    s = np.asarray(singular_values)
    if s.size == 0:
        return 0
    tol = max(shape) * s[0] * RANK_RCOND
    return int(np.sum(s > tol))


def null_space_basis(a):
    """Orthonormal basis of ``null(a)``, phase-normalized column by column.

    A matrix with zero rows is treated as the zero map, so the basis is the
    identity.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(a)
    rank = numerical_rank(s, a.shape)
    return fix_phase(vh[rank:].conj().T)


def random_unit_vector(rng, n):
    v = complex_gaussian(rng, n)
    return v / np.linalg.norm(v)


def random_orthonormal(rng, n, m):
    """Random n x m matrix with orthonormal columns (Haar-ish via QR)."""
    q, _ = np.linalg.qr(complex_gaussian(rng, (n, m)))
    return np.ascontiguousarray(q[:, :m])

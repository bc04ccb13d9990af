"""Pure-numpy implementation of the alternating-minimization inner loops.

This is the fallback backend; ``secalign._kernels`` is the compiled
equivalent with identical semantics. Both expose ``lm_alternate`` and
``meb_alternate`` returning
``(Wa, ub_or_None, Uk, trace, iterations, converged, degenerate)``.

The loops deliberately avoid any convergence heuristics beyond the
absolute leakage-change test: each iteration performs the exact eigenvector
updates, then records the objective evaluated with the freshly updated
receive filters.
"""

from __future__ import annotations

import os

import numpy as np

from .linalg import least_dominant_eigvecs

BACKEND = "python"

#: Debug mode: re-verify filter unitarity after every iteration. Costs a
#: few matrix products per step, so it is opt-in (SECALIGN_DEBUG=1).
DEBUG_CHECKS = bool(os.environ.get("SECALIGN_DEBUG"))


def _leakage_from_eigvals(eigvals, count):
    """Sum of the ``count`` smallest eigenvalues, clamped at zero."""
    return float(np.sum(np.maximum(eigvals[:count], 0.0)))


def _check_unitary(iteration, **filters):
    for name, mat in filters.items():
        mat = np.atleast_2d(np.asarray(mat)).reshape(-1, 1) if np.asarray(mat).ndim == 1 else mat
        gram = mat.conj().T @ mat
        err = np.linalg.norm(gram - np.eye(mat.shape[1]))
        if err > 1e-10:
            raise AssertionError(
                f"iteration {iteration}: {name} lost unitarity (error {err:.3e})"
            )


def lm_alternate(Hba, Hka, dks, ub0, Uk0, da, max_iterations, tol):
    """Leakage-minimizing alternation over (Wa) and (ub, Uk).

    Per iteration: Wa becomes the ``da`` least-dominant eigenvectors of
    M^H M, then ub / Uk become the least-dominant eigenvectors of the
    receive-side Gram matrices built from the new Wa. The recorded trace
    entry is the total leakage with the updated receive filters, which is
    nonincreasing across iterations.
    """
    K = len(Hka)
    ub = np.asarray(ub0, dtype=np.complex128)
    Uks = [np.asarray(u, dtype=np.complex128) for u in Uk0]
    trace = []
    degenerate = False
    converged = False
    Wa = None
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        rows = [(ub.conj() @ Hba)[None, :]]
        rows += [u.conj().T @ h for u, h in zip(Uks, Hka)]
        m = np.vstack(rows)
        gram = m.conj().T @ m
        _, Wa, deg = least_dominant_eigvecs(gram, da)
        degenerate = degenerate or deg

        fb = Hba @ Wa
        vals_b, vecs_b, deg = least_dominant_eigvecs(fb @ fb.conj().T, 1)
        degenerate = degenerate or deg
        ub = vecs_b[:, 0]
        leakage = _leakage_from_eigvals(vals_b, 1)
        for k in range(K):
            fk = Hka[k] @ Wa
            vals_k, vecs_k, deg = least_dominant_eigvecs(fk @ fk.conj().T, dks[k])
            degenerate = degenerate or deg
            Uks[k] = vecs_k
            leakage += _leakage_from_eigvals(vals_k, dks[k])
        trace.append(leakage)
        if DEBUG_CHECKS:
            _check_unitary(iterations, Wa=Wa, ub=ub, **{f"U{k + 1}": u for k, u in enumerate(Uks)})
        if len(trace) >= 2 and abs(trace[-2] - trace[-1]) < tol:
            converged = True
            break
    return Wa, ub, Uks, np.asarray(trace), iterations, converged, degenerate


def meb_alternate(m0, Hka, dks, va, Uk0, da, max_iterations, tol):
    """Alternation for the max-eigenmode variant: ub and va stay fixed.

    ``m0`` is the fixed first row ub^H Hba. The Uk update minimizes the
    combined leakage of the noise subspace and the beamforming direction,
    via the Gram matrix of Hka [Wa, va].
    """
    K = len(Hka)
    m0 = np.asarray(m0, dtype=np.complex128).reshape(1, -1)
    va = np.asarray(va, dtype=np.complex128)
    Uks = [np.asarray(u, dtype=np.complex128) for u in Uk0]
    trace = []
    degenerate = False
    converged = False
    Wa = None
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        rows = [m0] + [u.conj().T @ h for u, h in zip(Uks, Hka)]
        m = np.vstack(rows)
        gram = m.conj().T @ m
        _, Wa, deg = least_dominant_eigvecs(gram, da)
        degenerate = degenerate or deg

        leakage = float(np.linalg.norm(m0 @ Wa) ** 2)
        wv = np.hstack([Wa, va[:, None]])
        for k in range(K):
            fk = Hka[k] @ wv
            vals_k, vecs_k, deg = least_dominant_eigvecs(fk @ fk.conj().T, dks[k])
            degenerate = degenerate or deg
            Uks[k] = vecs_k
            leakage += _leakage_from_eigvals(vals_k, dks[k])
        trace.append(leakage)
        if DEBUG_CHECKS:
            _check_unitary(iterations, Wa=Wa, **{f"U{k + 1}": u for k, u in enumerate(Uks)})
        if len(trace) >= 2 and abs(trace[-2] - trace[-1]) < tol:
            converged = True
            break
    return Wa, None, Uks, np.asarray(trace), iterations, converged, degenerate

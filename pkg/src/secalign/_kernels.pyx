# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled alternation kernels.

Drop-in replacement for ``secalign._kernels_py`` (same functions, same
semantics, identical eigenvector ordering and phase convention). The loops
call zgemm/zherk/zheevd directly on preallocated Fortran-ordered buffers,
removing the per-call dispatch overhead that dominates at the small matrix
sizes these networks use. The GIL is released for the whole iteration loop
so independent restarts can run on threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm, zherk
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

BACKEND = "ext"

ctypedef double complex zc

cdef double _DEG_RTOL = 1e-12
cdef double _PHASE_RTOL = 1e-12

cdef char* _JOBZ = b'V'
cdef char* _UPLO = b'L'
cdef char* _TRANS_N = b'N'
cdef char* _TRANS_C = b'C'

cdef zc _ONE = 1.0
cdef zc _ZERO = 0.0
cdef double _RONE = 1.0
cdef double _RZERO = 0.0


cdef struct EigWork:
    zc* work
    double* rwork
    int* iwork
    int lwork
    int lrwork
    int liwork


cdef int _eig_smallest(zc* a, int n, double* w, EigWork* ws) noexcept nogil:
    """Ascending eigendecomposition in place; vectors land in a's columns."""
    cdef int info = 0
    zheevd(_JOBZ, _UPLO, &n, a, &n, w, ws.work, &ws.lwork, ws.rwork,
           &ws.lrwork, ws.iwork, &ws.liwork, &info)
    return info


cdef void _fix_phase(zc* a, int n, int m) noexcept nogil:
    """First significantly nonzero entry of each column made real-positive."""
    cdef int i, j, ref
    cdef double norm, mag, c, s, re, im
    cdef zc* col
    for j in range(m):
        col = a + j * n
        norm = 0.0
        for i in range(n):
            norm += col[i].real * col[i].real + col[i].imag * col[i].imag
        norm = sqrt(norm)
        if norm == 0.0:
            continue
        ref = -1
        for i in range(n):
            mag = sqrt(col[i].real * col[i].real + col[i].imag * col[i].imag)
            if mag > _PHASE_RTOL * norm:
                ref = i
                break
        if ref < 0:
            continue
        mag = sqrt(col[ref].real * col[ref].real + col[ref].imag * col[ref].imag)
        c = col[ref].real / mag
        s = -col[ref].imag / mag
        for i in range(n):
            re = col[i].real * c - col[i].imag * s
            im = col[i].real * s + col[i].imag * c
            col[i] = re + 1j * im


cdef inline int _degenerate_cut(double* w, int n, int m) noexcept nogil:
    cdef double scale
    if m >= n:
        return 0
    scale = fabs(w[n - 1])
    if scale < 1.0:
        scale = 1.0
    return (w[m] - w[m - 1]) <= _DEG_RTOL * scale


cdef inline double _clamped_sum(double* w, int m) noexcept nogil:
    cdef double total = 0.0
    cdef int i
    for i in range(m):
        if w[i] > 0.0:
            total += w[i]
    return total


cdef zc* _zptr(object arr):
    return <zc*> cnp.PyArray_DATA(<cnp.ndarray> arr)


def _fortran_copy(a):
    return np.array(a, dtype=np.complex128, order="F", copy=True)


cdef class _Workspace:
    """Owns every buffer of one solve; numpy keeps the memory alive."""

    cdef object _hold
    cdef EigWork eig

    def __cinit__(self):
        self._hold = []
        self.eig.work = NULL
        self.eig.rwork = NULL
        self.eig.iwork = NULL

    cdef zc* zbuf(self, int rows, int cols):
        arr = np.empty((rows, cols), dtype=np.complex128, order="F")
        self._hold.append(arr)
        return _zptr(arr)

    cdef double* dbuf(self, int n):
        arr = np.empty(n, dtype=np.float64)
        self._hold.append(arr)
        return <double*> cnp.PyArray_DATA(<cnp.ndarray> arr)

    cdef int* ibuf(self, int n):
        arr = np.empty(n, dtype=np.intc)
        self._hold.append(arr)
        return <int*> cnp.PyArray_DATA(<cnp.ndarray> arr)

    cdef void init_eig(self, int nmax):
        # Formula lower bounds for zheevd with eigenvectors, plus headroom
        # for blocked implementations.
        self.eig.lwork = 2 * nmax + nmax * nmax + 64
        self.eig.lrwork = 1 + 5 * nmax + 2 * nmax * nmax + 64
        self.eig.liwork = 3 + 5 * nmax + 64
        self.eig.work = self.zbuf(self.eig.lwork, 1)
        self.eig.rwork = self.dbuf(self.eig.lrwork)
        self.eig.iwork = self.ibuf(self.eig.liwork)


cdef struct PairTable:
    zc** hka
    zc** uk
    int* nk
    int* dk
    int* rowoff


cdef int _alloc_pairs(PairTable* t, int K) except -1:
    cdef int n = K if K > 0 else 1
    t.hka = <zc**> malloc(n * sizeof(zc*))
    t.uk = <zc**> malloc(n * sizeof(zc*))
    t.nk = <int*> malloc(n * sizeof(int))
    t.dk = <int*> malloc(n * sizeof(int))
    t.rowoff = <int*> malloc(n * sizeof(int))
    if t.hka == NULL or t.uk == NULL or t.nk == NULL or t.dk == NULL or t.rowoff == NULL:
        _free_pairs(t)
        raise MemoryError
    return 0


cdef void _free_pairs(PairTable* t):
    free(t.hka)
    free(t.uk)
    free(t.nk)
    free(t.dk)
    free(t.rowoff)


def lm_alternate(Hba, Hka, dks, ub0, Uk0, int da, int max_iterations, double tol):
    """Leakage-minimizing alternation; see the python backend for semantics."""
    cdef int K = len(Hka)
    cdef int Nb = Hba.shape[0]
    cdef int Ma = Hba.shape[1]
    cdef int sd = 0
    cdef int k, it, nk, dk_k, mrows, nmax
    cdef int iterations = 0
    cdef int converged = 0
    cdef int degenerate = 0
    cdef int info = 0
    cdef int one_i = 1
    cdef double leak
    cdef PairTable pt
    cdef _Workspace ws = _Workspace()
    cdef zc* m_buf
    cdef zc* g_buf
    cdef zc* gn_buf
    cdef zc* f_buf
    cdef zc* hba_ptr
    cdef zc* ub_ptr
    cdef zc* wa_ptr
    cdef double* eigw
    cdef double* trace

    hba_f = _fortran_copy(Hba)
    hka_f = [_fortran_copy(h) for h in Hka]
    ub_arr = np.array(ub0, dtype=np.complex128, copy=True).ravel()
    uk_arrs = [_fortran_copy(u) for u in Uk0]
    trace_arr = np.empty(max_iterations, dtype=np.float64)
    wa_arr = np.empty((Ma, da), dtype=np.complex128, order="F")

    _alloc_pairs(&pt, K)
    try:
        nmax = Ma if Ma > Nb else Nb
        for k in range(K):
            pt.hka[k] = _zptr(hka_f[k])
            pt.uk[k] = _zptr(uk_arrs[k])
            pt.nk[k] = hka_f[k].shape[0]
            pt.dk[k] = dks[k]
            pt.rowoff[k] = 1 + sd
            sd += pt.dk[k]
            if pt.nk[k] > nmax:
                nmax = pt.nk[k]
        mrows = 1 + sd

        ws.init_eig(nmax)
        m_buf = ws.zbuf(mrows, Ma)
        g_buf = ws.zbuf(Ma, Ma)
        gn_buf = ws.zbuf(nmax, nmax)
        f_buf = ws.zbuf(nmax, da)
        eigw = ws.dbuf(nmax)
        hba_ptr = _zptr(hba_f)
        ub_ptr = _zptr(ub_arr)
        wa_ptr = _zptr(wa_arr)
        trace = <double*> cnp.PyArray_DATA(<cnp.ndarray> trace_arr)

        with nogil:
            for it in range(1, max_iterations + 1):
                iterations = it
                # M row 0 = ub^H Hba ; rows 1.. = Uk^H Hka
                zgemm(_TRANS_C, _TRANS_N, &one_i, &Ma, &Nb, &_ONE, ub_ptr, &Nb,
                      hba_ptr, &Nb, &_ZERO, m_buf, &mrows)
                for k in range(K):
                    zgemm(_TRANS_C, _TRANS_N, &pt.dk[k], &Ma, &pt.nk[k], &_ONE,
                          pt.uk[k], &pt.nk[k], pt.hka[k], &pt.nk[k], &_ZERO,
                          m_buf + pt.rowoff[k], &mrows)
                # Wa = da least-dominant eigenvectors of M^H M
                zherk(_UPLO, _TRANS_C, &Ma, &mrows, &_RONE, m_buf, &mrows,
                      &_RZERO, g_buf, &Ma)
                info = _eig_smallest(g_buf, Ma, eigw, &ws.eig)
                if info != 0:
                    break
                degenerate |= _degenerate_cut(eigw, Ma, da)
                memcpy(wa_ptr, g_buf, Ma * da * sizeof(zc))
                _fix_phase(wa_ptr, Ma, da)

                # ub = least-dominant eigenvector of (Hba Wa)(Hba Wa)^H
                zgemm(_TRANS_N, _TRANS_N, &Nb, &da, &Ma, &_ONE, hba_ptr, &Nb,
                      wa_ptr, &Ma, &_ZERO, f_buf, &Nb)
                zherk(_UPLO, _TRANS_N, &Nb, &da, &_RONE, f_buf, &Nb, &_RZERO,
                      gn_buf, &Nb)
                info = _eig_smallest(gn_buf, Nb, eigw, &ws.eig)
                if info != 0:
                    break
                degenerate |= _degenerate_cut(eigw, Nb, 1)
                memcpy(ub_ptr, gn_buf, Nb * sizeof(zc))
                _fix_phase(ub_ptr, Nb, 1)
                leak = _clamped_sum(eigw, 1)

                # Uk = dk least-dominant eigenvectors of (Hka Wa)(Hka Wa)^H
                for k in range(K):
                    nk = pt.nk[k]
                    dk_k = pt.dk[k]
                    zgemm(_TRANS_N, _TRANS_N, &nk, &da, &Ma, &_ONE, pt.hka[k],
                          &nk, wa_ptr, &Ma, &_ZERO, f_buf, &nk)
                    zherk(_UPLO, _TRANS_N, &nk, &da, &_RONE, f_buf, &nk,
                          &_RZERO, gn_buf, &nk)
                    info = _eig_smallest(gn_buf, nk, eigw, &ws.eig)
                    if info != 0:
                        break
                    degenerate |= _degenerate_cut(eigw, nk, dk_k)
                    memcpy(pt.uk[k], gn_buf, nk * dk_k * sizeof(zc))
                    _fix_phase(pt.uk[k], nk, dk_k)
                    leak += _clamped_sum(eigw, dk_k)
                if info != 0:
                    break

                trace[it - 1] = leak
                if it >= 2 and fabs(trace[it - 2] - trace[it - 1]) < tol:
                    converged = 1
                    break
    finally:
        _free_pairs(&pt)

    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
    return (
        np.ascontiguousarray(wa_arr),
        ub_arr,
        uk_arrs,
        trace_arr[:iterations].copy(),
        iterations,
        bool(converged),
        bool(degenerate),
    )


def meb_alternate(m0, Hka, dks, va, Uk0, int da, int max_iterations, double tol):
    """Fixed-eigenmode alternation; see the python backend for semantics."""
    cdef int K = len(Hka)
    cdef int sd = 0
    cdef int k, i, j, it, nk, dk_k, mrows, nmax, wv_cols
    cdef int Ma
    cdef int iterations = 0
    cdef int converged = 0
    cdef int degenerate = 0
    cdef int info = 0
    cdef double leak
    cdef zc acc
    cdef PairTable pt
    cdef _Workspace ws = _Workspace()
    cdef zc* m_buf
    cdef zc* g_buf
    cdef zc* gn_buf
    cdef zc* f_buf
    cdef zc* wv_buf
    cdef zc* m0_ptr
    cdef zc* va_ptr
    cdef zc* wa_ptr
    cdef double* eigw
    cdef double* trace

    m0_arr = np.array(m0, dtype=np.complex128, copy=True).ravel()
    va_arr = np.array(va, dtype=np.complex128, copy=True).ravel()
    Ma = m0_arr.shape[0]
    hka_f = [_fortran_copy(h) for h in Hka]
    uk_arrs = [_fortran_copy(u) for u in Uk0]
    trace_arr = np.empty(max_iterations, dtype=np.float64)
    wa_arr = np.empty((Ma, da), dtype=np.complex128, order="F")

    _alloc_pairs(&pt, K)
    try:
        nmax = Ma
        for k in range(K):
            pt.hka[k] = _zptr(hka_f[k])
            pt.uk[k] = _zptr(uk_arrs[k])
            pt.nk[k] = hka_f[k].shape[0]
            pt.dk[k] = dks[k]
            pt.rowoff[k] = 1 + sd
            sd += pt.dk[k]
            if pt.nk[k] > nmax:
                nmax = pt.nk[k]
        mrows = 1 + sd
        wv_cols = da + 1

        ws.init_eig(nmax)
        m_buf = ws.zbuf(mrows, Ma)
        g_buf = ws.zbuf(Ma, Ma)
        gn_buf = ws.zbuf(nmax, nmax)
        f_buf = ws.zbuf(nmax, wv_cols)
        wv_buf = ws.zbuf(Ma, wv_cols)
        eigw = ws.dbuf(nmax)
        m0_ptr = _zptr(m0_arr)
        va_ptr = _zptr(va_arr)
        wa_ptr = _zptr(wa_arr)
        trace = <double*> cnp.PyArray_DATA(<cnp.ndarray> trace_arr)

        with nogil:
            # Row 0 of M is fixed for the whole solve.
            for j in range(Ma):
                m_buf[j * mrows] = m0_ptr[j]
            for it in range(1, max_iterations + 1):
                iterations = it
                for k in range(K):
                    zgemm(_TRANS_C, _TRANS_N, &pt.dk[k], &Ma, &pt.nk[k], &_ONE,
                          pt.uk[k], &pt.nk[k], pt.hka[k], &pt.nk[k], &_ZERO,
                          m_buf + pt.rowoff[k], &mrows)
                zherk(_UPLO, _TRANS_C, &Ma, &mrows, &_RONE, m_buf, &mrows,
                      &_RZERO, g_buf, &Ma)
                info = _eig_smallest(g_buf, Ma, eigw, &ws.eig)
                if info != 0:
                    break
                degenerate |= _degenerate_cut(eigw, Ma, da)
                memcpy(wa_ptr, g_buf, Ma * da * sizeof(zc))
                _fix_phase(wa_ptr, Ma, da)

                # Direct-channel leakage |m0 Wa|^2 (ub is never updated).
                leak = 0.0
                for j in range(da):
                    acc = 0.0
                    for i in range(Ma):
                        acc = acc + m0_ptr[i] * wa_ptr[j * Ma + i]
                    leak += acc.real * acc.real + acc.imag * acc.imag

                # Uk = dk least-dominant eigenvectors of the Gram of Hka [Wa, va]
                memcpy(wv_buf, wa_ptr, Ma * da * sizeof(zc))
                memcpy(wv_buf + Ma * da, va_ptr, Ma * sizeof(zc))
                for k in range(K):
                    nk = pt.nk[k]
                    dk_k = pt.dk[k]
                    zgemm(_TRANS_N, _TRANS_N, &nk, &wv_cols, &Ma, &_ONE, pt.hka[k],
                          &nk, wv_buf, &Ma, &_ZERO, f_buf, &nk)
                    zherk(_UPLO, _TRANS_N, &nk, &wv_cols, &_RONE, f_buf, &nk,
                          &_RZERO, gn_buf, &nk)
                    info = _eig_smallest(gn_buf, nk, eigw, &ws.eig)
                    if info != 0:
                        break
                    degenerate |= _degenerate_cut(eigw, nk, dk_k)
                    memcpy(pt.uk[k], gn_buf, nk * dk_k * sizeof(zc))
                    _fix_phase(pt.uk[k], nk, dk_k)
                    leak += _clamped_sum(eigw, dk_k)
                if info != 0:
                    break

                trace[it - 1] = leak
                if it >= 2 and fabs(trace[it - 2] - trace[it - 1]) < tol:
                    converged = 1
                    break
    finally:
        _free_pairs(&pt)

    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
    return (
        np.ascontiguousarray(wa_arr),
        None,
        uk_arrs,
        trace_arr[:iterations].copy(),
        iterations,
        bool(converged),
        bool(degenerate),
    )

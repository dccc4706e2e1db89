# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the block-pair GEMM accumulate loop.

Semantics match ``_pairs_py`` exactly: for every (a, b) pair, the product is
formed with dgemm(beta=0) into a reused scratch buffer and then added
elementwise into the output, so results are bitwise identical to the
pure-python kernel regardless of which one runs.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND = "compiled"


def accumulate_pair_products(cnp.ndarray[cnp.float64_t, ndim=2] out2, list pairs):
    cdef double[:, ::1] o = out2
    cdef Py_ssize_t nrow = out2.shape[0]
    cdef Py_ssize_t ncol = out2.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] scratch = np.empty((nrow, ncol))
    cdef double[:, ::1] s = scratch
    cdef double[:, ::1] a
    cdef double[:, ::1] b
    cdef char tn = b'N'
    cdef double one = 1.0
    cdef double nil = 0.0
    cdef int m, n, k
    cdef Py_ssize_t i, j
    for ab in pairs:
        a = ab[0]
        b = ab[1]
        k = <int> a.shape[1]
        # Row-major C = A @ B is column-major C^T = B^T @ A^T, so hand BLAS
        # the buffers swapped: m = ncol, n = nrow.
        m = <int> ncol
        n = <int> nrow
        dgemm(&tn, &tn, &m, &n, &k, &one, &b[0, 0], &m, &a[0, 0], &k,
              &nil, &s[0, 0], &m)
        for i in range(nrow):
            for j in range(ncol):
                o[i, j] += s[i, j]

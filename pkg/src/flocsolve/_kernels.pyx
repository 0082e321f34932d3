# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tensor kernels for residual and Jacobian evaluation."""
import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


def contract_vec(double[:, :, ::1] tensor, double[::1] vec):
    """out[k, q] = sum_j tensor[k, q, j] * vec[j]."""
    cdef Py_ssize_t K = tensor.shape[0], Q = tensor.shape[1], J = tensor.shape[2]
    out = np.empty((K, Q))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t k, q, j
    cdef double acc
    for k in prange(K, nogil=True, schedule="static"):
        for q in range(Q):
            acc = 0.0
            for j in range(J):
                acc = acc + tensor[k, q, j] * vec[j]
            o[k, q] = acc
    return out


def contract_rows(double[:, ::1] weights, double[:, :, ::1] tensor):
    """out[k, m] = sum_q weights[k, q] * tensor[k, q, m]."""
    cdef Py_ssize_t K = tensor.shape[0], Q = tensor.shape[1], M = tensor.shape[2]
    out = np.zeros((K, M))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t k, q, m
    cdef double w
    for k in prange(K, nogil=True, schedule="static"):
        for q in range(Q):
            w = weights[k, q]
            if w != 0.0:
                for m in range(M):
                    o[k, m] += w * tensor[k, q, m]
    return out

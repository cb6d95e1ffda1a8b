# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled progress kernels: the per-event inner loop of the cloudlet
schedulers. Mirrors _speedups_py exactly."""

BACKEND = "compiled"


def advance_equal(double[:] remaining, Py_ssize_t n, double amount, double eps):
    """Subtract ``amount`` from each active slot; return indices whose
    remaining work dropped to ``eps`` or below."""
    cdef Py_ssize_t i
    cdef list done = []
    for i in range(n):
        remaining[i] -= amount
        if remaining[i] <= eps:
            done.append(i)
    return done


def min_active(double[:] remaining, Py_ssize_t n):
    """Smallest remaining work among the first ``n`` slots."""
    cdef double best = remaining[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        if remaining[i] < best:
            best = remaining[i]
    return best

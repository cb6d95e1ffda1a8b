"""Pure-Python fallback for the compiled progress kernels.

Same contract as the Cython module: operate on the first *n* entries of
a ``double`` buffer holding remaining work in MI.
"""

BACKEND = "python"


def advance_equal(remaining, n, amount, eps):
    """Subtract ``amount`` from each active slot; return indices whose
    remaining work dropped to ``eps`` or below."""
    done = []
    for i in range(n):
        remaining[i] -= amount
        if remaining[i] <= eps:
            done.append(i)
    return done


def min_active(remaining, n):
    """Smallest remaining work among the first ``n`` slots."""
    best = remaining[0]
    for i in range(1, n):
        if remaining[i] < best:
            best = remaining[i]
    return best

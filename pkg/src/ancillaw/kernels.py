"""Permutation-sum kernels: permanent (bosons) and determinant (fermions)."""
from itertools import permutations

import numpy as np

# at or below this dimension the naive permutation sum is used
NAIVE_CUTOFF = 5


class DimensionError(ValueError):
    pass


def _as_square(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def permutation_parity(perm):
    """Parity (0 even, 1 odd) of a permutation given as a sequence of indices."""
    perm = list(perm)
    seen = [False] * len(perm)
    parity = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def naive_permanent(m):
    a = _as_square(m)
    n = a.shape[0]
    rows = np.arange(n)
    return complex(sum(np.prod(a[rows, list(p)]) for p in permutations(range(n))))


def naive_determinant(m):
    a = _as_square(m)
    n = a.shape[0]
    rows = np.arange(n)
    total = 0j
    for p in permutations(range(n)):
        term = np.prod(a[rows, list(p)])
        total += -term if permutation_parity(p) else term
    return complex(total)


def ryser_permanent(m):
    """Ryser inclusion-exclusion with the column subsets visited in Gray-code order.

    Each step toggles a single column, so the row sums are updated in O(n)
    instead of being recomputed; total cost O(2^n n).
    """
    a = _as_square(m)
    n = a.shape[0]
    row_sums = np.zeros(n, dtype=complex)
    in_subset = np.zeros(n, dtype=bool)
    total = 0j
    for k in range(1, 1 << n):
        # bit flipped between gray(k-1) and gray(k) is the lowest set bit of k
        j = (k & -k).bit_length() - 1
        if in_subset[j]:
            row_sums -= a[:, j]
        else:
            row_sums += a[:, j]
        in_subset[j] = not in_subset[j]
        gray = k ^ (k >> 1)
        size = gray.bit_count()
        term = np.prod(row_sums)
        total += -term if (n - size) & 1 else term
    return complex(total)


def permanent(m):
    a = _as_square(m)
    if a.shape[0] <= NAIVE_CUTOFF:
        return naive_permanent(a)
    return ryser_permanent(a)


def determinant(m):
    a = _as_square(m)
    if a.shape[0] <= NAIVE_CUTOFF:
        return naive_determinant(a)
    return complex(np.linalg.det(a))

"""Max-min ("Boolean") matrix algebra over nonnegative matrices.

Matrices follow the child-row / parent-column convention used throughout the
package: ``w[j, i] != 0`` means an edge ``i -> j``. Under that convention the
star matrix entry ``star[q2, q1]`` is the largest, over all directed paths
``q1 -> ... -> q2``, of the smallest absolute edge weight on the path.
"""

from __future__ import annotations

import numpy as np

from ._validation import check_nonneg_square

__all__ = [
    "bool_mult",
    "bool_add",
    "bool_star",
    "threshold_binary",
    "ancestors",
    "path_oracle",
    "ORACLE_MAX_DIM",
]

ORACLE_MAX_DIM = 12


def bool_mult(a, b):
    """Max-min product: ``out[i, j] = max_k min(a[i, k], b[k, j])``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch for max-min product: {a.shape} x {b.shape}")
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]))
    # loop over the shared index keeps memory at O(n^2) instead of O(n^3)
    out = np.minimum(a[:, 0][:, None], b[0][None, :])
    for k in range(1, a.shape[1]):
        np.maximum(out, np.minimum(a[:, k][:, None], b[k][None, :]), out=out)
    return out


def bool_add(a, b):
    """Elementwise maximum of two same-shape matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for max-sum: {a.shape} vs {b.shape}")
    return np.maximum(a, b)


def bool_star(w, n_terms=None):
    """Aggregate max-min powers ``|W| + |W|^(2) + ... + |W|^(n_terms)``.

    Parameters
    ----------
    w : array-like of shape (p, p)
        Nonnegative matrix; callers pass ``abs(W)`` themselves.
    n_terms : int, optional
        Number of powers to aggregate. Defaults to ``p - 1``, the longest
        possible simple path, so every entry is the max-min over all paths.
        Floored at 1.

    Returns
    -------
    ndarray of shape (p, p)

    Notes
    -----
    The partial aggregates are nondecreasing and satisfy
    ``acc_{k+1} = W + acc_k * W``, so the loop stops as soon as one step
    leaves the aggregate unchanged.
    """
    w = check_nonneg_square(w, name="w")
    p = w.shape[0]
    if n_terms is None:
        n_terms = p - 1
    n_terms = max(int(n_terms), 1)
    acc = w.copy()
    for _ in range(n_terms - 1):
        nxt = np.maximum(w, bool_mult(acc, w))
        if np.array_equal(nxt, acc):
            break
        acc = nxt
    return acc


def threshold_binary(w, c=0.0):
    """Indicator matrix of ``|w| > c`` (strict, so ties at ``c`` map to 0)."""
    if c < 0:
        raise ValueError("threshold must be nonnegative")
    w = np.asarray(w, dtype=float)
    return (np.abs(w) > c).astype(float)


def ancestors(bstar, j):
    """Nodes ``i`` with ``bstar[j, i] != 0``, i.e. those with a path into ``j``."""
    bstar = np.asarray(bstar)
    if not 0 <= j < bstar.shape[0]:
        raise IndexError(f"node {j} out of range for dimension {bstar.shape[0]}")
    return set(np.flatnonzero(bstar[j] != 0).tolist())


def _simple_paths(w, q1, q2):
    p = w.shape[0]
    children = [np.flatnonzero(w[:, i] != 0).tolist() for i in range(p)]
    stack = [(q1, [q1])]
    while stack:
        node, path = stack.pop()
        for child in children[node]:
            if child == q2:
                yield path + [child]
            elif child not in path:
                stack.append((child, path + [child]))


def path_oracle(w, q1, q2):
    """Brute-force enumeration of simple directed paths ``q1 -> q2``.

    Returns
    -------
    exists : bool
    max_min_weight : float
        Largest over paths of the smallest absolute edge weight.
    total_effects : list of float
        Product of signed weights along each path.

    Raises
    ------
    ValueError
        If the graph has more than ``ORACLE_MAX_DIM`` nodes.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("w must be square")
    if w.shape[0] > ORACLE_MAX_DIM:
        raise ValueError(
            f"path enumeration refused for dimension {w.shape[0]} > {ORACLE_MAX_DIM}"
        )
    best = 0.0
    effects = []
    for path in _simple_paths(w, q1, q2):
        weights = [w[b, a] for a, b in zip(path[:-1], path[1:])]
        best = max(best, min(abs(x) for x in weights))
        effects.append(float(np.prod(weights)))
    return bool(effects), best, effects

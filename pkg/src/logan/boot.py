"""Gaussian multiplier bootstrap for the maximum decorrelated edge statistic.

Draw ``b`` uses its own generator ``default_rng([seed, *stream, b])`` and
produces an ``(n_c, p)`` multiplier array: one multiplier per complement
sample and child node ``j1``, shared by every edge into ``j1``. Results do
not depend on how draws are chunked or distributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boolmat import bool_star
from .debias import edge_set_mask

__all__ = [
    "BootstrapSettings",
    "multipliers",
    "eta_star",
    "EdgeDraws",
    "edge_draws",
    "critical_value",
    "upper_quantile",
    "p_value",
    "w_star",
]


@dataclass(frozen=True)
class BootstrapSettings:
    m: int = 2000
    alpha: float = 0.05
    seed: int = 0
    chunk: int = 250

    def __post_init__(self):
        if self.m < 100:
            raise ValueError("m must be at least 100")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.chunk < 1:
            raise ValueError("chunk must be positive")


def multipliers(seed, stream, b, n_c, p):
    """Standard-normal multiplier array of draw ``b``."""
    rng = np.random.default_rng([int(seed), *map(int, stream), int(b)])
    return rng.standard_normal((n_c, p))


def eta_star(resid, denom, e, sigma_hat):
    """``sqrt(n_c) * sigma_hat * sum_i resid_i e_i / denom`` for one edge and draw."""
    resid = np.asarray(resid, dtype=float)
    e = np.asarray(e, dtype=float)
    if e.shape != resid.shape:
        raise ValueError("multiplier vector must have one entry per complement sample")
    n_c = resid.shape[0]
    return math.sqrt(n_c) * sigma_hat * float(resid @ e) / denom


@dataclass
class EdgeDraws:
    """``abs_eta[b, k]`` is ``|eta*|`` of edge ``edges[k]`` in draw ``b``."""

    edges: list
    abs_eta: np.ndarray
    n_complement: int

    def column_index(self):
        return {e: k for k, e in enumerate(self.edges)}


def edge_draws(fit, sigma_hat, settings, stream=()):
    """Bootstrap ``|eta*|`` for every testable screened edge of a half fit."""
    edges = [k for k in fit.edge_list() if not fit.edges[k].degenerate]
    n_c = fit.n_complement
    p = fit.p
    out = np.zeros((settings.m, len(edges)))
    if not edges:
        return EdgeDraws(edges, out, n_c)
    resid = np.column_stack([fit.edges[k].resid for k in edges])
    scale = math.sqrt(n_c) * sigma_hat / np.array([fit.edges[k].denom for k in edges])
    rows = np.array([k[0] for k in edges])
    groups = [(j1, np.flatnonzero(rows == j1)) for j1 in np.unique(rows)]
    for start in range(0, settings.m, settings.chunk):
        stop = min(start + settings.chunk, settings.m)
        e = np.stack([multipliers(settings.seed, stream, b, n_c, p)
                      for b in range(start, stop)])
        for j1, cols in groups:
            # (draws, n_c) @ (n_c, k) -> (draws, k)
            out[start:stop, cols] = np.abs(e[:, :, j1] @ resid[:, cols]) * scale[cols]
    return EdgeDraws(edges, out, n_c)


def upper_quantile(t_samples, alpha):
    """``ceil((1 - alpha/2) m)``-th order statistic; ``+inf`` for an empty set."""
    t = np.sort(np.asarray(t_samples, dtype=float))
    if t.size == 0:
        return math.inf
    k = math.ceil((1.0 - alpha / 2.0) * t.size)
    return float(t[min(max(k, 1), t.size) - 1])


def _t_samples(fit, draws, q1, q2):
    if not draws.edges:
        return None
    mask = edge_set_mask(fit.b_hat, fit.b_star, q1, q2)
    rows, parents = np.array(draws.edges).T
    cols = np.flatnonzero(mask[rows, parents])
    if cols.size == 0:
        return None
    return draws.abs_eta[:, cols].max(axis=1)


def critical_value(fit, draws, q1, q2, alpha):
    """Critical value and bootstrap maxima for the sub-null ``q1 -> q2``.

    An empty edge set gives ``(inf, zeros)``: the sub-null is never rejected.
    """
    t = _t_samples(fit, draws, q1, q2)
    if t is None:
        return math.inf, np.zeros(draws.abs_eta.shape[0])
    return upper_quantile(t, alpha), t


def p_value(w_star_entry, t_samples, n_complement):
    """Fraction of draws with ``T >= sqrt(n_c) * w_star_entry``."""
    t = np.asarray(t_samples, dtype=float)
    return float(np.mean(t >= math.sqrt(n_complement) * w_star_entry))


def w_star(fit):
    """Star matrix of ``|w_hat|`` over the screened support."""
    return bool_star(np.abs(fit.w_hat))

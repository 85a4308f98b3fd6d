"""Screening, nuisance regressions and the cross-fitted decorrelated edge estimator.

For half ``l`` the initial graph and the refit ``w_bar`` use the samples in
``I_l``; the nuisance regressions ``beta``, the decorrelated entries
``w_hat`` and the variance contributions use the complement ``I_l^c``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .boolmat import ancestors, bool_star, threshold_binary
from .dagfit import NotearsSettings, PenaltySpec, fit_notears, fit_penalized_gram

__all__ = [
    "DegenerateProjection",
    "HalfFit",
    "EdgeProjection",
    "fit_half",
    "ancestors_with_conventions",
    "fit_beta",
    "refit_rows",
    "decorrelated_edge",
    "edge_set_S",
    "edge_set_mask",
    "variance_estimate",
    "default_beta_spec",
    "DENOMINATOR_GUARD",
]

DENOMINATOR_GUARD = 1e-10


class DegenerateProjection(ArithmeticError):
    """The decorrelated denominator is too close to zero for the edge."""

    def __init__(self, j1, j2, denom):
        self.edge = (j1, j2)
        self.denominator = denom
        super().__init__(f"degenerate projection for edge {j2} -> {j1}: denominator {denom:.3g}")


def default_beta_spec():
    """MCP (gamma = 3) with BIC over 20 log-spaced levels."""
    return PenaltySpec(kind="mcp", gamma=3.0, tuning="bic", n_grid=20)


@dataclass
class EdgeProjection:
    """Per-edge quantities on the complement half.

    ``resid`` is ``x_j2 - x beta`` over ``I_l^c``; ``denom`` is
    ``sum_i x_{i, j2} * resid_i``.
    """

    beta: np.ndarray
    resid: np.ndarray
    denom: float
    value: float = np.nan
    degenerate: bool = False


@dataclass
class HalfFit:
    half: int
    w_tilde: np.ndarray
    b_hat: np.ndarray
    b_star: np.ndarray
    w_bar: np.ndarray = None
    edges: dict = field(default_factory=dict)
    n_complement: int = 0

    @property
    def p(self):
        return self.w_tilde.shape[0]

    @property
    def d(self):
        return self.p - 2

    @property
    def w_hat(self):
        """Dense matrix of decorrelated entries, zero off the screened support."""
        out = np.zeros((self.p, self.p))
        for (j1, j2), e in self.edges.items():
            if not e.degenerate:
                out[j1, j2] = e.value
        return out

    @property
    def degenerate_edges(self):
        return sorted(k for k, e in self.edges.items() if e.degenerate)

    def edge_list(self):
        """Screened edges ``(j1, j2)`` (``j2 -> j1``) in row-major order."""
        rows, cols = np.nonzero(self.b_hat)
        return list(zip(rows.tolist(), cols.tolist()))


def ancestors_with_conventions(fit, j):
    """Ancestors of ``j`` in ``fit.b_star`` plus the exposure; all mediators for the outcome.

    The exposure has no ancestors; ``j = 0`` returns an empty set and warns.
    """
    p = fit.b_star.shape[0]
    if not 0 <= j < p:
        raise IndexError(f"node {j} out of range for dimension {p}")
    if j == 0:
        warnings.warn("the exposure has no ancestors", RuntimeWarning, stacklevel=2)
        return set()
    out = ancestors(fit.b_star, j) | {0}
    if j == p - 1:
        out |= set(range(1, p - 1))
    out.discard(j)
    return out


def _gram(x):
    n = x.shape[0]
    return x.T @ x / n


def fit_beta(x_comp, fit, j1, j2, spec=None, gram=None):
    """Nuisance regression of ``x_j2`` on ``ACT(j1) \\ {j2}`` over the complement half."""
    if fit.b_hat[j1, j2] == 0:
        raise ValueError(f"edge {j2} -> {j1} is not in the screened graph")
    spec = default_beta_spec() if spec is None else spec
    gram = _gram(x_comp) if gram is None else gram
    allowed = ancestors_with_conventions(fit, j1) - {j2}
    beta = fit_penalized_gram(gram, gram[:, j2], float(gram[j2, j2]), x_comp.shape[0],
                              spec, allowed)
    beta[j2] = 0.0
    return beta


def refit_rows(x_fit, w_tilde, spec=None):
    """Refit each row of ``w_tilde`` on its own support (samples of ``I_l``).

    Row 0 (the exposure) has no parents and stays zero.
    """
    spec = default_beta_spec() if spec is None else spec
    p = w_tilde.shape[0]
    gram = _gram(x_fit)
    n = x_fit.shape[0]
    w_bar = np.zeros((p, p))
    for j in range(1, p):
        support = np.flatnonzero(w_tilde[j])
        if support.size == 0:
            continue
        w_bar[j] = fit_penalized_gram(gram, gram[:, j], float(gram[j, j]), n, spec,
                                      support.tolist())
    return w_bar


def decorrelated_edge(x_comp, fit, j1, j2, beta=None, spec=None):
    """Decorrelated estimate of ``W[j1, j2]`` on the complement half.

    Raises ``DegenerateProjection`` when ``|denominator| < 1e-10 * n``.
    """
    if fit.w_bar is None:
        raise ValueError("fit.w_bar is not populated")
    beta = fit_beta(x_comp, fit, j1, j2, spec) if beta is None else beta
    proj = _project(x_comp, fit.w_bar, j1, j2, beta)
    if proj.degenerate:
        raise DegenerateProjection(j1, j2, proj.denom)
    return proj.value


def _project(x_comp, w_bar, j1, j2, beta):
    n = x_comp.shape[0]
    resid = x_comp[:, j2] - x_comp @ beta
    denom = float(x_comp[:, j2] @ resid)
    row = w_bar[j1].copy()
    row[j2] = 0.0
    target = x_comp[:, j1] - x_comp @ row
    if abs(denom) < DENOMINATOR_GUARD * n:
        return EdgeProjection(beta, resid, denom, np.nan, True)
    return EdgeProjection(beta, resid, denom, float(resid @ target) / denom)


def fit_half(x_fit, x_comp, half, notears=None, spec=None):
    """Steps 2-4 of the single-split procedure for one half.

    ``x_fit`` holds the (centered) samples of ``I_l``, ``x_comp`` those of
    ``I_l^c``.
    """
    notears = NotearsSettings() if notears is None else notears
    spec = default_beta_spec() if spec is None else spec
    w_tilde = fit_notears(x_fit, notears)
    b_hat = threshold_binary(w_tilde, 0.0)
    fit = HalfFit(half, w_tilde, b_hat, bool_star(b_hat), n_complement=x_comp.shape[0])
    fit.w_bar = refit_rows(x_fit, w_tilde, spec)
    gram = _gram(x_comp)
    for j1, j2 in fit.edge_list():
        beta = fit_beta(x_comp, fit, j1, j2, spec, gram)
        fit.edges[(j1, j2)] = _project(x_comp, fit.w_bar, j1, j2, beta)
    return fit


def edge_set_mask(b_hat, b_star, q1, q2):
    """Boolean mask of screened edges lying on a directed ``q1 -> q2`` path."""
    p = b_hat.shape[0]
    nodes = np.arange(p)
    child_ok = (nodes == q2) | (b_star[q2, :] != 0)
    parent_ok = (nodes == q1) | (b_star[:, q1] != 0)
    return (b_hat != 0) & child_ok[:, None] & parent_ok[None, :]


def edge_set_S(fit, q1, q2):
    """Edges ``(i, j)`` (meaning ``j -> i``) of ``b_hat`` on some ``q1 -> q2`` path."""
    rows, cols = np.nonzero(edge_set_mask(fit.b_hat, fit.b_star, q1, q2))
    return set(zip(rows.tolist(), cols.tolist()))


def variance_estimate(x_comps, w_bars, n=None):
    """Pooled cross-fitted residual mean square.

    ``x_comps[l]`` are the complement samples paired with ``w_bars[l]``;
    the sum of squared residuals is divided by ``n * (d + 2)``.
    """
    total = 0.0
    count = 0
    p = None
    for x, w_bar in zip(x_comps, w_bars):
        resid = x - x @ w_bar.T
        total += float(np.sum(resid * resid))
        count += x.shape[0]
        p = x.shape[1]
    n = count if n is None else n
    value = total / (n * p)
    if value <= 0.0 or not math.isfinite(value):
        warnings.warn("degenerate variance estimate", RuntimeWarning, stacklevel=2)
        return 0.0
    return value

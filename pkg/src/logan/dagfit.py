"""Initial DAG estimation and penalized linear regression.

``NotearsDAG`` solves the L1-penalized least-squares problem over acyclic
coefficient matrices, either by a search over topological orderings or by
an augmented Lagrangian on the trace-exponential constraint. ``PenalizedRegression`` is coordinate descent for MCP and
LASSO with optional BIC selection over a grid of penalty levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as slin
import scipy.optimize as sopt
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from ._validation import check_finite_square, check_samples
from .boolmat import bool_star, threshold_binary

__all__ = [
    "acyclicity",
    "NotearsSettings",
    "NotearsConvergenceError",
    "fit_notears",
    "NotearsDAG",
    "PenaltySpec",
    "fit_penalized",
    "fit_penalized_gram",
    "PenalizedRegression",
    "default_lambda",
    "break_cycles",
    "notears_objective",
]


# --------------------------------------------------------------------------
# acyclicity
# --------------------------------------------------------------------------


def acyclicity(w):
    """Return ``h(W) = tr(exp(W o W)) - p`` and its gradient ``exp(W o W)^T o 2W``."""
    w = check_finite_square(w)
    e = slin.expm(w * w)
    return float(np.trace(e) - w.shape[0]), e.T * w * 2.0


# --------------------------------------------------------------------------
# NOTEARS
# --------------------------------------------------------------------------


class NotearsConvergenceError(RuntimeError):
    """The augmented Lagrangian loop ended with ``h`` above tolerance."""

    def __init__(self, h, w, message=None):
        self.h = h
        self.w = w
        super().__init__(message or f"acyclicity not reached: h = {h:.3g}")


SOLVERS = ("order", "lagrangian")


@dataclass
class NotearsSettings:
    """Controls for :func:`fit_notears`.

    ``solver="order"`` minimizes the penalized objective over topological
    orderings (greedy insertion plus adjacent swaps; each ordering is scored
    by its exact row-wise lasso). ``solver="lagrangian"`` runs the augmented
    Lagrangian on the trace-exponential constraint with L-BFGS-B subproblems.
    """

    lam: float = None
    threshold_c0: float = 1e-3
    rho_init: float = 1.0
    rho_max: float = 1e16
    alpha_init: float = 0.0
    h_tol: float = 1e-8
    max_outer: int = 100
    max_inner: int = 15000
    inner_tol: float = 1e-8
    progress_ratio: float = 0.25
    kappa: float = 0.5
    solver: str = "order"
    history: bool = False

    def __post_init__(self):
        if not self.rho_init > 0:
            raise ValueError("rho_init must be positive")
        if not self.h_tol > 0:
            raise ValueError("h_tol must be positive")
        if not 0 < self.progress_ratio < 1:
            raise ValueError("progress_ratio must lie in (0, 1)")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.threshold_c0 < 0:
            raise ValueError("threshold_c0 must be nonnegative")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")


def default_lambda(n, kappa=0.5):
    """Penalty level ``kappa * sqrt(log(n) / n)``."""
    return kappa * math.sqrt(math.log(n) / n)


def notears_objective(w, gram, lam):
    """``tr((I - W) S (I - W)^T) + lam * |W|_1`` with ``S = X'X / n``."""
    r = np.eye(gram.shape[0]) - w
    return float(np.sum((r @ gram) * r)) + lam * float(np.abs(w).sum())


# ---- ordering search -------------------------------------------------------


@njit(cache=True)
def _cholesky_solve(a, b):
    """Solve ``a x = b`` for symmetric ``a``; returns (x, ok)."""
    k = a.shape[0]
    low = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1):
            acc = a[i, j]
            for t in range(j):
                acc -= low[i, t] * low[j, t]
            if i == j:
                if acc <= 1e-12 * max(1.0, a[i, i]):
                    return b, False
                low[i, i] = math.sqrt(acc)
            else:
                low[i, j] = acc / low[j, j]
    y = np.empty(k)
    for i in range(k):
        acc = b[i]
        for t in range(i):
            acc -= low[i, t] * y[t]
        y[i] = acc / low[i, i]
    x = np.empty(k)
    for i in range(k - 1, -1, -1):
        acc = y[i]
        for t in range(i + 1, k):
            acc -= low[t, i] * x[t]
        x[i] = acc / low[i, i]
    return x, True


@njit(cache=True)
def _half_objective(g, c, x, half):
    # 0.5 x'Gx - c'x + half |x|_1
    k = x.shape[0]
    out = 0.0
    for a in range(k):
        if x[a] == 0.0:
            continue
        acc = 0.0
        for b in range(k):
            acc += g[a, b] * x[b]
        out += x[a] * (0.5 * acc - c[a]) + half * abs(x[a])
    return out


@njit(cache=True)
def _feature_sign(g, c, x, half, max_iter):
    """Exact lasso ``min 0.5 x'Gx - c'x + half |x|_1`` by feature-sign search.

    Each step solves the KKT system on the current signs and line-searches
    over the sign changes along the segment, so the objective decreases
    strictly and the search ends after finitely many steps. Returns False
    when an active Gram block is singular or ``max_iter`` is exhausted.
    """
    k = x.shape[0]
    theta = np.sign(x)
    scale = half
    for a in range(k):
        scale = max(scale, abs(c[a]))
    tol = 1e-10 * scale
    for _ in range(max_iter):
        grad = g @ x - c
        settled = True
        for a in range(k):
            if x[a] != 0.0 and abs(grad[a] + half * theta[a]) > tol:
                settled = False
                break
        if settled:
            best, best_v = -1, half + tol
            for a in range(k):
                if x[a] == 0.0 and abs(grad[a]) > best_v:
                    best, best_v = a, abs(grad[a])
            if best < 0:
                return True
            theta[best] = -np.sign(grad[best])
        act = np.flatnonzero(theta)
        m = act.shape[0]
        sub = np.empty((m, m))
        rhs = np.empty(m)
        for i in range(m):
            for j in range(m):
                sub[i, j] = g[act[i], act[j]]
            rhs[i] = c[act[i]] - half * theta[act[i]]
        z, ok = _cholesky_solve(sub, rhs)
        if not ok:
            return False
        target = np.zeros(k)
        for i in range(m):
            target[act[i]] = z[i]
        # candidates: the full step and every zero crossing along the segment
        best_x = target.copy()
        best_f = _half_objective(g, c, target, half)
        for i in range(m):
            a = act[i]
            if x[a] != 0.0 and x[a] * target[a] < 0.0:
                t = x[a] / (x[a] - target[a])
                cand = x + t * (target - x)
                cand[a] = 0.0
                f = _half_objective(g, c, cand, half)
                if f < best_f:
                    best_f, best_x = f, cand
        x[:] = best_x
        for a in range(k):
            theta[a] = np.sign(x[a])
    return False


@njit(cache=True)
def _cd_lasso(g, c, x, half, max_sweeps, tol):
    k = x.shape[0]
    gx = g @ x
    for _ in range(max_sweeps):
        md = 0.0
        for a in range(k):
            gaa = g[a, a]
            if gaa <= 0.0:
                continue
            z = c[a] - gx[a] + gaa * x[a]
            if z > half:
                new = (z - half) / gaa
            elif z < -half:
                new = (z + half) / gaa
            else:
                new = 0.0
            delta = new - x[a]
            if delta != 0.0:
                for b in range(k):
                    gx[b] += g[b, a] * delta
                x[a] = new
                md = max(md, abs(delta))
        if md < tol:
            break


@njit(cache=True)
def _refit_row(gram, j, idx, beta, lam, max_sweeps, tol):
    """Lasso of node ``j`` on nodes ``idx``: ``S_jj - 2 S_j'b + b'Sb + lam |b|_1``.

    ``beta`` is full length; it warm-starts the fit and receives the
    solution (zero outside ``idx``). Feature-sign search is tried first,
    coordinate descent finishes the job if an active block is singular.
    Returns the objective.
    """
    p = gram.shape[0]
    k = idx.shape[0]
    x = np.empty(k)
    c = np.empty(k)
    g = np.empty((k, k))
    for a in range(k):
        x[a] = beta[idx[a]]
        c[a] = gram[idx[a], j]
        for b in range(k):
            g[a, b] = gram[idx[a], idx[b]]
    half = 0.5 * lam
    if not _feature_sign(g, c, x, half, 50 + 10 * k):
        _cd_lasso(g, c, x, half, max_sweeps, tol)
    for u in range(p):
        beta[u] = 0.0
    for a in range(k):
        beta[idx[a]] = x[a]
    return gram[j, j] + 2.0 * _half_objective(g, c, x, half)


@njit(cache=True)
def _order_search(gram, lam, first, last, max_sweeps, tol, max_passes):
    """Greedy top-down ordering followed by adjacent-swap descent.

    ``first``/``last`` pin the source and sink nodes (-1 for none). Returns
    the coefficient matrix (rows are children), the ordering, and the
    objective after the greedy phase and after each improving pass.
    """
    p = gram.shape[0]
    coef = np.zeros((p, p))
    cost = np.zeros(p)
    order = np.empty(p, dtype=np.int64)
    placed = np.zeros(p, dtype=np.bool_)
    trace = np.empty(max_passes + 1)
    k = 0
    if first >= 0:
        order[0] = first
        placed[first] = True
        cost[first] = gram[first, first]
        k = 1
    n_free = p - k - (1 if last >= 0 else 0)
    for _ in range(n_free):
        best, best_j = np.inf, -1
        idx = order[:k].copy()
        for j in range(p):
            if placed[j] or j == last:
                continue
            c = _refit_row(gram, j, idx, coef[j], lam, max_sweeps, tol)
            cost[j] = c
            if c < best:
                best, best_j = c, j
        order[k] = best_j
        placed[best_j] = True
        k += 1
    if last >= 0:
        order[k] = last
        cost[last] = _refit_row(gram, last, order[:k].copy(), coef[last], lam, max_sweeps, tol)
        k += 1
    # the costs of unplaced candidates were last computed with fewer
    # predecessors; refresh everything against the final ordering
    total = 0.0
    for pos in range(p):
        j = order[pos]
        cost[j] = _refit_row(gram, j, order[:pos].copy(), coef[j], lam, max_sweeps, tol)
        total += cost[j]
    trace[0] = total
    lo = 1 if first >= 0 else 0
    hi = p - 1 if last >= 0 else p
    n_pass = 0
    tmp_a = np.empty(p)
    tmp_b = np.empty(p)
    while n_pass < max_passes:
        improved = False
        for pos in range(lo, hi - 1):
            a, b = order[pos], order[pos + 1]
            pre = order[:pos].copy()
            tmp_b[:] = coef[b]
            tmp_b[a] = 0.0
            cb = _refit_row(gram, b, pre, tmp_b, lam, max_sweeps, tol)
            with_b = np.empty(pos + 1, dtype=np.int64)
            with_b[:pos] = pre
            with_b[pos] = b
            tmp_a[:] = coef[a]
            ca = _refit_row(gram, a, with_b, tmp_a, lam, max_sweeps, tol)
            if ca + cb < cost[a] + cost[b] - 1e-12 * (1.0 + abs(cost[a] + cost[b])):
                order[pos], order[pos + 1] = b, a
                coef[a, :] = tmp_a
                coef[b, :] = tmp_b
                total += ca + cb - cost[a] - cost[b]
                cost[a], cost[b] = ca, cb
                improved = True
        n_pass += 1
        trace[n_pass] = total
        if not improved:
            break
    return coef, order, trace[: n_pass + 1]


# ---- augmented Lagrangian ---------------------------------------------------


class _AugLagrangian:
    """Augmented Lagrangian in the doubled variables ``W = W+ - W-``.

    The L1 term becomes linear on the nonnegative orthant, so each
    subproblem is a smooth bound-constrained problem for L-BFGS-B.
    """

    def __init__(self, gram, lam):
        self.gram = gram
        self.lam = lam
        self.p = gram.shape[0]
        self.eye = np.eye(self.p)
        self.rho = 1.0
        self.alpha = 0.0

    def adjacency(self, v):
        pp = self.p * self.p
        return (v[:pp] - v[pp:]).reshape(self.p, self.p)

    def value_and_grad(self, v):
        w = self.adjacency(v)
        r = self.eye - w
        rs = r @ self.gram
        loss = float(np.sum(rs * r))
        e = slin.expm(w * w)
        h = float(np.trace(e)) - self.p
        obj = loss + self.alpha * h + 0.5 * self.rho * h * h + self.lam * float(v.sum())
        g = (-2.0 * rs + (self.alpha + self.rho * h) * (e.T * w * 2.0)).ravel()
        return obj, np.concatenate([g + self.lam, -g + self.lam])


def _lagrangian_fit(gram, lam, settings):
    p = gram.shape[0]
    al = _AugLagrangian(gram, lam)
    al.rho, al.alpha = settings.rho_init, settings.alpha_init
    diag = np.eye(p, dtype=bool).ravel()
    bounds = [(0.0, 0.0) if on_diag else (0.0, None) for on_diag in np.tile(diag, 2)]
    v = np.zeros(2 * p * p)
    h = np.inf
    traces = []
    for _ in range(settings.max_outer):
        while al.rho < settings.rho_max:
            trace = []
            sol = sopt.minimize(
                al.value_and_grad, v, method="L-BFGS-B", jac=True, bounds=bounds,
                callback=(lambda xk: trace.append(al.value_and_grad(xk)[0]))
                if settings.history else None,
                options={"maxiter": settings.max_inner, "gtol": settings.inner_tol},
            )
            v_new = sol.x
            h_new = acyclicity(al.adjacency(v_new))[0]
            if settings.history:
                traces.append(trace)
            if h_new > settings.progress_ratio * h:
                al.rho *= 10.0
            else:
                break
        v, h = v_new, h_new
        al.alpha += al.rho * h
        if h <= settings.h_tol or al.rho >= settings.rho_max:
            break
    w = al.adjacency(v)
    if h > settings.h_tol:
        raise NotearsConvergenceError(h, w)
    return w, {"traces": traces, "h": h, "rho": al.rho}


# ---- driver ---------------------------------------------------------------


def break_cycles(w):
    """Drop smallest-magnitude edges lying on cycles until the graph is acyclic."""
    w = np.array(w, dtype=float)
    while True:
        star = bool_star(threshold_binary(w, 0.0), n_terms=w.shape[0])
        on_cycle = np.diag(star) > 0
        if not on_cycle.any():
            return w
        # edge i -> j lies on a cycle iff j reaches i
        cyc = (w != 0) & (star.T > 0)
        mags = np.where(cyc, np.abs(w), np.inf)
        j, i = np.unravel_index(np.argmin(mags), mags.shape)
        w[j, i] = 0.0


def fit_notears(x, settings=None):
    """Estimate ``W`` from centered samples ``x`` (rows are observations).

    Minimizes ``(1/n) sum_i |x_i - W x_i|^2 + lam |W|_1`` over acyclic ``W``,
    zeroes entries at or below ``threshold_c0`` and forces the exposure row
    and the outcome column to zero. With the ordering solver the exposure is
    pinned first and the outcome last, so those constraints hold during the
    search rather than only after it.

    When ``settings.history`` is set, returns ``(w, info)``; ``info`` holds
    the objective trace (per inner iteration for the Lagrangian solver, per
    swap pass for the ordering solver), the final ``h`` and ``lam``.

    Raises
    ------
    NotearsConvergenceError
        Lagrangian solver only: ``h`` still above ``h_tol`` at the end.
    """
    settings = NotearsSettings() if settings is None else settings
    x = check_samples(x, min_samples=2)
    n, p = x.shape
    lam = default_lambda(n, settings.kappa) if settings.lam is None else float(settings.lam)
    gram = x.T @ x / n
    if settings.solver == "order":
        w, order, trace = _order_search(
            gram, lam, 0, p - 1, settings.max_inner, settings.inner_tol, settings.max_outer
        )
        info = {"traces": [trace.tolist()], "h": 0.0, "order": order.tolist()}
    else:
        w, info = _lagrangian_fit(gram, lam, settings)
    w = np.where(np.abs(w) > settings.threshold_c0, w, 0.0)
    w[0, :] = 0.0
    w[:, -1] = 0.0
    w = break_cycles(w)
    if settings.history:
        info.update(lam=lam, objective=notears_objective(w, gram, lam))
        return w, info
    return w


class NotearsDAG(BaseEstimator):
    """Estimator wrapper around :func:`fit_notears`.

    Parameters
    ----------
    lam : float or None
        L1 weight; ``None`` uses ``kappa * sqrt(log n / n)``.
    threshold_c0 : float
        Entries at or below this magnitude are zeroed after fitting.
    kappa : float
        Rate constant for the default penalty.
    solver : {"order", "lagrangian"}
    center : bool
        Subtract column means before fitting.

    Attributes
    ----------
    coef_ : ndarray of shape (p, p)
        Estimated coefficient matrix, ``coef_[j, i]`` is the effect of ``i`` on ``j``.
    """

    def __init__(self, lam=None, threshold_c0=1e-3, kappa=0.5, solver="order",
                 h_tol=1e-8, rho_max=1e16, max_outer=100, center=True):
        self.lam = lam
        self.threshold_c0 = threshold_c0
        self.kappa = kappa
        self.solver = solver
        self.h_tol = h_tol
        self.rho_max = rho_max
        self.max_outer = max_outer
        self.center = center

    def settings(self):
        return NotearsSettings(
            lam=self.lam, threshold_c0=self.threshold_c0, kappa=self.kappa,
            solver=self.solver, h_tol=self.h_tol, rho_max=self.rho_max,
            max_outer=self.max_outer,
        )

    def fit(self, X, y=None):
        X = check_samples(X, min_samples=2)
        if self.center:
            X = X - X.mean(axis=0)
        self.coef_ = fit_notears(X, self.settings())
        self.n_features_in_ = X.shape[1]
        return self

    def adjacency(self):
        check_is_fitted(self, "coef_")
        return threshold_binary(self.coef_, 0.0)


# --------------------------------------------------------------------------
# penalized regression
# --------------------------------------------------------------------------


@dataclass
class PenaltySpec:
    """Penalty for :func:`fit_penalized`.

    ``tuning="bic"`` scans ``grid`` (or a default grid built from the sample
    size) and keeps the fit minimizing ``n log(RSS / n) + log(n) * df``.
    """

    kind: str = "mcp"
    lam: float = 0.1
    gamma: float = 3.0
    tuning: str = "fixed"
    grid: tuple = None
    n_grid: int = 20

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in ("mcp", "lasso"):
            raise ValueError(f"unknown penalty {self.kind!r}")
        if self.kind == "mcp" and not self.gamma > 1:
            raise ValueError("MCP needs gamma > 1")
        if self.tuning not in ("fixed", "bic"):
            raise ValueError(f"unknown tuning {self.tuning!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")

    def lambda_grid(self, n):
        if self.grid is not None:
            return np.sort(np.asarray(self.grid, dtype=float))[::-1]
        base = 10.0 * math.sqrt(math.log(n) / n)
        return np.logspace(math.log10(base), math.log10(0.01 * base), self.n_grid)


@njit(cache=True)
def _pattern_step(gram, c, beta, gb, lam, gamma, mcp):
    """Exact stationary point for the current sign/region pattern.

    On the active set the MCP (or LASSO) stationarity conditions are linear
    once signs and regions (``|b| <= gamma * lam`` or not) are fixed. The
    solution is accepted only if it reproduces the pattern and every
    inactive coordinate meets ``|c_k - (G b)_k| <= lam``; it is then a
    fixed point of the coordinate updates.
    """
    p = c.shape[0]
    act = np.flatnonzero(beta)
    k = act.shape[0]
    sub = np.empty((k, k))
    rhs = np.empty(k)
    inner = np.zeros(k, dtype=np.bool_)
    for i in range(k):
        a = act[i]
        for j in range(k):
            sub[i, j] = gram[a, act[j]]
        inner[i] = (not mcp) or abs(beta[a]) <= gamma * lam
        if inner[i]:
            rhs[i] = c[a] - lam * np.sign(beta[a])
            if mcp:
                sub[i, i] -= 1.0 / gamma
        else:
            rhs[i] = c[a]
    sol, ok = _cholesky_solve(sub, rhs)
    if not ok:
        return False
    for i in range(k):
        a = act[i]
        if sol[i] * beta[a] <= 0.0:
            return False
        if mcp and (abs(sol[i]) <= gamma * lam) != inner[i]:
            return False
    new_gb = np.zeros(p)
    for i in range(k):
        for v in range(p):
            new_gb[v] += gram[v, act[i]] * sol[i]
    for u in range(p):
        if beta[u] == 0.0 and gram[u, u] > 0.0 and abs(c[u] - new_gb[u]) > lam * (1.0 + 1e-9):
            return False
    for i in range(k):
        beta[act[i]] = sol[i]
    gb[:] = new_gb
    return True


@njit(cache=True)
def _cd_gram(gram, c, beta, lam, gamma, mcp, max_sweeps, tol):
    """Coordinate descent on standardized Gram form ``0.5 b'Gb - c'b + pen(b)``.

    Every few sweeps an exact solve on the current pattern is attempted;
    see ``_pattern_step``.
    """
    p = c.shape[0]
    gb = gram @ beta
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        max_delta = 0.0
        for k in range(p):
            gkk = gram[k, k]
            if gkk <= 0.0:
                continue
            z = c[k] - gb[k] + gkk * beta[k]
            az = abs(z)
            if az <= lam:
                new = 0.0
            elif mcp and az <= gamma * lam * gkk:
                new = np.sign(z) * (az - lam) / (gkk - 1.0 / gamma)
            elif mcp:
                new = z / gkk
            else:
                new = np.sign(z) * (az - lam) / gkk
            delta = new - beta[k]
            if delta != 0.0:
                for j in range(p):
                    gb[j] += gram[j, k] * delta
                beta[k] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < tol:
            break
        if sweeps % 4 == 0 and _pattern_step(gram, c, beta, gb, lam, gamma, mcp):
            break
    return sweeps


@njit(cache=True)
def _bic_path(g, c, yy, n, grid, gamma, mcp, max_sweeps, tol):
    """Warm-started path over ``grid``; returns the fit minimizing BIC."""
    b = np.zeros(c.shape[0])
    best = np.inf
    best_b = b.copy()
    for lam in grid:
        _cd_gram(g, c, b, lam, gamma, mcp, max_sweeps, tol)
        rss = yy - 2.0 * (c @ b) + b @ (g @ b)
        df = np.count_nonzero(b)
        bic = n * math.log(max(rss, 1e-300)) + math.log(n) * df
        if bic < best:
            best = bic
            best_b = b.copy()
    return best_b


def _penalty_value(beta, lam, gamma, mcp):
    a = np.abs(beta)
    if not mcp:
        return lam * a.sum()
    return float(np.sum(np.where(a <= gamma * lam, lam * a - a * a / (2 * gamma),
                                 0.5 * gamma * lam * lam)))


def fit_penalized_gram(gram, c, yy, n, spec, allowed=None, max_sweeps=10000, tol=1e-9):
    """Penalized least squares from sufficient statistics.

    ``gram = X'X / n``, ``c = X'y / n`` and ``yy = y'y / n``. Columns are
    scaled to unit mean square internally and the penalty acts on the scaled
    coefficients. Returns the coefficient vector on the original scale, zero
    outside ``allowed`` and on degenerate columns.
    """
    p = gram.shape[0]
    beta = np.zeros(p)
    idx = np.arange(p) if allowed is None else np.asarray(sorted(allowed), dtype=np.int64)
    if idx.size == 0:
        return beta
    sd = np.sqrt(np.clip(np.diag(gram)[idx], 0.0, None))
    keep = sd > 1e-12 * max(1.0, math.sqrt(max(yy, 0.0)))
    idx, sd = idx[keep], sd[keep]
    if idx.size == 0:
        return beta
    g = gram[np.ix_(idx, idx)] / np.outer(sd, sd)
    cs = c[idx] / sd
    mcp = spec.kind == "mcp"
    b = np.zeros(idx.size)
    if spec.tuning == "fixed":
        _cd_gram(g, cs, b, float(spec.lam), float(spec.gamma), mcp, max_sweeps, tol)
    else:
        b = _bic_path(g, cs, float(yy), float(n), spec.lambda_grid(n), float(spec.gamma),
                      mcp, max_sweeps, tol)
    beta[idx] = b / sd
    return beta


def fit_penalized(y, x, allowed_support=None, spec=None, tol=1e-9):
    """Penalized regression of ``y`` on the columns of ``x`` in ``allowed_support``.

    Minimizes ``(1/2n) |y - x b|^2 + sum_k pen(|b_k|)`` by coordinate descent.
    Coefficients outside ``allowed_support`` are zero.
    """
    spec = PenaltySpec() if spec is None else spec
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError("x must be (n, p) and y must be (n,)")
    n = x.shape[0]
    return fit_penalized_gram(x.T @ x / n, x.T @ y / n, float(y @ y) / n, n, spec,
                              allowed_support, tol=tol)


class PenalizedRegression(RegressorMixin, BaseEstimator):
    """MCP or LASSO linear regression without intercept.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    """

    def __init__(self, penalty="mcp", lam=0.1, gamma=3.0, tuning="fixed", grid=None):
        self.penalty = penalty
        self.lam = lam
        self.gamma = gamma
        self.tuning = tuning
        self.grid = grid

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        spec = PenaltySpec(self.penalty, self.lam, self.gamma, self.tuning, self.grid)
        self.coef_ = fit_penalized(y, X, None, spec)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_

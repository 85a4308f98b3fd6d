"""Single-mediator tests, the multi-split variant and FDR-controlled selection.

Every split fits both halves once. Each half runs one bootstrap pass that
serves every mediator and both sub-hypotheses, ``0 -> q`` and ``q -> d+1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_alpha, check_mediator, check_samples
from .boot import BootstrapSettings, critical_value, edge_draws, p_value, upper_quantile, w_star
from .dagfit import NotearsConvergenceError, NotearsSettings, PenaltySpec
from .data import Dataset
from .debias import default_beta_spec, edge_set_mask, fit_half, variance_estimate

__all__ = [
    "SplitPlan",
    "split",
    "LoganSettings",
    "HalfResult",
    "SplitResult",
    "run_split",
    "MediationReport",
    "test_mediator",
    "test_mediator_multisplit",
    "combine_pvalues",
    "screenmin_threshold",
    "by_cutoff",
    "select_half",
    "FdrReport",
    "fdr_select",
    "by_baseline",
    "fdr_from_splits",
    "MediatorTest",
    "MediatorSelector",
]


# --------------------------------------------------------------------------
# splitting and settings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitPlan:
    """Two disjoint sorted index arrays covering ``0..n-1``."""

    n: int
    first: np.ndarray
    second: np.ndarray

    @property
    def halves(self):
        return (self.first, self.second)

    def complement(self, half):
        return self.second if half == 1 else self.first

    def part(self, half):
        return self.first if half == 1 else self.second


def split(n, seed, index=0):
    """Uniform random partition with ``|I_1| = ceil(n / 2)``.

    ``index`` selects an independent plan for multi-split runs; the plan is
    drawn from ``default_rng([seed, 0, index])``.
    """
    n = int(n)
    if n < 4:
        raise ValueError("need at least 4 samples to split")
    perm = np.random.default_rng([int(seed), 0, int(index)]).permutation(n)
    k = -(-n // 2)
    return SplitPlan(n, np.sort(perm[:k]), np.sort(perm[k:]))


@dataclass
class LoganSettings:
    """Estimation and bootstrap settings shared by every split."""

    notears: NotearsSettings = field(default_factory=NotearsSettings)
    beta_spec: PenaltySpec = field(default_factory=default_beta_spec)
    m: int = 2000
    seed: int = 0

    def bootstrap(self):
        return BootstrapSettings(m=self.m, seed=self.seed)

    def to_dict(self):
        out = asdict(self)
        out["beta_spec"]["grid"] = (
            None if self.beta_spec.grid is None else list(map(float, self.beta_spec.grid))
        )
        return out


# --------------------------------------------------------------------------
# one split
# --------------------------------------------------------------------------


@dataclass
class HalfResult:
    """Per-half statistics for all mediators (index ``q - 1``).

    ``stat_*`` are ``sqrt(n_c) * W*_hat`` entries, ``t_*`` the sorted
    bootstrap maxima (``None`` for an empty edge set) and ``p_*`` the
    bootstrap p-values. A failed half keeps every p-value at 1.
    """

    half: int
    d: int
    n_complement: int = 0
    failed: bool = False
    error: str = ""
    n_edges: int = 0
    n_degenerate: int = 0
    stat_exposure: np.ndarray = None
    stat_outcome: np.ndarray = None
    p_exposure: np.ndarray = None
    p_outcome: np.ndarray = None
    s_exposure: np.ndarray = None
    s_outcome: np.ndarray = None
    t_exposure: list = None
    t_outcome: list = None
    fit: object = None

    def __post_init__(self):
        d = self.d
        if self.p_exposure is None:
            self.stat_exposure = np.zeros(d)
            self.stat_outcome = np.zeros(d)
            self.p_exposure = np.ones(d)
            self.p_outcome = np.ones(d)
            self.s_exposure = np.zeros(d, dtype=int)
            self.s_outcome = np.zeros(d, dtype=int)
            self.t_exposure = [None] * d
            self.t_outcome = [None] * d

    @property
    def p_min(self):
        return np.minimum(self.p_exposure, self.p_outcome)

    @property
    def p_max(self):
        return np.maximum(self.p_exposure, self.p_outcome)

    def critical_values(self, alpha):
        c_exp = np.array([math.inf if t is None else upper_quantile(t, alpha)
                          for t in self.t_exposure])
        c_out = np.array([math.inf if t is None else upper_quantile(t, alpha)
                          for t in self.t_outcome])
        return c_exp, c_out

    def rejections(self, alpha):
        """Sub-null rejections ``sqrt(n_c) W*_hat > c_hat`` for every mediator."""
        if self.failed:
            return np.zeros(self.d, bool), np.zeros(self.d, bool)
        c_exp, c_out = self.critical_values(alpha)
        return self.stat_exposure > c_exp, self.stat_outcome > c_out


@dataclass
class SplitResult:
    index: int
    plan: SplitPlan
    halves: list
    sigma2: float

    @property
    def d(self):
        return self.halves[0].d

    def decisions(self, alpha):
        """Reject ``H0(q)`` iff both sub-nulls are rejected in at least one half."""
        out = np.zeros(self.d, dtype=bool)
        for hr in self.halves:
            r_exp, r_out = hr.rejections(alpha)
            out |= r_exp & r_out
        return out


_FIT_ERRORS = (NotearsConvergenceError, np.linalg.LinAlgError, FloatingPointError,
               ArithmeticError)


def _analyze_half(fit, sigma_hat, boot, stream, d):
    hr = HalfResult(fit.half, d, n_complement=fit.n_complement, fit=fit)
    hr.n_edges = len(fit.edges)
    hr.n_degenerate = len(fit.degenerate_edges)
    draws = edge_draws(fit, sigma_hat, boot, stream)
    star = w_star(fit)
    root = math.sqrt(fit.n_complement)
    for q in range(1, d + 1):
        for q1, q2, kind in ((0, q, "exposure"), (q, d + 1, "outcome")):
            _, t = critical_value(fit, draws, q1, q2, boot.alpha)
            mask_size = _s_size(fit, q1, q2)
            entry = float(star[q2, q1])
            getattr(hr, f"stat_{kind}")[q - 1] = root * entry
            getattr(hr, f"s_{kind}")[q - 1] = mask_size
            if mask_size == 0:
                getattr(hr, f"p_{kind}")[q - 1] = 1.0
                getattr(hr, f"t_{kind}")[q - 1] = None
            else:
                getattr(hr, f"p_{kind}")[q - 1] = p_value(entry, t, fit.n_complement)
                getattr(hr, f"t_{kind}")[q - 1] = np.sort(t)
    return hr


def _s_size(fit, q1, q2):
    mask = edge_set_mask(fit.b_hat, fit.b_star, q1, q2)
    for e in fit.degenerate_edges:
        mask[e] = False
    return int(mask.sum())


def run_split(data, settings=None, index=0, keep_fits=True):
    """Fit both halves of split ``index`` and bootstrap every sub-hypothesis."""
    settings = LoganSettings() if settings is None else settings
    if not isinstance(data, Dataset):
        data = Dataset(check_samples(data))
    x = data.centered().values
    n, p = x.shape
    d = p - 2
    plan = split(n, settings.seed, index)
    fits = {}
    errors = {}
    for half in (1, 2):
        try:
            fits[half] = fit_half(x[plan.part(half)], x[plan.complement(half)], half,
                                  settings.notears, settings.beta_spec)
        except _FIT_ERRORS as exc:
            errors[half] = f"{type(exc).__name__}: {exc}"
    if fits:
        sigma2 = variance_estimate(
            [x[plan.complement(h)] for h in fits], [fits[h].w_bar for h in fits],
            n=sum(len(plan.complement(h)) for h in fits),
        )
    else:
        sigma2 = float("nan")
    boot = settings.bootstrap()
    halves = []
    for half in (1, 2):
        if half in fits and sigma2 > 0:
            hr = _analyze_half(fits[half], math.sqrt(sigma2), boot, (1, index, half), d)
            if not keep_fits:
                hr.fit = None
        else:
            hr = HalfResult(half, d, n_complement=len(plan.complement(half)), failed=True,
                            error=errors.get(half, "degenerate variance estimate"))
            warnings.warn(f"half {half} of split {index} failed; retaining by default",
                          RuntimeWarning, stacklevel=2)
        halves.append(hr)
    return SplitResult(index, plan, halves, sigma2)


# --------------------------------------------------------------------------
# single-mediator reports
# --------------------------------------------------------------------------


@dataclass
class MediationReport:
    q: int
    alpha: float
    reject: bool
    halves: list
    sigma2: list
    p_exposure: float = None
    p_outcome: float = None
    p_value: float = None
    n_splits: int = 1
    gamma: float = None
    name: str = None

    def to_dict(self):
        return asdict(self)


def _half_summary(sr, hr, q, alpha):
    c_exp, c_out = hr.critical_values(alpha)
    r_exp, r_out = hr.rejections(alpha)
    i = q - 1
    return {
        "split": sr.index,
        "half": hr.half,
        "failed": hr.failed,
        "error": hr.error,
        "p_exposure": float(hr.p_exposure[i]),
        "p_outcome": float(hr.p_outcome[i]),
        "c_exposure": float(c_exp[i]),
        "c_outcome": float(c_out[i]),
        "stat_exposure": float(hr.stat_exposure[i]),
        "stat_outcome": float(hr.stat_outcome[i]),
        "reject_exposure": bool(r_exp[i]),
        "reject_outcome": bool(r_out[i]),
        "reject": bool(r_exp[i] and r_out[i]),
        "s_exposure": int(hr.s_exposure[i]),
        "s_outcome": int(hr.s_outcome[i]),
        "n_edges": hr.n_edges,
        "n_degenerate": hr.n_degenerate,
    }


def _name(data, q):
    return data.columns[q] if isinstance(data, Dataset) else None


def report_single(sr, q, alpha, name=None):
    halves = [_half_summary(sr, hr, q, alpha) for hr in sr.halves]
    return MediationReport(q, alpha, any(h["reject"] for h in halves), halves, [sr.sigma2],
                           name=name)


def test_mediator(data, q, alpha=0.05, settings=None):
    """Single-split test of ``H0(q)``."""
    alpha = check_alpha(alpha)
    sr = run_split(data, settings, keep_fits=False)
    check_mediator(q, sr.d)
    return report_single(sr, q, alpha, _name(data, q))


test_mediator.__test__ = False


def combine_pvalues(pvalues, gamma=0.15):
    """``min(1, q_gamma(p / gamma))`` with ``q_gamma`` the ``ceil(gamma N)``-th smallest."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    p = np.sort(np.asarray(pvalues, dtype=float))
    if p.size == 0:
        raise ValueError("no p-values to combine")
    k = max(math.ceil(gamma * p.size), 1)
    return float(min(1.0, p[k - 1] / gamma))


def report_multisplit(splits, q, alpha, gamma, name=None):
    i = q - 1
    p_exp = [hr.p_exposure[i] for sr in splits for hr in sr.halves]
    p_out = [hr.p_outcome[i] for sr in splits for hr in sr.halves]
    ce, co = combine_pvalues(p_exp, gamma), combine_pvalues(p_out, gamma)
    pv = max(ce, co)
    halves = [_half_summary(sr, hr, q, alpha) for sr in splits for hr in sr.halves]
    return MediationReport(q, alpha, pv <= alpha, halves, [sr.sigma2 for sr in splits],
                           ce, co, pv, len(splits), gamma, name)


def test_mediator_multisplit(data, q, alpha=0.05, n_splits=5, gamma=0.15, settings=None):
    """Multi-split test: sub-p-values over ``2 * n_splits`` halves, quantile-combined."""
    alpha = check_alpha(alpha)
    if n_splits < 1:
        raise ValueError("n_splits must be at least 1")
    splits = [run_split(data, settings, s, keep_fits=False) for s in range(n_splits)]
    check_mediator(q, splits[0].d)
    return report_multisplit(splits, q, alpha, gamma, _name(data, q))


test_mediator_multisplit.__test__ = False


# --------------------------------------------------------------------------
# FDR selection
# --------------------------------------------------------------------------


def screenmin_threshold(p_min, alpha):
    """Largest ``c`` in ``(alpha/d, ..., alpha/2, alpha)`` with ``c |{q: p_min <= c}| <= alpha``."""
    p_min = np.asarray(p_min, dtype=float)
    d = p_min.size
    best = None
    for k in range(d, 0, -1):
        c = alpha / k
        if c * np.count_nonzero(p_min <= c) <= alpha:
            best = c
    return best


def by_cutoff(p_max, alpha, m=None):
    """Number ``h`` of smallest p-values selected by the BY step-up rule at ``alpha / 2``.

    ``m`` is the number of hypotheses (defaults to ``len(p_max)``).
    """
    p = np.sort(np.asarray(p_max, dtype=float))
    m = p.size if m is None else int(m)
    if m == 0:
        return 0
    harmonic = float(np.sum(1.0 / np.arange(1, m + 1)))
    ok = np.flatnonzero(p <= np.arange(1, p.size + 1) * alpha / (2.0 * m * harmonic))
    return int(ok[-1] + 1) if ok.size else 0


def select_half(p_min, p_max, alpha, screen=True):
    """ScreenMin followed by BY on the screened set (1-based mediator indices)."""
    p_min = np.asarray(p_min, dtype=float)
    p_max = np.asarray(p_max, dtype=float)
    d = p_min.size
    if screen:
        c = screenmin_threshold(p_min, alpha)
        h0 = np.flatnonzero(p_min <= c) + 1
    else:
        c = None
        h0 = np.arange(1, d + 1)
    h = by_cutoff(p_max[h0 - 1], alpha)
    order = h0[np.argsort(p_max[h0 - 1], kind="stable")]
    selected = np.sort(order[:h])
    return {"threshold": c, "screened": h0.tolist(), "cutoff": h,
            "selected": selected.tolist()}


@dataclass
class FdrReport:
    alpha: float
    screen: bool
    halves: list
    selected: list
    sigma2: float
    names: list = None

    def to_dict(self):
        return asdict(self)


def fdr_from_splits(sr, alpha, screen=True, names=None):
    alpha = check_alpha(alpha)
    halves = []
    union = set()
    for hr in sr.halves:
        res = select_half(hr.p_min, hr.p_max, alpha, screen)
        res.update(half=hr.half, failed=hr.failed,
                   p_min=hr.p_min.tolist(), p_max=hr.p_max.tolist())
        union.update(res["selected"])
        halves.append(res)
    selected = sorted(union)
    sel_names = [names[q] for q in selected] if names is not None else None
    return FdrReport(alpha, screen, halves, selected, sr.sigma2, sel_names)


def fdr_select(data, alpha=0.1, settings=None):
    """ScreenMin + BY selection on one split; ``H = H_1 U H_2``."""
    sr = run_split(data, settings, keep_fits=False)
    return fdr_from_splits(sr, alpha, True, _names(data))


def by_baseline(data, alpha=0.1, settings=None):
    """BY over all mediators (no screening) on the same p-values."""
    sr = run_split(data, settings, keep_fits=False)
    return fdr_from_splits(sr, alpha, False, _names(data))


def _names(data):
    return list(data.columns) if isinstance(data, Dataset) else None


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------


class _LoganParams(BaseEstimator):
    def _settings(self):
        notears = NotearsSettings(lam=self.lam, kappa=self.kappa,
                                  threshold_c0=self.threshold_c0, solver=self.solver)
        return LoganSettings(notears=notears, m=self.m, seed=self.seed)


class MediatorTest(_LoganParams):
    """Test every mediator column of ``X = [exposure, mediators..., outcome]``.

    With ``n_splits=1`` decisions follow the single-split rule (both
    sub-nulls rejected in some half); with more splits a mediator is
    rejected when its combined p-value is at most ``alpha``.

    Attributes
    ----------
    reject_ : ndarray of bool, shape (d,)
    pvalues_ : ndarray of shape (d,)
        Quantile-combined p-values (also reported for a single split).
    splits_ : list of SplitResult
    sigma2_ : float
        Variance estimate of the first split.
    """

    def __init__(self, alpha=0.05, n_splits=1, gamma=0.15, m=2000, lam=None, kappa=0.5,
                 threshold_c0=1e-3, solver="order", seed=0):
        self.alpha = alpha
        self.n_splits = n_splits
        self.gamma = gamma
        self.m = m
        self.lam = lam
        self.kappa = kappa
        self.threshold_c0 = threshold_c0
        self.solver = solver
        self.seed = seed

    def fit(self, X, y=None):
        alpha = check_alpha(self.alpha)
        X = check_samples(X, min_samples=4)
        settings = self._settings()
        self.splits_ = [run_split(X, settings, s, keep_fits=False)
                        for s in range(self.n_splits)]
        d = X.shape[1] - 2
        reports = [report_multisplit(self.splits_, q, alpha, self.gamma) for q in range(1, d + 1)]
        self.pvalues_ = np.array([r.p_value for r in reports])
        if self.n_splits == 1:
            self.reject_ = self.splits_[0].decisions(alpha)
        else:
            self.reject_ = self.pvalues_ <= alpha
        self.sigma2_ = self.splits_[0].sigma2
        self.n_features_in_ = X.shape[1]
        return self

    def report(self, q):
        check_is_fitted(self, "splits_")
        check_mediator(q, self.n_features_in_ - 2)
        if self.n_splits == 1:
            return report_single(self.splits_[0], q, self.alpha)
        return report_multisplit(self.splits_, q, self.alpha, self.gamma)


class MediatorSelector(SelectorMixin, _LoganParams):
    """FDR-controlled mediator selection as a column selector.

    ``transform`` keeps the selected mediator columns of ``X``.

    Attributes
    ----------
    selected_ : list of int
        1-based mediator indices (column indices of ``X``).
    report_ : FdrReport
    """

    def __init__(self, alpha=0.1, screen=True, m=2000, lam=None, kappa=0.5,
                 threshold_c0=1e-3, solver="order", seed=0):
        self.alpha = alpha
        self.screen = screen
        self.m = m
        self.lam = lam
        self.kappa = kappa
        self.threshold_c0 = threshold_c0
        self.solver = solver
        self.seed = seed

    def fit(self, X, y=None):
        X = check_samples(X, min_samples=4)
        sr = run_split(X, self._settings(), keep_fits=False)
        self.report_ = fdr_from_splits(sr, self.alpha, self.screen)
        self.selected_ = self.report_.selected
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selected_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask

"""Monte Carlo replication harness.

Replication ``r`` draws its data with seed ``seed + r`` and runs the
procedure with the same seed, so runs at different sample sizes are
matched. Each replication fits its splits once and derives every reported
quantity from them: single-split decisions over an alpha sweep,
multi-split p-values, ScreenMin+BY and plain BY selections, and the
variance estimate.
"""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mediate import LoganSettings, combine_pvalues, fdr_from_splits, run_split
from .sem import mediation_strength, sample

__all__ = ["BenchConfig", "replicate", "run_bench", "summarize", "write_metrics", "worker_count"]

ROC_ALPHAS = (0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4)
FDR_ALPHAS = (0.05, 0.1, 0.2, 0.4)


@dataclass
class BenchConfig:
    n_values: tuple = (100, 200)
    replications: int = 100
    alphas: tuple = ROC_ALPHAS
    fdr_alphas: tuple = FDR_ALPHAS
    n_splits: int = 1
    gamma: float = 0.15
    seed: int = 0
    settings: LoganSettings = field(default_factory=LoganSettings)

    def to_dict(self):
        return {
            "n_values": list(self.n_values), "replications": self.replications,
            "alphas": list(self.alphas), "fdr_alphas": list(self.fdr_alphas),
            "n_splits": self.n_splits, "gamma": self.gamma, "seed": self.seed,
            "settings": self.settings.to_dict(),
        }


def worker_count():
    """Worker processes allowed by ``LOGAN_THREADS`` (default 1)."""
    raw = os.environ.get("LOGAN_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"LOGAN_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"LOGAN_THREADS must be a positive integer, got {raw!r}")
    return value


def replicate(model, n, rep, cfg):
    """One replication; returns a plain dict of compact results."""
    seed = cfg.seed + rep
    data = sample(model, n, seed=seed)
    settings = LoganSettings(cfg.settings.notears, cfg.settings.beta_spec, cfg.settings.m, seed)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        splits = [run_split(data, settings, s, keep_fits=False) for s in range(cfg.n_splits)]
    first = splits[0]
    out = {
        "n": n,
        "rep": rep,
        "sigma2": first.sigma2,
        "failed_halves": sum(hr.failed for sr in splits for hr in sr.halves),
        "single": {a: first.decisions(a) for a in cfg.alphas},
        "logan": {a: fdr_from_splits(first, a, True).selected for a in cfg.fdr_alphas},
        "by": {a: fdr_from_splits(first, a, False).selected for a in cfg.fdr_alphas},
        "seconds": time.perf_counter() - start,
    }
    d = first.d
    out["multi_p"] = np.array([
        max(combine_pvalues([hr.p_exposure[q] for sr in splits for hr in sr.halves], cfg.gamma),
            combine_pvalues([hr.p_outcome[q] for sr in splits for hr in sr.halves], cfg.gamma))
        for q in range(d)
    ])
    return out


def _task(args):
    return replicate(*args)


def run_bench(model, cfg, progress=None):
    """All replications for every ``n``; ordered by ``(n, rep)`` whatever the worker count."""
    tasks = [(model, n, r, cfg) for n in cfg.n_values for r in range(cfg.replications)]
    workers = min(worker_count(), len(tasks)) if tasks else 1
    results = []
    if workers == 1:
        for t in tasks:
            results.append(_task(t))
            if progress:
                progress(len(results), len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_task, tasks):
                results.append(res)
                if progress:
                    progress(len(results), len(tasks))
    return results


def _fdr_tpr(selected, truth):
    sel = set(selected)
    false = len(sel - truth)
    fdp = false / len(sel) if sel else 0.0
    tpr = len(sel & truth) / len(truth) if truth else 0.0
    return fdp, tpr


def summarize(results, model, cfg):
    """Long-format metric rows: ``(metric, method, n, alpha, mediator, delta, value)``."""
    delta = mediation_strength(model)
    d = delta.size
    truth = set((np.flatnonzero(delta > 0) + 1).tolist())
    rows = []
    for n in cfg.n_values:
        res = [r for r in results if r["n"] == n]
        if not res:
            continue
        R = len(res)
        for a in cfg.alphas:
            rates = np.mean([r["single"][a] for r in res], axis=0)
            for q in range(1, d + 1):
                rows.append(("reject_rate", "single", n, a, q, delta[q - 1], rates[q - 1]))
            rows.extend(_roc_rows("single", n, a, rates, delta))
            if cfg.n_splits > 1:
                mrates = np.mean([r["multi_p"] <= a for r in res], axis=0)
                for q in range(1, d + 1):
                    rows.append(("reject_rate", f"multisplit{cfg.n_splits}", n, a, q,
                                 delta[q - 1], mrates[q - 1]))
                rows.extend(_roc_rows(f"multisplit{cfg.n_splits}", n, a, mrates, delta))
        for a in cfg.fdr_alphas:
            for method in ("logan", "by"):
                pairs = [_fdr_tpr(r[method][a], truth) for r in res]
                rows.append(("fdr", method, n, a, "", "", float(np.mean([p[0] for p in pairs]))))
                rows.append(("tpr", method, n, a, "", "", float(np.mean([p[1] for p in pairs]))))
        s2 = np.array([r["sigma2"] for r in res])
        rows.append(("sigma2_mean", "single", n, "", "", "", float(np.nanmean(s2))))
        rows.append(("sigma2_in_band", "single", n, "", "", "",
                     float(np.mean((s2 >= 0.85) & (s2 <= 1.15)))))
        rows.append(("failed_halves", "single", n, "", "", "",
                     float(sum(r["failed_halves"] for r in res))))
        rows.append(("replications", "single", n, "", "", "", float(R)))
    return rows


def _roc_rows(method, n, a, rates, delta):
    null = delta == 0
    out = []
    if null.any():
        out.append(("roc_fpr", method, n, a, "", "", float(rates[null].mean())))
    if (~null).any():
        out.append(("roc_tpr", method, n, a, "", "", float(rates[~null].mean())))
    return out


HEADER = ("metric", "method", "n", "alpha", "mediator", "delta", "value")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else str(float(v))
    return str(v)


def write_metrics(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_replications(results, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("n", "rep", "sigma2", "failed_halves"))
        for r in results:
            writer.writerow([r["n"], r["rep"], _fmt(r["sigma2"]), r["failed_halves"]])

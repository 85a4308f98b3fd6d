import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from logan.boolmat import bool_star, threshold_binary
from logan.dagfit import (NotearsDAG, NotearsSettings, PenalizedRegression, PenaltySpec,
                          acyclicity, default_lambda, fit_notears, fit_penalized,
                          notears_objective)
from logan.sem import SemModel, sample, scenario_model

from conftest import chain_w


# ---- acyclicity --------------------------------------------------------------

def test_h_zero_on_lower_triangular():
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = np.tril(rng.normal(size=(8, 8)) * 2, k=-1)
        assert abs(acyclicity(w)[0]) <= 1e-12


def test_h_two_cycle_closed_form():
    for a in (0.3, 1.0, 1.7):
        w = np.array([[0, a], [a, 0]])
        assert acyclicity(w)[0] == pytest.approx(2 * (math.cosh(a * a) - 1), rel=1e-12)


def test_h_gradient_finite_differences():
    rng = np.random.default_rng(1)
    step = 1e-5
    for _ in range(50):
        w = rng.normal(scale=0.5, size=(6, 6))
        _, grad = acyclicity(w)
        fd = np.zeros_like(w)
        for i in range(6):
            for j in range(6):
                e = np.zeros_like(w)
                e[i, j] = step
                fd[i, j] = (acyclicity(w + e)[0] - acyclicity(w - e)[0]) / (2 * step)
        assert np.linalg.norm(fd - grad) <= 1e-4 * max(np.linalg.norm(grad), 1e-8)


def test_h_rejects_nonfinite():
    with pytest.raises(ValueError):
        acyclicity(np.array([[0, np.nan], [0, 0]]))


# ---- penalized regression ------------------------------------------------------

def _orthonormal(n, p, rng):
    q, _ = np.linalg.qr(rng.normal(size=(n, p)))
    return q * math.sqrt(n)          # x'x / n = I


def soft(z, lam):
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0)


def firm(z, lam, gamma):
    az = np.abs(z)
    mid = np.sign(z) * (az - lam) / (1 - 1 / gamma)
    return np.where(az <= lam, 0.0, np.where(az <= gamma * lam, mid, z))


@pytest.mark.parametrize("seed", range(5))
def test_lasso_and_mcp_closed_forms(seed):
    rng = np.random.default_rng(seed)
    n, p = 80, 10
    x = _orthonormal(n, p, rng)
    y = x @ rng.uniform(-1.5, 1.5, p) + 0.3 * rng.normal(size=n)
    z = x.T @ y / n
    for lam in (0.05, 0.3, 0.8):
        las = fit_penalized(y, x, spec=PenaltySpec("lasso", lam))
        assert np.allclose(las, soft(z, lam), atol=1e-6)
        mcp = fit_penalized(y, x, spec=PenaltySpec("mcp", lam, gamma=3.0))
        assert np.allclose(mcp, firm(z, lam, 3.0), atol=1e-6)


def test_zero_penalty_is_ols():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(200, 8)) * rng.uniform(0.5, 3, 8)
    y = x @ rng.normal(size=8) + rng.normal(size=200)
    ols = np.linalg.lstsq(x, y, rcond=None)[0]
    for kind in ("lasso", "mcp"):
        beta = fit_penalized(y, x, spec=PenaltySpec(kind, 0.0), tol=1e-15)
        assert np.allclose(beta, ols, rtol=1e-8, atol=0)


def _kkt_gap(beta, x, y, lam, gamma, kind):
    n = x.shape[0]
    sd = np.sqrt((x * x).mean(axis=0))
    bs = beta * sd
    grad = (x / sd).T @ (y - x @ beta) / n
    gap = 0.0
    for k in range(x.shape[1]):
        if bs[k] == 0:
            gap = max(gap, abs(grad[k]) - lam)
        elif kind == "lasso":
            gap = max(gap, abs(grad[k] - lam * np.sign(bs[k])))
        else:
            pen = lam * np.sign(bs[k]) - bs[k] / gamma if abs(bs[k]) <= gamma * lam else 0.0
            gap = max(gap, abs(grad[k] - pen))
    return gap


@pytest.mark.parametrize("kind", ["lasso", "mcp"])
def test_kkt_on_collinear_design(kind):
    rng = np.random.default_rng(3)
    z = rng.normal(size=(100, 15))
    z[:, 1] = z[:, 0] + 0.05 * z[:, 1]
    z[:, 5] = 30 * z[:, 4] - z[:, 3]
    y = z[:, :4] @ [1.0, -0.5, 0.4, 0.2] + rng.normal(size=100)
    for lam in (0.02, 0.1, 0.4):
        beta = fit_penalized(y, z, spec=PenaltySpec(kind, lam))
        assert _kkt_gap(beta, z, y, lam, 3.0, kind) < 1e-6


def test_support_restriction_and_degenerate_columns():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(50, 5))
    x[:, 3] = 0.0
    y = x @ [1.0, 1.0, 1.0, 1.0, 1.0]
    beta = fit_penalized(y, x, allowed_support=[0, 3, 4], spec=PenaltySpec("lasso", 0.01))
    assert beta[1] == beta[2] == beta[3] == 0.0
    assert not fit_penalized(y, x, allowed_support=[], spec=PenaltySpec()).any()


def test_bic_tuning_single_predictor():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(400, 4))
    y = 0.8 * x[:, 0] + rng.normal(size=400)
    beta = fit_penalized(y, x, spec=PenaltySpec("mcp", tuning="bic"))
    assert np.flatnonzero(beta).tolist() == [0]
    # above gamma * lam MCP is unbiased: the single active coefficient is the OLS slope
    assert beta[0] == pytest.approx(x[:, 0] @ y / (x[:, 0] @ x[:, 0]), rel=1e-8)


def test_penalty_spec_validation():
    with pytest.raises(ValueError):
        PenaltySpec("scad")
    with pytest.raises(ValueError):
        PenaltySpec("mcp", gamma=1.0)
    grid = PenaltySpec(tuning="bic").lambda_grid(100)
    assert grid.size == 20 and np.all(np.diff(grid) < 0)
    assert grid[0] == pytest.approx(10 * math.sqrt(math.log(100) / 100))


def test_penalized_regression_estimator():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(120, 6))
    y = x @ [2.0, 0, 0, -1.0, 0, 0] + 0.1 * rng.normal(size=120)
    est = PenalizedRegression(penalty="lasso", lam=0.05)
    with pytest.raises(NotFittedError):
        est.predict(x)
    est.fit(x, y)
    assert np.flatnonzero(est.coef_).tolist() == [0, 3]
    assert est.score(x, y) > 0.99
    assert clone(est).get_params() == est.get_params()


# ---- NOTEARS -------------------------------------------------------------------

def test_no_edge_model():
    # lam = 0.1 under the (1/2n) loss scaling is lam = 0.2 for the (1/n) loss used here
    model = SemModel(np.zeros((6, 6)), 0.0)
    small = 0
    for seed in range(50):
        x = sample(model, 500, seed=seed).centered().values
        w = fit_notears(x, NotearsSettings(lam=0.2))
        small += np.count_nonzero(w) <= 2
    assert small >= 45


def test_chain_recovery():
    # lam = 0.05 under (1/2n) scaling; a weak spurious E -> Y edge appears in a few seeds
    model = SemModel(chain_w(), 0.0)
    exact = 0
    for seed in range(40):
        x = sample(model, 1000, seed=seed).centered().values
        w = fit_notears(x, NotearsSettings(lam=0.1))
        exact += np.array_equal(w != 0, chain_w() != 0)
        assert np.all(np.abs(w - chain_w()) <= 0.15)
    assert exact >= 34


def test_result_is_acyclic_and_role_constrained():
    model = scenario_model("A", seed=2)
    x = sample(model, 100, seed=0).centered().values
    w = fit_notears(x)
    assert acyclicity(w)[0] <= 1e-8
    assert not np.diag(bool_star(threshold_binary(w), n_terms=w.shape[0])).any()
    assert not w[0].any() and not w[:, -1].any()
    assert np.all(np.abs(w[w != 0]) > 1e-3)


def test_order_solver_rows_are_exact_lasso():
    # every returned row must be the lasso of its node on its predecessors
    model = scenario_model("A", seed=3)
    x = sample(model, 150, seed=1).centered().values[:, :12]
    n = x.shape[0]
    lam = default_lambda(n)
    w, info = fit_notears(x, NotearsSettings(threshold_c0=0.0, history=True))
    order = info["order"]
    assert order[0] == 0 and order[-1] == x.shape[1] - 1
    trace = info["traces"][0]
    assert all(b <= a + 1e-10 for a, b in zip(trace, trace[1:]))
    for pos, j in enumerate(order[1:], start=1):
        preds = order[:pos]
        r = x[:, j] - x @ w[j]
        grad = 2 * x[:, preds].T @ r / n
        row = w[j, preds]
        on = row != 0
        assert np.all(np.abs(grad[~on]) <= lam + 1e-7)
        assert np.allclose(grad[on], lam * np.sign(row[on]), atol=1e-7)
        assert not np.delete(w[j], preds).any()
    assert notears_objective(w, x.T @ x / n, lam) == pytest.approx(info["objective"])


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    model = scenario_model("A", seed=5)
    x = sample(model, 200, seed=2).centered().values[:, :10]
    x[:, -1] = x[:, -1] + x[:, 1:-1].sum(axis=1)
    w = fit_notears(x)
    perm = np.concatenate([[0], 1 + rng.permutation(8), [9]])
    wp = fit_notears(x[:, perm])
    back = np.empty_like(wp)
    back[np.ix_(perm, perm)] = wp
    assert np.allclose(back, w, atol=1e-6)


def test_lagrangian_solver_small():
    model = SemModel(chain_w(4, 1.0), 0.0)
    x = sample(model, 500, seed=3).centered().values
    w, info = fit_notears(x, NotearsSettings(lam=0.05, solver="lagrangian", history=True))
    assert info["h"] <= 1e-8
    assert np.array_equal(w != 0, chain_w(4, 1.0) != 0)
    for trace in info["traces"]:
        assert all(b <= a + 1e-10 for a, b in zip(trace, trace[1:]))


def test_error_shrinks_with_n():
    model = scenario_model("A", seed=6)
    errs = {}
    for n in (100, 200):
        e = []
        for seed in range(3):
            x = sample(model, n, seed=seed).centered().values
            e.append(np.linalg.norm(fit_notears(x) - model.w, axis=1).max())
        errs[n] = np.mean(e)
    assert errs[200] < errs[100]


def test_notears_estimator():
    model = SemModel(chain_w(), 5.0)
    x = sample(model, 800, seed=0).values
    est = NotearsDAG(lam=0.05).fit(x)
    assert est.adjacency().sum() == 2 and est.n_features_in_ == 3
    assert clone(est).get_params()["lam"] == 0.05
    with pytest.raises(ValueError):
        NotearsDAG(solver="bogus").fit(x)

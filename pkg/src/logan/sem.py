"""Gaussian linear structural equation models and the simulation scenarios."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boolmat import bool_star, threshold_binary
from .data import Dataset

__all__ = [
    "SemModel",
    "ScenarioConfig",
    "SCENARIOS",
    "sample",
    "generate_scenario",
    "mediation_strength",
    "scenario_a_fixture",
    "topological_order",
    "scenario_config",
    "scenario_model",
    "ModelError",
]


class ModelError(ValueError):
    """The coefficient matrix violates acyclicity or the role constraints."""


def topological_order(w):
    """Topological order of the graph with edges ``i -> j`` where ``w[j, i] != 0``.

    Raises ``ModelError`` if the graph has a directed cycle.
    """
    support = np.asarray(w) != 0
    p = support.shape[0]
    indeg = support.sum(axis=1)
    ready = [j for j in range(p) if indeg[j] == 0]
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in np.flatnonzero(support[:, i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(int(j))
    if len(order) != p:
        raise ModelError("coefficient matrix is not acyclic")
    return order


@dataclass
class SemModel:
    """``X - mu = W (X - mu) + eps`` with ``eps ~ N(0, sigma_star^2 I)``."""

    w: np.ndarray
    mu: np.ndarray
    sigma_star: float = 1.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        p = self.w.shape[0]
        if self.w.ndim != 2 or self.w.shape != (p, p) or p < 3:
            raise ModelError("w must be a square matrix with at least 3 nodes")
        self.mu = np.broadcast_to(np.asarray(self.mu, dtype=float), (p,)).copy()
        if not self.sigma_star > 0:
            raise ModelError("sigma_star must be positive")
        if np.any(np.diag(self.w) != 0):
            raise ModelError("self-loops are not allowed")
        if np.any(self.w[0] != 0) or np.any(self.w[:, -1] != 0):
            raise ModelError(
                "exposure must have no parents and the outcome no children"
            )
        topological_order(self.w)

    @property
    def d(self):
        return self.w.shape[0] - 2

    def covariance(self):
        """Population covariance ``sigma^2 (I - W)^-1 (I - W)^-T``."""
        inv = np.linalg.inv(np.eye(self.w.shape[0]) - self.w)
        return self.sigma_star**2 * inv @ inv.T

    def to_json(self):
        return json.dumps(
            {"w": self.w.tolist(), "mu": self.mu.tolist(), "sigma_star": self.sigma_star},
            indent=1,
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(np.array(obj["w"], dtype=float), np.array(obj["mu"]), float(obj["sigma_star"]))

    def save(self, path):
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ScenarioConfig:
    d: int
    p1: float
    p2: float
    n: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.n < 4:
            raise ValueError("n must be at least 4")
        for name in ("p1", "p2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")


# Named presets; "B-alt" is a sparser variant of "B".
SCENARIOS = {
    "A": dict(d=50, p1=0.05, p2=0.15, n=(100, 200)),
    "B": dict(d=100, p1=0.03, p2=0.1, n=(250, 500)),
    "B-alt": dict(d=100, p1=0.025, p2=0.075, n=(250, 500)),
    "C": dict(d=150, p1=0.02, p2=0.05, n=(250, 500)),
}


def scenario_config(name, n=None, seed=0):
    try:
        preset = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    n = preset["n"][0] if n is None else n
    return ScenarioConfig(preset["d"], preset["p1"], preset["p2"], n, seed)


def _annulus(rng, size):
    """Uniform on ``[-2, -0.5] U [0.5, 2]``."""
    sign = rng.choice([-1.0, 1.0], size=size)
    return sign * rng.uniform(0.5, 2.0, size=size)


def generate_scenario(cfg):
    """Random strictly lower-triangular ``W`` with Bernoulli-times-annulus entries.

    Exposure edges (column 0) and outcome edges (row ``d + 1``) appear with
    probability ``p1``; mediator-to-mediator edges with probability ``p2``.
    """
    rng = np.random.default_rng(cfg.seed)
    p = cfg.d + 2
    prob = np.full((p, p), cfg.p2)
    prob[:, 0] = cfg.p1
    prob[-1, :] = cfg.p1
    present = rng.random((p, p)) < prob
    magnitude = _annulus(rng, (p, p))
    w = np.where(np.tril(present, k=-1), magnitude, 0.0)
    return SemModel(w, np.ones(p), 1.0)


def sample(model, n, seed=None):
    """Draw ``n`` i.i.d. rows, generated node by node in topological order."""
    rng = np.random.default_rng(seed)
    p = model.w.shape[0]
    eps = rng.standard_normal((n, p)) * model.sigma_star
    x = np.zeros((n, p))
    for j in topological_order(model.w):
        parents = np.flatnonzero(model.w[j])
        x[:, j] = eps[:, j] + x[:, parents] @ model.w[j, parents]
    return Dataset(x + model.mu)


def mediation_strength(model):
    """``delta(q) = star[d + 1, q] * star[q, 0]`` for ``q = 1..d``."""
    w = model.w if isinstance(model, SemModel) else np.asarray(model, dtype=float)
    star = bool_star(np.abs(w))
    return star[-1, 1:-1] * star[1:-1, 0]


# Mediators with nonzero effect in the fixed Scenario A graph.
SCENARIO_A_DELTA = {10: 1.06, 12: 1.03, 20: 0.63, 28: 1.08, 30: 0.64, 41: 1.31}


def scenario_a_fixture(seed=2021):
    """A ``d = 50`` graph whose nonzero mediation strengths are ``SCENARIO_A_DELTA``.

    Each listed mediator ``q`` gets a direct path ``E -> q -> Y`` whose
    weights multiply to its listed strength. Mediator-to-mediator edges
    are then proposed in random order with probability ``p2 = 0.15`` and
    kept only when they leave every ``delta(q)`` unchanged, so the graph has
    Scenario A's density while the significant set is exactly ``SCENARIO_A_DELTA``.
    """
    cfg = scenario_config("A", seed=seed)
    rng = np.random.default_rng(seed)
    p = cfg.d + 2
    w = np.zeros((p, p))
    for q, delta in SCENARIO_A_DELTA.items():
        a = rng.uniform(max(0.5, delta / 2.0), min(2.0, delta / 0.5))
        w[q, 0] = rng.choice([-1.0, 1.0]) * a
        w[p - 1, q] = rng.choice([-1.0, 1.0]) * delta / a
    target = mediation_strength(w)
    for j1 in range(2, p - 1):
        for j2 in range(1, j1):
            if rng.random() >= cfg.p2:
                continue
            value = _annulus(rng, None)
            w[j1, j2] = value
            if not np.array_equal(mediation_strength(w), target):
                w[j1, j2] = 0.0
    # a few exposure-only and outcome-only edges that create no new mediator
    for j in range(1, p - 1):
        for row, col in ((j, 0), (p - 1, j)):
            if w[row, col] == 0 and rng.random() < cfg.p1:
                w[row, col] = _annulus(rng, None)
                if not np.array_equal(mediation_strength(w), target):
                    w[row, col] = 0.0
    return SemModel(w, np.ones(p), 1.0)


def support_star(w):
    return bool_star(threshold_binary(w, 0.0))


def scenario_model(name, seed=0):
    """Named graph: a preset drawn with ``seed``, or ``"A-fixture"`` for the fixture."""
    if name == "A-fixture":
        return scenario_a_fixture()
    return generate_scenario(scenario_config(name, seed=seed))

"""Random-graph samplers and analytic degree/clustering properties of the
multiplicative model, where an edge between nodes i and j appears
independently with probability pi_i * pi_j and each connectivity pi_i has a
Beta(a, b) prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .graphs import Graph, new_graph

__all__ = [
    "BetaHyper",
    "sample_connectivities",
    "sample_multiplicative",
    "sample_erdos_renyi",
    "sample_barabasi_albert",
    "sample_community",
    "analytic_degree_moments",
    "degree_pmf",
    "factorial_moment",
    "dispersion_index",
    "poisson_dispersion_shape",
    "skewness_index",
    "neighbour_mean_degree",
    "clustering_coefficient",
    "match_hyperparameters",
]


@dataclass(frozen=True)
class BetaHyper:
    """Beta(a, b) hyperparameters for the node connectivities."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"Beta shapes must be positive, got a={self.a}, b={self.b}")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    @property
    def variance(self) -> float:
        s = self.a + self.b
        return self.a * self.b / (s * s * (s + 1.0))


def sample_connectivities(hyper: BetaHyper, p: int, rng: np.random.Generator) -> np.ndarray:
    """p independent Beta(a, b) connectivity draws."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return rng.beta(hyper.a, hyper.b, size=p)


def _graph_from_upper(p: int, upper: np.ndarray) -> Graph:
    adj = np.zeros((p, p), dtype=np.uint8)
    iu = np.triu_indices(p, 1)
    adj[iu] = upper
    return Graph(adj + adj.T)


def sample_multiplicative(connectivities, rng: np.random.Generator) -> Graph:
    """Draw a graph with independent edges, P(edge ij) = pi_i * pi_j."""
    pi = np.asarray(connectivities, dtype=float)
    if np.any(pi < 0) or np.any(pi > 1):
        raise ValueError("connectivities must lie in [0, 1]")
    p = len(pi)
    prob = np.outer(pi, pi)[np.triu_indices(p, 1)]
    return _graph_from_upper(p, (rng.random(len(prob)) < prob).astype(np.uint8))


def sample_erdos_renyi(p: int, alpha: float, rng: np.random.Generator) -> Graph:
    """Each of the p(p-1)/2 edges included independently with probability alpha."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"inclusion probability must be in [0, 1], got {alpha}")
    r = p * (p - 1) // 2
    return _graph_from_upper(p, (rng.random(r) < alpha).astype(np.uint8))


def sample_barabasi_albert(p: int, m: int = 2, rng: np.random.Generator | None = None) -> Graph:
    """Preferential-attachment graph: a 2-node connected seed, then each new
    node links to ``m`` distinct existing nodes chosen with probability
    proportional to their current degree."""
    if rng is None:
        rng = np.random.default_rng()
    if p < 3:
        raise ValueError("p must be >= 3")
    if m < 1:
        raise ValueError("m must be >= 1")
    adj = np.zeros((p, p), dtype=np.uint8)
    adj[0, 1] = adj[1, 0] = 1
    degree = np.zeros(p, dtype=float)
    degree[:2] = 1.0
    for new in range(2, p):
        if m > new:
            raise ValueError(f"cannot attach {m} links when only {new} nodes exist")
        targets: list[int] = []
        weights = degree[:new].copy()
        for _ in range(m):
            probs = weights / weights.sum()
            t = int(rng.choice(new, p=probs))
            targets.append(t)
            weights[t] = 0.0
        for t in targets:
            adj[new, t] = adj[t, new] = 1
            degree[t] += 1.0
        degree[new] = float(m)
    return Graph(adj)


def sample_community(
    p: int, within: float = 0.6, across: float = 0.02, rng: np.random.Generator | None = None
) -> Graph:
    """Two equal-size communities (nodes 1..p/2 and p/2+1..p) with independent
    within-group and across-group edge rates."""
    if rng is None:
        rng = np.random.default_rng()
    if p % 2 != 0:
        raise ValueError("p must be even for two equal communities")
    for name, rate in (("within", within), ("across", across)):
        if not (0.0 <= rate <= 1.0):
            raise ValueError(f"{name} rate must be in [0, 1], got {rate}")
    half = p // 2
    group = np.arange(p) < half
    ii, jj = np.triu_indices(p, 1)
    prob = np.where(group[ii] == group[jj], within, across)
    return _graph_from_upper(p, (rng.random(len(prob)) < prob).astype(np.uint8))


def analytic_degree_moments(hyper: BetaHyper, p: int) -> tuple[float, float]:
    """Mean and variance of the degree of a randomly chosen node."""
    mu, s2 = hyper.mean, hyper.variance
    mean = (p - 1) * mu**2
    var = (p - 1) * mu**2 * (1.0 - mu**2 + (p - 2) * s2)
    return mean, var


def degree_pmf(hyper: BetaHyper, p: int, d: int) -> float:
    """P(D = d) for a randomly chosen node's degree.

    One-dimensional integral of the conditional Binomial(p-1, mu*pi) pmf
    against the Beta(a, b) density; the Beta kernel (possibly endpoint
    singular) is handled as an algebraic quadrature weight.
    """
    if not (0 <= d <= p - 1):
        raise ValueError(f"degree must be in [0, {p - 1}], got {d}")
    a, b, mu = hyper.a, hyper.b, hyper.mean
    if p == 1:
        return 1.0 if d == 0 else 0.0
    val, _ = integrate.quad(
        lambda t: (1.0 - mu * t) ** (p - 1 - d),
        0.0,
        1.0,
        weight="alg",
        wvar=(a + d - 1.0, b - 1.0),
        epsabs=1e-10,
        epsrel=1e-10,
        limit=200,
    )
    log_pref = (
        special.gammaln(p)
        - special.gammaln(d + 1)
        - special.gammaln(p - d)
        + d * math.log(mu)
        - special.betaln(a, b)
    )
    if val <= 0.0:
        return 0.0
    return float(math.exp(log_pref + math.log(val)))


def factorial_moment(hyper: BetaHyper, p: int, k: int) -> float:
    """k-th factorial moment E[D(D-1)...(D-k+1)] of the degree."""
    if not (1 <= k <= p - 1):
        raise ValueError(f"order must be in [1, {p - 1}], got {k}")
    a, b, mu = hyper.a, hyper.b, hyper.mean
    log_val = (
        special.gammaln(p)
        - special.gammaln(p - k)
        + special.betaln(a + k, b)
        - special.betaln(a, b)
        + k * math.log(mu)
    )
    return float(math.exp(log_val))


def dispersion_index(hyper: BetaHyper, p: int) -> float:
    """Variance-to-mean ratio of the degree distribution."""
    mu, s2 = hyper.mean, hyper.variance
    return 1.0 - mu**2 + (p - 2) * s2


def poisson_dispersion_shape(b: float, p: int) -> float:
    """The shape ``a`` at which the dispersion index equals 1 for given b, p.

    Root of a^2 + (b+1)a - (p-2)b = 0, derived directly from the dispersion
    formula.
    """
    disc = (b + 1.0) ** 2 + 4.0 * (p - 2) * b
    return (-(b + 1.0) + math.sqrt(disc)) / 2.0


def skewness_index(hyper: BetaHyper, p: int) -> float:
    """Pearson moment skewness of the degree distribution."""
    a, b = hyper.a, hyper.b
    mu, s2 = hyper.mean, hyper.variance
    mean, var = analytic_degree_moments(hyper, p)
    e_pi3 = (a + 2.0) * (a + 1.0) * a / ((a + b + 2.0) * (a + b + 1.0) * (a + b))
    e_d3 = (p - 1) * mu**2 * (
        1.0 + 3.0 * (p - 2) * (mu**2 + s2) + (p - 2) * (p - 3) * mu * e_pi3
    )
    return (e_d3 - 3.0 * mean * var - mean**3) / var**1.5


def neighbour_mean_degree(hyper: BetaHyper, p: int) -> float:
    """Average degree of a node's neighbours (independent of the node)."""
    mu, s2 = hyper.mean, hyper.variance
    return 1.0 + (p - 2) * (mu**2 + s2)


def clustering_coefficient(hyper: BetaHyper) -> float:
    """Global clustering coefficient, (a+1)/(a+b+1).

    Equals E[pi^2]/E[pi].  The model's realized triangle-to-wedge ratio is
    the square of this value, so simulation checks should compare against
    sqrt(3 * triangles / wedges).
    """
    return (hyper.a + 1.0) / (hyper.a + hyper.b + 1.0)


def match_hyperparameters(target_mean: float, target_var: float, p: int) -> BetaHyper:
    """Invert the degree mean/variance formulas to Beta hyperparameters.

    When the requested variance is unattainable for any a, b > 0, fall back
    to b = 1000 (connectivities nearly deterministic) and solve only the
    mean equation.
    """
    if not (0.0 < target_mean < p - 1):
        raise ValueError(f"target mean must be in (0, {p - 1}), got {target_mean}")
    if target_var <= 0.0:
        raise ValueError("target variance must be positive")
    mu = math.sqrt(target_mean / (p - 1))

    def _mean_only() -> BetaHyper:
        b = 1000.0
        return BetaHyper(a=b * mu / (1.0 - mu), b=b)

    if p < 3:
        return _mean_only()
    s2 = (target_var / target_mean - 1.0 + mu**2) / (p - 2)
    if s2 <= 0.0 or s2 >= mu * (1.0 - mu):
        return _mean_only()
    nu = mu * (1.0 - mu) / s2 - 1.0
    a, b = mu * nu, (1.0 - mu) * nu
    if a <= 0.0 or b <= 0.0:
        return _mean_only()
    return BetaHyper(a=a, b=b)

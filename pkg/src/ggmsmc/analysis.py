"""Simulation-study tooling and posterior summarization.

Builds benchmark datasets (truth graph, sparse precision matrix, Gaussian
observations), and turns weighted SMC ensembles into edge-probability
matrices, differential networks, ranking scores, centrality tables,
connectivity posteriors, and mean precision matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special, stats

from .graphs import Graph, betweenness, degree_sequence
from .gwishart import GroupData, GWishartParams, sample_gwishart
from .priors import (
    GraphPrior,
    JointMultiplicativePrior,
    MultiplicativePrior,
    sample_beta_given_graphs,
    sample_pi_given_graph,
    two_group_covariates,
)
from .random_graphs import (
    BetaHyper,
    match_hyperparameters,
    sample_barabasi_albert,
    sample_community,
    sample_connectivities,
    sample_multiplicative,
)
from .smc import ParticleEnsemble

__all__ = [
    "Dataset",
    "Replicate",
    "DifferentialEdge",
    "PosteriorSummary",
    "SummaryOptions",
    "SCENARIOS",
    "make_precision",
    "simulate_study",
    "edge_probabilities",
    "differential_network",
    "auc",
    "summarize",
]


@dataclass
class Dataset:
    """Observations with group labels (1..K) and variable names."""

    observations: np.ndarray
    group_index: np.ndarray
    variable_names: list[str]
    standardized: bool = False

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        idx = np.asarray(self.group_index, dtype=np.int64)
        if obs.ndim != 2:
            raise ValueError("observations must be a 2-d array")
        if len(idx) != obs.shape[0]:
            raise ValueError("need one group label per observation row")
        if len(self.variable_names) != obs.shape[1]:
            raise ValueError("need one variable name per column")
        k = int(idx.max()) if len(idx) else 0
        for g in range(1, k + 1):
            if not np.any(idx == g):
                raise ValueError(f"group {g} is empty")
        self.observations = obs
        self.group_index = idx

    @property
    def p(self) -> int:
        return self.observations.shape[1]

    @property
    def n_groups(self) -> int:
        return int(self.group_index.max())

    def group_sizes(self) -> list[int]:
        return [int(np.sum(self.group_index == g)) for g in range(1, self.n_groups + 1)]

    def group_data(self) -> list[GroupData]:
        """Per-group sufficient statistics for the zero-mean Gaussian model."""
        out = []
        for g in range(1, self.n_groups + 1):
            y = self.observations[self.group_index == g]
            out.append(GroupData.from_observations(y))
        return out


def make_precision(g: Graph, rng: np.random.Generator) -> np.ndarray:
    """Sparse positive-definite precision matrix with support exactly on ``g``.

    Edge entries are uniform on [-0.6,-0.3] union [0.3,0.6]; the diagonal
    shift 0.1 + |smallest eigenvalue| guarantees positive definiteness.
    """
    p = g.p
    c_mat = np.zeros((p, p))
    for i, j in g.edges():
        val = rng.uniform(0.3, 0.6) * (1.0 if rng.random() < 0.5 else -1.0)
        c_mat[i - 1, j - 1] = c_mat[j - 1, i - 1] = val
    smallest = float(np.linalg.eigvalsh(c_mat)[0]) if p > 1 else float(c_mat[0, 0])
    return c_mat + (0.1 + abs(smallest)) * np.eye(p)


def _gaussian_sample(precision: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(precision)
    z = rng.standard_normal((n, precision.shape[0]))
    return np.linalg.solve(chol.T, z.T).T


@dataclass
class Replicate:
    """One simulated dataset with its ground truth."""

    truth: tuple[Graph, ...]
    precisions: tuple[np.ndarray, ...]
    dataset: Dataset
    matched_hyper: BetaHyper | None = None


SCENARIOS = ("multiplicative", "scale-free", "community", "joint-k2")


def _sample_truth(scenario: str, p: int, rng: np.random.Generator, params: dict) -> tuple[Graph, ...]:
    if scenario == "multiplicative":
        hyper = BetaHyper(params.get("a", 0.1), params.get("b", 0.1))
        return (sample_multiplicative(sample_connectivities(hyper, p, rng), rng),)
    if scenario == "scale-free":
        return (sample_barabasi_albert(p, m=params.get("m", 2), rng=rng),)
    if scenario == "community":
        return (
            sample_community(
                p, within=params.get("within", 0.6), across=params.get("across", 0.02), rng=rng
            ),
        )
    if scenario == "joint-k2":
        s1 = params.get("sigma1_sq", 10.0)
        s2 = params.get("sigma2_sq", 0.01)
        covariates = two_group_covariates()
        beta = np.stack(
            [rng.normal(0.0, math.sqrt(s1), size=p), rng.normal(0.0, math.sqrt(s2), size=p)],
            axis=1,
        )
        graphs = []
        for k in range(2):
            pi = special.expit(beta @ covariates[k])
            graphs.append(sample_multiplicative(pi, rng))
        return tuple(graphs)
    raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")


def _degenerate_for_ranking(g: Graph) -> bool:
    r = g.p * (g.p - 1) // 2
    return g.edge_count == 0 or g.edge_count == r


def simulate_study(
    scenario: str,
    p: int,
    h: int = 100,
    replicates: int = 10,
    rng: np.random.Generator | None = None,
    require_nondegenerate: bool = True,
    **params,
) -> list[Replicate]:
    """Simulated benchmark datasets for one scenario.

    Per replicate: truth graph(s) from the named generator, a sparse
    precision matrix per graph, and ``h`` Gaussian observations (split
    evenly over the two groups in the joint scenario).  With
    ``require_nondegenerate`` (the default), truths with no edges or all
    edges are redrawn so that edge-ranking scores remain well defined.
    """
    if rng is None:
        rng = np.random.default_rng()
    out = []
    names = [f"v{i}" for i in range(1, p + 1)]
    for _ in range(replicates):
        for _attempt in range(1000):
            truth = _sample_truth(scenario, p, rng, params)
            if not require_nondegenerate or not any(_degenerate_for_ranking(g) for g in truth):
                break
        else:
            raise RuntimeError("could not draw a non-degenerate truth graph")
        precisions = tuple(make_precision(g, rng) for g in truth)
        k = len(truth)
        sizes = [h // k] * k
        sizes[-1] += h - sum(sizes)
        obs = np.vstack([_gaussian_sample(om, n, rng) for om, n in zip(precisions, sizes)])
        idx = np.concatenate([np.full(n, g + 1, dtype=np.int64) for g, n in enumerate(sizes)])
        matched = None
        if k == 1:
            d = degree_sequence(truth[0]).astype(float)
            mean = float(np.clip(d.mean(), 0.05, p - 1 - 0.05))
            var = max(float(d.var(ddof=1)), 1e-3)
            matched = match_hyperparameters(mean, var, p)
        out.append(
            Replicate(
                truth=truth,
                precisions=precisions,
                dataset=Dataset(obs, idx, names),
                matched_hyper=matched,
            )
        )
    return out


def edge_probabilities(ensemble: ParticleEnsemble) -> list[np.ndarray]:
    """Weighted posterior edge-inclusion probability matrix per group."""
    w = ensemble.weights
    out = []
    for k in range(ensemble.n_groups):
        rho = np.einsum("n,nij->ij", w, ensemble.adjacency[:, k].astype(float))
        rho = 0.5 * (rho + rho.T)
        np.fill_diagonal(rho, 0.0)
        out.append(rho)
    return out


@dataclass(frozen=True)
class DifferentialEdge:
    """Edge whose inclusion probability differs across the two conditions."""

    i: int
    j: int
    prob_g1: float
    prob_g2: float
    abs_difference: float
    direction: str


def differential_network(
    rho1: np.ndarray, rho2: np.ndarray, threshold: float = 0.5
) -> list[DifferentialEdge]:
    """Edges with |rho1 - rho2| strictly above ``threshold``, sorted by the
    absolute difference, largest first."""
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    if rho1.shape != rho2.shape:
        raise ValueError("edge-probability matrices must have matching shapes")
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie strictly between 0 and 1")
    p = rho1.shape[0]
    out = []
    for i in range(p):
        for j in range(i + 1, p):
            delta = abs(rho1[i, j] - rho2[i, j])
            if delta > threshold:
                direction = "in G1 not G2" if rho1[i, j] > rho2[i, j] else "in G2 not G1"
                out.append(
                    DifferentialEdge(i + 1, j + 1, float(rho1[i, j]), float(rho2[i, j]), float(delta), direction)
                )
    out.sort(key=lambda e: (-e.abs_difference, e.i, e.j))
    return out


def auc(scores: np.ndarray, truth: Graph) -> float:
    """Probability that a random true edge outscores a random non-edge.

    ``scores`` follows the row-major upper-triangle order of the edge
    positions.  Ties count one half (midrank convention).
    """
    scores = np.asarray(scores, dtype=float)
    iu = np.triu_indices(truth.p, 1)
    labels = truth.adjacency[iu].astype(bool)
    if len(scores) != len(labels):
        raise ValueError("need one score per possible edge")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("truth graph must have at least one edge and one non-edge")
    ranks = stats.rankdata(scores)
    u = float(ranks[labels].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass
class SummaryOptions:
    """Knobs for posterior summarization."""

    connectivity_draws: int = 2000
    max_mixture_graphs: int = 200
    mean_precision: bool = False
    precision_draws: int = 200
    quantiles: tuple[float, float] = (0.025, 0.975)
    seed: int = 0


@dataclass
class PosteriorSummary:
    """Posterior quantities derived from a weighted ensemble."""

    edge_prob: list[np.ndarray]
    weighted_degree: np.ndarray  # (K, p)
    weighted_betweenness: np.ndarray  # (K, p)
    connectivity_mean: np.ndarray | None = None  # (K, p)
    connectivity_interval: np.ndarray | None = None  # (K, p, 2)
    coefficient_mean: np.ndarray | None = None  # (p, Q)
    coefficient_interval: np.ndarray | None = None  # (p, Q, 2)
    differential_edges: list[DifferentialEdge] = field(default_factory=list)
    mean_precision: list[np.ndarray] | None = None


def _weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    order = np.argsort(values)
    v = values[order]
    cw = np.cumsum(weights[order])
    cw /= cw[-1]
    idx = int(np.searchsorted(cw, q, side="left"))
    return float(v[min(idx, len(v) - 1)])


def _unique_particles(ensemble: ParticleEnsemble, cap: int):
    """Aggregate duplicate particles; keep the ``cap`` heaviest."""
    w = ensemble.weights
    seen: dict[bytes, int] = {}
    keys = []
    agg = []
    for n in range(ensemble.n_particles):
        key = ensemble.adjacency[n].tobytes()
        if key in seen:
            agg[seen[key]][1] += w[n]
        else:
            seen[key] = len(agg)
            agg.append([n, w[n]])
            keys.append(key)
    agg.sort(key=lambda t: -t[1])
    agg = agg[:cap]
    total = sum(t[1] for t in agg)
    return [(int(n), float(weight / total)) for n, weight in agg]


def summarize(
    ensemble: ParticleEnsemble,
    prior: GraphPrior | None = None,
    gwishart: Sequence[GWishartParams] | None = None,
    data: Sequence[GroupData] | None = None,
    options: SummaryOptions | None = None,
    differential_threshold: float = 0.5,
) -> PosteriorSummary:
    """Posterior summary tables from a weighted ensemble.

    Degree and betweenness are weighted means of the per-particle values.
    For multiplicative priors, connectivity (and for joint priors,
    coefficient) posteriors are sampled per distinct graph and mixed with
    the particle weights.  Mean precision matrices are opt-in: they need
    posterior G-Wishart draws for every distinct graph and dominate the
    runtime.
    """
    options = options or SummaryOptions()
    k_groups = ensemble.n_groups
    p = ensemble.p
    w = ensemble.weights
    edge_prob = edge_probabilities(ensemble)

    degrees = ensemble.adjacency.sum(axis=3).astype(float)  # (N, K, p)
    weighted_degree = np.einsum("n,nkp->kp", w, degrees)

    betweenness_cache: dict[bytes, np.ndarray] = {}
    weighted_betw = np.zeros((k_groups, p))
    for n in range(ensemble.n_particles):
        for k in range(k_groups):
            key = ensemble.adjacency[n, k].tobytes()
            b = betweenness_cache.get(key)
            if b is None:
                b = betweenness(Graph._from_valid(ensemble.adjacency[n, k]))
                betweenness_cache[key] = b
            weighted_betw[k] += w[n] * b

    summary = PosteriorSummary(
        edge_prob=edge_prob,
        weighted_degree=weighted_degree,
        weighted_betweenness=weighted_betw,
    )
    if k_groups == 2:
        summary.differential_edges = differential_network(
            edge_prob[0], edge_prob[1], differential_threshold
        )

    rng = np.random.default_rng(options.seed)
    mixture = _unique_particles(ensemble, options.max_mixture_graphs)

    if isinstance(prior, MultiplicativePrior):
        draws_list, dw = [], []
        for n, weight in mixture:
            n_draws = max(20, int(round(options.connectivity_draws * weight)))
            d = sample_pi_given_graph(
                Graph._from_valid(ensemble.adjacency[n, 0]), prior.a, prior.b, n_draws, rng,
                burn_in=200,
            )
            draws_list.append(d)
            dw.append(np.full(n_draws, weight / n_draws))
        draws = np.vstack(draws_list)
        dweights = np.concatenate(dw)
        lo, hi = options.quantiles
        summary.connectivity_mean = (dweights @ draws)[None, :]
        interval = np.empty((1, p, 2))
        for i in range(p):
            interval[0, i, 0] = _weighted_quantile(draws[:, i], dweights, lo)
            interval[0, i, 1] = _weighted_quantile(draws[:, i], dweights, hi)
        summary.connectivity_interval = interval
    elif isinstance(prior, JointMultiplicativePrior):
        q = prior.n_covariates
        draws_list, dw = [], []
        for n, weight in mixture:
            n_draws = max(20, int(round(options.connectivity_draws * weight)))
            graphs = tuple(
                Graph._from_valid(ensemble.adjacency[n, k]) for k in range(k_groups)
            )
            d = sample_beta_given_graphs(
                graphs, prior.covariates, prior.coef_variances, n_draws, rng, burn_in=200
            )
            draws_list.append(d)
            dw.append(np.full(n_draws, weight / n_draws))
        beta_draws = np.vstack(draws_list)  # (n, p, Q)
        dweights = np.concatenate(dw)
        lo, hi = options.quantiles
        summary.coefficient_mean = np.einsum("n,npq->pq", dweights, beta_draws)
        coef_int = np.empty((p, q, 2))
        for i in range(p):
            for jq in range(q):
                coef_int[i, jq, 0] = _weighted_quantile(beta_draws[:, i, jq], dweights, lo)
                coef_int[i, jq, 1] = _weighted_quantile(beta_draws[:, i, jq], dweights, hi)
        summary.coefficient_interval = coef_int
        pi_draws = np.stack(
            [special.expit(beta_draws @ prior.covariates[k]) for k in range(k_groups)]
        )  # (K, n, p)
        summary.connectivity_mean = np.einsum("n,knp->kp", dweights, pi_draws)
        conn_int = np.empty((k_groups, p, 2))
        for k in range(k_groups):
            for i in range(p):
                conn_int[k, i, 0] = _weighted_quantile(pi_draws[k, :, i], dweights, lo)
                conn_int[k, i, 1] = _weighted_quantile(pi_draws[k, :, i], dweights, hi)
        summary.connectivity_interval = conn_int

    if options.mean_precision:
        if gwishart is None or data is None:
            raise ValueError("mean precision matrices need the G-Wishart params and data")
        gwishart = list(gwishart)
        data = list(data)
        if len(gwishart) == 1 and k_groups > 1:
            gwishart = gwishart * k_groups
        mats = [np.zeros((p, p)) for _ in range(k_groups)]
        for k in range(k_groups):
            posterior = GWishartParams(
                gwishart[k].dof + data[k].n, np.asarray(gwishart[k].scale) + data[k].scatter
            )
            for n, weight in mixture:
                n_draws = max(5, int(round(options.precision_draws * weight)))
                draws = sample_gwishart(
                    Graph._from_valid(ensemble.adjacency[n, k]), posterior, rng,
                    n_draws=n_draws, burn_in=100, thin=2,
                )
                mats[k] += weight * draws.mean(axis=0)
        summary.mean_precision = mats
    return summary

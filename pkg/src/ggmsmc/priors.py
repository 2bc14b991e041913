"""Graph priors: uniform, Bernoulli, size-based, and the multiplicative
family for one or several graphs.

Multiplicative prior probabilities integrate the node connectivities out of
the product-Bernoulli edge model.  Small problems are integrated exactly;
otherwise a Laplace approximation around the mode of the integrand (after a
logit change of variables for K=1, directly in the regression coefficients
for K>1) is used, with analytic gradients and Hessians.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate, special

from .graphs import Graph, degree_sequence

__all__ = [
    "UniformPrior",
    "BernoulliPrior",
    "SizeBasedPrior",
    "MultiplicativePrior",
    "JointMultiplicativePrior",
    "GraphPrior",
    "LaplaceReport",
    "two_group_covariates",
    "log_prior",
    "laplace_log_prior_k1",
    "laplace_log_prior_joint",
    "exact_log_prior_small_p",
    "sample_pi_given_graph",
    "sample_beta_given_graphs",
    "prior_edge_count_pmf",
]


@dataclass(frozen=True)
class UniformPrior:
    """Equal mass on every joint graph configuration."""


@dataclass(frozen=True)
class BernoulliPrior:
    """Each edge included independently with fixed probability ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class SizeBasedPrior:
    """Beta-binomial prior on the edge count; a = b = 1 gives equal mass to
    every size and equal mass to graphs of the same size."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("shape parameters must be positive")


@dataclass(frozen=True)
class MultiplicativePrior:
    """Single-graph multiplicative prior with Beta(a, b) connectivities."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("shape parameters must be positive")


def two_group_covariates() -> np.ndarray:
    """Intercept-plus-indicator design for a two-group comparison."""
    return np.array([[1.0, 0.0], [1.0, 1.0]])


@dataclass(frozen=True)
class JointMultiplicativePrior:
    """Joint prior over K graphs with logistic-regression connectivities.

    ``covariates`` is the K x Q design (one row per graph); each regression
    coefficient beta_{iq} has an independent N(0, coef_variances[q]) prior.
    """

    covariates: np.ndarray
    coef_variances: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.covariates, dtype=float))
        s2 = np.atleast_1d(np.asarray(self.coef_variances, dtype=float))
        if x.shape[1] != len(s2):
            raise ValueError("covariate dimension and variance count differ")
        if np.any(s2 <= 0):
            raise ValueError("coefficient variances must be positive")
        x.setflags(write=False)
        s2.setflags(write=False)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "coef_variances", s2)

    @property
    def n_groups(self) -> int:
        return self.covariates.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]


GraphPrior = Union[
    UniformPrior, BernoulliPrior, SizeBasedPrior, MultiplicativePrior, JointMultiplicativePrior
]


@dataclass(frozen=True)
class LaplaceReport:
    """Laplace approximation of a log prior probability with mode diagnostics."""

    log_value: float
    mode: np.ndarray
    iterations: int
    gradient_norm_at_mode: float


def _as_graph_tuple(graphs) -> tuple[Graph, ...]:
    if isinstance(graphs, Graph):
        return (graphs,)
    return tuple(graphs)


def prior_n_groups(spec: GraphPrior) -> int | None:
    """Number of graphs the prior applies to; None means any."""
    if isinstance(spec, JointMultiplicativePrior):
        return spec.n_groups
    if isinstance(spec, UniformPrior):
        return None
    return 1


# ---------------------------------------------------------------------------
# K = 1 multiplicative objective (logit scale), gradients and Hessians
# ---------------------------------------------------------------------------


def _k1_parts(u: np.ndarray):
    pi = special.expit(u)
    log_pi = -np.logaddexp(0.0, -u)
    dpi = pi * (1.0 - pi)
    return pi, log_pi, dpi


def _masked_log_one_minus_product(log_pi: np.ndarray, nonedge: np.ndarray) -> np.ndarray:
    """log(1 - pi_i pi_j) at non-edge positions, exactly zero elsewhere.

    Masking before the multiply keeps 0 * (-inf) from producing NaN when a
    product of connectivities saturates to 1 at an edge position.
    """
    s = log_pi[:, None] + log_pi[None, :]
    np.fill_diagonal(s, -1.0)
    with np.errstate(divide="ignore"):
        log_terms = np.log(-np.expm1(s))
    out = np.zeros_like(log_terms)
    mask = nonedge > 0
    out[mask] = nonedge[mask] * log_terms[mask]
    return out


def _k1_objective(u, degrees, nonedge, a, b):
    pi, log_pi, _ = _k1_parts(u)
    softplus = np.logaddexp(0.0, u)
    f = float(np.sum((a + degrees) * u - (a + degrees + b) * softplus))
    f += 0.5 * float(np.sum(_masked_log_one_minus_product(log_pi, nonedge)))
    f -= len(u) * special.betaln(a, b)
    return f


def _k1_grad_hess(u, degrees, nonedge, a, b):
    pi, _, dpi = _k1_parts(u)
    pp = np.outer(pi, pi)
    np.fill_diagonal(pp, 0.0)
    denom = 1.0 - pp
    ratio = nonedge * pp / denom
    grad = (a + degrees) - (a + degrees + b) * pi - (1.0 - pi) * ratio.sum(axis=1)
    hess = -(nonedge * np.outer(dpi, dpi) / denom**2)
    cross = nonedge * (
        pi[None, :] * (dpi * (1.0 - 2.0 * pi))[:, None] / denom
        + (pi**2)[None, :] * (dpi**2)[:, None] / denom**2
    )
    diag = -(a + degrees + b) * dpi - cross.sum(axis=1)
    hess[np.diag_indices_from(hess)] = diag
    return grad, hess


def _newton_maximize(x0, value, grad_hess, tol=1e-8, max_iter=200):
    """Maximize a smooth concave-ish objective by damped Newton ascent.

    Far from the optimum, steps are backtracked on the objective (falling
    back to a scaled gradient step when the Hessian is not negative
    definite).  Once Newton steps become small the objective differences
    drop below float resolution, so the undamped step is taken instead,
    which converges quadratically to the stationary point.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = value(x)
    for iteration in range(1, max_iter + 1):
        g, h = grad_hess(x)
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return x, f, h, iteration - 1, gnorm
        try:
            np.linalg.cholesky(-h)
            step = np.linalg.solve(-h, g)
            nd = True
        except np.linalg.LinAlgError:
            step = g / max(1.0, gnorm)
            nd = False
        if nd and float(np.linalg.norm(step)) < 1e-3 * (1.0 + float(np.linalg.norm(x))):
            f_new = value(x + step)
            if np.isfinite(f_new):
                x = x + step
                f = f_new
                continue
        alpha = 1.0
        for _ in range(60):
            x_new = x + alpha * step
            f_new = value(x_new)
            if np.isfinite(f_new) and f_new >= f:
                x, f = x_new, f_new
                break
            alpha *= 0.5
        else:
            raise RuntimeError(
                f"mode search stalled at iteration {iteration}, |grad|={gnorm:.3e}"
            )
    raise RuntimeError(f"mode search did not converge in {max_iter} iterations, |grad|={gnorm:.3e}")


def laplace_log_prior_k1(g: Graph, a: float, b: float, tol: float = 1e-8, max_iter: int = 200) -> LaplaceReport:
    """Laplace approximation of the multiplicative prior probability of ``g``."""
    if not (a > 0 and b > 0):
        raise ValueError("shape parameters must be positive")
    p = g.p
    degrees = degree_sequence(g).astype(float)
    nonedge = (1 - g.adjacency).astype(float)
    np.fill_diagonal(nonedge, 0.0)
    u0 = np.clip(special.logit((degrees + a) / (p - 1.0 + a + b)), -10.0, 10.0)
    mode, f0, hess, iters, gnorm = _newton_maximize(
        u0,
        lambda u: _k1_objective(u, degrees, nonedge, a, b),
        lambda u: _k1_grad_hess(u, degrees, nonedge, a, b),
        tol=tol,
        max_iter=max_iter,
    )
    sign, logdet = np.linalg.slogdet(-hess)
    if sign <= 0:
        raise RuntimeError("Hessian at the mode is not negative definite")
    log_value = f0 + 0.5 * p * math.log(2.0 * math.pi) - 0.5 * logdet
    return LaplaceReport(float(log_value), mode, iters, gnorm)


# ---------------------------------------------------------------------------
# K > 1 joint objective over regression coefficients
# ---------------------------------------------------------------------------


def _joint_objective(beta_flat, adjs, degrees, covariates, s2):
    n_k, q = covariates.shape
    p = degrees.shape[1]
    beta = beta_flat.reshape(p, q)
    f = -0.5 * p * float(np.sum(np.log(2.0 * math.pi * s2))) - 0.5 * float(
        np.sum(beta**2 / s2[None, :])
    )
    for k in range(n_k):
        t = beta @ covariates[k]
        log_pi = -np.logaddexp(0.0, -t)
        f += float(np.sum(degrees[k] * log_pi))
        nonedge = 1.0 - adjs[k]
        np.fill_diagonal(nonedge, 0.0)
        f += 0.5 * float(np.sum(_masked_log_one_minus_product(log_pi, nonedge)))
    return f


def _joint_grad_hess(beta_flat, adjs, degrees, covariates, s2):
    n_k, q = covariates.shape
    p = degrees.shape[1]
    beta = beta_flat.reshape(p, q)
    grad = -beta / s2[None, :]
    hess = np.zeros((p, q, p, q))
    for i in range(p):
        hess[i, :, i, :] -= np.diag(1.0 / s2)
    for k in range(n_k):
        x = covariates[k]
        xx = np.outer(x, x)
        t = beta @ x
        pi = special.expit(t)
        one_minus = 1.0 - pi
        dpi = pi * one_minus
        pp = np.outer(pi, pi)
        np.fill_diagonal(pp, 0.0)
        denom = 1.0 - pp
        nonedge = 1.0 - adjs[k]
        np.fill_diagonal(nonedge, 0.0)
        ratio = nonedge * pp / denom
        coeff = degrees[k] * one_minus - one_minus * ratio.sum(axis=1)
        grad += coeff[:, None] * x[None, :]
        # off-diagonal blocks (the zeroed nonedge diagonal keeps i == j out)
        off = -nonedge * np.outer(dpi, dpi) / denom**2
        hess += off[:, None, :, None] * xx[None, :, None, :]
        # diagonal blocks
        cross = nonedge * (
            pp * one_minus[:, None] * (one_minus[:, None] - pi[:, None] * denom) / denom**2
        )
        diag_coeff = -(degrees[k] * dpi + cross.sum(axis=1))
        for i in range(p):
            hess[i, :, i, :] += diag_coeff[i] * xx
    return grad.ravel(), hess.reshape(p * q, p * q)


def laplace_log_prior_joint(
    graphs: Sequence[Graph],
    covariates: np.ndarray,
    coef_variances: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> LaplaceReport:
    """Laplace approximation of the joint prior probability of K graphs."""
    graphs = _as_graph_tuple(graphs)
    covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
    s2 = np.atleast_1d(np.asarray(coef_variances, dtype=float))
    if len(graphs) != covariates.shape[0]:
        raise ValueError("need one covariate row per graph")
    p = graphs[0].p
    if any(g.p != p for g in graphs):
        raise ValueError("all graphs must share the node set")
    adjs = np.stack([g.adjacency.astype(float) for g in graphs])
    degrees = np.stack([degree_sequence(g).astype(float) for g in graphs])
    q = covariates.shape[1]
    beta0 = np.zeros(p * q)
    mode, f0, hess, iters, gnorm = _newton_maximize(
        beta0,
        lambda v: _joint_objective(v, adjs, degrees, covariates, s2),
        lambda v: _joint_grad_hess(v, adjs, degrees, covariates, s2),
        tol=tol,
        max_iter=max_iter,
    )
    sign, logdet = np.linalg.slogdet(-hess)
    if sign <= 0:
        raise RuntimeError("Hessian at the mode is not negative definite")
    log_value = f0 + 0.5 * p * q * math.log(2.0 * math.pi) - 0.5 * logdet
    return LaplaceReport(float(log_value), mode.reshape(p, q), iters, gnorm)


# ---------------------------------------------------------------------------
# Exact integration for small problems
# ---------------------------------------------------------------------------


def _exact_k1(g: Graph, a: float, b: float) -> float:
    """Exact log prior by expanding prod(1 - pi_i pi_j) over non-edges.

    Each expansion term is a product of Beta moments, so the value is exact
    up to floating point; feasible for p <= 4 (at most 2^6 terms).
    """
    degrees = degree_sequence(g)
    nonedges = [(i - 1, j - 1) for i, j in _complement_edges(g)]
    log_beta_ab = special.betaln(a, b)
    total = 0.0
    p = g.p
    for bits in itertools.product((0, 1), repeat=len(nonedges)):
        extra = np.zeros(p, dtype=np.int64)
        sign = 1.0
        for chosen, (i, j) in zip(bits, nonedges):
            if chosen:
                extra[i] += 1
                extra[j] += 1
                sign = -sign
        log_term = float(
            np.sum(special.betaln(a + degrees + extra, b) - log_beta_ab)
        )
        total += sign * math.exp(log_term)
    if total <= 0.0:
        raise ArithmeticError("exact prior expansion lost all precision")
    return math.log(total)


def _complement_edges(g: Graph) -> list[tuple[int, int]]:
    out = []
    adj = g.adjacency
    for i in range(g.p):
        for j in range(i + 1, g.p):
            if not adj[i, j]:
                out.append((i + 1, j + 1))
    return out


def _logistic_power_moment(counts: np.ndarray, covariates: np.ndarray, s2: np.ndarray) -> float:
    """E[ prod_k expit(x_k . beta)^{c_k} ] under beta ~ N(0, diag(s2)).

    Gauss-Hermite quadrature per coefficient dimension; the integrand is
    bounded by 1 and smooth, so a dense rule is accurate far beyond the
    1e-8 contract (validated against adaptive quadrature in the tests).
    """
    q = len(s2)
    nodes, weights = np.polynomial.hermite_e.hermegauss(151)
    grids = np.meshgrid(*[nodes * math.sqrt(s2[d]) for d in range(q)], indexing="ij")
    beta = np.stack([grid.ravel() for grid in grids], axis=-1)
    wgrids = np.meshgrid(*[weights for _ in range(q)], indexing="ij")
    w = np.prod(np.stack([grid.ravel() for grid in wgrids], axis=-1), axis=-1)
    w = w / (2.0 * math.pi) ** (q / 2.0)
    vals = np.ones(beta.shape[0])
    for k, c in enumerate(counts):
        if c:
            vals = vals * special.expit(beta @ covariates[k]) ** c
    return float(np.sum(w * vals))


def _exact_joint(graphs: tuple[Graph, ...], covariates: np.ndarray, s2: np.ndarray) -> float:
    p = graphs[0].p
    n_k = len(graphs)
    degrees = np.stack([degree_sequence(g) for g in graphs])
    slots = [(k, i - 1, j - 1) for k in range(n_k) for i, j in _complement_edges(graphs[k])]
    moment_cache: dict[tuple[int, ...], float] = {}

    def moment(counts: np.ndarray) -> float:
        key = tuple(int(c) for c in counts)
        if key not in moment_cache:
            moment_cache[key] = _logistic_power_moment(np.asarray(key), covariates, s2)
        return moment_cache[key]

    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(slots)):
        extra = np.zeros((n_k, p), dtype=np.int64)
        sign = 1.0
        for chosen, (k, i, j) in zip(bits, slots):
            if chosen:
                extra[k, i] += 1
                extra[k, j] += 1
                sign = -sign
        term = 1.0
        counts = degrees + extra
        for i in range(p):
            term *= moment(counts[:, i])
        total += sign * term
    if total <= 0.0:
        raise ArithmeticError("exact joint prior expansion lost all precision")
    return math.log(total)


def exact_log_prior_small_p(spec: GraphPrior, graphs) -> float:
    """Exact log prior for small problems (integral dimension <= 6)."""
    graphs = _as_graph_tuple(graphs)
    p = graphs[0].p
    if isinstance(spec, MultiplicativePrior):
        if len(graphs) != 1:
            raise ValueError("single-graph prior got several graphs")
        if p > 4:
            raise ValueError(f"exact integration supports p <= 4, got p={p}")
        return _exact_k1(graphs[0], spec.a, spec.b)
    if isinstance(spec, JointMultiplicativePrior):
        if len(graphs) != spec.n_groups:
            raise ValueError("graph count does not match the prior's group count")
        if p * spec.n_covariates > 6:
            raise ValueError("exact integration supports p * Q <= 6")
        return _exact_joint(graphs, spec.covariates, spec.coef_variances)
    # the remaining variants are already exact in closed form
    return log_prior(spec, graphs)


# ---------------------------------------------------------------------------
# Unified entry point
# ---------------------------------------------------------------------------


def log_prior(spec: GraphPrior, graphs, method: str = "auto") -> float:
    """Log prior probability of a graph tuple under any prior variant.

    ``method`` selects the evaluation route for multiplicative variants:
    "auto" integrates exactly when the integral dimension is at most 4
    (single graph) or 6 (joint) and otherwise uses the Laplace
    approximation; "exact" and "laplace" force a route.
    """
    graphs = _as_graph_tuple(graphs)
    expected = prior_n_groups(spec)
    if expected is not None and len(graphs) != expected:
        raise ValueError(f"prior expects {expected} graph(s), got {len(graphs)}")
    p = graphs[0].p
    r = p * (p - 1) // 2
    if isinstance(spec, UniformPrior):
        return -r * len(graphs) * math.log(2.0)
    if isinstance(spec, BernoulliPrior):
        x = graphs[0].edge_count
        alpha = spec.alpha
        if alpha == 0.0:
            if x > 0:
                raise ValueError("Bernoulli prior with alpha=0 forbids edges")
            return 0.0
        if alpha == 1.0:
            if x < r:
                raise ValueError("Bernoulli prior with alpha=1 forbids missing edges")
            return 0.0
        return x * math.log(alpha) + (r - x) * math.log(1.0 - alpha)
    if isinstance(spec, SizeBasedPrior):
        x = graphs[0].edge_count
        return float(special.betaln(spec.a + x, r + spec.b - x) - special.betaln(spec.a, spec.b))
    if isinstance(spec, MultiplicativePrior):
        if method == "exact" or (method == "auto" and p <= 4):
            return exact_log_prior_small_p(spec, graphs)
        return laplace_log_prior_k1(graphs[0], spec.a, spec.b).log_value
    if isinstance(spec, JointMultiplicativePrior):
        if method == "exact" or (method == "auto" and p * spec.n_covariates <= 6):
            return exact_log_prior_small_p(spec, graphs)
        return laplace_log_prior_joint(graphs, spec.covariates, spec.coef_variances).log_value
    raise TypeError(f"unknown prior spec: {spec!r}")


# ---------------------------------------------------------------------------
# Posterior samplers for connectivities and regression coefficients
# ---------------------------------------------------------------------------


def sample_pi_given_graph(
    g: Graph,
    a: float,
    b: float,
    nsamples: int,
    rng: np.random.Generator,
    burn_in: int = 1000,
    step: float = 0.5,
    thin: int = 1,
) -> np.ndarray:
    """Posterior draws of the connectivities given the graph.

    Componentwise random-walk Metropolis on the logit scale targeting
    p(pi | G) for the multiplicative prior; returns (nsamples, p).
    """
    p = g.p
    degrees = degree_sequence(g).astype(float)
    nonedge = (1 - g.adjacency).astype(float)
    np.fill_diagonal(nonedge, 0.0)

    def logf(u):
        return _k1_objective(u, degrees, nonedge, a, b)

    u = np.clip(special.logit((degrees + a) / (p - 1.0 + a + b)), -8.0, 8.0)
    f_cur = logf(u)
    out = np.empty((nsamples, p))
    total = burn_in + nsamples * thin
    kept = 0
    for it in range(total):
        for i in range(p):
            u_prop = u.copy()
            u_prop[i] += step * rng.standard_normal()
            f_prop = logf(u_prop)
            if math.log(rng.random()) < f_prop - f_cur:
                u, f_cur = u_prop, f_prop
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            out[kept] = special.expit(u)
            kept += 1
    return out


def sample_beta_given_graphs(
    graphs,
    covariates: np.ndarray,
    coef_variances: np.ndarray,
    nsamples: int,
    rng: np.random.Generator,
    burn_in: int = 1000,
    step: float = 0.5,
    thin: int = 1,
) -> np.ndarray:
    """Posterior draws of the regression coefficients given the graphs.

    Componentwise random-walk Metropolis targeting p(beta | G_1..G_K);
    returns (nsamples, p, Q).
    """
    graphs = _as_graph_tuple(graphs)
    covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
    s2 = np.atleast_1d(np.asarray(coef_variances, dtype=float))
    p = graphs[0].p
    q = covariates.shape[1]
    adjs = np.stack([g.adjacency.astype(float) for g in graphs])
    degrees = np.stack([degree_sequence(g).astype(float) for g in graphs])

    def logf(v):
        return _joint_objective(v, adjs, degrees, covariates, s2)

    v = np.zeros(p * q)
    f_cur = logf(v)
    out = np.empty((nsamples, p, q))
    total = burn_in + nsamples * thin
    kept = 0
    for it in range(total):
        for idx in range(p * q):
            v_prop = v.copy()
            v_prop[idx] += step * rng.standard_normal()
            f_prop = logf(v_prop)
            if math.log(rng.random()) < f_prop - f_cur:
                v, f_cur = v_prop, f_prop
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            out[kept] = v.reshape(p, q)
            kept += 1
    return out


def prior_edge_count_pmf(
    spec: GraphPrior, p: int, nsim: int = 100_000, rng: np.random.Generator | None = None
) -> np.ndarray:
    """P(graph has x edges) for x = 0..r under a single-graph prior.

    Closed form for the uniform, Bernoulli, and size-based priors; exact
    enumeration for the multiplicative prior when p <= 4, otherwise a
    simulation estimate with ``nsim`` draws.
    """
    r = p * (p - 1) // 2
    xs = np.arange(r + 1)
    if isinstance(spec, UniformPrior):
        return np.exp(
            special.gammaln(r + 1)
            - special.gammaln(xs + 1)
            - special.gammaln(r - xs + 1)
            - r * math.log(2.0)
        )
    if isinstance(spec, BernoulliPrior):
        alpha = spec.alpha
        with np.errstate(divide="ignore"):
            logc = (
                special.gammaln(r + 1) - special.gammaln(xs + 1) - special.gammaln(r - xs + 1)
            )
            la = np.where(xs > 0, xs * np.log(alpha if alpha > 0 else 1.0), 0.0)
            lb = np.where(r - xs > 0, (r - xs) * np.log1p(-alpha if alpha < 1 else 0.0), 0.0)
        pmf = np.exp(logc + la + lb)
        if alpha == 0.0:
            pmf = np.zeros(r + 1)
            pmf[0] = 1.0
        if alpha == 1.0:
            pmf = np.zeros(r + 1)
            pmf[r] = 1.0
        return pmf
    if isinstance(spec, SizeBasedPrior):
        return np.exp(
            special.betaln(spec.a + xs, r + spec.b - xs) - special.betaln(spec.a, spec.b)
            + special.gammaln(r + 1)
            - special.gammaln(xs + 1)
            - special.gammaln(r - xs + 1)
        )
    if isinstance(spec, MultiplicativePrior):
        if p <= 4:
            from .graphs import new_graph

            pmf = np.zeros(r + 1)
            pairs = [(i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)]
            for bits in itertools.product((0, 1), repeat=r):
                edges = [pair for keep, pair in zip(bits, pairs) if keep]
                g = new_graph(p, edges)
                pmf[len(edges)] += math.exp(exact_log_prior_small_p(spec, g))
            return pmf
        if rng is None:
            rng = np.random.default_rng()
        from .random_graphs import BetaHyper, sample_connectivities, sample_multiplicative

        hyper = BetaHyper(spec.a, spec.b)
        pmf = np.zeros(r + 1)
        for _ in range(nsim):
            pi = sample_connectivities(hyper, p, rng)
            pmf[sample_multiplicative(pi, rng).edge_count] += 1.0
        return pmf / nsim
    raise TypeError("edge-count pmf is defined for single-graph priors")

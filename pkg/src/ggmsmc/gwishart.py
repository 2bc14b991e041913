"""G-Wishart distribution machinery.

The normalizing constant I_G(dof, scale) of the G-Wishart density

    |Omega|^{(dof-2)/2} exp(-tr(Omega @ scale)/2),   Omega in P_G,

is evaluated in closed form on complete graphs, by importance sampling in
the Cholesky parametrization on small-dof prime components, and by Laplace
approximation around the constrained mode for large dof.  Arbitrary graphs
factorize over a perfect sequence of prime components and separators.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import special, stats

from .graphs import Decomposition, Graph, prime_components

__all__ = [
    "GWishartParams",
    "GroupData",
    "ConstantEstimate",
    "log_constant_complete",
    "log_constant_mc",
    "log_constant_laplace",
    "log_constant",
    "log_constant_from_decomposition",
    "log_marginal_likelihood",
    "sample_gwishart",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GWishartParams:
    """Degrees of freedom (> 2) and symmetric positive-definite scale matrix."""

    dof: float
    scale: np.ndarray

    def __post_init__(self):
        if not self.dof > 2.0:
            raise ValueError(f"dof must exceed 2, got {self.dof}")
        scale = np.asarray(self.scale, dtype=float)
        if scale.ndim != 2 or scale.shape[0] != scale.shape[1]:
            raise ValueError("scale must be a square matrix")
        if not np.allclose(scale, scale.T, atol=1e-10):
            raise ValueError("scale must be symmetric")
        try:
            np.linalg.cholesky(scale)
        except np.linalg.LinAlgError as exc:
            raise ValueError("scale must be positive definite") from exc
        scale = scale.copy()
        scale.setflags(write=False)
        object.__setattr__(self, "scale", scale)

    @property
    def p(self) -> int:
        return self.scale.shape[0]


@dataclass(frozen=True)
class GroupData:
    """Per-group sufficient statistics: observation count and scatter sum_y y y^T."""

    n: int
    scatter: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("observation count must be >= 0")
        scatter = np.asarray(self.scatter, dtype=float)
        if scatter.ndim != 2 or scatter.shape[0] != scatter.shape[1]:
            raise ValueError("scatter must be a square matrix")
        if not np.allclose(scatter, scatter.T, atol=1e-8):
            raise ValueError("scatter must be symmetric")
        scatter = 0.5 * (scatter + scatter.T)
        scatter.setflags(write=False)
        object.__setattr__(self, "scatter", scatter)

    @classmethod
    def from_observations(cls, y: np.ndarray) -> "GroupData":
        y = np.asarray(y, dtype=float)
        return cls(n=y.shape[0], scatter=y.T @ y)


@dataclass(frozen=True)
class ConstantEstimate:
    """Log normalizing constant with Monte Carlo error and per-part diagnostics."""

    value: float
    se: float = 0.0
    parts: tuple = ()


def _logdet(m: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(m)
    if sign <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return float(val)


def log_constant_complete(dof: float, scale: np.ndarray) -> float:
    """Closed-form log I on a complete graph of the size of ``scale``."""
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    m = scale.shape[0]
    e = (dof + m - 1.0) / 2.0
    return float(m * e * math.log(2.0) + special.multigammaln(e, m) - e * _logdet(scale))


def _chol_upper_of_inverse(scale: np.ndarray) -> np.ndarray:
    """Upper triangular T with T.T @ T = inv(scale)."""
    inv = np.linalg.inv(scale)
    inv = 0.5 * (inv + inv.T)
    return sla.cholesky(inv, lower=False)


def log_constant_mc(
    g: Graph,
    params: GWishartParams,
    nsamples: int = 100_000,
    rng: np.random.Generator | None = None,
    chunk: int = 8192,
) -> ConstantEstimate:
    """Importance-sampling estimate of log I_G.

    Free Cholesky entries are sampled (chi-distributed diagonals, standard
    normal off-diagonals at edges); entries at non-edges are completed from
    the zero constraints and contribute exp(-psi^2/2) to the weight.  The
    estimate is unbiased in the natural scale; the returned standard error
    is for the log value (delta method).
    """
    if nsamples < 2:
        raise ValueError("need at least 2 Monte Carlo samples")
    if rng is None:
        rng = np.random.default_rng()
    adj = g.adjacency.astype(bool)
    m = g.p
    dof = params.dof
    t_mat = _chol_upper_of_inverse(np.asarray(params.scale, dtype=float))
    nu = np.array([int(adj[i, i + 1 :].sum()) for i in range(m)])
    n_edges = int(nu.sum())
    log_const = float(
        np.sum((dof + nu) / 2.0 * math.log(2.0) + special.gammaln((dof + nu) / 2.0))
        + n_edges / 2.0 * _LOG_2PI
        + np.sum((dof + nu) * np.log(np.diag(t_mat)))
        + sum(math.log(t_mat[j, j]) for i in range(m) for j in range(i + 1, m) if adj[i, j])
    )
    nonedges = [(i, j) for i in range(m) for j in range(i + 1, m) if not adj[i, j]]
    if not nonedges:
        return ConstantEstimate(value=log_const, se=0.0)

    log_w_parts: list[np.ndarray] = []
    remaining = nsamples
    while remaining > 0:
        b = min(chunk, remaining)
        remaining -= b
        psi = np.zeros((b, m, m))
        phi = np.zeros((b, m, m))
        log_w = np.zeros(b)
        for i in range(m):
            psi[:, i, i] = np.sqrt(rng.chisquare(dof + nu[i], size=b))
            phi[:, i, i] = psi[:, i, i] * t_mat[i, i]
            for j in range(i + 1, m):
                if adj[i, j]:
                    psi[:, i, j] = rng.standard_normal(b)
                    phi[:, i, j] = psi[:, i, i : j + 1] @ t_mat[i : j + 1, j]
                else:
                    if i > 0:
                        phi[:, i, j] = -np.einsum(
                            "bk,bk->b", phi[:, :i, i], phi[:, :i, j]
                        ) / phi[:, i, i]
                    psi[:, i, j] = (
                        phi[:, i, j] - psi[:, i, i:j] @ t_mat[i:j, j]
                    ) / t_mat[j, j]
                    log_w -= 0.5 * psi[:, i, j] ** 2
        log_w_parts.append(log_w)
    log_w = np.concatenate(log_w_parts)
    lse1 = special.logsumexp(log_w)
    lse2 = special.logsumexp(2.0 * log_w)
    log_mean = lse1 - math.log(nsamples)
    ratio = math.exp(lse2 - 2.0 * lse1 + math.log(nsamples))
    se_log = math.sqrt(max(ratio - 1.0, 0.0) / (nsamples - 1))
    return ConstantEstimate(value=log_const + float(log_mean), se=se_log)


def _free_entries(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices (rows a, cols b, symmetry factor s) of the free entries of P_G."""
    m = adj.shape[0]
    rows, cols, sym = [], [], []
    for i in range(m):
        rows.append(i)
        cols.append(i)
        sym.append(1.0)
    for i in range(m):
        for j in range(i + 1, m):
            if adj[i, j]:
                rows.append(i)
                cols.append(j)
                sym.append(2.0)
    return np.asarray(rows), np.asarray(cols), np.asarray(sym)


def _gwishart_mode(
    adj: np.ndarray, dof: float, scale: np.ndarray, tol: float = 1e-8, max_iter: int = 500
) -> tuple[np.ndarray, np.ndarray, int]:
    """Constrained maximizer of the log G-Wishart kernel over P_G.

    At the mode, inv(Omega) agrees with scale/(dof-2) on diagonals and
    edges while Omega vanishes on non-edges.  Working on the covariance
    side turns this into an unconstrained concave problem in the non-edge
    entries of W = inv(Omega): maximize logdet W with the free entries
    pinned to scale/(dof-2).  Newton ascent starts from the feasible point
    W = scale/(dof-2) and stays positive definite via backtracking.
    """
    m = adj.shape[0]
    c = dof - 2.0
    if c <= 0:
        raise ValueError("dof must exceed 2 for the mode to exist")
    target_cov = scale / c
    ne_rows, ne_cols = np.nonzero(np.triu(~adj, 1) & ~np.eye(m, dtype=bool))
    w = target_cov.copy()
    iterations = 0
    if len(ne_rows):
        f_cur = _logdet(w)
        for _ in range(max_iter):
            iterations += 1
            winv = np.linalg.inv(w)
            winv = 0.5 * (winv + winv.T)
            grad = 2.0 * winv[ne_rows, ne_cols]
            gnorm = float(np.max(np.abs(grad)))
            if gnorm < tol * max(1.0, float(np.max(np.abs(winv)))):
                break
            v_ac = winv[ne_rows[:, None], ne_rows[None, :]]
            v_db = winv[ne_cols[None, :], ne_cols[:, None]]
            v_ad = winv[ne_rows[:, None], ne_cols[None, :]]
            v_cb = winv[ne_rows[None, :], ne_cols[:, None]]
            hess = -2.0 * (v_ac * v_db + v_ad * v_cb)
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                step = grad / max(1.0, gnorm)
            if float(np.linalg.norm(step)) < 1e-3 * (1.0 + float(np.linalg.norm(w))):
                cand = w.copy()
                cand[ne_rows, ne_cols] += step
                cand[ne_cols, ne_rows] = cand[ne_rows, ne_cols]
                try:
                    f_cur = _logdet(cand)
                    w = cand
                    continue
                except np.linalg.LinAlgError:
                    pass
            alpha = 1.0
            for _ in range(60):
                cand = w.copy()
                cand[ne_rows, ne_cols] += alpha * step
                cand[ne_cols, ne_rows] = cand[ne_rows, ne_cols]
                try:
                    f_new = _logdet(cand)
                except np.linalg.LinAlgError:
                    alpha *= 0.5
                    continue
                if f_new >= f_cur:
                    w, f_cur = cand, f_new
                    break
                alpha *= 0.5
            else:
                raise RuntimeError(
                    f"mode search stalled after {iterations} iterations, |grad|={gnorm:.3e}"
                )
        else:
            raise RuntimeError(
                f"mode search did not converge in {iterations} iterations, |grad|={gnorm:.3e}"
            )
    omega = np.linalg.inv(w)
    omega = 0.5 * (omega + omega.T)
    if len(ne_rows):
        omega[ne_rows, ne_cols] = 0.0
        omega[ne_cols, ne_rows] = 0.0
        w = np.linalg.inv(omega)
        w = 0.5 * (w + w.T)
    return omega, w, iterations


@dataclass(frozen=True)
class LaplaceConstant:
    value: float
    iterations: int


def log_constant_laplace(
    g: Graph, params: GWishartParams, tol: float = 1e-8, max_iter: int = 500
) -> LaplaceConstant:
    """Laplace approximation of log I_G around the constrained mode."""
    adj = g.adjacency.astype(bool)
    scale = np.asarray(params.scale, dtype=float)
    c = params.dof - 2.0
    omega, w, iters = _gwishart_mode(adj, params.dof, scale, tol=tol, max_iter=max_iter)
    rows, cols, sym = _free_entries(adj)
    colfac = np.where(rows == cols, 0.5, 1.0)
    w_ac = w[rows[:, None], rows[None, :]]
    w_db = w[cols[None, :], cols[:, None]]
    w_ad = w[rows[:, None], cols[None, :]]
    w_cb = w[rows[None, :], cols[:, None]]
    hess = -0.5 * c * (sym[:, None] * colfac[None, :]) * (w_ac * w_db + w_ad * w_cb)
    n_free = len(rows)
    h_val = 0.5 * c * _logdet(omega) - 0.5 * float(np.sum(omega * scale))
    value = h_val + 0.5 * n_free * _LOG_2PI - 0.5 * _logdet(-hess)
    return LaplaceConstant(value=float(value), iterations=iters)


def _component_params(params: GWishartParams, verts: tuple[int, ...]) -> tuple[float, np.ndarray]:
    idx = np.asarray([v - 1 for v in verts], dtype=np.int64)
    return params.dof, np.asarray(params.scale, dtype=float)[np.ix_(idx, idx)]


def _subgraph(g: Graph, verts: tuple[int, ...]) -> Graph:
    idx = np.asarray([v - 1 for v in verts], dtype=np.int64)
    return Graph(g.adjacency[np.ix_(idx, idx)])


def _content_rng(seed, *parts) -> np.random.Generator:
    """Generator keyed by content, so identical inputs give identical streams."""
    h = hashlib.sha256()
    h.update(repr(seed).encode())
    for part in parts:
        h.update(b"|")
        h.update(part if isinstance(part, bytes) else repr(part).encode())
    key = np.frombuffer(h.digest()[:16], dtype=np.uint32)
    return np.random.default_rng(np.random.SeedSequence(entropy=key.tolist()))


def log_constant_from_decomposition(
    g: Graph,
    decomposition: Decomposition,
    params: GWishartParams,
    mc_dof_limit: float = 20.0,
    mc_samples: int = 100_000,
    rng: np.random.Generator | None = None,
    seed=0,
) -> ConstantEstimate:
    """Evaluate log I_G from an explicit perfect sequence.

    Complete components and all separators use the closed form; incomplete
    prime components use Monte Carlo when dof <= ``mc_dof_limit`` and the
    Laplace approximation otherwise.
    """
    total = 0.0
    var = 0.0
    parts = []
    for comp, is_complete in zip(decomposition.components, decomposition.complete):
        dof, scale = _component_params(params, comp)
        if is_complete:
            val = log_constant_complete(dof, scale)
            total += val
            parts.append({"vertices": comp, "method": "closed-form", "value": val})
        elif dof <= mc_dof_limit:
            sub = _subgraph(g, comp)
            comp_rng = rng if rng is not None else _content_rng(
                seed, sub.key(), repr(dof).encode(), scale.tobytes()
            )
            est = log_constant_mc(sub, GWishartParams(dof, scale), nsamples=mc_samples, rng=comp_rng)
            total += est.value
            var += est.se**2
            parts.append(
                {
                    "vertices": comp,
                    "method": "monte-carlo",
                    "value": est.value,
                    "se": est.se,
                    "nsamples": mc_samples,
                }
            )
        else:
            est = log_constant_laplace(_subgraph(g, comp), GWishartParams(dof, scale))
            total += est.value
            parts.append(
                {
                    "vertices": comp,
                    "method": "laplace",
                    "value": est.value,
                    "iterations": est.iterations,
                }
            )
    for sep in decomposition.separators:
        if not sep:
            continue
        dof, scale = _component_params(params, sep)
        val = log_constant_complete(dof, scale)
        total -= val
        parts.append({"vertices": sep, "method": "separator", "value": -val})
    return ConstantEstimate(value=total, se=math.sqrt(var), parts=tuple(parts))


def log_constant(
    g: Graph,
    params: GWishartParams,
    mc_dof_limit: float = 20.0,
    mc_samples: int = 100_000,
    rng: np.random.Generator | None = None,
    seed=0,
    decomposition: Decomposition | None = None,
) -> ConstantEstimate:
    """log I_G(dof, scale) for an arbitrary graph via prime components."""
    if g.p != params.p:
        raise ValueError("graph size and scale dimension differ")
    if decomposition is None:
        decomposition = prime_components(g)
    return log_constant_from_decomposition(
        g, decomposition, params, mc_dof_limit=mc_dof_limit, mc_samples=mc_samples, rng=rng, seed=seed
    )


def log_marginal_likelihood(
    g: Graph,
    params: GWishartParams,
    data: GroupData,
    mc_dof_limit: float = 20.0,
    mc_samples: int = 100_000,
    seed=0,
    decomposition: Decomposition | None = None,
) -> ConstantEstimate:
    """Log marginal likelihood of the group data given the graph.

    Equals -p*n/2 log(2 pi) + log I_G(dof + n, scale + scatter)
    - log I_G(dof, scale).
    """
    if decomposition is None:
        decomposition = prime_components(g)
    posterior = GWishartParams(params.dof + data.n, np.asarray(params.scale) + data.scatter)
    num = log_constant_from_decomposition(
        g, decomposition, posterior, mc_dof_limit=mc_dof_limit, mc_samples=mc_samples, seed=seed
    )
    den = log_constant_from_decomposition(
        g, decomposition, params, mc_dof_limit=mc_dof_limit, mc_samples=mc_samples, seed=seed
    )
    value = -g.p * data.n / 2.0 * _LOG_2PI + num.value - den.value
    return ConstantEstimate(
        value=value, se=math.sqrt(num.se**2 + den.se**2), parts=(num.parts, den.parts)
    )


def _maximal_cliques(adj: np.ndarray) -> list[np.ndarray]:
    """Bron-Kerbosch with pivoting."""
    m = adj.shape[0]
    nb = [set(np.flatnonzero(adj[v]).tolist()) for v in range(m)]
    out: list[np.ndarray] = []

    def expand(r: set, p: set, x: set):
        if not p and not x:
            out.append(np.asarray(sorted(r), dtype=np.int64))
            return
        pivot = max(p | x, key=lambda v: len(nb[v] & p))
        for v in sorted(p - nb[pivot]):
            expand(r | {v}, p & nb[v], x & nb[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(range(m)), set())
    return out


def sample_gwishart(
    g: Graph,
    params: GWishartParams,
    rng: np.random.Generator,
    n_draws: int = 1,
    burn_in: int = 500,
    thin: int = 5,
) -> np.ndarray:
    """Draw precision matrices from the G-Wishart by block Gibbs over cliques.

    Returns an array of shape (n_draws, p, p); zero pattern matches the
    non-edges of ``g`` exactly and every draw is positive definite.
    """
    adj = g.adjacency.astype(bool)
    m = g.p
    scale = np.asarray(params.scale, dtype=float)
    cliques = _maximal_cliques(adj)
    omega = np.eye(m) * max(params.dof - 2.0, 1.0)

    def sweep():
        for cl in cliques:
            rest = np.setdiff1d(np.arange(m), cl)
            if len(rest):
                b = omega[np.ix_(cl, rest)] @ np.linalg.solve(
                    omega[np.ix_(rest, rest)], omega[np.ix_(rest, cl)]
                )
            else:
                b = np.zeros((len(cl), len(cl)))
            df = params.dof + len(cl) - 1.0
            wscale = np.linalg.inv(scale[np.ix_(cl, cl)])
            wscale = 0.5 * (wscale + wscale.T)
            a = stats.wishart.rvs(df=df, scale=wscale, random_state=rng)
            a = np.atleast_2d(a)
            omega[np.ix_(cl, cl)] = a + b

    for _ in range(burn_in):
        sweep()
    draws = np.empty((n_draws, m, m))
    for d in range(n_draws):
        for _ in range(thin):
            sweep()
        draws[d] = 0.5 * (omega + omega.T)
    return draws

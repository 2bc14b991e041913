"""Tempered sequential Monte Carlo over single or joint graph space, plus the
fixed-temperature MCMC baseline.

The sampler follows a fixed increasing temperature ladder ending at 1: at
each step particles are reweighted by the tempered target ratio of their
pre-move state, multinomially resampled when the effective sample size drops
below a threshold, and refreshed by Metropolis edge-flip sweeps that leave
the current tempered target invariant.

All randomness is drawn from counter-based streams keyed by (seed, stage,
iteration, particle), so results are reproducible bit-for-bit regardless of
the number of worker threads.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import Graph, prime_components
from .gwishart import (
    GroupData,
    GWishartParams,
    _content_rng,
    log_constant_complete,
    log_constant_laplace,
    log_constant_mc,
)
from .priors import GraphPrior, log_prior, prior_n_groups

__all__ = [
    "SmcConfig",
    "Particle",
    "ParticleEnsemble",
    "SmcDiagnostics",
    "PosteriorTarget",
    "linear_schedule",
    "log_target",
    "ess",
    "init_particles",
    "reweight",
    "resample_multinomial",
    "mcmc_sweep",
    "run_smc",
    "run_mcmc_baseline",
    "run_smc_adaptive",
]

_STAGE_INIT = 0
_STAGE_SWEEP = 1
_STAGE_RESAMPLE = 2


def linear_schedule(step: float) -> tuple[float, ...]:
    """Evenly spaced temperatures (step, 2*step, ..., 1.0)."""
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1 evenly")
    return tuple(np.linspace(step, 1.0, n))


def _stream(seed: int, stage: int, t: int, n: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=abs(int(seed)), spawn_key=(stage, t, n))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class SmcConfig:
    """Everything needed to reproduce one sampler run."""

    n_particles: int
    temperatures: tuple[float, ...]
    flips_per_sweep: int
    prior: GraphPrior
    gwishart: GWishartParams | Sequence[GWishartParams]
    data: GroupData | Sequence[GroupData]
    ess_threshold_fraction: float = 1.0 / 3.0
    seed: int = 0
    sweeps_per_iteration: int = 1
    n_workers: int = 1
    mc_dof_limit: float = 20.0
    mc_samples: int = 100_000
    prior_method: str = "auto"
    constant_seed: int = 0

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        temps = tuple(float(t) for t in self.temperatures)
        if not temps or temps[0] <= 0.0:
            raise ValueError("temperatures must start above 0")
        if abs(temps[-1] - 1.0) > 1e-12:
            raise ValueError("temperatures must end at 1")
        if any(b < a for a, b in zip(temps, temps[1:])):
            raise ValueError("temperatures must be non-decreasing")
        object.__setattr__(self, "temperatures", temps)
        gw = self.gwishart if not isinstance(self.gwishart, GWishartParams) else [self.gwishart]
        dat = self.data if not isinstance(self.data, GroupData) else [self.data]
        gw = list(gw)
        dat = list(dat)
        if len(gw) == 1 and len(dat) > 1:
            gw = gw * len(dat)
        if len(gw) != len(dat):
            raise ValueError("need matching per-group G-Wishart params and data")
        expected = prior_n_groups(self.prior)
        if expected is not None and expected != len(dat):
            raise ValueError(f"prior expects {expected} group(s), got {len(dat)}")
        object.__setattr__(self, "gwishart", tuple(gw))
        object.__setattr__(self, "data", tuple(dat))
        if self.flips_per_sweep < 1:
            raise ValueError("flips_per_sweep must be >= 1")
        if not (0.0 < self.ess_threshold_fraction <= 1.0):
            raise ValueError("ess_threshold_fraction must be in (0, 1]")

    @property
    def n_groups(self) -> int:
        return len(self.data)

    @property
    def p(self) -> int:
        return self.gwishart[0].p


@dataclass(frozen=True)
class Particle:
    """One weighted joint-graph sample."""

    graphs: tuple[Graph, ...]
    log_weight: float
    cached_log_gamma: float


class _ConstantTable:
    """Per (dof, scale) table of component normalizing constants.

    When the scale matrix is the identity the constants are invariant under
    node relabelling, so incomplete components are cached by relabelled
    structure; otherwise keys carry the vertex labels.
    """

    def __init__(self, params: GWishartParams, mc_dof_limit, mc_samples, seed, tag):
        self.params = params
        self.mc_dof_limit = mc_dof_limit
        self.mc_samples = mc_samples
        self.seed = seed
        self.tag = tag
        scale = np.asarray(params.scale)
        self.identity_scale = bool(np.array_equal(scale, np.eye(scale.shape[0])))
        self._cache: dict = {}

    def _component_value(self, g_full: Graph, comp: tuple[int, ...], complete: bool) -> float:
        idx = np.asarray([v - 1 for v in comp], dtype=np.int64)
        sub_adj = g_full.adjacency[np.ix_(idx, idx)]
        if self.identity_scale:
            key = (complete, len(comp), sub_adj.tobytes() if not complete else b"")
        else:
            key = (complete, comp, sub_adj.tobytes())
        val = self._cache.get(key)
        if val is not None:
            return val
        dof = self.params.dof
        scale_sub = np.asarray(self.params.scale, dtype=float)[np.ix_(idx, idx)]
        if complete:
            val = log_constant_complete(dof, scale_sub)
        else:
            sub = Graph._from_valid(sub_adj)
            sub_params = GWishartParams(dof, scale_sub)
            if dof <= self.mc_dof_limit:
                rng = _content_rng(self.seed, self.tag.encode(), sub.key(), repr(dof).encode(), scale_sub.tobytes())
                val = log_constant_mc(sub, sub_params, nsamples=self.mc_samples, rng=rng).value
            else:
                val = log_constant_laplace(sub, sub_params).value
        self._cache[key] = val
        return val

    def log_I(self, g: Graph, decomposition) -> float:
        total = 0.0
        for comp, complete in zip(decomposition.components, decomposition.complete):
            total += self._component_value(g, comp, complete)
        for sep in decomposition.separators:
            if sep:
                total -= self._component_value(g, sep, True)
        return total


class PosteriorTarget:
    """Cached evaluator of the unnormalized log posterior over graph tuples.

    Monte Carlo normalizing constants are memoized with content-derived
    random streams, so within (and across) runs the target is a fixed,
    deterministic function of the graph tuple regardless of evaluation
    order or thread count.  The -p*n/2 log(2 pi) likelihood constant is
    omitted: it is shared by all graph tuples.
    """

    def __init__(
        self,
        prior: GraphPrior,
        gwishart: Sequence[GWishartParams],
        data: Sequence[GroupData],
        mc_dof_limit: float = 20.0,
        mc_samples: int = 100_000,
        prior_method: str = "auto",
        constant_seed: int = 0,
    ):
        self.prior = prior
        self.gwishart = tuple(gwishart)
        self.data = tuple(data)
        self.prior_method = prior_method
        if len(self.gwishart) != len(self.data):
            raise ValueError("need matching per-group params and data")
        self.n_groups = len(self.data)
        self.p = self.gwishart[0].p
        self._prior_tables = [
            _ConstantTable(params, mc_dof_limit, mc_samples, constant_seed, f"prior{k}")
            for k, params in enumerate(self.gwishart)
        ]
        self._post_tables = [
            _ConstantTable(
                GWishartParams(params.dof + dat.n, np.asarray(params.scale) + dat.scatter),
                mc_dof_limit,
                mc_samples,
                constant_seed,
                f"post{k}",
            )
            for k, (params, dat) in enumerate(zip(self.gwishart, self.data))
        ]
        self._gamma: dict = {}
        self._decomp: dict = {}
        self._ml: list[dict] = [dict() for _ in range(self.n_groups)]

    @classmethod
    def from_config(cls, config: SmcConfig) -> "PosteriorTarget":
        return cls(
            config.prior,
            config.gwishart,
            config.data,
            mc_dof_limit=config.mc_dof_limit,
            mc_samples=config.mc_samples,
            prior_method=config.prior_method,
            constant_seed=config.constant_seed,
        )

    def with_prior(self, prior: GraphPrior) -> "PosteriorTarget":
        """Same likelihood with a different graph prior, sharing every
        normalizing-constant, decomposition, and marginal-likelihood cache."""
        other = object.__new__(PosteriorTarget)
        other.__dict__.update(self.__dict__)
        other.prior = prior
        other._gamma = {}
        return other

    def _decomposition(self, key: bytes, g: Graph):
        dec = self._decomp.get(key)
        if dec is None:
            dec = prime_components(g)
            self._decomp[key] = dec
        return dec

    def _group_log_ml(self, k: int, key: bytes, g: Graph) -> float:
        val = self._ml[k].get(key)
        if val is None:
            dec = self._decomposition(key, g)
            val = self._post_tables[k].log_I(g, dec) - self._prior_tables[k].log_I(g, dec)
            self._ml[k][key] = val
        return val

    def log_gamma_adj(self, adjs: np.ndarray) -> float:
        """Log target for a (K, p, p) uint8 adjacency stack."""
        keys = tuple(adjs[k].tobytes() for k in range(self.n_groups))
        val = self._gamma.get(keys)
        if val is not None:
            return val
        graphs = tuple(Graph._from_valid(adjs[k]) for k in range(self.n_groups))
        val = log_prior(self.prior, graphs, method=self.prior_method)
        for k, (key, g) in enumerate(zip(keys, graphs)):
            val += self._group_log_ml(k, key, g)
        self._gamma[keys] = val
        return val

    def log_gamma(self, graphs) -> float:
        graphs = (graphs,) if isinstance(graphs, Graph) else tuple(graphs)
        return self.log_gamma_adj(np.stack([g.adjacency for g in graphs]))


def log_target(
    graphs,
    prior: GraphPrior,
    gwishart,
    data,
    mc_dof_limit: float = 20.0,
    mc_samples: int = 100_000,
    prior_method: str = "auto",
    constant_seed: int = 0,
) -> float:
    """Unnormalized log posterior of a graph tuple (fresh evaluation).

    Sum of the log prior and the per-group log ratios of posterior to
    prior normalizing constants; the additive -p*n/2 log(2 pi) constant is
    omitted because it is common to every graph tuple.
    """
    graphs = (graphs,) if isinstance(graphs, Graph) else tuple(graphs)
    gw = [gwishart] if isinstance(gwishart, GWishartParams) else list(gwishart)
    dat = [data] if isinstance(data, GroupData) else list(data)
    if len(gw) == 1 and len(dat) > 1:
        gw = gw * len(dat)
    target = PosteriorTarget(
        prior,
        gw,
        dat,
        mc_dof_limit=mc_dof_limit,
        mc_samples=mc_samples,
        prior_method=prior_method,
        constant_seed=constant_seed,
    )
    return target.log_gamma(graphs)


@dataclass
class ParticleEnsemble:
    """Weighted particle population at one temperature."""

    adjacency: np.ndarray  # (N, K, p, p) uint8
    log_weights: np.ndarray  # unnormalized
    log_gamma: np.ndarray
    temperature: float

    @property
    def n_particles(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_groups(self) -> int:
        return self.adjacency.shape[1]

    @property
    def p(self) -> int:
        return self.adjacency.shape[2]

    @property
    def weights(self) -> np.ndarray:
        return _normalize(self.log_weights)

    def graphs(self, n: int) -> tuple[Graph, ...]:
        return tuple(Graph(self.adjacency[n, k]) for k in range(self.n_groups))

    def particle(self, n: int) -> Particle:
        return Particle(self.graphs(n), float(self.weights[n]), float(self.log_gamma[n]))


@dataclass
class SmcDiagnostics:
    """Per-iteration sampler health indicators."""

    algorithm: str
    iteration: np.ndarray
    temperature: np.ndarray
    ess: np.ndarray
    resampled: np.ndarray
    acceptance_rate: np.ndarray
    mean_log_target: np.ndarray
    wall_time: float = 0.0

    def rows(self):
        for i in range(len(self.iteration)):
            yield {
                "t": int(self.iteration[i]),
                "phi": float(self.temperature[i]),
                "ess": float(self.ess[i]),
                "resampled": bool(self.resampled[i]),
                "acceptance_rate": float(self.acceptance_rate[i]),
                "mean_log_target": float(self.mean_log_target[i]),
            }


def _normalize(log_weights: np.ndarray) -> np.ndarray:
    shifted = log_weights - np.max(log_weights)
    w = np.exp(shifted)
    return w / w.sum()


def ess(weights: np.ndarray) -> float:
    """Effective sample size 1 / sum(W^2) of normalized weights."""
    return float(1.0 / np.sum(np.square(weights)))


def _pair_table(p: int) -> np.ndarray:
    return np.asarray([(i, j) for i in range(p) for j in range(i + 1, p)], dtype=np.int64)


def init_particles(
    config: SmcConfig, rng: np.random.Generator | None = None, target: PosteriorTarget | None = None
) -> ParticleEnsemble:
    """Uniform-random joint graphs with first-temperature importance weights.

    Each edge of each graph is an independent fair coin; the initial log
    weight is phi_1 * log gamma + r*K*log 2 (the uniform-proposal
    correction, an additive constant kept for diagnostic comparability).
    """
    if target is None:
        target = PosteriorTarget.from_config(config)
    n, k_groups, p = config.n_particles, config.n_groups, config.p
    r = p * (p - 1) // 2
    iu = np.triu_indices(p, 1)
    adj = np.zeros((n, k_groups, p, p), dtype=np.uint8)
    for i in range(n):
        gen = rng if rng is not None else _stream(config.seed, _STAGE_INIT, 0, i)
        for k in range(k_groups):
            bits = (gen.random(r) < 0.5).astype(np.uint8)
            adj[i, k][iu] = bits
            adj[i, k] += adj[i, k].T
    log_gamma = np.array([target.log_gamma_adj(adj[i]) for i in range(n)])
    phi1 = config.temperatures[0]
    log_w = phi1 * log_gamma + r * k_groups * math.log(2.0)
    return ParticleEnsemble(adj, log_w, log_gamma, temperature=phi1)


def reweight(ensemble: ParticleEnsemble, phi_t: float, phi_prev: float) -> ParticleEnsemble:
    """Multiply weights by gamma^(phi_t - phi_prev) of the pre-move particles."""
    if phi_t < phi_prev:
        raise ValueError("temperatures must not decrease")
    ensemble.log_weights = ensemble.log_weights + (phi_t - phi_prev) * ensemble.log_gamma
    ensemble.temperature = phi_t
    return ensemble


def resample_multinomial(ensemble: ParticleEnsemble, rng: np.random.Generator) -> ParticleEnsemble:
    """Multinomial resampling; afterwards all weights are 1/N."""
    n = ensemble.n_particles
    counts = rng.multinomial(n, ensemble.weights)
    idx = np.repeat(np.arange(n), counts)
    ensemble.adjacency = ensemble.adjacency[idx].copy()
    ensemble.log_gamma = ensemble.log_gamma[idx].copy()
    ensemble.log_weights = np.zeros(n)
    return ensemble


def _sweep_inplace(
    adjs: np.ndarray,
    log_gamma: float,
    phi: float,
    rng: np.random.Generator,
    target: PosteriorTarget,
    flips: int,
    pairs: np.ndarray,
) -> tuple[float, int, int]:
    """One Metropolis sweep over ``flips`` edge positions for every group."""
    r = len(pairs)
    positions = rng.choice(r, size=min(flips, r), replace=False)
    accepted = 0
    proposed = 0
    k_groups = adjs.shape[0]
    for pos in positions:
        i, j = pairs[pos]
        for k in range(k_groups):
            adjs[k, i, j] ^= 1
            adjs[k, j, i] ^= 1
            cand = target.log_gamma_adj(adjs)
            proposed += 1
            if math.log(rng.random()) < phi * (cand - log_gamma):
                log_gamma = cand
                accepted += 1
            else:
                adjs[k, i, j] ^= 1
                adjs[k, j, i] ^= 1
    return log_gamma, accepted, proposed


def mcmc_sweep(
    particle: Particle,
    config: SmcConfig,
    phi_t: float,
    rng: np.random.Generator,
    target: PosteriorTarget | None = None,
) -> tuple[Particle, int, int]:
    """Move one particle by Metropolis edge flips at temperature ``phi_t``.

    The kernel leaves the tempered target invariant, so the particle's
    weight is untouched; the cached log target is refreshed on acceptance.
    """
    if target is None:
        target = PosteriorTarget.from_config(config)
    adjs = np.stack([g.adjacency for g in particle.graphs])
    pairs = _pair_table(config.p)
    log_gamma, accepted, proposed = _sweep_inplace(
        adjs, particle.cached_log_gamma, phi_t, rng, target, config.flips_per_sweep, pairs
    )
    graphs = tuple(Graph(adjs[k]) for k in range(adjs.shape[0]))
    return Particle(graphs, particle.log_weight, log_gamma), accepted, proposed


def _run(config: SmcConfig, target: PosteriorTarget | None, temper: bool) -> tuple[ParticleEnsemble, SmcDiagnostics]:
    start = time.perf_counter()
    if target is None:
        target = PosteriorTarget.from_config(config)
    temps = config.temperatures if temper else tuple([1.0] * len(config.temperatures))
    n = config.n_particles
    pairs = _pair_table(config.p)
    ensemble = init_particles(config, target=target)
    if not temper:
        ensemble.log_weights = np.zeros(n)
        ensemble.temperature = 1.0
    n_iter = len(temps)
    diag = {
        "iteration": np.arange(1, n_iter + 1),
        "temperature": np.asarray(temps),
        "ess": np.zeros(n_iter),
        "resampled": np.zeros(n_iter, dtype=bool),
        "acceptance_rate": np.full(n_iter, np.nan),
        "mean_log_target": np.zeros(n_iter),
    }
    w = ensemble.weights
    diag["ess"][0] = ess(w)
    diag["mean_log_target"][0] = float(w @ ensemble.log_gamma)

    def move_particle(args):
        t, idx = args
        rng = _stream(config.seed, _STAGE_SWEEP, t, idx)
        adjs = ensemble.adjacency[idx]
        lg = float(ensemble.log_gamma[idx])
        accepted = proposed = 0
        try:
            for _ in range(config.sweeps_per_iteration):
                lg, acc, prop = _sweep_inplace(
                    adjs, lg, temps[t - 1], rng, target, config.flips_per_sweep, pairs
                )
                accepted += acc
                proposed += prop
        except Exception as exc:
            raise RuntimeError(
                f"target evaluation failed at iteration {t}, particle {idx}: {exc}"
            ) from exc
        ensemble.log_gamma[idx] = lg
        return accepted, proposed

    pool = ThreadPoolExecutor(max_workers=config.n_workers) if config.n_workers > 1 else None

    def partial_diagnostics(up_to):
        return SmcDiagnostics(
            algorithm="smc" if temper else "mcmc",
            wall_time=time.perf_counter() - start,
            **{key: np.asarray(val)[:up_to] for key, val in diag.items()},
        )

    try:
        for t in range(2, n_iter + 1):
            i = t - 1
            if temper:
                reweight(ensemble, temps[i], temps[i - 1])
                w = ensemble.weights
                current_ess = ess(w)
                diag["ess"][i] = current_ess
                if current_ess < n * config.ess_threshold_fraction:
                    resample_multinomial(ensemble, _stream(config.seed, _STAGE_RESAMPLE, t, 0))
                    diag["resampled"][i] = True
            else:
                diag["ess"][i] = float(n)
            tasks = [(t, idx) for idx in range(n)]
            try:
                if pool is not None:
                    results = list(pool.map(move_particle, tasks))
                else:
                    results = [move_particle(task) for task in tasks]
            except RuntimeError as exc:
                # abort cleanly, keeping the diagnostics recorded so far
                exc.diagnostics = partial_diagnostics(i)
                raise
            accepted = sum(a for a, _ in results)
            proposed = sum(b for _, b in results)
            diag["acceptance_rate"][i] = accepted / proposed if proposed else np.nan
            w = ensemble.weights
            diag["mean_log_target"][i] = float(w @ ensemble.log_gamma)
        ensemble.temperature = temps[-1]
    finally:
        if pool is not None:
            pool.shutdown()
    return ensemble, partial_diagnostics(n_iter)


def run_smc(config: SmcConfig, target: PosteriorTarget | None = None) -> tuple[ParticleEnsemble, SmcDiagnostics]:
    """Run the tempered sampler; the final ensemble targets the posterior.

    Per iteration (t >= 2), in order: reweight by the pre-move target ratio,
    resample if the effective sample size falls below the threshold, then
    one (or more) Metropolis edge-flip sweeps per particle.
    """
    return _run(config, target, temper=True)


def run_mcmc_baseline(config: SmcConfig, target: PosteriorTarget | None = None) -> tuple[ParticleEnsemble, SmcDiagnostics]:
    """Fixed-temperature baseline: same initialization and move kernel with
    the temperature pinned at 1 and no reweighting or resampling."""
    return _run(config, target, temper=False)


def run_smc_adaptive(
    config: SmcConfig,
    target: PosteriorTarget | None = None,
    ess_fraction: float = 0.9,
    max_iterations: int = 10_000,
) -> tuple[ParticleEnsemble, SmcDiagnostics]:
    """EXPERIMENTAL: choose the next temperature by ESS bisection.

    Instead of the fixed ladder, each step picks the largest temperature
    increment for which the reweighted ESS stays above ``ess_fraction`` of
    the particle count.  No stability guarantee is attached; the fixed
    schedules of :func:`run_smc` are the supported path.
    """
    start = time.perf_counter()
    if target is None:
        target = PosteriorTarget.from_config(config)
    n = config.n_particles
    pairs = _pair_table(config.p)
    ensemble = init_particles(config, target=target)
    rows = []
    w = ensemble.weights
    rows.append((1, ensemble.temperature, ess(w), False, np.nan, float(w @ ensemble.log_gamma)))
    t = 1
    phi = ensemble.temperature
    while phi < 1.0 and t < max_iterations:
        t += 1
        log_w0 = ensemble.log_weights.copy()

        def ess_at(phi_new):
            return ess(_normalize(log_w0 + (phi_new - phi) * ensemble.log_gamma))

        if ess_at(1.0) >= ess_fraction * n:
            phi_new = 1.0
        else:
            lo, hi = phi, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if ess_at(mid) >= ess_fraction * n:
                    lo = mid
                else:
                    hi = mid
            phi_new = lo if lo > phi else min(1.0, phi + 1e-6)
        reweight(ensemble, phi_new, phi)
        phi = phi_new
        w = ensemble.weights
        current_ess = ess(w)
        resampled = current_ess < n * config.ess_threshold_fraction
        if resampled:
            resample_multinomial(ensemble, _stream(config.seed, _STAGE_RESAMPLE, t, 0))
        accepted = proposed = 0
        for idx in range(n):
            rng = _stream(config.seed, _STAGE_SWEEP, t, idx)
            lg, acc, prop = _sweep_inplace(
                ensemble.adjacency[idx], float(ensemble.log_gamma[idx]), phi, rng, target,
                config.flips_per_sweep, pairs,
            )
            ensemble.log_gamma[idx] = lg
            accepted += acc
            proposed += prop
        w = ensemble.weights
        rows.append((t, phi, current_ess, resampled, accepted / max(proposed, 1), float(w @ ensemble.log_gamma)))
    arr = list(zip(*rows))
    diagnostics = SmcDiagnostics(
        algorithm="smc-adaptive",
        iteration=np.asarray(arr[0]),
        temperature=np.asarray(arr[1]),
        ess=np.asarray(arr[2]),
        resampled=np.asarray(arr[3], dtype=bool),
        acceptance_rate=np.asarray(arr[4]),
        mean_log_target=np.asarray(arr[5]),
        wall_time=time.perf_counter() - start,
    )
    return ensemble, diagnostics

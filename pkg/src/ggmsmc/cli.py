"""Command-line interface.

Subcommands mirror the analysis workflow: ``simulate`` benchmark data,
``fit`` a model via the tempered SMC sampler from a TOML config,
``analyze`` a saved ensemble, print multiplicative-model ``properties``,
``match-hyperparams`` from target degree moments, and tabulate
``prior-mass`` by edge count.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .analysis import SCENARIOS, SummaryOptions, auc, simulate_study, summarize
from .dataio import (
    ConfigError,
    DataError,
    RunManifest,
    export_summary,
    fmt,
    ingest_csv,
    read_ensemble_json,
    write_diagnostics_csv,
    write_ensemble_json,
    write_matrix_csv,
)
from .graphs import write_edge_list
from .gwishart import GWishartParams
from .priors import (
    BernoulliPrior,
    JointMultiplicativePrior,
    MultiplicativePrior,
    SizeBasedPrior,
    UniformPrior,
    prior_edge_count_pmf,
    two_group_covariates,
)
from .random_graphs import (
    BetaHyper,
    analytic_degree_moments,
    clustering_coefficient,
    degree_pmf,
    dispersion_index,
    factorial_moment,
    match_hyperparameters,
    neighbour_mean_degree,
    skewness_index,
)
from .smc import PosteriorTarget, SmcConfig, linear_schedule, run_mcmc_baseline, run_smc


def _build_prior(section: dict):
    variant = section.get("variant", "uniform").lower()
    if variant == "uniform":
        return UniformPrior()
    if variant == "bernoulli":
        if "alpha" not in section:
            raise ConfigError("bernoulli prior needs 'alpha'")
        return BernoulliPrior(float(section["alpha"]))
    if variant in ("size-based", "size_based", "sizebased"):
        return SizeBasedPrior(float(section.get("a", 1.0)), float(section.get("b", 1.0)))
    if variant == "multiplicative":
        if "a" not in section or "b" not in section:
            raise ConfigError("multiplicative prior needs 'a' and 'b'")
        return MultiplicativePrior(float(section["a"]), float(section["b"]))
    if variant in ("multiplicative-joint", "joint"):
        covariates = section.get("covariates")
        if covariates is None:
            covariates = two_group_covariates().tolist()
        if "sigma2" not in section:
            raise ConfigError("joint prior needs 'sigma2' (one variance per covariate)")
        return JointMultiplicativePrior(np.asarray(covariates, float), np.asarray(section["sigma2"], float))
    raise ConfigError(f"unknown prior variant {variant!r}")


def _load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    replicates = simulate_study(
        args.scenario, args.p, h=args.observations, replicates=args.replicates, rng=rng
    )
    index = []
    for ridx, rep in enumerate(replicates, start=1):
        stem = out / f"rep{ridx:02d}"
        with open(f"{stem}_data.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(rep.dataset.variable_names + ["group"])
            for row, g in zip(rep.dataset.observations, rep.dataset.group_index):
                writer.writerow([fmt(v) for v in row] + [int(g)])
        for k, (g, om) in enumerate(zip(rep.truth, rep.precisions), start=1):
            write_edge_list(g, f"{stem}_truth_g{k}.txt")
            write_matrix_csv(om, f"{stem}_precision_g{k}.csv", rep.dataset.variable_names)
        entry = {
            "replicate": ridx,
            "data": f"rep{ridx:02d}_data.csv",
            "truth": [f"rep{ridx:02d}_truth_g{k}.txt" for k in range(1, len(rep.truth) + 1)],
            "edges": [g.edge_count for g in rep.truth],
        }
        if rep.matched_hyper is not None:
            entry["matched_hyper"] = {"a": rep.matched_hyper.a, "b": rep.matched_hyper.b}
        index.append(entry)
    manifest = RunManifest(
        command="simulate",
        config={
            "scenario": args.scenario,
            "p": args.p,
            "observations": args.observations,
            "replicates": args.replicates,
        },
        seed=args.seed,
        code_version=__version__,
        temperatures=[],
        estimator_settings={},
        wall_time_seconds=0.0,
        diagnostics_summary={"replicates": index},
    )
    manifest.write(out / "manifest.json")
    print(f"wrote {args.replicates} replicate(s) to {out}")
    return 0


def _smc_config_from_toml(cfg: dict, dataset) -> SmcConfig:
    smc = cfg.get("smc", {})
    gw = cfg.get("gwishart", {})
    est = cfg.get("estimators", {})
    p = dataset.p
    dof = float(gw.get("delta", 3.0))
    scale_path = gw.get("scale")
    scale = np.eye(p) if scale_path is None else np.loadtxt(scale_path, delimiter=",")
    params = GWishartParams(dof, scale)
    prior = _build_prior(cfg.get("prior", {}))
    if "temperatures" in smc:
        temps = tuple(float(t) for t in smc["temperatures"])
    else:
        temps = linear_schedule(float(smc.get("schedule_step", 0.01)))
    try:
        return SmcConfig(
            n_particles=int(smc.get("n_particles", 500)),
            temperatures=temps,
            flips_per_sweep=int(smc.get("m_flips", 3)),
            prior=prior,
            gwishart=[params] * dataset.n_groups,
            data=dataset.group_data(),
            ess_threshold_fraction=float(smc.get("ess_threshold_fraction", 1.0 / 3.0)),
            seed=int(smc.get("seed", 0)),
            sweeps_per_iteration=int(smc.get("sweeps_per_iteration", 1)),
            n_workers=int(smc.get("n_workers", 1)),
            mc_dof_limit=float(est.get("delta_star", 20.0)),
            mc_samples=int(est.get("mc_samples", 100_000)),
            prior_method=str(est.get("prior_method", "auto")),
            constant_seed=int(est.get("constant_seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    data_section = cfg.get("data", {})
    if not data_section:
        raise ConfigError("config needs a [data] section")
    dataset = ingest_csv(
        path=data_section.get("csv"),
        group_column=data_section.get("group_column"),
        group_files=data_section.get("group_files"),
        standardize=bool(data_section.get("standardize", False)),
    )
    print(f"loaded {dataset.observations.shape[0]} observations, groups {dataset.group_sizes()}")
    config = _smc_config_from_toml(cfg, dataset)
    out = Path(cfg.get("output", {}).get("dir", args.out or "ggmsmc-out"))
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    target = PosteriorTarget.from_config(config)
    ensemble, diagnostics = run_smc(config, target=target)
    wall = time.perf_counter() - started
    write_ensemble_json(ensemble, out / "ensemble.json")
    write_diagnostics_csv(diagnostics, out / "diagnostics.csv")
    out_cfg = cfg.get("output", {})
    options = SummaryOptions(
        connectivity_draws=int(out_cfg.get("connectivity_draws", 2000)),
        mean_precision=bool(out_cfg.get("mean_precision", False)),
        seed=config.seed,
    )
    summary = summarize(
        ensemble,
        prior=config.prior,
        gwishart=config.gwishart,
        data=config.data,
        options=options,
        differential_threshold=float(out_cfg.get("kappa", 0.5)),
    )
    export_summary(summary, out, names=dataset.variable_names, threshold=float(out_cfg.get("edge_threshold", 0.5)))
    manifest = RunManifest(
        command="fit",
        config=cfg,
        seed=config.seed,
        code_version=__version__,
        temperatures=list(config.temperatures),
        estimator_settings={
            "delta_star": config.mc_dof_limit,
            "mc_samples": config.mc_samples,
            "prior_method": config.prior_method,
            "constant_seed": config.constant_seed,
        },
        wall_time_seconds=wall,
        diagnostics_summary={
            "final_ess": float(diagnostics.ess[-1]),
            "resample_count": int(diagnostics.resampled.sum()),
            "final_acceptance_rate": float(diagnostics.acceptance_rate[-1]),
            "final_mean_log_target": float(diagnostics.mean_log_target[-1]),
        },
    )
    manifest.write(out / "manifest.json")
    print(f"fit complete in {wall:.1f}s; outputs in {out}")
    return 0


def _cmd_analyze(args) -> int:
    ensemble = read_ensemble_json(args.ensemble)
    prior = None
    if args.prior == "multiplicative":
        prior = MultiplicativePrior(args.a, args.b)
    elif args.prior == "joint":
        prior = JointMultiplicativePrior(two_group_covariates(), np.asarray(args.sigma2, float))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    options = SummaryOptions(connectivity_draws=args.connectivity_draws, seed=args.seed)
    summary = summarize(ensemble, prior=prior, options=options, differential_threshold=args.kappa)
    names = args.names.split(",") if args.names else None
    written = export_summary(summary, out, names=names, threshold=args.edge_threshold)
    if args.truth:
        from .graphs import read_edge_list

        truth = read_edge_list(args.truth, ensemble.p)
        iu = np.triu_indices(ensemble.p, 1)
        value = auc(summary.edge_prob[0][iu], truth)
        print(f"auc vs truth: {value:.4f}")
    print(f"wrote {len(written)} file(s) to {out}")
    return 0


def _cmd_properties(args) -> int:
    hyper = BetaHyper(args.a, args.b)
    mean, var = analytic_degree_moments(hyper, args.p)
    rows = [
        ("degree_mean", mean),
        ("degree_variance", var),
        ("factorial_moment_k1", factorial_moment(hyper, args.p, 1)),
        ("factorial_moment_k2", factorial_moment(hyper, args.p, 2) if args.p > 2 else float("nan")),
        ("dispersion_index", dispersion_index(hyper, args.p)),
        ("skewness_index", skewness_index(hyper, args.p)),
        ("neighbour_mean_degree", neighbour_mean_degree(hyper, args.p)),
        ("clustering_coefficient", clustering_coefficient(hyper)),
    ]
    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["property", "value"])
        for name, value in rows:
            writer.writerow([name, fmt(value)])
        if args.pmf:
            writer.writerow([])
            writer.writerow(["degree", "probability"])
            for d in range(args.p):
                writer.writerow([d, fmt(degree_pmf(hyper, args.p, d))])
    finally:
        if args.out:
            sink.close()
    return 0


def _cmd_match(args) -> int:
    hyper = match_hyperparameters(args.mean, args.var, args.p)
    mean, var = analytic_degree_moments(hyper, args.p)
    print(f"a={fmt(hyper.a)} b={fmt(hyper.b)} (achieved mean={fmt(mean)} variance={fmt(var)})")
    return 0


def _cmd_prior_mass(args) -> int:
    r = args.p * (args.p - 1) // 2
    priors = {"uniform": UniformPrior(), "size-based": SizeBasedPrior()}
    if args.alpha is not None:
        priors["bernoulli"] = BernoulliPrior(args.alpha)
    if args.a is not None and args.b is not None:
        priors[f"multiplicative({fmt(args.a)},{fmt(args.b)})"] = MultiplicativePrior(args.a, args.b)
    rng = np.random.default_rng(args.seed)
    table = {name: prior_edge_count_pmf(spec, args.p, nsim=args.nsim, rng=rng) for name, spec in priors.items()}
    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["edges"] + list(table))
        for x in range(r + 1):
            writer.writerow([x] + [fmt(table[name][x]) for name in table])
    finally:
        if args.out:
            sink.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ggmsmc", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate benchmark datasets")
    sim.add_argument("--scenario", choices=SCENARIOS, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--observations", type=int, default=100)
    sim.add_argument("--replicates", type=int, default=10)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="run the SMC sampler from a TOML config")
    fit.add_argument("--config", required=True)
    fit.add_argument("--out", default=None, help="fallback output dir if the config has none")
    fit.set_defaults(func=_cmd_fit)

    ana = sub.add_parser("analyze", help="summarize a saved ensemble")
    ana.add_argument("--ensemble", required=True)
    ana.add_argument("--out", required=True)
    ana.add_argument("--kappa", type=float, default=0.5)
    ana.add_argument("--edge-threshold", type=float, default=0.5)
    ana.add_argument("--prior", choices=["none", "multiplicative", "joint"], default="none")
    ana.add_argument("--a", type=float, default=1.0)
    ana.add_argument("--b", type=float, default=1.0)
    ana.add_argument("--sigma2", type=float, nargs="*", default=[1.0, 1.0])
    ana.add_argument("--connectivity-draws", type=int, default=2000)
    ana.add_argument("--names", default=None, help="comma-separated variable names")
    ana.add_argument("--truth", default=None, help="edge-list file for AUC reporting")
    ana.add_argument("--seed", type=int, default=0)
    ana.set_defaults(func=_cmd_analyze)

    props = sub.add_parser("properties", help="analytic degree/clustering properties")
    props.add_argument("--a", type=float, required=True)
    props.add_argument("--b", type=float, required=True)
    props.add_argument("--p", type=int, required=True)
    props.add_argument("--pmf", action="store_true", help="append the degree pmf table")
    props.add_argument("--out", default=None)
    props.set_defaults(func=_cmd_properties)

    match = sub.add_parser("match-hyperparams", help="Beta shapes from degree moments")
    match.add_argument("--mean", type=float, required=True)
    match.add_argument("--var", type=float, required=True)
    match.add_argument("--p", type=int, required=True)
    match.set_defaults(func=_cmd_match)

    mass = sub.add_parser("prior-mass", help="prior probability by edge count")
    mass.add_argument("--p", type=int, required=True)
    mass.add_argument("--alpha", type=float, default=None, help="include a Bernoulli prior")
    mass.add_argument("--a", type=float, default=None)
    mass.add_argument("--b", type=float, default=None)
    mass.add_argument("--nsim", type=int, default=100_000)
    mass.add_argument("--seed", type=int, default=0)
    mass.add_argument("--out", default=None)
    mass.set_defaults(func=_cmd_prior_mass)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

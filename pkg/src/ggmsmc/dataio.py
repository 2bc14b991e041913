"""File ingestion and export: CSV data, edge-probability matrices, GraphML
and DOT graphs, diagnostics streams, serialized ensembles, run manifests.

All numeric text output uses 17 significant digits so that files round-trip
float64 exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import xml.sax.saxutils as saxutils
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import Dataset, DifferentialEdge, PosteriorSummary
from .graphs import Graph
from .smc import ParticleEnsemble, SmcDiagnostics

__all__ = [
    "ConfigError",
    "DataError",
    "RunManifest",
    "ingest_csv",
    "fmt",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_matrix_json",
    "write_graphml",
    "write_dot",
    "threshold_graph",
    "write_differential_csv",
    "write_diagnostics_csv",
    "write_ensemble_json",
    "read_ensemble_json",
    "write_manifest",
    "export_summary",
]


class ConfigError(Exception):
    """Bad run configuration (exit code 1)."""


class DataError(Exception):
    """Bad input data (exit code 2)."""


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = [cell.strip() for cell in rows[0]]
    width = len(header)
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} cells, got {len(row)}")
        body.append([cell.strip() for cell in row])
    return header, body


def _parse_numeric(cell: str, path, lineno: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} in column {column!r}") from None


def ingest_csv(
    path=None,
    group_column: str | None = None,
    group_files=None,
    standardize: bool = False,
) -> Dataset:
    """Load observations from one CSV (optionally with a group column) or
    one CSV per group.

    With ``standardize``, each variable is scaled to mean zero and sample
    standard deviation one within every group; constant columns are
    rejected.
    """
    if (path is None) == (group_files is None):
        raise ConfigError("provide either one csv path or a list of per-group files")
    blocks = []
    if group_files is not None:
        ref_names = None
        for g, fp in enumerate(group_files, start=1):
            header, body = _read_table(fp)
            if ref_names is None:
                ref_names = header
            elif header != ref_names:
                raise DataError(f"{fp}: column names differ from the first group file")
            obs = np.array(
                [
                    [_parse_numeric(cell, fp, i + 2, header[j]) for j, cell in enumerate(row)]
                    for i, row in enumerate(body)
                ]
            )
            blocks.append((g, obs))
        names = list(ref_names)
    else:
        header, body = _read_table(path)
        if group_column is not None:
            if group_column not in header:
                raise DataError(f"{path}: group column {group_column!r} not found")
            gcol = header.index(group_column)
            names = [h for i, h in enumerate(header) if i != gcol]
            labels = []
            for i, row in enumerate(body):
                try:
                    labels.append(int(float(row[gcol])))
                except ValueError:
                    raise DataError(
                        f"{path}:{i + 2}: non-numeric group label {row[gcol]!r}"
                    ) from None
            uniq = sorted(set(labels))
            if uniq != list(range(1, len(uniq) + 1)):
                raise DataError(f"{path}: group labels must be 1..K, got {uniq}")
            obs = np.array(
                [
                    [
                        _parse_numeric(cell, path, i + 2, header[j])
                        for j, cell in enumerate(row)
                        if j != gcol
                    ]
                    for i, row in enumerate(body)
                ]
            )
            for g in range(1, len(uniq) + 1):
                blocks.append((g, obs[np.asarray(labels) == g]))
        else:
            names = list(header)
            obs = np.array(
                [
                    [_parse_numeric(cell, path, i + 2, header[j]) for j, cell in enumerate(row)]
                    for i, row in enumerate(body)
                ]
            )
            blocks.append((1, obs))
    for g, obs in blocks:
        if obs.shape[0] == 0:
            raise DataError(f"group {g} is empty")
    if standardize:
        std_blocks = []
        for g, obs in blocks:
            mean = obs.mean(axis=0)
            sd = obs.std(axis=0, ddof=1) if obs.shape[0] > 1 else np.zeros(obs.shape[1])
            for j, s in enumerate(sd):
                if not s > 0:
                    raise DataError(
                        f"zero variance in column {names[j]!r} of group {g}; cannot standardize"
                    )
            std_blocks.append((g, (obs - mean) / sd))
        blocks = std_blocks
    observations = np.vstack([obs for _, obs in blocks])
    group_index = np.concatenate(
        [np.full(obs.shape[0], g, dtype=np.int64) for g, obs in blocks]
    )
    return Dataset(observations, group_index, names, standardized=standardize)


def write_matrix_csv(matrix: np.ndarray, path, names=None) -> None:
    matrix = np.asarray(matrix, dtype=float)
    p = matrix.shape[0]
    names = names or [f"v{i}" for i in range(1, p + 1)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(names))
        for i in range(p):
            writer.writerow([names[i]] + [fmt(v) for v in matrix[i]])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(c) for c in row[1:]] for row in rows[1:]])


def write_matrix_json(matrices: dict, path) -> None:
    payload = {key: np.asarray(m, dtype=float).tolist() for key, m in matrices.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def threshold_graph(rho: np.ndarray, threshold: float = 0.5) -> Graph:
    """Graph of edges with posterior probability strictly above ``threshold``."""
    return Graph((np.asarray(rho) > threshold).astype(np.uint8))


def write_graphml(g: Graph, path, names=None, edge_weights: np.ndarray | None = None) -> None:
    names = names or [f"v{i}" for i in range(1, g.p + 1)]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="w" for="edge" attr.name="weight" attr.type="double"/>',
        '  <graph id="G" edgedefault="undirected">',
    ]
    for name in names:
        lines.append(f'    <node id={saxutils.quoteattr(str(name))}/>')
    for i, j in g.edges():
        src = saxutils.quoteattr(str(names[i - 1]))
        dst = saxutils.quoteattr(str(names[j - 1]))
        if edge_weights is not None:
            w = fmt(edge_weights[i - 1, j - 1])
            lines.append(f'    <edge source={src} target={dst}><data key="w">{w}</data></edge>')
        else:
            lines.append(f"    <edge source={src} target={dst}/>")
    lines += ["  </graph>", "</graphml>", ""]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def _dot_quote(name) -> str:
    return '"' + str(name).replace('"', '\\"') + '"'


def write_dot(g: Graph, path, names=None, edge_weights: np.ndarray | None = None) -> None:
    """DOT export; the edge width attribute carries the posterior probability."""
    names = names or [f"v{i}" for i in range(1, g.p + 1)]
    lines = ["graph G {"]
    for name in names:
        lines.append(f"  {_dot_quote(name)};")
    for i, j in g.edges():
        attr = ""
        if edge_weights is not None:
            attr = f" [penwidth={fmt(edge_weights[i - 1, j - 1])}]"
        lines.append(f"  {_dot_quote(names[i - 1])} -- {_dot_quote(names[j - 1])}{attr};")
    lines += ["}", ""]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def write_differential_csv(edges: list[DifferentialEdge], path, names=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_i", "node_j", "prob_g1", "prob_g2", "abs_difference", "direction"])
        for e in edges:
            ni = names[e.i - 1] if names else e.i
            nj = names[e.j - 1] if names else e.j
            writer.writerow([ni, nj, fmt(e.prob_g1), fmt(e.prob_g2), fmt(e.abs_difference), e.direction])


def write_diagnostics_csv(diag: SmcDiagnostics, path) -> None:
    """One row per iteration: t, temperature, ESS, resampled, acceptance
    rate, mean log target."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "phi", "ess", "resampled", "acceptance_rate", "mean_log_target"])
        for row in diag.rows():
            writer.writerow(
                [
                    row["t"],
                    fmt(row["phi"]),
                    fmt(row["ess"]),
                    int(row["resampled"]),
                    "" if np.isnan(row["acceptance_rate"]) else fmt(row["acceptance_rate"]),
                    fmt(row["mean_log_target"]),
                ]
            )


def write_ensemble_json(ensemble: ParticleEnsemble, path) -> None:
    """Particle index, normalized weight, and per-group 1-based edge lists."""
    weights = ensemble.weights
    particles = []
    for n in range(ensemble.n_particles):
        groups = []
        for k in range(ensemble.n_groups):
            ii, jj = np.nonzero(np.triu(ensemble.adjacency[n, k], 1))
            groups.append([[int(i) + 1, int(j) + 1] for i, j in zip(ii, jj)])
        particles.append(
            {
                "particle": n,
                "weight": float(weights[n]),
                "log_gamma": float(ensemble.log_gamma[n]),
                "groups": groups,
            }
        )
    payload = {
        "p": ensemble.p,
        "n_groups": ensemble.n_groups,
        "temperature": ensemble.temperature,
        "particles": particles,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_ensemble_json(path) -> ParticleEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    p = payload["p"]
    k_groups = payload["n_groups"]
    particles = payload["particles"]
    n = len(particles)
    adjacency = np.zeros((n, k_groups, p, p), dtype=np.uint8)
    weights = np.empty(n)
    log_gamma = np.empty(n)
    for entry in particles:
        idx = entry["particle"]
        weights[idx] = entry["weight"]
        log_gamma[idx] = entry.get("log_gamma", 0.0)
        for k, edges in enumerate(entry["groups"]):
            for i, j in edges:
                adjacency[idx, k, i - 1, j - 1] = 1
                adjacency[idx, k, j - 1, i - 1] = 1
    log_weights = np.log(np.maximum(weights, 1e-300))
    return ParticleEnsemble(adjacency, log_weights, log_gamma, payload.get("temperature", 1.0))


@dataclass
class RunManifest:
    """Everything required to reproduce a run bit-for-bit, plus timing."""

    command: str
    config: dict
    seed: int
    code_version: str
    temperatures: list[float]
    estimator_settings: dict
    wall_time_seconds: float
    diagnostics_summary: dict = field(default_factory=dict)

    def write(self, path) -> None:
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "code_version": self.code_version,
            "temperatures": self.temperatures,
            "estimator_settings": self.estimator_settings,
            "wall_time_seconds": self.wall_time_seconds,
            "diagnostics_summary": self.diagnostics_summary,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")


def write_manifest(manifest: RunManifest, path) -> None:
    manifest.write(path)


def export_summary(
    summary: PosteriorSummary,
    out_dir,
    names=None,
    threshold: float = 0.5,
) -> list[Path]:
    """Write the standard summary bundle and return the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    k_groups = len(summary.edge_prob)
    names = names or [f"v{i}" for i in range(1, summary.edge_prob[0].shape[0] + 1)]
    for k, rho in enumerate(summary.edge_prob, start=1):
        path = out / f"edge_prob_g{k}.csv"
        write_matrix_csv(rho, path, names)
        written.append(path)
        g = threshold_graph(rho, threshold)
        for ext, writer in (("graphml", write_graphml), ("dot", write_dot)):
            path = out / f"graph_g{k}.{ext}"
            writer(g, path, names, edge_weights=rho)
            written.append(path)
    path = out / "edge_prob.json"
    write_matrix_json(
        {f"g{k}": rho for k, rho in enumerate(summary.edge_prob, start=1)}, path
    )
    written.append(path)
    with open(out / "centrality.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "group", "weighted_degree", "weighted_betweenness"])
        for k in range(k_groups):
            for i, name in enumerate(names):
                writer.writerow(
                    [
                        name,
                        k + 1,
                        fmt(summary.weighted_degree[k, i]),
                        fmt(summary.weighted_betweenness[k, i]),
                    ]
                )
    written.append(out / "centrality.csv")
    if summary.connectivity_mean is not None:
        with open(out / "connectivity.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "group", "mean", "lower", "upper"])
            kk = summary.connectivity_mean.shape[0]
            for k in range(kk):
                for i, name in enumerate(names):
                    writer.writerow(
                        [
                            name,
                            k + 1,
                            fmt(summary.connectivity_mean[k, i]),
                            fmt(summary.connectivity_interval[k, i, 0]),
                            fmt(summary.connectivity_interval[k, i, 1]),
                        ]
                    )
        written.append(out / "connectivity.csv")
    if summary.coefficient_mean is not None:
        with open(out / "coefficients.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "covariate", "mean", "lower", "upper"])
            p, q = summary.coefficient_mean.shape
            for i, name in enumerate(names):
                for jq in range(q):
                    writer.writerow(
                        [
                            name,
                            jq + 1,
                            fmt(summary.coefficient_mean[i, jq]),
                            fmt(summary.coefficient_interval[i, jq, 0]),
                            fmt(summary.coefficient_interval[i, jq, 1]),
                        ]
                    )
        written.append(out / "coefficients.csv")
    if summary.differential_edges or k_groups == 2:
        path = out / "differential_network.csv"
        write_differential_csv(summary.differential_edges, path, names)
        written.append(path)
        diff = Graph(_differential_adjacency(summary))
        rho_delta = np.abs(summary.edge_prob[0] - summary.edge_prob[1]) if k_groups == 2 else None
        write_graphml(diff, out / "differential_network.graphml", names, edge_weights=rho_delta)
        write_dot(diff, out / "differential_network.dot", names, edge_weights=rho_delta)
        written += [out / "differential_network.graphml", out / "differential_network.dot"]
    if summary.mean_precision is not None:
        for k, mat in enumerate(summary.mean_precision, start=1):
            path = out / f"mean_precision_g{k}.csv"
            write_matrix_csv(mat, path, names)
            written.append(path)
    return written


def _differential_adjacency(summary: PosteriorSummary) -> np.ndarray:
    p = summary.edge_prob[0].shape[0]
    adj = np.zeros((p, p), dtype=np.uint8)
    for e in summary.differential_edges:
        adj[e.i - 1, e.j - 1] = adj[e.j - 1, e.i - 1] = 1
    return adj

"""Command-line front end: configuration, file formats and the batch commands.

Commands
  simulate    write benchmark datasets (per-level CSVs, manifest, truth JSON)
  select-nu0  per-level spike line search, report as JSON
  fit         joint or single-network fits from a manifest, report as JSON
  evaluate    edge-recovery metrics of a fit against a truth file, CSV rows
  rank        coefficient-driven node ranking and top-k subnetworks

Configuration is a plain-text file of ``key = value`` lines ('#' comments);
unknown keys are rejected.  Exit codes: 0 success, 2 configuration error,
3 data/file error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

import numpy as np

from .baseline import fit_ssl
from .core import DataError, GroupedDataset, NumericalError
from .engine import FitControls, Hyperparameters, edge_count_prior
from .engine import fit as engine_fit
from .metrics import evaluate_fit, rank_nodes_by_beta, top_k_edge_subnetworks
from .selection import Nu0SearchConfig, line_search_nu0
from .simulate import SimulationConfig, SimulationTruth, simulate_experiment

SCHEMA_VERSION = "1.0"


class ConfigError(ValueError):
    """The run configuration is malformed or incomplete."""


_INT_KEYS = {
    "p", "n_base_edges", "n_appearing", "n_disappearing", "n_per_group",
    "seed", "max_iter", "min_iter", "threads", "replicates", "k",
}
_FLOAT_KEYS = {
    "partial_corr_magnitude", "jitter_margin", "nu1", "lambda_diag", "n0",
    "t0_sq", "alpha_sigma", "beta_sigma", "gamma_ebic", "elbo_rel_tol",
    "ppi_threshold", "expected_edges", "sd_edges",
}
_STR_KEYS = {
    "out_dir", "manifest", "truth_json", "fit_json", "metrics_csv",
    "report_json", "out_prefix", "method",
}
_LIST_KEYS = {"levels", "nu0_grid", "nu0"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "levels":
            return tuple(int(part) for part in raw.split(","))
        if key == "nu0_grid":
            return tuple(float(part) for part in raw.split(","))
        if key == "nu0":
            if ":" in raw:
                pairs = [part.split(":", 1) for part in raw.split(",")]
                return {int(a): float(v) for a, v in pairs}
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value for '{key}': {raw!r}")
    return raw


def parse_config(path: str) -> dict[str, object]:
    """Read a key=value configuration file, rejecting unknown keys."""
    if not os.path.isfile(path):
        raise ConfigError(f"configuration file not found: {path}")
    config: dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in _ALL_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown configuration key '{key}'")
            if key in config:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            config[key] = _parse_value(key, raw)
    if config.get("threads", 1) < 1:
        raise ConfigError("threads must be at least 1")
    if config.get("replicates", 1) < 1:
        raise ConfigError("replicates must be at least 1")
    method = config.get("method", "joint")
    if method not in ("joint", "ssl"):
        raise ConfigError(f"method must be 'joint' or 'ssl', got {method!r}")
    return config


def _simulation_config(cfg: Mapping[str, object]) -> SimulationConfig:
    kwargs = {}
    for key in (
        "p", "levels", "n_base_edges", "n_appearing", "n_disappearing",
        "n_per_group", "partial_corr_magnitude", "jitter_margin", "seed",
    ):
        if key in cfg:
            kwargs[key] = cfg[key]
    try:
        return SimulationConfig(**kwargs)
    except DataError as exc:
        raise ConfigError(f"invalid simulation settings: {exc}")


def _fit_controls(cfg: Mapping[str, object]) -> FitControls:
    kwargs = {}
    for key in ("max_iter", "elbo_rel_tol", "min_iter"):
        if key in cfg:
            kwargs[key] = cfg[key]
    try:
        return FitControls(**kwargs)
    except DataError as exc:
        raise ConfigError(f"invalid fit controls: {exc}")


def _resolve_nu0(
    cfg: Mapping[str, object], levels: Sequence[int], report_path: str | None
) -> dict[int, float]:
    if report_path is not None:
        doc = read_json(report_path, expected_kind="nu0_selection")
        selected = {int(a): float(v) for a, v in doc["selected"].items()}
    elif "nu0" in cfg:
        value = cfg["nu0"]
        if isinstance(value, dict):
            selected = dict(value)
        else:
            selected = {int(a): float(value) for a in levels}
    else:
        raise ConfigError("set 'nu0' in the configuration or pass --nu0-report")
    missing = [a for a in levels if int(a) not in selected]
    if missing:
        raise ConfigError(f"no nu0 value for levels {missing}")
    return selected


def _hyperparameters(
    cfg: Mapping[str, object], levels: Sequence[int], p: int, nu0: Mapping[int, float]
) -> Hyperparameters:
    if "n0" in cfg and "t0_sq" in cfg:
        n0, t0_sq = float(cfg["n0"]), float(cfg["t0_sq"])
    else:
        n0_default, t0_default = edge_count_prior(
            p,
            cfg.get("expected_edges"),
            cfg.get("sd_edges"),
        )
        n0 = float(cfg.get("n0", n0_default))
        t0_sq = float(cfg.get("t0_sq", t0_default))
    try:
        return Hyperparameters(
            nu0=dict(nu0),
            nu1=float(cfg.get("nu1", 1.0)),
            lambda_diag=float(cfg.get("lambda_diag", 1.0)),
            n0=n0,
            t0_sq=t0_sq,
            alpha_sigma=float(cfg.get("alpha_sigma", 2.0)),
            beta_sigma=float(cfg.get("beta_sigma", 2.0)),
            gamma_ebic=float(cfg.get("gamma_ebic", 0.5)),
        )
    except DataError as exc:
        raise ConfigError(f"invalid hyperparameters: {exc}")


# ---------------------------------------------------------------------------
# File formats


def _format_float(value: float) -> str:
    return repr(float(value))


def write_data_csv(path: str, data: np.ndarray, names: Sequence[str]) -> None:
    data = np.asarray(data, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in data:
            fh.write(",".join(_format_float(v) for v in row) + "\n")


def read_data_csv(path: str) -> tuple[tuple[str, ...], np.ndarray]:
    if not os.path.isfile(path):
        raise DataError(f"data file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise DataError(f"{path}: missing header row")
        names = tuple(part.strip() for part in header.split(","))
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise DataError(
                    f"{path}:{lineno}: expected {len(names)} columns, got {len(parts)}"
                )
            try:
                rows.append([float(part) for part in parts])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value")
    if not rows:
        raise DataError(f"{path}: no data rows")
    return names, np.array(rows)


def write_manifest(path: str, entries: Sequence[tuple[str, int, int]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("file,level,n\n")
        for name, level, n in entries:
            fh.write(f"{name},{level},{n}\n")


def read_manifest(path: str) -> list[tuple[str, int, int]]:
    if not os.path.isfile(path):
        raise DataError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "file,level,n":
            raise DataError(f"{path}: manifest header must be 'file,level,n'")
        entries = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns")
            try:
                entries.append((parts[0], int(parts[1]), int(parts[2])))
            except ValueError:
                raise DataError(f"{path}:{lineno}: level and n must be integers")
    if not entries:
        raise DataError(f"{path}: empty manifest")
    return entries


def load_grouped_dataset(manifest_path: str) -> GroupedDataset:
    """Assemble the per-level data matrices referenced by a manifest."""
    entries = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    levels, matrices = [], []
    names_seen: dict[tuple[str, ...], str] = {}
    for name, level, n in entries:
        file_path = name if os.path.isabs(name) else os.path.join(base, name)
        names, data = read_data_csv(file_path)
        if data.shape[0] != n:
            raise DataError(
                f"{file_path}: manifest says {n} samples but the file has {data.shape[0]}"
            )
        names_seen[names] = file_path
        if len(names_seen) > 1:
            files = " vs ".join(sorted(names_seen.values()))
            raise DataError(f"variable names differ across levels: {files}")
        levels.append(level)
        matrices.append(data)
    variable_names = next(iter(names_seen))
    try:
        return GroupedDataset(
            levels=tuple(levels), data=tuple(matrices), variable_names=variable_names
        )
    except DataError as exc:
        raise DataError(f"{manifest_path}: {exc}")


def write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def read_json(path: str, expected_kind: str) -> dict:
    if not os.path.isfile(path):
        raise DataError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})")
    version = doc.get("schema_version")
    if not isinstance(version, str):
        raise DataError(f"{path}: missing schema_version field")
    major = version.split(".", 1)[0]
    if major != SCHEMA_VERSION.split(".", 1)[0]:
        raise DataError(f"{path}: unsupported schema major version {version!r}")
    kind = doc.get("kind")
    if kind != expected_kind:
        raise DataError(f"{path}: expected a {expected_kind!r} document, got {kind!r}")
    return doc


def truth_to_json(truth: SimulationTruth) -> dict:
    def edge_list(edges):
        return [[int(i), int(j)] for i, j in sorted(edges)]

    partial = {}
    for level in truth.levels:
        rho = truth.partial_corr[level]
        partial[str(level)] = [
            [int(i), int(j), float(rho[i, j])] for i, j in sorted(truth.adjacency[level])
        ]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "truth",
        "p": truth.p,
        "levels": list(truth.levels),
        "appearing": edge_list(truth.appearing),
        "disappearing": edge_list(truth.disappearing),
        "stable": edge_list(truth.stable),
        "adjacency": {str(a): edge_list(truth.adjacency[a]) for a in truth.levels},
        "partial_correlations": partial,
    }


def _matrix(doc_value) -> np.ndarray:
    return np.array(doc_value, dtype=float)


# ---------------------------------------------------------------------------
# Commands


def _require(value, flag: str, key: str):
    if value is None:
        raise ConfigError(f"pass {flag} or set '{key}' in the configuration")
    return value


def _check_output_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise DataError(f"output directory does not exist: {parent}")


def cmd_simulate(cfg: Mapping[str, object], out_dir: str | None) -> int:
    out_dir = _require(out_dir if out_dir is not None else cfg.get("out_dir"), "--out-dir", "out_dir")
    sim = _simulation_config(cfg)
    replicates = int(cfg.get("replicates", 1))
    os.makedirs(out_dir, exist_ok=True)
    for rep in range(replicates):
        target = out_dir if replicates == 1 else os.path.join(out_dir, f"rep{rep:03d}")
        os.makedirs(target, exist_ok=True)
        rep_config = dataclasses.replace(sim, seed=sim.seed + rep)
        dataset, truth = simulate_experiment(rep_config)
        entries = []
        for level, matrix in zip(dataset.levels, dataset.data):
            name = f"data_level_{level}.csv"
            write_data_csv(os.path.join(target, name), matrix, dataset.variable_names)
            entries.append((name, level, matrix.shape[0]))
        write_manifest(os.path.join(target, "manifest.csv"), entries)
        write_json(os.path.join(target, "truth.json"), truth_to_json(truth))
        print(
            f"wrote {len(entries)} data files, manifest.csv and truth.json to {target} "
            f"(seed {rep_config.seed})"
        )
    return 0


def cmd_select_nu0(
    cfg: Mapping[str, object], manifest: str | None, out: str | None
) -> int:
    manifest = _require(manifest if manifest is not None else cfg.get("manifest"), "--manifest", "manifest")
    out = _require(out if out is not None else cfg.get("report_json"), "--out", "report_json")
    _check_output_dir(out)
    dataset = load_grouped_dataset(manifest).prepare()
    nu1 = float(cfg.get("nu1", 1.0))
    gamma = float(cfg.get("gamma_ebic", 0.5))
    try:
        if "nu0_grid" in cfg:
            search = Nu0SearchConfig(grid=cfg["nu0_grid"], gamma_ebic=gamma)
        else:
            search = Nu0SearchConfig.for_slab(nu1, gamma_ebic=gamma)
    except DataError as exc:
        raise ConfigError(f"invalid nu0 grid: {exc}")
    result = line_search_nu0(
        dataset,
        nu1,
        search,
        lambda_diag=float(cfg.get("lambda_diag", 1.0)),
        n0=cfg.get("n0"),
        t0_sq=cfg.get("t0_sq"),
        controls=_fit_controls(cfg),
        workers=int(cfg.get("threads", 1)),
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "nu0_selection",
        "nu1": nu1,
        "gamma_ebic": gamma,
        "grid": list(result.grid),
        "levels": [
            {
                "level": a,
                "ebic": [None if math.isnan(v) else v for v in result.ebic[a]],
                "failures": list(result.failures[a]),
                "selected_nu0": result.selected[a],
            }
            for a in dataset.levels
        ],
        "selected": {str(a): result.selected[a] for a in dataset.levels},
    }
    write_json(out, doc)
    for a in dataset.levels:
        print(f"level {a}: selected nu0 = {result.selected[a]:g}")
    return 0


def cmd_fit(
    cfg: Mapping[str, object],
    manifest: str | None,
    out: str | None,
    method: str | None,
    nu0_report: str | None,
) -> int:
    manifest = _require(manifest if manifest is not None else cfg.get("manifest"), "--manifest", "manifest")
    out = _require(out if out is not None else cfg.get("fit_json"), "--out", "fit_json")
    _check_output_dir(out)
    method = method if method is not None else str(cfg.get("method", "joint"))
    if method not in ("joint", "ssl"):
        raise ConfigError(f"method must be 'joint' or 'ssl', got {method!r}")
    dataset = load_grouped_dataset(manifest).prepare()
    nu0 = _resolve_nu0(cfg, dataset.levels, nu0_report)
    hyper = _hyperparameters(cfg, dataset.levels, dataset.p, nu0)
    controls = _fit_controls(cfg)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit",
        "method": method,
        "p": dataset.p,
        "levels": list(dataset.levels),
        "n": {str(a): int(n) for a, n in zip(dataset.levels, dataset.group_sizes)},
        "variable_names": list(dataset.variable_names or ()),
        "hyperparameters": {
            "nu0": {str(a): hyper.nu0_for(a) for a in dataset.levels},
            "nu1": hyper.nu1,
            "lambda_diag": hyper.lambda_diag,
            "n0": hyper.n0,
            "t0_sq": hyper.t0_sq,
            "alpha_sigma": hyper.alpha_sigma,
            "beta_sigma": hyper.beta_sigma,
        },
    }
    if method == "joint":
        report = engine_fit(dataset, hyper, controls)
        state = report.final_state
        doc.update(
            {
                "converged": report.converged,
                "iterations": report.iterations,
                "elbo_trace": list(report.elbo_trace),
                "ppi": {str(a): state.ppi[a].tolist() for a in dataset.levels},
                "omega": {str(a): state.omega[a].tolist() for a in dataset.levels},
                "zeta_mean": state.zeta_mean.tolist(),
                "beta_mean": state.beta_mean.tolist(),
                "beta_var": state.beta_var.tolist(),
                "sigma_shape": state.sigma_shape,
                "sigma_rate": state.sigma_rate,
            }
        )
        print(
            f"joint fit: converged={report.converged} after {report.iterations} iterations"
        )
    else:
        threads = int(cfg.get("threads", 1))

        def run(level: int):
            return fit_ssl(
                dataset.group(level),
                nu0[level],
                hyper.nu1,
                hyper.lambda_diag,
                hyper.n0,
                hyper.t0_sq,
                controls,
            )

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                fits = dict(zip(dataset.levels, pool.map(run, dataset.levels)))
        else:
            fits = {a: run(a) for a in dataset.levels}
        doc.update(
            {
                "converged": {str(a): fits[a].converged for a in dataset.levels},
                "iterations": {str(a): fits[a].iterations for a in dataset.levels},
                "elbo_trace": {str(a): list(fits[a].elbo_trace) for a in dataset.levels},
                "ppi": {str(a): fits[a].ppi.tolist() for a in dataset.levels},
                "omega": {str(a): fits[a].omega.tolist() for a in dataset.levels},
                "zeta_mean": {
                    str(a): fits[a].state.zeta_mean.tolist() for a in dataset.levels
                },
            }
        )
        for a in dataset.levels:
            print(
                f"level {a}: converged={fits[a].converged} after {fits[a].iterations} iterations"
            )
    write_json(out, doc)
    print(f"wrote {out}")
    return 0


def cmd_evaluate(
    fit_path: str,
    truth_path: str,
    out_csv: str,
    replicate: int,
    threshold: float,
    append: bool,
) -> int:
    fit_doc = read_json(fit_path, expected_kind="fit")
    truth_doc = read_json(truth_path, expected_kind="truth")
    _check_output_dir(out_csv)
    fit_levels = [int(a) for a in fit_doc["levels"]]
    truth_levels = [int(a) for a in truth_doc["levels"]]
    if set(fit_levels) != set(truth_levels):
        raise DataError(
            f"levels differ between {fit_path} ({fit_levels}) and {truth_path} ({truth_levels})"
        )
    ppi = {int(a): _matrix(m) for a, m in fit_doc["ppi"].items()}
    adjacency = {
        int(a): [(int(i), int(j)) for i, j in pairs]
        for a, pairs in truth_doc["adjacency"].items()
    }
    report = evaluate_fit(ppi, adjacency, threshold)
    method = fit_doc["method"]
    fresh = not (append and os.path.isfile(out_csv))
    with open(out_csv, "w" if fresh else "a", encoding="utf-8", newline="") as fh:
        if fresh:
            fh.write("replicate,method,level,auc,precision,recall\n")
        for level in sorted(report.per_level):
            row = report.per_level[level]
            fh.write(
                f"{replicate},{method},{level},"
                f"{_format_float(row['auc'])},{_format_float(row['precision'])},"
                f"{_format_float(row['recall'])}\n"
            )
    for level in sorted(report.per_level):
        row = report.per_level[level]
        print(
            f"level {level}: auc={row['auc']:.4f} precision={row['precision']:.4f} "
            f"recall={row['recall']:.4f}"
        )
    return 0


def cmd_rank(fit_path: str, k: int, out_prefix: str) -> int:
    fit_doc = read_json(fit_path, expected_kind="fit")
    _check_output_dir(out_prefix + "_nodes.csv")
    if "beta_mean" not in fit_doc:
        raise DataError(
            "this fit has no covariate coefficients (single-network method); "
            "fit the joint model, or compute slopes from the per-level precision "
            "estimates with ols_beta_proxy"
        )
    beta = _matrix(fit_doc["beta_mean"])
    names = list(fit_doc.get("variable_names") or [])
    if len(names) != beta.shape[0]:
        names = [f"var{i + 1:04d}" for i in range(beta.shape[0])]
    positive, negative = top_k_edge_subnetworks(beta, k)
    ranking = rank_nodes_by_beta(beta, positive | negative)
    nodes_path = out_prefix + "_nodes.csv"
    with open(nodes_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("rank,node,name,score\n")
        for rank, (node, score) in enumerate(ranking, start=1):
            fh.write(f"{rank},{node},{names[node]},{_format_float(score)}\n")
    for label, edges, sign in (("positive", positive, -1.0), ("negative", negative, 1.0)):
        path = f"{out_prefix}_{label}_edges.csv"
        ordered = sorted(edges, key=lambda e: (sign * beta[e], e))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("node_i,node_j,name_i,name_j,beta\n")
            for i, j in ordered:
                fh.write(f"{i},{j},{names[i]},{names[j]},{_format_float(beta[i, j])}\n")
    print(
        f"wrote {nodes_path} and {len(positive)} positive / {len(negative)} negative "
        "subnetwork edges"
    )
    return 0


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordnet",
        description="Covariate-linked Gaussian graphical model estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write benchmark datasets")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out-dir")
    sim.set_defaults(func=lambda a: cmd_simulate(parse_config(a.config), a.out_dir))

    sel = sub.add_parser("select-nu0", help="spike line search per level")
    sel.add_argument("--config", required=True)
    sel.add_argument("--manifest")
    sel.add_argument("--out")
    sel.set_defaults(
        func=lambda a: cmd_select_nu0(parse_config(a.config), a.manifest, a.out)
    )

    fit_p = sub.add_parser("fit", help="fit the joint or single-network model")
    fit_p.add_argument("--config", required=True)
    fit_p.add_argument("--manifest")
    fit_p.add_argument("--out")
    fit_p.add_argument("--method", choices=("joint", "ssl"))
    fit_p.add_argument("--nu0-report")
    fit_p.set_defaults(
        func=lambda a: cmd_fit(
            parse_config(a.config), a.manifest, a.out, a.method, a.nu0_report
        )
    )

    ev = sub.add_parser("evaluate", help="edge-recovery metrics against a truth file")
    ev.add_argument("--fit", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--out", required=True)
    ev.add_argument("--replicate", type=int, default=0)
    ev.add_argument("--threshold", type=float, default=0.5)
    ev.add_argument("--append", action="store_true")
    ev.set_defaults(
        func=lambda a: cmd_evaluate(
            a.fit, a.truth, a.out, a.replicate, a.threshold, a.append
        )
    )

    rank = sub.add_parser("rank", help="node ranking and top-k subnetworks")
    rank.add_argument("--fit", required=True)
    rank.add_argument("--k", type=int, default=50)
    rank.add_argument("--out-prefix", required=True)
    rank.set_defaults(func=lambda a: cmd_rank(a.fit, a.k, a.out_prefix))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Experiment drivers behind the CLI: train/eval, variant comparison,
hyperparameter sweeps and filter/basis dumps."""

from __future__ import annotations

import itertools
import logging
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import torch

from .basis import PolyBasis
from .config import ConfigError, RunConfig
from .graph import Graph
from .io import (
    DataError,
    load_graph,
    read_checkpoint,
    read_json,
    write_checkpoint,
    write_csv,
    write_json,
)
from .metrics import MetricsReport
from .synth import SBMSpec, generate
from .training import TrainRun, build_model, torch_dtype, train
from .windows import effective_response

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1


def metrics_document(config: RunConfig, best_epoch: int, report: MetricsReport) -> dict:
    return {
        "config": config.to_dict(),
        "seed": config.seed,
        "best_epoch": best_epoch,
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "per_class": report.per_class,
        "confusion": report.confusion,
        "wall_clock_s": report.wall_clock_s,
    }


def graph_from_config(config: RunConfig) -> Graph:
    missing = [k for k in ("edges", "features", "labels") if getattr(config, k) is None]
    if missing:
        raise ConfigError(f"config is missing data paths: {missing}")
    return load_graph(config.edges, config.features, config.labels)


def save_run(run: TrainRun, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = {k: v.detach().double().numpy() for k, v in run.model.state_dict().items()}
    write_checkpoint(out / "checkpoint.bin", params)
    splits = {}
    for split in ("train", "val", "test"):
        if getattr(run.graph, f"{split}_mask") is not None:
            r = run.report(split)
            splits[split] = {"accuracy": r.accuracy, "macro_f1": r.macro_f1}
    manifest = {
        "format_version": MANIFEST_VERSION,
        "config": run.config.to_dict(),
        "homophily": run.homophily,
        "omega_bar": run.omega_bar,
        "best_epoch": run.best_epoch,
        "in_dim": run.graph.num_features,
        "metrics": splits,
        "centers": run.centers(),
    }
    write_json(out / "manifest.json", manifest)
    report = run.report("test")
    doc = metrics_document(run.config, run.best_epoch, report)
    write_json(out / "metrics.json", doc)
    keys = list(run.history[0]) if run.history else []
    write_csv(out / "curve.csv", keys, ([rec[k] for k in keys] for rec in run.history))
    return doc


def run_train(config: RunConfig, graph: Optional[Graph] = None) -> tuple[TrainRun, dict]:
    """Train from config paths (or a given graph) and write outputs to ``config.out``.

    Inputs are fully loaded before anything is written, so a bad input file
    leaves no partial output directory behind.
    """
    g = graph if graph is not None else graph_from_config(config)
    run = train(g, config)
    doc = None
    if config.out is not None:
        doc = save_run(run, config.out)
    else:
        doc = metrics_document(config, run.best_epoch, run.report("test"))
    return run, doc


@dataclass
class LoadedModel:
    config: RunConfig
    model: torch.nn.Module
    manifest: dict

    @property
    def omega_bar(self) -> float:
        return self.manifest["omega_bar"]


def load_trained(run_dir) -> LoadedModel:
    d = Path(run_dir)
    manifest = read_json(d / "manifest.json")
    config = RunConfig.from_dict(manifest["config"])
    model = build_model(config, manifest["in_dim"])
    params = read_checkpoint(d / "checkpoint.bin")
    dtype = torch_dtype(config.precision)
    state = {k: torch.as_tensor(v).to(dtype) for k, v in params.items()}
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise DataError(f"checkpoint does not match manifest config: {exc}") from exc
    model.eval()
    return LoadedModel(config, model, manifest)


def run_eval(run_dir, graph: Graph, split: str = "test") -> dict:
    from .graph import build_laplacian

    loaded = load_trained(run_dir)
    mask = getattr(graph, f"{split}_mask")
    if mask is None or not mask.any():
        raise DataError(f"graph has no {split} nodes")
    X = torch.as_tensor(graph.features, dtype=torch_dtype(loaded.config.precision))
    probs = loaded.model.predict_proba(X, build_laplacian(graph), loaded.omega_bar)
    pred = probs.argmax(dim=1).numpy()
    report = MetricsReport.from_predictions(graph.labels[mask], pred[mask])
    return metrics_document(loaded.config, loaded.manifest["best_epoch"], report)


# -- comparisons and sweeps --------------------------------------------------

MODES = ("windowed", "plain", "nohomophily", "single")


def variant_config(base: RunConfig, variant: str) -> RunConfig:
    """``"<basis>:<mode>"`` -> config.

    ``plain`` learns per-k coefficients directly (no window bank);
    ``nohomophily`` zeroes lambda_f and feeds a constant h = 0.5;
    ``single`` uses one window.
    """
    basis, _, mode = variant.partition(":")
    mode = mode or "windowed"
    if mode not in MODES:
        raise ConfigError(f"unknown variant mode {mode!r}; expected one of {MODES}")
    cfg = base.replace(basis=basis)
    if mode == "plain":
        cfg = cfg.replace(variant="plain")
    elif mode == "nohomophily":
        cfg = cfg.replace(lambda_f=0.0, homophily=0.5)
    elif mode == "single":
        cfg = cfg.replace(n_windows=1)
    return cfg


def _graph_for_seed(seed: int, graph: Optional[Graph], spec: Optional[SBMSpec]) -> Graph:
    if graph is not None:
        return graph
    if spec is None:
        raise ValueError("need either a graph or an SBM spec")
    return generate(SBMSpec(**{**spec.__dict__, "seed": seed}))


def run_compare(
    config: RunConfig,
    variants: Sequence[str],
    seeds: Sequence[int],
    graph: Optional[Graph] = None,
    spec: Optional[SBMSpec] = None,
) -> list[dict]:
    """Median test Macro-F1 per variant over shared seeds.

    With an SBM ``spec``, each seed draws its own graph (shared by all
    variants); with a fixed ``graph`` only the model seed changes.
    """
    scores: dict[str, list[float]] = {v: [] for v in variants}
    for seed in seeds:
        g = _graph_for_seed(seed, graph, spec)
        for v in variants:
            cfg = variant_config(config, v).replace(seed=seed, out=None)
            run = train(g, cfg)
            scores[v].append(run.report("test").macro_f1)
            log.info("compare %s seed=%d f1=%.4f", v, seed, scores[v][-1])
    return [
        {"variant": v, "median_macro_f1": statistics.median(s), "macro_f1": s}
        for v, s in scores.items()
    ]


def parse_grid(text: str) -> dict[str, list]:
    """``"n_windows=1..6;order=1..6"`` or ``"lambda_f=0,0.1,0.5"``."""
    grid: dict[str, list] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, _, values = part.partition("=")
        key = key.strip()
        if not values:
            raise ConfigError(f"grid entry {part!r} has no values")
        if ".." in values:
            lo, hi = values.split("..")
            grid[key] = list(range(int(lo), int(hi) + 1))
        else:
            vals = []
            for v in values.split(","):
                v = v.strip()
                vals.append(int(v) if v.lstrip("-").isdigit() else float(v))
            grid[key] = vals
    if not grid:
        raise ConfigError("empty sweep grid")
    return grid


def run_sweep(
    config: RunConfig,
    grid: dict[str, list],
    seeds: Sequence[int],
    out_csv,
    graph: Optional[Graph] = None,
    spec: Optional[SBMSpec] = None,
) -> list[dict]:
    """One run per grid point per seed; the CSV is rewritten after each point."""
    keys = list(grid)
    header = keys + ["seed", "macro_f1"]
    rows: list[list] = []
    results = []
    for seed in seeds:
        g = _graph_for_seed(seed, graph, spec)
        for values in itertools.product(*(grid[k] for k in keys)):
            setting = dict(zip(keys, values))
            try:
                cfg = config.replace(**setting, seed=seed, out=None)
            except TypeError as exc:
                raise ConfigError(f"unknown sweep key in {setting}") from exc
            f1 = train(g, cfg).report("test").macro_f1
            rows.append(list(values) + [seed, f1])
            results.append({**setting, "seed": seed, "macro_f1": f1})
            if out_csv is not None:
                write_csv(out_csv, header, rows)
    return results


# -- dumps ---------------------------------------------------------------------


def filter_table(loaded: LoadedModel, block: int = 0, points: int = 1001):
    from .training import block_banks

    banks = block_banks(loaded.model, loaded.omega_bar)
    if not banks:
        raise ConfigError("model has no windowed blocks to dump")
    if not 0 <= block < len(banks):
        raise ConfigError(f"block index {block} out of range (0..{len(banks) - 1})")
    bank = banks[block]
    basis = loaded.model.basis
    grid = np.linspace(0.0, 2.0, points)
    per_window, combined = effective_response(bank, basis, grid)
    header = ["lambda"] + [f"g_{s + 1}" for s in range(len(bank.windows))] + ["combined"]
    rows = [[float(grid[i])] + [float(x) for x in per_window[:, i]] + [float(combined[i])]
            for i in range(points)]
    sidecar = {
        "block": block,
        "omega": [w.omega for w in bank.windows],
        "sigma": [w.sigma for w in bank.windows],
        "weights": bank.weights.tolist(),
        "homophily": loaded.manifest["homophily"],
        "omega_bar": loaded.omega_bar,
        "center": bank.center,
    }
    return header, rows, sidecar


def basis_table(basis: PolyBasis, points: int = 1001):
    grid = np.linspace(0.0, 2.0, points)
    table = basis.evaluate(grid)
    header = ["lambda"] + [f"P_{k}" for k in range(basis.size)]
    rows = [[float(grid[i])] + [float(x) for x in table[i]] for i in range(points)]
    return header, rows

"""Command line entry point.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .basis import KINDS, PolyBasis
from .config import ConfigError, load_config, parse_overrides
from .graph import GraphError
from .io import DataError, dumps_json, load_graph, save_graph, write_csv, write_json
from .synth import SBMSpec, generate, premise_check
from .training import DivergenceError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4

log = logging.getLogger("hwgnn")


def _seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _add_sbm_args(p: argparse.ArgumentParser, **defaults) -> None:
    d = SBMSpec(**defaults)
    p.add_argument("--n", type=int, default=d.n)
    p.add_argument("--bot-fraction", type=float, default=d.bot_fraction)
    p.add_argument("--target-homophily", type=float, default=d.homophily)
    p.add_argument("--mean-degree", type=float, default=d.mean_degree)
    p.add_argument("--n-features", type=int, default=d.n_features)
    p.add_argument("--mu", type=float, default=d.mu)


def _sbm_from(args, seed: int = 0) -> SBMSpec:
    return SBMSpec(args.n, args.bot_fraction, args.target_homophily, args.mean_degree,
                   args.n_features, args.mu, seed)


def _config(args, extra: list[str]):
    return load_config(args.config, parse_overrides(extra))


def _data_graph(config, args):
    if getattr(args, "data", None):
        d = Path(args.data)
        feats = d / "features.csv"
        if not feats.exists() and (d / "features.bin").exists():
            feats = d / "features.bin"
        return load_graph(d / "edges.csv", feats, d / "labels.csv")
    return ex.graph_from_config(config)


def cmd_gen(args, extra):
    if extra:
        raise ConfigError(f"unexpected arguments: {extra}")
    spec = _sbm_from(args, args.seed)
    try:
        g = generate(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    paths = save_graph(args.out, g, binary_features=args.binary)
    write_json(Path(args.out) / "spec.json", dict(spec.__dict__))
    print(dumps_json(paths), end="")


def cmd_train(args, extra):
    config = _config(args, extra)
    if args.out:
        config = config.replace(out=args.out)
    g = _data_graph(config, args)
    _, doc = ex.run_train(config, g)
    print(dumps_json(doc), end="")


def cmd_eval(args, extra):
    if extra:
        raise ConfigError(f"unexpected arguments: {extra}")
    loaded = ex.load_trained(args.run)
    g = _data_graph(loaded.config, args)
    doc = ex.run_eval(args.run, g, args.split)
    if args.output:
        write_json(args.output, doc)
    print(dumps_json(doc), end="")


def _experiment_data(args, config):
    if args.data or (config.edges and config.features and config.labels):
        return _data_graph(config, args), None
    return None, _sbm_from(args)


def cmd_compare(args, extra):
    config = _config(args, extra)
    graph, spec = _experiment_data(args, config)
    rows = ex.run_compare(config, args.variants.split(","), _seeds(args.seeds), graph, spec)
    table = [[r["variant"], r["median_macro_f1"]] + list(r["macro_f1"]) for r in rows]
    header = ["variant", "median_macro_f1"] + [f"seed_{s}" for s in _seeds(args.seeds)]
    if args.output:
        write_csv(args.output, header, table)
    for r in rows:
        print(f"{r['variant']:<28} {r['median_macro_f1']:.4f}")


def cmd_sweep(args, extra):
    config = _config(args, extra)
    graph, spec = _experiment_data(args, config)
    grid = ex.parse_grid(args.grid)
    results = ex.run_sweep(config, grid, _seeds(args.seeds), args.output, graph, spec)
    print(f"{len(results)} runs written to {args.output}")


def cmd_premise(args, extra):
    if extra:
        raise ConfigError(f"unexpected arguments: {extra}")
    rows = []
    for seed in _seeds(args.seeds):
        template = _sbm_from(args, seed)
        try:
            for h, share in premise_check(_floats(args.h), template):
                rows.append([h, share, seed])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    write_csv(args.output, ["h", "energy_share", "seed"], rows)
    for h, share, seed in rows:
        print(f"seed={seed} h={h:.2f} high_freq_share={share:.4f}")


def cmd_dump_filter(args, extra):
    if extra:
        raise ConfigError(f"unexpected arguments: {extra}")
    loaded = ex.load_trained(args.run)
    header, rows, sidecar = ex.filter_table(loaded, args.block, args.points)
    write_csv(args.output, header, rows)
    side = Path(args.output).with_suffix(".json")
    write_json(side, sidecar)
    print(f"wrote {args.output} and {side}")


def cmd_dump_basis(args, extra):
    if extra:
        raise ConfigError(f"unexpected arguments: {extra}")
    try:
        basis = PolyBasis(args.basis, args.order, args.jacobi_a, args.jacobi_b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    header, rows = ex.basis_table(basis, args.points)
    write_csv(args.output, header, rows)
    print(f"wrote {args.output}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hwgnn", description=__doc__.splitlines()[0], allow_abbrev=False
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic labelled graph", allow_abbrev=False)
    _add_sbm_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--binary", action="store_true", help="write features.bin (f32)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    for name, func, help_ in (
        ("train", cmd_train, "train a model; extra --key value pairs override the config"),
        ("compare", cmd_compare, "compare variants over seeds"),
        ("sweep", cmd_sweep, "grid sweep over hyperparameters"),
    ):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--data", help="directory with edges.csv, features.csv|bin, labels.csv")
        p.set_defaults(func=func)
        if name == "train":
            p.add_argument("--out", help="output directory")
        else:
            _add_sbm_args(p, n=3000, homophily=0.2, mu=1.0)
            p.add_argument("--seeds", default="0..4")
            p.add_argument("--output", help="CSV output path", required=(name == "sweep"))
        if name == "compare":
            p.add_argument("--variants",
                           default="bernstein:windowed,bernstein:plain,bernstein:nohomophily")
        if name == "sweep":
            p.add_argument("--grid", required=True, help='e.g. "n_windows=1..6;order=1..6"')

    p = sub.add_parser("eval", help="evaluate a trained run directory", allow_abbrev=False)
    p.add_argument("--run", required=True)
    p.add_argument("--data")
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("premise", help="high-frequency label energy vs homophily", allow_abbrev=False)
    _add_sbm_args(p, n=500)
    p.add_argument("--h", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--seeds", default="0")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_premise)

    p = sub.add_parser("dump-filter", help="learned window responses as CSV + JSON", allow_abbrev=False)
    p.add_argument("--run", required=True)
    p.add_argument("--block", type=int, default=0)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_dump_filter)

    p = sub.add_parser("dump-basis", help="pointwise basis table as CSV", allow_abbrev=False)
    p.add_argument("--basis", default="bernstein", choices=KINDS)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--jacobi-a", type=float, default=1.0)
    p.add_argument("--jacobi-b", type=float, default=1.0)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_dump_basis)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args, extra)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, GraphError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

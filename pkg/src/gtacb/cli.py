"""Command-line driver: ``gtacb <subcommand> [options]``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .centrality import centrality_table
from .community import cut_cost, detect_communities, read_partition
from .epidemic import SirConfig, simulate
from .graph import ParseError, load_graph, to_edge_list
from .harness import ExperimentGrid, generate_modular_graph, run_experiment_grid, write_report
from .seeding import METHODS, read_seeds, select_seeds

# execution-only settings, left out of the manifest so they cannot change outputs
_NOT_IN_MANIFEST = {"jobs", "out", "config", "func", "command"}


class CliError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _methods(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in names if x not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(METHODS)}")
    return names


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(outdir: Path, name: str, text: str) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    path.write_text(text, encoding="utf-8")
    return path


def _manifest(args, inputs: dict) -> str:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_IN_MANIFEST}
    body = {
        "command": args.command,
        "params": params,
        "rng_seed": getattr(args, "seed", None),
        "inputs": {str(p): _digest(p) for p in inputs.values() if p},
        "version": __version__,
    }
    return json.dumps(body, indent=2, default=str) + "\n"


def _graph(args):
    try:
        return load_graph(args.graph, fmt=args.format, directed=args.directed,
                          has_weights=not args.unweighted, normalize=not args.no_normalize)
    except FileNotFoundError:
        raise CliError(f"graph file not found: {args.graph}") from None
    except ParseError as exc:
        raise CliError(f"{args.graph}: {exc}") from None


def _sir(args) -> SirConfig:
    alpha = args.alpha
    if len(alpha) != args.L:
        raise CliError(f"--alpha has {len(alpha)} values but --L is {args.L}")
    kappa = args.kappa[0] if isinstance(args.kappa, list) else args.kappa
    try:
        return SirConfig(L=args.L, alpha=tuple(alpha), kappa=kappa, iterations=args.iters,
                         rng_seed=args.seed, transmission_mode=args.mode)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_ingest(args):
    g, report = _graph(args)
    out = Path(args.out)
    _write(out, "graph.tsv", to_edge_list(g))
    _write(out, "ingest.json", json.dumps({"n": g.n, "u": g.u, **report.as_dict()}, indent=2) + "\n")
    print(f"n={g.n} u={g.u} merged={report.arcs_merged} self_loops={report.self_loops_dropped}")
    return {"graph": args.graph}


def cmd_centrality(args):
    g, _ = _graph(args)
    _write(Path(args.out), "centrality.csv", centrality_table(g).to_csv())
    return {"graph": args.graph}


def cmd_communities(args):
    g, _ = _graph(args)
    try:
        part = detect_communities(g, args.K, restarts=args.restarts, rng_seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    _write(out, "partition.csv", part.to_csv())
    summary = {"H": part.H, "sizes": part.sizes, "cut_cost": cut_cost(g, part)}
    _write(out, "communities.json", json.dumps(summary, indent=2) + "\n")
    print(f"H={part.H} cut_cost={summary['cut_cost']:.9g}")
    return {"graph": args.graph}


def cmd_seeds(args):
    g, _ = _graph(args)
    partition = None
    if args.partition:
        try:
            partition = read_partition(g, Path(args.partition).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CliError(f"partition file not found: {args.partition}") from None
        except ValueError as exc:
            raise CliError(f"{args.partition}: {exc}") from None
    try:
        s = select_seeds(g, args.K, args.method, _topsis_weights(args), restarts=args.restarts,
                         rng_seed=args.seed, partition=partition)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _write(Path(args.out), "seeds.json", s.to_json() + "\n")
    print(" ".join(s.seeds))
    return {"graph": args.graph, "partition": args.partition}


def _topsis_weights(args):
    if args.weights is None:
        return None
    w = args.weights
    if len(w) != 4 or any(x < 0 for x in w) or sum(w) <= 0:
        raise CliError("--weights needs 4 non-negative numbers for dc,cc,bc,pr")
    total = sum(w)
    return [x / total for x in w]


def cmd_simulate(args):
    g, _ = _graph(args)
    cfg = _sir(args)
    try:
        seeds = read_seeds(Path(args.seeds).read_text(encoding="utf-8"))
        outcome = simulate(g, seeds, cfg, jobs=args.jobs)
    except FileNotFoundError:
        raise CliError(f"seed file not found: {args.seeds}") from None
    except (KeyError, ValueError) as exc:
        raise CliError(f"{args.seeds}: {exc}") from None
    out = Path(args.out)
    _write(out, "outcome.json", outcome.to_json() + "\n")
    if args.trace:
        _write(out, "trace.csv", outcome.trace_csv())
    print(f"gamma={outcome.gamma_mean:.6g} tau={outcome.tau_mean:.6g}")
    return {"graph": args.graph, "seeds": args.seeds}


def cmd_compare(args):
    g, _ = _graph(args)
    cfg = _sir(args)
    try:
        grid = ExperimentGrid(g, methods=args.methods, K_values=args.K, kappa_values=args.kappa,
                              sir=cfg, weights=_topsis_weights(args), restarts=args.restarts)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    report = run_experiment_grid(grid, jobs=args.jobs)
    write_report(report, args.out)
    for m, row in report.grid_means().items():
        print(f"{m:8s} gamma%={100 * row['gamma_pct']:.2f} tau={row['tau']:.2f} eta={row['eta']:.2f}")
    return {"graph": args.graph}


def cmd_generate(args):
    try:
        g, module = generate_modular_graph(args.n, args.c, args.p, args.r, rng_seed=args.seed,
                                           strict=args.strict)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    # each undirected edge once, smaller endpoint first
    lines = [f"{s}\t{d}\t{w:.9g}" for s, d, w in g.arcs() if int(s) < int(d)]
    _write(out, "graph.edges", "".join(line + "\n" for line in lines))
    _write(out, "planted.csv", "node,community\n" + "".join(f"{v},{m}\n" for v, m in zip(g.labels, module)))
    print(f"n={g.n} edges={g.u // 2}")
    return {}


def _graph_options(p):
    p.add_argument("-g", "--graph", required=True, help="edge list or Pajek .net file")
    p.add_argument("--format", choices=("auto", "edgelist", "pajek"), default="auto")
    p.add_argument("--directed", action="store_true", help="keep edge-list arcs directed")
    p.add_argument("--unweighted", action="store_true", help="ignore a third column")
    p.add_argument("--no-normalize", action="store_true", help="keep raw weights (default divides by the max)")


def _common(p):
    p.add_argument("-o", "--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def _sir_options(p, multi_kappa=False):
    p.add_argument("--L", type=int, default=2, help="periods a node stays infectious")
    p.add_argument("--alpha", type=_floats, default=[0.30, 0.15], help="comma list, one value per period")
    if multi_kappa:
        p.add_argument("--kappa", type=_floats, default=[0.2, 0.5], help="relative infectiousness values")
    else:
        p.add_argument("--kappa", type=float, default=0.5, help="relative infectiousness")
    p.add_argument("--iters", type=int, default=100, help="Monte Carlo replications")
    p.add_argument("--mode", choices=("per_edge", "summed_clamped"), default="per_edge")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _seed_options(p):
    p.add_argument("--restarts", type=int, default=20, help="k-means restarts")
    p.add_argument("--weights", type=_floats, help="TOPSIS weights for dc,cc,bc,pr (normalized)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtacb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, clean and normalize a graph")
    _graph_options(p)
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("centrality", help="DC, CC, BC and PR per node")
    _graph_options(p)
    _common(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("communities", help="spectral partition into K communities")
    _graph_options(p)
    _common(p)
    p.add_argument("-K", type=int, required=True, help="number of communities requested")
    p.add_argument("--restarts", type=int, default=20)
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("seeds", help="select K seed nodes")
    _graph_options(p)
    _common(p)
    _seed_options(p)
    p.add_argument("-K", type=int, required=True, help="number of seeds")
    p.add_argument("--method", choices=METHODS, default="gtacb")
    p.add_argument("--partition", help="node,community CSV to use instead of detecting communities")
    p.set_defaults(func=cmd_seeds)

    p = sub.add_parser("simulate", help="Monte Carlo SIR from a seed set")
    _graph_options(p)
    _common(p)
    _sir_options(p)
    p.add_argument("--seeds", required=True, help="seeds JSON or one label per line")
    p.add_argument("--trace", action="store_true", help="also write per-replication trace.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="grid of methods x K x kappa")
    _graph_options(p)
    _common(p)
    _sir_options(p, multi_kappa=True)
    _seed_options(p)
    p.add_argument("--methods", type=_methods, default=list(METHODS))
    p.add_argument("-K", "--K", dest="K", type=_ints, default=[5, 10, 20], help="comma list of seed counts")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", help="random graph with planted modules")
    _common(p)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--r", type=float, default=0.9)
    p.add_argument("--strict", action="store_true", help="fail instead of clipping probabilities")
    p.set_defaults(func=cmd_generate)
    return parser


def _read_config(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        values[key.replace("-", "_")] = value.strip("\"'")
    return values


def _prescan(parser, argv):
    """Find the subcommand and ``--config`` path without enforcing required flags."""
    commands = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in commands), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    return command, config


def _apply_config(parser, argv):
    """Parse ``argv`` with config-file values installed as subparser defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command, config = _prescan(parser, argv)
    if command is None or config is None:
        return parser.parse_args(argv)
    try:
        values = _read_config(config)
    except FileNotFoundError:
        raise CliError(f"config file not found: {config}") from None
    sub = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise CliError(f"{config}: unknown option {key!r} for '{command}'")
        if action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise CliError(f"{config}: {key}: {exc}") from None
        else:
            defaults[key] = raw
        if action.choices is not None and defaults[key] not in action.choices:
            raise CliError(f"{config}: {key}: invalid choice {raw!r}")
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        inputs = args.func(args)
        _write(Path(args.out), "manifest.json", _manifest(args, inputs))
    except CliError as exc:
        print(f"gtacb: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"gtacb: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

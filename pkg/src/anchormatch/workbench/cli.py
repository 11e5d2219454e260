"""``anchormatch`` command line: generate, train, index, query, verify, report."""

from __future__ import annotations

import argparse
import logging
import random
import sys
from collections.abc import Sequence
from pathlib import Path

from ..embedding import (
    GinModel,
    LabelConfig,
    StarEmbedder,
    TrainConfig,
    WLEmbedder,
    GinEmbedder,
    load_model,
    sampled_conflict_ratio,
    save_model,
    train_model,
    training_stars,
)
from ..engine import query
from ..errors import (
    AnchorMatchError,
    DigestMismatchError,
    FormatError,
    GraphParseError,
)
from ..graph import Graph, parse_graph, write_graph
from ..index import build_indexes, index_summary, load_indexes, save_indexes
from ..oracle import brute_force_matches
from ..planner import CostStrategy, StartStrategy
from .generators import MODELS, GenSpec, QueryGenSpec, generate_graph, generate_queries
from .metrics import QueryRecord, RunReport, aggregate_power, filtering_power, label_pair_counts

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISMATCH = 3
EXIT_IO = 4
EXIT_DIGEST = 5
EXIT_FORMAT = 6
EXIT_PARSE = 7
EXIT_ERROR = 8

log = logging.getLogger("anchormatch")


def _add_embedding_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("gin", "gin-untrained", "wl"), default="gin")
    p.add_argument("--model", type=Path, help="model file (gin; optional for gin-untrained)")
    p.add_argument("--n", type=int, default=10, help="hidden feature size")
    p.add_argument("--m", type=int, default=3, help="embedding size")
    p.add_argument("--seed", type=int, default=0)


def _add_plan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--plan", choices=("maxdeg", "minlf", "rand"), default="maxdeg")
    p.add_argument("--K", type=int, default=None, help="number of start vertices (default min(3,|V(Q)|))")
    p.add_argument("--cost", choices=("deg", "lf"), default="deg")
    p.add_argument("--workers", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anchormatch", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a synthetic labeled graph")
    p.add_argument("--model", choices=MODELS, default="nws")
    p.add_argument("--vertices", type=int, default=1000)
    p.add_argument("--avg-deg", type=float, default=5.0)
    p.add_argument("--sigma", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("gen-queries", help="extract random-walk queries from a graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--category", choices=("dense", "sparse", "any"), default="any")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("train", help="train a star GIN on a data graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--d-star", type=int, default=10)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=1024)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--untrained", action="store_true", help="write the seeded initial model")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("build-index", help="build the offline indexes")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--d-star", type=int, default=10)
    p.add_argument("--k", type=int, default=1)
    _add_embedding_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("query", help="match query graphs against an index")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("queries", nargs="+", type=Path, help="query files or directories")
    _add_embedding_flags(p)
    _add_plan_flags(p)
    p.add_argument("--show-plan", action="store_true")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="compare the engine with the brute-force oracle")
    p.add_argument("--graph", type=Path, help="data graph (default: generated suite)")
    p.add_argument("--index", type=Path)
    p.add_argument("queries", nargs="*", type=Path)
    p.add_argument("--suite", type=int, default=50, help="instances in the generated suite")
    p.add_argument("--d-star", type=int, default=10)
    _add_embedding_flags(p)
    _add_plan_flags(p)

    p = sub.add_parser("stats", help="index sizes and embedding conflict ratio")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--pairs", type=int, default=100_000)
    _add_embedding_flags(p)

    p = sub.add_parser("bench", help="run queries and emit a report")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("queries", nargs="+", type=Path)
    _add_embedding_flags(p)
    _add_plan_flags(p)
    p.add_argument("--oracle", action="store_true", help="also compute filtering power")
    p.add_argument("--out", type=Path)
    return ap


# ---------------------------------------------------------------------------


def _read_graph(path: Path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh)


def _query_files(paths: Sequence[Path]) -> list[Path]:
    out: list[Path] = []
    for p in paths:
        out.extend(sorted(x for x in p.iterdir() if x.is_file()) if p.is_dir() else [p])
    return out


def _embedder(args, g: Graph) -> StarEmbedder:
    if args.backend == "wl":
        return WLEmbedder()
    if args.model is not None:
        return GinEmbedder(load_model(args.model))
    if args.backend == "gin":
        raise SystemExit("the gin backend needs --model (train one with `anchormatch train`)")
    return GinEmbedder(GinModel.initialize(max(g.sigma_size, 1), args.n, args.m, seed=args.seed))


def _strategies(args) -> tuple[CostStrategy, StartStrategy]:
    return CostStrategy(args.cost, None), StartStrategy(args.plan, args.K, args.seed)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_gen_graph(args) -> int:
    g = generate_graph(GenSpec(args.model, args.vertices, args.avg_deg, args.sigma, args.seed))
    if args.out:
        write_graph(g, args.out)
    else:
        write_graph(g, sys.stdout)
    log.info("generated %r", g)
    return EXIT_OK


def cmd_gen_queries(args) -> int:
    g = _read_graph(args.graph)
    qs = generate_queries(g, QueryGenSpec(args.size, args.count, args.seed, args.category))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for i, q in enumerate(qs):
        write_graph(q, args.out_dir / f"q{args.size}_{i:04d}.graph")
    print(f"wrote {len(qs)} queries to {args.out_dir}")
    return EXIT_OK


def cmd_train(args) -> int:
    g = _read_graph(args.graph)
    if args.untrained:
        model = GinModel.initialize(max(g.sigma_size, 1), args.n, args.m, seed=args.seed)
    else:
        cfg = TrainConfig(args.epochs, args.lr, args.batch, args.seed, args.n, args.m)
        result = train_model(g, args.d_star, cfg, LabelConfig(xi=args.xi, seed=args.seed), args.k)
        model = result.model
        print(f"trained on {result.star_count} stars; final epoch loss {result.epoch_losses[-1]:.6g}")
    save_model(model, args.out)
    print(f"model {model.digest()} -> {args.out}")
    return EXIT_OK


def cmd_build_index(args) -> int:
    g = _read_graph(args.graph)
    idx = build_indexes(g, _embedder(args, g), args.d_star, args.k)
    save_indexes(idx, args.out)
    for k, v in index_summary(idx).items():
        print(f"{k}\t{v}")
    return EXIT_OK


def cmd_query(args) -> int:
    g = _read_graph(args.graph)
    idx = load_indexes(args.index)
    emb = _embedder(args, g)
    cost, start = _strategies(args)
    lines = []
    for path in _query_files(args.queries):
        q = _read_graph(path)
        r = query(q, g, idx, emb, cost, start, args.workers)
        lines.append(f"# {path.name}: {len(r.matches)} matches")
        if args.show_plan:
            lines.extend("# " + s for s in r.plan.describe().splitlines())
        lines.extend(r.lines())
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _verify_suite(args) -> tuple[int, int]:
    exact = 0
    for i in range(args.suite):
        rng = random.Random(args.seed * 1_000_003 + i)
        n, deg = rng.randint(20, 120), rng.choice([3, 4, 5, 6])
        if MODELS[i % 3] == "random-regular" and n * deg % 2:
            n += 1
        g = generate_graph(GenSpec(MODELS[i % 3], n, deg, rng.choice([3, 10, 50]), seed=rng.randrange(1 << 30)))
        q = generate_queries(g, QueryGenSpec(rng.randint(3, 6), 1, rng.randrange(1 << 30)))[0]
        emb = _embedder(args, g)
        idx = build_indexes(g, emb, args.d_star)
        cost, start = _strategies(args)
        if query(q, g, idx, emb, cost, start, args.workers).matches == brute_force_matches(q, g):
            exact += 1
        else:
            log.warning("instance %d differs from the oracle", i)
    return exact, args.suite


def cmd_verify(args) -> int:
    if args.graph is None:
        if args.backend == "gin":
            args.backend = "gin-untrained" if args.model is None else "gin"
        exact, total = _verify_suite(args)
    else:
        g = _read_graph(args.graph)
        emb = _embedder(args, g)
        idx = load_indexes(args.index) if args.index else build_indexes(g, emb, args.d_star)
        cost, start = _strategies(args)
        files = _query_files(args.queries)
        exact = 0
        for path in files:
            q = _read_graph(path)
            if query(q, g, idx, emb, cost, start, args.workers).matches == brute_force_matches(q, g):
                exact += 1
            else:
                log.warning("%s differs from the oracle", path)
        total = len(files)
    print(f"{exact}/{total} exact")
    return EXIT_OK if exact == total else EXIT_MISMATCH


def cmd_stats(args) -> int:
    g = _read_graph(args.graph)
    idx = load_indexes(args.index)
    emb = _embedder(args, g)
    idx.check_embedder(emb)
    for k, v in index_summary(idx).items():
        print(f"{k}\t{v}")
    stars = training_stars(g, idx.meta.dstar, idx.meta.k)
    try:
        ratio, hits = sampled_conflict_ratio(emb, stars, args.pairs, args.seed)
    except ValueError as exc:
        print(f"conflict_ratio\tn/a ({exc})")
    else:
        print(f"conflict_ratio\t{ratio:.6e}\t({hits}/{args.pairs})")
    return EXIT_OK


def cmd_bench(args) -> int:
    g = _read_graph(args.graph)
    idx = load_indexes(args.index)
    emb = _embedder(args, g)
    cost, start = _strategies(args)
    pair_counts = label_pair_counts(g) if args.oracle else None
    report = RunReport()
    all_edges = []
    for path in _query_files(args.queries):
        q = _read_graph(path)
        r = query(q, g, idx, emb, cost, start, args.workers)
        power = None
        if pair_counts is not None:
            edges = filtering_power(q, r, brute_force_matches(q, g), pair_counts)
            all_edges.extend(edges)
            power = aggregate_power(edges)
        report.add(QueryRecord.from_result(path.name, q, r, power))
    if all_edges:
        report.aggregate_filtering_power = aggregate_power(all_edges)
    _emit(report.to_json_lines(), args.out)
    print(report.summary_text(), file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "gen-graph": cmd_gen_graph,
    "gen-queries": cmd_gen_queries,
    "train": cmd_train,
    "build-index": cmd_build_index,
    "query": cmd_query,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except DigestMismatchError as exc:
        print(f"error: digest mismatch: {exc}", file=sys.stderr)
        return EXIT_DIGEST
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AnchorMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"error: {exc.code}", file=sys.stderr)
            return EXIT_USAGE
        raise


if __name__ == "__main__":
    sys.exit(main())

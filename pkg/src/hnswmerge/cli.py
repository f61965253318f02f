"""Command-line entry point: ``hnswmerge <subcommand> ...``.

Exit status is 0 on success, 2 for usage errors (bad flags, missing
input files) and 1 for failures while running.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import io as hio
from .build import build_index
from .datasets import gaussian_mixture, sift_descriptors
from .evaluation import (
    DEFAULT_LS,
    MergeVariant,
    SweepReport,
    ground_truth,
    merge_benchmark,
    search_sweep,
)
from .graph import IndexParams
from .merge import MergeAlgorithm, MergeParams, merge_indices
from .vecstore import DistanceMeter, Metric, Space

EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if not 0 <= lo < hi:
        raise argparse.ArgumentTypeError(f"need 0 <= LO < HI, got {text!r}")
    return lo, hi


def _existing(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise UsageError(f"no such file: {p}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hnswmerge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an index from an fvecs file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--M", type=int, default=16)
    p.add_argument("--M0", type=int, default=32)
    p.add_argument("--efc", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", type=_range, help="only index vectors LO..HI-1")
    p.add_argument("--strategy", choices=["rng", "knn"], default="rng")
    p.add_argument("--metric", choices=[m.value for m in Metric], default="sqeuclidean")
    p.add_argument("--no-vectors", action="store_true", help="store ids only")

    p = sub.add_parser("merge", help="merge two index files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--algo", required=True, choices=[a.value for a in MergeAlgorithm])
    p.add_argument("--out", required=True)
    p.add_argument("--base", help="fvecs file with the vectors, if the indices carry none")
    p.add_argument("--m", type=int)
    p.add_argument("--m0", type=int)
    p.add_argument("--search-ef", type=int, default=20)
    p.add_argument("--jump-ef", type=int, default=20)
    p.add_argument("--local-ef", type=int, default=32)
    p.add_argument("--next-step-k", type=int, default=MergeParams.next_step_k)
    p.add_argument("--next-step-ef", type=int)
    p.add_argument("--m-carry", type=int, default=MergeParams.m_carry)
    p.add_argument("--efc", type=int, help="insertion beam for sigm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=["rng", "knn"], default="rng")
    p.add_argument("--no-vectors", action="store_true")

    p = sub.add_parser("ground-truth", help="exact k nearest neighbors of each query")
    p.add_argument("--base", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("search-bench", help="recall and search cost over beam widths")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--L", type=_int_list, default=list(DEFAULT_LS))
    p.add_argument("--out", required=True)
    p.add_argument("--base", help="fvecs file with the vectors, if the index carries none")
    p.add_argument("--label", default="index")

    p = sub.add_parser("bench-all", help="split, build twice, merge every way, sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    return parser


def _space_for(files: list[hio.IndexFile], base: str | None) -> Space:
    metric = files[0].metric
    if base is not None:
        return Space(hio.read_fvecs(base), metric)
    if any(f.vectors is None for f in files):
        raise UsageError("index files carry no vectors; pass --base")
    size = max((max(f.index.levels) + 1 for f in files if f.index.levels), default=0)
    table = np.zeros((size, files[0].dim), dtype=np.float32)
    for f in files:
        if f.index.levels:
            table[f.index.ids] = f.vectors
    return Space(table, metric)


def cmd_build(args) -> None:
    _existing(args.input)
    X = hio.read_fvecs(args.input)
    lo, hi = args.range or (0, X.shape[0])
    if hi > X.shape[0]:
        raise UsageError(f"--range {lo}:{hi} exceeds the {X.shape[0]} vectors in {args.input}")
    space = Space(X, args.metric)
    params = IndexParams(M=args.M, M0=args.M0, ef_construction=args.efc, seed=args.seed)
    h = build_index(space, range(lo, hi), params, args.strategy, phase="build")
    hio.save_index(args.out, h, X.shape[1], args.metric, None if args.no_vectors else X)
    print(f"build_dc={space.meter['build']}")


def cmd_merge(args) -> None:
    _existing(args.a, args.b, args.base)
    fa, fb = hio.load_index(args.a), hio.load_index(args.b)
    if fa.dim != fb.dim or fa.metric != fb.metric:
        raise UsageError("indices differ in dimension or metric")
    space = _space_for([fa, fb], args.base)
    space.meter = DistanceMeter()
    params = MergeParams(
        m=args.m or fa.index.params.M,
        m0=args.m0 or fa.index.params.M0,
        search_ef=args.search_ef,
        jump_ef=args.jump_ef,
        local_ef=args.local_ef,
        next_step_k=args.next_step_k,
        next_step_ef=args.next_step_ef,
        m_carry=args.m_carry,
        seed=args.seed,
    )
    merged = merge_indices(fa.index, fb.index, args.algo, space, params, args.strategy,
                           ef_construction=args.efc, phase="merge")
    vectors = None if args.no_vectors else space.vectors
    hio.save_index(args.out, merged, fa.dim, fa.metric, vectors)
    print(f"merge_dc={space.meter['merge']}")


def cmd_ground_truth(args) -> None:
    _existing(args.base, args.queries)
    space = Space(hio.read_fvecs(args.base))
    gt = ground_truth(space, hio.read_fvecs(args.queries), args.k)
    hio.write_ivecs(args.out, gt)


def cmd_search_bench(args) -> None:
    _existing(args.index, args.queries, args.gt, args.base)
    f = hio.load_index(args.index)
    space = _space_for([f], args.base)
    queries = hio.read_fvecs(args.queries)
    truth = hio.read_ivecs(args.gt)
    if len(truth) != len(queries):
        raise UsageError(f"{len(queries)} queries but {len(truth)} ground-truth rows")
    rows = search_sweep(f.index, space, queries, truth, args.k, args.L, args.label)
    report = SweepReport(rows=rows, k=args.k, comment=f"index={Path(args.index).name}, k={args.k}")
    hio._atomic_write(args.out, report.to_csv().encode())


def _load_run_data(cfg: hio.RunConfig):
    if cfg.base:
        _existing(cfg.base, cfg.queries, cfg.ground_truth)
        if not cfg.queries:
            raise UsageError("config names a base file but no queries file")
        base = hio.read_fvecs(cfg.base)
        queries = hio.read_fvecs(cfg.queries)
    else:
        total = cfg.synthetic_n + cfg.synthetic_queries
        if cfg.synthetic_source == "sift":
            X = sift_descriptors(total, seed=cfg.seed)
        else:
            X = gaussian_mixture(total, cfg.synthetic_dim, seed=cfg.seed)
        base, queries = X[: cfg.synthetic_n], X[cfg.synthetic_n:]
    truth = None
    if cfg.ground_truth:
        truth = [row[: cfg.k] for row in hio.read_ivecs(cfg.ground_truth)]
    return base, queries, truth


def run_config(cfg: hio.RunConfig):
    base, queries, truth = _load_run_data(cfg)
    grid = [
        MergeVariant(
            algo=v.algo,
            label=v.label,
            params=dataclasses.replace(cfg.merge, **v.merge_overrides),
            ef_construction=v.ef_construction,
        )
        for v in cfg.variants
    ]
    return merge_benchmark(
        Space(base), queries, truth, split=cfg.split, build_params=cfg.build, grid=grid,
        merge_params=cfg.merge, strategy=cfg.strategy, k=cfg.k, Ls=cfg.Ls,
    )


def cmd_bench_all(args) -> None:
    _existing(args.config)
    try:
        cfg = hio.load_config(args.config)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from None
    out = args.out or cfg.output
    if out is None:
        raise UsageError("no output path: pass --out or set [run] output")
    result = run_config(cfg)
    hio._atomic_write(out, result.report.to_csv().encode())
    for label, dc in result.merge_dc.items():
        print(f"{label} merge_dc={dc}")


COMMANDS = {
    "build": cmd_build,
    "merge": cmd_merge,
    "ground-truth": cmd_ground_truth,
    "search-bench": cmd_search_bench,
    "bench-all": cmd_bench_all,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hnswmerge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - one-line diagnostic is the contract
        print(f"hnswmerge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: compare, sweep, matrix, sum, elo, regress, search, serve.
Exit codes: 0 ok, 2 I/O or parse error, 3 shape mismatch, 4 inapplicable
metric, 5 invalid configuration. Randomized subcommands default to seed 0 so
published results are reproducible; artifact files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .core import (
    LabeledArray,
    ParseError,
    RangeError,
    ShapeMismatchError,
    _write_atomic,
    load_array,
    save_array,
)
from .metrics import METRIC_NAMES, MetricNotApplicableError, compare_all, compute_metric
from .perturb import MORPH_OPS, NOISE_KINDS
from .study import agreement_stats, distance_table, run_sweep, sum_image

EXIT_OK = 0
EXIT_IO = 2
EXIT_SHAPE = 3
EXIT_METRIC = 4
EXIT_CONFIG = 5


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        _write_atomic(Path(path), text.encode("utf-8"))


def _emit_json(args, payload: dict) -> None:
    _write_text(getattr(args, "out", None), json.dumps(payload, indent=2) + "\n")


def _load(path: str) -> LabeledArray:
    return load_array(path)


# ---------------------------------------------------------------------------
# subcommands


def cmd_compare(args) -> int:
    gt = _load(args.ground_truth)
    cand = _load(args.candidate)
    if args.metric == "all":
        results = compare_all(gt, cand)
        payload = {name: res.value for name, res in results.items()}
        payload["madlad_degenerate"] = results["madlad"].degenerate
        if args.json:
            _emit_json(args, payload)
        else:
            for name in METRIC_NAMES:
                if name in results:
                    flag = " degenerate" if results[name].degenerate else ""
                    print(f"{name} {results[name].value!r}{flag}")
                else:
                    print(f"{name} inapplicable (inputs are not binary)")
        return EXIT_OK
    result = compute_metric(args.metric, gt, cand)
    if args.json:
        _emit_json(
            args,
            {"metric": result.metric_name, "value": result.value, "degenerate": result.degenerate},
        )
    else:
        flag = " degenerate" if result.degenerate else ""
        print(f"{result.metric_name} {result.value!r}{flag}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _load(args.base)
    result = run_sweep(
        base,
        args.kind,
        steps=args.steps,
        seed=args.seed,
        salt_label=args.salt_label,
        pepper_label=args.pepper_label,
        foreground_label=args.foreground,
    )
    _write_text(args.out, result.to_csv())
    return EXIT_OK


def _collect_paths(args) -> list[Path]:
    if args.dir is not None:
        paths = sorted(
            p for p in Path(args.dir).iterdir() if p.suffix.lower() in (".pgm", ".csv")
        )
    else:
        paths = [Path(p) for p in args.files]
    if len(paths) < 2:
        raise ValueError("need at least 2 input arrays")
    return paths


def cmd_matrix(args) -> int:
    paths = _collect_paths(args)
    arrays = [_load(p) for p in paths]
    table = distance_table(
        arrays, metric=args.metric, direction=args.direction, ids=[p.stem for p in paths]
    )
    _write_text(args.out, table.to_csv())
    if args.stats:
        stats = agreement_stats(table, threshold=args.threshold)
        below_mean = None if stats.below_count == 0 else stats.below_mean
        print(
            json.dumps(
                {
                    "threshold": stats.threshold,
                    "below_count": stats.below_count,
                    "below_mean": below_mean,
                    "offdiag_mean": stats.offdiag_mean,
                    "offdiag_count": stats.offdiag_count,
                }
            ),
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_sum(args) -> int:
    masks = [_load(p) for p in args.files]
    image = sum_image(masks)
    image.save_pgm(args.out)
    return EXIT_OK


def cmd_elo(args) -> int:
    from .elo import ChoiceMatrix, parse_choice_log, replay_order, run_tournament
    from .elo import build_choice_matrix

    if (args.choices is None) == (args.log is None):
        raise ValueError("pass exactly one of --choices or --log")
    if args.choices is not None:
        matrix = ChoiceMatrix.from_csv(Path(args.choices).read_text())
        order = replay_order(matrix, shuffle_seed=args.seed if args.shuffle else None)
    else:
        entries = parse_choice_log(Path(args.log).read_text())
        ids = sorted({e.winner for e in entries} | {e.loser for e in entries})
        order = [(e.winner, e.loser) for e in entries]
        matrix = build_choice_matrix(ids, order)
    ratings = run_tournament(matrix, order, k_factor=args.k, initial=args.initial)
    payload = {
        "ratings": {name: ratings.ratings[name] for name in matrix.ids},
        "ranking": ratings.ranking(),
        "k_factor": ratings.k_factor,
        "initial": ratings.initial,
    }
    if args.json:
        _emit_json(args, payload)
    else:
        for name in payload["ranking"]:
            print(f"{name} {payload['ratings'][name]!r}")
    return EXIT_OK


def cmd_regress(args) -> int:
    from .stats import ols_fit

    xs, ys = [], []
    text = Path(args.data).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise ParseError(f"line {lineno}: expected 'x,y', got {line!r}")
        try:
            xs.append(float(cells[0]))
            ys.append(float(cells[1]))
        except ValueError:
            if lineno == 1:  # tolerate a header row
                continue
            raise ParseError(f"line {lineno}: non-numeric value in {line!r}") from None
    report = ols_fit(xs, ys)
    _emit_json(
        args,
        {
            "slope": report.slope,
            "intercept": report.intercept,
            "r2": report.r_squared,
            "p": report.p_value,
            "n": report.n,
        },
    )
    return EXIT_OK


def cmd_search(args) -> int:
    from .search import SearchConfig, apply_genome, evolve, load_raster

    image = load_raster(args.image)
    gt = _load(args.gt)
    config = SearchConfig(
        population=args.population,
        generations=args.generations,
        metric=args.metric,
        seed=args.seed,
        crossover_rate=args.crossover_rate,
        mutation_rate=args.mutation_rate,
        elitism=args.elitism,
        tournament_size=args.tournament_size,
    )
    report = evolve(config, image, gt)
    payload = {
        "best_genome": _genome_dict(report.best_genome),
        "best_fitness": report.best_fitness,
        "metric": config.metric,
        "seed": config.seed,
        "history": [
            {"generation": s.generation, "best": s.best, "mean": s.mean} for s in report.history
        ],
        "ranked": [
            {"genome": _genome_dict(g), "fitness": f} for g, f in report.ranked_population
        ],
    }
    _emit_json(args, payload)
    if args.history is not None:
        _write_text(args.history, report.history_csv())
    if args.save_best is not None:
        save_array(apply_genome(report.best_genome, image), args.save_best, "pgm")
    return EXIT_OK


def _genome_dict(genome) -> dict:
    return {
        "channel": genome.channel,
        "threshold": genome.threshold,
        "invert": genome.invert,
        "morph_op": genome.morph_op,
        "footprint_side": genome.footprint_side,
    }


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.scenes, seed=args.seed, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labeldist",
        description="Labeled-array distance metrics and the experiments built on them.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="score a candidate segmentation against a ground truth")
    p.add_argument("ground_truth")
    p.add_argument("candidate")
    p.add_argument("--metric", choices=METRIC_NAMES + ("all",), default="all")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="perturbation sweep CSV against a base mask")
    p.add_argument("--base", required=True)
    p.add_argument("--kind", choices=NOISE_KINDS + MORPH_OPS, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--salt-label", type=int, default=1)
    p.add_argument("--pepper-label", type=int, default=0)
    p.add_argument("--foreground", type=int, default=0, help="morphology foreground label")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("matrix", help="pairwise distance table over a set of arrays")
    p.add_argument("files", nargs="*")
    p.add_argument("--dir", default=None, help="take all .pgm/.csv files from this directory")
    p.add_argument("--metric", choices=METRIC_NAMES, default="lad")
    p.add_argument("--direction", choices=("row_as_gt", "col_as_gt"), default="row_as_gt")
    p.add_argument("--stats", action="store_true", help="print agreement stats to stderr")
    p.add_argument("--threshold", type=float, default=0.0015)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("sum", help="overlay binary masks into an agreement sum image")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True, help="output PGM (maxval = mask count)")
    p.set_defaults(func=cmd_sum)

    p = sub.add_parser("elo", help="replay pairwise choices into Elo ratings")
    p.add_argument("--choices", default=None, help="choice-matrix CSV")
    p.add_argument("--log", default=None, help="chronological log CSV")
    p.add_argument("--shuffle", action="store_true", help="seeded shuffle of matrix replay order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=float, default=32.0)
    p.add_argument("--initial", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_elo)

    p = sub.add_parser("regress", help="least-squares fit of a two-column x,y CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("search", help="genetic search for a segmenter matching a ground truth")
    p.add_argument("--image", required=True, help="PGM or PPM raster")
    p.add_argument("--gt", required=True, help="ground-truth labeled array (.pgm/.csv)")
    p.add_argument("--metric", choices=("lad", "madlad"), default="lad")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--generations", type=int, default=50)
    p.add_argument("--crossover-rate", type=float, default=0.7)
    p.add_argument("--mutation-rate", type=float, default=0.1)
    p.add_argument("--elitism", type=int, default=1)
    p.add_argument("--tournament-size", type=int, default=3)
    p.add_argument("--out", default=None, help="JSON report path (stdout when omitted)")
    p.add_argument("--history", default=None, help="per-generation CSV path")
    p.add_argument("--save-best", default=None, help="write the best segmentation as PGM")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", help="run the pairwise-judgment HTTP server")
    p.add_argument("--scenes", required=True, help="scenes directory")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ui", default=None, help="built judge-ui bundle to serve at /static/")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ShapeMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except MetricNotApplicableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except (ParseError, RangeError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line front end: enrollment, training, normalization, querying,
evaluation, corpus generation, and serving the HTTP API."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluation, synthcorpus
from .engine import Engine
from .errors import CbirError, MissingLabels
from .retrieval import QueryParams
from .store import Store

_IMAGE_SUFFIXES = {".ppm", ".pgm", ".png", ".jpg", ".jpeg", ".gif", ".bmp", ".webp"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage problems exit 1 (after printing help to stderr), not argparse's 2."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cbir", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_db(p):
        p.add_argument("--db", default="cbir.db", help="store file path")

    p = sub.add_parser("enroll", help="enroll every image in a directory")
    p.add_argument("directory")
    p.add_argument("--labels", help="CSV of filename,category rows")
    add_db(p)

    p = sub.add_parser("train", help="train the category classifier")
    p.add_argument("--labels", required=True, help="CSV of path,category rows")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--hidden", type=int, default=24)
    add_db(p)

    p = sub.add_parser("fit-norm", help="fit corpus normalization bounds")
    add_db(p)

    p = sub.add_parser("query", help="rank enrolled images against one image")
    p.add_argument("image")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--json", action="store_true", dest="as_json")
    add_db(p)

    p = sub.add_parser("eval", help="per-category CRR/FRR over a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--json", action="store_true", dest="as_json")
    add_db(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory with the built web client")
    add_db(p)

    p = sub.add_parser("make-corpus", help="write a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--per-class", type=int, default=5)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--format", choices=("ppm", "png"), default="ppm",
                   help="png renders in browsers; ppm is the bit-exact default")

    return parser


def _read_labels_map(labels_path: str) -> dict[str, str]:
    rows = evaluation.load_labels(labels_path)
    return {path.name: label for path, label in rows}


def _iter_images(directory: Path):
    for path in sorted(directory.iterdir()):
        if path.is_file() and path.suffix.lower() in _IMAGE_SUFFIXES:
            yield path


def _cmd_enroll(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return 2
    labels = _read_labels_map(args.labels) if args.labels else {}
    paths = list(_iter_images(directory))
    if not paths:
        print(f"error: no images found in {directory}", file=sys.stderr)
        return 2
    with Store(args.db) as store:
        engine = Engine(store)
        for path in paths:
            label = labels.get(path.name)
            metadata = {"source": path.name}
            if label is not None:
                metadata["truth"] = label
            keywords = [path.stem] + [t for t in path.stem.split("_") if t]
            outcome = engine.enroll(
                path.read_bytes(),
                keywords=keywords,
                metadata=metadata,
                label=label,
            )
            name = outcome.category.name if outcome.category else "uncategorized"
            print(f"enrolled {path.name} as image {outcome.image_id} ({name})")
    return 0


def _cmd_train(args) -> int:
    rows = evaluation.load_labels(args.labels)
    labeled = [(path.read_bytes(), label) for path, label in rows]
    with Store(args.db) as store:
        engine = Engine(store)
        history = engine.train(labeled, seed=args.seed, hidden=args.hidden)
    print(f"trained on {len(labeled)} samples, "
          f"{len(history)} epochs, final loss {history[-1]:.6f}")
    return 0


def _cmd_fit_norm(args) -> int:
    with Store(args.db) as store:
        norm = Engine(store).fit_normalization()
    print(f"normalization fitted on {norm.fitted_on} records")
    return 0


def _cmd_query(args) -> int:
    payload = Path(args.image).read_bytes()
    with Store(args.db) as store:
        outcome = Engine(store).query(
            payload, QueryParams(top_k=args.top, threshold=args.threshold)
        )
    if args.as_json:
        doc = {
            "query_id": outcome.query_id,
            "predicted_category": outcome.category.name,
            "comparisons": outcome.comparisons,
            "results": [
                {
                    "image_id": r.image_id,
                    "color_sim": r.color_sim,
                    "texture_sim": r.texture_sim,
                    "score": r.score,
                    "rank": r.rank,
                }
                for r in outcome.results
            ],
        }
        print(json.dumps(doc, indent=2))
        return 0
    print(f"query {outcome.query_id}: predicted {outcome.category.name} "
          f"({outcome.comparisons} comparisons)")
    if not outcome.results:
        print("no matches above threshold")
    for r in outcome.results:
        print(f"  #{r.rank}  image {r.image_id}  score {r.score:.4f} "
              f"(color {r.color_sim:.4f}, texture {r.texture_sim:.4f})")
    return 0


def _cmd_eval(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        print(f"error: {corpus} is not a directory", file=sys.stderr)
        return 2
    rows = evaluation.load_labels(args.labels)
    labeled = []
    for path, label in rows:
        if not path.is_absolute() and not path.exists():
            path = corpus / path.name
        labeled.append((path.read_bytes(), label))
    with Store(args.db) as store:
        engine = Engine(store)
        report = evaluation.run_eval(
            engine, labeled, top_k=args.top, threshold=args.threshold
        )
    if args.as_json:
        print(json.dumps(report.to_dicts(), indent=2))
    else:
        print(evaluation.format_report(report))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.db, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_make_corpus(args) -> int:
    images = synthcorpus.generate_corpus(
        seed=args.seed, per_class=args.per_class, size=args.size,
        image_format=args.format,
    )
    labels_path = synthcorpus.write_corpus(args.out, images)
    print(f"wrote {len(images)} images and {labels_path}")
    return 0


_COMMANDS = {
    "enroll": _cmd_enroll,
    "train": _cmd_train,
    "fit-norm": _cmd_fit_norm,
    "query": _cmd_query,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
    "make-corpus": _cmd_make_corpus,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return 1
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except MissingLabels as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CbirError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: index building, querying, evaluation, synthesis.

Results go to standard output, diagnostics to standard error; every command
exits 0 on success and 1 on failure.
"""

from __future__ import annotations

import argparse
import base64
import html
import io
import json
import sys
from pathlib import Path

import numpy as np

from .evaluation import evaluate, load_ground_truth, report_lines, report_table
from .index import (
    Index,
    build_index,
    load_image,
    load_index,
    query,
    save_index,
)
from .matching import DistanceParams
from .signature import SignatureParams
from .synth import PERTURBATIONS, SynthSpec, generate_collection


def _err(message: str) -> None:
    print(f"chromaloc: {message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chromaloc",
        description="Content-based image retrieval with color histograms "
        "and spatial color locations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="extract signatures for a directory of images")
    p_index.add_argument("directory", help="root directory of PNG/JPEG images")
    p_index.add_argument("-o", "--out", required=True, help="index file to write")
    p_index.add_argument("--max-side", type=int, default=256,
                         help="reduce images so the longer side is at most this (default 256)")
    p_index.add_argument("--locations", type=int, default=5,
                         help="color locations stored per image (default 5)")

    p_query = sub.add_parser("query", help="rank indexed images against a probe image")
    p_query.add_argument("index", help="index file")
    p_query.add_argument("image", help="probe image")
    _add_distance_flags(p_query)
    p_query.add_argument("--top-k", type=int, default=15, help="results to return (default 15)")
    p_query.add_argument("--format", choices=("text", "json-lines", "html"), default="text")
    p_query.add_argument("--images-root", default=None,
                         help="directory the index ids are relative to (html thumbnails)")
    p_query.add_argument("-o", "--output", default=None,
                         help="write results to this file instead of stdout")

    p_eval = sub.add_parser("eval", help="precision/recall over a labeled collection")
    p_eval.add_argument("index", help="index file")
    p_eval.add_argument("groundtruth", help="CSV of image_id,group labels")
    _add_distance_flags(p_eval)
    p_eval.add_argument("--top-k", type=int, default=15, help="retrieved depth (default 15)")
    p_eval.add_argument("--format", choices=("text", "json-lines"), default="text")
    p_eval.add_argument("--report-dir", default=None,
                        help="also write report.txt, report.tsv and figures here")

    p_synth = sub.add_parser("synth", help="generate the deterministic synthetic collection")
    p_synth.add_argument("out_dir", help="directory to write PNGs and groundtruth.csv")
    p_synth.add_argument("--seed", type=int, default=42)
    p_synth.add_argument("--groups", type=int, default=6)
    p_synth.add_argument("--variants", type=int, default=10)
    p_synth.add_argument("--size", type=int, default=192)
    p_synth.add_argument("--perturbations", default=",".join(PERTURBATIONS),
                         help="comma-separated subset of: " + ", ".join(PERTURBATIONS))
    return parser


def _add_distance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=float, default=0.5,
                        help="histogram weight in [0,1]; 1.0 is the plain "
                        "histogram baseline (default 0.5)")
    parser.add_argument("--metric", choices=("intersection", "chi-square"),
                        default="intersection", help="histogram distance (default intersection)")
    parser.add_argument("--locations", type=int, default=None,
                        help="color locations compared (default: all the index stores)")
    parser.add_argument("--missing-penalty", type=float, default=10000.0,
                        help="distance charged per missing color (default 10000)")
    parser.add_argument("--color-norm", type=float, default=100.0,
                        help="divisor bringing color differences onto the "
                        "point-term scale; 1.0 disables the normalization (default 100)")


def _distance_params(args: argparse.Namespace, index: Index) -> DistanceParams:
    n = args.locations if args.locations is not None else index.params.n_locations
    return DistanceParams(
        k=args.k,
        hist_metric=args.metric,
        n_locations=n,
        missing_penalty=args.missing_penalty,
        color_norm=args.color_norm,
    )


def cmd_index(args: argparse.Namespace) -> int:
    index, skipped = build_index(
        args.directory,
        SignatureParams(max_side=args.max_side, n_locations=args.locations),
    )
    for image_id in skipped:
        _err(f"skipped undecodable file: {image_id}")
    save_index(index, args.out)
    print(f"indexed {len(index.records)} images -> {args.out}", file=sys.stderr)
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    probe = load_image(args.image)
    results = query(index, probe, _distance_params(args, index), args.top_k)

    if args.format == "text":
        body = "\n".join(
            f"{rank}\t{dist:.9f}\t{image_id}"
            for rank, (image_id, dist) in enumerate(results, start=1)
        )
    elif args.format == "json-lines":
        body = "\n".join(
            json.dumps({"rank": rank, "distance": dist, "image_id": image_id})
            for rank, (image_id, dist) in enumerate(results, start=1)
        )
    else:
        root = Path(args.images_root) if args.images_root else Path(args.index).parent
        body = _render_gallery(args.image, results, root)

    if args.output:
        Path(args.output).write_text(body + "\n", encoding="utf-8")
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        print(body)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    gt = load_ground_truth(args.groundtruth)
    report = evaluate(index, gt, _distance_params(args, index), args.top_k)

    if args.format == "text":
        print(report_table(report))
    else:
        for row in report.per_query:
            print(json.dumps({
                "image_id": row.image_id,
                "a": row.relevant_retrieved,
                "b": row.irrelevant_retrieved,
                "c": row.relevant_missed,
                "precision": row.precision,
                "recall": row.recall,
            }))
        print(json.dumps({
            "avg_precision": report.avg_precision,
            "avg_recall": report.avg_recall,
        }))

    if args.report_dir:
        from .report import write_report_files

        for path in write_report_files(report, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    perturbations = frozenset(
        p.strip() for p in args.perturbations.split(",") if p.strip()
    )
    spec = SynthSpec(
        seed=args.seed,
        groups=args.groups,
        variants_per_group=args.variants,
        image_size=args.size,
        perturbations=perturbations,
    )
    gt = generate_collection(spec, args.out_dir)
    gt_path = Path(args.out_dir) / "groundtruth.csv"
    print(f"wrote {len(gt)} images, ground truth at {gt_path}", file=sys.stderr)
    return 0


def _thumbnail_uri(path: Path, max_side: int = 128) -> str | None:
    from PIL import Image

    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            rgb.thumbnail((max_side, max_side))
            buf = io.BytesIO()
            rgb.save(buf, format="PNG")
    except OSError:
        return None
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def _render_gallery(
    probe_path: str, results: list[tuple[str, float]], images_root: Path
) -> str:
    """Self-contained HTML page: the query first, then hits left to right."""
    cells = []
    uri = _thumbnail_uri(Path(probe_path))
    img_tag = f'<img src="{uri}" alt="query">' if uri else "<div class='missing'>?</div>"
    cells.append(
        f"<figure class='query'>{img_tag}"
        f"<figcaption>query<br>{html.escape(probe_path)}</figcaption></figure>"
    )
    for rank, (image_id, dist) in enumerate(results, start=1):
        uri = _thumbnail_uri(images_root / image_id)
        img_tag = (
            f'<img src="{uri}" alt="{html.escape(image_id)}">'
            if uri
            else "<div class='missing'>missing</div>"
        )
        cells.append(
            f"<figure>{img_tag}<figcaption>#{rank} d={dist:.9f}<br>"
            f"{html.escape(image_id)}</figcaption></figure>"
        )
    return (
        "<!DOCTYPE html>\n<html><head><meta charset='utf-8'>"
        "<title>chromaloc query results</title><style>"
        "body{font-family:sans-serif;background:#fafafa}"
        ".grid{display:flex;flex-wrap:wrap;gap:12px}"
        "figure{margin:0;padding:8px;background:#fff;border:1px solid #ddd;"
        "text-align:center;font-size:12px}"
        "figure.query{border:2px solid #336}"
        ".missing{width:128px;height:96px;display:flex;align-items:center;"
        "justify-content:center;color:#999}"
        "img{display:block;margin:0 auto}"
        "</style></head><body>"
        "<h1>query results</h1><div class='grid'>" + "".join(cells) + "</div>"
        "</body></html>"
    )


_COMMANDS = {
    "index": cmd_index,
    "query": cmd_query,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())

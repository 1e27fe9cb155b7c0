"""Command-line interface.

Exit codes: 0 success, 1 validation or audit failure, 2 usage error.
Every command that writes files also writes ``manifest.json`` next to its
outputs; ``labelscale replay manifest.json`` re-runs it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    IMAGE_SUFFIXES,
    AugmentSpec,
    SplitSpec,
    UnpairedError,
    augment,
    export_resized,
    list_images,
    read_image,
    resize_image,
    scan_pairs,
    split,
    write_image,
)
from .maskfilter import FilterStrategy, UnsupportedConfiguration, audit, mask_resize
from .metrics import evaluate_corpus
from .quantcompare import (
    MANUAL,
    METRICS,
    OptionThresholds,
    PredicateMode,
    build_tables,
    read_records,
    tally,
)
from .raster import LabelMask, check_labels
from .resample import Kernel, ResizeSpec, parse_size

log = logging.getLogger("labelscale")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


# -- helpers ----------------------------------------------------------------

def _clean(obj):
    """Make ``obj`` JSON-safe; NaN and inf become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(directory, args, argv, outcomes, seeds=None) -> Path:
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "tool": "labelscale",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "cwd": os.getcwd(),
        "flags": flags,
        "seeds": seeds or {},
        "outcomes": outcomes,
    }
    path = Path(directory) / "manifest.json"
    write_text_atomic(path, dumps(manifest))
    return path


def _labels(text: str) -> tuple[int, ...]:
    try:
        return check_labels(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _size(text: str) -> tuple[int, int]:
    try:
        return parse_size(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(n):
    def parse(text):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return vals
    return parse


def _int_range(text):
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LOW,HIGH integers") from None
    return lo, hi


def _io_pairs(src: Path, dst: Path) -> list[tuple[Path, Path]]:
    """Expand an input file or directory into (input, output) file pairs."""
    if src.is_dir():
        files = list(list_images(src).values())
        if not files:
            raise UsageError(f"no {'/'.join(IMAGE_SUFFIXES)} files in {src}")
        return [(f, dst / f.name) for f in files]
    if not src.exists():
        raise ValidationError(f"{src}: no such file")
    if dst.suffix.lower() in IMAGE_SUFFIXES:
        return [(src, dst)]
    return [(src, dst / src.name)]


def _manifest_dir(pairs) -> Path:
    return pairs[0][1].parent


# -- commands ---------------------------------------------------------------

def cmd_resize(args, argv) -> int:
    pairs = _io_pairs(Path(args.input), Path(args.output))
    kernel = Kernel(args.kernel)
    outcomes = {}
    for src, dst in pairs:
        img = read_image(src)
        write_image(dst, resize_image(img, args.size, kernel))
        outcomes[str(src)] = {"output": str(dst), "status": "ok"}
    write_manifest(_manifest_dir(pairs), args, argv, outcomes)
    print(f"resized {len(pairs)} file(s) to {args.size[0]}x{args.size[1]} with {kernel.value}")
    return EXIT_OK


def cmd_mask_resize(args, argv) -> int:
    strategy = FilterStrategy(args.filter)
    kernel = Kernel(args.kernel)
    if strategy is not FilterStrategy.NONE and args.labels != (0, 128, 255):
        raise UnsupportedConfiguration(
            f"--filter {strategy.value} needs labels 0,128,255, got {args.labels}"
        )
    pairs = _io_pairs(Path(args.input), Path(args.output))
    outcomes = {}
    for src, dst in pairs:
        mask = LabelMask(read_image(src), args.labels)
        spec = ResizeSpec.for_image(mask.image, args.size, kernel)
        out = mask_resize(mask, spec, strategy)
        write_image(dst, out.image)
        rep = audit(out.image, args.labels)
        outcomes[str(src)] = {"output": str(dst), "audit": rep.to_dict()}
    write_manifest(_manifest_dir(pairs), args, argv, outcomes)
    n_bad = sum(not o["audit"]["is_canonical"] for o in outcomes.values())
    print(f"resized {len(pairs)} mask(s); {n_bad} with extra labels")
    return EXIT_OK


def cmd_audit(args, argv) -> int:
    files = []
    for p in map(Path, args.inputs):
        if p.is_dir():
            files.extend(list_images(p).values())
        elif p.exists():
            files.append(p)
        else:
            raise ValidationError(f"{p}: no such file")
    if not files:
        raise UsageError("no masks to audit")
    reports = {str(f): audit(read_image(f), args.expect) for f in files}
    ok = all(r.is_canonical for r in reports.values())
    for f, r in reports.items():
        status = "ok" if r.is_canonical else "EXTRA " + ", ".join(
            f"{e.label}x{e.count}" for e in r.extra)
        print(f"{f}: {status}")
    if args.json:
        doc = {"expected": list(args.expect), "all_canonical": ok,
               "files": {f: r.to_dict() for f, r in reports.items()}}
        write_text_atomic(args.json, dumps(doc))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_eval(args, argv) -> int:
    try:
        gt = list_images(args.gt_dir)
        pred = list_images(args.pred_dir)
    except FileNotFoundError as exc:
        raise ValidationError(str(exc)) from None
    missing_pred = sorted(set(gt) - set(pred))
    missing_gt = sorted(set(pred) - set(gt))
    if missing_pred or missing_gt:
        raise ValidationError(str(UnpairedError(missing_pred, missing_gt)))
    if not gt:
        raise UsageError(f"no masks in {args.gt_dir}")
    names = sorted(gt)
    pairs = [(read_image(gt[n]), read_image(pred[n])) for n in names]
    report = evaluate_corpus(pairs, args.labels, args.theta, names)
    rows = report.csv_rows()
    for r in rows:
        print("  ".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in r))
    print(f"global accuracy {report.global_accuracy:.4f}")
    if args.json:
        write_text_atomic(args.json, dumps(report.to_dict()))
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerows(rows)
        w.writerow([])
        w.writerow(["global_accuracy", report.global_accuracy])
        w.writerow(["image", "dice"])
        w.writerows(zip(names, report.per_image_dice))
        write_text_atomic(args.csv, buf.getvalue())
    return EXIT_OK


def cmd_quant_compare(args, argv) -> int:
    try:
        records = read_records(args.records)
    except FileNotFoundError:
        raise ValidationError(f"{args.records}: no such file") from None
    methods = {r.method for r in records}
    if MANUAL not in methods:
        raise UsageError(f"{args.records}: no rows with method {MANUAL!r}")
    th = OptionThresholds(*args.thresholds, mode=PredicateMode(args.mode))
    tables = build_tables(records, th)
    result = tally(tables)
    for t in tables:
        print(t.name)
        nets = t.networks
        print("  metric    " + "  ".join(f"{n:>8}" for n in nets))
        for m in METRICS:
            print(f"  {m:<8}  " + "  ".join(f"{t.values[m][n]:8.2f}" for n in nets))
    print("wins: " + ", ".join(
        f"{n} {w}/{result.n_slots} ({100 * result.fraction(n):.1f}%)" for n, w in result.wins.items()))
    doc = {"tables": [t.to_dict() for t in tables], "tally": result.to_dict()}
    if args.json:
        write_text_atomic(args.json, dumps(doc))
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["table", "metric", *tables[0].networks])
        for t in tables:
            for m in METRICS:
                w.writerow([t.name, m, *(t.values[m][n] for n in t.networks)])
        write_text_atomic(args.csv, buf.getvalue())
    return EXIT_OK


def _scan(args):
    try:
        return scan_pairs(args.image_dir, args.mask_dir, args.labels, args.allow_unpaired)
    except UnpairedError as exc:
        raise ValidationError(str(exc)) from None
    except FileNotFoundError as exc:
        raise ValidationError(str(exc)) from None


def cmd_split(args, argv) -> int:
    spec = SplitSpec(*args.fractions, seed=args.seed)
    scan = _scan(args)
    if not scan.pairs:
        raise UsageError("no pairs to split")
    parts = split([p.id for p in scan.pairs], spec)
    out = Path(args.output)
    for name, ids in zip(("train", "val", "test"), parts):
        write_text_atomic(out / f"{name}.txt", "".join(f"{i}\n" for i in ids))
    sizes = {n: len(ids) for n, ids in zip(("train", "val", "test"), parts)}
    write_manifest(out, args, argv, {"sizes": sizes, "warnings": scan.warnings},
                   seeds={"split": args.seed})
    print("split sizes: " + ", ".join(f"{k}={v}" for k, v in sizes.items()))
    return EXIT_OK


def cmd_augment(args, argv) -> int:
    try:
        spec = AugmentSpec(args.reflect_prob, args.translate, args.fill, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    scan = _scan(args)
    rng = np.random.default_rng(args.seed)
    out = Path(args.output)
    written = []
    for pair in scan.pairs:
        for k in range(args.copies):
            aug = augment(pair, spec, rng)
            name = f"{pair.id}_aug{k}{args.format}"
            write_image(out / "images" / name, aug.image)
            write_image(out / "masks" / name, aug.mask.image)
            written.append(name)
    write_manifest(out, args, argv, {"written": written, "warnings": scan.warnings},
                   seeds={"augment": args.seed})
    print(f"wrote {len(written)} augmented pair(s)")
    return EXIT_OK


def cmd_export(args, argv) -> int:
    scan = _scan(args)
    if not scan.pairs:
        raise UsageError("no pairs to export")
    strategy = FilterStrategy(args.filter)
    kernel = Kernel(args.kernel)
    if strategy is not FilterStrategy.NONE and args.labels != (0, 128, 255):
        raise UnsupportedConfiguration(
            f"--filter {strategy.value} needs labels 0,128,255, got {args.labels}"
        )
    out = Path(args.output)
    summary = export_resized(scan.pairs, args.size, kernel, strategy,
                             out / "images", out / "masks", args.format)
    doc = summary.to_dict()
    doc["warnings"] = scan.warnings
    write_text_atomic(out / "summary.json", dumps(doc))
    write_manifest(out, args, argv, doc)
    print(f"exported {len(summary.written)} pair(s); "
          f"{len(summary.non_canonical)} non-canonical mask(s); {len(summary.failures)} failure(s)")
    return EXIT_FAIL if summary.failures else EXIT_OK


def cmd_replay(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        replay_argv = manifest["argv"]
        cwd = manifest.get("cwd")
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{args.manifest}: not a manifest ({exc})") from None
    if replay_argv and replay_argv[0] == "replay":
        raise UsageError("refusing to replay a replay")
    prev = os.getcwd()
    try:
        if cwd:
            os.chdir(cwd)
        return main(replay_argv)
    finally:
        os.chdir(prev)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="labelscale", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"labelscale {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    kernels = [k.value for k in Kernel]
    filters = [f.value for f in FilterStrategy]

    s = sub.add_parser("resize", help="resize gray images")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--size", type=_size, required=True, help="WxH, e.g. 256x256")
    s.add_argument("--kernel", choices=kernels, default="nearest")
    s.set_defaults(func=cmd_resize)

    s = sub.add_parser("mask-resize", help="resize label masks with optional label cleanup")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--size", type=_size, required=True)
    s.add_argument("--kernel", choices=kernels, default="nearest")
    s.add_argument("--filter", choices=filters, default="none")
    s.add_argument("--labels", type=_labels, default=(0, 128, 255))
    s.set_defaults(func=cmd_mask_resize)

    s = sub.add_parser("audit", help="report labels outside the expected set")
    s.add_argument("inputs", nargs="*")
    s.add_argument("--expect", type=_labels, default=(0, 128, 255))
    s.add_argument("--json")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("eval", help="evaluate predicted masks against ground truth")
    s.add_argument("gt_dir")
    s.add_argument("pred_dir")
    s.add_argument("--theta", type=float, default=None,
                   help="BF distance tolerance in pixels (default 0.75%% of the diagonal)")
    s.add_argument("--labels", type=_labels, default=(0, 128, 255))
    s.add_argument("--json")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("quant-compare", help="compare manual and automated quantification")
    s.add_argument("records")
    s.add_argument("--thresholds", type=_floats(3), default=[25.0, 15.0, 0.35])
    s.add_argument("--mode", choices=[m.value for m in PredicateMode], default="value-below")
    s.add_argument("--json")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_quant_compare)

    def corpus_args(s):
        s.add_argument("image_dir")
        s.add_argument("mask_dir")
        s.add_argument("output")
        s.add_argument("--labels", type=_labels, default=(0, 128, 255))
        s.add_argument("--allow-unpaired", action="store_true")

    s = sub.add_parser("split", help="train/validation/test split")
    corpus_args(s)
    s.add_argument("--fractions", type=_floats(3), default=[0.6, 0.2, 0.2])
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("augment", help="reflection and translation augmentation")
    corpus_args(s)
    s.add_argument("--copies", type=int, default=1)
    s.add_argument("--reflect-prob", type=float, default=0.5)
    s.add_argument("--translate", type=_int_range, default=(-10, 10))
    s.add_argument("--fill", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=IMAGE_SUFFIXES, default=".png")
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("export", help="resize a whole image/mask corpus")
    corpus_args(s)
    s.add_argument("--size", type=_size, required=True)
    s.add_argument("--kernel", choices=kernels, default="nearest")
    s.add_argument("--filter", choices=filters, default="none")
    s.add_argument("--format", choices=IMAGE_SUFFIXES, default=".png")
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (UsageError, UnsupportedConfiguration) as exc:
        print(f"labelscale {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ValueError, OSError) as exc:
        print(f"labelscale {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

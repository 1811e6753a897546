"""Command-line pipeline driver.

Each subcommand reads from and writes to a flat corpus directory
(``corpus.manifest`` plus per-image files); ``pipeline`` chains
seed -> pom -> nsrm -> eval and writes ``report.txt``.
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys
from pathlib import Path

import numpy as np

from . import camgen, formats, metrics, nsrm, pom, seedgen, synth, viz
from .config import coerce, parse_config
from .errors import ParameterError, SeedmineError
from .grunit import FeatureGrid, GrParams, train_toy
from .maps import AttentionStack, ImageRecord, normalize


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedmine", description="pseudo-label seed generation and refinement"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key = value config file")
        return p

    p = add("synth", "generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mix", type=float, default=0.5, help="fraction of complex images")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--class-count", type=int, default=6)
    p.add_argument("--cam-peak", type=float, default=0.85)
    p.add_argument("--cam-offsite", type=float, default=0.45)
    p.add_argument("--noise-amplitude", type=float, default=0.05)

    p = add("train-gr", "train the toy reasoning-unit classifier")
    p.add_argument("--out", required=True, help="output .grpm parameter file")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--seed", type=int, default=4)
    p.add_argument("--snapshots-dir", default=None, help="write per-epoch .grpm files")
    p.add_argument("--features-dir", default=None, help="dump the training features")

    p = add("cam", "attention maps from parameter snapshots over feature grids")
    p.add_argument("--snapshots-dir", required=True)
    p.add_argument("--features-dir", required=True)
    p.add_argument("--out", required=True)

    p = add("accumulate", "running maximum of normalized attention stacks")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = add("seed", "initial labels from accumulated attention plus saliency")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--t-bg", type=float, default=0.3)
    p.add_argument("--t-sal", type=float, default=0.5)

    p = add("pom", "mine potential objects into the ignore label")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--labels-dir", default=None, help="where .initial.pgm live (default: out)")
    p.add_argument("--t-bg", type=float, default=0.3)
    p.add_argument("--report", default=None, help="write class,branch,threshold lines")

    p = add("nsrm", "mask non-salient regions of complex images")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--labels-dir", default=None, help="where .pom.pgm live (default: out)")
    p.add_argument("--dilation-r", type=int, default=30)

    p = add("eval", "mIoU of label maps against ground truth")
    p.add_argument("--gt", required=True, help="directory with ground-truth maps")
    p.add_argument("--pred", required=True, help="directory with predicted maps")
    p.add_argument("--gt-suffix", default=".gt.pgm")
    p.add_argument("--pred-suffix", default=".nsrm.pgm")
    p.add_argument("--class-count", type=int, default=0, help="0 = infer from labels")
    p.add_argument("--out", default=None, help="write the report here as well")

    p = add("viz", "colorize a label map into a PPM image")
    p.add_argument("--label", required=True)
    p.add_argument("--out", default=None)

    p = add("pipeline", "seed -> pom -> nsrm -> eval over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--t-bg", type=float, default=0.3)
    p.add_argument("--t-sal", type=float, default=0.5)
    p.add_argument("--dilation-r", type=int, default=30)
    p.add_argument("--jobs", type=int, default=0, help="0 = all cores, 1 = serial")

    return parser


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if not getattr(args, "config", None):
        return
    explicit = {
        tok.split("=", 1)[0].lstrip("-").replace("-", "_")
        for tok in argv
        if tok.startswith("--")
    }
    for key, raw in parse_config(args.config).items():
        if key in ("config", "command") or key in explicit or not hasattr(args, key):
            continue
        setattr(args, key, coerce(raw, getattr(args, key)))


def _corpus_paths(args) -> tuple[Path, Path]:
    corpus = Path(args.corpus)
    out = Path(args.out) if args.out else corpus
    out.mkdir(parents=True, exist_ok=True)
    return corpus, out


def _load_records(corpus: Path) -> list[ImageRecord]:
    manifest = corpus / "corpus.manifest"
    if not manifest.exists():
        raise ParameterError(f"no corpus.manifest in {corpus}")
    return formats.read_manifest(manifest)


def _cmd_synth(args) -> int:
    records = synth.make_corpus(
        args.out,
        args.count,
        args.mix,
        args.seed,
        height=args.size,
        width=args.size,
        class_count=args.class_count,
        cam_peak=args.cam_peak,
        cam_offsite=args.cam_offsite,
        noise_amplitude=args.noise_amplitude,
    )
    n_complex = sum(1 for r in records if not r.is_simple)
    print(f"synth: wrote {len(records)} images ({n_complex} complex) to {args.out}")
    return 0


def _cmd_train_gr(args) -> int:
    dataset = synth.make_feature_dataset(
        args.samples, args.seed, class_count=args.classes
    )
    result = train_toy(
        dataset,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        seed=args.seed,
        node_count=args.nodes,
        record_snapshots=args.snapshots_dir is not None,
    )
    result.params.save(args.out)
    if args.snapshots_dir:
        snap_dir = Path(args.snapshots_dir)
        snap_dir.mkdir(parents=True, exist_ok=True)
        for i, snap in enumerate(result.snapshots):
            snap.save(snap_dir / f"snap{i:04d}.grpm")
    if args.features_dir:
        feat_dir = Path(args.features_dir)
        feat_dir.mkdir(parents=True, exist_ok=True)
        records = []
        for i, (grid, classes) in enumerate(dataset):
            image_id = f"feat{i:04d}"
            grid.save(feat_dir / f"{image_id}.feat.fmap")
            records.append(ImageRecord(image_id=image_id, present_classes=classes))
        formats.write_manifest(feat_dir / "corpus.manifest", records)
    print(
        f"train-gr: {args.epochs} epochs, loss {result.loss_trace[0]:.4f} -> "
        f"{result.loss_trace[-1]:.4f}, params -> {args.out}"
    )
    return 0


def _cmd_cam(args) -> int:
    snap_dir = Path(args.snapshots_dir)
    series = [GrParams.load(p) for p in sorted(snap_dir.glob("*.grpm"))]
    if not series:
        raise ParameterError(f"no .grpm snapshots in {snap_dir}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    feat_paths = sorted(Path(args.features_dir).glob("*.feat.fmap"))
    if not feat_paths:
        raise ParameterError(f"no .feat.fmap files in {args.features_dir}")
    for path in feat_paths:
        image_id = path.name.removesuffix(".feat.fmap")
        grid = FeatureGrid.load(path)
        cam_final, oacam = camgen.snapshot_series(series, grid)
        cam_final.save(out / f"{image_id}.cam.fmap")
        oacam.save(out / f"{image_id}.oacam.fmap")
    print(f"cam: {len(feat_paths)} images x {len(series)} snapshots -> {out}")
    return 0


def _cmd_accumulate(args) -> int:
    acc = None
    for path in args.inputs:
        acc = camgen.accumulate(acc, normalize(AttentionStack.load(path)))
    acc.save(args.out)
    print(f"accumulate: {len(args.inputs)} stacks -> {args.out}")
    return 0


def _cmd_seed(args) -> int:
    corpus, out = _corpus_paths(args)
    records = _load_records(corpus)
    for rec in records:
        oacam = normalize(AttentionStack.load(corpus / f"{rec.image_id}.oacam.fmap"))
        saliency = formats.read_saliency(corpus / f"{rec.image_id}.sal.pgm")
        labels = seedgen.background_extract(
            oacam, saliency, rec.present_classes, t_bg=args.t_bg, t_sal=args.t_sal
        )
        formats.write_label_map(out / f"{rec.image_id}.initial.pgm", labels)
    print(f"seed: {len(records)} initial labels -> {out}")
    return 0


def _cmd_pom(args) -> int:
    corpus, out = _corpus_paths(args)
    labels_dir = Path(args.labels_dir) if args.labels_dir else out
    records = _load_records(corpus)
    report_lines = []
    for rec in records:
        cam = normalize(AttentionStack.load(corpus / f"{rec.image_id}.cam.fmap"))
        initial = formats.read_label_map(labels_dir / f"{rec.image_id}.initial.pgm")
        thresholds = pom.compute_thresholds(
            cam, initial, rec.present_classes, t_bg=args.t_bg
        )
        mined = pom.mine(initial, cam, thresholds)
        formats.write_label_map(out / f"{rec.image_id}.pom.pgm", mined)
        if args.report:
            report_lines.append(f"# {rec.image_id}")
            report_lines.extend(thresholds.report_lines())
    if args.report:
        Path(args.report).write_text("\n".join(report_lines) + "\n", encoding="ascii")
    print(f"pom: {len(records)} mined labels -> {out}")
    return 0


def _cmd_nsrm(args) -> int:
    corpus, out = _corpus_paths(args)
    labels_dir = Path(args.labels_dir) if args.labels_dir else out
    records = _load_records(corpus)
    for rec in records:
        prediction = formats.read_label_map(corpus / f"{rec.image_id}.pred.pgm")
        pseudo = formats.read_label_map(labels_dir / f"{rec.image_id}.pom.pgm")
        masked = nsrm.nsrm_apply(prediction, pseudo, rec, r=args.dilation_r)
        formats.write_label_map(out / f"{rec.image_id}.nsrm.pgm", masked)
    print(f"nsrm: {len(records)} masked labels -> {out}")
    return 0


def _iou_report(counts: np.ndarray, extra: dict) -> str:
    ious, mean = metrics.miou(counts)
    lines = [
        f"{class_id},{value:.6f}"
        for class_id, value in enumerate(ious)
        if np.isfinite(value)
    ]
    lines.append(f"mIoU,{mean:.6f}")
    lines.extend(f"{key}={value}" for key, value in extra.items())
    return "\n".join(lines) + "\n"


def _cmd_eval(args) -> int:
    gt_dir, pred_dir = Path(args.gt), Path(args.pred)
    pred_paths = sorted(pred_dir.glob(f"*{args.pred_suffix}"))
    if not pred_paths:
        raise ParameterError(f"no *{args.pred_suffix} files in {pred_dir}")
    pairs = []
    for pred_path in pred_paths:
        image_id = pred_path.name.removesuffix(args.pred_suffix)
        gt_path = gt_dir / f"{image_id}{args.gt_suffix}"
        if not gt_path.exists():
            raise ParameterError(f"missing ground truth {gt_path}")
        pairs.append((formats.read_label_map(gt_path), formats.read_label_map(pred_path)))
    class_count = args.class_count
    if class_count <= 0:
        labels = np.concatenate([np.unique(a) for pair in pairs for a in pair])
        labels = labels[labels != 255]
        if labels.size == 0:
            raise ParameterError("cannot infer class count: every label is ignore")
        class_count = int(labels.max())
    total = np.zeros((class_count + 1, class_count + 1), dtype=np.int64)
    excluded = 0
    for gt, pred in pairs:
        counts, skipped = metrics.confusion(gt, pred, class_count)
        total += counts
        excluded += skipped
    report = _iou_report(
        total, {"images": len(pairs), "excluded_pred_ignore": excluded}
    )
    sys.stdout.write(report)
    if args.out:
        Path(args.out).write_text(report, encoding="ascii")
    return 0


def _cmd_viz(args) -> int:
    labels = formats.read_label_map(args.label)
    out = args.out or str(Path(args.label).with_suffix(".ppm"))
    viz.write_color_label(out, labels)
    print(f"viz: {args.label} -> {out}")
    return 0


def _process_image(task) -> dict:
    corpus, out, image_id, present, t_bg, t_sal, dilation_r = task
    corpus, out = Path(corpus), Path(out)
    try:
        record = ImageRecord(image_id=image_id, present_classes=present)
        oacam = normalize(AttentionStack.load(corpus / f"{image_id}.oacam.fmap"))
        saliency = formats.read_saliency(corpus / f"{image_id}.sal.pgm")
        initial = seedgen.background_extract(
            oacam, saliency, present, t_bg=t_bg, t_sal=t_sal
        )
        formats.write_label_map(out / f"{image_id}.initial.pgm", initial)

        cam = normalize(AttentionStack.load(corpus / f"{image_id}.cam.fmap"))
        thresholds = pom.compute_thresholds(cam, initial, present, t_bg=t_bg)
        mined = pom.mine(initial, cam, thresholds)
        formats.write_label_map(out / f"{image_id}.pom.pgm", mined)

        prediction = formats.read_label_map(corpus / f"{image_id}.pred.pgm")
        masked = nsrm.nsrm_apply(prediction, mined, record, r=dilation_r)
        formats.write_label_map(out / f"{image_id}.nsrm.pgm", masked)

        gt = formats.read_label_map(corpus / f"{image_id}.gt.pgm")
        class_count = cam.class_count
        result = {"image_id": image_id}
        for stage, labels in (("initial", initial), ("pom", mined), ("nsrm", masked)):
            counts, skipped = metrics.confusion(gt, labels, class_count)
            rates = metrics.pseudo_label_rates(gt, labels)
            result[stage] = {
                "counts": counts,
                "excluded": skipped,
                "fnr": rates.false_negative,
                "fpr": rates.false_positive,
                "ignore": rates.ignore_fraction,
            }
        return result
    except SeedmineError as exc:
        raise SeedmineError(f"{image_id}: {exc}") from None


def _cmd_pipeline(args) -> int:
    corpus, out = _corpus_paths(args)
    records = _load_records(corpus)
    tasks = [
        (str(corpus), str(out), rec.image_id, rec.present_classes,
         args.t_bg, args.t_sal, args.dilation_r)
        for rec in records
    ]
    jobs = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
    if jobs == 1:
        results = [_process_image(task) for task in tasks]
    else:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_process_image, tasks)

    stages = ("initial", "pom", "nsrm")
    summary: dict[str, object] = {"images": len(results)}
    nsrm_total = None
    for stage in stages:
        total = sum(r[stage]["counts"] for r in results)
        _, mean_iou = metrics.miou(total)
        summary[f"miou_{stage}"] = f"{mean_iou:.6f}"
        for rate in ("fnr", "fpr", "ignore"):
            mean = sum(r[stage][rate] for r in results) / len(results)
            summary[f"{rate}_{stage}_mean"] = f"{mean:.6f}"
        if stage == "nsrm":
            nsrm_total = total
    report = _iou_report(nsrm_total, summary)
    (out / "report.txt").write_text(report, encoding="ascii")
    print(
        f"pipeline: {len(results)} images, miou_nsrm={summary['miou_nsrm']}, "
        f"report -> {out / 'report.txt'}"
    )
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train-gr": _cmd_train_gr,
    "cam": _cmd_cam,
    "accumulate": _cmd_accumulate,
    "seed": _cmd_seed,
    "pom": _cmd_pom,
    "nsrm": _cmd_nsrm,
    "eval": _cmd_eval,
    "viz": _cmd_viz,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        return _COMMANDS[args.command](args)
    except SeedmineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

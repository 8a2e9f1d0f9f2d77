"""Command-line surface tying the library modules into runnable pipelines."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import anchors as anchors_mod
from . import evaluation, io, motion, sampling, suppression, synthdata
from .config import RunConfig, load_config, save_config
from .geometry import Chunk, fit_linear_tube
from .pooling import TemporalMode, toi_pool_backward, toi_pool_forward


def _config(path: str | None) -> RunConfig:
    return load_config(path)


@click.group()
def main():
    """Linear space-time tube toolkit."""


@main.command()
@click.option("--config", "config_path", default=None, help="Run-config JSON file.")
@click.option("--seed", type=int, default=None, help="Override the config RNG seed.")
@click.option("--objects", type=int, default=2)
@click.option("--length", type=int, default=None, help="Chunk length (default from config).")
@click.option("--clutter", type=int, default=0)
@click.option("--noise", type=float, default=0.0, help="Point-track noise sigma in pixels.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth(config_path, seed, objects, length, clutter, noise, out_dir):
    """Generate a deterministic synthetic scene into OUT directory."""
    cfg = _config(config_path)
    scene = synthdata.generate_scene(synthdata.SceneConfig(
        length=length or cfg.tube_length, num_objects=objects,
        clutter_tracks=clutter, track_noise=noise,
        seed=cfg.seed if seed is None else seed))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_tracks(out / "tracks.jsonl", scene.tracks)
    io.write_records(out / "gt_tubes.jsonl", "tubes",
                     (io._tube_record(t, class_id=tr.class_id)
                      for t, tr in zip(scene.gt_tubes, scene.tracks)))
    io.write_point_tracks(out / "point_tracks.jsonl", scene.point_tracks)
    io.write_seed_boxes(out / "seed_boxes.jsonl", scene.seed_boxes)
    io.write_feature_volume(out / "volume.fvol", scene.volume)
    meta = {"frame_width": scene.config.frame_width, "frame_height": scene.config.frame_height,
            "length": scene.config.length, "seed": scene.config.seed}
    io.atomic_write_text(out / "scene.json", json.dumps(meta, indent=2) + "\n")
    click.echo(f"wrote scene with {objects} objects to {out}")


@main.command("fit-tubes")
@click.option("--config", "config_path", default=None)
@click.option("--tracks", "tracks_path", required=True, type=click.Path(exists=True))
@click.option("--t0", type=int, default=0)
@click.option("--length", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def fit_tubes(config_path, tracks_path, t0, length, out):
    """Least-squares linear ground-truth tubes from annotated tracks."""
    cfg = _config(config_path)
    length = length or cfg.tube_length
    tracks = io.read_tracks(tracks_path)
    records = []
    for tr in tracks:
        chunk = Chunk(tr.video_id, t0, length)
        inside = tr.boxes_in(t0, length)
        if not inside:
            continue
        tube = fit_linear_tube(inside, chunk)
        records.append(io._tube_record(tube, class_id=tr.class_id))
    io.write_records(out, "tubes", records)
    click.echo(f"fitted {len(records)} tubes")


@main.command("track-proposals")
@click.option("--config", "config_path", default=None)
@click.option("--seeds", "seeds_path", required=True, type=click.Path(exists=True))
@click.option("--tracks", "tracks_path", required=True, type=click.Path(exists=True))
@click.option("--length", type=int, default=None)
@click.option("--frame-width", type=float, default=200.0)
@click.option("--frame-height", type=float, default=200.0)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def track_proposals(config_path, seeds_path, tracks_path, length, frame_width,
                    frame_height, seed, out):
    """Tracking-based tube proposals from seed boxes and point tracks."""
    cfg = _config(config_path)
    seeds = io.read_seed_boxes(seeds_path)
    tracks = io.read_point_tracks(tracks_path)
    per_seed = motion.tube_proposals_from_tracks(
        seeds, tracks, length or cfg.tube_length, cfg.motion,
        frame_width, frame_height, cfg.seed if seed is None else seed)
    io.write_tubes(out, [t for tubes in per_seed for t in tubes])
    click.echo(f"wrote {sum(len(t) for t in per_seed)} proposals for {len(seeds)} seeds")


@main.command("anchors")
@click.option("--config", "config_path", default=None)
@click.option("--feat-h", type=int, required=True)
@click.option("--feat-w", type=int, required=True)
@click.option("--diverse", is_flag=True, help="Use the multi-aspect-ratio anchor set.")
@click.option("--length", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def anchors_cmd(config_path, feat_h, feat_w, diverse, length, out):
    """Emit the tube-anchor grid for a feature map."""
    cfg = _config(config_path)
    acfg = cfg.anchor_diverse if diverse else cfg.anchor
    grid = anchors_mod.generate_anchor_grid(feat_h, feat_w, acfg,
                                            length or cfg.tube_length)
    io.write_tubes(out, grid.anchors)
    click.echo(f"wrote {len(grid.anchors)} anchors "
               f"({acfg.anchors_per_seed} per seed)")


@main.command()
@click.option("--config", "config_path", default=None)
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True),
              help=".npy score map of shape (H', W', K)")
@click.option("--regs", "regs_path", required=True, type=click.Path(exists=True),
              help=".npy regression map of shape (H', W', K, 8)")
@click.option("--diverse", is_flag=True)
@click.option("--length", type=int, default=None)
@click.option("--top-n", type=int, default=300)
@click.option("--threshold", type=float, default=None, help="Tube-NMS threshold.")
@click.option("--out", required=True, type=click.Path())
def propose(config_path, scores_path, regs_path, diverse, length, top_n, threshold, out):
    """Decode score/regression maps into NMS-pruned tube proposals."""
    cfg = _config(config_path)
    scores = np.load(scores_path)
    regs = np.load(regs_path)
    acfg = cfg.anchor_diverse if diverse else cfg.anchor
    grid = anchors_mod.generate_anchor_grid(scores.shape[0], scores.shape[1], acfg,
                                            length or cfg.tube_length)
    proposals = anchors_mod.propose_from_maps(
        scores, regs, grid, top_n,
        cfg.proposal_nms_threshold if threshold is None else threshold)
    io.write_scored_tubes(out, proposals)
    click.echo(f"wrote {len(proposals)} proposals")


@main.command()
@click.option("--config", "config_path", default=None)
@click.option("--mode", type=click.Choice(["tube", "box"]), required=True)
@click.option("--threshold", type=float, default=None)
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def nms(config_path, mode, threshold, in_path, out):
    """Greedy NMS over scored tubes or per-frame detections."""
    cfg = _config(config_path)
    if mode == "tube":
        items = io.read_scored_tubes(in_path)
        thr = cfg.proposal_nms_threshold if threshold is None else threshold
        kept = suppression.nms_tubes(items, thr)
        io.write_scored_tubes(out, [items[i] for i in kept])
    else:
        dets = io.read_detections(in_path)
        thr = cfg.detection_nms_threshold if threshold is None else threshold
        survivors = []
        keys = sorted({(d.frame, d.class_id) for d in dets},
                      key=lambda k: (k[0], -1 if k[1] is None else k[1]))
        for key in keys:
            group = [d for d in dets if (d.frame, d.class_id) == key]
            survivors.extend(group[i] for i in suppression.nms_boxes(group, thr))
        io.write_detections(out, survivors)
    click.echo(f"nms ({mode}) done")


@main.command()
@click.option("--config", "config_path", default=None)
@click.option("--kind", type=click.Choice(["proposal", "anchor"]), default="proposal")
@click.option("--proposals", "proposals_path", required=True, type=click.Path(exists=True))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def assign(config_path, kind, proposals_path, gt_path, out):
    """Assign training labels to proposals or anchors against GT tubes."""
    cfg = _config(config_path)
    proposals = io.read_tubes(proposals_path)
    gt = io.read_scored_tubes(gt_path)
    gt_tubes = [g.tube for g in gt]
    if kind == "anchor":
        labels = anchors_mod.assign_anchor_labels(
            proposals, gt_tubes, cfg.anchor_positive_threshold, cfg.anchor_negative_threshold)
        records = [{"index": i, "label": lab.value} for i, lab in enumerate(labels)]
    else:
        classes = [0 if g.class_id is None else g.class_id for g in gt]
        assigns = anchors_mod.assign_proposal_labels(
            proposals, gt_tubes, classes,
            cfg.proposal_positive_threshold, cfg.proposal_negative_low)
        records = []
        for i, a in enumerate(assigns):
            rec = {"index": i, "label": a.label.value}
            if a.label is anchors_mod.ProposalLabel.POSITIVE:
                rec["class_id"] = a.class_id
                rec["matched_gt"] = a.matched_gt
                rec["regression_target"] = list(a.regression_target.start + a.regression_target.end)
            records.append(rec)
    io.write_records(out, "labels", records)
    click.echo(f"labeled {len(records)} {kind}s")


@main.command()
@click.option("--config", "config_path", default=None)
@click.option("--volume", "volume_path", required=True, type=click.Path(exists=True))
@click.option("--tubes", "tubes_path", required=True, type=click.Path(exists=True))
@click.option("--size", type=int, default=None, help="Pooled side (default from config).")
@click.option("--mode", type=click.Choice(["max", "average"]), default="max")
@click.option("--out", required=True, type=click.Path())
def pool(config_path, volume_path, tubes_path, size, mode, out):
    """TOI-pool a feature volume over each input tube; writes an .npz."""
    cfg = _config(config_path)
    volume = io.read_feature_volume(volume_path)
    tubes = io.read_tubes(tubes_path)
    side = size or cfg.pooled_side
    tmode = TemporalMode(mode)
    arrays = {}
    for i, tube in enumerate(tubes):
        pooled = toi_pool_forward(volume, tube, side, tmode)
        arrays[f"pooled_{i}"] = pooled.values
        if pooled.argmax is not None:
            arrays[f"argmax_{i}"] = pooled.argmax
    np.savez(out, **arrays)
    click.echo(f"pooled {len(tubes)} tubes to {side}x{side}")


@main.command()
@click.option("--config", "config_path", default=None)
@click.option("--pool", "pool_path", required=True, type=click.Path(exists=True),
              help="Labeled pool JSONL: one record per chunk.")
@click.option("--preset", type=click.Choice(["proposal", "anchor"]), default="proposal")
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def sample(config_path, pool_path, preset, seed, out):
    """Sample a hierarchical training batch from a labeled pool."""
    cfg = _config(config_path)
    bcfg = cfg.batch if preset == "proposal" else cfg.anchor_batch
    pool = {}
    for r in io.read_records(pool_path, "pool"):
        pool[r["chunk"]] = sampling.ChunkPool(
            tuple(r["positives"]), tuple(r["negatives"]),
            tuple(r.get("far_negatives", ())))
    batch = sampling.sample_batch(pool, bcfg, cfg.seed if seed is None else seed)
    io.write_batch(out, batch)
    click.echo(f"sampled batch of {len(batch.items)}"
               + (" (underfilled)" if batch.underfilled else ""))


@main.command("mine-hard")
@click.option("--config", "config_path", default=None)
@click.option("--proposals", "proposals_path", required=True, type=click.Path(exists=True))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--top-k", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def mine_hard(config_path, proposals_path, gt_path, top_k, out):
    """Mine high-scoring zero-overlap false positives as hard negatives."""
    cfg = _config(config_path)
    proposals = io.read_scored_tubes(proposals_path)
    gt = io.read_tubes(gt_path)
    k = top_k or sampling.default_mining_top_k(cfg.batch)
    idx = sampling.mine_hard_negatives(proposals, gt, k)
    io.write_scored_tubes(out, [proposals[i] for i in idx])
    click.echo(f"mined {len(idx)} hard negatives")


@main.command("eval-recall")
@click.option("--config", "config_path", default=None)
@click.option("--proposals", "proposals_path", required=True, type=click.Path(exists=True))
@click.option("--gt-tubes", "gt_tubes_path", default=None, type=click.Path(exists=True))
@click.option("--gt-tracks", "gt_tracks_path", default=None, type=click.Path(exists=True))
@click.option("--threshold", type=float, default=None)
@click.option("--out", required=True, type=click.Path())
def eval_recall(config_path, proposals_path, gt_tubes_path, gt_tracks_path, threshold, out):
    """Tube-recall against GT tubes and/or box-recall against GT tracks."""
    cfg = _config(config_path)
    thr = cfg.recall_threshold if threshold is None else threshold
    proposals = io.read_tubes(proposals_path)
    reports = []
    if gt_tubes_path:
        r = evaluation.tube_recall(proposals, io.read_tubes(gt_tubes_path), thr)
        reports.append(evaluation.MetricReport("tube_recall", r,
                                               {"threshold": thr, "proposals": len(proposals)}))
    if gt_tracks_path:
        r = evaluation.box_recall(proposals, io.read_tracks(gt_tracks_path), thr)
        reports.append(evaluation.MetricReport("box_recall", r,
                                               {"threshold": thr, "proposals": len(proposals)}))
    if not reports:
        raise click.UsageError("provide --gt-tubes and/or --gt-tracks")
    io.write_reports(out, reports)
    for r in reports:
        click.echo(f"{r.metric}: {r.value}")


@main.command("eval-ap")
@click.option("--config", "config_path", default=None)
@click.option("--detections", "det_path", required=True, type=click.Path(exists=True))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", type=float, default=None)
@click.option("--out", required=True, type=click.Path())
def eval_ap(config_path, det_path, gt_path, threshold, out):
    """Per-class frame-level average precision."""
    cfg = _config(config_path)
    thr = cfg.ap_iou_threshold if threshold is None else threshold
    per_class = evaluation.average_precision(io.read_detections(det_path),
                                             io.read_gt_boxes(gt_path), thr)
    report = evaluation.MetricReport("average_precision", evaluation.mean_of(per_class),
                                     {"iou_threshold": thr}, per_class)
    io.write_reports(out, [report])
    click.echo(f"mAP: {report.value}")


@main.command("eval-corloc")
@click.option("--config", "config_path", default=None)
@click.option("--detections", "det_path", required=True, type=click.Path(exists=True))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def eval_corloc(config_path, det_path, gt_path, out):
    """Per-class correct-localization rate over positive frames."""
    per_class = evaluation.corloc(io.read_detections(det_path), io.read_gt_boxes(gt_path))
    report = evaluation.MetricReport("corloc", evaluation.mean_of(per_class),
                                     {}, per_class)
    io.write_reports(out, [report])
    click.echo(f"CorLoc: {report.value}")


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def report(inputs, out):
    """Aggregate several metric-report files into one."""
    merged = []
    for path in inputs:
        merged.extend(io.read_reports(path))
    io.write_reports(out, merged)
    click.echo(f"aggregated {len(merged)} reports from {len(inputs)} files")


@main.command("dump-config")
@click.option("--config", "config_path", default=None)
@click.option("--out", required=True, type=click.Path())
def dump_config(config_path, out):
    """Write the effective run configuration as JSON."""
    save_config(_config(config_path), out)
    click.echo(f"wrote config to {out}")


@main.command()
@click.option("--op", required=True,
              type=click.Choice(["iou", "tube_overlap", "nms_tubes", "nms_boxes",
                                 "toi_pool_forward", "toi_pool_backward",
                                 "propose_from_maps"]))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="JSON request: {\"cases\": [...]} with op-specific fields.")
@click.option("--out", required=True, type=click.Path())
def kernel(op, in_path, out):
    """Batched kernel evaluation for foreign-language callers.

    Reads a JSON request holding a list of cases, runs the named kernel on
    each, and writes a JSON response.  Floats round-trip exactly through
    JSON, so results match in-process calls bit-for-bit.
    """
    from .kernel_service import run_kernel_request
    request = json.loads(Path(in_path).read_text())
    try:
        response = run_kernel_request(op, request)
    except Exception as e:  # report per-request failures as structured errors
        io.atomic_write_text(out, json.dumps({"error": f"{type(e).__name__}: {e}"}) + "\n")
        sys.exit(1)
    io.atomic_write_text(out, json.dumps(response) + "\n")


if __name__ == "__main__":
    main()

"""Command-line entry point wiring all modules into batch commands.

Option precedence is flags > config file section > built-in defaults, and
every command echoes its resolved options next to its outputs so a run can
be reproduced from the artifacts alone. Exit codes: 0 success, 1 runtime
failure (with a JSON error summary on stderr), 2 usage error.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import NoReturn, Optional

import click

from . import answer_parser, dataset_builder, design_search, model_client, overlay, providers
from .io_utils import SchemaError, dump_json, read_jsonl, require_fields, write_jsonl
from .vtg_metrics import (
    Clip,
    HighlightRecord,
    MomentRecord,
    TemporalSpan,
    TimeUnit,
    format_report_table,
    highlight_report,
    moment_report,
)

logger = logging.getLogger("framemark")

_POSITION_CHOICES = {
    "top-left": overlay.Position.TOP_LEFT,
    "top-right": overlay.Position.TOP_RIGHT,
    "bottom-left": overlay.Position.BOTTOM_LEFT,
    "bottom-right": overlay.Position.BOTTOM_RIGHT,
    "center": overlay.Position.CENTER,
}
_MODE_CHOICES = {
    "index": overlay.NumberingMode.FRAME_INDEX,
    "timestamp": overlay.NumberingMode.TIMESTAMP_MMSS,
}
_SAMPLING_CHOICES = {
    "all": overlay.SamplingMode.ALL,
    "uniform": overlay.SamplingMode.UNIFORM,
    "random": overlay.SamplingMode.RANDOM,
}


@dataclass
class CliState:
    config: dict
    jobs: int


def _fail(message: str) -> NoReturn:
    print(json.dumps({"error": message}, ensure_ascii=False), file=sys.stderr)
    sys.exit(1)


def _parse_color(value: str) -> tuple[int, int, int]:
    if value in overlay.NAMED_COLORS:
        return overlay.NAMED_COLORS[value]
    parts = value.split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"color must be a known name or R,G,B; got {value!r}")
    try:
        rgb = tuple(int(p) for p in parts)
    except ValueError:
        raise click.BadParameter(f"color components must be integers; got {value!r}")
    return rgb  # range-checked by OverlayConfig


def _resolve(state: CliState, command: str, **pairs) -> dict:
    """Merge flag values over the config file section over defaults."""
    section = state.config.get(command, {})
    resolved = {}
    for key, (flag_value, default) in pairs.items():
        if flag_value is not None:
            resolved[key] = flag_value
        elif key in section:
            resolved[key] = section[key]
        else:
            resolved[key] = default
    return resolved


def _echo_run_config(command: str, resolved: dict, out_path: Path) -> None:
    record = {"command": command, "options": {k: _jsonable(v) for k, v in resolved.items()}}
    if out_path.suffix:  # single-file output: write a sibling
        target = out_path.parent / f"{out_path.name}.run_config.json"
    else:
        target = out_path / "run_config.json"
    dump_json(record, target)


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return list(value)
    if hasattr(value, "value"):
        return value.value
    return value


@click.group()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="JSON config file with per-command option sections.")
@click.option("--log-level", default="INFO", show_default=True)
@click.option("--jobs", type=int, default=4, show_default=True,
              help="Upper bound on worker counts for parallel commands.")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[Path], log_level: str, jobs: int) -> None:
    """Number-overlay prompting and evaluation tools for video temporal grounding."""
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    config = {}
    if config_path is not None:
        try:
            config = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            _fail(f"cannot read config file {config_path}: {exc}")
        if not isinstance(config, dict):
            _fail(f"config file {config_path} must hold a JSON object")
    ctx.obj = CliState(config=config, jobs=jobs)


@main.command()
@click.argument("frames_dir", type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--size", type=int, default=None, help="Font size in pixels [default: 40].")
@click.option("--color", default=None, help="Color name or R,G,B [default: red].")
@click.option("--position", type=click.Choice(sorted(_POSITION_CHOICES)), default=None,
              help="[default: bottom-right]")
@click.option("--margin", type=int, default=None, help="[default: 10]")
@click.option("--mode", type=click.Choice(sorted(_MODE_CHOICES)), default=None,
              help="Render frame index or MM:SS timestamp [default: index].")
@click.option("--ratio", type=float, default=None, help="Fraction of frames to annotate [default: 1.0].")
@click.option("--sampling", type=click.Choice(sorted(_SAMPLING_CHOICES)), default=None,
              help="[default: all]")
@click.option("--seed", type=int, default=None, help="Random-sampling seed [default: 0].")
@click.option("--fps", type=float, default=None, help="Frame rate for timestamp mode [default: 1.0].")
@click.option("--canvas", type=int, default=None, help="Square canvas size [default: 336].")
@click.option("--video", type=click.Path(path_type=Path), default=None,
              help="Optional source container for --decode-cmd.")
@click.option("--decode-cmd", default=None,
              help="Command template with {video} and {out} run to pre-extract frames.")
@click.pass_obj
def annotate(state: CliState, frames_dir: Path, out_dir: Path, **flags) -> None:
    """Overlay frame numbers onto FRAMES_DIR (frame_%06d.png/jpg files)."""
    opts = _resolve(
        state,
        "annotate",
        size=(flags["size"], 40),
        color=(flags["color"], "red"),
        position=(flags["position"], "bottom-right"),
        margin=(flags["margin"], 10),
        mode=(flags["mode"], "index"),
        ratio=(flags["ratio"], 1.0),
        sampling=(flags["sampling"], "all"),
        seed=(flags["seed"], 0),
        fps=(flags["fps"], 1.0),
        canvas=(flags["canvas"], overlay.DEFAULT_CANVAS),
        video=(flags["video"], None),
        decode_cmd=(flags["decode_cmd"], None),
    )
    try:
        if opts["decode_cmd"]:
            if not opts["video"]:
                raise click.UsageError("--decode-cmd requires --video")
            frames_dir.mkdir(parents=True, exist_ok=True)
            cmd = [
                part.format(video=str(opts["video"]), out=str(frames_dir))
                for part in shlex.split(str(opts["decode_cmd"]))
            ]
            logger.info("decoding via: %s", " ".join(cmd))
            subprocess.run(cmd, check=True)

        config = overlay.OverlayConfig(
            font_size_px=int(opts["size"]),
            color=_parse_color(str(opts["color"])),
            position=_POSITION_CHOICES[str(opts["position"])],
            margin_px=int(opts["margin"]),
            numbering_mode=_MODE_CHOICES[str(opts["mode"])],
        )
        plan = overlay.SamplingPlan(
            mode=_SAMPLING_CHOICES[str(opts["sampling"])],
            ratio=float(opts["ratio"]),
            seed=int(opts["seed"]),
        )
        frame_files = overlay.list_frame_files(frames_dir)
        if not frame_files:
            raise overlay.InvalidImageError(f"no frame_%06d files under {frames_dir}")

        selected = set(overlay.plan_indices(len(frame_files), plan))
        out_dir.mkdir(parents=True, exist_ok=True)
        sidecar = []
        fps = float(opts["fps"])
        canvas = int(opts["canvas"])
        for idx, src in enumerate(frame_files):
            dest = out_dir / src.name
            if idx not in selected:
                dataset_builder.copy_tree_entry(src, dest)
                continue
            frame = overlay.normalize_frame(overlay.load_frame(src), canvas)
            if config.numbering_mode is overlay.NumberingMode.TIMESTAMP_MMSS:
                value = int(idx / fps + 0.5)
            else:
                value = idx
            rendered = overlay.render_number(frame, value, config)
            overlay.save_frame(rendered, dest)
            sidecar.append(
                {"index": idx, "rendered_text": overlay.format_value(value, config.numbering_mode)}
            )
        write_jsonl(out_dir / "annotations.jsonl", sidecar)
        _echo_run_config("annotate", {"frames_dir": frames_dir, "out": out_dir, **opts}, out_dir)
        click.echo(f"annotated {len(sidecar)}/{len(frame_files)} frames -> {out_dir}")
    except (OSError, ValueError, overlay.OverlayError, subprocess.CalledProcessError) as exc:
        _fail(str(exc))


def _load_provider(cfg_path: Path) -> providers.EmbeddingProvider:
    try:
        cfg = json.loads(cfg_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise SchemaError(f"cannot read provider config {cfg_path}: {exc}")
    kind = cfg.get("kind")
    if kind == "file":
        provider: providers.EmbeddingProvider = providers.FileEmbeddingProvider(
            cfg["path"], provider_id=cfg.get("provider_id")
        )
    elif kind == "http":
        provider = providers.HttpEmbeddingProvider(
            url=cfg["url"],
            provider_id=cfg.get("provider_id", cfg["url"]),
            timeout_s=float(cfg.get("timeout_s", 60.0)),
        )
    else:
        raise SchemaError(f"{cfg_path}: provider kind must be 'file' or 'http', got {kind!r}")
    if cfg.get("cache_dir"):
        provider = providers.CachingProvider(provider, cfg["cache_dir"])
    return provider


@main.command("design-search")
@click.option("--probes", "probes_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {image_id, caption, true_number}.")
@click.option("--provider", "provider_path", type=click.Path(path_type=Path), required=True,
              help="JSON provider config ({kind: file|http, ...}).")
@click.option("--images-root", type=click.Path(path_type=Path), default=None,
              help="Directory of probe images named <image_id>[.png|.jpg].")
@click.option("--candidates", "candidates_path", type=click.Path(path_type=Path), default=None,
              help="JSONL of {size, color, position}; defaults to the built-in sweep grid.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True,
              help="Score table CSV; a .pareto.csv sibling is written too.")
@click.option("--canvas", type=int, default=None)
@click.pass_obj
def design_search_cmd(state: CliState, probes_path: Path, provider_path: Path,
                      images_root: Optional[Path], candidates_path: Optional[Path],
                      out_path: Path, canvas: Optional[int]) -> None:
    """Rank overlay designs by number/caption accuracy on a probe set."""
    opts = _resolve(
        state,
        "design-search",
        canvas=(canvas, overlay.DEFAULT_CANVAS),
        images_root=(images_root, None),
    )
    try:
        probes = design_search.load_probes_file(probes_path)
        if candidates_path is not None:
            candidates = design_search.load_candidates_file(candidates_path)
        else:
            candidates = design_search.sweep_grid()
        provider = _load_provider(provider_path)
        if opts["images_root"] is None:
            raise SchemaError("--images-root is required to render probe images")
        renderer = _disk_renderer(Path(opts["images_root"]), int(opts["canvas"]))

        try:
            ranked = design_search.grid_search(candidates, probes, provider, renderer)
            failed: list = []
        except design_search.PartialResultsError as exc:
            ranked = exc.scored
            failed = exc.unscored
        design_search.write_score_table(ranked, out_path)
        pareto_path = out_path.parent / (out_path.stem + ".pareto.csv")
        design_search.write_score_table(design_search.pareto_front(ranked), pareto_path)
        _echo_run_config(
            "design-search",
            {"probes": probes_path, "provider": provider_path,
             "candidates": candidates_path or "built-in sweep", "out": out_path, **opts},
            out_path,
        )
        click.echo(f"scored {len(ranked)}/{len(candidates)} candidates -> {out_path}")
        for sc in ranked[:5]:
            click.echo(
                f"  size={sc.config.font_size_px:<3} color={design_search.color_label(sc.config.color):<7} "
                f"pos={sc.config.position.value:<12} number={sc.number_accuracy:.4f} "
                f"caption={sc.caption_accuracy:.4f} combined={sc.combined:.4f}"
            )
        if failed:
            _fail(f"provider failed for {len(failed)} candidate(s): "
                  + ", ".join(f"#{i}" for i, _, _ in failed))
    except (SchemaError, OSError, ValueError, providers.ProviderError) as exc:
        _fail(str(exc))


def _disk_renderer(images_root: Path, canvas: int) -> design_search.AnnotatedImageRenderer:
    import io

    from PIL import Image

    def render(image_id: str, value: int, config: overlay.OverlayConfig) -> bytes:
        path = images_root / image_id
        if not path.is_file():
            for ext in overlay.FRAME_EXTENSIONS:
                cand = images_root / f"{image_id}{ext}"
                if cand.is_file():
                    path = cand
                    break
        if not path.is_file():
            raise providers.ProviderError(f"probe image not found: {images_root / image_id}")
        frame = overlay.normalize_frame(overlay.load_frame(path), canvas)
        annotated = overlay.render_number(frame, value, config)
        buf = io.BytesIO()
        Image.fromarray(annotated.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    return render


@main.command("build-dataset")
@click.option("--annotations", "annotations_path", type=click.Path(path_type=Path), required=True)
@click.option("--frames-root", type=click.Path(path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--fps", type=float, default=None, help="[default: 0.5]")
@click.option("--size", type=int, default=None)
@click.option("--color", default=None)
@click.option("--position", type=click.Choice(sorted(_POSITION_CHOICES)), default=None)
@click.option("--margin", type=int, default=None)
@click.option("--canvas", type=int, default=None)
@click.option("--format", "fmt", default=None, help="Annotation format adapter [default: neutral].")
@click.pass_obj
def build_dataset_cmd(state: CliState, annotations_path: Path, frames_root: Path,
                      out_dir: Path, **flags) -> None:
    """Build an instruction dataset: annotated frames + manifest.jsonl."""
    opts = _resolve(
        state,
        "build-dataset",
        fps=(flags["fps"], 0.5),
        size=(flags["size"], 40),
        color=(flags["color"], "red"),
        position=(flags["position"], "bottom-right"),
        margin=(flags["margin"], 10),
        canvas=(flags["canvas"], overlay.DEFAULT_CANVAS),
        fmt=(flags["fmt"], "neutral"),
    )
    try:
        config = overlay.OverlayConfig(
            font_size_px=int(opts["size"]),
            color=_parse_color(str(opts["color"])),
            position=_POSITION_CHOICES[str(opts["position"])],
            margin_px=int(opts["margin"]),
        )
        annotations = dataset_builder.load_annotations(annotations_path, fmt=str(opts["fmt"]))
        result = dataset_builder.build_dataset(
            annotations,
            frames_root,
            out_dir,
            config=config,
            fps=float(opts["fps"]),
            canvas_size=int(opts["canvas"]),
        )
        _echo_run_config(
            "build-dataset",
            {"annotations": annotations_path, "frames_root": frames_root, "out": out_dir, **opts},
            out_dir,
        )
        click.echo(
            f"built {result.n_records} record(s) from {result.n_annotations} annotation(s); "
            f"{len(result.exclusions)} exclusion(s) -> {out_dir / 'manifest.jsonl'}"
        )
    except (SchemaError, dataset_builder.DatasetBuildError, OSError, ValueError) as exc:
        _fail(str(exc))


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {id, query, frame_paths[, task]}.")
@click.option("--endpoint", "endpoint_path", type=click.Path(path_type=Path), required=True,
              help="JSON endpoint config {url, model_id[, auth_env, temperature, max_tokens]}.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--task", type=click.Choice(["moment", "highlight"]), default=None,
              help="Default task for rows without one [default: moment].")
@click.option("--max-in-flight", type=int, default=None, help="[default: --jobs]")
@click.option("--cache", "cache_dir", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def infer(state: CliState, manifest_path: Path, endpoint_path: Path, out_path: Path,
          task: Optional[str], max_in_flight: Optional[int], cache_dir: Optional[Path]) -> None:
    """Run batched inference; results keep manifest order."""
    opts = _resolve(
        state,
        "infer",
        task=(task, "moment"),
        max_in_flight=(max_in_flight, state.jobs),
        cache=(cache_dir, None),
    )
    try:
        cfg = json.loads(Path(endpoint_path).read_text(encoding="utf-8"))
        endpoint = model_client.EndpointConfig(
            url=cfg["url"],
            model_id=cfg["model_id"],
            auth_env=cfg.get("auth_env"),
            timeout_s=float(cfg.get("timeout_s", 120.0)),
        )
        decoding = model_client.DecodingParams(
            temperature=float(cfg.get("temperature", 0.0)),
            max_tokens=int(cfg.get("max_tokens", 256)),
        )
        base = manifest_path.parent
        jobs = []
        for lineno, rec in read_jsonl(manifest_path):
            require_fields(rec, ("id", "query", "frame_paths"), manifest_path, lineno)
            frames = tuple(
                (base / p if not Path(p).is_absolute() else Path(p)) for p in rec["frame_paths"]
            )
            jobs.append(
                model_client.InferenceJob(
                    id=str(rec["id"]),
                    frames=frames,
                    task=model_client.Task(rec.get("task", opts["task"])),
                    query=str(rec["query"]),
                    endpoint=endpoint,
                    decoding=decoding,
                )
            )
        cache = model_client.ResponseCache(opts["cache"]) if opts["cache"] else None
        results = model_client.run_batch(jobs, max_in_flight=int(opts["max_in_flight"]), cache=cache)
        write_jsonl(out_path, (r.to_dict() for r in results))
        _echo_run_config(
            "infer",
            {"manifest": manifest_path, "endpoint": endpoint_path, "out": out_path, **opts},
            out_path,
        )
        n_failed = sum(1 for r in results if not r.ok)
        n_cached = sum(1 for r in results if r.from_cache)
        click.echo(f"{len(results)} job(s): {len(results) - n_failed} ok "
                   f"({n_cached} from cache), {n_failed} failed -> {out_path}")
        if n_failed:
            _fail(f"{n_failed} job(s) failed; completed work persisted to {out_path}")
    except (SchemaError, OSError, ValueError, KeyError) as exc:
        _fail(str(exc))


def _load_pred_texts(path: Path) -> dict[str, str]:
    preds: dict[str, str] = {}
    for lineno, rec in read_jsonl(path):
        require_fields(rec, ("id",), path, lineno)
        text = rec.get("raw_text")
        if text is None:
            continue  # failed inference rows carry raw_text: null
        preds[str(rec["id"])] = str(text)
    return preds


def assemble_moment_records(
    gt_path: Path, preds_path: Path, default_fps: float
) -> tuple[list[MomentRecord], dict]:
    preds = _load_pred_texts(preds_path)
    records: list[MomentRecord] = []
    counts = {"missing": 0, "malformed": 0, "out_of_range": 0}
    matched_ids = set()
    for lineno, rec in read_jsonl(gt_path):
        require_fields(rec, ("id", "start_s", "end_s", "n_frames"), gt_path, lineno)
        rec_id = str(rec["id"])
        fps = float(rec.get("fps", default_fps))
        gt = TemporalSpan(float(rec["start_s"]), float(rec["end_s"]), TimeUnit.SECONDS)
        text = preds.get(rec_id)
        if text is None:
            counts["missing"] += 1
            records.append(MomentRecord(rec_id, str(rec.get("query", "")), gt, None, "missing"))
            continue
        matched_ids.add(rec_id)
        outcome = answer_parser.parse_moment(text, n_frames=int(rec["n_frames"]), fps=fps)
        pred = None
        if outcome.validity in (answer_parser.Validity.VALID, answer_parser.Validity.CLAMPED):
            pred = answer_parser.frames_to_seconds(outcome.span, fps)
        elif outcome.validity is answer_parser.Validity.MALFORMED:
            counts["malformed"] += 1
        else:
            counts["out_of_range"] += 1
        records.append(
            MomentRecord(rec_id, str(rec.get("query", "")), gt, pred, outcome.validity.value)
        )
    counts["unmatched_preds"] = len(set(preds) - matched_ids)
    return records, counts


@main.command("eval-moment")
@click.option("--preds", "preds_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {id, raw_text}.")
@click.option("--gt", "gt_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {id, start_s, end_s, n_frames[, fps, query]}.")
@click.option("--fps", type=float, default=None, help="Fallback frame rate [default: 1.0].")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.pass_obj
def eval_moment(state: CliState, preds_path: Path, gt_path: Path,
                fps: Optional[float], out_path: Path) -> None:
    """Score moment retrieval: R@{0.3,0.5,0.7} and mIoU."""
    opts = _resolve(state, "eval-moment", fps=(fps, 1.0))
    try:
        records, counts = assemble_moment_records(gt_path, preds_path, float(opts["fps"]))
        if not records:
            raise SchemaError(f"{gt_path}: no ground-truth records")
        report = moment_report(
            records, n_parse_failures=counts["malformed"] + counts["out_of_range"]
        )
        report["n_missing_pred"] = counts["missing"]
        report["n_unmatched_pred"] = counts["unmatched_preds"]
        dump_json(report, out_path)
        _echo_run_config(
            "eval-moment",
            {"preds": preds_path, "gt": gt_path, "out": out_path, **opts},
            out_path,
        )
        click.echo(format_report_table(report))
    except (SchemaError, OSError, ValueError) as exc:
        _fail(str(exc))


def assemble_highlight_records(
    gt_path: Path, preds_path: Path
) -> tuple[list[HighlightRecord], dict]:
    preds = _load_pred_texts(preds_path)
    records: list[HighlightRecord] = []
    counts = {"missing": 0, "malformed": 0}
    for lineno, rec in read_jsonl(gt_path):
        require_fields(rec, ("id", "clips"), gt_path, lineno)
        rec_id = str(rec["id"])
        clip_rows = rec["clips"]
        if not clip_rows:
            raise SchemaError(f"{gt_path}:{lineno}: clips must be nonempty")
        text = preds.get(rec_id)
        scores: list[Optional[float]]
        if text is None:
            counts["missing"] += 1
            scores = [None] * len(clip_rows)
        else:
            parsed = answer_parser.parse_saliency(text, clip_count=len(clip_rows))
            if parsed.validity is answer_parser.Validity.MALFORMED:
                counts["malformed"] += 1
            scores = answer_parser.saliency_to_clip_scores(parsed, len(clip_rows))
        clips = [
            Clip(
                clip_start=float(c["clip_start"]),
                gt_saliency=float(c["gt_saliency"]),
                pred_saliency=scores[i],
            )
            for i, c in enumerate(clip_rows)
        ]
        records.append(HighlightRecord(rec_id, str(rec.get("query", "")), clips))
    return records, counts


@main.command("eval-highlight")
@click.option("--preds", "preds_path", type=click.Path(path_type=Path), required=True)
@click.option("--gt", "gt_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {id, clips: [{clip_start, gt_saliency}][, query]}.")
@click.option("--threshold", type=float, default=None,
              help="gt_saliency relevance threshold [default: 3.0].")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.pass_obj
def eval_highlight(state: CliState, preds_path: Path, gt_path: Path,
                   threshold: Optional[float], out_path: Path) -> None:
    """Score highlight detection: mAP and HIT@1."""
    opts = _resolve(state, "eval-highlight", threshold=(threshold, 3.0))
    try:
        records, counts = assemble_highlight_records(gt_path, preds_path)
        if not records:
            raise SchemaError(f"{gt_path}: no ground-truth records")
        report = highlight_report(
            records,
            relevance_threshold=float(opts["threshold"]),
            n_parse_failures=counts["malformed"],
        )
        report["n_missing_pred"] = counts["missing"]
        dump_json(report, out_path)
        _echo_run_config(
            "eval-highlight",
            {"preds": preds_path, "gt": gt_path, "out": out_path, **opts},
            out_path,
        )
        click.echo(format_report_table(report))
    except (SchemaError, OSError, ValueError) as exc:
        _fail(str(exc))


@main.command("analyze-distribution")
@click.option("--preds", "preds_path", type=click.Path(path_type=Path), required=True,
              help="JSONL of {id, raw_text, n_frames[, fps]}.")
@click.option("--top-k", type=int, default=None, help="[default: 10]")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True,
              help="CSV of start,end,count,share.")
@click.pass_obj
def analyze_distribution(state: CliState, preds_path: Path,
                         top_k: Optional[int], out_path: Path) -> None:
    """Tally the most common predicted intervals (hallucination analysis)."""
    import csv as _csv

    opts = _resolve(state, "analyze-distribution", top_k=(top_k, 10))
    try:
        outcomes = []
        for lineno, rec in read_jsonl(preds_path):
            require_fields(rec, ("raw_text", "n_frames"), preds_path, lineno)
            outcomes.append(
                answer_parser.parse_moment(
                    str(rec["raw_text"]),
                    n_frames=int(rec["n_frames"]),
                    fps=float(rec.get("fps", 1.0)),
                )
            )
        if not outcomes:
            raise SchemaError(f"{preds_path}: no prediction rows")
        top = answer_parser.interval_distribution(outcomes, int(opts["top_k"]))
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with out_path.open("w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["start", "end", "count", "share"])
            for (start, end), count, share in top:
                writer.writerow([start, end, count, repr(share)])
        _echo_run_config(
            "analyze-distribution",
            {"preds": preds_path, "out": out_path, **opts},
            out_path,
        )
        n_malformed = sum(
            1 for o in outcomes if o.validity is answer_parser.Validity.MALFORMED
        )
        click.echo(f"{len(outcomes)} prediction(s), {n_malformed} malformed")
        for (start, end), count, share in top:
            click.echo(f"  ({start}, {end})  {count}  {share * 100:.2f}%")
    except (SchemaError, OSError, ValueError) as exc:
        _fail(str(exc))


if __name__ == "__main__":
    main()

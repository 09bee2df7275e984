"""Command-line entry point for the cytology quality and validity gates."""

import asyncio
import logging
from pathlib import Path
from typing import List, Optional

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from services.aggregation import StrategyId
from services.app_settings import AppSettings, ConfigManager
from services.datasets import (
    ShuffleMode,
    SplitStrategy,
    build_paired_manifest,
    build_validity_manifest,
    emit_experiment_plan,
    list_images,
    plan_kfold,
    read_manifest,
    write_experiment_plan,
    write_jsonl,
    write_manifest,
    write_split_plan,
)
from services.errors import CytogateError
from services.harness import (
    RunConfig,
    calibrate_sharpness,
    compare_input_sizes,
    compare_strategies,
    run_cv,
    run_gate,
    run_magnification,
    sweep_crop_sizes,
    write_decision_log,
    write_report,
)
from services.imaging import load_image, save_png, synthesize_dark_edges
from services.selection import probe_logits, rank_classes, read_logit_matrix, write_logit_matrix
from services.slicing import EdgeMode

logger = logging.getLogger("cytogate")


class CliError(click.ClickException):
    exit_code = 2


class GateGroup(click.Group):
    """Turns domain and validation failures into a one-line message and exit code 2"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (CytogateError, ValidationError) as e:
            logger.debug("Command failed", exc_info=True)
            raise CliError(str(e)) from e


def _parse_sizes(text: str, allow_native: bool = False) -> List[Optional[int]]:
    sizes: List[Optional[int]] = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if allow_native and token.lower() == "native":
            sizes.append(None)
            continue
        try:
            sizes.append(int(token))
        except ValueError:
            raise click.BadParameter(f"not a size: {token!r}")
    if not sizes:
        raise click.BadParameter("at least one size is required")
    return sizes


def gate_options(func):
    """Flags shared by every command that runs a gate"""
    options = [
        click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False),
                     help="JSONL manifest of labeled images"),
        click.option("--scorer", type=click.Choice(["baseline", "onnx"]), default=None,
                     help="Fragment scorer (default from config)"),
        click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Serialized ONNX model for --scorer onnx"),
        click.option("--strategy", type=click.Choice([s.value for s in StrategyId]), default=None),
        click.option("--patch-size", type=int, default=None),
        click.option("--edge-mode", type=click.Choice([m.value for m in EdgeMode]), default=None),
        click.option("--crop-size", type=int, default=None, help="Seeded random square crop before slicing"),
        click.option("--seed", type=int, default=None),
        click.option("--threshold", type=float, default=None),
        click.option("--workers", type=int, default=None, help="Concurrent fragment scoring calls"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Report directory"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run_config(settings: AppSettings, **flags) -> RunConfig:
    return RunConfig.from_settings(settings, **flags)


def _out_dir(settings: AppSettings, out: Optional[str]) -> Path:
    return Path(out or settings.harness.output_dir)


pass_settings = click.make_pass_decorator(AppSettings)


@click.group(cls=GateGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default="data/app_config.json",
              show_default=True, help="Persisted settings file")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]), default="INFO",
              show_default=True)
@click.pass_context
def main(ctx: click.Context, config_path: str, log_level: str):
    """Image quality and input validity gates for cytology photographs."""
    load_dotenv()
    logging.basicConfig(level=getattr(logging, log_level), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    manager = ConfigManager(config_path)
    ctx.meta["config_manager"] = manager
    ctx.obj = manager.load_sync()


@main.command("synth-dark-edges")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Image file or directory of images")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--radius", type=float, default=None, help="Clear radius as a fraction of min(w,h)/2")
@click.option("--feather", type=float, default=None)
@click.option("--floor", "floor_level", type=float, default=None, help="Gain beyond the ring, 0 is black")
@click.option("--center-jitter", type=float, default=None)
@click.option("--seed", type=int, default=None)
@pass_settings
def synth_dark_edges(settings: AppSettings, input_path: str, out: str, radius, feather, floor_level,
                     center_jitter, seed):
    """Darken the surroundings of each image with a circular vignette."""
    overrides = {"radius_fraction": radius, "feather_fraction": feather, "floor_level": floor_level,
                 "center_jitter": center_jitter, "seed": seed}
    params = settings.imaging.model_validate(
        {**settings.imaging.model_dump(), **{k: v for k, v in overrides.items() if v is not None}}
    )
    source = Path(input_path)
    images = list_images(source) if source.is_dir() else {source.name: source}
    for name, path in images.items():
        target = Path(out) / (Path(name).stem + ".png")
        save_png(synthesize_dark_edges(load_image(path), params), target)
    click.echo(f"Wrote {len(images)} dark-edge image(s) to {out}")


@main.command("build-manifest")
@click.option("--high-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--low-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--distractor-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Non-cell images; builds the validity manifest instead of the quality one")
@click.option("--dark-edge-dir", type=click.Path(file_okay=False), default=None,
              help="Where dark-edge copies go (validity manifest only)")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Manifest JSONL path")
@pass_settings
def build_manifest(settings: AppSettings, high_dir: str, low_dir: str, distractor_dir: Optional[str],
                   dark_edge_dir: Optional[str], out: str):
    """Pair focused and misfocused images by file name into a manifest."""
    records = build_paired_manifest(high_dir, low_dir)
    if distractor_dir:
        target_dir = dark_edge_dir or str(Path(out).parent / "dark_edge")
        validity = build_validity_manifest(records, distractor_dir, settings.imaging, target_dir)
        records = validity.records
        if validity.skipped:
            click.echo(f"Skipped {len(validity.skipped)} unreadable distractor(s)", err=True)
    write_manifest(records, out)
    click.echo(f"Wrote {len(records)} records to {out}")


@main.command("plan-split")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=None, help="Number of folds (default from plan config)")
@click.option("--split", type=click.Choice([s.value for s in SplitStrategy]), default=SplitStrategy.SAMEIDX.value,
              show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Fold assignment JSONL path")
@pass_settings
def plan_split(settings: AppSettings, manifest: str, k: Optional[int], split: str, seed: Optional[int], out: str):
    """Assign every record to a fold, honoring the pair constraint."""
    records = read_manifest(manifest)
    plan = plan_kfold(records, k or settings.plan.k_folds, SplitStrategy(split),
                      settings.harness.seed if seed is None else seed)
    write_split_plan(plan, out)
    click.echo(f"Fold sizes: {plan.fold_sizes()}")


@main.command("run-gate")
@gate_options
@click.option("--gate", type=click.Choice(["quality", "validity"]), default="quality", show_default=True)
@pass_settings
def run_gate_command(settings: AppSettings, out: Optional[str], **flags):
    """Score every image in a manifest and report metrics."""
    config = _run_config(settings, **flags)
    result = run_gate(config)
    out_dir = _out_dir(settings, out)
    write_decision_log(result.decisions, out_dir / "decisions.jsonl")
    _, table = write_report({config.strategy.value: result.summary}, out_dir, "run_gate")
    click.echo(table.read_text(encoding="utf-8"), nl=False)
    if result.skipped:
        click.echo(f"Excluded {len(result.skipped)} unreadable image(s)", err=True)


@main.command("compare-strategies")
@gate_options
@pass_settings
def compare_strategies_command(settings: AppSettings, out: Optional[str], **flags):
    """Run the gate once per aggregation strategy on identical inputs."""
    flags.pop("strategy", None)
    comparison = compare_strategies(_run_config(settings, **flags))
    out_dir = _out_dir(settings, out)
    _, table = write_report(comparison.summaries(), out_dir, "strategies")
    click.echo(table.read_text(encoding="utf-8"), nl=False)
    for strategy, calls in comparison.scorer_calls.items():
        logger.info(f"{strategy.value}: {calls} scorer calls")


@main.command("sweep-crops")
@gate_options
@click.option("--sizes", required=True, help="Comma-separated crop sizes, e.g. 500,1250,1944")
@pass_settings
def sweep_crops(settings: AppSettings, out: Optional[str], sizes: str, **flags):
    """Evaluate a fixed scorer on seeded random crops of each size."""
    flags.pop("crop_size", None)
    rows = sweep_crop_sizes(_run_config(settings, **flags), _parse_sizes(sizes))
    out_dir = _out_dir(settings, out)
    write_jsonl(rows, out_dir / "crop_curve.jsonl")
    _, table = write_report({row.name: row.summary for row in rows}, out_dir, "crop_sweep")
    click.echo(table.read_text(encoding="utf-8"), nl=False)


@main.command("rank-classes")
@click.option("--logits", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Delimited logit matrix with a header of class names")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None,
              help="ONNX classifier to probe instead of reading --logits")
@click.option("--probe-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Class names, one per line, in output order")
@click.option("--top-k", type=int, default=3, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the probed matrix as CSV")
def rank_classes_command(logits, model, probe_dir, labels_path, top_k: int, out):
    """Rank classifier classes by mean logit over a probe set."""
    if logits:
        matrix = read_logit_matrix(logits)
    elif model and probe_dir and labels_path:
        from services.classifier.onnx_model import OnnxModelScorer

        labels = [line.strip() for line in Path(labels_path).read_text(encoding="utf-8").splitlines() if line.strip()]
        images = (load_image(p) for p in list_images(probe_dir).values())
        matrix = probe_logits(OnnxModelScorer(model), images, labels)
        if out:
            write_logit_matrix(matrix, out)
    else:
        raise click.UsageError("give --logits, or --model with --probe-dir and --labels")
    for rank, (name, mean) in enumerate(rank_classes(matrix, top_k), start=1):
        click.echo(f"{rank}\t{name}\t{mean:.6f}")


@main.command("emit-plan")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Bind class weights to this manifest's label counts")
@click.option("--learning-rate", type=float, default=None)
@click.option("--momentum", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--patience-epochs", type=int, default=None)
@click.option("--k-folds", type=int, default=None)
@click.option("--validation-fraction", type=float, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@pass_settings
def emit_plan(settings: AppSettings, manifest: Optional[str], out: str, **overrides):
    """Write the hyperparameter plan for the external trainer."""
    records = read_manifest(manifest) if manifest else None
    plan = emit_experiment_plan(overrides, records, base=settings.plan)
    write_experiment_plan(plan, out)
    click.echo(plan.model_dump_json(indent=2))


@main.command("run-cv")
@gate_options
@click.option("--k", type=int, default=None)
@click.option("--split", type=click.Choice([s.value for s in SplitStrategy]), default=SplitStrategy.SAMEIDX.value,
              show_default=True)
@click.option("--shuffle", type=click.Choice([m.value for m in ShuffleMode]), default=ShuffleMode.PAIR.value,
              show_default=True)
@pass_settings
def run_cv_command(settings: AppSettings, out: Optional[str], k: Optional[int], split: str, shuffle: str, **flags):
    """Score each held-out fold and write the per-fold training artifacts."""
    out_dir = _out_dir(settings, out)
    result = run_cv(_run_config(settings, **flags), k or settings.plan.k_folds, SplitStrategy(split),
                    ShuffleMode(shuffle), out_dir=out_dir / "cv", plan=settings.plan)
    _, table = write_report({f"{split}/{shuffle}": result.summary}, out_dir, "cv")
    click.echo(table.read_text(encoding="utf-8"), nl=False)


@main.command("calibrate")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--input-size", type=int, default=None, help="Resize before measuring sharpness")
@click.option("--save/--no-save", default=False, help="Persist the fit into the config file")
@click.pass_context
def calibrate(ctx: click.Context, manifest: str, input_size: Optional[int], save: bool):
    """Fit the sharpness baseline's logistic calibration to a labeled manifest."""
    calibration = calibrate_sharpness(read_manifest(manifest), input_size=input_size)
    click.echo(calibration.model_dump_json())
    if save:
        manager: ConfigManager = ctx.meta["config_manager"]
        asyncio.run(manager.update({"scorer": {"calibration": calibration.model_dump()}}))
        click.echo(f"Saved calibration to {manager.path}")


@main.command("compare-input-sizes")
@gate_options
@click.option("--sizes", default="native,224", show_default=True,
              help="Comma-separated fragment input sizes; 'native' keeps full resolution")
@pass_settings
def compare_input_sizes_command(settings: AppSettings, out: Optional[str], sizes: str, **flags):
    """Compare scoring fragments at native resolution against downscaled inputs."""
    rows = compare_input_sizes(_run_config(settings, **flags), _parse_sizes(sizes, allow_native=True))
    _, table = write_report({row.name: row.summary for row in rows}, _out_dir(settings, out), "input_sizes")
    click.echo(table.read_text(encoding="utf-8"), nl=False)


@main.command("sweep-magnification")
@gate_options
@click.option("--sizes", required=True, help="Comma-separated crop sizes")
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@pass_settings
def sweep_magnification(settings: AppSettings, out: Optional[str], sizes: str, test_fraction: float, **flags):
    """Split off a pair-respecting test set and sweep crop sizes on it."""
    flags.pop("crop_size", None)
    out_dir = _out_dir(settings, out)
    result = run_magnification(_run_config(settings, **flags), _parse_sizes(sizes), test_fraction, out_dir=out_dir,
                               plan=settings.plan)
    write_jsonl(result.rows, out_dir / "magnification_curve.jsonl")
    _, table = write_report({row.name: row.summary for row in result.rows}, out_dir, "magnification")
    click.echo(table.read_text(encoding="utf-8"), nl=False)


if __name__ == "__main__":
    main()

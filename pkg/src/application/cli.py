"""Command-line entry point: `microstack <subcommand> [options]`.

Exit codes: 0 ok, 1 usage, 2 configuration or model, 3 empty pipeline result, 4 I/O.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from src.domain.exceptions import (
    ConfigFileError,
    ConfigValidationError,
    EmptyPipelineError,
    FrameLoadError,
    ImageWriteError,
    MissingModelError,
    ModelFileError,
    ReportWriteError,
)
from src.domain.models import (
    FocusOperator,
    PipelineConfig,
    TrainClassifierSettings,
    TrainDeblurSettings,
)
from src.infrastructure.config import (
    DEBLUR_TILE,
    DEBLUR_TILE_OVERLAP,
    DEFAULT_SEED,
    DEFAULT_THREADS,
    FRAME_PATTERN,
    MASK_THRESHOLD,
    TOOL_VERSION,
    load_config,
    read_toml,
    setup_logging,
    validate_config,
)
from src.infrastructure.extensions.loaders import (
    list_images,
    read_image,
    save_image,
    save_index_map,
    save_mask,
    save_stack,
)
from src.infrastructure.extensions.writers import (
    render_payload_markdown,
    to_json_text,
    write_loss_log,
    write_payload,
    write_report,
)
from src.application.graph import run_pipeline
from src.application.services import deblur, defocusnet, focusmeasure, fusion, quality, synthetic
from src.application.services.imgcore import load_stack
from src.application.tinynn import load_model, save_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_EMPTY = 3
EXIT_IO = 4


class UsageExitParser(argparse.ArgumentParser):
    """Argument errors exit with status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# region COMMANDS


def _report_format(args: argparse.Namespace) -> str:
    return "markdown" if args.format in ("md", "markdown") else "json"


def _emit(payload: dict, args: argparse.Namespace) -> None:
    """Write `payload` to --report when given, else print it on stdout, in the --format chosen."""
    fmt = _report_format(args)
    if args.report:
        write_payload(payload, args.report, fmt, args.command)
    elif fmt == "markdown":
        print(render_payload_markdown(args.command, payload))
    else:
        print(to_json_text(payload))


def cmd_focus_score(args: argparse.Namespace) -> int:
    stack = load_stack(args.input, args.pattern)
    operators = list(FocusOperator) if args.op == "all" else [FocusOperator(args.op)]

    rows = []
    print("index,operator,value")
    for index, frame in enumerate(stack.frames):
        for op in operators:
            score = focusmeasure.focus_score(frame, op)
            rows.append({"index": index, "operator": op.value, "value": score.value})
            print(f"{index},{op.value},{score.value!r}")

    fmt = _report_format(args)
    if args.labels:
        labels = np.loadtxt(args.labels, dtype=int, ndmin=1).astype(bool)
        sweeps = {}
        for op in operators:
            values = np.array([r["value"] for r in rows if r["operator"] == op.value])
            _, threshold, accuracy = focusmeasure.threshold_sweep(values, labels)
            sweeps[op.value] = {"best_threshold": threshold, "accuracy": accuracy}
            logger.info(f"{op.value}: best threshold {threshold:.6g} gives accuracy {accuracy:.3f}")
        if args.report:
            write_payload({"scores": rows, "threshold_sweep": sweeps}, args.report, fmt, args.command)
    elif args.report:
        write_payload({"scores": rows}, args.report, fmt, args.command)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    net = load_model(args.model)
    stack = load_stack(args.input, args.pattern)
    records = [
        defocusnet.classify_frame(
            net,
            frame,
            n_crops=args.n_crops,
            seed=args.seed + index,
            level_threshold=args.level_threshold,
            index=index,
            mask_threshold=args.mask_threshold,
        )
        for index, frame in enumerate(stack.frames)
    ]
    kept = sum(r.decision.value == "in_focus" for r in records)
    logger.info(f"classify: {kept} of {len(records)} frames in focus")
    _emit({"tool_version": TOOL_VERSION, "seed": args.seed, "frames": records}, args)
    return EXIT_OK


def _sharp_images(source: Path | None, count: int, size: int, seed: int) -> list[np.ndarray]:
    if source is None:
        return synthetic.specimen_corpus(count, size, seed)
    return [read_image(path) for path in list_images(source)]


def _save_training_outputs(net, log: list[float], settings, output: Path) -> None:
    save_model(net, output, metadata={"config": settings.model_dump(mode="json")})
    write_loss_log(log, output.with_suffix(".loss.csv"))
    print(f"final_loss,{log[-1]!r}")


def cmd_train_classifier(args: argparse.Namespace) -> int:
    settings = load_config(
        args.config,
        TrainClassifierSettings,
        {"seed": args.seed, "output": args.output},
        {"seed": DEFAULT_SEED, "mask_threshold": MASK_THRESHOLD},
    )
    if settings.source == "zstack":
        if settings.input is None:
            raise ConfigValidationError(str(args.config), ["input"], "zstack source needs an input stack")
        stack = load_stack(str(settings.input))
        sharpest = settings.sharpest_index
        if sharpest is None:
            sharpest = focusmeasure.best_focused_index(stack)
        dataset = defocusnet.build_zstack_dataset(
            stack,
            sharpest,
            settings.n_levels,
            settings.step_frames,
            settings.crops_per_level,
            seed=settings.seed,
            crop_size=settings.crop_size,
            mask_threshold=settings.mask_threshold,
        )
    else:
        images = _sharp_images(settings.input, settings.n_images, settings.image_size, settings.seed)
        dataset = defocusnet.build_synthetic_dataset(
            images,
            settings.n_levels,
            settings.crops_per_level,
            blur_family=settings.blur_family,
            seed=settings.seed,
            level_step=settings.level_step,
            crop_size=settings.crop_size,
            mask_threshold=settings.mask_threshold,
        )
    net, log = defocusnet.train_classifier(dataset, settings)
    _save_training_outputs(net, log, settings, settings.output)
    return EXIT_OK


def cmd_train_deblur(args: argparse.Namespace) -> int:
    settings = load_config(
        args.config, TrainDeblurSettings, {"seed": args.seed, "output": args.output}, {"seed": DEFAULT_SEED}
    )
    frames = _sharp_images(settings.input, settings.n_images, settings.image_size, settings.seed)
    pairs = deblur.make_blur_pairs(frames, settings.recipe, settings.pair_count, settings.seed)
    net, log = deblur.train_deblur(pairs, settings)
    _save_training_outputs(net, log, settings, settings.output)
    return EXIT_OK


def cmd_deblur(args: argparse.Namespace) -> int:
    net = load_model(args.model)
    sources = [Path(args.input)] if Path(args.input).is_file() else list_images(args.input)
    output = Path(args.output)
    for path in sources:
        restored = deblur.deblur_image(net, read_image(path), args.tile, args.overlap, args.threads)
        save_image(restored, output / f"{path.stem}.png")
    logger.info(f"deblur: wrote {len(sources)} image(s) to {output}")
    return EXIT_OK


def cmd_fuse(args: argparse.Namespace) -> int:
    stack = load_stack(args.input, args.pattern)
    fused, focus_map = fusion.fuse(
        stack,
        method=args.method,
        feather=args.feather,
        wavelet_levels=args.levels,
        refine_radius=args.refine_radius,
        threads=args.threads,
    )
    save_image(fused, args.output)
    if args.save_masks and focus_map is not None:
        masks_dir = Path(args.save_masks)
        for index, mask in enumerate(focus_map.masks()):
            save_mask(mask, masks_dir / f"mask_{index:05d}.png")
        save_index_map(focus_map, masks_dir / "focus_index.png")
    if args.report:
        write_payload(
            {
                "method": args.method,
                "n_frames": len(stack),
                "output": str(args.output),
                "tenengrad": focusmeasure.tenengrad(fused).value,
            },
            args.report,
            _report_format(args),
            args.command,
        )
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    if args.fit_pristine:
        if not args.pristine:
            raise ConfigValidationError("metrics", ["pristine"], "--fit-pristine needs --pristine OUT.json")
        corpus = [read_image(path) for path in list_images(args.fit_pristine)]
        model = quality.fit_pristine(corpus, args.regularization)
        quality.save_pristine(model, args.pristine)
        _emit({"corpus_size": model.corpus_size, "pristine": str(args.pristine)}, args)
        return EXIT_OK

    result: dict[str, Any] = {}
    if args.ref or args.test:
        if not (args.ref and args.test):
            raise ConfigValidationError("metrics", ["ref", "test"], "--ref and --test go together")
        ref, test = read_image(args.ref), read_image(args.test)
        result["psnr"] = quality.psnr(test, ref, peak=args.peak)
        result["ssim"] = quality.ssim(test, ref, dynamic_range=args.peak)
    if args.no_ref:
        img = read_image(args.no_ref)
        result["tenengrad"] = focusmeasure.tenengrad(img).value
        if args.pristine:
            result["brisque"] = quality.brisque_score(img, quality.load_pristine(args.pristine))
    if not result:
        raise ConfigValidationError("metrics", [], "give --ref/--test, --no-ref or --fit-pristine")
    _emit(result, args)
    return EXIT_OK


_PIPELINE_FLAGS = (
    "stack",
    "output_dir",
    "classifier_model",
    "deblur_model",
    "pristine_model",
    "reference",
    "level_threshold",
    "n_crops",
    "mask_threshold",
    "fusion_method",
    "feather",
    "wavelet_levels",
    "tile",
    "overlap",
    "seed",
    "threads",
)
_PIPELINE_SWITCHES = ("skip_classify", "skip_deblur", "skip_fuse", "skip_score", "deblur_after_fusion")


def pipeline_config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data: dict[str, Any] = read_toml(args.config) if args.config else {}
    data.update({k: getattr(args, k) for k in _PIPELINE_FLAGS if getattr(args, k) is not None})
    data.update({k: True for k in _PIPELINE_SWITCHES if getattr(args, k)})
    data.setdefault("seed", DEFAULT_SEED)
    data.setdefault("threads", DEFAULT_THREADS)
    data.setdefault("mask_threshold", MASK_THRESHOLD)
    return validate_config(data, PipelineConfig, str(args.config or "command line"))


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = pipeline_config_from_args(args)
    report = run_pipeline(config)

    fmt = _report_format(args)
    default_name = "report.md" if fmt == "markdown" else "report.json"
    write_report(report, args.report or config.output_dir / default_name, fmt)
    if report.exit_code == EXIT_EMPTY:
        raise EmptyPipelineError(len(report.frames))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    output = Path(args.output)
    sharp = synthetic.specimen_image(args.size, args.seed)
    if args.kind == "specimens":
        for i, img in enumerate(synthetic.specimen_corpus(args.count, args.size, args.seed)):
            save_image(img, output / f"{FRAME_PATTERN % i}.png")
    elif args.kind == "defocus-stack":
        save_stack(synthetic.defocus_stack(sharp, args.frames, args.step, args.family), output)
    elif args.kind == "complementary-stack":
        save_stack(synthetic.complementary_stack(sharp, args.frames, args.sigma), output)
        save_image(sharp, output / "truth.png")
    elif args.kind == "blur-pairs":
        corpus = synthetic.specimen_corpus(args.count, args.size, args.seed)
        pairs = deblur.make_blur_pairs(corpus, count=args.count, seed=args.seed)
        for i, (blurred, clean) in enumerate(zip(pairs.blurred, pairs.sharp)):
            save_image(blurred, output / "blurred" / f"{FRAME_PATTERN % i}.png")
            save_image(clean, output / "sharp" / f"{FRAME_PATTERN % i}.png")
    logger.info(f"synth: wrote {args.kind} to {output}")
    return EXIT_OK


# region PARSER


def _global_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
    parent.add_argument("--threads", type=int, default=None, help=f"worker threads (default {DEFAULT_THREADS})")
    parent.add_argument("--report", type=Path, default=None, help="write the command's report to this path")
    parent.add_argument("--format", choices=["json", "md", "markdown"], default="json", help="report format")
    parent.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = UsageExitParser(prog="microstack", description="Z-stack focus classification, deblurring and fusion.")
    parser.add_argument("--version", action="version", version=f"microstack {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags()]

    p = sub.add_parser("focus-score", parents=common, help="score every frame with a focus operator")
    p.add_argument("--input", required=True, help="stack directory")
    p.add_argument("--op", default="tenengrad", choices=[op.value for op in FocusOperator] + ["all"])
    p.add_argument("--labels", type=Path, help="one 0/1 in-focus label per frame; reports the best threshold")
    p.add_argument("--pattern", default=FRAME_PATTERN)
    p.set_defaults(handler=cmd_focus_score)

    p = sub.add_parser("classify", parents=common, help="classify stack frames as in or out of focus")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--input", required=True, help="stack directory")
    p.add_argument("--n-crops", type=int, default=8)
    p.add_argument("--level-threshold", type=float, default=None)
    p.add_argument("--mask-threshold", type=float, default=MASK_THRESHOLD)
    p.add_argument("--pattern", default=FRAME_PATTERN)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("train-classifier", parents=common, help="train the defocus-level classifier")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--output", type=Path, default=None)
    p.set_defaults(handler=cmd_train_classifier)

    p = sub.add_parser("train-deblur", parents=common, help="train the deblurring network")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--output", type=Path, default=None)
    p.set_defaults(handler=cmd_train_deblur)

    p = sub.add_parser("deblur", parents=common, help="deblur an image or a directory of images")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--tile", type=int, default=DEBLUR_TILE)
    p.add_argument("--overlap", type=int, default=DEBLUR_TILE_OVERLAP)
    p.set_defaults(handler=cmd_deblur)

    p = sub.add_parser("fuse", parents=common, help="focus-stack a directory of frames")
    p.add_argument("--input", required=True, help="stack directory")
    p.add_argument("--method", choices=["masks", "wavelet"], default="masks")
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--save-masks", type=Path, default=None)
    p.add_argument("--feather", type=float, default=2.0)
    p.add_argument("--levels", type=int, default=4, help="wavelet levels")
    p.add_argument("--refine-radius", type=int, default=fusion.REFINE_RADIUS)
    p.add_argument("--pattern", default=FRAME_PATTERN)
    p.set_defaults(handler=cmd_fuse)

    p = sub.add_parser("metrics", parents=common, help="PSNR/SSIM, no-reference scores, pristine fitting")
    p.add_argument("--ref", type=Path)
    p.add_argument("--test", type=Path)
    p.add_argument("--no-ref", type=Path)
    p.add_argument("--pristine", type=Path)
    p.add_argument("--fit-pristine", type=Path, help="directory of clean images")
    p.add_argument("--regularization", type=float, default=quality.DEFAULT_REGULARIZATION)
    p.add_argument("--peak", type=float, default=1.0)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("pipeline", parents=common, help="classify, deblur, fuse and score a stack")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--stack", type=Path, default=None)
    p.add_argument("--output", dest="output_dir", type=Path, default=None)
    p.add_argument("--classifier-model", type=Path, default=None)
    p.add_argument("--deblur-model", type=Path, default=None)
    p.add_argument("--pristine", dest="pristine_model", type=Path, default=None)
    p.add_argument("--reference", type=Path, default=None)
    p.add_argument("--level-threshold", type=float, default=None)
    p.add_argument("--n-crops", type=int, default=None)
    p.add_argument("--mask-threshold", type=float, default=None)
    p.add_argument("--method", dest="fusion_method", choices=["masks", "wavelet"], default=None)
    p.add_argument("--feather", type=float, default=None)
    p.add_argument("--wavelet-levels", type=int, default=None)
    p.add_argument("--tile", type=int, default=None)
    p.add_argument("--overlap", type=int, default=None)
    for switch in _PIPELINE_SWITCHES:
        p.add_argument(f"--{switch.replace('_', '-')}", dest=switch, action="store_true")
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("synth", parents=common, help="generate synthetic specimens, stacks and blur pairs")
    p.add_argument("--kind", required=True, choices=["specimens", "defocus-stack", "complementary-stack", "blur-pairs"])
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--step", type=float, default=defocusnet.DEFAULT_LEVEL_STEP)
    p.add_argument("--family", choices=["gaussian", "disk", "airy"], default="gaussian")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--count", type=int, default=4)
    p.set_defaults(handler=cmd_synth)

    return parser


_READS_CONFIG_FILE = ("pipeline", "train-classifier", "train-deblur")


def _resolve_globals(args: argparse.Namespace) -> None:
    # commands with a config file keep None so file values can win
    if args.threads is not None and args.threads < 1:
        raise ConfigValidationError("command line", ["threads"], "--threads must be >= 1")
    if args.command in _READS_CONFIG_FILE:
        return
    if args.seed is None:
        args.seed = DEFAULT_SEED
    if args.threads is None:
        args.threads = DEFAULT_THREADS


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        _resolve_globals(args)
        return args.handler(args)
    except EmptyPipelineError as e:
        logger.error(str(e))
        return EXIT_EMPTY
    except (ConfigValidationError, ConfigFileError, ModelFileError, MissingModelError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (FrameLoadError, ImageWriteError, ReportWriteError, OSError) as e:
        logger.error(str(e))
        return EXIT_IO
    except (ValueError, RuntimeError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

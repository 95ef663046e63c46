"""Command-line front end.

Modes
-----
integrate : project a pose-annotated stack onto a focal plane and average
fuse      : run the fusion pipeline on a basis image plus feature channels
evaluate  : score an existing fused image against its sources
ablate    : run fuse three times (full, filterOnly, cnnOnly) side by side

Exit codes: 0 success, 1 usage or inconsistent job, 2 I/O (missing or
malformed files), 3 numeric failure.  Failures emit a one-line JSON error
record on stderr.  Timing is logged to stderr only, so written artifacts stay
byte-identical between runs.

The ``--threads`` flag is honored by exporting the BLAS thread variables
before numpy is first imported, which is why every numpy-touching import in
this module is deferred into the command functions.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
FEATURE_TAGS = {"thermal", "colorcode"}
WEIGHTS_ENV_VAR = "AEROFUSE_WEIGHTS"

_EPILOG = """\
feature syntax:
  --feature path[:thermal][:colorcode]
      thermal    treat as single-plane thermal data
      colorcode  expand a single plane through the ember colormap

config file (--config job.json): JSON object whose keys mirror the flags,
e.g. {"mode": "fuse", "basis": "b.png", "features": ["it.tif:thermal"],
"out": "fused.png"}; explicit flags override file values.

exit codes: 1 usage, 2 I/O, 3 numeric.
"""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse default exits with 2
        raise _UsageError(message)


def _scan_threads(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--threads="):
            return arg.split("=", 1)[1]
    return None


def _apply_thread_env(argv: list[str]) -> None:
    value = _scan_threads(argv)
    if value is not None and value.isdigit() and int(value) > 0:
        for var in THREAD_ENV_VARS:
            os.environ[var] = value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="aerofuse",
        description="Fuse aerial spectral channels into one annotated basis image.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--mode", choices=["integrate", "fuse", "evaluate", "ablate"])
    parser.add_argument("--config", help="JSON job file; flags override its values")
    parser.add_argument("--basis", help="basis image path (fuse/evaluate/ablate)")
    parser.add_argument("--feature", action="append", dest="features", metavar="SPEC",
                        help="feature channel, repeatable (see feature syntax)")
    parser.add_argument("--fused", help="existing fused image to score (evaluate)")
    parser.add_argument("--poses", help="pose JSON for integrate mode")
    parser.add_argument("--plane", help="focal-plane JSON for integrate mode")
    parser.add_argument("--gain", type=float, help="post-gain for integrate mode (default 1)")
    parser.add_argument("--weights", help=f"VGGW weights path (default ${WEIGHTS_ENV_VAR})")
    parser.add_argument("--lambda", dest="lam", type=float, help="filter strength (default 5)")
    parser.add_argument("--ablation", choices=["full", "filterOnly", "cnnOnly"])
    parser.add_argument("--baseline", action="store_true", default=None,
                        help="also compute and report the alpha-blend baseline")
    parser.add_argument("--dump-intermediates", action="store_true", default=None,
                        help="write per-channel detail/activity/weight/mask/map images")
    parser.add_argument("--raw-intermediates", action="store_true", default=None,
                        help="additionally dump intermediates as 32-bit float TIFF")
    parser.add_argument("--report", help="metrics report JSON path (CSV and figure "
                                         "are written alongside)")
    parser.add_argument("--out", help="output image path")
    parser.add_argument("--threads", type=_positive_int,
                        help="BLAS thread count (exported before numpy loads)")
    return parser


_CONFIG_KEYS = {
    "mode": "mode", "basis": "basis", "features": "features", "fused": "fused",
    "poses": "poses", "plane": "plane", "gain": "gain", "weights": "weights",
    "lambda": "lam", "ablation": "ablation", "baseline": "baseline",
    "dumpIntermediates": "dump_intermediates", "rawIntermediates": "raw_intermediates",
    "report": "report", "out": "out",
}


def _merge_config(ns: argparse.Namespace) -> argparse.Namespace:
    if not ns.config:
        return ns
    with open(ns.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise _UsageError(f"{ns.config}: config must be a JSON object")
    unknown = sorted(set(doc) - set(_CONFIG_KEYS))
    if unknown:
        raise _UsageError(f"{ns.config}: unknown config keys {unknown}")
    for key, dest in _CONFIG_KEYS.items():
        if key in doc and getattr(ns, dest) is None:
            setattr(ns, dest, doc[key])
    return ns


def _error_record(exc: BaseException, code: int) -> str:
    return json.dumps(
        {"error": type(exc).__name__, "message": str(exc), "exitCode": code}
    )


def _classify(exc: BaseException) -> int:
    from . import errors as E

    if isinstance(exc, (E.NonConvergence, E.DegenerateHomography, E.NoBlobFound,
                        E.TooSmall, FloatingPointError, ZeroDivisionError)):
        return 3
    if isinstance(exc, (E.BadMagic, E.TruncatedFile, E.ShapeMismatch, E.WeightsMissing,
                        OSError, json.JSONDecodeError)):
        return 2
    return 1


def _log(message: str) -> None:
    print(f"[aerofuse] {message}", file=sys.stderr)


def _stem(path: str) -> tuple[str, str]:
    root, ext = os.path.splitext(path)
    return root, ext


def _parse_feature_spec(spec: str) -> tuple[str, set[str]]:
    parts = spec.split(":")
    tags: set[str] = set()
    while len(parts) > 1 and parts[-1].lower() in FEATURE_TAGS:
        tags.add(parts.pop().lower())
    return ":".join(parts), tags


def _load_channels(opts):
    """Read the basis and every feature channel from disk."""
    from .image import (
        Acquisition,
        ChannelDescriptor,
        ChannelRole,
        Modality,
        color_code,
        to_grayscale,
    )
    from .fusion import Channel
    from .io import read_image

    if not opts.basis:
        raise _UsageError("this mode requires --basis")
    if not opts.features:
        raise _UsageError("this mode requires at least one --feature")
    basis_img = read_image(opts.basis)
    basis = Channel(
        image=basis_img,
        descriptor=ChannelDescriptor(
            role=ChannelRole.BASIS,
            modality=Modality.RGB if basis_img.planes == 3 else Modality.OTHER,
            acquisition=Acquisition.SINGLE,
        ),
        label=os.path.splitext(os.path.basename(opts.basis))[0],
    )
    features = []
    for spec in opts.features:
        path, tags = _parse_feature_spec(spec)
        img = read_image(path)
        if "thermal" in tags and img.planes != 1:
            img = to_grayscale(img)
        color_coded = False
        if "colorcode" in tags:
            if img.planes != 1:
                raise _UsageError(f"{spec}: colorcode needs a single-plane image")
            img = color_code(img)
            color_coded = True
        if "thermal" in tags:
            modality = Modality.THERMAL
        else:
            modality = Modality.RGB if img.planes == 3 else Modality.OTHER
        features.append(
            Channel(
                image=img,
                descriptor=ChannelDescriptor(
                    role=ChannelRole.FEATURE,
                    modality=modality,
                    acquisition=Acquisition.INTEGRAL,
                    color_coded=color_coded,
                ),
                label=os.path.splitext(os.path.basename(path))[0],
            )
        )
    return basis, tuple(features)


def _fusion_config(opts):
    from .fusion import Ablation, FusionConfig

    return FusionConfig(
        lam=5.0 if opts.lam is None else float(opts.lam),
        ablation=Ablation(opts.ablation or "full"),
    )


def _load_vgg_weights(opts, required: bool):
    from .errors import WeightsMissing
    from .vgg import load_weights

    path = opts.weights or os.environ.get(WEIGHTS_ENV_VAR)
    if not path:
        if required:
            raise WeightsMissing(
                f"no weights file given: pass --weights or set ${WEIGHTS_ENV_VAR}"
            )
        return None
    return load_weights(path)


def _stretched(img):
    from .image import PlanarImage

    data = img.data
    lo, hi = float(data.min()), float(data.max())
    if hi - lo < 1e-12:
        return PlanarImage(0.0 * data)
    return PlanarImage((data - lo) / (hi - lo))


def _dump_intermediates(result, out_path: str, raw: bool) -> None:
    from .io import write_float_tiff, write_png

    root, _ = _stem(out_path)
    for ch in result.channels:
        pieces = {"detail": ch.high_detail, "weight": ch.weight,
                  "mask": ch.mask, "featuremap": ch.feature_map}
        for i, amap in enumerate(ch.activities, start=1):
            pieces[f"activity{i}"] = amap
        stretch = {"detail", "mask"} | {k for k in pieces if k.startswith("activity")}
        for name, img in pieces.items():
            display = _stretched(img) if name in stretch else img
            write_png(display, f"{root}_{ch.label}_{name}.png")
            if raw:
                write_float_tiff(img, f"{root}_{ch.label}_{name}.tif")


def _write_reports(opts, fused, sources, names, job_block) -> int:
    """Evaluate fused against sources, optionally with the alpha baseline,
    and write the JSON report plus CSV and figure alongside."""
    from .fusion import alpha_blend
    from .metrics import evaluate
    from .report import build_report, render_report_figure, write_report_csv, write_report_json

    started = time.perf_counter()
    rep = evaluate(fused, sources, names)
    baseline_rep = None
    if opts.baseline:
        blend = alpha_blend(sources)
        baseline_rep = evaluate(blend, sources, names)
        if opts.out:
            root, ext = _stem(opts.out)
            from .io import write_image

            write_image(blend, f"{root}_baseline{ext}")
    _log(f"metrics: {time.perf_counter() - started:.3f} s")
    doc = build_report(rep, baseline_rep, job_block)
    if opts.report:
        root, _ = _stem(opts.report)
        write_report_json(opts.report, doc)
        write_report_csv(f"{root}.csv", rep, baseline_rep)
        render_report_figure(f"{root}.png", rep, baseline_rep)
        _log(f"report: {opts.report}, {root}.csv, {root}.png")
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_fuse(opts) -> int:
    from .fusion import Ablation, FusionJob, run_job
    from .io import write_image

    basis, features = _load_channels(opts)
    config = _fusion_config(opts)
    weights = _load_vgg_weights(opts, required=config.ablation is not Ablation.FILTER_ONLY)
    job = FusionJob(basis=basis, features=features, config=config)
    started = time.perf_counter()
    result = run_job(job, weights, progress=lambda label, s: _log(f"channel {label}: {s:.3f} s"))
    _log(f"fuse total: {time.perf_counter() - started:.3f} s")
    if opts.out:
        write_image(result.fused, opts.out)
    if opts.dump_intermediates and opts.out:
        _dump_intermediates(result, opts.out, raw=bool(opts.raw_intermediates))
    if opts.report or not opts.out:
        sources = [basis.image] + [ch.image for ch in features]
        names = [basis.label] + [ch.label for ch in features]
        job_block = {"mode": "fuse", "basis": opts.basis, "features": list(opts.features),
                     "config": config.describe()}
        return _write_reports(opts, result.fused, sources, names, job_block)
    return 0


def _cmd_evaluate(opts) -> int:
    from .io import read_image

    if not opts.fused:
        raise _UsageError("evaluate mode requires --fused")
    basis, features = _load_channels(opts)
    fused = read_image(opts.fused)
    sources = [basis.image] + [ch.image for ch in features]
    names = [basis.label] + [ch.label for ch in features]
    job_block = {"mode": "evaluate", "fused": opts.fused, "basis": opts.basis,
                 "features": list(opts.features)}
    return _write_reports(opts, fused, sources, names, job_block)


def _cmd_integrate(opts) -> int:
    from .aos import integrate, load_focal_plane, load_pose_file
    from .io import write_image

    if not opts.poses or not opts.plane:
        raise _UsageError("integrate mode requires --poses and --plane")
    if not opts.out:
        raise _UsageError("integrate mode requires --out")
    frames = load_pose_file(opts.poses)
    plane = load_focal_plane(opts.plane)
    started = time.perf_counter()
    image = integrate(frames, plane, gain=1.0 if opts.gain is None else float(opts.gain))
    _log(f"integrate {len(frames)} frames: {time.perf_counter() - started:.3f} s")
    write_image(image, opts.out)
    return 0


def _cmd_ablate(opts) -> int:
    import dataclasses

    from .fusion import Ablation, FusionJob, run_job
    from .io import write_image

    if not opts.out:
        raise _UsageError("ablate mode requires --out")
    basis, features = _load_channels(opts)
    config = _fusion_config(opts)
    weights = _load_vgg_weights(opts, required=True)
    root, ext = _stem(opts.out)
    for ablation in (Ablation.FULL, Ablation.FILTER_ONLY, Ablation.CNN_ONLY):
        variant = dataclasses.replace(config, ablation=ablation)
        job = FusionJob(basis=basis, features=features, config=variant)
        started = time.perf_counter()
        result = run_job(job, weights)
        _log(f"ablation {ablation.value}: {time.perf_counter() - started:.3f} s")
        out_path = f"{root}_{ablation.value}{ext}"
        write_image(result.fused, out_path)
        if opts.dump_intermediates:
            _dump_intermediates(result, out_path, raw=bool(opts.raw_intermediates))
    return 0


_COMMANDS = {
    "fuse": _cmd_fuse,
    "evaluate": _cmd_evaluate,
    "integrate": _cmd_integrate,
    "ablate": _cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_thread_env(argv)
    parser = _build_parser()
    try:
        opts = _merge_config(parser.parse_args(argv))
        if not opts.mode:
            raise _UsageError("no mode given: pass --mode or a config file with one")
        return _COMMANDS[opts.mode](opts)
    except _UsageError as exc:
        print(_error_record(exc, 1), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001  - boundary: map everything to exit codes
        code = _classify(exc)
        print(_error_record(exc, code), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands: make-test-image, add-noise, denoise, train-dict, psnr,
experiment. Results go to the requested files; human diagnostics go to
stderr; `denoise` prints a JSON report on stdout. Exit code 0 means success.
The SPDA_THREADS environment variable caps the worker pool (0 = auto);
thread count never changes the computed bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import io as spio
from . import learning, pipeline, testimages
from .images import psnr as psnr_fn
from .images import scale_to_peak
from .noise import sample_poisson


def _positive_float(text):
    val = float(text)
    if val <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return val


def _load_config(args):
    profile = getattr(args, "profile", "full")
    cfg = (pipeline.SpdaConfig.desk_profile() if profile == "desk"
           else pipeline.SpdaConfig.full_profile())
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = pipeline.config_from_json(fh.read(), base=cfg)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg.validate()


def _add_config_flags(sub):
    sub.add_argument("--profile", choices=("desk", "full"), default="full",
                     help="named parameter profile (default: full)")
    sub.add_argument("--config", help="JSON file overriding config fields")


def cmd_make_test_image(args):
    img = testimages.make(args.kind, args.size)
    spio.write_image(args.output, img)
    return 0


def cmd_add_noise(args):
    clean = spio.read_image(args.input)
    scaled = scale_to_peak(clean, args.peak)
    noisy = sample_poisson(scaled, args.seed)
    spio.write_image(args.output, noisy)
    spio.write_float_grid(f"{args.output}.clean", scaled)
    return 0


def cmd_denoise(args):
    cfg = _load_config(args)
    noisy = spio.read_image(args.input)
    reference = spio.read_image(args.reference) if args.reference else None
    if args.dict:
        dictionary = spio.read_dictionary(args.dict)
    else:
        if args.method != "anscombe-identity":
            print("warning: no --dict given, falling back to the DCT-based "
                  "initial dictionary", file=sys.stderr)
        dictionary = learning.init_dictionary_dct(cfg.patch_side)

    t0 = time.perf_counter()
    if args.method == "anscombe-identity":
        from .noise import anscombe_forward, anscombe_inverse
        out = anscombe_inverse(anscombe_forward(noisy))
        rep = pipeline.DenoiseReport(
            output=out,
            psnr_db=None if reference is None else psnr_fn(reference, out),
            wall_seconds=time.perf_counter() - t0)
    elif args.method == "spda-bin":
        rep = pipeline.spda_denoise_binned(noisy, dictionary, cfg, reference)
    else:
        rep = pipeline.spda_denoise(noisy, dictionary, cfg, reference)

    spio.write_image(args.output, rep.output)
    payload = {
        "method": args.method,
        "output": args.output,
        "psnr_db": rep.psnr_db,
        "wall_seconds": rep.wall_seconds,
        "group_count": rep.group_count,
        "objective_trace": [float(v) for v in rep.objective_trace],
        "dictionary_width_trace": list(rep.dictionary_width_trace),
        "stage_trace": list(rep.stage_trace),
        "warnings": list(rep.warnings),
    }
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_train_dict(args):
    cfg = _load_config(args)
    if args.image:
        clean = spio.read_image(args.image)
    else:
        clean = testimages.training_image(args.size)
    dictionary = learning.train_initial_dictionary(clean, args.peak, cfg)
    spio.write_dictionary(args.output, dictionary)
    print(f"trained dictionary {dictionary.shape[0]}x{dictionary.shape[1]} "
          f"at bucket peak {learning.peak_bucket(args.peak):g}",
          file=sys.stderr)
    return 0


def cmd_psnr(args):
    ref = spio.read_image(args.reference)
    est = spio.read_image(args.estimate)
    value = psnr_fn(ref, est)
    print("inf" if np.isinf(value) else f"{value:.6f}")
    return 0


def cmd_experiment(args):
    cfg = _load_config(args)
    clean = spio.read_image(args.input)
    peaks = [_positive_float(p) for p in args.peaks.split(",") if p]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = pipeline.run_experiment(clean, peaks, args.realizations, methods,
                                   cfg, image_name=args.image_name)
    spio.write_results_csv(args.output, rows, include_timings=args.timings)
    for row in rows:
        if row["realization"] == "avg":
            print(f"peak {row['peak']:g} {row['method']}: "
                  f"{row['psnr_db']:.2f} dB", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spda",
        description="Poisson image denoising with sparse exponential patch "
                    "models and dictionary learning.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("make-test-image", help="write a synthetic image")
    sub.add_argument("--kind", choices=testimages.KINDS, required=True)
    sub.add_argument("--size", type=int, default=64)
    sub.add_argument("--output", required=True)
    sub.set_defaults(func=cmd_make_test_image)

    sub = subs.add_parser("add-noise", help="scale to a peak and sample noise")
    sub.add_argument("--input", required=True)
    sub.add_argument("--peak", type=_positive_float, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output", required=True)
    sub.set_defaults(func=cmd_add_noise)

    sub = subs.add_parser("denoise", help="denoise a noisy image")
    sub.add_argument("--input", required=True)
    sub.add_argument("--method", choices=pipeline.METHODS, default="spda")
    sub.add_argument("--dict", help="dictionary file (default: DCT init)")
    sub.add_argument("--reference", help="clean image for PSNR reporting")
    sub.add_argument("--output", required=True)
    _add_config_flags(sub)
    sub.set_defaults(func=cmd_denoise)

    sub = subs.add_parser("train-dict", help="train an initial dictionary")
    sub.add_argument("--peak", type=_positive_float, required=True)
    sub.add_argument("--image", help="clean training image (default: built-in)")
    sub.add_argument("--size", type=int, default=64,
                     help="built-in training image size")
    sub.add_argument("--output", required=True)
    _add_config_flags(sub)
    sub.set_defaults(func=cmd_train_dict)

    sub = subs.add_parser("psnr", help="PSNR between two images")
    sub.add_argument("--reference", required=True)
    sub.add_argument("--estimate", required=True)
    sub.set_defaults(func=cmd_psnr)

    sub = subs.add_parser("experiment", help="PSNR table over peaks/methods")
    sub.add_argument("--input", required=True, help="clean image")
    sub.add_argument("--peaks", required=True, help="comma-separated peaks")
    sub.add_argument("--realizations", type=int, default=5)
    sub.add_argument("--methods", default="spda,spda-bin,anscombe-identity")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--image-name", default="image")
    sub.add_argument("--timings", action="store_true",
                     help="fill the seconds column (forfeits byte-identical "
                          "reruns)")
    sub.add_argument("--output", required=True)
    _add_config_flags(sub)
    sub.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ArithmeticError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

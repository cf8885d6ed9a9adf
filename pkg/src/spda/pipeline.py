"""End-to-end denoising: clustering, pursuit and learning rounds, plus the
binned variant and the evaluation harness.

The flow on a noisy image y with starting dictionary D:

  1. group the patches of y (smoothed by a small Gaussian) and run a
     fixed-cardinality pursuit per group; re-project to get the estimate x.
  2. for each round: prune unused atoms, run a learning round (few
     alternations on the first round, more afterwards), re-project, then
     re-run pursuit with the bootstrapped stop using x's patches as the
     oracle, and re-project again.
  3. optionally re-cluster once on x with no smoothing and repeat the whole
     process with the current dictionary; the restart pursuit also uses the
     bootstrapped stop, with the pre-recluster x as oracle.

Ablation setups I..V switch stages off: I keeps only the first pursuit, II
adds one bootstrapped pursuit without learning, III runs learning in simple
mode (dictionary step only) with reclustering, IV runs advanced learning
without reclustering, V is everything.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import learning as learning_mod
from .clustering import group_patches
from .images import (bin_image, check_image, extract_patches, gaussian_kernel,
                     psnr, reproject_average, scale_to_peak, upscale_bilinear)
from .model import EXP_CLAMP
from .noise import anscombe_forward, anscombe_inverse, derive_seed, sample_poisson
from .pursuit import greedy_pursuit_group

SETUPS = ("I", "II", "III", "IV", "V", "custom")
METHODS = ("spda", "spda-bin", "anscombe-identity")


@dataclass
class SpdaConfig:
    """Pipeline parameters. Defaults are the full-scale reference setup."""

    patch_side: int = 20
    k_initial: int = 2
    k_max: int | None = None           # None: 2 * k_initial + 6
    group_size: int | None = None      # None: 50, or 6 when binning
    rounds: int = 5
    inner_iters_first: int = 2
    inner_iters: int = 20
    recluster_once: bool = True
    learning_mode: str = "advanced"
    setup: str = "V"
    kernel_side: int = 7
    kernel_sigma: float = 1.5
    epsilon: float = 0.0
    binning: bool = False
    bin_factor: int = 3
    scoring_newton_iters: int = 5
    refit_newton_iters: int = 25
    learning_newton_iters: int = 3
    init_dict: str = "trained"         # or "dct"
    seed: int = 0

    def effective_k_max(self):
        return 2 * self.k_initial + 6 if self.k_max is None else self.k_max

    def effective_group_size(self):
        if self.group_size is not None:
            return self.group_size
        return 6 if self.binning else 50

    def validate(self):
        if self.patch_side < 1:
            raise ValueError("patch_side must be >= 1")
        if self.k_initial < 1:
            raise ValueError("k_initial must be >= 1")
        if self.effective_k_max() < self.k_initial:
            raise ValueError("k_max must be >= k_initial")
        if self.effective_group_size() < 1:
            raise ValueError("group size must be >= 1")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.inner_iters_first < 1 or self.inner_iters < 1:
            raise ValueError("learning alternation counts must be >= 1")
        if self.learning_mode not in ("advanced", "simple"):
            raise ValueError(f"unknown learning mode {self.learning_mode!r}")
        if self.setup not in SETUPS:
            raise ValueError(f"unknown setup {self.setup!r}")
        if self.bin_factor < 2:
            raise ValueError("bin_factor must be >= 2")
        if self.init_dict not in ("trained", "dct"):
            raise ValueError(f"unknown init_dict {self.init_dict!r}")
        return self

    @classmethod
    def desk_profile(cls, **overrides):
        """Small images, small patches; minutes-scale on one core."""
        base = dict(patch_side=8, group_size=10, rounds=2, init_dict="dct")
        base.update(overrides)
        return cls(**base).validate()

    @classmethod
    def full_profile(cls, **overrides):
        return cls(**overrides).validate()


def config_to_json(cfg):
    return json.dumps(dataclasses.asdict(cfg), indent=2, sort_keys=True)


def config_from_json(text, base=None):
    """Build a config from a JSON object, overlaying `base` when given."""
    values = json.loads(text)
    if not isinstance(values, dict):
        raise ValueError("config JSON must be an object")
    known = {f.name for f in dataclasses.fields(SpdaConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    merged = dataclasses.asdict(base) if base is not None else {}
    merged.update(values)
    return SpdaConfig(**merged).validate()


@dataclass
class DenoiseReport:
    output: np.ndarray
    psnr_db: float | None
    objective_trace: list = field(default_factory=list)
    dictionary_width_trace: list = field(default_factory=list)
    group_count: int = 0
    stage_trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    wall_seconds: float = 0.0
    dictionary: np.ndarray | None = None


def _worker_count():
    raw = os.environ.get("SPDA_THREADS", "0").strip() or "0"
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"SPDA_THREADS must be an integer, got {raw!r}")
    if count < 0:
        raise ValueError("SPDA_THREADS must be >= 0")
    return count if count else (os.cpu_count() or 1)


def _map_ordered(fn, items):
    """Worker-pool map that preserves input order, so fan-in is index-ordered
    and parallel runs are bit-identical to serial ones."""
    workers = _worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _setup_flags(cfg):
    setup = cfg.setup
    learn = setup in ("III", "IV", "V", "custom")
    rounds = {"I": 0, "II": 1}.get(setup, cfg.rounds)
    if setup == "custom":
        recluster = cfg.recluster_once
    else:
        recluster = setup in ("III", "V")
    mode = "simple" if setup == "III" else cfg.learning_mode
    return learn, rounds, recluster, mode


def _pursuit_sweep(dictionary, group_data, k, cfg, oracle_data=None):
    k = min(k, dictionary.shape[1])  # pruning can narrow below the cap

    def run(idx):
        oracle = None if oracle_data is None else oracle_data[idx]
        return greedy_pursuit_group(
            dictionary, group_data[idx], k, oracle_patches=oracle,
            scoring_iters=cfg.scoring_newton_iters,
            refit_iters=cfg.refit_newton_iters)

    results = _map_ordered(run, list(range(len(group_data))))
    total = float(np.sum([r.objective for r in results]))
    return results, total


def _reproject(results, groups, patches, rows, cols):
    estimates = np.empty_like(patches.data)
    for res, idx in zip(results, groups):
        estimates[:, idx] = res.estimates
    stack = dataclasses.replace(patches, data=estimates)
    return reproject_average(stack, rows, cols)


def spda_denoise(noisy, dictionary, cfg=None, reference=None):
    """Denoise a Poisson-corrupted image. Returns a DenoiseReport.

    `dictionary` is the starting dictionary (unit-norm columns, one row per
    patch pixel); `reference` enables PSNR reporting.
    """
    t0 = time.perf_counter()
    cfg = (cfg if cfg is not None else SpdaConfig()).validate()
    noisy = check_image(noisy, "noisy")
    dictionary = np.array(dictionary, dtype=np.float64)
    side = cfg.patch_side
    if dictionary.ndim != 2 or dictionary.shape[0] != side * side:
        raise ValueError(
            f"dictionary rows {dictionary.shape} do not match patch side {side}")
    if min(noisy.shape) < side:
        raise ValueError(f"image {noisy.shape} smaller than patch side {side}")
    if reference is not None:
        reference = check_image(reference, "reference")
        if reference.shape != noisy.shape:
            raise ValueError("reference dimensions do not match the input")

    learn, rounds, recluster, mode = _setup_flags(cfg)
    rows, cols = noisy.shape
    floor = cfg.effective_group_size()
    k_max = cfg.effective_k_max()
    kernel = gaussian_kernel(cfg.kernel_side, cfg.kernel_sigma)
    patches = extract_patches(noisy, side)

    report = DenoiseReport(output=noisy, psnr_db=None)
    trace_obj, trace_width, stages, warns = [], [], [], []

    groups = group_patches(noisy, side, floor, kernel, cfg.epsilon)
    stages.append("cluster")
    report.group_count = len(groups)
    group_data = [patches.data[:, idx] for idx in groups]

    results, prev_obj = _pursuit_sweep(dictionary, group_data,
                                       cfg.k_initial, cfg)
    stages.append("pursuit-fixed")
    codes = [r.code for r in results]
    xhat = _reproject(results, groups, patches, rows, cols)
    stages.append("reproject")

    def run_rounds(dictionary, codes, results, xhat, prev_obj):
        for rnd in range(rounds):
            if learn:
                dictionary, codes, _ = learning_mod.prune_unused_atoms(
                    dictionary, codes)
                stages.append("prune")
                iters = cfg.inner_iters_first if rnd == 0 else cfg.inner_iters
                dictionary, codes = learning_mod.dictionary_learning_round(
                    dictionary, codes, group_data, iters, mode=mode,
                    coeff_newton_iters=cfg.learning_newton_iters,
                    row_newton_iters=cfg.learning_newton_iters)
                stages.append("learn")
                for res, code in zip(results, codes):
                    res.code = code
                    res.estimates = np.exp(np.minimum(
                        dictionary[:, code.support] @ code.coeffs, EXP_CLAMP))
                xhat = _reproject(results, groups, patches, rows, cols)
                stages.append("reproject")
            oracle = extract_patches(xhat, side).data
            oracle_data = [oracle[:, idx] for idx in groups]
            results, obj = _pursuit_sweep(dictionary, group_data, k_max, cfg,
                                          oracle_data)
            stages.append("pursuit-bootstrap")
            codes = [r.code for r in results]
            xhat = _reproject(results, groups, patches, rows, cols)
            stages.append("reproject")
            if prev_obj is not None and obj > prev_obj + 1e-6 * max(
                    1.0, abs(prev_obj)):
                warns.append(
                    f"objective rose from {prev_obj:.6g} to {obj:.6g}")
            prev_obj = obj
            trace_obj.append(obj)
            trace_width.append(dictionary.shape[1])
        return dictionary, codes, results, xhat, prev_obj

    dictionary, codes, results, xhat, prev_obj = run_rounds(
        dictionary, codes, results, xhat, prev_obj)

    if recluster:
        oracle_img = xhat
        groups = group_patches(xhat, side, floor, None, cfg.epsilon)
        stages.append("recluster")
        group_data = [patches.data[:, idx] for idx in groups]
        oracle = extract_patches(oracle_img, side).data
        oracle_data = [oracle[:, idx] for idx in groups]
        results, prev_obj = _pursuit_sweep(dictionary, group_data, k_max,
                                           cfg, oracle_data)
        stages.append("pursuit-bootstrap")
        codes = [r.code for r in results]
        xhat = _reproject(results, groups, patches, rows, cols)
        stages.append("reproject")
        dictionary, codes, results, xhat, prev_obj = run_rounds(
            dictionary, codes, results, xhat, prev_obj)

    if not (np.all(np.isfinite(xhat)) and xhat.min() >= 0):
        raise ArithmeticError("pipeline produced a non-finite or negative image")

    report.output = xhat
    report.dictionary = dictionary
    report.objective_trace = trace_obj
    report.dictionary_width_trace = trace_width
    report.stage_trace = stages
    report.warnings = warns
    if reference is not None:
        report.psnr_db = psnr(reference, xhat)
    report.wall_seconds = time.perf_counter() - t0
    return report


def spda_denoise_binned(noisy, dictionary, cfg=None, reference=None):
    """Bin, denoise at low resolution, upscale back to the input scale."""
    t0 = time.perf_counter()
    cfg = (cfg if cfg is not None else SpdaConfig()).validate()
    noisy = check_image(noisy, "noisy")
    factor = cfg.bin_factor
    low = bin_image(noisy, factor)
    if min(low.shape) < cfg.patch_side:
        raise ValueError(
            f"binned image {low.shape} smaller than patch side {cfg.patch_side}")
    low_cfg = dataclasses.replace(cfg, binning=True)
    rep = spda_denoise(low, dictionary, low_cfg)
    out = upscale_bilinear(rep.output, factor, noisy.shape[0], noisy.shape[1])
    rep.stage_trace = ["bin"] + rep.stage_trace + ["upscale"]
    rep.output = out
    rep.psnr_db = None if reference is None else psnr(reference, out)
    rep.wall_seconds = time.perf_counter() - t0
    return rep


def _dictionary_provider(clean, cfg):
    """Per-peak starting dictionaries, cached by training bucket."""
    cache = {}

    def provider(effective_peak):
        if cfg.init_dict == "dct":
            key = "dct"
        else:
            key = learning_mod.peak_bucket(effective_peak)
        if key not in cache:
            if key == "dct":
                cache[key] = learning_mod.init_dictionary_dct(cfg.patch_side)
            else:
                from .testimages import training_image

                size = max(2 * cfg.patch_side, min(clean.shape))
                cache[key] = learning_mod.train_initial_dictionary(
                    training_image(size), effective_peak, cfg)
        return cache[key]

    return provider


def run_experiment(clean, peaks, realizations, methods, cfg=None,
                   image_name="image", dictionary_provider=None):
    """PSNR table over (peak, realization, method) cells.

    Every cell gets its own derived seed, so rows are reproducible in
    isolation. Returns per-cell row dicts plus one averaged row per
    (peak, method), realization column "avg".
    """
    cfg = (cfg if cfg is not None else SpdaConfig()).validate()
    clean = check_image(clean, "clean")
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
    if realizations < 1:
        raise ValueError("need at least one realization")
    provider = dictionary_provider or _dictionary_provider(clean, cfg)

    rows = []
    for peak in peaks:
        if peak <= 0:
            raise ValueError("peak must be > 0")
        ref = scale_to_peak(clean, peak)
        for real in range(realizations):
            noisy = sample_poisson(ref, derive_seed(cfg.seed, peak, real))
            for method in methods:
                start = time.perf_counter()
                if method == "anscombe-identity":
                    out = anscombe_inverse(anscombe_forward(noisy))
                elif method == "spda":
                    out = spda_denoise(noisy, provider(peak), cfg).output
                else:
                    eff = peak * cfg.bin_factor ** 2
                    out = spda_denoise_binned(noisy, provider(eff), cfg).output
                rows.append({
                    "image": image_name, "peak": float(peak),
                    "realization": real, "method": method,
                    "psnr_db": psnr(ref, out),
                    "seconds": time.perf_counter() - start,
                })
    for peak in peaks:
        for method in methods:
            cell = [r for r in rows
                    if r["peak"] == peak and r["method"] == method
                    and r["realization"] != "avg"]
            rows.append({
                "image": image_name, "peak": float(peak),
                "realization": "avg", "method": method,
                "psnr_db": float(np.mean([r["psnr_db"] for r in cell])),
                "seconds": float(np.mean([r["seconds"] for r in cell])),
            })
    return rows

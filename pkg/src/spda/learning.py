"""Dictionary learning for the exponential patch model.

One learning round alternates two blocks a fixed number of times. The
coefficient block refits every group's coefficients on its frozen support
(skipped in "simple" mode). The dictionary block updates the dictionary by
damped Newton over its pixel rows: with all supports and coefficients
frozen, the fit objective decouples across rows r into

    f_r(d_r) = sum_i exp(<d_r|T_i, a_i>) - q_i[r] <d_r|T_i, a_i>

so each row gets its own Newton system, assembled from per-group blocks
(every group touches only its support's entries of the row). Armijo
backtracking keeps each row's objective non-increasing, and therefore the
total objective never increases across alternations. After the round the
columns are rescaled to unit norm, with coefficients compensated so every
product D_T a is preserved.
"""

from __future__ import annotations

import numpy as np

from .model import (ARMIJO_C, EXP_CLAMP, MAX_BACKTRACKS, RIDGE, GroupCode,
                    SolverError, _clamped_exp, _objective_cols,
                    solve_fixed_support)

# Cap on the row-Hessian buffer (floats) when chunking rows of wide
# dictionaries; keeps the n=400 full profile under ~200 MB.
_HESS_BUDGET = 2.5e7


def atom_usage(codes, n_atoms):
    """How many groups reference each atom."""
    usage = np.zeros(n_atoms, dtype=int)
    for code in codes:
        usage[code.support] += 1
    return usage


def prune_unused_atoms(dictionary, codes):
    """Drop atoms referenced by no support and remap the survivors.

    Relative atom order is preserved, so remapped supports and coefficients
    reproduce the exact same estimates. Returns (dictionary, codes, kept).
    """
    dictionary = np.asarray(dictionary, dtype=np.float64)
    usage = atom_usage(codes, dictionary.shape[1])
    kept = np.flatnonzero(usage > 0)
    if kept.size == 0:
        raise ValueError("pruning would empty the dictionary")
    if kept.size == dictionary.shape[1]:
        return dictionary, [c.copy() for c in codes], kept
    remap = -np.ones(dictionary.shape[1], dtype=int)
    remap[kept] = np.arange(kept.size)
    new_codes = [GroupCode(remap[c.support], c.coeffs.copy()) for c in codes]
    return dictionary[:, kept].copy(), new_codes, kept


def _group_values(dictionary, codes, group_patches):
    """Per-row objective vector f (length d) summed over all groups."""
    f_rows = np.zeros(dictionary.shape[0])
    for code, patches in zip(codes, group_patches):
        z = dictionary[:, code.support] @ code.coeffs
        f_rows += _clamped_exp(z).sum(axis=1) - np.einsum("dl,dl->d",
                                                          patches, z)
    return f_rows


def _row_newton_step(dictionary, codes, group_patches, f_rows, grad_tol):
    """One damped Newton update of every dictionary row. Returns (D, f)."""
    d, n = dictionary.shape
    grad = np.zeros((d, n))
    exps = []
    for code, patches in zip(codes, group_patches):
        z = dictionary[:, code.support] @ code.coeffs
        e = _clamped_exp(z)
        exps.append(e)
        grad[:, code.support] += (e - patches) @ code.coeffs.T

    if np.abs(grad).max() <= grad_tol:
        return dictionary, f_rows, False

    delta = np.empty((d, n))
    chunk = max(1, int(_HESS_BUDGET // (n * n)))
    diag = np.arange(n)
    for start in range(0, d, chunk):
        stop = min(d, start + chunk)
        hess = np.zeros((stop - start, n, n))
        for code, e in zip(codes, exps):
            block = np.einsum("ti,ri,si->rts", code.coeffs,
                              e[start:stop], code.coeffs)
            hess[:, code.support[:, None], code.support[None, :]] += block
        hess[:, diag, diag] += RIDGE
        delta[start:stop] = np.linalg.solve(
            hess, -grad[start:stop, :, None])[..., 0]

    slope = np.einsum("rn,rn->r", grad, delta)
    step = np.ones(d)
    accepted = np.zeros(d, dtype=bool)
    f_try = f_rows
    for _ in range(MAX_BACKTRACKS + 1):
        trial = dictionary + step[:, None] * delta
        f_try = _group_values(trial, codes, group_patches)
        accepted = f_try <= f_rows + ARMIJO_C * step * slope
        if accepted.all():
            break
        step = np.where(accepted, step, 0.5 * step)
    step = np.where(accepted, step, 0.0)
    new_dict = dictionary + step[:, None] * delta
    f_new = np.where(accepted, f_try, f_rows)
    if np.any(f_new > f_rows):
        raise SolverError("row update increased the objective")
    return new_dict, f_new, True


def dictionary_learning_round(dictionary, codes, group_patches, iters,
                              mode="advanced", coeff_newton_iters=3,
                              row_newton_iters=3, grad_tol=1e-6):
    """Run `iters` alternations of (coefficient step, dictionary step).

    mode "advanced" refits coefficients before each dictionary step; mode
    "simple" only moves the dictionary. The total objective is checked to be
    non-increasing across alternations (1e-9 relative tolerance). Returns
    (dictionary, codes) as fresh objects, columns renormalized to unit norm
    with coefficients rescaled to compensate.
    """
    if iters < 1:
        raise ValueError("at least one alternation is required")
    if mode not in ("advanced", "simple"):
        raise ValueError(f"unknown learning mode {mode!r}")
    if len(codes) != len(group_patches):
        raise ValueError("codes and group patches must align")
    dictionary = np.array(dictionary, dtype=np.float64)
    codes = [c.copy() for c in codes]

    total = _group_values(dictionary, codes, group_patches).sum()
    for _ in range(int(iters)):
        if mode == "advanced":
            for gi, (code, patches) in enumerate(zip(codes, group_patches)):
                codes[gi] = solve_fixed_support(
                    dictionary, code.support, patches,
                    warm_start=code.coeffs, max_iters=coeff_newton_iters,
                    grad_tol=grad_tol)
        f_rows = _group_values(dictionary, codes, group_patches)
        for _ in range(int(row_newton_iters)):
            dictionary, f_rows, moved = _row_newton_step(
                dictionary, codes, group_patches, f_rows, grad_tol)
            if not moved:
                break
        new_total = f_rows.sum()
        if new_total > total + 1e-9 * max(1.0, abs(total)):
            raise SolverError("learning alternation increased the objective")
        total = new_total

    return renormalize_columns(dictionary, codes)


def renormalize_columns(dictionary, codes):
    """Rescale every atom to unit norm, compensating in the coefficients.

    Products D_T @ alpha are preserved exactly (up to float rounding), so
    patch estimates do not move. Zero columns are left alone.
    """
    dictionary = np.array(dictionary, dtype=np.float64)
    codes = [c.copy() for c in codes]
    norms = np.linalg.norm(dictionary, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    dictionary = dictionary / safe
    for code in codes:
        code.coeffs *= safe[code.support][:, None]
    return dictionary, codes


def objective_value(dictionary, codes, group_patches):
    """Total fit objective of a coded patch set under `dictionary`."""
    return float(_group_values(dictionary, codes, group_patches).sum())


def _dct_basis(side):
    f = np.arange(side)[:, None]
    x = np.arange(side)[None, :]
    basis = np.cos(np.pi * (2 * x + 1) * f / (2 * side))
    basis *= np.sqrt(np.where(f == 0, 1.0, 2.0) / side)
    return basis


def init_dictionary_dct(patch_side):
    """Square initial dictionary from a separable 2-D DCT basis.

    Atoms are mapped elementwise through v -> sign(v) * log(|v| + 0.01) and
    column-normalized. Keeping the sign preserves the atoms' oscillation
    patterns and keeps the collection full rank; dropping it would collapse
    the constant-magnitude atoms onto each other.
    """
    side = int(patch_side)
    if side < 2:
        raise ValueError("patch_side must be >= 2")
    basis = _dct_basis(side).T              # columns are 1-D basis vectors
    atoms = np.kron(basis, basis)           # column-major patch stacking
    atoms = np.sign(atoms) * np.log(np.abs(atoms) + 0.01)
    return atoms / np.linalg.norm(atoms, axis=0)


def peak_bucket(peak):
    """Training peak for a requested peak: one of 0.2, 2 or 18."""
    if peak <= 0:
        raise ValueError("peak must be > 0")
    if peak <= 0.2:
        return 0.2
    if peak <= 4.0:
        return 2.0
    return 18.0


def train_initial_dictionary(clean_img, peak, cfg=None):
    """Train a starting dictionary on a clean image, no noise involved.

    The image is scaled to the bucketed peak and fed through the full
    denoising pipeline as if it were the noisy input; the dictionary that
    falls out adapts the generic DCT start to the intensity scale.
    """
    from . import pipeline  # deferred: pipeline imports this module

    from .images import check_image, scale_to_peak

    clean = check_image(clean_img, "clean")
    if clean.max() == clean.min():
        raise ValueError("training image must not be constant")
    cfg = cfg if cfg is not None else pipeline.SpdaConfig()
    scaled = scale_to_peak(clean, peak_bucket(peak))
    start = init_dictionary_dct(cfg.patch_side)
    report = pipeline.spda_denoise(scaled, start, cfg)
    return report.dictionary

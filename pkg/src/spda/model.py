"""The exponential sparse patch model and its fixed-support Newton solver.

A patch of counts q (length d) is modeled as exp(D_T a) where D_T holds the
dictionary columns of the shared support T and a is the coefficient vector.
The fit objective per patch is

    sum(exp(D_T a)) - q . (D_T a)

which is smooth and convex in a. The solver is damped Newton with Armijo
backtracking; Hessians carry a small ridge so the linear systems stay
positive definite even for degenerate supports.

Exponent arguments are clamped at EXP_CLAMP before exponentiation; the clamp
firing raises a warning, and non-finite objective values raise
NumericalOverflowError naming the offending patch.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

EXP_CLAMP = 50.0
RIDGE = 1e-6
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 30


class NumericalOverflowError(ArithmeticError):
    pass


class SolverError(RuntimeError):
    """The internal monotonicity contract was violated."""


@dataclass
class GroupCode:
    """Shared support plus per-patch coefficients for one patch group."""

    support: np.ndarray        # atom indices, admission order
    coeffs: np.ndarray         # |T| x group_size

    def copy(self):
        return GroupCode(self.support.copy(), self.coeffs.copy())


def _clamped_exp(z):
    if np.any(z > EXP_CLAMP):
        warnings.warn("exponent clamped at %g to avoid overflow" % EXP_CLAMP,
                      RuntimeWarning, stacklevel=3)
        return np.exp(np.minimum(z, EXP_CLAMP))
    return np.exp(z)


def _objective_cols(mats, coeffs, targets):
    """Per-column objective for stacked problems.

    mats: (B, d, t) design matrices; coeffs: (B, t, L); targets: (d, L)
    shared across the stack. Returns (B, L).
    """
    z = np.matmul(mats, coeffs)
    vals = _clamped_exp(z).sum(axis=1) - np.einsum("dl,bdl->bl", targets, z)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise NumericalOverflowError(
            f"non-finite objective for patch {int(bad[-1])}")
    return vals


def _newton_descend(mats, coeffs, targets, max_iters, grad_tol=1e-6,
                    trace=None):
    """Damped Newton on every (stack, column) problem independently.

    Columns stop once their gradient infinity-norm drops to grad_tol.
    Armijo backtracking (halving, at most MAX_BACKTRACKS) guarantees the
    per-column objective never increases; a failed line search leaves the
    column where it was. Returns (coeffs, objective values (B, L)).
    """
    B, d, t = mats.shape
    L = targets.shape[1]
    mats_t = np.swapaxes(mats, 1, 2)
    diag = np.arange(t)
    f = _objective_cols(mats, coeffs, targets)
    if trace is not None:
        trace.append(f.sum())
    for _ in range(max_iters):
        z = np.matmul(mats, coeffs)
        w = _clamped_exp(z)
        grad = np.matmul(mats_t, w - targets)              # (B, t, L)
        active = np.abs(grad).max(axis=1) > grad_tol        # (B, L)
        if not active.any():
            break
        wm = w[:, :, :, None] * mats[:, :, None, :]         # (B, d, L, t)
        hess = np.matmul(mats_t[:, None], np.swapaxes(wm, 1, 2))  # (B, L, t, t)
        hess[..., diag, diag] += RIDGE
        grad_cols = np.swapaxes(grad, 1, 2)                 # (B, L, t)
        delta = np.linalg.solve(hess, -grad_cols[..., None])[..., 0]
        slope = np.einsum("blt,blt->bl", grad_cols, delta)  # < 0 on active
        step = np.where(active, 1.0, 0.0)
        accepted = ~active
        f_try = f
        for _ in range(MAX_BACKTRACKS + 1):
            trial = coeffs + np.swapaxes(step[..., None] * delta, 1, 2)
            f_try = _objective_cols(mats, trial, targets)
            accepted = f_try <= f + ARMIJO_C * step * slope
            needs_cut = active & ~accepted
            if not needs_cut.any():
                break
            step = np.where(needs_cut, 0.5 * step, step)
        moved = active & accepted
        step = np.where(moved, step, 0.0)
        coeffs = coeffs + np.swapaxes(step[..., None] * delta, 1, 2)
        f_new = np.where(moved, f_try, f)
        if np.any(f_new > f):
            raise SolverError("objective increased within a Newton solve")
        f = f_new
        if trace is not None:
            trace.append(f.sum())
    return coeffs, f


def objective(dict_cols, coeffs, patches):
    """Group objective: sum over patches of sum(exp(D_T a)) - q . (D_T a)."""
    mats, coeffs, targets = _as_group(dict_cols, coeffs, patches)
    return float(_objective_cols(mats, coeffs, targets).sum())


def gradient(dict_cols, alpha, patch):
    """Per-patch gradient D_T' (exp(D_T a) - q)."""
    dict_cols = np.asarray(dict_cols, dtype=np.float64)
    z = dict_cols @ np.asarray(alpha, dtype=np.float64)
    return dict_cols.T @ (_clamped_exp(z) - np.asarray(patch, dtype=np.float64))


def hessian(dict_cols, alpha, patch=None):
    """Per-patch Hessian D_T' diag(exp(D_T a)) D_T plus the ridge."""
    dict_cols = np.asarray(dict_cols, dtype=np.float64)
    z = dict_cols @ np.asarray(alpha, dtype=np.float64)
    h = (dict_cols * _clamped_exp(z)[:, None]).T @ dict_cols
    return h + RIDGE * np.eye(dict_cols.shape[1])


def _as_group(dict_cols, coeffs, patches):
    mats = np.asarray(dict_cols, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    targets = np.asarray(patches, dtype=np.float64)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    if targets.ndim == 1:
        targets = targets[:, None]
    if mats.shape[0] != targets.shape[0]:
        raise ValueError("patch length does not match dictionary rows")
    if mats.shape[1] != coeffs.shape[0]:
        raise ValueError("coefficient count does not match support size")
    if coeffs.shape[1] != targets.shape[1]:
        raise ValueError("coefficient columns do not match patch count")
    return mats[None], coeffs[None], targets


def solve_fixed_support(dictionary, support, patches, warm_start=None,
                        max_iters=5, grad_tol=1e-6, return_trace=False):
    """Fit coefficients for one group on a fixed support.

    patches: d x L column-stacked group; warm_start: |T| x L initial
    coefficients (zeros when omitted). Returns a GroupCode; with
    return_trace=True also returns the per-iteration group objective.
    """
    dictionary = np.asarray(dictionary, dtype=np.float64)
    support = np.atleast_1d(np.asarray(support, dtype=int))
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim == 1:
        patches = patches[:, None]
    if support.size == 0:
        raise ValueError("support must be non-empty")
    if support.min() < 0 or support.max() >= dictionary.shape[1]:
        raise ValueError("support index out of range")
    if len(set(support.tolist())) != support.size:
        raise ValueError("support contains duplicate atoms")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    sub = dictionary[:, support]
    if warm_start is None:
        coeffs = np.zeros((support.size, patches.shape[1]))
    else:
        coeffs = np.array(warm_start, dtype=np.float64)
        if coeffs.shape != (support.size, patches.shape[1]):
            raise ValueError("warm start shape mismatch")
    trace = [] if return_trace else None
    coeffs, _ = _newton_descend(sub[None], coeffs[None], patches, max_iters,
                                grad_tol, trace=trace)
    code = GroupCode(support=support.copy(), coeffs=coeffs[0])
    if return_trace:
        return code, np.array(trace)
    return code

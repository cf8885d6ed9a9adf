"""Greedy joint-sparse pursuit for patch groups.

All patches of a group share one support. Each iteration scores every atom
outside the current support by solving the extended fixed-support problem a
few Newton steps from a warm start, admits the best-scoring atom (ties go to
the lowest index), then refits the enlarged support more thoroughly. With
oracle patches available, pursuit stops itself: once the summed squared
error of the group estimates against the oracle goes up, the previous
iterate is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EXP_CLAMP, GroupCode, _newton_descend, solve_fixed_support

# Near-ties between candidate scores are resolved toward the lower atom
# index; exact float equality would make the rule dead code.
TIE_RTOL = 1e-9


@dataclass
class PursuitResult:
    code: GroupCode
    estimates: np.ndarray      # d x group_size, strictly positive
    objective: float           # group objective at the final support
    iterations_used: int
    stopped_by: str            # "cardinality" or "bootstrap"


def _score_candidates(dictionary, support, candidates, patches, warm,
                      max_iters, grad_tol):
    """Objective reached per candidate after a short warm-started solve."""
    n_cand = candidates.size
    t_new = len(support) + 1
    mats = np.empty((n_cand, patches.shape[0], t_new))
    mats[:, :, :-1] = dictionary[:, support]
    mats[:, :, -1] = dictionary[:, candidates].T
    coeffs = np.zeros((n_cand, t_new, patches.shape[1]))
    if warm is not None:
        coeffs[:, :-1, :] = warm
    coeffs, f = _newton_descend(mats, coeffs, patches, max_iters, grad_tol)
    return f.sum(axis=1)


def score_atom(dictionary, support, candidate, patches, warm_start=None,
               max_iters=5, grad_tol=1e-6):
    """Score one candidate atom: the objective after extending the support.

    The solve is warm-started from `warm_start` (the current support's
    coefficients) with the new atom's coefficient at zero.
    """
    dictionary = np.asarray(dictionary, dtype=np.float64)
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim == 1:
        patches = patches[:, None]
    support = [int(a) for a in np.atleast_1d(support)] if support is not None else []
    if int(candidate) in support:
        raise ValueError("candidate already in support")
    scores = _score_candidates(dictionary, support,
                               np.array([int(candidate)]), patches,
                               warm_start, max_iters, grad_tol)
    return float(scores[0])


def greedy_pursuit_group(dictionary, patches, k, oracle_patches=None,
                         scoring_iters=5, refit_iters=25, grad_tol=1e-6):
    """Greedy support growth for one group, up to cardinality k.

    oracle_patches: same-shape matrix of reference patches. When given, the
    bootstrapped stop compares the summed squared estimate error against the
    previous iteration and rolls back one step on the first increase.
    """
    dictionary = np.asarray(dictionary, dtype=np.float64)
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim == 1:
        patches = patches[:, None]
    d, n = dictionary.shape
    if patches.shape[0] != d:
        raise ValueError("patch length does not match dictionary rows")
    k = int(k)
    if k < 1:
        raise ValueError("target cardinality must be >= 1")
    if k > n:
        raise ValueError(f"cardinality {k} exceeds dictionary width {n}")
    if oracle_patches is not None:
        oracle_patches = np.asarray(oracle_patches, dtype=np.float64)
        if oracle_patches.shape != patches.shape:
            raise ValueError("oracle patches must match the group shape")

    support = []
    coeffs = None
    previous = None
    result = None
    for _ in range(k):
        candidates = np.setdiff1d(np.arange(n), np.array(support, dtype=int))
        if candidates.size == 0:
            break
        scores = _score_candidates(dictionary, support, candidates, patches,
                                   coeffs, scoring_iters, grad_tol)
        best = scores.min()
        pick = int(candidates[np.flatnonzero(
            scores <= best + TIE_RTOL * (1.0 + abs(best)))[0]])
        support.append(pick)
        warm = np.zeros((len(support), patches.shape[1]))
        if coeffs is not None:
            warm[:-1] = coeffs
        code = solve_fixed_support(dictionary, support, patches,
                                   warm_start=warm, max_iters=refit_iters,
                                   grad_tol=grad_tol)
        coeffs = code.coeffs
        sub = dictionary[:, support]
        estimates = np.exp(np.minimum(sub @ coeffs, EXP_CLAMP))
        obj = _group_objective(sub, coeffs, patches)
        result = PursuitResult(code=code, estimates=estimates, objective=obj,
                               iterations_used=len(support),
                               stopped_by="cardinality")
        if oracle_patches is not None:
            err = float(((estimates - oracle_patches) ** 2).sum())
            if previous is not None and err > previous[0]:
                rollback = previous[1]
                rollback.stopped_by = "bootstrap"
                return rollback
            previous = (err, result)
    return result


def _group_objective(sub, coeffs, patches):
    z = sub @ coeffs
    return float(np.exp(np.minimum(z, EXP_CLAMP)).sum()
                 - np.einsum("dl,dl->", patches, z))

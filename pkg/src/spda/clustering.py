"""Patch grouping by distance to a running pivot.

The image is smoothed with a small kernel, patches of the smoothed image are
compared by squared euclidean distance, and groups are grown greedily: the
global pivot is the patch with the smallest smoothed norm, each group admits
nearest patches while it is below the size floor `l` or while the distance
gap to the previously admitted patch stays within epsilon^2, and the first
candidate that fails admission seeds the next group. A trailing group
smaller than l is merged into its predecessor, so every group ends up with
at least l members. Ties always resolve to the lowest patch index.
"""

from __future__ import annotations

import numpy as np

from .images import check_image, convolve_same, extract_patches


def group_patches(img, patch_side, group_floor, kernel=None, epsilon=0.0):
    """Partition patch indices of `img` into groups of size >= group_floor.

    kernel: smoothing kernel applied before distances are measured; None
    means no smoothing (identity kernel). epsilon: slack on the distance gap
    that lets a full group keep admitting near-duplicates.

    Returns a list of int arrays (admission order) that together cover every
    patch index exactly once.
    """
    img = check_image(img, nonneg=False)
    l = int(group_floor)
    if l < 1:
        raise ValueError("group size floor must be >= 1")
    smooth = img if kernel is None else convolve_same(img, kernel)
    feats = extract_patches(smooth, patch_side).data
    n = feats.shape[1]
    if n < l:
        raise ValueError(f"only {n} patches but group floor is {l}")
    sq_norms = np.einsum("dj,dj->j", feats, feats)
    eps_sq = float(epsilon) ** 2

    alive = np.ones(n, dtype=bool)
    remaining = n
    pivot = int(np.argmin(sq_norms))
    prev = pivot  # distance reference for the gap test, carried across groups
    groups = []
    while remaining:
        diff = feats - feats[:, pivot : pivot + 1]
        dist = np.einsum("dj,dj->j", diff, diff)
        masked = np.where(alive, dist, np.inf)
        cand = int(np.argmin(masked))
        members = []
        while len(members) <= l or abs(dist[cand] - dist[prev]) <= eps_sq:
            members.append(cand)
            alive[cand] = False
            remaining -= 1
            prev = cand
            if remaining == 0:
                break
            masked[cand] = np.inf
            cand = int(np.argmin(masked))
        groups.append(np.array(members, dtype=int))
        pivot = cand  # first candidate that failed admission
    if len(groups) > 1 and groups[-1].size < l:
        tail = groups.pop()
        groups[-1] = np.concatenate([groups[-1], tail])
    if len(groups) == 1 and groups[0].size < l:
        raise ValueError("cannot form a group of the required size")
    return groups

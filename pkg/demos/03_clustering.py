"""Grouping similar patches before coding them jointly.

At low photon counts a single patch carries almost no information, so the
model is fit per *group*: similar patches share one sparse support. The
grouping walks a pivot through the patch cloud, admitting nearest
neighbours until the group is full, then reseeds the pivot from the first
reject. Distances are measured on a Gaussian-smoothed copy of the image so
that raw shot noise does not dominate the metric.
"""

import numpy as np

from spda import gaussian_kernel, group_patches, sample_poisson, scale_to_peak
from spda.testimages import ridges

clean = scale_to_peak(ridges(64), 2.0)
noisy = sample_poisson(clean, seed=11)

for kernel, label in ((None, "raw counts"),
                      (gaussian_kernel(7, 1.5), "7x7 Gaussian smoothed")):
    groups = group_patches(noisy, 8, 10, kernel=kernel, epsilon=0.0)
    sizes = sorted(len(g) for g in groups)
    print(f"{label:24s}: {len(groups)} groups, sizes "
          f"min {sizes[0]} / median {sizes[len(sizes) // 2]} / max {sizes[-1]}")

# Groups are a partition: disjoint and covering, each at least the floor.
groups = group_patches(noisy, 8, 10, kernel=gaussian_kernel(7, 1.5))
flat = np.concatenate(groups)
print(f"\npartition check: {len(flat)} indices, "
      f"{len(np.unique(flat))} unique, floor ok: "
      f"{all(len(g) >= 10 for g in groups)}")

# Grouping should gather patches of similar brightness: the spread of
# patch means inside a group is much smaller than across the whole image.
from spda import extract_patches

pm = extract_patches(noisy, 8)
means = pm.data.mean(axis=0)
within = np.median([means[g].std() for g in groups])
print(f"patch-mean std: {means.std():.3f} across the image, "
      f"{within:.3f} median within a group")

"""Image utilities: patch extraction and re-projection, convolution, binning,
peak scaling and PSNR.

Images are 2-D float64 arrays of finite, nonnegative intensities. Patches are
column-stacked (column-major within the patch) into a d x N matrix with one
column per patch; anchors are enumerated column-major over the image, so for
an image with ar = rows - side + 1 anchor rows, patch j sits at
(j % ar, j // ar).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


def check_image(img, name="image", nonneg=True):
    """Coerce to a 2-D float64 array and validate basic invariants."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if nonneg and arr.min() < 0:
        raise ValueError(f"{name} contains negative values")
    return arr


@dataclass
class PatchMatrix:
    """Column-stacked patches plus their top-left anchors.

    data: d x N matrix, one column per patch (column-major within the patch).
    positions: N x 2 integer array of (row, col) anchors.
    patch_shape: (height, width) of a single patch; extraction always yields
    square patches but re-projection accepts any shape.
    """

    data: np.ndarray
    positions: np.ndarray
    patch_shape: tuple

    @property
    def n_patches(self):
        return self.data.shape[1]


def extract_patches(img, patch_side):
    """Extract every overlapping patch_side x patch_side patch (stride 1)."""
    img = check_image(img)
    side = int(patch_side)
    rows, cols = img.shape
    if side < 1:
        raise ValueError("patch_side must be >= 1")
    if side > min(rows, cols):
        raise ValueError(f"patch side {side} exceeds image dimensions {img.shape}")
    ar, ac = rows - side + 1, cols - side + 1
    win = np.lib.stride_tricks.sliding_window_view(img, (side, side))
    # axes (r, c, pr, pc) -> (pr, pc, r, c); Fortran reshape then gives
    # within-patch index pr + side*pc and anchor index r + ar*c.
    data = win.transpose(2, 3, 0, 1).reshape(side * side, ar * ac, order="F")
    positions = np.column_stack(
        (np.tile(np.arange(ar), ac), np.repeat(np.arange(ac), ar))
    )
    return PatchMatrix(data=np.ascontiguousarray(data), positions=positions,
                       patch_shape=(side, side))


def reproject_average(patches, rows, cols):
    """Average patch entries back onto a rows x cols grid.

    Every output pixel is the arithmetic mean of all patch entries that map
    to it. Raises if some pixel is covered by no patch (possible when the
    patch set is partial).
    """
    data = np.asarray(patches.data, dtype=np.float64)
    pos = np.asarray(patches.positions)
    ph, pw = patches.patch_shape
    if data.shape[0] != ph * pw:
        raise ValueError("patch data rows do not match patch_shape")
    if pos.shape != (data.shape[1], 2):
        raise ValueError("positions shape inconsistent with patch count")
    if pos.min() < 0 or (pos[:, 0] + ph).max() > rows or (pos[:, 1] + pw).max() > cols:
        raise ValueError("patch anchor out of bounds")

    pr = np.tile(np.arange(ph), pw)        # within-patch row, column-major
    pc = np.repeat(np.arange(pw), ph)
    pix_r = pos[:, 0][None, :] + pr[:, None]   # d x N
    pix_c = pos[:, 1][None, :] + pc[:, None]
    flat = (pix_r * cols + pix_c).ravel()

    acc = np.zeros(rows * cols)
    cnt = np.zeros(rows * cols)
    np.add.at(acc, flat, data.ravel())
    np.add.at(cnt, flat, 1.0)
    if cnt.min() == 0:
        bad = int(np.flatnonzero(cnt == 0)[0])
        raise ValueError(f"pixel ({bad // cols}, {bad % cols}) covered by no patch")
    return (acc / cnt).reshape(rows, cols)


def scale_to_peak(img, peak):
    """Rescale so the maximum pixel equals `peak` exactly."""
    img = check_image(img)
    if peak <= 0:
        raise ValueError("peak must be > 0")
    top = img.max()
    if top == 0:
        raise ValueError("cannot scale an all-zero image")
    out = img * (peak / top)
    out[img == top] = peak  # pin the max exactly despite rounding
    return out


def psnr(reference, estimate):
    """10*log10(peak(reference)^2 / MSE); +inf when the images coincide.

    Scored on raw (unclipped) values.
    """
    ref = check_image(reference, "reference", nonneg=False)
    est = check_image(estimate, "estimate", nonneg=False)
    if ref.shape != est.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {est.shape}")
    mse = np.mean((ref - est) ** 2)
    if mse == 0:
        return np.inf
    peak = ref.max()
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(peak * peak / mse))


def convolve_same(img, kernel):
    """Same-size 2-D convolution with replicate border padding."""
    img = check_image(img, nonneg=False)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2:
        raise ValueError("kernel must be 2-D")
    if kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got {kernel.shape}")
    return ndimage.convolve(img, kernel, mode="nearest")


def gaussian_kernel(side=7, sigma=1.5):
    """Odd-sided 2-D Gaussian kernel, normalized to sum 1."""
    if side < 1 or side % 2 == 0:
        raise ValueError("kernel side must be odd and positive")
    r = np.arange(side) - side // 2
    g = np.exp(-0.5 * (r / sigma) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def bin_image(img, factor=3):
    """Sum factor x factor blocks after replicate-padding to divisible dims."""
    img = check_image(img)
    factor = int(factor)
    if factor < 2:
        raise ValueError("bin factor must be >= 2")
    rows, cols = img.shape
    pad_r = (-rows) % factor
    pad_c = (-cols) % factor
    if pad_r or pad_c:
        img = np.pad(img, ((0, pad_r), (0, pad_c)), mode="edge")
    r2, c2 = img.shape
    return img.reshape(r2 // factor, factor, c2 // factor, factor).sum(axis=(1, 3))


def upscale_bilinear(img, factor, out_rows, out_cols):
    """Bilinear upscale with edge clamping, divided by factor**2.

    The division undoes the intensity gain of block summation so the result
    sits on the pre-binning scale.
    """
    img = check_image(img, nonneg=False)
    factor = int(factor)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if out_rows < img.shape[0] or out_cols < img.shape[1]:
        raise ValueError("output dimensions must not shrink the image")
    in_r = np.clip((np.arange(out_rows) + 0.5) / factor - 0.5, 0, img.shape[0] - 1)
    in_c = np.clip((np.arange(out_cols) + 0.5) / factor - 0.5, 0, img.shape[1] - 1)
    r0 = np.floor(in_r).astype(int)
    c0 = np.floor(in_c).astype(int)
    r1 = np.minimum(r0 + 1, img.shape[0] - 1)
    c1 = np.minimum(c0 + 1, img.shape[1] - 1)
    wr = (in_r - r0)[:, None]
    wc = (in_c - c0)[None, :]
    out = ((1 - wr) * (1 - wc) * img[np.ix_(r0, c0)]
           + (1 - wr) * wc * img[np.ix_(r0, c1)]
           + wr * (1 - wc) * img[np.ix_(r1, c0)]
           + wr * wc * img[np.ix_(r1, c1)])
    return out / float(factor * factor)

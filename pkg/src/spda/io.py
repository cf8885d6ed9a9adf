"""File formats: PGM images (P2/P5, 8- and 16-bit), plain-text float grids,
dictionary matrices and the results CSV."""

from __future__ import annotations

import csv

import numpy as np

CSV_HEADER = ["image", "peak", "realization", "method", "psnr_db", "seconds"]


def _pgm_tokens(raw):
    # Header tokens with '#' comments stripped, per the netpbm grammar.
    pos = 0
    while True:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace() and raw[pos : pos + 1] != b"#":
            pos += 1
        if pos == start:
            raise ValueError("truncated PGM header")
        yield raw[start:pos], pos


def read_pgm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    toks = _pgm_tokens(raw)
    magic, _ = next(toks)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a PGM file (magic {magic!r})")
    (w, _), (h, _), (maxval, end) = next(toks), next(toks), next(toks)
    w, h, maxval = int(w), int(h), int(maxval)
    if w <= 0 or h <= 0 or not (0 < maxval < 65536):
        raise ValueError("bad PGM dimensions or maxval")
    if magic == b"P5":
        data = raw[end + 1 :]  # single whitespace byte after maxval
        if maxval < 256:
            pix = np.frombuffer(data[: w * h], dtype=np.uint8)
        else:
            pix = np.frombuffer(data[: 2 * w * h], dtype=">u2")
        if pix.size != w * h:
            raise ValueError("truncated PGM pixel data")
    else:
        vals = raw[end:].split()
        if len(vals) < w * h:
            raise ValueError("truncated PGM pixel data")
        pix = np.array([int(v) for v in vals[: w * h]])
    if pix.max(initial=0) > maxval:
        raise ValueError("PGM sample exceeds maxval")
    return pix.reshape(h, w).astype(np.float64)


def write_pgm(path, img, plain=False):
    """Write a PGM; values are rounded to nearest integer and clipped at 0.

    16-bit samples (big-endian) are used when the maximum exceeds 255.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("image must be 2-D")
    vals = np.clip(np.rint(arr), 0, None).astype(np.int64)
    maxval = int(max(1, vals.max()))
    if maxval > 65535:
        raise ValueError(f"maximum value {maxval} exceeds 16-bit PGM range")
    h, w = vals.shape
    if plain:
        lines = [f"P2\n{w} {h}\n{maxval}\n"]
        for row in vals:
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        data = "".join(lines).encode("ascii")
    else:
        dtype = np.uint8 if maxval < 256 else ">u2"
        data = f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + vals.astype(dtype).tobytes()
    with open(path, "wb") as fh:
        fh.write(data)


def read_float_grid(path):
    with open(path, "r") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("truncated float grid file")
    rows, cols = int(tokens[0]), int(tokens[1])
    if rows <= 0 or cols <= 0 or len(tokens) != 2 + rows * cols:
        raise ValueError("float grid size mismatch")
    return np.array([float(t) for t in tokens[2:]]).reshape(rows, cols)


def write_float_grid(path, img):
    """Text grid "rows cols" plus one line per row; lossless for float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("image must be 2-D")
    with open(path, "w") as fh:
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_image(path):
    """Dispatch on extension: .pgm is netpbm, anything else is a float grid."""
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path)
    return read_float_grid(path)


def write_image(path, img):
    if str(path).lower().endswith(".pgm"):
        write_pgm(path, img)
    else:
        write_float_grid(path, img)


def read_dictionary(path):
    with open(path, "r") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("truncated dictionary file")
    d, n = int(tokens[0]), int(tokens[1])
    if d <= 0 or n <= 0 or len(tokens) != 2 + d * n:
        raise ValueError("dictionary size mismatch")
    return np.array([float(t) for t in tokens[2:]]).reshape(d, n)


def write_dictionary(path, dictionary):
    arr = np.asarray(dictionary, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("dictionary must be 2-D")
    with open(path, "w") as fh:
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def write_results_csv(path, rows, include_timings=False):
    """Write experiment rows under the fixed header.

    The seconds column is left empty unless include_timings is set: wall time
    is not deterministic, and the default output must be byte-identical across
    reruns with the same seed.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            psnr_db = row["psnr_db"]
            secs = row["seconds"] if include_timings else None
            seconds = "" if secs is None else f"{secs:.3f}"
            writer.writerow([
                row["image"],
                f"{row['peak']:g}",
                row["realization"],
                row["method"],
                "inf" if np.isinf(psnr_db) else f"{psnr_db:.6f}",
                seconds,
            ])

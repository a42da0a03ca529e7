"""Image and report serialization.

Images: binary PGM (P5, grayscale) and PPM (P6, RGB) with maxval 255, plus a
lossless raw format ("REDF") for multi-stage pipelines where 8-bit
quantization would destroy sub-integer perturbations. Reports: JSON with the
config echo and metrics; the per-query trace goes to an adjacent CSV.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormatError
from .image import ImageTensor

_RAW_MAGIC = b"REDF"


def _read_pnm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping whitespace and # comments."""
    while pos < len(data):
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ParseError("truncated netpbm header")
    return data[start:pos], pos


def _parse_pnm(data: bytes, channels: int, range_l: float, path) -> ImageTensor:
    pos = 2
    try:
        width_tok, pos = _read_pnm_token(data, pos)
        height_tok, pos = _read_pnm_token(data, pos)
        maxval_tok, pos = _read_pnm_token(data, pos)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except (ParseError, ValueError) as e:
        raise ParseError(f"{path}: bad netpbm header: {e}") from e
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise ParseError(f"{path}: bad dimensions {width}x{height}")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos : pos + width * height * channels]
    if len(raster) != width * height * channels:
        raise ParseError(f"{path}: raster truncated "
                         f"({len(raster)} of {width * height * channels} bytes)")
    arr = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    arr = arr.reshape(height, width, channels) * (range_l / 255.0)
    return ImageTensor(arr, range_l)


def _parse_raw(data: bytes, path) -> ImageTensor:
    header = struct.calcsize("<4sIIId")
    if len(data) < header:
        raise ParseError(f"{path}: truncated raw header")
    _, h, w, c, range_l = struct.unpack_from("<4sIIId", data, 0)
    if min(h, w, c) < 1:
        raise ParseError(f"{path}: bad raw dimensions {h}x{w}x{c}")
    if not range_l > 0:
        raise ParseError(f"{path}: bad raw dynamic range {range_l}")
    count = h * w * c
    if len(data) != header + 8 * count:
        raise ParseError(f"{path}: raw pixel payload truncated")
    pixels = np.frombuffer(data, dtype="<f8", count=count, offset=header)
    return ImageTensor(pixels.reshape(h, w, c), range_l)


def read_image(path, range_hint: float | None = None) -> ImageTensor:
    """Read a P5/P6/raw image; pixels land in [0, L] with L = range_hint.

    range_hint defaults to 1.0 (bytes scaled by 1/255); pass 255 to keep the
    integer scale. Raw files carry their own L and ignore the hint.
    """
    range_l = 1.0 if range_hint is None else float(range_hint)
    if not range_l > 0:
        raise ValueError(f"range_hint must be positive, got {range_hint}")
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] == _RAW_MAGIC:
        return _parse_raw(data, path)
    if data[:2] == b"P5":
        return _parse_pnm(data, 1, range_l, path)
    if data[:2] == b"P6":
        return _parse_pnm(data, 3, range_l, path)
    raise UnsupportedFormatError(f"{path}: not a P5/P6/raw image (magic {data[:4]!r})")


def write_image(path, img: ImageTensor) -> None:
    """Quantize to 8-bit (round-half-up) and write P5 or P6 by channel count."""
    h, w, c = img.shape
    if c == 1:
        magic = b"P5"
    elif c == 3:
        magic = b"P6"
    else:
        raise UnsupportedFormatError(f"netpbm needs 1 or 3 channels, image has {c}")
    scaled = np.floor(img.pixels * (255.0 / img.range) + 0.5)
    raster = np.clip(scaled, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(magic + b"\n" + f"{w} {h}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())


def write_raw(path, img: ImageTensor) -> None:
    """Write the lossless raw format; read_image round-trips it bit-exactly."""
    h, w, c = img.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIId", _RAW_MAGIC, h, w, c, img.range))
        fh.write(np.ascontiguousarray(img.pixels, dtype="<f8").tobytes())


def trace_path(report_path) -> Path:
    return Path(report_path).with_suffix(".trace.csv")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_report(path, result, config) -> None:
    """JSON report (config echo, queries, metrics, outcome) + adjacent trace CSV.

    Output is byte-deterministic for identical inputs: keys are sorted,
    floats use their shortest round-trip form, non-finite metric values
    become null, and nothing time- or host-dependent is written. The trace
    lands next to the report as <stem>.trace.csv with one row per query.
    """
    doc = {
        "config": {k: _json_safe(v) for k, v in dataclasses.asdict(config).items()},
        "queries_used": result.queries_used,
        "succeeded": result.succeeded,
        "best_label": result.best_label,
        "metrics": {
            "pert_norm": _json_safe(result.metrics.pert_norm),
            "ssim": _json_safe(result.metrics.ssim),
            "cc": _json_safe(result.metrics.cc),
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(trace_path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_index,best_l2_sq\n")
        for idx, best in result.trace:
            fh.write(f"{idx},{best!r}\n")

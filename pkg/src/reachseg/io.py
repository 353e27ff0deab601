"""Reading and writing images, geometry and configuration files.

Images are binary (P5) or ASCII (P2) graymaps. Row 0 of the file becomes row 0
of the raster, which sits at the lowest y of the grid; no vertical flip is
applied in either direction, so files round-trip unchanged.

Geometry is stored as JSON: a region is ``{"outer": [[x, y], ...], "holes":
[[[x, y], ...], ...]}`` and a segmentation is ``{"layers": [region, ...]}``
with layer 0 in front. Floats are written with ``repr`` precision so a
write/read cycle reproduces every coordinate exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .energy import LayeredSegmentation, overlap_decompose
from .errors import GeometryError, ParseError
from .geometry import ClosedCurve, Region, as_regions
from .raster import Grid, RasterImage

_WHITESPACE = b" \t\r\n\v\f"


# ---------------------------------------------------------------- PGM

class _HeaderReader:
    """Whitespace/comment-aware token reader over the start of a PNM file."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip(self):
        d = self.data
        while self.pos < len(d):
            c = d[self.pos:self.pos + 1]
            if c == b"#":
                end = d.find(b"\n", self.pos)
                self.pos = len(d) if end < 0 else end + 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                return

    def token(self, what: str) -> tuple[bytes, int]:
        self._skip()
        start = self.pos
        d = self.data
        while self.pos < len(d) and d[self.pos:self.pos + 1] not in _WHITESPACE \
                and d[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if self.pos == start:
            raise ParseError(f"missing {what}", start)
        return d[start:self.pos], start

    def integer(self, what: str, lo: int, hi: int) -> int:
        tok, at = self.token(what)
        if not tok.isdigit():
            raise ParseError(f"{what} must be a decimal integer, got {tok[:16]!r}", at)
        v = int(tok)
        if not lo <= v <= hi:
            raise ParseError(f"{what} {v} outside [{lo}, {hi}]", at)
        return v


def parse_pgm(data: bytes, pixel_size: float = 1.0, origin=(0.0, 0.0)) -> RasterImage:
    """Decode P2/P5 bytes into an image with values scaled to [0, 1]."""
    hdr = _HeaderReader(data)
    magic = data[:2]
    if magic in (b"P1", b"P3", b"P4", b"P6", b"P7"):
        raise ParseError(f"unsupported format {magic.decode()}: only grayscale P2 and P5 are read", 0)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"not a PGM file (magic {magic!r})", 0)
    hdr.pos = 2
    if hdr.pos < len(data) and data[hdr.pos:hdr.pos + 1] not in _WHITESPACE + b"#":
        raise ParseError("magic number must be followed by whitespace", 2)
    width = hdr.integer("width", 1, 1 << 24)
    height = hdr.integer("height", 1, 1 << 24)
    maxval = hdr.integer("maxval", 1, 65535)
    n = width * height
    if magic == b"P5":
        if hdr.pos >= len(data) or data[hdr.pos:hdr.pos + 1] not in _WHITESPACE:
            raise ParseError("expected one whitespace byte after maxval", hdr.pos)
        start = hdr.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(data) - start < need:
            raise ParseError(f"truncated payload: need {need} bytes, found {len(data) - start}",
                             len(data))
        vals = np.frombuffer(data, dtype=dtype, count=n, offset=start).astype(np.float64)
    else:
        vals = np.empty(n, dtype=np.float64)
        for i in range(n):
            try:
                vals[i] = hdr.integer("sample", 0, maxval)
            except ParseError as exc:
                if hdr.pos >= len(data):
                    raise ParseError(f"truncated payload: {i} of {n} samples", len(data)) from None
                raise exc
    if magic == b"P5" and vals.max(initial=0) > maxval:
        raise ParseError(f"sample exceeds maxval {maxval}", start)
    img = (vals / maxval).reshape(height, width)
    return RasterImage(img, Grid(width, height, pixel_size, origin))


def read_pgm(path, pixel_size: float = 1.0, origin=(0.0, 0.0)) -> RasterImage:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_pgm(data, pixel_size, origin)


def encode_pgm(values, maxval: int = 255) -> bytes:
    """P5 bytes for an array of values in [0, 1] (clipped), rounded to ``maxval`` levels."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("image must be two-dimensional")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval must lie in [1, 65535]")
    q = np.rint(np.clip(v, 0.0, 1.0) * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n{maxval}\n".encode("ascii")
    return header + q.astype(dtype).tobytes()


def write_pgm(path, image, maxval: int = 255) -> None:
    values = image.values if isinstance(image, RasterImage) else image
    Path(path).write_bytes(encode_pgm(values, maxval))


def label_levels(seg: LayeredSegmentation, frame) -> np.ndarray:
    """Integer gray levels: 0 for background, ``floor(255 i / (k + 1))`` on visible layer ``i``."""
    grid = frame.grid if isinstance(frame, RasterImage) else frame
    out = np.zeros(grid.shape, dtype=np.uint8)
    if seg.k == 0:
        return out
    masks, _ = overlap_decompose(seg, grid)
    for i, m in enumerate(masks, start=1):
        out[m] = math.floor(255 * i / (seg.k + 1))
    return out


def write_label_image(seg: LayeredSegmentation, frame, path) -> None:
    """Rasterized visible-part partition as a P5 image."""
    levels = label_levels(seg, frame)
    header = f"P5\n{levels.shape[1]} {levels.shape[0]}\n255\n".encode("ascii")
    try:
        Path(path).write_bytes(header + levels.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write label image {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------- geometry

def region_to_dict(region: Region) -> dict:
    return {"outer": region.outer.vertices.tolist(),
            "holes": [h.vertices.tolist() for h in region.holes]}


def _points(obj, where: str) -> np.ndarray:
    try:
        v = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: coordinates must be numbers") from None
    if v.ndim != 2 or v.shape[1] != 2:
        raise ParseError(f"{where}: expected a list of [x, y] pairs")
    return v


def region_from_dict(doc: dict, validate: bool = True) -> Region:
    if not isinstance(doc, dict) or "outer" not in doc:
        raise ParseError("region document needs an 'outer' field")
    unknown = set(doc) - {"outer", "holes"}
    if unknown:
        raise ParseError(f"unknown region fields: {', '.join(sorted(unknown))}")
    holes = doc.get("holes", [])
    if not isinstance(holes, list):
        raise ParseError("'holes' must be a list of curves")
    try:
        outer = ClosedCurve(_points(doc["outer"], "outer"), validate=validate)
        hs = tuple(ClosedCurve(_points(h, f"hole {i}"), validate=validate)
                   for i, h in enumerate(holes))
        return Region(outer, hs, validate=validate)
    except GeometryError as exc:
        raise ParseError(f"invalid region: {exc}") from None


def _load_json(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                         len(text[:exc.pos].encode("utf-8"))) from None


def write_region(path, region: Region) -> None:
    Path(path).write_text(json.dumps(region_to_dict(region)) + "\n", encoding="utf-8")


def read_region(path, validate: bool = True) -> Region:
    return region_from_dict(_load_json(path), validate)


def read_regions(path, validate: bool = True) -> list:
    """A region file, a ``{"layers": [...]}`` file or a bare list of regions."""
    doc = _load_json(path)
    if isinstance(doc, dict) and "layers" in doc:
        doc = doc["layers"]
    if isinstance(doc, list):
        return [region_from_dict(d, validate) for d in doc]
    return [region_from_dict(doc, validate)]


def write_segmentation(path, seg: LayeredSegmentation) -> None:
    doc = {"layers": [region_to_dict(r) for r in seg.layers]}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def read_segmentation(path, grid: Grid | None = None, validate: bool = True) -> LayeredSegmentation:
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list):
        raise ParseError("segmentation document needs a 'layers' list")
    return LayeredSegmentation(tuple(region_from_dict(d, validate) for d in doc["layers"]), grid)


def write_regions(path, regions) -> None:
    Path(path).write_text(json.dumps([region_to_dict(r) for r in as_regions(regions)]) + "\n",
                          encoding="utf-8")


# ---------------------------------------------------------------- config

def parse_config(text: str, valid_keys) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Values stay strings.

    Keys may use dashes or underscores; they are returned with underscores.
    """
    valid = {k.replace("-", "_") for k in valid_keys}
    out = {}
    offset = 0
    for lineno, raw in enumerate(text.splitlines(keepends=True), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"config line {lineno}: expected key = value", offset)
            key = key.strip().replace("-", "_")
            if key not in valid:
                raise ParseError(f"config line {lineno}: unknown key {key!r}; valid keys: "
                                 + ", ".join(sorted(valid)), offset)
            out[key] = value.strip()
        offset += len(raw.encode("utf-8"))
    return out


def read_config(path, valid_keys) -> dict:
    return parse_config(Path(path).read_text(encoding="utf-8"), valid_keys)

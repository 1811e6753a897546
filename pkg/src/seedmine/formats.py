"""Bit-exact readers and writers for the on-disk formats.

FMAP (attention stacks, feature grids)
    bytes 0..3   ASCII "FMAP"
    bytes 4..19  four unsigned 32-bit little-endian ints: version (=1), C, H, W
    payload      C*H*W IEEE-754 binary32 little-endian, channel-major,
                 each channel row-major

GRPM (reasoning-unit parameters)
    ASCII "GRPM", u32 version (=1), then a sequence of tensors, each as
    u32 ndim, ndim u32 dims, binary32 little-endian data.

PGM  binary "P5", maxval 255, one byte per pixel (label maps: 0..C plus 255
     for ignore; saliency maps: byte/255).
PPM  binary "P6", maxval 255 (colorized label visualizations).

Dataset manifest: one line per image, ``<image_id>;<comma-separated class ids>``.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, ParameterError

FMAP_MAGIC = b"FMAP"
GRPM_MAGIC = b"GRPM"
FORMAT_VERSION = 1

# refuse absurd headers before allocating anything
_MAX_ELEMENTS = 1 << 32


def write_fmap(path, values) -> None:
    """Write a (C, H, W) float array as an FMAP file."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 3:
        raise ParameterError(f"expected a (C, H, W) array, got ndim={arr.ndim}")
    if min(arr.shape) == 0:
        raise ParameterError(f"dimensions must be nonzero, got {arr.shape}")
    c, h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(FMAP_MAGIC)
        fh.write(struct.pack("<4I", FORMAT_VERSION, c, h, w))
        fh.write(arr.tobytes())


def read_fmap(path) -> np.ndarray:
    """Read an FMAP file into a (C, H, W) float32 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 20:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    if data[:4] != FMAP_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {FMAP_MAGIC!r}")
    version, c, h, w = struct.unpack("<4I", data[4:20])
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    for name, dim in (("class_count", c), ("height", h), ("width", w)):
        if dim == 0:
            raise FormatError(f"{path}: {name} is zero")
    count = c * h * w
    if count > _MAX_ELEMENTS:
        raise FormatError(f"{path}: dimension overflow, C*H*W = {count}")
    payload = data[20:]
    if len(payload) < 4 * count:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} bytes, expected {4 * count})"
        )
    if len(payload) > 4 * count:
        raise FormatError(f"{path}: trailing data after payload")
    return np.frombuffer(payload, dtype="<f4").reshape(c, h, w).copy()


def write_tensor_container(path, magic: bytes, arrays) -> None:
    """Write a sequence of float tensors under a 4-byte magic."""
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        for arr in arrays:
            arr = np.ascontiguousarray(arr, dtype="<f4")
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def read_tensor_container(path, magic: bytes) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise FormatError(f"{path}: truncated header")
    if data[:4] != magic:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {magic!r}")
    (version,) = struct.unpack("<I", data[4:8])
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    arrays = []
    pos = 8
    while pos < len(data):
        if pos + 4 > len(data):
            raise FormatError(f"{path}: truncated tensor header")
        (ndim,) = struct.unpack("<I", data[pos : pos + 4])
        pos += 4
        if ndim > 8:
            raise FormatError(f"{path}: implausible tensor rank {ndim}")
        if pos + 4 * ndim > len(data):
            raise FormatError(f"{path}: truncated tensor dims")
        dims = struct.unpack(f"<{ndim}I", data[pos : pos + 4 * ndim])
        pos += 4 * ndim
        count = 1
        for d in dims:
            count *= d
        if count > _MAX_ELEMENTS:
            raise FormatError(f"{path}: dimension overflow in tensor {len(arrays)}")
        if pos + 4 * count > len(data):
            raise FormatError(f"{path}: truncated payload in tensor {len(arrays)}")
        arrays.append(
            np.frombuffer(data[pos : pos + 4 * count], dtype="<f4").reshape(dims).copy()
        )
        pos += 4 * count
    return arrays


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next whitespace-delimited PNM header token, skipping comments."""
    n = len(data)
    while pos < n:
        byte = data[pos : pos + 1]
        if byte == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif byte.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("unexpected end of header")
    return data[start:pos], pos


def write_pgm(path, pixels) -> None:
    """Write an (H, W) uint8 array as a binary P5 PGM, maxval 255."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 2:
        raise ParameterError(f"expected an (H, W) array, got ndim={arr.ndim}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 PGM (maxval 255) into an (H, W) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        tok, pos = _next_token(data, 0)
        if tok != b"P5":
            raise FormatError(f"{path}: bad magic {tok!r}, expected b'P5'")
        wtok, pos = _next_token(data, pos)
        htok, pos = _next_token(data, pos)
        mtok, pos = _next_token(data, pos)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
    try:
        w, h, maxval = int(wtok), int(htok), int(mtok)
    except ValueError:
        raise FormatError(f"{path}: non-numeric header field") from None
    if maxval != 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: bad dimensions {w}x{h}")
    pos += 1  # single whitespace byte separates header from payload
    payload = data[pos:]
    if len(payload) < w * h:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} bytes, expected {w * h})"
        )
    if len(payload) > w * h:
        raise FormatError(f"{path}: trailing data after payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()


def write_ppm(path, rgb) -> None:
    """Write an (H, W, 3) uint8 array as a binary P6 PPM."""
    arr = np.ascontiguousarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ParameterError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    h, w, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())


def write_label_map(path, labels) -> None:
    write_pgm(path, labels)


def read_label_map(path) -> np.ndarray:
    return read_pgm(path)


def write_saliency(path, values) -> None:
    """Store a [0, 1] saliency map as one byte per pixel (round to nearest)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ParameterError("saliency values must lie in [0, 1]")
    write_pgm(path, np.rint(arr * 255.0).astype(np.uint8))


def read_saliency(path) -> np.ndarray:
    return read_pgm(path).astype(np.float32) / 255.0


def write_manifest(path, records) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for rec in records:
            fh.write(f"{rec.image_id};{','.join(str(c) for c in rec.present_classes)}\n")


def read_manifest(path):
    """Parse a manifest into ImageRecord entries, preserving line order."""
    from .maps import ImageRecord

    records = []
    seen = set()
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if ";" not in line:
                raise FormatError(f"{path}:{lineno}: missing ';' separator")
            image_id, _, cls = line.partition(";")
            if not image_id:
                raise FormatError(f"{path}:{lineno}: empty image id")
            if image_id in seen:
                raise FormatError(f"{path}:{lineno}: duplicate image id {image_id!r}")
            seen.add(image_id)
            try:
                classes = tuple(int(tok) for tok in cls.split(",") if tok)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric class id") from None
            records.append(ImageRecord(image_id=image_id, present_classes=classes))
    return records

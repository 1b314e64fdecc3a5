"""Netpbm PPM image I/O: binary P6 and ASCII P3 readers, P6 writer.

Only maxval 255 is supported.  Header comments (``#`` to end of line)
are honored anywhere whitespace is allowed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["read_ppm", "write_ppm_bytes", "write_ppm", "list_frame_files"]

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token after ``pos``; returns (token, index past it)."""
    n = len(data)
    while pos < n:
        if data[pos] == ord("#"):
            while pos < n and data[pos] != ord("\n"):
                pos += 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise ValueError("unexpected end of header")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, pos = _next_token(data, pos)
    if not token.isdigit():
        raise ValueError(f"invalid {what} in PPM header: {token!r}")
    return int(token), pos


def read_ppm(path) -> np.ndarray:
    """Read a P6 or P3 PPM file into a (height, width, 3) uint8 array."""
    path = Path(path)
    data = path.read_bytes()
    try:
        magic, pos = _next_token(data, 0)
        if magic not in (b"P6", b"P3"):
            raise ValueError(f"not a PPM file (magic {magic!r})")
        width, pos = _int_token(data, pos, "width")
        height, pos = _int_token(data, pos, "height")
        maxval, pos = _int_token(data, pos, "maxval")
        if maxval != 255:
            raise ValueError(f"only maxval 255 is supported, got {maxval}")
        if width < 1 or height < 1:
            raise ValueError(f"invalid dimensions {width}x{height}")
        need = width * height * 3
        if magic == b"P6":
            # exactly one whitespace byte separates the header from the raster
            if pos >= len(data) or data[pos] not in _WHITESPACE:
                raise ValueError("missing whitespace before P6 raster")
            raster = data[pos + 1:pos + 1 + need]
            if len(raster) < need:
                raise ValueError(
                    f"truncated raster: expected {need} bytes, got {len(raster)}"
                )
            pixels = np.frombuffer(raster, dtype=np.uint8, count=need)
        else:
            fields = data[pos:].split()
            if len(fields) < need:
                raise ValueError(
                    f"truncated raster: expected {need} samples, got {len(fields)}"
                )
            samples = []
            for field in fields[:need]:
                if not field.isdigit():
                    raise ValueError(f"invalid sample value {field!r}")
                value = int(field)
                if value > maxval:
                    raise ValueError(f"sample value {value} exceeds maxval")
                samples.append(value)
            pixels = np.array(samples, dtype=np.uint8)
        return pixels.reshape(height, width, 3)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_ppm_bytes(pixels: np.ndarray) -> bytes:
    """Encode a (height, width, 3) uint8 array as binary P6."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
    height, width = arr.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + arr.tobytes()


def write_ppm(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(write_ppm_bytes(pixels))


def list_frame_files(directory) -> list[Path]:
    """PPM files in a directory, lexicographic by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() == ".ppm")
    if not files:
        raise ValueError(f"{directory}: no PPM frames found")
    return files

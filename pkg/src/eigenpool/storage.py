"""File formats and serialization.

All float text output uses 17 significant digits, which round-trips
64-bit floats exactly.  Three interchange formats:

* sequence CSV: one row per TIME STEP (steps x dim), transposed into the
  in-memory dim x steps layout on read;
* EEPB binary: magic ``EEPB``, little-endian u32 dim, u32 steps, then
  steps*dim float64 values in time-major order (lossless interchange);
* basis JSON: ``{"L", "k", "source", "eigenvalues"?, "vectors"}`` with
  ``vectors`` holding k arrays of L numbers, one basis column each.

Covariance accumulators get a small JSON format of their own so partial
fits can be saved and merged.  Output files are written atomically
(temp file + rename).
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .basis import BasisSet, TimeCovariance
from .pooling import FeatureSequence, PooledDescriptor

__all__ = [
    "format_float",
    "dumps_json",
    "atomic_write_bytes",
    "atomic_write_text",
    "read_sequence",
    "read_sequence_csv",
    "write_sequence_csv",
    "read_sequence_eepb",
    "write_sequence_eepb",
    "write_descriptors_csv",
    "write_descriptors_eepb",
    "descriptors_json",
    "write_basis",
    "read_basis",
    "write_covariance",
    "read_covariance",
    "write_pooled_image_eepb",
    "read_manifest",
]

EEPB_MAGIC = b"EEPB"
_FLOAT_SPEC = ".17g"


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    return format(float(value), _FLOAT_SPEC)


def _json_fragments(obj) -> Iterable[str]:
    if isinstance(obj, dict):
        yield "{"
        for i, (key, value) in enumerate(obj.items()):
            if i:
                yield ","
            yield json.dumps(key)
            yield ":"
            yield from _json_fragments(value)
        yield "}"
    elif isinstance(obj, (list, tuple)):
        yield "["
        for i, value in enumerate(obj):
            if i:
                yield ","
            yield from _json_fragments(value)
        yield "]"
    elif isinstance(obj, bool) or obj is None:
        yield json.dumps(obj)
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, (float, np.floating)):
        yield format_float(obj)
    elif isinstance(obj, str):
        yield json.dumps(obj)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    """Deterministic JSON text: insertion-order keys, 17-digit floats."""
    return "".join(_json_fragments(obj))


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# -- sequences ---------------------------------------------------------------

def read_sequence_csv(path) -> FeatureSequence:
    path = Path(path)
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ValueError(
                f"{path}: row {lineno} has {len(fields)} values, expected {width}"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ValueError(f"{path}: row {lineno} has a non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: empty sequence file")
    values = np.array(rows, dtype=np.float64).T  # rows are time steps
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: sequence contains non-finite values")
    return FeatureSequence(values)


def write_sequence_csv(path, seq: FeatureSequence) -> None:
    lines = []
    for t in range(seq.length):
        lines.append(",".join(format_float(v) for v in seq.values[:, t]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_sequence_eepb(path) -> FeatureSequence:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != EEPB_MAGIC:
        raise ValueError(f"{path}: not an EEPB file")
    dim, steps = struct.unpack_from("<II", raw, 4)
    if dim < 1 or steps < 1:
        raise ValueError(f"{path}: invalid EEPB dimensions {dim}x{steps}")
    need = 12 + 8 * dim * steps
    if len(raw) != need:
        raise ValueError(f"{path}: expected {need} bytes, got {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", count=dim * steps, offset=12)
    values = values.reshape(steps, dim).T.copy()  # stored time-major
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: sequence contains non-finite values")
    return FeatureSequence(values)


def write_sequence_eepb(path, seq: FeatureSequence) -> None:
    header = struct.pack("<4sII", EEPB_MAGIC, seq.dim, seq.length)
    body = np.ascontiguousarray(seq.values.T, dtype="<f8").tobytes()
    atomic_write_bytes(path, header + body)


def read_sequence(path) -> FeatureSequence:
    """Load a sequence file, sniffing EEPB by magic, otherwise CSV."""
    path = Path(path)
    with open(path, "rb") as handle:
        magic = handle.read(4)
    if magic == EEPB_MAGIC:
        return read_sequence_eepb(path)
    return read_sequence_csv(path)


# -- descriptors -------------------------------------------------------------

def write_descriptors_csv(path, descriptors: Sequence[PooledDescriptor]) -> None:
    lines = [",".join(format_float(v) for v in d.values) for d in descriptors]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_descriptors_eepb(path, descriptors: Sequence[PooledDescriptor]) -> None:
    dims = {d.dim for d in descriptors}
    if len(dims) != 1:
        raise ValueError("EEPB output needs descriptors of a single dimensionality")
    stacked = np.column_stack([d.values for d in descriptors])
    write_sequence_eepb(path, FeatureSequence(stacked))


def descriptors_json(descriptors: Sequence[PooledDescriptor]) -> str:
    payload = [{"provenance": d.provenance, "values": list(d.values)}
               for d in descriptors]
    return dumps_json(payload) + "\n"


# -- bases and covariance accumulators ---------------------------------------

def basis_json(basis: BasisSet) -> str:
    doc = {"L": basis.length, "k": basis.count, "source": basis.source}
    if basis.eigenvalues is not None:
        doc["eigenvalues"] = list(basis.eigenvalues)
    doc["vectors"] = [list(basis.vectors[:, j]) for j in range(basis.count)]
    return dumps_json(doc) + "\n"


def write_basis(path, basis: BasisSet) -> None:
    atomic_write_text(path, basis_json(basis))


def read_basis(path) -> BasisSet:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        length = int(doc["L"])
        count = int(doc["k"])
        source = str(doc["source"])
        vectors = doc["vectors"]
        if len(vectors) != count or any(len(col) != length for col in vectors):
            raise ValueError("vectors do not match the declared L and k")
        eigenvalues = doc.get("eigenvalues")
        if eigenvalues is not None:
            eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        return BasisSet(length, np.array(vectors, dtype=np.float64).T,
                        source, eigenvalues)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: invalid basis file ({exc})") from None
    except ValueError as exc:
        raise ValueError(f"{path}: invalid basis file ({exc})") from None


def write_covariance(path, cov: TimeCovariance) -> None:
    doc = {
        "L": cov.length,
        "sequence_count": cov.sequence_count,
        "matrix": [list(row) for row in cov.matrix],
    }
    atomic_write_text(path, dumps_json(doc) + "\n")


def read_covariance(path) -> TimeCovariance:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        length = int(doc["L"])
        count = int(doc["sequence_count"])
        matrix = np.array(doc["matrix"], dtype=np.float64)
        return TimeCovariance(length, matrix, count)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: invalid covariance file ({exc})") from None
    except ValueError as exc:
        raise ValueError(f"{path}: invalid covariance file ({exc})") from None


def write_pooled_image_eepb(path, img) -> None:
    """Raw float export of a pooled image: dim = W*H*3 and a single step."""
    column = img.float_values.reshape(-1, 1)
    write_sequence_eepb(path, FeatureSequence(column))


# -- manifests ---------------------------------------------------------------

def read_manifest(path) -> list[Path]:
    """Paths listed one per line; ``#`` comments and blank lines ignored.

    Relative entries resolve against the manifest's directory.  Every
    listed path must exist; an empty manifest is rejected.
    """
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        entry = Path(line)
        if not entry.is_absolute():
            entry = base / entry
        if not entry.exists():
            raise ValueError(f"{path}: line {lineno}: no such path: {entry}")
        entries.append(entry)
    if not entries:
        raise ValueError(f"{path}: empty manifest")
    return entries

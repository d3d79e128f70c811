"""File formats: raw float arrays with text headers, graymap exports and CSV tables.

A raw array ``name.raw`` holds little-endian float32 values in row-major
order; its sidecar ``name.hdr`` has one ``key: value`` pair per line and
always records ``rows`` and ``cols`` (plus ``n_angles``/``n_detectors`` or
``width``/``height`` depending on ``kind``).  All writers are atomic:
content goes to a temporary file that is then renamed into place.
"""

from __future__ import annotations

import csv
import io as _io
import os
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ConfigurationError, StorageError


def atomic_write(path, data: bytes):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def _header_path(path):
    path = Path(path)
    return path.with_suffix(".hdr")


def format_header(fields: dict) -> str:
    return "".join(f"{k}: {v}\n" for k, v in fields.items())


def parse_header(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ConfigurationError(f"header line {n} is not key: value: {line!r}")
        k, v = line.split(":", 1)
        out[k.strip()] = v.strip()
    return out


def write_raw(path, array, kind: str = "array", extra: dict | None = None):
    """Write a 2-D array as ``path`` (``.raw``) plus its ``.hdr`` sidecar."""
    a = np.asarray(array, dtype=float)
    if a.ndim != 2:
        raise ArgumentError(f"raw files hold 2-D arrays, got shape {a.shape}")
    fields = {"kind": kind, "dtype": "float32le", "rows": a.shape[0], "cols": a.shape[1]}
    if kind == "sinogram":
        fields.update(n_angles=a.shape[0], n_detectors=a.shape[1])
    elif kind in ("image", "mask"):
        fields.update(height=a.shape[0], width=a.shape[1])
    fields.update(extra or {})
    atomic_write(path, a.astype("<f4").tobytes())
    atomic_write(_header_path(path), format_header(fields).encode("ascii"))


def read_header(path) -> dict:
    try:
        return parse_header(_header_path(path).read_text(encoding="ascii"))
    except OSError as exc:
        raise StorageError(f"cannot read header for {path}: {exc}") from exc


def read_raw(path) -> tuple[np.ndarray, dict]:
    """Returns ``(array as float64, header dict)``."""
    header = read_header(path)
    try:
        rows, cols = int(header["rows"]), int(header["cols"])
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"header of {path} lacks valid rows/cols") from exc
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    if len(blob) != rows * cols * 4:
        raise ConfigurationError(
            f"{path} holds {len(blob)} bytes, header implies {rows * cols * 4}")
    return np.frombuffer(blob, dtype="<f4").reshape(rows, cols).astype(float), header


def _scale(a, lo, hi, top):
    a = np.asarray(a, dtype=float)
    lo = float(np.min(a)) if lo is None else lo
    hi = float(np.max(a)) if hi is None else hi
    span = hi - lo if hi > lo else 1.0
    return np.round(np.clip((a - lo) / span, 0, 1) * top)


def pgm_bytes(array, bits: int = 16, lo=None, hi=None) -> bytes:
    """Binary PGM (P5); values are linearly mapped from ``[lo, hi]`` (default min/max)."""
    a = np.asarray(array)
    if a.ndim != 2:
        raise ArgumentError(f"graymaps are 2-D, got shape {a.shape}")
    top = 65535 if bits == 16 else 255
    if bits not in (8, 16):
        raise ArgumentError("bits must be 8 or 16")
    q = _scale(a, lo, hi, top).astype(">u2" if bits == 16 else "u1")
    head = f"P5\n{a.shape[1]} {a.shape[0]}\n{top}\n".encode("ascii")
    return head + q.tobytes()


def write_pgm(path, array, bits: int = 16, lo=None, hi=None):
    atomic_write(path, pgm_bytes(array, bits, lo, hi))


def read_pgm(path) -> np.ndarray:
    """Parse a binary PGM written by :func:`write_pgm` into integer levels."""
    blob = Path(path).read_bytes()
    parts = blob.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ConfigurationError(f"{path} is not a binary PGM")
    w, h, top = int(parts[1]), int(parts[2]), int(parts[3])
    data = parts[4]
    dt = ">u2" if top > 255 else "u1"
    return np.frombuffer(data, dtype=dt, count=w * h).reshape(h, w).astype(np.int64)


def write_mask_pgm(path, mask):
    """8-bit graymap with 0 for dropped and 255 for kept entries."""
    m = np.asarray(mask)
    write_pgm(path, (m != 0).astype(float), bits=8, lo=0.0, hi=1.0)


def write_band_triptych(path, hf, gap: int = 2):
    """The three detail bands side by side, each scaled symmetrically about zero."""
    tiles = []
    for band in (hf.lh, hf.hl, hf.hh):
        b = np.asarray(band, dtype=float)
        m = float(np.max(np.abs(b))) or 1.0
        tiles.append((b / m + 1) / 2)
    h = tiles[0].shape[0]
    spacer = np.ones((h, gap))
    row = np.concatenate([tiles[0], spacer, tiles[1], spacer, tiles[2]], axis=1)
    write_pgm(path, row, bits=16, lo=0.0, hi=1.0)


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write(path, csv_text(header, rows).encode("utf-8"))


def aligned_text(header, rows) -> str:
    """Plain-text table with right-aligned columns."""
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n" for r in cells)

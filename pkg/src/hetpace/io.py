"""Binary snapshots, PPM frames and run manifests."""

from __future__ import annotations

import hashlib
import json
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"HKSNAP01"
# magic, units, items, frames, dt, stride, seed, topology tag
_HEAD = struct.Struct("<8sIIQdQQ16s")
_CRC = struct.Struct("<I")
HEADER_SIZE = _HEAD.size + _CRC.size


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    frames: np.ndarray
    dt: float
    stride: int
    seed: int
    tag: str


def _tag_bytes(tag):
    b = tag.encode("ascii", "replace")[:16]
    return b.ljust(16, b"\0")


def write_snapshot(path, frames, dt, stride, seed, tag=""):
    """Header with CRC32, then frames as float64 LE (frame, unit, item order)."""
    f = np.ascontiguousarray(frames, dtype="<f8")
    if f.ndim != 3:
        raise SnapshotError(f"frames must be 3-D, got shape {f.shape}")
    nf, N, n = f.shape
    head = _HEAD.pack(MAGIC, N, n, nf, float(dt), int(stride), int(seed), _tag_bytes(tag))
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(_CRC.pack(zlib.crc32(head)))
        fh.write(f.tobytes(order="C"))


def write_trajectory(path, traj, tag=None):
    c = traj.config
    write_snapshot(path, traj.frames, c.dt, c.record_stride, c.seed,
                   traj.topology if tag is None else tag)


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise SnapshotError("file shorter than snapshot header")
    head = raw[:_HEAD.size]
    (crc,) = _CRC.unpack_from(raw, _HEAD.size)
    if zlib.crc32(head) != crc:
        raise SnapshotError("header checksum mismatch")
    magic, N, n, nf, dt, stride, seed, tag = _HEAD.unpack(head)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    body = raw[HEADER_SIZE:]
    if len(body) != nf * N * n * 8:
        raise SnapshotError(f"payload has {len(body)} bytes, header implies {nf * N * n * 8}")
    frames = np.frombuffer(body, dtype="<f8").reshape(nf, N, n).astype(np.float64)
    return Snapshot(frames, dt, stride, seed, tag.rstrip(b"\0").decode("ascii"))


# --- PPM -------------------------------------------------------------------

GRAY = (128, 128, 128)

# red, green and blue families; shades within a family separate the items
PALETTE9 = np.array([
    (230, 25, 25), (255, 130, 130), (140, 0, 0),
    (25, 170, 25), (140, 235, 140), (0, 95, 0),
    (30, 60, 230), (140, 165, 255), (0, 15, 125),
], dtype=np.uint8)
PALETTE3 = PALETTE9[[0, 3, 6]]


def palette(n):
    return PALETTE3 if n == 3 else PALETTE9


def raster_rgb(items, pal, degenerate=None, brightness=None):
    """RGB image (H, W, 3) from a raster of item indices."""
    items = np.asarray(items)
    rgb = np.asarray(pal, dtype=np.uint8)[items].astype(np.float64)
    if brightness is not None:
        rgb *= np.clip(np.asarray(brightness, dtype=float), 0.0, 1.0)[..., None]
    out = np.floor(rgb + 0.5).astype(np.uint8)
    if degenerate is not None:
        out[np.asarray(degenerate, bool)] = GRAY
    return out


def write_ppm(path, rgb):
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(rgb.tobytes())


def read_ppm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def export_ppm(rasters, directory, n_items=9, pal=None, degenerate=None, brightness=None,
               prefix="frame"):
    """One P6 file per frame of an (F, H, W) item raster; returns the paths."""
    rasters = np.asarray(rasters)
    if rasters.ndim == 2:
        rasters = rasters[:, :, None]
    pal = palette(n_items) if pal is None else pal
    os.makedirs(directory, exist_ok=True)
    width = max(5, len(str(len(rasters))))
    paths = []
    for i, r in enumerate(rasters):
        d = None if degenerate is None else np.asarray(degenerate[i]).reshape(r.shape)
        b = None if brightness is None else np.asarray(brightness[i]).reshape(r.shape)
        p = Path(directory) / f"{prefix}_{i:0{width}d}.ppm"
        write_ppm(p, raster_rgb(r, pal, d, b))
        paths.append(p)
    return paths


# --- manifest --------------------------------------------------------------

def sha256_file(path, chunk=1 << 20):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            b = fh.read(chunk)
            if not b:
                break
            h.update(b)
    return h.hexdigest()


def write_manifest(out_dir, config_text, seed, extra=None, name="manifest.json"):
    """Record the config hash, seed and a checksum for every file under ``out_dir``."""
    out = Path(out_dir)
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != name:
            files[p.relative_to(out).as_posix()] = sha256_file(p)
    doc = {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "seed": int(seed),
        "config": config_text,
        "outputs": files,
    }
    if extra:
        doc.update(extra)
    with open(out / name, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc

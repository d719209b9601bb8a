"""Binary cache for class-function tables.

File layout (all little-endian)::

    magic    4s   b"EPSC"
    version  u8
    n        u8
    p        u16
    r        u8
    degree   u16  coefficients per value
    count    u64  number of table rows
    indices  count x u64          ElementIndex of each row
    coeffs   count x degree x i64 canonical cyclotomic coefficients
    digest   32 bytes             SHA-256 of everything above

Files are named ``<config sha256>-<table>.epsc``.  A bad magic, a stale
version byte or a digest mismatch makes ``load`` return None after logging a
warning, and the caller recomputes.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EPSC"
VERSION = 1
HEADER = struct.Struct("<4sBBHBHQ")
ENV_VAR = "EPSCHAR_CACHE"

log = logging.getLogger(__name__)


def cache_dir(override: str | os.PathLike | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "epschar"


def path_for(directory: Path, config_hash: str, table: str) -> Path:
    return Path(directory) / f"{config_hash}-{table}.epsc"


def encode(n: int, p: int, r: int, indices: np.ndarray, coeffs: np.ndarray) -> bytes:
    indices = np.asarray(indices)
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if coeffs.ndim != 2 or coeffs.shape[0] != indices.shape[0]:
        raise ValueError("coeffs must have shape (len(indices), degree)")
    if indices.dtype == object or np.any(indices < 0):
        from .grgroup import index_to_u64
        idx = index_to_u64(indices)
    else:
        idx = indices.astype("<u8")
    body = HEADER.pack(MAGIC, VERSION, n, p, r, coeffs.shape[1], len(idx))
    body += idx.tobytes() + coeffs.astype("<i8").tobytes()
    return body + hashlib.sha256(body).digest()


def decode(blob: bytes):
    """Return (n, p, r, indices, coeffs); raise ValueError on any corruption."""
    if len(blob) < HEADER.size + 32:
        raise ValueError("truncated cache file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ValueError("checksum mismatch")
    magic, version, n, p, r, degree, count = HEADER.unpack_from(body)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"stale version {version} (expected {VERSION})")
    off = HEADER.size
    if len(body) != off + 8 * count * (1 + degree):
        raise ValueError("length does not match header")
    idx = np.frombuffer(body, dtype="<u8", count=count, offset=off)
    coeffs = np.frombuffer(body, dtype="<i8", count=count * degree, offset=off + 8 * count)
    return n, p, r, idx.astype(np.uint64), coeffs.reshape(count, degree).astype(np.int64)


def store(directory, config_hash: str, table: str, n, p, r, indices, coeffs) -> Path:
    path = path_for(Path(directory), config_hash, table)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(encode(n, p, r, indices, coeffs))
    tmp.replace(path)
    return path


def load(directory, config_hash: str, table: str):
    """Decoded table, or None when absent or unusable (with a warning in the latter case)."""
    path = path_for(Path(directory), config_hash, table)
    if not path.exists():
        return None
    try:
        return decode(path.read_bytes())
    except ValueError as exc:
        log.warning("discarding cache %s: %s; recomputing", path, exc)
        return None

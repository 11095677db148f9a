"""Packed ±1 codes and brute-force Hamming retrieval.

Codes pack little-endian into 64-bit words (bit set = +1). All distances
use the doubled convention: 2 x popcount(xor) = p - c_i^T c_j, so
thresholds are directly comparable to the trainer's alpha.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"PPCB"
VERSION = 1


@dataclass
class PackedCodes:
    """n codes of p bits each, packed into ceil(p/64) words per code."""

    words: np.ndarray  # (n, w) uint64
    n: int
    p: int
    ids: np.ndarray | None = None

    def __post_init__(self):
        w = (self.p + 63) // 64
        if self.words.shape != (self.n, w):
            raise ValueError(f"words shape {self.words.shape} != ({self.n}, {w})")
        if self.ids is None:
            self.ids = np.arange(self.n, dtype=np.int64)


def pack(codes: np.ndarray, ids: np.ndarray | None = None) -> PackedCodes:
    """Pack a p x n ±1 code matrix (column per point)."""
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ValueError("code matrix must be 2-D (p x n)")
    p, n = codes.shape
    if p < 1:
        raise ValueError("need at least one bit")
    if not np.isin(codes, (-1, 1)).all():
        raise ValueError("code entries must be ±1")
    bits = (codes.T > 0).astype(np.uint8)  # (n, p)
    w = (p + 63) // 64
    padded = np.zeros((n, 64 * w), dtype=np.uint8)
    padded[:, :p] = bits
    words = np.packbits(padded, axis=1, bitorder="little").view("<u8")
    return PackedCodes(words=np.ascontiguousarray(words), n=n, p=p, ids=ids)


def unpack(packed: PackedCodes) -> np.ndarray:
    """Inverse of pack: the p x n ±1 matrix (int8)."""
    raw = np.unpackbits(packed.words.view(np.uint8), axis=1, bitorder="little")
    bits = raw[:, : packed.p]
    return np.where(bits > 0, 1, -1).astype(np.int8).T


def _check_same_shape(a: PackedCodes | np.ndarray, b: np.ndarray, p: int):
    w = (p + 63) // 64
    if np.asarray(b).shape[-1] != w:
        raise ValueError("word count does not match code length p")


def hamming(a: np.ndarray, b: np.ndarray, p: int) -> int:
    """Doubled Hamming distance between two packed codes (word arrays)."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if a.shape != b.shape:
        raise ValueError("packed codes differ in word count")
    _check_same_shape(a, b, p)
    return 2 * int(np.bitwise_count(a ^ b).sum())


def hamming_to_all(index: PackedCodes, q: np.ndarray) -> np.ndarray:
    """Doubled distances from one packed query to every indexed code."""
    q = np.asarray(q, dtype=np.uint64)
    _check_same_shape(index, q, index.p)
    return 2 * np.bitwise_count(index.words ^ q[None, :]).sum(axis=1).astype(np.int64)


def pair_hamming(packed: PackedCodes, block: int = 256) -> np.ndarray:
    """Condensed doubled distances over all unordered pairs (triu order)."""
    n = packed.n
    out = np.empty(n * (n - 1) // 2, dtype=np.int64)
    pos = 0
    for i in range(0, n, block):
        hi = min(i + block, n)
        xor = packed.words[i:hi, None, :] ^ packed.words[None, :, :]
        dist = 2 * np.bitwise_count(xor).sum(axis=2).astype(np.int64)
        for r in range(i, hi):
            row = dist[r - i, r + 1 :]
            out[pos : pos + row.size] = row
            pos += row.size
    return out


def query_radius(index: PackedCodes, q: np.ndarray, alpha: float) -> np.ndarray:
    """Ids with distance <= alpha, ascending by (distance, id)."""
    d = hamming_to_all(index, q)
    keep = d <= alpha
    ids = index.ids[keep]
    order = np.lexsort((ids, d[keep]))
    return ids[order]


def query_knn(index: PackedCodes, q: np.ndarray, k: int) -> np.ndarray:
    """k nearest ids, ties broken by ascending id; k > n returns all."""
    d = hamming_to_all(index, q)
    order = np.lexsort((index.ids, d))
    return index.ids[order[: min(k, index.n)]]


# ---------------------------------------------------------------------------
# Codes file: magic "PPCB", u32 version, u64 n, u32 p, words, optional ids


def save_codes(packed: PackedCodes, path: str | Path, with_ids: bool = True):
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", packed.n))
        fh.write(struct.pack("<I", packed.p))
        fh.write(packed.words.astype("<u8").tobytes())
        if with_ids:
            fh.write(packed.ids.astype("<u8").tobytes())


def load_codes(path: str | Path) -> PackedCodes:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic, not a codes file")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported codes version {version}")
    (n,) = struct.unpack_from("<Q", blob, 8)
    (p,) = struct.unpack_from("<I", blob, 16)
    w = (p + 63) // 64
    offset = 20
    need = n * w * 8
    if len(blob) < offset + need:
        raise ValueError(f"{path}: truncated codes payload")
    words = np.frombuffer(blob, dtype="<u8", count=n * w, offset=offset).reshape(n, w).copy()
    offset += need
    ids = None
    remaining = len(blob) - offset
    if remaining:
        if remaining != n * 8:
            raise ValueError(f"{path}: trailing id table has wrong size")
        ids = np.frombuffer(blob, dtype="<u8", offset=offset).astype(np.int64)
    if p % 64:
        mask = np.uint64((1 << (p % 64)) - 1)
        if np.any(words[:, -1] & ~mask):
            raise ValueError(f"{path}: nonzero padding bits beyond p={p}")
    return PackedCodes(words=words, n=int(n), p=int(p), ids=ids)

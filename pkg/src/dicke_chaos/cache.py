"""Binary on-disk cache of computed spectra, keyed by a parameter hash.

File layout (all integers little-endian):

    8 bytes   magic  b"DKCHSPC1"
    uint32    format version (currently 1)
    uint32    byte length of the key document
    ...       key document, canonical JSON (parameters + payload kind)
    uint64    element count
    ...       float64 array, little-endian

The cache is append-only: entries are written once via an atomic rename and
never mutated, so concurrent sweep workers can share one directory.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from .errors import CacheFormatError
from .model import ModelParams, Parity

MAGIC = b"DKCHSPC1"
VERSION = 1

#: Payload kinds stored per parameter point.
KIND_ENERGIES = "energies"          # full-spectrum eigenvalues, ascending
KIND_MID_COEFFS = "mid_coeffs"      # pooled mid-window eigenvector components
KIND_TAIL_WEIGHTS = "tail_weights"  # per-windowed-state Fock-tail weights


def cache_key(params: ModelParams, sector: Parity | None, kind: str,
              tail_width: int | None = None) -> dict:
    """Canonical key document for one payload.

    Only the fields the payload actually depends on are included, so e.g.
    energies are reused across window changes.
    """
    doc = {
        "kind": kind,
        "omega": float(params.omega),
        "omega0": float(params.omega0),
        "lambda": float(params.lambda_),
        "kappa": float(params.kappa),
        "j": float(params.j),
        "n_cutoff": int(params.n_cutoff),
        "sector": sector.value if sector is not None else "full",
    }
    if kind == KIND_MID_COEFFS:
        doc["mid_window"] = [float(x) for x in params.mid_window]
        doc["energy_window"] = [float(x) for x in params.energy_window]
    elif kind == KIND_TAIL_WEIGHTS:
        if tail_width is None:
            raise ValueError("tail_width is part of the tail-weight cache key")
        doc["energy_window"] = [float(x) for x in params.energy_window]
        doc["tail_width"] = int(tail_width)
    return doc


class SpectrumCache:
    """Append-only directory of float64 payloads keyed by parameter hash."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key_json: str) -> Path:
        digest = hashlib.sha256(key_json.encode("utf-8")).hexdigest()
        return self.root / f"{digest}.spec"

    @staticmethod
    def _key_json(params: ModelParams, sector: Parity | None, kind: str,
                  tail_width: int | None = None) -> str:
        return json.dumps(cache_key(params, sector, kind, tail_width),
                          sort_keys=True, separators=(",", ":"))

    def load(self, params: ModelParams, sector: Parity | None, kind: str,
             tail_width: int | None = None) -> np.ndarray | None:
        """Return the cached array, or None on a miss.

        Raises
        ------
        CacheFormatError
            If an existing file has the wrong magic, version or key.
        """
        key_json = self._key_json(params, sector, kind, tail_width)
        path = self._path(key_json)
        if not path.exists():
            return None
        blob = path.read_bytes()
        if len(blob) < len(MAGIC) + 8 or blob[: len(MAGIC)] != MAGIC:
            raise CacheFormatError(f"{path}: bad magic")
        off = len(MAGIC)
        version, keylen = struct.unpack_from("<II", blob, off)
        off += 8
        if version != VERSION:
            raise CacheFormatError(f"{path}: unsupported version {version}")
        stored_key = blob[off : off + keylen].decode("utf-8")
        off += keylen
        if stored_key != key_json:
            raise CacheFormatError(f"{path}: key mismatch")
        (count,) = struct.unpack_from("<Q", blob, off)
        off += 8
        data = np.frombuffer(blob, dtype="<f8", count=count, offset=off)
        return data.astype(np.float64, copy=True)

    def store(self, params: ModelParams, sector: Parity | None, kind: str,
              values: np.ndarray, tail_width: int | None = None) -> None:
        """Write one payload if absent (existing entries are never rewritten)."""
        key_json = self._key_json(params, sector, kind, tail_width)
        path = self._path(key_json)
        if path.exists():
            return
        key_bytes = key_json.encode("utf-8")
        arr = np.ascontiguousarray(values, dtype="<f8")
        tmp = path.with_suffix(f".tmp.{os.getpid()}")
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", VERSION, len(key_bytes)))
            fh.write(key_bytes)
            fh.write(struct.pack("<Q", arr.size))
            fh.write(arr.tobytes())
        os.replace(tmp, path)

"""Keyed random streams for reproducible, order-independent generation.

All randomized pipeline steps draw from Philox, a counter-based bit
generator.  A stream is keyed by hashing ``(seed, *path)`` with SHA-256,
where ``path`` identifies the unit of work (for mask pools:
``image_id, interval, candidate``).  Successive draws advance the Philox
counter, so per-attempt values inside one placement are positions along
the keyed stream.  Two consequences:

* the stream for a work unit never depends on how work is scheduled, so
  parallel and serial runs produce byte-identical output;
* replaying with the same seed reproduces every draw exactly.
"""

import hashlib
import json

import numpy as np


def derive_rng(seed: int, *path) -> np.random.Generator:
    """Return a Generator keyed by (seed, *path).

    ``path`` components must be ints or strings; the key is the first 16
    bytes of SHA-256 over a canonical JSON encoding, fed to Philox.
    """
    for part in path:
        if not isinstance(part, (int, str)):
            raise TypeError(f"stream path components must be int or str, got {type(part).__name__}")
    material = json.dumps([int(seed), list(path)], separators=(",", ":")).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    key = np.frombuffer(digest[:16], dtype="<u8")
    return np.random.Generator(np.random.Philox(key=key))

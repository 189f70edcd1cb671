"""Source-file fingerprints used to decide when a cached graph is stale."""

import hashlib
import logging
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from kypherhound.config import Config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Fingerprint:
    size: int
    mtime_ns: int
    content_hash: str


class Freshness(Enum):
    FRESH = "fresh"
    TOUCHED = "touched"  # same content, new mtime
    CHANGED = "changed"


def compute_file_hash(path: str | os.PathLike, chunk_size: int | None = None) -> str:
    """SHA256 of the raw file bytes (compressed bytes for .gz files)."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        while chunk := f.read(chunk_size or Config.HASH_CHUNK_SIZE):
            digest.update(chunk)
    return digest.hexdigest()


def compute_fingerprint(path: str | os.PathLike) -> Fingerprint:
    stat = Path(path).stat()
    return Fingerprint(stat.st_size, stat.st_mtime_ns, compute_file_hash(path))


@dataclass(frozen=True)
class FreshnessCheck:
    verdict: Freshness
    current: Fingerprint
    hashed: bool


def check_freshness(
    path: str | os.PathLike, stored: Fingerprint, verify_hash: bool | None = None
) -> FreshnessCheck:
    """Compare a file against its stored fingerprint.

    A size change is conclusive. Equal size and mtime count as fresh unless
    ``verify_hash`` is set. Otherwise the content hash decides.

    When the hash is not computed the stored hash is carried over in
    ``current`` (or left empty after a size change).
    """
    if verify_hash is None:
        verify_hash = Config.VERIFY_HASH
    stat = Path(path).stat()
    if stat.st_size != stored.size:
        return FreshnessCheck(Freshness.CHANGED, Fingerprint(stat.st_size, stat.st_mtime_ns, ""), False)
    if stat.st_mtime_ns == stored.mtime_ns and not verify_hash:
        return FreshnessCheck(Freshness.FRESH, stored, False)

    current = Fingerprint(stat.st_size, stat.st_mtime_ns, compute_file_hash(path))
    if current.content_hash != stored.content_hash:
        return FreshnessCheck(Freshness.CHANGED, current, True)
    if current.mtime_ns != stored.mtime_ns:
        logger.debug("%s touched without content change", path)
        return FreshnessCheck(Freshness.TOUCHED, current, True)
    return FreshnessCheck(Freshness.FRESH, current, True)

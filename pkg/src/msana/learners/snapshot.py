"""Versioned binary snapshots of learner state for pause/resume.

Layout: 4-byte magic, uint16 format version, uint16 kind length, kind (utf-8),
then a pickle of the learner. The pickle carries the tree/memory structure and
the numpy Generator state, so a restored learner continues the same random
sequence.
"""

from __future__ import annotations

import io
import pickle
import struct

MAGIC = b"MSNA"
VERSION = 1
_HEAD = struct.Struct("<4sHH")


class SnapshotError(ValueError):
    pass


def dumps(learner) -> bytes:
    kind = type(learner).__name__.encode()
    return _HEAD.pack(MAGIC, VERSION, len(kind)) + kind + pickle.dumps(learner, protocol=5)


def loads(blob: bytes, expect_kind: str | None = None):
    if len(blob) < _HEAD.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, klen = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise SnapshotError("not a learner snapshot (bad magic)")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    kind = blob[_HEAD.size:_HEAD.size + klen].decode()
    if expect_kind is not None and kind != expect_kind:
        raise SnapshotError(f"snapshot holds {kind}, expected {expect_kind}")
    learner = pickle.load(io.BytesIO(blob[_HEAD.size + klen:]))
    if type(learner).__name__ != kind:
        raise SnapshotError("snapshot kind does not match its payload")
    return learner


def save(learner, path):
    with open(path, "wb") as fh:
        fh.write(dumps(learner))


def load(path, expect_kind: str | None = None):
    with open(path, "rb") as fh:
        return loads(fh.read(), expect_kind)

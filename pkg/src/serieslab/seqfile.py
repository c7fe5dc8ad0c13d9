"""Binary sequence files with a JSON provenance sidecar.

Layout (little-endian): 8-byte magic ``SERIESEQ``, u32 alphabet size,
u64 length, then one byte per symbol. The sidecar lives next to the
binary file as ``<path>.json``.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import Alphabet, Provenance, SymbolSequence

MAGIC = b"SERIESEQ"
_HEADER = struct.Struct("<8sIQ")


class SequenceFileError(ValueError):
    pass


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_sequence(path, seq: SymbolSequence) -> None:
    if seq.alphabet.size > 256:
        raise SequenceFileError("binary format supports alphabets of at most 256 symbols")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, seq.alphabet.size, len(seq)))
        fh.write(np.ascontiguousarray(seq.data, dtype=np.uint8).tobytes())
    meta = {"alphabet": seq.alphabet.to_dict(),
            "length": len(seq),
            "provenance": seq.provenance.to_dict() if seq.provenance else None}
    sidecar_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def read_sequence(path) -> SymbolSequence:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size or raw[:8] != MAGIC:
        raise SequenceFileError("not a SERIESEQ file: %s" % path)
    _, size, length = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size)
    if body.size != length:
        raise SequenceFileError("truncated SERIESEQ file: header says %d symbols, found %d"
                                % (length, body.size))
    labels, prov = None, None
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
        labels = meta.get("alphabet", {}).get("labels")
        p = meta.get("provenance")
        if p:
            prov = Provenance(p["generator"], p["digest"], int(p["seed"]), p.get("params", {}))
    if body.size and body.max() >= size:
        raise SequenceFileError("symbol out of range for alphabet size %d" % size)
    return SymbolSequence(Alphabet(size, labels), body, prov)

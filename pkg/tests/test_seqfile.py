import numpy as np
import pytest

from serieslab.core import Alphabet, SymbolSequence
from serieslab.processes import gen_bernoulli
from serieslab.seqfile import SequenceFileError, read_sequence, sidecar_path, write_sequence
from serieslab.seeding import check_seed, digest, stream


def test_roundtrip_with_provenance(tmp_path):
    seq = gen_bernoulli([0.2, 0.3, 0.5], 1000, seed=9)
    path = tmp_path / "s.bin"
    write_sequence(path, seq)
    back = read_sequence(path)
    assert back == seq
    assert back.provenance == seq.provenance
    assert sidecar_path(path).exists()


def test_header_layout(tmp_path):
    seq = SymbolSequence(Alphabet(2), np.array([0, 1, 1]))
    path = tmp_path / "s.bin"
    write_sequence(path, seq)
    raw = path.read_bytes()
    assert raw[:8] == b"SERIESEQ"
    assert int.from_bytes(raw[8:12], "little") == 2
    assert int.from_bytes(raw[12:20], "little") == 3
    assert raw[20:] == b"\x00\x01\x01"


def test_labels_survive(tmp_path):
    seq = SymbolSequence(Alphabet(2, ("H", "T")), np.array([1, 0]))
    write_sequence(tmp_path / "s.bin", seq)
    assert read_sequence(tmp_path / "s.bin").text() == "TH"


def test_missing_sidecar_is_fine(tmp_path):
    seq = SymbolSequence(Alphabet(3), np.array([2, 0]))
    write_sequence(tmp_path / "s.bin", seq)
    sidecar_path(tmp_path / "s.bin").unlink()
    assert read_sequence(tmp_path / "s.bin") == seq


def test_bad_magic(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"NOTMAGIC" + bytes(12))
    with pytest.raises(SequenceFileError, match="not a SERIESEQ file"):
        read_sequence(tmp_path / "x.bin")


def test_truncated(tmp_path):
    seq = SymbolSequence(Alphabet(2), np.zeros(10, dtype=int))
    write_sequence(tmp_path / "s.bin", seq)
    raw = (tmp_path / "s.bin").read_bytes()
    (tmp_path / "s.bin").write_bytes(raw[:-3])
    with pytest.raises(SequenceFileError, match="truncated"):
        read_sequence(tmp_path / "s.bin")


def test_streams_are_independent_and_stable():
    a = stream(5, "x").integers(0, 2**32, 4)
    assert np.array_equal(a, stream(5, "x").integers(0, 2**32, 4))
    assert not np.array_equal(a, stream(5, "y").integers(0, 2**32, 4))
    assert not np.array_equal(a, stream(6, "x").integers(0, 2**32, 4))


def test_seed_range():
    assert check_seed(2**64 - 1) == 2**64 - 1
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(ValueError):
        check_seed(2**64)


def test_digest_key_order():
    assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})
    assert len(digest({})) == 16

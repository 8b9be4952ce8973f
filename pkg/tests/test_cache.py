import struct

import numpy as np
import pytest

from eklab.cache import MAGIC, dump_omega_table, file_digest, load_omega_table
from eklab.errors import IntegrityError
from eklab.primes import build_omega_table


def test_round_trip(tmp_path):
    for cutoff in (None, 7):
        table = build_omega_table(1000, cutoff)
        path = dump_omega_table(table, tmp_path / f"t{cutoff}.ekw")
        loaded = load_omega_table(path)
        assert loaded.limit == 1000 and loaded.cutoff == cutoff
        assert np.array_equal(loaded.counts, table.counts)


def test_header_layout(tmp_path):
    path = dump_omega_table(build_omega_table(12, 3), tmp_path / "t.ekw")
    raw = path.read_bytes()
    magic, version, limit, cutoff = struct.unpack_from("<4sBQQ", raw)
    assert (magic, version, limit, cutoff) == (b"EKW1", 1, 12, 3)
    assert magic == MAGIC
    body = raw[struct.calcsize("<4sBQQ"):]
    assert list(body) == [0, 1, 1, 1, 0, 2, 0, 1, 1, 1, 0, 2]


@pytest.mark.parametrize("offset, value", [(0, b"X"), (4, b"\x09")])
def test_rejects_bad_magic_or_version(tmp_path, offset, value):
    path = dump_omega_table(build_omega_table(50), tmp_path / "t.ekw")
    raw = bytearray(path.read_bytes())
    raw[offset : offset + 1] = value
    path.write_bytes(bytes(raw))
    with pytest.raises(IntegrityError):
        load_omega_table(path)


def test_rejects_truncated_body(tmp_path):
    path = dump_omega_table(build_omega_table(50), tmp_path / "t.ekw")
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(IntegrityError):
        load_omega_table(path)


def test_digest_detects_single_byte_flip(tmp_path):
    path = dump_omega_table(build_omega_table(500), tmp_path / "t.ekw")
    before = file_digest(path)
    raw = bytearray(path.read_bytes())
    raw[-100] ^= 1
    path.write_bytes(bytes(raw))
    assert file_digest(path) != before

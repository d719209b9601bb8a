import logging

import numpy as np
import pytest

from epschar import cache


def _table():
    idx = np.array([1, 5, 2**63 + 7], dtype=np.uint64)
    coeffs = np.arange(12, dtype=np.int64).reshape(3, 4) - 5
    return idx, coeffs


def test_roundtrip(tmp_path):
    idx, co = _table()
    cache.store(tmp_path, "h", "t_L", 2, 3, 2, idx, co)
    n, p, r, i2, c2 = cache.load(tmp_path, "h", "t_L")
    assert (n, p, r) == (2, 3, 2)
    assert np.array_equal(i2, idx) and np.array_equal(c2, co)


def test_deterministic_bytes():
    idx, co = _table()
    assert cache.encode(2, 3, 2, idx, co) == cache.encode(2, 3, 2, idx, co)


def test_missing_is_none(tmp_path):
    assert cache.load(tmp_path, "nope", "t_L") is None


def test_corrupt_checksum(tmp_path, caplog):
    idx, co = _table()
    path = cache.store(tmp_path, "h", "t_L", 2, 3, 2, idx, co)
    blob = bytearray(path.read_bytes())
    blob[cache.HEADER.size + 3] ^= 0xFF
    path.write_bytes(bytes(blob))
    with caplog.at_level(logging.WARNING):
        assert cache.load(tmp_path, "h", "t_L") is None
    assert "checksum" in caplog.text


def test_stale_version():
    import hashlib

    idx, co = _table()
    blob = bytearray(cache.encode(2, 3, 2, idx, co)[:-32])
    blob[4] = cache.VERSION + 1
    blob = bytes(blob) + hashlib.sha256(bytes(blob)).digest()
    with pytest.raises(ValueError, match="stale version"):
        cache.decode(blob)


def test_truncated():
    with pytest.raises(ValueError):
        cache.decode(b"EPSC")


def test_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv(cache.ENV_VAR, str(tmp_path))
    assert cache.cache_dir() == tmp_path
    assert cache.cache_dir("/x") == cache.Path("/x")


def test_shape_check():
    with pytest.raises(ValueError):
        cache.encode(2, 3, 2, np.zeros(2, dtype=np.uint64), np.zeros((3, 4)))

import pytest

from epschar.charfun import GenericDatum


@pytest.fixture(scope="session")
def d2():
    """Generic r=2 datum over F_3."""
    return GenericDatum.make(2, 3, 2, [(1, 2)], (0, 1))


@pytest.fixture(scope="session")
def d3():
    return GenericDatum.make(2, 3, 3, [(1, 0), (1, 2)], (0, 1))


@pytest.fixture(scope="session")
def d4():
    return GenericDatum.make(2, 5, 4, [(1, 3), (2, 0), (0, 1)], (1, 2))


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("EPSCHAR_CACHE", str(tmp_path / "cache"))

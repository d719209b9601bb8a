import json

import pytest

from epschar.config import Budgets, from_dict, load_config
from epschar.scalars import ConfigurationError

BASE = {"n": 2, "p": 3, "r": 2, "A": [[1, 2]], "lambda0": [0, 1]}


def _with(**kw):
    d = dict(BASE)
    d.update(kw)
    return d


def test_valid_and_defaults():
    cfg = from_dict(BASE)
    assert cfg.seed == 1 and cfg.budgets == Budgets()
    assert cfg.datum.regular


@pytest.mark.parametrize("patch,msg", [
    ({"p": 3, "r": 4, "A": [[1, 2]] * 3}, "p >= r violated: p=3, r=4"),
    ({"A": [[1, 1]]}, "A_1 not regular semisimple: entries 1,1 collide"),
    ({"A": [[1, 4]]}, "A_1 not regular semisimple: entries 1,1 collide"),
    ({"n": 4}, "n must be 2 or 3"),
    ({"p": 9}, "odd prime"),
    ({"p": 2}, "odd prime"),
    ({"r": 5, "p": 5, "A": [[1, 2]] * 4}, "r must lie in [1, 4]"),
    ({"A": [[1, 2], [0, 1]]}, "r-1 = 1"),
    ({"colour": 1}, "unknown config fields"),
    ({"budgets": {"speed": 1}}, "unknown budget fields"),
    ({"seed": -1}, "64 bits"),
    ({"n": True}, "must be an integer"),
])
def test_rejections(patch, msg):
    with pytest.raises(ConfigurationError) as exc:
        from_dict(_with(**patch))
    assert msg in str(exc.value)


def test_group_only_allows_r6():
    cfg = from_dict({"n": 2, "p": 7, "r": 6, "group_only": True})
    assert cfg.A == ((0, 0),) * 5


def test_lambda_reduced():
    assert from_dict(_with(lambda0=[3, -1])).lambda0 == (1, 1)


def test_hash_canonical():
    a = from_dict(BASE)
    b = from_dict(dict(reversed(list(BASE.items()))))
    assert a.hash == b.hash
    assert a.replace(seed=2).hash != a.hash
    assert " " not in a.canonical()


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(BASE))
    assert load_config(p).r == 2
    p.write_text("{")
    with pytest.raises(ConfigurationError):
        load_config(p)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")

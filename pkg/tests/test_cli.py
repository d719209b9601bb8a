import json

import pytest

from epschar.cli import main

R2 = {"n": 2, "p": 3, "r": 2, "A": [[1, 2]], "lambda0": [0, 1], "seed": 3}
R4 = {"n": 2, "p": 5, "r": 4, "A": [[1, 3], [2, 0], [0, 1]], "lambda0": [1, 2]}


@pytest.fixture
def cfg2(tmp_path):
    p = tmp_path / "r2.json"
    p.write_text(json.dumps(R2))
    return str(p)


def _strip_times(obj):
    if isinstance(obj, dict):
        return {k: _strip_times(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [_strip_times(v) for v in obj]
    return obj


def test_lemmas_pass_and_report(cfg2, tmp_path, capsys):
    out = tmp_path / "rep" / "lemmas.json"
    assert main(["lemmas", "--config", cfg2, "--out", str(out)]) == 0
    body = json.loads(out.read_text())
    assert body["status"] == "pass" and body["suite"] == "lemmas"
    assert list(out.parent.glob("lemmas-lemmas-*.png"))
    assert "lemmas: PASS" in capsys.readouterr().out


def test_report_deterministic(cfg2, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["induce", "--config", cfg2, "--report", str(path), "--no-plots"]) == 0
    assert _strip_times(json.loads(a.read_text())) == _strip_times(json.loads(b.read_text()))
    assert not list(tmp_path.glob("*.png"))


def test_induce_binary_table(cfg2, tmp_path):
    from epschar import cache

    table = tmp_path / "t.epsc"
    assert main(["induce", "--config", cfg2, "--out", str(table), "--no-plots"]) == 0
    n, p, r, idx, coeffs = cache.decode(table.read_bytes())
    assert (n, p, r, len(idx)) == (2, 3, 2, 3888)


def test_compare_lk_fails_with_repro(cfg2, capsys):
    assert main(["compare-lk", "--config", cfg2]) == 1
    err = capsys.readouterr().err
    assert "repro" in err and "t_K = 1 * q^4 * t_L" in err


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**R2, "A": [[1, 1]]}))
    assert main(["ladder", "--config", str(bad)]) == 2
    assert "not regular semisimple" in capsys.readouterr().err


def test_budget_exit(tmp_path, capsys):
    p = tmp_path / "small.json"
    p.write_text(json.dumps({**R2, "budgets": {"max_elements": 100}}))
    assert main(["induce", "--config", str(p), "--no-cache", "--out", str(tmp_path / "t.epsc")]) == 3
    assert "--force" in capsys.readouterr().err


def test_compare_lk_refused_at_r4(tmp_path):
    p = tmp_path / "r4.json"
    p.write_text(json.dumps(R4))
    assert main(["compare-lk", "--config", str(p)]) == 3


def test_group_adhoc_and_missing_args(capsys):
    assert main(["group", "selftest", "--n", "2", "--p", "5", "--r", "4"]) == 0
    assert main(["group", "--n", "2"]) == 2


def test_bch_emit(tmp_path):
    emit = tmp_path / "tables.json"
    assert main(["bch", "--r", "4", "--emit", str(emit), "--no-plots"]) == 0
    assert {"z", "u", "u_prime"} <= set(json.loads(emit.read_text()))


def test_fourier_r_mismatch(cfg2):
    assert main(["fourier", "--config", cfg2, "--r", "3"]) == 2


def test_fourier_r2_torus(cfg2):
    assert main(["fourier", "--config", cfg2, "--bases", "T"]) == 0


def test_cache_reused(cfg2, tmp_path, caplog):
    import logging

    cdir = tmp_path / "c"
    assert main(["induce", "--config", cfg2, "--cache-dir", str(cdir), "--no-plots"]) == 0
    files = list(cdir.glob("*.epsc"))
    assert len(files) == 1
    blob = bytearray(files[0].read_bytes())
    blob[40] ^= 1
    files[0].write_bytes(bytes(blob))
    with caplog.at_level(logging.WARNING):
        assert main(["induce", "--config", cfg2, "--cache-dir", str(cdir), "--no-plots"]) == 0
    assert "recomputing" in caplog.text

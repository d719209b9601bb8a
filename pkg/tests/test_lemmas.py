import pytest

from epschar import lemmas


@pytest.mark.parametrize("case", ["sum_last", "unipotent"])
def test_r2_r3_cases(case, d2, d3):
    for d in (d2, d3):
        res = lemmas.vanishing_lemma(case, d, samples=200, seed=5)
        assert res.passed, res.as_dict()
        assert res.samples == 200


@pytest.mark.parametrize("case", lemmas.CASES)
def test_r4_cases(case, d4):
    res = lemmas.vanishing_lemma(case, d4, samples=100, seed=7)
    assert res.passed, res.as_dict()


def test_action_closed_form_flag(d4):
    res = lemmas.vanishing_lemma("action_n3", d4, samples=50, seed=1)
    assert res.checks["closed_form"]


def test_unknown_case(d2):
    with pytest.raises(ValueError):
        lemmas.vanishing_lemma("nope", d2)


def test_result_dict_roundtrip():
    r = lemmas.LemmaResult("sum_last", 2, 3, 10, 1)
    assert not r.passed
    assert r.as_dict()["nonzero_sums"] == 1

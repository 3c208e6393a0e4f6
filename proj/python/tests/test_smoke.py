import math

import pytest

import kakulab as kk


def test_convergents():
    g = kk.golden_mean()
    fib = [1, 1]
    while len(fib) <= 30:
        fib.append(fib[-1] + fib[-2])
    assert [g.q(k) for k in range(31)] == fib
    assert kk.sqrt2_minus_1().q(5) == 70


def test_roof_and_sums():
    r = kk.RoofParams(-0.5)
    assert kk.eval_roof(r, 0.25) == pytest.approx(2.0 + 1.0 / math.sqrt(0.75))
    g = kk.golden_mean()
    two = kk.birkhoff_sum(r, g, 0.31, 2)
    assert two == pytest.approx(kk.eval_roof(r, 0.31) + kk.eval_roof(r, (0.31 + g.value) % 1.0))
    rep = kk.dk_check(r, g, 0.31, g.q(8))
    assert rep["all_pass"] and rep["s"] == 8


def test_flow_and_match():
    f = kk.SpecialFlow(kk.RoofParams(-0.5), kk.golden_mean())
    x = (0.731, 1.1)
    back = f.flow(f.flow(x, 7.3), -7.3)
    assert back[0] == pytest.approx(x[0], abs=1e-10)
    assert back[1] == pytest.approx(x[1], abs=1e-10)
    res = kk.best_match([1, 2], [2, 1], 0.1)
    assert res["count"] == 1 and res["pairs"] == [(0, 1)]


def test_bounds_and_errors(tmp_path):
    lo, hi, ns = kk.theorem_bounds(-0.8, -0.5)
    assert lo == pytest.approx(16 / 15, abs=1e-12)
    assert hi == pytest.approx(2.3, abs=1e-12)
    assert ns
    assert len(kk.disjoint_family(-0.8, -0.5, 3)) == 3
    with pytest.raises(ValueError):
        kk.theorem_bounds(-0.5, -0.8)
    assert kk.run_cli(["bounds", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "bounds.csv").exists()
    assert kk.run_cli(["sn-measure", "--gamma", "0.5", "--out", str(tmp_path)]) == 2

import math

import pytest

import cuspgrowth as cg


def test_constant_curvature_distance():
    m = cg.CuspModel.constant(1.0)
    assert cg.exact_distance(m, (0.0, 0.0), (5.0, 0.0)) == pytest.approx(2 * math.asinh(2.5), rel=1e-12)
    assert cg.exact_distance(m, (1.0, 2.0), (1.0, 6.0)) == pytest.approx(4.0)


def test_counting_closed_form():
    m = cg.CuspModel.constant(1.0)
    grid = [10.0, 20.0, 30.0]
    for R, lv in zip(grid, cg.log_parabolic_counting(m, grid)):
        assert round(math.exp(lv)) == 2 * math.floor(2 * math.sinh(R / 2)) + 1


def test_cuspidal_closed_form():
    m = cg.CuspModel.constant(1.0)
    assert cg.log_cuspidal_F(m, 8.0) == pytest.approx(math.log(2 * (math.exp(4.0) - 1)), rel=1e-9)


def test_lattice():
    assert cg.word_count(8) == 13121
    assert cg.displacement("p", 1.0) == pytest.approx(math.acosh(3.0))
    value, annulus, counts = cg.partial_poincare(1.3, 6)
    assert value == pytest.approx(sum(annulus))
    assert counts[0] == 1 and counts[1] == 4


def test_built_model_and_errors():
    m = cg.build_model()
    assert m.beta == 2.5
    assert m.u(3.0) == 3.0
    with pytest.raises(cg.ConstraintError):
        cg.build_model({"alpah": 1})
    assert cg.config_hash() == cg.config_hash({})
    assert cg.config_hash({"beta": 3.0}) != cg.config_hash()


def test_run_verb(tmp_path):
    report, code = cg.run("feasibility", {}, tmp_path)
    assert code == 0
    assert (tmp_path / "feasibility.json").exists()
    assert isinstance(report, dict)

from fractions import Fraction as F

import pytest

from qmicro import polynomial as P
from qmicro.errors import InvalidArgumentError
from qmicro.piecewise import PiecewisePolynomial


def tent_shape():
    # x on [0, 1), 1 - (x - 1) on [1, 2)
    return PiecewisePolynomial((F(0), F(1), F(2)), ((F(0), F(1)), (F(1), F(-1))), "rational")


def test_polynomial_helpers():
    assert P.mul([1, 1], [1, -1]) == [1, 0, -1]
    assert P.add([1, 2, 3], [1]) == [2, 2, 3]
    assert P.trim([1, 0, 0]) == [1]
    assert P.derivative([1, 2, 3], 2) == [6]
    assert P.evaluate([], 5) == 0
    # (y + 1)^2 = 1 + 2y + y^2
    assert P.taylor_shift([0, 0, 1], 1) == [1, 2, 1]
    assert P.integrate([F(0), F(0), F(3)], F(0), F(2)) == F(8)


def test_add_scale_mul_edges():
    assert P.add([1], [1, 2, 3]) == [2, 2, 3]
    assert P.scale([F(1), F(-2)], F(1, 2)) == [F(1, 2), F(-1)]
    assert P.mul([], [1, 2]) == []
    assert P.mul([0, 1], [2.0, 1.0]) == [0.0, 2.0, 1.0]


def test_right_continuous_and_one_sided():
    f = tent_shape()
    assert f.evaluate(F(1)) == 1
    assert f.evaluate(F(1), side="left") == 1
    assert f.evaluate(F(1), order=1) == -1
    assert f.evaluate(F(1), order=1, side="left") == 1
    assert f.evaluate(F(2)) == 0
    assert f.evaluate(F(2), side="left") == 0
    assert f.evaluate(F(-1)) == 0
    assert f(F(1, 2)) == F(1, 2)


def test_one_sided_derivatives_at_knot():
    left, right = tent_shape().one_sided_derivatives(1)
    assert left == [1, 1]
    assert right == [1, -1]


def test_integrate_moment_clamps_to_support():
    f = tent_shape()
    assert f.integrate_moment(F(-5), F(5)) == 1
    assert f.integrate_moment(F(0), F(2), 1) == 1
    assert f.integrate_moment(F(3), F(4)) == 0
    with pytest.raises(InvalidArgumentError):
        f.integrate_moment(F(1), F(0))


def test_critical_points_exact_root():
    # -x^2 + x + 1/2 on [1, 2) peaks at 3/2
    f = PiecewisePolynomial((F(1), F(2)), ((F(1, 2), F(1), F(-1)),), "rational")
    assert f.critical_points() == [F(3, 2)]


def test_critical_points_flat_piece_reports_left_knot():
    f = PiecewisePolynomial((0.0, 1.0), ((1.0,),), "float")
    assert f.critical_points() == [0.0]


def test_rejects_bad_knots():
    with pytest.raises(InvalidArgumentError):
        PiecewisePolynomial((F(0),), (), "rational")
    with pytest.raises(InvalidArgumentError):
        PiecewisePolynomial((F(1), F(0)), ((F(1),),), "rational")
    with pytest.raises(InvalidArgumentError):
        PiecewisePolynomial((F(0), F(1), F(2)), ((F(1),),), "rational")


def test_dict_form_keeps_fractions():
    f = tent_shape()
    data = f.to_dict()
    assert data["knots"] == ["0/1", "1/1", "2/1"]
    assert PiecewisePolynomial.from_dict(data) == f


def test_to_float_and_scaled():
    f = tent_shape()
    g = f.to_float().scaled(2.0)
    assert g.backing == "float"
    assert g.evaluate(0.5) == pytest.approx(1.0)
    assert f.derivative().evaluate(F(3, 2)) == -1

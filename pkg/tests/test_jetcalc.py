from fractions import Fraction

import pytest
import sympy as sp

from cclass_ode.jetcalc import (
    JetEvaluationError,
    JetPoint,
    JetSystem,
    SingularJetError,
    evaluate_along,
    evaluate_at_jet,
    formal_solve,
    jet_series,
    normalize,
    residual,
    total_derivative,
)
from cclass_ode.parser import T, jet_symbol
from cclass_ode.series import TruncatedSeries

F = Fraction
u = [jet_symbol(1, k) for k in range(6)]


@pytest.fixture
def quintic() -> JetSystem:
    return JetSystem.parse("5*u3*u4/u2 - 40/9*u3^3/u2^2", 1, 4)


def test_system_shape_checks():
    """测试右端项个数与变量范围检查"""
    with pytest.raises(JetEvaluationError):
        JetSystem(2, 2, (sp.Integer(0),))
    with pytest.raises(JetEvaluationError):
        JetSystem(1, 2, (u[3],))


def test_denominators(quintic: JetSystem):
    """测试奇异射流的分母"""
    assert len(quintic.denominators) == 1
    assert JetSystem.trivial(2, 3).denominators == []


def test_total_derivative(quintic: JetSystem):
    """测试全导数在最高阶变量上代入右端项"""
    assert total_derivative(u[0], quintic) == u[1]
    assert total_derivative(T * u[2], quintic) == u[2] + T * u[3]
    assert normalize(total_derivative(u[4], quintic) - quintic.rhs[0]) == 0


def test_total_derivative_system():
    """测试方程组的全导数"""
    system = JetSystem.parse("D(u2,2); 0", 2, 2)
    v = jet_symbol(2, 2)
    assert total_derivative(jet_symbol(1, 2), system) == v
    assert total_derivative(v, system) == 0


def test_evaluate_at_jet(quintic: JetSystem):
    """测试有理数精确求值"""
    point = JetPoint(0, ((0, 0, 1, 3, 2),))
    assert evaluate_at_jet(quintic.rhs[0], point) == 5 * 3 * 2 - F(40, 9) * 27


def test_evaluate_at_singular_jet(quintic: JetSystem):
    """测试分母为零时报错"""
    point = JetPoint(0, ((0, 0, 0, 3, 2),))
    with pytest.raises(JetEvaluationError):
        evaluate_at_jet(quintic.rhs[0], point)


def test_jet_point_dict():
    """测试射流点的输出形式"""
    point = JetPoint(F(1, 2), ((1, -2),))
    assert point.to_dict() == {"t": "1/2", "u1_0": "1/1", "u1_1": "-2/1"}
    assert (point.m, point.n) == (1, 1)

    with pytest.raises(JetEvaluationError):
        JetPoint(0, ((1, 2), (3,)))


def test_formal_solve_exponential():
    """测试 u″ = u 的级数解为 e^t"""
    system = JetSystem.parse("u", 1, 1)
    (sol,) = formal_solve(system, JetPoint(0, ((1, 1),)), 5)
    assert sol.coeffs == (1, 1, F(1, 2), F(1, 6), F(1, 24), F(1, 120))


def test_formal_solve_residual(quintic: JetSystem):
    """测试级数解满足方程"""
    point = JetPoint(1, ((2, -1, 3, 1, -2),))
    solution = formal_solve(quintic, point, 12)
    assert all(r.is_zero() for r in residual(quintic, solution))
    assert solution[0].t0 == 1


def test_formal_solve_shape_mismatch(quintic: JetSystem):
    """测试射流点形状与方程不符"""
    with pytest.raises(JetEvaluationError):
        formal_solve(quintic, JetPoint(0, ((1, 2, 3),)), 8)


def test_jet_series_orders():
    """测试 jet_series 的公共阶数为 N − n"""
    sol = TruncatedSeries.from_polynomial([1, 2, 3, 4, 5], order=6)
    leaves = jet_series([sol], 2)
    assert leaves[u[2]].coeffs == (6, 24, 60, 0, 0)
    assert leaves[T].coeffs == (0, 1, 0, 0, 0)


def test_evaluate_along_singular():
    """测试沿解的分母为零"""
    leaves = {u[0]: TruncatedSeries.variable(3)}
    with pytest.raises(SingularJetError):
        evaluate_along(1 / u[0], leaves, 3)

from fractions import Fraction

import pytest

from cclass_ode.series import (
    MatrixSeries,
    SeriesError,
    TruncatedSeries,
    solve_linear_ode,
    solve_second_order,
    taylor_coefficients,
)

F = Fraction


def test_arithmetic_truncates_to_common_order():
    """测试加法与乘法取较低截断阶"""
    a = TruncatedSeries.from_polynomial([1, 2, 3], order=4)
    b = TruncatedSeries.from_polynomial([0, 1], order=2)
    assert (a + b).order == 2
    assert (a * b).coeffs == (0, 1, 2)
    assert (2 - a).coeffs == (1, -2, -3, 0, 0)


def test_inverse_of_one_plus_t():
    """测试 1/(1+t) 的展开"""
    s = TruncatedSeries.from_polynomial([1, 1], order=5)
    assert s.inverse().coeffs == (1, -1, 1, -1, 1, -1)
    assert (s / s).coeffs == TruncatedSeries.constant(1, 5).coeffs


def test_inverse_needs_nonzero_constant():
    """测试常数项为零时不可逆"""
    with pytest.raises(SeriesError):
        TruncatedSeries.variable(3).inverse()


def test_exp():
    """测试 exp(t)"""
    e = TruncatedSeries.variable(4).exp()
    assert e.coeffs == (1, 1, F(1, 2), F(1, 6), F(1, 24))

    with pytest.raises(SeriesError):
        TruncatedSeries.constant(1, 3).exp()


def test_derivative_and_antiderivative():
    """测试求导降低一阶、积分升高一阶"""
    s = TruncatedSeries.from_polynomial([1, 2, 3, 4], order=3)
    assert s.derivative().coeffs == (2, 6, 12)
    assert s.antiderivative(5).coeffs == (5, 1, 1, 1, 1)
    assert s.nth_derivative(3).coeffs == (24,)

    with pytest.raises(SeriesError):
        TruncatedSeries.constant(1, 0).derivative()


def test_reversion():
    """测试 t + t² 的反函数 s − s² + 2s³ − 5s⁴"""
    f = TruncatedSeries.from_polynomial([0, 1, 1], order=4)
    T = f.reversion()
    assert T.coeffs == (0, 1, -1, 2, -5)
    assert f.compose(T) == TruncatedSeries.variable(4)


def test_reversion_shifted_point():
    """测试非零展开点的反演"""
    f = TruncatedSeries.from_polynomial([3, 2], order=3, t0=1)
    T = f.reversion()
    assert T.t0 == 3
    assert T.coeffs == (1, F(1, 2), 0, 0)


def test_mismatched_expansion_points():
    """测试展开点不一致时报错"""
    a = TruncatedSeries.constant(1, 2, t0=0)
    b = TruncatedSeries.constant(1, 2, t0=1)
    with pytest.raises(SeriesError):
        a + b


def test_taylor_coefficients():
    """测试由导数值得到 Taylor 系数"""
    assert taylor_coefficients([1, 1, 2, 6]) == (1, 1, 1, 1)


def test_matrix_inverse():
    """测试矩阵级数求逆"""
    A = MatrixSeries.from_coefficients([[[1, 2], [0, 1]], [[1, 0], [1, 1]], [[0, 3], [0, 0]]])
    assert A @ A.inverse() == MatrixSeries.identity(2, 2)

    with pytest.raises(SeriesError):
        MatrixSeries.constant([[1, 1], [1, 1]], 2).inverse()


def test_matrix_trace_and_shape():
    """测试迹与尺寸检查"""
    A = MatrixSeries.constant([[1, 2], [3, 4]], 1)
    assert A.trace().coeffs == (5, 0)
    with pytest.raises(SeriesError):
        A @ MatrixSeries.constant([[1, 2, 3]], 1)


def test_solve_linear_ode():
    """测试 μ′ = μ 的解为 exp"""
    mu = solve_linear_ode(MatrixSeries.constant([[1]], 4), [[1]])
    assert mu.order == 5
    assert mu.entries[0][0].coeffs == (1, 1, F(1, 2), F(1, 6), F(1, 24), F(1, 120))


def test_solve_second_order():
    """测试 z″ = z 的解为 cosh"""
    z = solve_second_order(TruncatedSeries.constant(1, 3), 1, 0)
    assert z.coeffs == (1, 0, F(1, 2), 0, F(1, 24), 0)

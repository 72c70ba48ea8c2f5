from fractions import Fraction

import pytest

from cclass_ode.linalg import (
    LinearAlgebraError,
    SparseMatrix,
    invert_dense,
    orthogonal_projection,
    rational_str,
    vec_add,
    vec_axpy,
    weighted_dot,
)

F = Fraction


def test_rational_str():
    """测试有理数统一输出为 p/q"""
    assert rational_str(3) == "3/1"
    assert rational_str(F(-4, 6)) == "-2/3"


def test_vector_helpers_drop_zeros():
    """测试稀疏向量运算删除零分量"""
    assert vec_add({0: F(1), 1: F(2)}, {0: F(-1)}) == {1: 2}
    out = {0: F(1)}
    vec_axpy(out, 2, {0: F(-1, 2), 3: F(1)})
    assert out == {3: 2}
    assert weighted_dot({0: F(1), 1: F(2)}, {1: F(3)}, [F(1), F(5)]) == 30


def test_rank_and_nullspace():
    """测试秩与零空间"""
    A = SparseMatrix.from_rows([[1, 2], [2, 4]])
    assert A.rank() == 1
    assert A.nullspace() == [{1: 1, 0: -2}]
    assert SparseMatrix({}, (3, 2)).nullspace() == [{0: 1}, {1: 1}]


def test_solve():
    """测试求解与无解情形"""
    A = SparseMatrix.from_rows([[1, 1], [1, -1]])
    assert A.solve({0: F(2)}) == {0: 1, 1: 1}
    assert SparseMatrix.from_rows([[1], [1]]).solve({0: F(1), 1: F(2)}) is None
    assert A.solve_many([{}, {1: F(2)}]) == [{}, {0: 1, 1: -1}]


def test_solve_many_repeated_inconsistent_rhs():
    """测试重复的无解右端都返回 None"""
    A = SparseMatrix.from_rows([[1], [1]])
    b = {0: F(1), 1: F(2)}
    assert A.solve_many([b, b, {0: F(3), 1: F(3)}]) == [None, None, {0: 3}]


def test_matrix_products():
    """测试乘法、转置与相等"""
    A = SparseMatrix.from_rows([[1, 2], [3, 4]])
    assert A @ SparseMatrix.identity(2) == A
    assert A.transpose().to_dense() == [[1, 3], [2, 4]]
    assert (A - A).is_zero()
    assert A.apply({1: F(1)}) == {0: 2, 1: 4}


def test_select_and_stack():
    """测试取行列与拼接"""
    A = SparseMatrix.from_rows([[1, 0, 2], [0, 3, 0]])
    assert A.select_columns([2]).to_dense() == [[2], [0]]
    assert A.select_rows([1]).to_dense() == [[0, 3, 0]]
    assert A.stack(A).shape == (4, 3)
    assert A.independent_columns() == [0, 1]


def test_charpoly():
    """测试特征多项式"""
    assert SparseMatrix.from_rows([[2, 0], [0, 3]]).charpoly() == [1, -5, 6]


def test_invalid_shapes():
    """测试非法尺寸"""
    with pytest.raises(LinearAlgebraError):
        SparseMatrix({2: {0: F(1)}}, (1, 2))
    with pytest.raises(LinearAlgebraError):
        SparseMatrix.from_rows([[1, 2], [3]])


def test_invert_dense():
    """测试稠密矩阵求逆"""
    assert invert_dense([[F(2), F(1)], [F(1), F(1)]]) == [[1, -1], [-1, 2]]
    with pytest.raises(LinearAlgebraError):
        invert_dense([[F(1), F(2)], [F(2), F(4)]])


def test_orthogonal_projection():
    """测试带权正交投影"""
    assert orthogonal_projection({0: F(1), 1: F(1)}, [{0: F(1)}], [F(1), F(1)]) == {0: 1}
    assert orthogonal_projection({0: F(1)}, [{0: F(1), 1: F(1)}], [F(1), F(2)]) == {
        0: F(1, 3),
        1: F(1, 3),
    }

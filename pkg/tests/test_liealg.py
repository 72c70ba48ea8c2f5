from fractions import Fraction

import pytest

from cclass_ode.liealg import (
    LieAlgebraError,
    LieAlgebraTable,
    ad_matrix,
    bracket,
    build_ode_algebra,
    check_filtration_brackets,
    check_grading_element,
    e_index,
    inner_product,
    sl2_decompose,
    table_dump,
    transpose_on_q,
    v_index,
    verify_lie_axioms,
)


@pytest.mark.parametrize("m, n, dim", [(1, 3, 8), (1, 4, 9), (2, 2, 13), (3, 2, 21)])
def test_dimension(m, n, dim):
    """测试 dim g(m,n) = 3 + m² + m(n+1)"""
    assert build_ode_algebra(m, n).dim == dim


def test_build_is_cached():
    """测试同一参数返回同一个表"""
    assert build_ode_algebra(1, 4) is build_ode_algebra(1, 4)


@pytest.mark.parametrize("m, n", [(0, 3), (1, 1)])
def test_invalid_parameters(m, n):
    """测试非法参数"""
    with pytest.raises(LieAlgebraError):
        build_ode_algebra(m, n)


@pytest.mark.parametrize("name", ["g13", "g14", "g22"])
def test_lie_axioms(name, request):
    """测试反对称性、Jacobi 恒等式与分次"""
    L: LieAlgebraTable = request.getfixturevalue(name)
    assert verify_lie_axioms(L).passed
    assert check_filtration_brackets(L).passed
    assert check_grading_element(L)


def test_injected_errors_are_found(g14: LieAlgebraTable):
    """测试被修改的括号被检出"""
    X, H, Y = g14.single("X"), g14.single("H"), g14.single("Y")

    broken = g14.with_bracket(X, Y, {H: Fraction(2)}, antisymmetric=False)
    verdict = verify_lie_axioms(broken)
    assert verdict.failure == "antisymmetry"
    assert verdict.witness == ("X", "Y")

    assert not verify_lie_axioms(g14.with_bracket(X, Y, {H: Fraction(2)})).passed


def test_sl2_relations(g14: LieAlgebraTable):
    """测试 [H,X] = 2X、[X,Y] = H、[X, v^i] = v^{i−1}"""
    X, H, Y = (g14.basis_element(g14.single(r)) for r in ("X", "H", "Y"))
    assert bracket(H, X) == 2 * X
    assert bracket(X, Y) == H
    v2 = g14.basis_element(v_index(g14, 2, 1))
    assert bracket(X, v2) == g14.basis_element(v_index(g14, 1, 1))
    assert bracket(Y, v2) == 6 * g14.basis_element(v_index(g14, 3, 1))


def test_gl_action(g22: LieAlgebraTable):
    """测试 e^a_b 把 e_a 映到 e_b"""
    e12 = g22.basis_element(e_index(g22, 1, 2))
    v01 = g22.basis_element(v_index(g22, 0, 1))
    assert bracket(e12, v01) == g22.basis_element(v_index(g22, 0, 2))


def test_grading(g14: LieAlgebraTable):
    """测试 X 与 v^i 的次数"""
    assert g14.degree(g14.single("X")) == -1
    assert [g14.degree(i) for i in g14.role("a")] == [-5, -4, -3, -2, -1]


def test_inner_product(g14: LieAlgebraTable):
    """测试 Gram 矩阵对角元"""
    v0 = g14.basis_element(v_index(g14, 0, 1))
    v4 = g14.basis_element(v_index(g14, 4, 1))
    assert inner_product(v0, v0) == 24
    assert inner_product(v4, v4) == Fraction(1, 24)
    assert inner_product(v0, v4) == 0


def test_transpose_on_q(g22: LieAlgebraTable):
    """测试 q 上的转置"""
    X = g22.basis_element(g22.single("X"))
    Y = g22.basis_element(g22.single("Y"))
    assert transpose_on_q(X) == Y
    e12 = g22.basis_element(e_index(g22, 1, 2))
    assert transpose_on_q(e12) == g22.basis_element(e_index(g22, 2, 1))

    with pytest.raises(LieAlgebraError):
        transpose_on_q(g22.basis_element(v_index(g22, 0, 1)))


def test_elements_of_different_algebras(g14: LieAlgebraTable, g13: LieAlgebraTable):
    """测试不同代数的元素不能相加"""
    with pytest.raises(LieAlgebraError):
        g14.basis_element(0) + g13.basis_element(0)


def test_permuted_table_keeps_axioms(g13: LieAlgebraTable):
    """测试换基后公理仍成立"""
    order = list(reversed(range(g13.dim)))
    P = g13.permuted(order)
    assert P.labels[0] == g13.labels[-1]
    assert verify_lie_axioms(P).passed

    with pytest.raises(LieAlgebraError):
        g13.permuted([0, 0, 1])


def test_table_dump(g13: LieAlgebraTable):
    """测试结构常数表输出"""
    dump = table_dump(g13)
    assert dump["name"] == "g(1,3)"
    assert dump["dim"] == 8
    assert dump["labels"][:3] == ["X", "H", "Y"]
    assert all(b["i"] < b["j"] for b in dump["brackets"])
    xy = next(b for b in dump["brackets"] if (b["i"], b["j"]) == (0, 2))
    assert xy["coeffs"] == {"1": "1/1"}


@pytest.mark.parametrize(
    "name, expected",
    [("g14", {4: 1, 2: 1, 0: 1}), ("g22", {2: 3, 0: 4})],
)
def test_adjoint_sl2_decomposition(name, expected, request):
    """测试伴随表示的 sl₂ 分解"""
    L: LieAlgebraTable = request.getfixturevalue(name)
    x, h, y = (ad_matrix(L, L.basis_element(L.single(r))) for r in ("X", "H", "Y"))
    decomposition = sl2_decompose(x, h, y)
    assert decomposition.multiplicities == expected
    assert decomposition.dim == L.dim
    for k, c in expected.items():
        assert len(decomposition.highest_weight_vectors[k]) == c


def test_sl2_decompose_rejects_bad_triple(g14: LieAlgebraTable):
    """测试不满足 sl₂ 关系的三元组"""
    x, h = (ad_matrix(g14, g14.basis_element(g14.single(r))) for r in ("X", "H"))
    with pytest.raises(LieAlgebraError):
        sl2_decompose(x, h, x)

import random
from fractions import Fraction

import pytest

from cclass_ode.cochain import (
    Cochain,
    CochainError,
    act,
    assemble,
    box_inverse,
    box_inverse_polynomial,
    ce_matrix,
    cochain_space,
    cochain_to_json,
    d_a,
    d_g,
    d_gminus,
    d_gminus_direct,
    dstar,
    dstar_block,
    evaluate,
    homogeneities,
    inner,
    interior,
    laplacian_box,
    sort_sign,
    split,
)
from cclass_ode.liealg import LieAlgebraTable, v_index


def _random_cochain(L: LieAlgebraTable, k: int, tag, seed: int) -> Cochain:
    rng = random.Random(seed)
    space = cochain_space(L, k, tag)
    return Cochain(space, {rng.randrange(space.dim): Fraction(rng.randint(-3, 3)) for _ in range(5)})


def test_sort_sign():
    """测试指标组排序的符号"""
    assert sort_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert sort_sign((1, 0)) == ((0, 1), -1)
    assert sort_sign((1, 1)) is None


@pytest.mark.parametrize("tag", ["full", "a_coeff", "gminus"])
def test_dd_is_zero(g13: LieAlgebraTable, tag):
    """测试 d∘d = 0"""
    for k in (0, 1):
        assert (ce_matrix(g13, k + 1, tag) @ ce_matrix(g13, k, tag)).is_zero()


def test_horizontal_has_no_differential(g13: LieAlgebraTable):
    """测试水平上链没有自身的微分矩阵"""
    with pytest.raises(CochainError):
        ce_matrix(g13, 1, "horizontal")


DIFFERENTIALS = {"full": d_g, "a_coeff": d_a, "gminus": d_gminus_direct}


@pytest.mark.parametrize("name", ["g13", "g14", "g22"])
@pytest.mark.parametrize("tag", ["full", "a_coeff", "gminus"])
@pytest.mark.parametrize("seed", range(3))
def test_dstar_is_adjoint(name, tag, seed, request):
    """测试各复形上 ⟨dφ, ψ⟩ = ⟨φ, ∂*ψ⟩"""
    L: LieAlgebraTable = request.getfixturevalue(name)
    d = DIFFERENTIALS[tag]
    for k in (1, 2):
        phi = _random_cochain(L, k - 1, tag, seed)
        psi = _random_cochain(L, k, tag, 1000 + seed)
        assert inner(d(phi), psi) == inner(phi, dstar(psi))


@pytest.mark.parametrize("seed", range(5))
def test_horizontal_dstar_matches_gminus(g22: LieAlgebraTable, seed):
    """测试水平 ∂* 与 g₋ 上的 ∂* 一致"""
    psi = _random_cochain(g22, 2, "horizontal", seed)
    assert dstar(psi) == dstar(psi.retag("gminus")).retag("horizontal")


def test_dstar_block_formula(g13: LieAlgebraTable):
    """测试 ∂* 的分块公式"""
    for phi in cochain_space(g13, 2, "horizontal").basis():
        assert dstar_block(phi) == split(dstar(phi))


def test_d_gminus_block_formula(g13: LieAlgebraTable):
    """测试 ∂ 的分块公式"""
    for phi in cochain_space(g13, 1, "gminus").basis():
        assert d_gminus(split(phi)) == split(d_gminus_direct(phi))


def test_split_assemble(g22: LieAlgebraTable):
    """测试分裂后再组装得到原上链"""
    phi = _random_cochain(g22, 2, "gminus", 7)
    assert assemble(split(phi)) == phi
    assert split(Cochain.zero(g22, 0, "gminus")).phi1 is None


def test_evaluate_is_alternating(g14: LieAlgebraTable):
    """测试求值的反对称性"""
    X = g14.single("X")
    v = v_index(g14, 0, 1)
    H = g14.single("H")
    phi = Cochain.from_terms(g14, 2, "gminus", {((X, v), H): 1})
    bx, bv = g14.basis_element(X), g14.basis_element(v)
    assert evaluate(phi, [bx, bv]) == g14.basis_element(H)
    assert evaluate(phi, [bv, bx]) == -g14.basis_element(H)

    swapped = Cochain.from_terms(g14, 2, "gminus", {((v, X), H): 1})
    assert swapped == -phi


def test_evaluate_canonical_basis_sign(g14: LieAlgebraTable):
    """测试 {v, X} 上的规范基上链 ω^X∧ω_v ⊗ H 在 (v, X) 上取 −H"""
    X, H = g14.single("X"), g14.single("H")
    v = v_index(g14, 0, 1)
    space = cochain_space(g14, 2, "gminus")
    basis_cochain = space.basis()[space.index((X, v), H)]
    bx, bv, bh = (g14.basis_element(i) for i in (X, v, H))
    assert evaluate(basis_cochain, [bv, bx]) == -bh
    assert evaluate(basis_cochain, [bx, bx]) == g14.zero()

    # 非规范顺序的楔积 ω_v∧ω^X 是规范基上链的相反数
    reversed_wedge = Cochain.from_terms(g14, 2, "gminus", {((v, X), H): 1})
    assert reversed_wedge == -basis_cochain
    assert evaluate(reversed_wedge, [bv, bx]) == bh


def test_interior(g14: LieAlgebraTable):
    """测试插入 X"""
    X, H = g14.single("X"), g14.single("H")
    v = v_index(g14, 0, 1)
    phi = Cochain.from_terms(g14, 2, "gminus", {((X, v), H): 1})
    assert interior(X, phi) == Cochain.from_terms(g14, 1, "gminus", {((v,), H): 1})
    assert interior(v, phi) == Cochain.from_terms(g14, 1, "gminus", {((X,), H): -1})


def test_action_of_h(g14: LieAlgebraTable):
    """测试 H 在上链上的作用给出权"""
    X, H, Y = (g14.single(r) for r in ("X", "H", "Y"))
    h = g14.basis_element(H)
    wx = Cochain.from_terms(g14, 1, "gminus", {((X,), X): 1})
    wy = Cochain.from_terms(g14, 1, "gminus", {((X,), Y): 1})
    assert act(h, wx).is_zero()
    assert act(h, wy) == -4 * wy


def test_retag_rejects_foreign_forms(g14: LieAlgebraTable):
    """测试含 X 的楔积不能换到 a_coeff"""
    X, H = g14.single("X"), g14.single("H")
    phi = Cochain.from_terms(g14, 1, "gminus", {((X,), H): 1})
    with pytest.raises(CochainError):
        phi.retag("a_coeff")
    with pytest.raises(CochainError):
        phi + Cochain.zero(g14, 1, "full")


def test_cochain_to_json(g14: LieAlgebraTable):
    """测试上链的 JSON 形式"""
    X, H = g14.single("X"), g14.single("H")
    phi = Cochain.from_terms(g14, 1, "gminus", {((X,), H): Fraction(1, 2)})
    assert cochain_to_json(phi) == [{"indices": [X], "value_basis": H, "coeff": "1/2"}]


def test_box_inverse(g13: LieAlgebraTable):
    """测试 □ 在 im(∂*) 上可逆，两种求逆方式一致"""
    source = cochain_space(g13, 3, "gminus").basis()
    phi = next(p for p in (dstar(s) for s in source) if not p.is_zero())
    assert len(homogeneities(phi)) == 1

    x = box_inverse(phi)
    assert laplacian_box(x) == phi
    assert box_inverse_polynomial(phi) == x

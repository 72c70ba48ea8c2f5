"""上链空间 C^k(g,g)、C^k(a,g)、C^k(g₋,g) 与水平子空间

上链按 (I, j) 编码：I 为定义域基的严格递增指标组，j 为取值基的指标，
对应 ω^{I₁}∧…∧ω^{I_k} ⊗ b_j。求值采用行列式约定，内积在规范楔积基下是对角的。
"""

import functools
import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Literal

from sympy.combinatorics import Permutation

from .liealg import AlgebraElement, LieAlgebraTable, bracket_vectors
from .linalg import (
    SparseMatrix,
    Vector,
    rational_str,
    vec_add,
    vec_axpy,
    vec_clean,
    vec_scale,
    weighted_dot,
)

Tag = Literal["full", "a_coeff", "gminus", "horizontal"]
TAGS: tuple[Tag, ...] = ("full", "a_coeff", "gminus", "horizontal")


class CochainError(Exception):
    pass


def domain_indices(L: LieAlgebraTable, tag: Tag) -> tuple[int, ...]:
    if tag == "full":
        return tuple(range(L.dim))
    if tag == "a_coeff":
        return tuple(sorted(L.role("a")))
    if tag in ("gminus", "horizontal"):
        return tuple(sorted(L.role("gminus")))
    raise CochainError(f"未知的上链类型: {tag}")


def sort_sign(seq: Sequence[int]) -> tuple[tuple[int, ...], int] | None:
    """排序指标组并给出置换符号，有重复时返回 None"""
    if len(set(seq)) != len(seq):
        return None
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return tuple(sorted(seq)), (-1 if inversions % 2 else 1)


@dataclass(frozen=True, eq=False)
class CochainSpace:
    algebra: LieAlgebraTable
    degree: int
    tag: Tag
    domain: tuple[int, ...]
    forms: tuple[tuple[int, ...], ...]

    @functools.cached_property
    def _form_pos(self) -> dict[tuple[int, ...], int]:
        return {f: p for p, f in enumerate(self.forms)}

    @property
    def dim(self) -> int:
        return len(self.forms) * self.algebra.dim

    def has_form(self, form: tuple[int, ...]) -> bool:
        return form in self._form_pos

    def index(self, form: tuple[int, ...], j: int) -> int:
        try:
            return self._form_pos[form] * self.algebra.dim + j
        except KeyError:
            raise CochainError(f"{form} 不是 {self.tag} 空间的楔积基") from None

    def entry(self, idx: int) -> tuple[tuple[int, ...], int]:
        p, j = divmod(idx, self.algebra.dim)
        return self.forms[p], j

    @functools.cached_property
    def weights(self) -> tuple[Fraction, ...]:
        """基上链的 Gram 对角：对偶基取逆 Gram，行列式约定下为乘积"""
        gram = self.algebra.gram
        if gram is None:
            raise CochainError(f"{self.algebra.name} 没有 Gram 矩阵")
        out = []
        for form in self.forms:
            w = Fraction(1)
            for s in form:
                w /= gram[s]
            out.extend(w * g for g in gram)
        return tuple(out)

    def homogeneity(self, idx: int) -> int:
        form, j = self.entry(idx)
        return self.algebra.degree(j) - sum(self.algebra.degree(s) for s in form)

    def indices_of_homogeneity(self, ell: int) -> list[int]:
        return [i for i in range(self.dim) if self.homogeneity(i) == ell]

    def basis(self) -> list["Cochain"]:
        return [Cochain(self, {i: Fraction(1)}) for i in range(self.dim)]


@functools.lru_cache(maxsize=None)
def cochain_space(L: LieAlgebraTable, k: int, tag: Tag) -> CochainSpace:
    if k < 0:
        raise CochainError(f"上链次数不能为负: {k}")
    domain = domain_indices(L, tag)
    forms = tuple(itertools.combinations(domain, k))
    return CochainSpace(L, k, tag, domain, forms)


def wedge_basis(L: LieAlgebraTable, k: int, tag: Tag) -> CochainSpace:
    return cochain_space(L, k, tag)


@dataclass(frozen=True)
class Cochain:
    space: CochainSpace
    coords: Mapping[int, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "coords", vec_clean(self.coords))

    @classmethod
    def zero(cls, L: LieAlgebraTable, k: int, tag: Tag) -> "Cochain":
        return cls(cochain_space(L, k, tag), {})

    @classmethod
    def from_terms(
        cls,
        L: LieAlgebraTable,
        k: int,
        tag: Tag,
        terms: Mapping[tuple[tuple[int, ...], int], Fraction | int],
    ) -> "Cochain":
        """按 (楔积指标组, 取值指标) 构造；指标组可以无序，符号自动处理"""
        space = cochain_space(L, k, tag)
        coords: Vector = {}
        for (form, j), c in terms.items():
            res = sort_sign(form)
            if res is None:
                continue
            sorted_form, sign = res
            vec_axpy(coords, sign * Fraction(c), {space.index(sorted_form, j): Fraction(1)})
        return cls(space, coords)

    @property
    def algebra(self) -> LieAlgebraTable:
        return self.space.algebra

    @property
    def degree(self) -> int:
        return self.space.degree

    @property
    def tag(self) -> Tag:
        return self.space.tag

    def _check(self, other: "Cochain") -> None:
        if other.space is not self.space:
            raise CochainError(
                f"上链空间不一致: {self.tag}^{self.degree} / {other.tag}^{other.degree}"
            )

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.space, vec_add(self.coords, other.coords))

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return Cochain(self.space, vec_add(self.coords, vec_scale(other.coords, -1)))

    def __neg__(self) -> "Cochain":
        return Cochain(self.space, vec_scale(self.coords, -1))

    def __rmul__(self, c: Fraction | int) -> "Cochain":
        return Cochain(self.space, vec_scale(self.coords, c))

    def is_zero(self) -> bool:
        return not self.coords

    def terms(self) -> list[tuple[tuple[int, ...], int, Fraction]]:
        return [(*self.space.entry(i), c) for i, c in sorted(self.coords.items())]

    def retag(self, tag: Tag) -> "Cochain":
        """在共享指标编码的空间之间换标签（gminus ↔ horizontal，或嵌入 full）"""
        target = cochain_space(self.algebra, self.degree, tag)
        coords: Vector = {}
        for idx, c in self.coords.items():
            form, j = self.space.entry(idx)
            if not target.has_form(form):
                raise CochainError(f"{form} 不在 {tag} 空间中")
            coords[target.index(form, j)] = c
        return Cochain(target, coords)


def cochain_to_json(phi: Cochain) -> list[dict[str, Any]]:
    return [
        {"indices": list(form), "value_basis": j, "coeff": rational_str(c)}
        for form, j, c in phi.terms()
    ]


# ==================================
# 求值与内积
# ==================================
def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    k = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(k)):
        prod = Fraction(1)
        for r, col in enumerate(perm):
            prod *= rows[r][col]
            if not prod:
                break
        if prod:
            total += Permutation(list(perm)).signature() * prod
    return total


def evaluate(phi: Cochain, args: Sequence[AlgebraElement]) -> AlgebraElement:
    if len(args) != phi.degree:
        raise CochainError(f"参数个数 {len(args)} 与上链次数 {phi.degree} 不一致")
    L = phi.algebra
    for a in args:
        if a.algebra is not L:
            raise CochainError("参数不属于上链所在的李代数")
    out: Vector = {}
    for idx, c in phi.coords.items():
        form, j = phi.space.entry(idx)
        value = _det([[a.coords[s] for a in args] for s in form])
        if value:
            vec_axpy(out, c * value, {j: Fraction(1)})
    return L.element(out)


def inner(phi: Cochain, psi: Cochain) -> Fraction:
    phi._check(psi)
    return weighted_dot(phi.coords, psi.coords, phi.space.weights)


inner_product = inner


# ==================================
# Chevalley–Eilenberg 微分
# ==================================
@functools.lru_cache(maxsize=None)
def _dual_structure(L: LieAlgebraTable, domain: tuple[int, ...]) -> dict[int, list[tuple[int, int, Fraction]]]:
    """s ↦ [(a, b, c^s_ab)]，a < b 取自定义域"""
    out: dict[int, list[tuple[int, int, Fraction]]] = {s: [] for s in domain}
    for a, b in itertools.combinations(domain, 2):
        for s, c in L.bracket_basis(a, b).items():
            if s in out:
                out[s].append((a, b, c))
    return out


def _ce_column(src: CochainSpace, dst: CochainSpace, idx: int) -> Vector:
    L = src.algebra
    form, j = src.entry(idx)
    dual = _dual_structure(L, src.domain)
    col: Vector = {}
    for r, s in enumerate(form):
        sign_r = -1 if r % 2 else 1
        for a, b, c in dual[s]:
            res = sort_sign(form[:r] + (a, b) + form[r + 1 :])
            if res is None:
                continue
            new_form, sign = res
            vec_axpy(col, -sign_r * sign * c, {dst.index(new_form, j): Fraction(1)})
    for a in src.domain:
        res = sort_sign((a, *form))
        if res is None:
            continue
        new_form, sign = res
        value = L.bracket_basis(a, j)
        if value:
            base = dst.index(new_form, 0)
            vec_axpy(col, sign, {base + t: c for t, c in value.items()})
    return col


@functools.lru_cache(maxsize=None)
def ce_matrix(L: LieAlgebraTable, k: int, tag: Tag) -> SparseMatrix:
    """C^k → C^{k+1} 的微分矩阵"""
    if tag == "horizontal":
        raise CochainError("水平上链没有自身的微分，请使用 gminus")
    src = cochain_space(L, k, tag)
    dst = cochain_space(L, k + 1, tag)
    return SparseMatrix(
        {idx: _ce_column(src, dst, idx) for idx in range(src.dim)}, (dst.dim, src.dim)
    )


def _apply_differential(phi: Cochain, tag: Tag) -> Cochain:
    if phi.tag != tag:
        raise CochainError(f"需要 {tag} 上链，实际为 {phi.tag}")
    M = ce_matrix(phi.algebra, phi.degree, tag)
    return Cochain(cochain_space(phi.algebra, phi.degree + 1, tag), M.apply(phi.coords))


def d_g(phi: Cochain) -> Cochain:
    return _apply_differential(phi, "full")


def d_a(phi: Cochain) -> Cochain:
    return _apply_differential(phi, "a_coeff")


def d_gminus_direct(phi: Cochain) -> Cochain:
    """g₋ 复形上直接按 CE 公式计算的微分"""
    if phi.tag == "horizontal":
        phi = phi.retag("gminus")
    return _apply_differential(phi, "gminus")


# ==================================
# 伴随 ∂*
# ==================================
def _adjoint(M: SparseMatrix, src: CochainSpace, dst: CochainSpace) -> SparseMatrix:
    """M: src → dst 关于对角 Gram 的伴随 dst → src"""
    ws, wd = src.weights, dst.weights
    cols: dict[int, Vector] = {}
    for r, col in M.cols.items():
        for f, x in col.items():
            cols.setdefault(f, {})[r] = x * wd[f] / ws[r]
    return SparseMatrix(cols, (src.dim, dst.dim))


@functools.lru_cache(maxsize=None)
def dstar_matrix(L: LieAlgebraTable, k: int, tag: Tag) -> SparseMatrix:
    """∂*: C^k → C^{k−1}"""
    if k < 1:
        raise CochainError("次数为 0 的上链没有 ∂*")
    if tag == "horizontal":
        return _horizontal_dstar_matrix(L, k)
    src = cochain_space(L, k - 1, tag)
    dst = cochain_space(L, k, tag)
    return _adjoint(ce_matrix(L, k - 1, tag), src, dst)


def _horizontal_dstar_matrix(L: LieAlgebraTable, k: int) -> SparseMatrix:
    """由 C^*(g,g) 上的完整微分取伴随，再限制到水平上链"""
    full_src = cochain_space(L, k - 1, "full")
    full_dst = cochain_space(L, k, "full")
    hor_src = cochain_space(L, k - 1, "horizontal")
    hor_dst = cochain_space(L, k, "horizontal")
    gminus = set(hor_src.domain)

    # 只有至多一个指标在 p 中的源楔积才可能打到水平楔积上
    candidates = [
        idx
        for idx in range(full_src.dim)
        if sum(1 for s in full_src.entry(idx)[0] if s not in gminus) <= 1
    ]
    horizontal_rows = {}
    for h in range(hor_dst.dim):
        form, j = hor_dst.entry(h)
        horizontal_rows[full_dst.index(form, j)] = h

    cols: dict[int, Vector] = {}
    ws, wd = full_src.weights, full_dst.weights
    for r in candidates:
        col = _ce_column(full_src, full_dst, r)
        form_r, j_r = full_src.entry(r)
        for f, x in col.items():
            h = horizontal_rows.get(f)
            if h is None:
                continue
            if not hor_src.has_form(form_r):
                raise CochainError(f"∂* 未保持水平性: {form_r}")
            cols.setdefault(h, {})[hor_src.index(form_r, j_r)] = x * wd[f] / ws[r]
    return SparseMatrix(cols, (hor_src.dim, hor_dst.dim))


def dstar(psi: Cochain, variant: Tag | None = None) -> Cochain:
    variant = variant or psi.tag
    if variant != psi.tag:
        psi = psi.retag(variant)
    if psi.degree < 1:
        raise CochainError("次数为 0 的上链没有 ∂*")
    M = dstar_matrix(psi.algebra, psi.degree, variant)
    return Cochain(cochain_space(psi.algebra, psi.degree - 1, variant), M.apply(psi.coords))


# ==================================
# 作用、插入与分裂
# ==================================
@functools.lru_cache(maxsize=None)
def action_matrix(space: CochainSpace, z: AlgebraElement) -> SparseMatrix:
    """z 在上链上的自然作用（作用在取值和每个自变量上）"""
    L = space.algebra
    if z.algebra is not L:
        raise CochainError("作用元素不属于上链所在的李代数")
    zc = z.sparse()
    domain = set(space.domain)
    # z·ω^s = −Σ_t c^s(z, b_t) ω^t
    dual_action: dict[int, Vector] = {s: {} for s in domain}
    for t in range(L.dim):
        for s, c in bracket_vectors(L, zc, {t: Fraction(1)}).items():
            if s not in domain:
                continue
            if t not in domain:
                raise CochainError(f"定义域的补空间在 ad_z 下不是不变的: {L.labels[t]}")
            dual_action[s][t] = dual_action[s].get(t, 0) - c
    ad_z = {j: bracket_vectors(L, zc, {j: Fraction(1)}) for j in range(L.dim)}

    cols: dict[int, Vector] = {}
    for idx in range(space.dim):
        form, j = space.entry(idx)
        col: Vector = {}
        base = space.index(form, 0)
        vec_axpy(col, 1, {base + t: c for t, c in ad_z[j].items()})
        for r, s in enumerate(form):
            for t, c in dual_action[s].items():
                res = sort_sign(form[:r] + (t,) + form[r + 1 :])
                if res is None:
                    continue
                new_form, sign = res
                vec_axpy(col, sign * c, {space.index(new_form, j): Fraction(1)})
        cols[idx] = col
    return SparseMatrix(cols, (space.dim, space.dim))


def act(z: AlgebraElement, phi: Cochain) -> Cochain:
    return Cochain(phi.space, action_matrix(phi.space, z).apply(phi.coords))


def interior(x: int, phi: Cochain) -> Cochain:
    """i_{b_x} φ，结果保持原标签"""
    if phi.degree < 1:
        raise CochainError("次数为 0 的上链不能做插入")
    target = cochain_space(phi.algebra, phi.degree - 1, phi.tag)
    coords: Vector = {}
    for idx, c in phi.coords.items():
        form, j = phi.space.entry(idx)
        if x not in form:
            continue
        p = form.index(x)
        rest = form[:p] + form[p + 1 :]
        vec_axpy(coords, -c if p % 2 else c, {target.index(rest, j): Fraction(1)})
    return Cochain(target, coords)


@dataclass(frozen=True)
class SplitCochain:
    """φ = ω^X ∧ φ₁ + φ₂，φ₁ = i_X φ；零次上链的 φ₁ 记为 None"""

    phi1: Cochain | None
    phi2: Cochain

    def __post_init__(self):
        if self.phi2.tag != "a_coeff":
            raise CochainError("分裂分量必须是 a_coeff 上链")
        if self.phi1 is None:
            if self.phi2.degree != 0:
                raise CochainError("只有零次上链可以省略 φ₁")
            return
        if self.phi1.tag != "a_coeff":
            raise CochainError("分裂分量必须是 a_coeff 上链")
        if self.phi1.degree + 1 != self.phi2.degree:
            raise CochainError(
                f"分裂分量次数不匹配: φ₁ 为 {self.phi1.degree}，φ₂ 为 {self.phi2.degree}"
            )

    @property
    def degree(self) -> int:
        return self.phi2.degree

    @property
    def algebra(self) -> LieAlgebraTable:
        return self.phi2.algebra

    def is_zero(self) -> bool:
        return self.phi2.is_zero() and (self.phi1 is None or self.phi1.is_zero())


def _a_zero(L: LieAlgebraTable, k: int) -> Cochain | None:
    return None if k < 0 else Cochain.zero(L, k, "a_coeff")


def split(phi: Cochain) -> SplitCochain:
    if phi.tag not in ("gminus", "horizontal"):
        raise CochainError(f"只能分裂 g₋ 或水平上链，实际为 {phi.tag}")
    L = phi.algebra
    X = L.single("X")
    k = phi.degree
    s1 = cochain_space(L, k - 1, "a_coeff") if k >= 1 else None
    s2 = cochain_space(L, k, "a_coeff")
    c1: Vector = {}
    c2: Vector = {}
    for idx, c in phi.coords.items():
        form, j = phi.space.entry(idx)
        if X in form:
            assert s1 is not None
            p = form.index(X)
            rest = form[:p] + form[p + 1 :]
            c1[s1.index(rest, j)] = -c if p % 2 else c
        else:
            c2[s2.index(form, j)] = c
    return SplitCochain(Cochain(s1, c1) if s1 is not None else None, Cochain(s2, c2))


def assemble(sc: SplitCochain, tag: Tag = "gminus") -> Cochain:
    if tag not in ("gminus", "horizontal"):
        raise CochainError(f"只能组装为 g₋ 或水平上链，实际为 {tag}")
    L = sc.algebra
    X = L.single("X")
    space = cochain_space(L, sc.degree, tag)
    coords: Vector = {}
    for idx, c in sc.phi2.coords.items():
        form, j = sc.phi2.space.entry(idx)
        coords[space.index(form, j)] = c
    if sc.phi1 is not None:
        for idx, c in sc.phi1.coords.items():
            form, j = sc.phi1.space.entry(idx)
            res = sort_sign((X, *form))
            assert res is not None
            new_form, sign = res
            vec_axpy(coords, sign * c, {space.index(new_form, j): Fraction(1)})
    return Cochain(space, coords)


def _x_element(L: LieAlgebraTable) -> AlgebraElement:
    return L.basis_element(L.single("X"))


def _y_element(L: LieAlgebraTable) -> AlgebraElement:
    return L.basis_element(L.single("Y"))


def d_gminus(sc: SplitCochain) -> SplitCochain:
    """(φ₁, φ₂) ↦ (−∂_a φ₁ + X·φ₂, ∂_a φ₂)"""
    L = sc.algebra
    first = act(_x_element(L), sc.phi2)
    if sc.phi1 is not None:
        first = first - d_a(sc.phi1)
    return SplitCochain(first, d_a(sc.phi2))


def dstar_block(phi: SplitCochain | Cochain) -> SplitCochain | None:
    """(φ₁, φ₂) ↦ (−∂*_a φ₁, ∂*_a φ₂ + Y·φ₁)；零次输入返回 None"""
    if isinstance(phi, Cochain):
        if phi.tag not in ("gminus", "horizontal"):
            raise CochainError(f"dstar_block 需要水平上链，实际为 {phi.tag}")
        phi = split(phi)
    if phi.phi1 is None:
        return None
    L = phi.algebra
    k = phi.degree
    second = act(_y_element(L), phi.phi1)
    if k >= 1 and phi.phi2.degree >= 1:
        second = second + dstar(phi.phi2, "a_coeff")
    first = -dstar(phi.phi1, "a_coeff") if phi.phi1.degree >= 1 else None
    return SplitCochain(first, second)


# ==================================
# 齐次性与 Laplacian
# ==================================
def homogeneous_component(phi: Cochain, ell: int) -> Cochain:
    return Cochain(
        phi.space, {i: c for i, c in phi.coords.items() if phi.space.homogeneity(i) == ell}
    )


def homogeneities(phi: Cochain) -> list[int]:
    return sorted({phi.space.homogeneity(i) for i in phi.coords})


def _as_gminus(phi: Cochain) -> Cochain:
    if phi.tag == "horizontal":
        return phi.retag("gminus")
    if phi.tag != "gminus":
        raise CochainError(f"Laplacian 需要 g₋ 上链，实际为 {phi.tag}")
    return phi


def laplacian_box(phi: Cochain) -> Cochain:
    """□ = ∂∂* + ∂*∂，全部取 C^*(g₋,g) 上的映射"""
    phi = _as_gminus(phi)
    up = dstar(d_gminus_direct(phi), "gminus")
    if phi.degree == 0:
        return up
    return up + d_gminus_direct(dstar(phi, "gminus"))


@functools.lru_cache(maxsize=None)
def image_basis(L: LieAlgebraTable, k: int, ell: int) -> tuple[Vector, ...]:
    """im(∂*) ∩ C^k(g₋,g)_ℓ 的一组基"""
    src = cochain_space(L, k + 1, "gminus")
    M = dstar_matrix(L, k + 1, "gminus")
    images = M.select_columns(src.indices_of_homogeneity(ell))
    return tuple(images.column(j) for j in images.independent_columns())


def _box_columns(L: LieAlgebraTable, k: int, basis: Iterable[Vector]) -> list[Vector]:
    space = cochain_space(L, k, "gminus")
    return [laplacian_box(Cochain(space, b)).coords for b in basis]


def box_restriction_rank(L: LieAlgebraTable, ell: int, k: int = 2) -> tuple[int, int]:
    """返回 (dim im(∂*)_ℓ, □ 在其上的秩)"""
    basis = image_basis(L, k, ell)
    space = cochain_space(L, k, "gminus")
    columns = _box_columns(L, k, basis)
    return len(basis), SparseMatrix.from_columns(columns, space.dim).rank()


def box_bijective_on_image(L: LieAlgebraTable, k: int = 2) -> dict[int, tuple[int, int]]:
    space = cochain_space(L, k + 1, "gminus")
    ells = sorted({space.homogeneity(i) for i in range(space.dim)})
    out = {}
    for ell in ells:
        dim, rank = box_restriction_rank(L, ell, k)
        if dim:
            out[ell] = (dim, rank)
    return out


def _require_homogeneous(phi: Cochain) -> int:
    ells = homogeneities(phi)
    if len(ells) > 1:
        raise CochainError(f"需要齐次上链，实际包含齐次度 {ells}")
    return ells[0] if ells else 0


def box_inverse(phi: Cochain) -> Cochain:
    """在 im(∂*) 上逐齐次块精确求解 □x = φ"""
    phi = _as_gminus(phi)
    L, k = phi.algebra, phi.degree
    result = Cochain.zero(L, k, "gminus")
    for ell in homogeneities(phi):
        part = homogeneous_component(phi, ell)
        basis = image_basis(L, k, ell)
        columns = _box_columns(L, k, basis)
        coeffs = SparseMatrix.from_columns(columns, phi.space.dim).solve(part.coords)
        if coeffs is None:
            raise CochainError(f"上链不在 im(∂*) 中（齐次度 {ell}）")
        x: Vector = {}
        for i, c in coeffs.items():
            vec_axpy(x, c, basis[i])
        result = result + Cochain(phi.space, x)
    return result


def box_inverse_polynomial(phi: Cochain) -> Cochain:
    """用 □|_{im ∂*} 的特征多项式（Cayley–Hamilton）求 □⁻¹φ，φ 需齐次"""
    phi = _as_gminus(phi)
    if phi.is_zero():
        return phi
    ell = _require_homogeneous(phi)
    L, k = phi.algebra, phi.degree
    basis = image_basis(L, k, ell)
    B = SparseMatrix.from_columns(basis, phi.space.dim)
    coords = B.solve_many(_box_columns(L, k, basis))
    if any(c is None for c in coords):
        raise CochainError("□ 未保持 im(∂*)")
    restricted = SparseMatrix.from_columns([c or {} for c in coords], len(basis))
    poly = restricted.charpoly()
    c0 = poly[-1]
    if not c0:
        raise CochainError(f"□ 在齐次度 {ell} 上不可逆")
    acc = phi
    for coef in poly[1:-1]:
        acc = laplacian_box(acc) + coef * phi
    return Fraction(-1) / c0 * acc

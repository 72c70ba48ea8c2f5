"""有限维李代数：精确结构常数、ODE 模型代数 g(m,n) 与 sl₂ 分解"""

import functools
import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Any

from .linalg import SparseMatrix, Vector, rational_str, vec_add, vec_axpy, vec_clean


class LieAlgebraError(Exception):
    pass


Brackets = Mapping[tuple[int, int], Mapping[int, Fraction]]


@dataclass(frozen=True, eq=False)
class LieAlgebraTable:
    """带精确结构常数的李代数

    ``brackets`` 保存所有有序对 (i, j) 的非零 [b_i, b_j]，因此反对称性
    是可检验的性质而不是构造上的假设。表按身份比较和哈希，可直接作为缓存键。
    """

    name: str
    labels: tuple[str, ...]
    brackets: Brackets
    grading: tuple[int, ...] | None = None
    gram: tuple[Fraction, ...] | None = None
    roles: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    params: tuple[int, int] | None = None

    def __post_init__(self):
        dim = len(self.labels)
        if dim == 0:
            raise LieAlgebraError("李代数维数必须为正")
        if self.grading is not None and len(self.grading) != dim:
            raise LieAlgebraError("分次长度与维数不一致")
        if self.gram is not None:
            if len(self.gram) != dim:
                raise LieAlgebraError("Gram 对角长度与维数不一致")
            if any(g <= 0 for g in self.gram):
                raise LieAlgebraError("Gram 矩阵必须正定")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def bracket_basis(self, i: int, j: int) -> Mapping[int, Fraction]:
        return self.brackets.get((i, j), {})

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LieAlgebraError(f"未知基向量: {label}") from None

    def role(self, name: str) -> tuple[int, ...]:
        if name not in self.roles:
            raise LieAlgebraError(f"{self.name} 没有角色 {name}")
        return self.roles[name]

    def single(self, name: str) -> int:
        return self.role(name)[0]

    def degree(self, i: int) -> int:
        if self.grading is None:
            raise LieAlgebraError(f"{self.name} 没有分次")
        return self.grading[i]

    def basis_element(self, i: int) -> "AlgebraElement":
        coords = [Fraction(0)] * self.dim
        coords[i] = Fraction(1)
        return AlgebraElement(self, tuple(coords))

    def element(self, coords: Mapping[int, Fraction] | Sequence[Fraction]) -> "AlgebraElement":
        dense = [Fraction(0)] * self.dim
        items = coords.items() if isinstance(coords, Mapping) else enumerate(coords)
        for i, c in items:
            dense[i] = Fraction(c)
        return AlgebraElement(self, tuple(dense))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, (Fraction(0),) * self.dim)

    def permuted(self, order: Sequence[int]) -> "LieAlgebraTable":
        """新基的第 p 个向量是旧基的第 order[p] 个向量"""
        if sorted(order) != list(range(self.dim)):
            raise LieAlgebraError(f"不是 0..{self.dim - 1} 的排列: {order}")
        new_of = {old: new for new, old in enumerate(order)}
        brackets = {
            (new_of[i], new_of[j]): {new_of[k]: c for k, c in v.items()}
            for (i, j), v in self.brackets.items()
        }
        return LieAlgebraTable(
            name=f"{self.name}[permuted]",
            labels=tuple(self.labels[o] for o in order),
            brackets=brackets,
            grading=None if self.grading is None else tuple(self.grading[o] for o in order),
            gram=None if self.gram is None else tuple(self.gram[o] for o in order),
            roles={k: tuple(new_of[i] for i in v) for k, v in self.roles.items()},
            params=self.params,
        )

    def with_bracket(
        self, i: int, j: int, value: Mapping[int, Fraction], antisymmetric: bool = True
    ) -> "LieAlgebraTable":
        """替换一个括号的副本，用于注入错误"""
        brackets = {k: dict(v) for k, v in self.brackets.items()}
        brackets[(i, j)] = vec_clean(value)
        if antisymmetric:
            brackets[(j, i)] = {k: -c for k, c in brackets[(i, j)].items()}
        brackets = {k: v for k, v in brackets.items() if v}
        return LieAlgebraTable(
            name=f"{self.name}[modified]",
            labels=self.labels,
            brackets=brackets,
            grading=self.grading,
            gram=self.gram,
            roles=self.roles,
            params=self.params,
        )


@dataclass(frozen=True)
class AlgebraElement:
    algebra: LieAlgebraTable
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise LieAlgebraError(
                f"坐标长度 {len(self.coords)} 与维数 {self.algebra.dim} 不一致"
            )

    def _check(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise LieAlgebraError(
                f"元素属于不同的李代数: {self.algebra.name} / {other.algebra.name}"
            )

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(-a for a in self.coords))

    def __rmul__(self, c: Fraction | int) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(c * a for a in self.coords))

    def sparse(self) -> Vector:
        return {i: c for i, c in enumerate(self.coords) if c}

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __str__(self) -> str:
        terms = [f"{c}*{self.algebra.labels[i]}" for i, c in self.sparse().items()]
        return " + ".join(terms) or "0"


# ==================================
# 括号与内积
# ==================================
def bracket_vectors(L: LieAlgebraTable, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> Vector:
    out: Vector = {}
    for i, a in x.items():
        for j, b in y.items():
            v = L.brackets.get((i, j))
            if v:
                vec_axpy(out, a * b, v)
    return out


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    return x.algebra.element(bracket_vectors(x.algebra, x.sparse(), y.sparse()))


def inner_product(x: AlgebraElement, y: AlgebraElement) -> Fraction:
    x._check(y)
    gram = x.algebra.gram
    if gram is None:
        raise LieAlgebraError(f"{x.algebra.name} 没有 Gram 矩阵")
    return sum((a * b * g for a, b, g in zip(x.coords, y.coords, gram)), Fraction(0))


def ad_matrix(L: LieAlgebraTable, x: AlgebraElement | Mapping[int, Fraction]) -> SparseMatrix:
    """ad_x 的矩阵，第 j 列为 [x, b_j]"""
    coords = x.sparse() if isinstance(x, AlgebraElement) else x
    return SparseMatrix(
        {j: bracket_vectors(L, coords, {j: Fraction(1)}) for j in range(L.dim)},
        (L.dim, L.dim),
    )


def adjoint_matrices(L: LieAlgebraTable, elements: Sequence[AlgebraElement]) -> list[SparseMatrix]:
    return [ad_matrix(L, x) for x in elements]


# ==================================
# g(m, n)
# ==================================
@functools.lru_cache(maxsize=None)
def build_ode_algebra(m: int, n: int) -> LieAlgebraTable:
    """构造 g(m,n) = (sl₂ × gl_m) ⋉ (V_n ⊗ ℝ^m)

    基顺序为 X, H, Y, e^a_b（行优先）, v^i_b（i 在外层）。
    """
    if m < 1 or n < 2:
        raise LieAlgebraError(f"非法参数 (m, n) = ({m}, {n})，要求 m ≥ 1, n ≥ 2")

    X, H, Y = 0, 1, 2

    def e(a: int, b: int) -> int:
        return 3 + (a - 1) * m + (b - 1)

    def v(i: int, b: int) -> int:
        return 3 + m * m + i * m + (b - 1)

    labels = ["X", "H", "Y"]
    labels += [f"e^{a}_{b}" for a in range(1, m + 1) for b in range(1, m + 1)]
    labels += [f"v^{i}_{b}" for i in range(n + 1) for b in range(1, m + 1)]

    brackets: dict[tuple[int, int], Vector] = {}

    def put(i: int, j: int, value: Mapping[int, Fraction | int]) -> None:
        clean = vec_clean(value)
        if clean:
            brackets[(i, j)] = vec_add(brackets.get((i, j), {}), clean)
            brackets[(j, i)] = vec_add(brackets.get((j, i), {}), {k: -c for k, c in clean.items()})

    one = Fraction(1)
    put(H, X, {X: 2 * one})
    put(H, Y, {Y: -2 * one})
    put(X, Y, {H: one})

    for b in range(1, m + 1):
        for i in range(n + 1):
            if i > 0:
                put(X, v(i, b), {v(i - 1, b): one})
            if i < n:
                put(Y, v(i, b), {v(i + 1, b): Fraction((n - i) * (i + 1))})
            put(H, v(i, b), {v(i, b): Fraction(n - 2 * i)})

    # e^a_b 作用在 e_c 上为 δ^a_c e_b
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            for i in range(n + 1):
                put(e(a, b), v(i, a), {v(i, b): one})

    # [e^a_b, e^c_d] = δ^a_d e^c_b − δ^c_b e^a_d
    for a, b, c, d in itertools.product(range(1, m + 1), repeat=4):
        if (e(a, b), e(c, d)) >= (e(c, d), e(a, b)):
            continue
        value: Vector = {}
        if a == d:
            value = vec_add(value, {e(c, b): one})
        if c == b:
            value = vec_add(value, {e(a, d): -one})
        put(e(a, b), e(c, d), value)

    grading = [-1, 0, 1] + [0] * (m * m)
    grading += [i - n - 1 for i in range(n + 1) for _ in range(m)]

    gram = [one, 2 * one, one] + [one] * (m * m)
    gram += [Fraction(factorial(n - i), factorial(i)) for i in range(n + 1) for _ in range(m)]

    gl = tuple(e(a, b) for a in range(1, m + 1) for b in range(1, m + 1))
    a_part = tuple(v(i, b) for i in range(n + 1) for b in range(1, m + 1))
    roles = {
        "X": (X,),
        "H": (H,),
        "Y": (Y,),
        "gl": gl,
        "a": a_part,
        "q": (X, H, Y, *gl),
        "p": (H, Y, *gl),
        "gminus": (X, *a_part),
        "sl2": (X, H, Y),
    }
    return LieAlgebraTable(
        name=f"g({m},{n})",
        labels=tuple(labels),
        brackets=brackets,
        grading=tuple(grading),
        gram=tuple(gram),
        roles=roles,
        params=(m, n),
    )


def _require_params(L: LieAlgebraTable) -> tuple[int, int]:
    if L.params is None:
        raise LieAlgebraError(f"{L.name} 不是 ODE 模型代数")
    return L.params


def e_index(L: LieAlgebraTable, a: int, b: int) -> int:
    m, _ = _require_params(L)
    return L.role("gl")[(a - 1) * m + (b - 1)]


def v_index(L: LieAlgebraTable, i: int, b: int) -> int:
    m, _ = _require_params(L)
    return L.role("a")[i * m + (b - 1)]


def outside_theorem_scope(m: int, n: int) -> bool:
    return (m, n) == (1, 2)


def grading_element(L: LieAlgebraTable) -> AlgebraElement:
    """Z = −H/2 − (1 + n/2)·Σ e^a_a"""
    m, n = _require_params(L)
    coords: Vector = {L.single("H"): Fraction(-1, 2)}
    for a in range(1, m + 1):
        coords[e_index(L, a, a)] = -(1 + Fraction(n, 2))
    return L.element(coords)


def check_grading_element(L: LieAlgebraTable) -> bool:
    ad_z = ad_matrix(L, grading_element(L))
    return all(ad_z.column(j) == vec_clean({j: Fraction(L.degree(j))}) for j in range(L.dim))


def transpose_on_q(A: AlgebraElement) -> AlgebraElement:
    L = A.algebra
    m, _ = _require_params(L)
    q = set(L.role("q"))
    outside = [i for i in A.sparse() if i not in q]
    if outside:
        raise LieAlgebraError(f"元素不在 q 中: 分量 {[L.labels[i] for i in outside]}")
    X, H, Y = L.single("X"), L.single("H"), L.single("Y")
    image = {X: Y, Y: X, H: H}
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            image[e_index(L, a, b)] = e_index(L, b, a)
    return L.element({image[i]: c for i, c in A.sparse().items()})


# ==================================
# 公理检验
# ==================================
@dataclass(frozen=True)
class AxiomVerdict:
    passed: bool
    failure: str | None = None
    witness: tuple[str, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "failure": self.failure,
            "witness": list(self.witness) if self.witness else None,
        }


def verify_lie_axioms(L: LieAlgebraTable) -> AxiomVerdict:
    """穷举检验反对称性、Jacobi 恒等式与分次相容性，返回第一个反例"""
    lab = L.labels
    for i in range(L.dim):
        for j in range(i, L.dim):
            a, b = L.bracket_basis(i, j), L.bracket_basis(j, i)
            if vec_add(a, b):
                return AxiomVerdict(False, "antisymmetry", (lab[i], lab[j]))

    for i, j, k in itertools.combinations(range(L.dim), 3):
        total: Vector = {}
        for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
            total = vec_add(total, bracket_vectors(L, {x: Fraction(1)}, L.bracket_basis(y, z)))
        if total:
            return AxiomVerdict(False, "jacobi", (lab[i], lab[j], lab[k]))

    if L.grading is not None:
        for (i, j), value in sorted(L.brackets.items()):
            target = L.grading[i] + L.grading[j]
            bad = [k for k in value if L.grading[k] != target]
            if bad:
                return AxiomVerdict(False, "grading", (lab[i], lab[j], lab[bad[0]]))

    return AxiomVerdict(True)


def check_filtration_brackets(L: LieAlgebraTable) -> AxiomVerdict:
    """[g_i, g_j] ⊆ g_{i+j}；负次数时还要求 [g^i, g^j] ⊆ g^{min(i,j)−1}"""
    for (i, j), value in sorted(L.brackets.items()):
        di, dj = L.degree(i), L.degree(j)
        for k in value:
            dk = L.degree(k)
            if dk != di + dj:
                return AxiomVerdict(False, "graded", (L.labels[i], L.labels[j], L.labels[k]))
            if di < 0 and dj < 0 and dk < min(di, dj) - 1:
                return AxiomVerdict(False, "strong", (L.labels[i], L.labels[j], L.labels[k]))
    return AxiomVerdict(True)


def table_dump(L: LieAlgebraTable) -> dict[str, Any]:
    brackets = [
        {
            "i": i,
            "j": j,
            "coeffs": {str(k): rational_str(c) for k, c in sorted(v.items())},
        }
        for (i, j), v in sorted(L.brackets.items())
        if i < j
    ]
    return {
        "name": L.name,
        "dim": L.dim,
        "labels": list(L.labels),
        "grading": list(L.grading) if L.grading is not None else None,
        "gram_diagonal": [rational_str(g) for g in L.gram] if L.gram is not None else None,
        "brackets": brackets,
    }


# ==================================
# sl₂ 分解
# ==================================
@dataclass(frozen=True)
class IsotypicDecomposition:
    dim: int
    multiplicities: dict[int, int]
    highest_weight_vectors: dict[int, tuple[Vector, ...]]
    weights: dict[int, int]

    @property
    def trivial_multiplicity(self) -> int:
        return self.multiplicities.get(0, 0)

    def as_sum(self) -> str:
        parts = [
            f"{c}V{k}" if c > 1 else f"V{k}"
            for k, c in sorted(self.multiplicities.items(), reverse=True)
        ]
        return " + ".join(parts) or "0"


def _is_diagonal(M: SparseMatrix) -> bool:
    return all(set(col) <= {j} for j, col in M.cols.items())


def sl2_decompose(x: SparseMatrix, h: SparseMatrix, y: SparseMatrix) -> IsotypicDecomposition:
    """按 H 的权空间维数求 sl₂ 模的同型分解

    X 为升算子。mult(V_k) = d_k − d_{k+2}，最高权向量取 ker X ∩ (权 k 空间)。
    """
    d = h.nrows
    if not (x.shape == h.shape == y.shape == (d, d)):
        raise LieAlgebraError("sl₂ 作用矩阵尺寸不一致")
    if (h @ x - x @ h) != x.scale(2):
        raise LieAlgebraError("sl₂ 关系 [H,X] = 2X 不成立")
    if (h @ y - y @ h) != y.scale(-2):
        raise LieAlgebraError("sl₂ 关系 [H,Y] = −2Y 不成立")
    if (x @ y - y @ x) != h:
        raise LieAlgebraError("sl₂ 关系 [X,Y] = H 不成立")

    spaces: dict[int, list[Vector]] = {}
    if _is_diagonal(h):
        for j in range(d):
            w = h.entry(j, j)
            if w.denominator != 1:
                raise LieAlgebraError(f"H 的特征值不是整数: {w}")
            spaces.setdefault(int(w), []).append({j: Fraction(1)})
    else:
        found = 0
        for w in range(-(d - 1), d):
            shifted = h - SparseMatrix.identity(d).scale(w)
            basis = shifted.nullspace()
            if basis:
                spaces[w] = basis
                found += len(basis)
        if found != d:
            raise LieAlgebraError("H 不可在有理数上对角化为整数谱")

    dims = {w: len(b) for w, b in spaces.items()}
    multiplicities: dict[int, int] = {}
    highest: dict[int, tuple[Vector, ...]] = {}
    for k in sorted(w for w in dims if w >= 0):
        mult = dims[k] - dims.get(k + 2, 0)
        if mult < 0:
            raise LieAlgebraError(f"权重数不满足 sl₂ 模的单峰性: 权 {k}")
        if mult == 0:
            continue
        multiplicities[k] = mult
        basis = spaces[k]
        restricted = SparseMatrix.from_columns([x.apply(b) for b in basis], d)
        vectors = []
        for combo in restricted.nullspace():
            vec: Vector = {}
            for p, c in combo.items():
                vec_axpy(vec, c, basis[p])
            vectors.append(vec)
        if len(vectors) != mult:
            raise LieAlgebraError(f"权 {k} 的最高权向量个数 {len(vectors)} 与重数 {mult} 不符")
        highest[k] = tuple(vectors)

    total = sum(mult * (k + 1) for k, mult in multiplicities.items())
    if total != d:
        raise LieAlgebraError(f"分解维数 {total} 与模维数 {d} 不符")
    return IsotypicDecomposition(d, multiplicities, highest, dims)

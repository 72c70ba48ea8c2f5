"""有理数域上的精确稀疏线性代数

矩阵按列存储为 ``{列号: {行号: Fraction}}``，秩、零空间与求解交给
``sympy.polys.matrices.DomainMatrix`` 在 QQ 上完成。
"""

from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Vector = dict[int, Fraction]


class LinearAlgebraError(Exception):
    pass


def to_qq(x: Fraction | int):
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def from_qq(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def rational_str(x: Fraction | int) -> str:
    """统一输出为 "p/q" 字符串"""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ==================================
# 稀疏向量
# ==================================
def vec_clean(v: Mapping[int, Fraction]) -> Vector:
    return {k: Fraction(c) for k, c in v.items() if c}


def vec_add(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> Vector:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def vec_scale(a: Mapping[int, Fraction], c: Fraction | int) -> Vector:
    if not c:
        return {}
    return {k: x * c for k, x in a.items()}


def vec_sub(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> Vector:
    return vec_add(a, vec_scale(b, -1))


def vec_axpy(out: Vector, c: Fraction | int, x: Mapping[int, Fraction]) -> None:
    """原地执行 out += c * x"""
    if not c:
        return
    for k, v in x.items():
        s = out.get(k, 0) + c * v
        if s:
            out[k] = s
        else:
            out.pop(k, None)


def weighted_dot(
    a: Mapping[int, Fraction],
    b: Mapping[int, Fraction],
    weights: Sequence[Fraction] | Mapping[int, Fraction] | None = None,
) -> Fraction:
    if len(a) > len(b):
        a, b = b, a
    total = Fraction(0)
    for k, x in a.items():
        y = b.get(k)
        if y:
            total += x * y * (weights[k] if weights is not None else 1)
    return total


class SparseMatrix:
    """按列存储的稀疏有理矩阵"""

    __slots__ = ("cols", "shape")

    def __init__(self, cols: Mapping[int, Mapping[int, Fraction]], shape: tuple[int, int]):
        nrows, ncols = shape
        if nrows < 0 or ncols < 0:
            raise LinearAlgebraError(f"非法矩阵尺寸: {shape}")
        self.shape = (nrows, ncols)
        self.cols: dict[int, Vector] = {}
        for j, col in cols.items():
            if not 0 <= j < ncols:
                raise LinearAlgebraError(f"列号 {j} 超出尺寸 {shape}")
            clean = vec_clean(col)
            if clean:
                if max(clean) >= nrows or min(clean) < 0:
                    raise LinearAlgebraError(f"第 {j} 列的行号超出尺寸 {shape}")
                self.cols[j] = clean

    @classmethod
    def from_columns(cls, columns: Iterable[Mapping[int, Fraction]], nrows: int) -> "SparseMatrix":
        cols = dict(enumerate(columns))
        return cls(cols, (nrows, len(cols)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Fraction | int]]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols: dict[int, Vector] = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise LinearAlgebraError("行长度不一致")
            for j, x in enumerate(row):
                if x:
                    cols.setdefault(j, {})[i] = Fraction(x)
        return cls(cols, (nrows, ncols))

    @classmethod
    def identity(cls, size: int) -> "SparseMatrix":
        return cls({i: {i: Fraction(1)} for i in range(size)}, (size, size))

    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    def column(self, j: int) -> Vector:
        return dict(self.cols.get(j, {}))

    def entry(self, i: int, j: int) -> Fraction:
        return self.cols.get(j, {}).get(i, Fraction(0))

    def is_zero(self) -> bool:
        return not self.cols

    def rows(self) -> dict[int, Vector]:
        out: dict[int, Vector] = {}
        for j, col in self.cols.items():
            for i, x in col.items():
                out.setdefault(i, {})[j] = x
        return out

    def to_dense(self) -> list[list[Fraction]]:
        dense = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for j, col in self.cols.items():
            for i, x in col.items():
                dense[i][j] = x
        return dense

    def apply(self, v: Mapping[int, Fraction]) -> Vector:
        out: Vector = {}
        for j, c in v.items():
            col = self.cols.get(j)
            if col:
                vec_axpy(out, c, col)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise LinearAlgebraError(f"矩阵尺寸不匹配: {self.shape} @ {other.shape}")
        return SparseMatrix(
            {j: self.apply(col) for j, col in other.cols.items()},
            (self.nrows, other.ncols),
        )

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise LinearAlgebraError(f"矩阵尺寸不匹配: {self.shape} + {other.shape}")
        cols = {j: dict(c) for j, c in self.cols.items()}
        for j, col in other.cols.items():
            cols[j] = vec_add(cols.get(j, {}), col)
        return SparseMatrix(cols, self.shape)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(-1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.cols == other.cols

    __hash__ = None  # type: ignore[assignment]

    def scale(self, c: Fraction | int) -> "SparseMatrix":
        return SparseMatrix({j: vec_scale(col, c) for j, col in self.cols.items()}, self.shape)

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.rows(), (self.ncols, self.nrows))

    def select_columns(self, indices: Sequence[int]) -> "SparseMatrix":
        """按给定顺序取列，列号重新编为 0..k-1"""
        return SparseMatrix(
            {p: self.cols[j] for p, j in enumerate(indices) if j in self.cols},
            (self.nrows, len(indices)),
        )

    def select_rows(self, indices: Sequence[int]) -> "SparseMatrix":
        """按给定顺序取行，行号重新编为 0..k-1"""
        position = {i: p for p, i in enumerate(indices)}
        cols: dict[int, Vector] = {}
        for j, col in self.cols.items():
            new = {position[i]: x for i, x in col.items() if i in position}
            if new:
                cols[j] = new
        return SparseMatrix(cols, (len(indices), self.ncols))

    def stack(self, other: "SparseMatrix") -> "SparseMatrix":
        """纵向拼接 [self; other]"""
        if self.ncols != other.ncols:
            raise LinearAlgebraError(f"列数不一致: {self.shape} / {other.shape}")
        offset = self.nrows
        cols = {j: dict(c) for j, c in self.cols.items()}
        for j, col in other.cols.items():
            cols.setdefault(j, {}).update({i + offset: x for i, x in col.items()})
        return SparseMatrix(cols, (self.nrows + other.nrows, self.ncols))

    # ----------------------------------
    # DomainMatrix 相关
    # ----------------------------------
    def to_domain_matrix(self) -> DomainMatrix:
        rows = {
            i: {j: to_qq(x) for j, x in row.items()} for i, row in self.rows().items()
        }
        return DomainMatrix(rows, self.shape, QQ)

    def _is_degenerate(self) -> bool:
        return self.nrows == 0 or self.ncols == 0 or not self.cols

    def rank(self) -> int:
        if self._is_degenerate():
            return 0
        return int(self.to_domain_matrix().rank())

    def nullspace(self) -> list[Vector]:
        """零空间的一组基（按 rref 的自由列给出）"""
        if self.ncols == 0:
            return []
        if self._is_degenerate():
            return [{j: Fraction(1)} for j in range(self.ncols)]
        rref, pivots = self.to_domain_matrix().to_sparse().rref()
        pivot_rows = _sparse_rows(rref)
        pivot_set = set(pivots)
        basis: list[Vector] = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v: Vector = {free: Fraction(1)}
            for r, p in enumerate(pivots):
                x = pivot_rows.get(r, {}).get(free)
                if x:
                    v[p] = -x
            basis.append(v)
        return basis

    def independent_columns(self) -> list[int]:
        """列空间的一组基所在的列号（rref 主元列）"""
        if self._is_degenerate():
            return []
        _, pivots = self.to_domain_matrix().to_sparse().rref()
        return list(pivots)

    def solve_many(self, rhs: Sequence[Mapping[int, Fraction]]) -> list[Vector | None]:
        """对每个右端求一个特解，无解时返回 None"""
        if not rhs:
            return []
        if self.ncols == 0 or not self.cols:
            return [{} if not vec_clean(b) else None for b in rhs]
        ncols = self.ncols
        cols = dict(self.cols)
        for k, b in enumerate(rhs):
            clean = vec_clean(b)
            if clean:
                cols[ncols + k] = clean
        augmented = SparseMatrix(cols, (self.nrows, ncols + len(rhs)))
        if augmented.nrows == 0:
            return [{} for _ in rhs]
        rref, pivots = augmented.to_domain_matrix().to_sparse().rref()
        pivot_rows = _sparse_rows(rref)
        pivot_set = set(pivots)
        solutions: list[Vector | None] = []
        for k in range(len(rhs)):
            c = ncols + k
            if c in pivot_set:
                solutions.append(None)
                continue
            x: Vector = {}
            consistent = True
            for r, p in enumerate(pivots):
                val = pivot_rows.get(r, {}).get(c)
                if not val:
                    continue
                if p >= ncols:
                    # 依赖于前面无解的右端
                    consistent = False
                    break
                x[p] = val
            solutions.append(x if consistent else None)
        return solutions

    def solve(self, b: Mapping[int, Fraction]) -> Vector | None:
        return self.solve_many([b])[0]

    def charpoly(self) -> list[Fraction]:
        """特征多项式系数，最高次在前"""
        if self.nrows != self.ncols:
            raise LinearAlgebraError(f"非方阵没有特征多项式: {self.shape}")
        if self.nrows == 0:
            return [Fraction(1)]
        return [from_qq(c) for c in self.to_domain_matrix().to_dense().charpoly()]

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={sum(map(len, self.cols.values()))})"


def _sparse_rows(dm: DomainMatrix) -> dict[int, Vector]:
    rep = dm.to_sparse().rep
    return {i: {j: from_qq(x) for j, x in row.items()} for i, row in rep.items()}


def invert_dense(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """方阵求逆，不可逆时抛出 LinearAlgebraError"""
    size = len(rows)
    if any(len(r) != size for r in rows):
        raise LinearAlgebraError("只能对方阵求逆")
    if size == 0:
        return []
    dm = DomainMatrix([[to_qq(x) for x in r] for r in rows], (size, size), QQ)
    if dm.det() == QQ(0):
        raise LinearAlgebraError("矩阵不可逆")
    inv = dm.inv().to_Matrix()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(size)] for i in range(size)]


def orthogonal_projection(
    v: Mapping[int, Fraction],
    basis: Sequence[Mapping[int, Fraction]],
    weights: Sequence[Fraction] | Mapping[int, Fraction],
) -> Vector:
    """在对角内积下把 v 正交投影到 span(basis)，basis 需线性无关"""
    if not basis:
        return {}
    size = len(basis)
    gram = [[weighted_dot(basis[i], basis[j], weights) for j in range(size)] for i in range(size)]
    rhs = {i: weighted_dot(basis[i], v, weights) for i in range(size)}
    coeffs = SparseMatrix.from_rows(gram).solve(rhs)
    if coeffs is None:
        raise LinearAlgebraError("投影基线性相关")
    out: Vector = {}
    for i, c in coeffs.items():
        vec_axpy(out, c, basis[i])
    return out

"""精确截断幂级数 Σ c_k (t−t₀)^k + O((t−t₀)^{N+1}) 及其矩阵版本"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .linalg import LinearAlgebraError, invert_dense

Number = Fraction | int


class SeriesError(Exception):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: tuple[Fraction, ...]
    t0: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.coeffs:
            raise SeriesError("截断阶不能为负")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "t0", Fraction(self.t0))

    # ----------------------------------
    # 构造
    # ----------------------------------
    @classmethod
    def constant(cls, c: Number, order: int, t0: Number = 0) -> "TruncatedSeries":
        return cls((Fraction(c),) + (Fraction(0),) * order, Fraction(t0))

    @classmethod
    def zero(cls, order: int, t0: Number = 0) -> "TruncatedSeries":
        return cls.constant(0, order, t0)

    @classmethod
    def variable(cls, order: int, t0: Number = 0) -> "TruncatedSeries":
        """t 本身，即 t₀ + (t − t₀)"""
        coeffs = [Fraction(t0), Fraction(1)] + [Fraction(0)] * (order - 1)
        return cls(tuple(coeffs[: order + 1]), Fraction(t0))

    @classmethod
    def from_polynomial(cls, coeffs: Sequence[Number], order: int, t0: Number = 0) -> "TruncatedSeries":
        padded = [Fraction(c) for c in coeffs[: order + 1]]
        padded += [Fraction(0)] * (order + 1 - len(padded))
        return cls(tuple(padded), Fraction(t0))

    # ----------------------------------
    # 基本属性
    # ----------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> Fraction:
        return self.coeffs[0]

    def coefficient(self, k: int) -> Fraction:
        if k > self.order:
            raise SeriesError(f"系数 {k} 超出截断阶 {self.order}")
        return self.coeffs[k] if k >= 0 else Fraction(0)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise SeriesError(f"不能把 {self.order} 阶级数提升到 {order} 阶")
        return TruncatedSeries(self.coeffs[: order + 1], self.t0)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def first_nonzero(self) -> tuple[int, Fraction] | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k, c
        return None

    def _coerce(self, other: "TruncatedSeries | Number") -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.t0 != self.t0:
                raise SeriesError(f"展开点不一致: {self.t0} / {other.t0}")
            return other
        return TruncatedSeries.constant(other, self.order, self.t0)

    # ----------------------------------
    # 算术
    # ----------------------------------
    def __add__(self, other: "TruncatedSeries | Number") -> "TruncatedSeries":
        other = self._coerce(other)
        order = min(self.order, other.order)
        return TruncatedSeries(
            tuple(a + b for a, b in zip(self.coeffs[: order + 1], other.coeffs)), self.t0
        )

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(tuple(-a for a in self.coeffs), self.t0)

    def __sub__(self, other: "TruncatedSeries | Number") -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other: "TruncatedSeries | Number") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return TruncatedSeries(tuple(a * c for a in self.coeffs), self.t0)
        other = self._coerce(other)
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(order + 1):
            s = Fraction(0)
            for i in range(k + 1):
                if a[i] and b[k - i]:
                    s += a[i] * b[k - i]
            out.append(s)
        return TruncatedSeries(tuple(out), self.t0)

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedSeries":
        a0 = self.coeffs[0]
        if not a0:
            raise SeriesError("常数项为零的级数不可逆")
        a = self.coeffs
        inv0 = 1 / a0
        b = [inv0]
        for k in range(1, self.order + 1):
            s = sum((a[i] * b[k - i] for i in range(1, k + 1) if a[i]), Fraction(0))
            b.append(-inv0 * s)
        return TruncatedSeries(tuple(b), self.t0)

    def __truediv__(self, other: "TruncatedSeries | Number") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            if not other:
                raise SeriesError("除数为零")
            return self * (1 / Fraction(other))
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other: Number) -> "TruncatedSeries":
        return self.inverse() * other

    def __pow__(self, k: int) -> "TruncatedSeries":
        if not isinstance(k, int):
            raise SeriesError(f"只支持整数幂: {k}")
        base = self if k >= 0 else self.inverse()
        result = TruncatedSeries.constant(1, self.order, self.t0)
        for _ in range(abs(k)):
            result = result * base
        return result

    # ----------------------------------
    # 微积分
    # ----------------------------------
    def derivative(self) -> "TruncatedSeries":
        if self.order < 1:
            raise SeriesError("0 阶级数求导后没有剩余信息")
        return TruncatedSeries(
            tuple(k * c for k, c in enumerate(self.coeffs) if k > 0), self.t0
        )

    def nth_derivative(self, k: int) -> "TruncatedSeries":
        out = self
        for _ in range(k):
            out = out.derivative()
        return out

    def antiderivative(self, constant: Number = 0) -> "TruncatedSeries":
        coeffs = [Fraction(constant)] + [c / (k + 1) for k, c in enumerate(self.coeffs)]
        return TruncatedSeries(tuple(coeffs), self.t0)

    def exp(self) -> "TruncatedSeries":
        """exp(a)，要求常数项为零以保持精确"""
        if self.coeffs[0]:
            raise SeriesError("exp 只接受常数项为零的级数")
        a = self.coeffs
        e = [Fraction(1)]
        for k in range(1, self.order + 1):
            s = sum((i * a[i] * e[k - i] for i in range(1, k + 1) if a[i]), Fraction(0))
            e.append(s / k)
        return TruncatedSeries(tuple(e), self.t0)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner(s))，inner 的常数项必须等于 self 的展开点"""
        if inner.coeffs[0] != self.t0:
            raise SeriesError(f"复合要求内层常数项 {inner.coeffs[0]} 等于展开点 {self.t0}")
        order = min(self.order, inner.order)
        shift = TruncatedSeries((Fraction(0),) + inner.coeffs[1 : order + 1], inner.t0)
        result = TruncatedSeries.constant(self.coeffs[order], order, inner.t0)
        for k in range(order - 1, -1, -1):
            result = result * shift + self.coeffs[k]
        return result

    def reversion(self) -> "TruncatedSeries":
        """求 T 使 self(T(s)) = s，T 的展开点为 self(t₀)"""
        lam1 = self.coeffs[1] if self.order >= 1 else Fraction(0)
        if not lam1:
            raise SeriesError("一次项为零的级数不可反演")
        N = self.order
        lam = self.coeffs
        b = [Fraction(0)] * (N + 1)
        # powers[j][k] = [σ^k] g^j，g = Σ_{i≥1} b_i σ^i
        powers = [[Fraction(0)] * (N + 1) for _ in range(N + 1)]
        for k in range(1, N + 1):
            c = Fraction(0)
            for j in range(2, k + 1):
                row = powers[j - 1]
                powers[j][k] = sum(
                    (b[i] * row[k - i] for i in range(1, k) if b[i] and row[k - i]),
                    Fraction(0),
                )
                if lam[j]:
                    c += lam[j] * powers[j][k]
            b[k] = ((1 if k == 1 else 0) - c) / lam1
            powers[1][k] = b[k]
        b[0] = self.t0
        return TruncatedSeries(tuple(b), self.coeffs[0])

    def map_coefficients(self, func: Callable[[Fraction], Fraction]) -> "TruncatedSeries":
        return TruncatedSeries(tuple(func(c) for c in self.coeffs), self.t0)

    def __str__(self) -> str:
        return f"{[str(c) for c in self.coeffs]} + O({self.order + 1})"


def taylor_coefficients(values: Sequence[Number]) -> tuple[Fraction, ...]:
    """由各阶导数值得到 Taylor 系数 c_k = u_k / k!"""
    return tuple(Fraction(v) / factorial(k) for k, v in enumerate(values))


# ==================================
# 矩阵级数
# ==================================
@dataclass(frozen=True)
class MatrixSeries:
    entries: tuple[tuple[TruncatedSeries, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise SeriesError("矩阵级数不能为空")
        cols = len(self.entries[0])
        if any(len(r) != cols for r in self.entries):
            raise SeriesError("矩阵级数行长度不一致")
        t0 = self.entries[0][0].t0
        if any(e.t0 != t0 for r in self.entries for e in r):
            raise SeriesError("矩阵级数各元素展开点不一致")

    @classmethod
    def from_coefficients(
        cls, coeffs: Sequence[Sequence[Sequence[Number]]], t0: Number = 0
    ) -> "MatrixSeries":
        """coeffs[k] 为 (t−t₀)^k 的系数矩阵"""
        rows, cols = len(coeffs[0]), len(coeffs[0][0])
        return cls(
            tuple(
                tuple(
                    TruncatedSeries(tuple(Fraction(c[i][j]) for c in coeffs), Fraction(t0))
                    for j in range(cols)
                )
                for i in range(rows)
            )
        )

    @classmethod
    def identity(cls, m: int, order: int, t0: Number = 0) -> "MatrixSeries":
        return cls.scalar(TruncatedSeries.constant(1, order, t0), m)

    @classmethod
    def zero(cls, m: int, order: int, t0: Number = 0) -> "MatrixSeries":
        z = TruncatedSeries.zero(order, t0)
        return cls(tuple(tuple(z for _ in range(m)) for _ in range(m)))

    @classmethod
    def scalar(cls, s: TruncatedSeries, m: int) -> "MatrixSeries":
        z = TruncatedSeries.zero(s.order, s.t0)
        return cls(tuple(tuple(s if i == j else z for j in range(m)) for i in range(m)))

    @classmethod
    def constant(cls, matrix: Sequence[Sequence[Number]], order: int, t0: Number = 0) -> "MatrixSeries":
        return cls(
            tuple(tuple(TruncatedSeries.constant(x, order, t0) for x in row) for row in matrix)
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    @property
    def order(self) -> int:
        return min(e.order for r in self.entries for e in r)

    @property
    def t0(self) -> Fraction:
        return self.entries[0][0].t0

    def coefficient(self, k: int) -> list[list[Fraction]]:
        return [[e.coefficient(k) for e in r] for r in self.entries]

    def value(self) -> list[list[Fraction]]:
        return self.coefficient(0)

    def map(self, func: Callable[[TruncatedSeries], TruncatedSeries]) -> "MatrixSeries":
        return MatrixSeries(tuple(tuple(func(e) for e in r) for r in self.entries))

    def truncate(self, order: int) -> "MatrixSeries":
        return self.map(lambda e: e.truncate(order))

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def __add__(self, other: "MatrixSeries") -> "MatrixSeries":
        if self.shape != other.shape:
            raise SeriesError(f"矩阵尺寸不一致: {self.shape} / {other.shape}")
        return MatrixSeries(
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.entries, other.entries)
            )
        )

    def __neg__(self) -> "MatrixSeries":
        return self.map(lambda e: -e)

    def __sub__(self, other: "MatrixSeries") -> "MatrixSeries":
        return self + (-other)

    def __matmul__(self, other: "MatrixSeries") -> "MatrixSeries":
        (r, k), (k2, c) = self.shape, other.shape
        if k != k2:
            raise SeriesError(f"矩阵尺寸不一致: {self.shape} @ {other.shape}")
        out = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = self.entries[i][0] * other.entries[0][j]
                for p in range(1, k):
                    acc = acc + self.entries[i][p] * other.entries[p][j]
                row.append(acc)
            out.append(tuple(row))
        return MatrixSeries(tuple(out))

    def __mul__(self, s: "TruncatedSeries | Number") -> "MatrixSeries":
        return self.map(lambda e: e * s)

    __rmul__ = __mul__

    def trace(self) -> TruncatedSeries:
        r, c = self.shape
        if r != c:
            raise SeriesError("非方阵没有迹")
        acc = self.entries[0][0]
        for i in range(1, r):
            acc = acc + self.entries[i][i]
        return acc

    def derivative(self) -> "MatrixSeries":
        return self.map(lambda e: e.derivative())

    def compose(self, inner: TruncatedSeries) -> "MatrixSeries":
        return self.map(lambda e: e.compose(inner))

    def inverse(self) -> "MatrixSeries":
        """B_0 = A_0⁻¹，B_k = −A_0⁻¹ Σ_{i=1}^k A_i B_{k−i}"""
        r, c = self.shape
        if r != c:
            raise SeriesError("非方阵不可逆")
        try:
            a0_inv = invert_dense(self.coefficient(0))
        except LinearAlgebraError:
            raise SeriesError("常数项矩阵奇异，矩阵级数不可逆") from None
        N = self.order
        A = [self.coefficient(k) for k in range(N + 1)]
        B = [a0_inv]
        for k in range(1, N + 1):
            S = [[Fraction(0)] * r for _ in range(r)]
            for i in range(1, k + 1):
                _accumulate_product(S, A[i], B[k - i])
            B.append(_negate(_dense_mul(a0_inv, S)))
        return MatrixSeries.from_coefficients(B, self.t0)

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(e) for e in r) for r in self.entries) + "]"


def _dense_mul(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    return [
        [sum((a[i][p] * b[p][j] for p in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def _accumulate_product(out: list[list[Fraction]], a: list[list[Fraction]], b: list[list[Fraction]]) -> None:
    for i, row in enumerate(_dense_mul(a, b)):
        for j, x in enumerate(row):
            out[i][j] += x


def _negate(a: list[list[Fraction]]) -> list[list[Fraction]]:
    return [[-x for x in r] for r in a]


def solve_linear_ode(A: MatrixSeries, initial: Sequence[Sequence[Number]]) -> MatrixSeries:
    """μ′ = A μ，μ(t₀) = initial；结果比 A 高一阶"""
    r, _ = A.shape
    N = A.order
    coeffs = [A.coefficient(k) for k in range(N + 1)]
    mu = [[[Fraction(x) for x in row] for row in initial]]
    for k in range(N + 1):
        S = [[Fraction(0)] * r for _ in range(r)]
        for i in range(k + 1):
            _accumulate_product(S, coeffs[i], mu[k - i])
        mu.append([[x / (k + 1) for x in row] for row in S])
    return MatrixSeries.from_coefficients(mu, A.t0)


def solve_second_order(p: TruncatedSeries, z0: Number, z1: Number) -> TruncatedSeries:
    """z″ = p·z，z(t₀) = z0，z′(t₀) = z1；结果比 p 高两阶"""
    z = [Fraction(z0), Fraction(z1)]
    a = p.coeffs
    for k in range(p.order + 1):
        s = sum((a[i] * z[k - i] for i in range(k + 1) if a[i]), Fraction(0))
        z.append(s / ((k + 2) * (k + 1)))
    return TruncatedSeries(tuple(z), p.t0)

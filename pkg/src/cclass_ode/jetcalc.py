"""射流空间表达式：偏导数、全导数、精确求值与 u^(n+1) = f 的形式幂级数解"""

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Generic, TypeVar

import sympy as sp

from .parser import T, jet_index, jet_symbol, parse_system
from .series import SeriesError, TruncatedSeries

V = TypeVar("V", Fraction, TruncatedSeries)


class JetEvaluationError(Exception):
    def __init__(self, message: str, subexpression: sp.Expr | None = None):
        super().__init__(message)
        self.subexpression = subexpression


class SingularJetError(Exception):
    pass


# ==================================
# 方程与射流点
# ==================================
@dataclass(frozen=True)
class JetSystem:
    """u^a^(n+1) = f^a(t, u, u′, …, u^(n))，a = 1…m"""

    m: int
    n: int
    rhs: tuple[sp.Expr, ...]

    def __post_init__(self):
        if len(self.rhs) != self.m:
            raise JetEvaluationError(f"右端项个数 {len(self.rhs)} 与 m = {self.m} 不符")
        for expr in self.rhs:
            for symbol in expr.free_symbols:
                if symbol == T:
                    continue
                index = jet_index(symbol)  # type: ignore[arg-type]
                if index is None or index[0] > self.m or index[1] > self.n:
                    raise JetEvaluationError(f"右端项含有 (m, n) = ({self.m}, {self.n}) 之外的变量 {symbol}")

    @classmethod
    def parse(cls, src: str, m: int, n: int) -> "JetSystem":
        return cls(m, n, parse_system(src, m, n))

    @classmethod
    def trivial(cls, m: int, n: int) -> "JetSystem":
        return cls(m, n, tuple(sp.Integer(0) for _ in range(m)))

    def variable(self, a: int, k: int) -> sp.Symbol:
        return jet_symbol(a, k)

    @property
    def denominators(self) -> list[sp.Expr]:
        """各右端项的分母（用于排除奇异射流）"""
        out = []
        for expr in self.rhs:
            _, den = sp.fraction(sp.together(expr))
            if den.free_symbols:
                out.append(den)
        return out


@dataclass(frozen=True)
class JetPoint:
    t0: Fraction
    values: tuple[tuple[Fraction, ...], ...]  # values[a-1][k] = u^a_k

    def __post_init__(self):
        object.__setattr__(self, "t0", Fraction(self.t0))
        object.__setattr__(
            self, "values", tuple(tuple(Fraction(v) for v in row) for row in self.values)
        )
        if not self.values or len({len(row) for row in self.values}) != 1:
            raise JetEvaluationError("射流点的各分量长度必须一致")

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values[0]) - 1

    def substitution(self) -> dict[sp.Symbol, Fraction]:
        subs = {T: self.t0}
        for a, row in enumerate(self.values, start=1):
            for k, v in enumerate(row):
                subs[jet_symbol(a, k)] = v
        return subs

    def to_dict(self) -> dict[str, str]:
        out = {"t": _rational_text(self.t0)}
        for a, row in enumerate(self.values, start=1):
            for k, v in enumerate(row):
                out[f"u{a}_{k}"] = _rational_text(v)
        return out


def _rational_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ==================================
# 微分
# ==================================
def partial_derivative(expr: sp.Expr, var: sp.Symbol) -> sp.Expr:
    return sp.diff(expr, var)


def total_derivative(expr: sp.Expr, system: JetSystem) -> sp.Expr:
    """d/dt = ∂_t + Σ_{k<n} u^a_{k+1} ∂_{u^a_k} + f^a ∂_{u^a_n}"""
    out = sp.diff(expr, T)
    symbols = expr.free_symbols
    for a in range(1, system.m + 1):
        for k in range(system.n):
            u = jet_symbol(a, k)
            if u in symbols:
                out += jet_symbol(a, k + 1) * sp.diff(expr, u)
        u_top = jet_symbol(a, system.n)
        if u_top in symbols:
            out += system.rhs[a - 1] * sp.diff(expr, u_top)
    return out


def normalize(expr: sp.Expr) -> sp.Expr:
    """有理函数标准形（仅用于测试小表达式）"""
    return sp.cancel(sp.together(expr))


# ==================================
# 求值
# ==================================
class _Evaluator(Generic[V]):
    def __init__(
        self,
        leaves: Mapping[sp.Symbol, V],
        constant: Callable[[Fraction], V],
        invert: Callable[[V, sp.Expr], V],
    ):
        self.leaves = leaves
        self.constant = constant
        self.invert = invert
        self.memo: dict[sp.Expr, V] = {}

    def __call__(self, expr: sp.Expr) -> V:
        cached = self.memo.get(expr)
        if cached is not None:
            return cached
        value = self._evaluate(expr)
        self.memo[expr] = value
        return value

    def _evaluate(self, expr: sp.Expr) -> V:
        if expr.is_Rational:
            return self.constant(Fraction(int(expr.p), int(expr.q)))  # type: ignore[attr-defined]
        if expr.is_Symbol:
            try:
                return self.leaves[expr]  # type: ignore[index]
            except KeyError:
                raise JetEvaluationError(f"变量 {expr} 没有取值", expr) from None
        if expr.is_Add:
            args = [self(a) for a in expr.args]
            acc = args[0]
            for x in args[1:]:
                acc = acc + x
            return acc
        if expr.is_Mul:
            args = [self(a) for a in expr.args]
            acc = args[0]
            for x in args[1:]:
                acc = acc * x
            return acc
        if expr.is_Pow:
            base, exponent = expr.args
            if not exponent.is_Integer:
                raise JetEvaluationError(f"只支持整数幂: {expr}", expr)
            k = int(exponent)
            value = self(base)
            if k < 0:
                value = self.invert(value, base)
                k = -k
            acc = value
            for _ in range(k - 1):
                acc = acc * value
            return acc if k else self.constant(Fraction(1))
        raise JetEvaluationError(f"不支持的表达式: {expr}", expr)


def _invert_number(value: Fraction, base: sp.Expr) -> Fraction:
    if not value:
        raise JetEvaluationError(f"分母 {base} 在该射流点为零", base)
    return 1 / value


def evaluate_at_jet(expr: sp.Expr, point: JetPoint) -> Fraction:
    evaluator: _Evaluator[Fraction] = _Evaluator(point.substitution(), lambda c: c, _invert_number)
    return evaluator(expr)


def evaluate_along(
    expr: sp.Expr, leaves: Mapping[sp.Symbol, TruncatedSeries], order: int
) -> TruncatedSeries:
    """沿级数解求值；结果阶数为 order"""
    if not leaves:
        raise JetEvaluationError("没有可用的级数")
    t0 = next(iter(leaves.values())).t0

    def invert(value: TruncatedSeries, base: sp.Expr) -> TruncatedSeries:
        try:
            return value.inverse()
        except SeriesError:
            raise SingularJetError(f"分母 {base} 沿解在 t = {t0} 处为零") from None

    truncated = {s: v.truncate(order) for s, v in leaves.items()}
    evaluator: _Evaluator[TruncatedSeries] = _Evaluator(
        truncated, lambda c: TruncatedSeries.constant(c, order, t0), invert
    )
    return evaluator(expr)


# ==================================
# 形式幂级数解
# ==================================
def jet_series(solution: Sequence[TruncatedSeries], n: int) -> dict[sp.Symbol, TruncatedSeries]:
    """{t, u^a_k (k ≤ n)} 沿解的级数，公共阶数为 N − n"""
    order = min(s.order for s in solution) - n
    if order < 0:
        raise SeriesError(f"级数阶数不足以给出 {n} 阶导数")
    t0 = solution[0].t0
    leaves: dict[sp.Symbol, TruncatedSeries] = {T: TruncatedSeries.variable(order, t0)}
    for a, u in enumerate(solution, start=1):
        d = u
        for k in range(n + 1):
            leaves[jet_symbol(a, k)] = d.truncate(order)
            if k < n:
                d = d.derivative()
    return leaves


def formal_solve(system: JetSystem, point: JetPoint, order: int) -> tuple[TruncatedSeries, ...]:
    """u^a(t) 到 (t−t₀)^order 的级数，逐阶由 u^(n+1) = f 确定"""
    m, n = system.m, system.n
    if point.m != m or point.n != n:
        raise JetEvaluationError(f"射流点形状 ({point.m}, {point.n}) 与方程 ({m}, {n}) 不符")
    if order < n:
        raise SeriesError(f"阶数 {order} 小于 n = {n}")

    coeffs = [
        [v / factorial(k) for k, v in enumerate(row)] for row in point.values
    ]
    for k in range(n + 1, order + 1):
        j = k - n - 1
        partial = tuple(TruncatedSeries(tuple(c), point.t0) for c in coeffs)
        leaves = jet_series(partial, n)
        for a in range(m):
            value = evaluate_along(system.rhs[a], leaves, j)
            coeffs[a].append(value.coefficient(j) * factorial(j) / factorial(k))
    return tuple(TruncatedSeries(tuple(c), point.t0) for c in coeffs)


def residual(system: JetSystem, solution: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
    """u^(n+1) − f 沿解的级数，应恒为零"""
    n = system.n
    leaves = jet_series(solution, n)
    order = min(s.order for s in solution) - n - 1
    out = []
    for a, u in enumerate(solution):
        top = u.nth_derivative(n + 1).truncate(order)
        out.append(top - evaluate_along(system.rhs[a], leaves, order))
    return out

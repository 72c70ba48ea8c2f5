"""射流表达式的词法与递归下降语法分析，以及反向打印"""

import re
from dataclasses import dataclass
from functools import lru_cache

import sympy as sp

T = sp.Symbol("t")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+)
  | (?P<jet>u(?P<digits>\d*)(?P<primes>'*))
  | (?P<time>t)
  | (?P<deriv>D)
  | (?P<op>[-+*/^(),;])
    """,
    re.VERBOSE,
)
_JET_NAME_RE = re.compile(r"^u(\d+)_(\d+)$")


class ExpressionSyntaxError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (位置 {offset})")
        self.offset = offset


class JetVariableError(Exception):
    pass


@lru_cache(maxsize=None)
def jet_symbol(a: int, k: int) -> sp.Symbol:
    """第 a 个未知函数的 k 阶导数 u^a_k（a 从 1 开始）"""
    return sp.Symbol(f"u{a}_{k}")


def jet_index(symbol: sp.Symbol) -> tuple[int, int] | None:
    """u^a_k -> (a, k)，t 或其他符号返回 None"""
    match = _JET_NAME_RE.match(symbol.name)
    if match is None:
        return None
    return int(match.group(1)), int(match.group(2))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    component: int | None = None
    order: int | None = None


def tokenize(src: str, m: int = 1) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            raise ExpressionSyntaxError(f"无法识别的字符 {src[pos]!r}", pos)
        kind = match.lastgroup
        if match.group("jet") is not None:
            digits, primes = match.group("digits"), len(match.group("primes"))
            if m == 1:
                # 标量：u3 与 u''' 同义
                component, order = 1, int(digits or 0) + primes
            else:
                if not digits:
                    raise ExpressionSyntaxError("方程组中的变量需要分量下标，如 u1", pos)
                component, order = int(digits), primes
            tokens.append(Token("jet", match.group(0), pos, component, order))
        elif kind != "ws":
            tokens.append(Token(kind or "op", match.group(0), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, m: int, n: int):
        self.tokens = tokenize(src, m)
        self.pos = 0
        self.m = m
        self.n = n

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.current
        self.pos += 1
        return token

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.pos += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        token = self.current
        if not self._accept(text):
            raise ExpressionSyntaxError(f"期望 {text!r}", token.offset)
        return token

    def _integer(self) -> int:
        negative = self._accept("-")
        token = self.current
        if token.kind != "number":
            raise ExpressionSyntaxError("期望整数", token.offset)
        self.pos += 1
        return -int(token.text) if negative else int(token.text)

    def _variable(self, component: int, order: int, offset: int) -> sp.Symbol:
        if not 1 <= component <= self.m:
            raise JetVariableError(f"分量 u{component} 超出范围 1..{self.m} (位置 {offset})")
        if order > self.n:
            raise JetVariableError(f"导数阶 {order} 超过 n = {self.n} (位置 {offset})")
        return jet_symbol(component, order)

    # ----------------------------------
    # 语法规则
    # ----------------------------------
    def expression(self) -> sp.Expr:
        left = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> sp.Expr:
        left = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self._advance()
            right = self.unary()
            if op.text == "*":
                left = left * right
            else:
                if right == 0:
                    raise ExpressionSyntaxError("除数为零", op.offset)
                left = left / right
        return left

    def unary(self) -> sp.Expr:
        if self._accept("-"):
            return -self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        if self._accept("^"):
            offset = self.current.offset
            exponent = self._integer()
            if base == 0 and exponent < 0:
                raise ExpressionSyntaxError("零的负整数次幂", offset)
            return sp.Pow(base, exponent)
        return base

    def atom(self) -> sp.Expr:
        token = self.current
        if token.kind == "number":
            self.pos += 1
            return sp.Integer(int(token.text))
        if token.kind == "time":
            self.pos += 1
            return T
        if token.kind == "jet":
            self.pos += 1
            assert token.component is not None and token.order is not None
            return self._variable(token.component, token.order, token.offset)
        if token.kind == "deriv":
            self.pos += 1
            self._expect("(")
            inner = self.current
            if inner.kind != "jet" or inner.order != 0:
                raise ExpressionSyntaxError("D(…) 的第一个参数必须是未求导的变量", inner.offset)
            self.pos += 1
            self._expect(",")
            order = self._integer()
            if order < 0:
                raise ExpressionSyntaxError("导数阶不能为负", inner.offset)
            self._expect(")")
            assert inner.component is not None
            return self._variable(inner.component, order, inner.offset)
        if self._accept("("):
            inner_expr = self.expression()
            self._expect(")")
            return inner_expr
        if token.kind == "end":
            raise ExpressionSyntaxError("表达式意外结束", token.offset)
        raise ExpressionSyntaxError(f"意外的符号 {token.text!r}", token.offset)


def parse_expression(src: str, m: int = 1, n: int = 4) -> sp.Expr:
    """解析单个右端项"""
    parser = _Parser(src, m, n)
    expr = parser.expression()
    if parser.current.kind != "end":
        raise ExpressionSyntaxError(f"多余的符号 {parser.current.text!r}", parser.current.offset)
    return expr


def parse_system(src: str, m: int, n: int) -> tuple[sp.Expr, ...]:
    """解析以 ';' 分隔的 m 个右端项"""
    parser = _Parser(src, m, n)
    parts = [parser.expression()]
    while parser._accept(";"):
        parts.append(parser.expression())
    if parser.current.kind != "end":
        raise ExpressionSyntaxError(f"多余的符号 {parser.current.text!r}", parser.current.offset)
    if len(parts) != m:
        raise ExpressionSyntaxError(f"需要 {m} 个右端项，实际为 {len(parts)}", len(src))
    return tuple(parts)


# ==================================
# 打印
# ==================================
def _print_symbol(symbol: sp.Symbol, m: int) -> str:
    if symbol == T:
        return "t"
    index = jet_index(symbol)
    if index is None:
        raise JetVariableError(f"未知符号 {symbol}")
    a, k = index
    if m == 1:
        return "u" if k == 0 else f"u{k}"
    return f"D(u{a},{k})"


def print_expression(expr: sp.Expr, m: int = 1) -> str:
    """按语法完整加括号地打印，可被 parse_expression 重新读入"""
    if expr.is_Symbol:
        return _print_symbol(expr, m)  # type: ignore[arg-type]
    if expr.is_Integer:
        return str(expr) if expr >= 0 else f"({expr})"
    if expr.is_Rational:
        return f"({expr.p}/{expr.q})"  # type: ignore[attr-defined]
    if expr.is_Add:
        return " + ".join(f"({print_expression(a, m)})" for a in expr.args)
    if expr.is_Mul:
        return "*".join(f"({print_expression(a, m)})" for a in expr.args)
    if expr.is_Pow:
        base, exponent = expr.args
        if not exponent.is_Integer:
            raise ExpressionSyntaxError(f"只支持整数幂: {expr}", 0)
        return f"({print_expression(base, m)})^{exponent}"
    raise ExpressionSyntaxError(f"无法打印的表达式: {expr}", 0)

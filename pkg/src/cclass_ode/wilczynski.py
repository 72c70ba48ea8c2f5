"""线性方程组的 Wilczynski 不变量、Laguerre–Forsyth 约化与非线性方程的平坦性判定"""

import random
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import sympy as sp

from .jetcalc import (
    JetEvaluationError,
    JetPoint,
    JetSystem,
    SingularJetError,
    evaluate_along,
    evaluate_at_jet,
    formal_solve,
    jet_series,
    total_derivative,
)
from .linalg import rational_str
from .logger import DummyLogger, LoggerProtocol
from .models import FlatnessReport, SampleReport, SamplingConfig, Variant, Witness
from .parser import jet_symbol
from .series import (
    MatrixSeries,
    SeriesError,
    TruncatedSeries,
    solve_linear_ode,
    solve_second_order,
)


class LaguerreForsythError(Exception):
    def __init__(self, message: str, coefficient: int | None = None, order: int | None = None):
        super().__init__(message)
        self.coefficient = coefficient
        self.order = order


# ==================================
# 线性方程组
# ==================================
@dataclass(frozen=True)
class LinearSystem:
    """u^(n+1) = P_n u^(n) + … + P_0 u"""

    P: tuple[MatrixSeries, ...]

    def __post_init__(self):
        if len(self.P) < 3:
            raise LaguerreForsythError(f"至少需要 P_0, P_1, P_2，实际只有 {len(self.P)} 个系数")
        shape = self.P[0].shape
        if shape[0] != shape[1] or any(p.shape != shape for p in self.P):
            raise LaguerreForsythError("系数矩阵必须是同尺寸方阵")
        if any(p.t0 != self.P[0].t0 for p in self.P):
            raise LaguerreForsythError("系数展开点不一致")

    @classmethod
    def from_constant(cls, matrices: Sequence[Sequence[Sequence[int | Fraction]]], order: int) -> "LinearSystem":
        return cls(tuple(MatrixSeries.constant(M, order) for M in matrices))

    @property
    def m(self) -> int:
        return self.P[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.P) - 1

    @property
    def order(self) -> int:
        return min(p.order for p in self.P)

    @property
    def t0(self) -> Fraction:
        return self.P[0].t0

    def truncate(self, order: int) -> "LinearSystem":
        return LinearSystem(tuple(p.truncate(order) for p in self.P))

    def lf_defect(self) -> tuple[int, int] | None:
        """第一个违反 P_n = 0、tr P_{n−1} = 0 的 (系数下标, 幂次)"""
        n = self.n
        top = self.P[n]
        for k in range(top.order + 1):
            if any(x for row in top.coefficient(k) for x in row):
                return n, k
        trace = self.P[n - 1].trace()
        for k in range(trace.order + 1):
            if trace.coefficient(k):
                return n - 1, k
        return None

    def is_lf(self) -> bool:
        return self.lf_defect() is None


@dataclass(frozen=True)
class WilczynskiValues:
    theta: dict[int, MatrixSeries]
    certified_order: int

    @property
    def flat(self) -> dict[int, bool]:
        return {r: th.truncate(self.certified_order).is_zero() for r, th in self.theta.items()}

    @property
    def all_flat(self) -> bool:
        return all(self.flat.values())

    def truncate(self, order: int) -> "WilczynskiValues":
        return WilczynskiValues({r: th.truncate(order) for r, th in self.theta.items()}, order)


@dataclass(frozen=True)
class LFGauge:
    """(t, u) ↦ (λ(t), μ(t)u) 的级数记录，T 为 λ 的反函数"""

    mu1: MatrixSeries
    lam: TruncatedSeries
    T: TruncatedSeries
    mu2: MatrixSeries

    @property
    def mu(self) -> MatrixSeries:
        """以 s 为自变量的复合规范变换 μ₁(T(s))·μ₂(s)"""
        return self.mu1.compose(self.T) @ self.mu2


# ==================================
# Θ 公式
# ==================================
def theta_coefficient(n: int, r: int, j: int) -> int:
    return (
        (-1) ** j
        * factorial(2 * r - j - 1)
        * factorial(n - r + j)
        // (factorial(r - j) * factorial(j - 1))
    )


def theta_formula(P: Sequence[MatrixSeries], n: int) -> dict[int, MatrixSeries]:
    """Θ_r = Σ_{j=1}^{r−1} c_{r,j} P_{n−r+j}^{(j−1)}，不检查 LF 条件"""
    derivatives: dict[tuple[int, int], MatrixSeries] = {}

    def derivative(index: int, k: int) -> MatrixSeries:
        key = (index, k)
        if key not in derivatives:
            derivatives[key] = P[index] if k == 0 else derivative(index, k - 1).derivative()
        return derivatives[key]

    theta = {}
    for r in range(2, n + 2):
        acc: MatrixSeries | None = None
        for j in range(1, r):
            term = derivative(n - r + j, j - 1) * theta_coefficient(n, r, j)
            acc = term if acc is None else acc + term
        assert acc is not None
        theta[r] = acc
    return theta


def theta_invariants(system: LinearSystem) -> WilczynskiValues:
    defect = system.lf_defect()
    if defect is not None:
        index, k = defect
        raise LaguerreForsythError(
            f"方程组不是 Laguerre–Forsyth 形式: P_{index} 的 (t−t₀)^{k} 系数非零",
            coefficient=index,
            order=k,
        )
    theta = theta_formula(system.P, system.n)
    return WilczynskiValues(theta, min(th.order for th in theta.values()))


# ==================================
# 变换
# ==================================
def gauge_transform(system: LinearSystem, mu: MatrixSeries) -> LinearSystem:
    """u = μ v 后 v 满足的方程组"""
    n, m = system.n, system.m
    derivs = [mu]
    for _ in range(n + 1):
        derivs.append(derivs[-1].derivative())
    try:
        mu_inv = mu.inverse()
    except SeriesError as e:
        raise LaguerreForsythError(f"规范变换 μ 在 t₀ 处奇异: {e}") from None
    out = []
    for i in range(n + 1):
        S = derivs[n + 1 - i] * (-comb(n + 1, i))
        for r in range(i, n + 1):
            S = S + (system.P[r] @ derivs[r - i]) * comb(r, i)
        out.append(mu_inv @ S)
    assert all(p.shape == (m, m) for p in out)
    return LinearSystem(tuple(out))


def _reparametrize_table(rho: TruncatedSeries, n: int) -> list[list[TruncatedSeries | None]]:
    """a[k][j]：d^k/dt^k = Σ_j a[k][j] d^j/ds^j，None 表示恒为零"""
    a: list[list[TruncatedSeries | None]] = [[TruncatedSeries.constant(1, rho.order, rho.t0)]]
    for k in range(n + 1):
        row: list[TruncatedSeries | None] = []
        for j in range(k + 2):
            acc: TruncatedSeries | None = None
            if j <= k and a[k][j] is not None and j > 0:
                acc = a[k][j].derivative()  # type: ignore[union-attr]
            if j >= 1 and a[k][j - 1] is not None:
                prev = a[k][j - 1]
                acc = prev if acc is None else acc + prev  # type: ignore[operator]
            row.append(None if acc is None else rho * acc)
        a.append(row)
    return a


def reparametrize(system: LinearSystem, T: TruncatedSeries) -> LinearSystem:
    """t = T(s) 后 v(s) = u(T(s)) 满足的方程组"""
    n, m = system.n, system.m
    dT = T.derivative()
    try:
        rho = dT.inverse()
    except SeriesError:
        raise LaguerreForsythError("重参数化 T 在展开点处导数为零") from None
    a = _reparametrize_table(rho, n)
    composed = [p.compose(T) for p in system.P]
    scale = dT ** (n + 1)
    out = []
    for j in range(n + 1):
        S = MatrixSeries.zero(m, rho.order, T.t0)
        top = a[n + 1][j]
        if top is not None:
            S = S - MatrixSeries.scalar(top, m)
        for r in range(j, n + 1):
            coeff = a[r][j]
            if coeff is not None:
                S = S + composed[r] * coeff
        out.append(S * scale)
    return LinearSystem(tuple(out))


def lf_constant(m: int, n: int) -> Fraction:
    """tr P_{n−1} 与 Schwarz 导数之间的比例 m·n(n+1)(n+2)/12"""
    return Fraction(m * n * (n + 1) * (n + 2), 12)


def lf_reduce(
    system: LinearSystem,
    mu0: Sequence[Sequence[int | Fraction]] | None = None,
    alpha: int | Fraction = 1,
    curvature: int | Fraction = 0,
) -> tuple[LinearSystem, LFGauge]:
    """化为 Laguerre–Forsyth 形式；mu0、alpha = λ′(t₀)、curvature = λ″(t₀) 为自由常数"""
    n, m, t0 = system.n, system.m, system.t0
    alpha, curvature = Fraction(alpha), Fraction(curvature)
    if not alpha:
        raise LaguerreForsythError("λ′(t₀) 不能为零")
    initial = mu0 if mu0 is not None else [[int(i == j) for j in range(m)] for i in range(m)]

    mu1 = solve_linear_ode(system.P[n] * Fraction(1, n + 1), initial)
    step1 = gauge_transform(system, mu1)

    half_p = step1.P[n - 1].trace() / (2 * lf_constant(m, n))
    beta = -curvature / (2 * alpha)
    z1 = solve_second_order(half_p, 0, alpha)
    z2 = solve_second_order(half_p, 1, beta)
    lam = z1 / z2 + t0
    T = lam.reversion()
    step2 = reparametrize(step1, T)

    identity = [[int(i == j) for j in range(m)] for i in range(m)]
    mu2 = solve_linear_ode(step2.P[n] * Fraction(1, n + 1), identity)
    reduced = gauge_transform(step2, mu2)
    return reduced, LFGauge(mu1, lam, T, mu2)


def _agree(a: LinearSystem, b: LinearSystem) -> bool:
    order = min(a.order, b.order)
    return all(x.truncate(order) == y.truncate(order) for x, y in zip(a.P, b.P))


def verify_reduction(system: LinearSystem, reduced: LinearSystem, record: LFGauge) -> bool:
    """用复合变换直接变换原方程组，与逐步约化的结果比较"""
    direct = gauge_transform(reparametrize(system, record.T), record.mu)
    return _agree(direct, reduced)


# ==================================
# 线性化与广义不变量
# ==================================
@lru_cache(maxsize=32)
def jacobians(system: JetSystem) -> tuple[tuple[tuple[sp.Expr, ...], ...], ...]:
    """[r][a][b] = ∂f^a/∂u^b_r"""
    return tuple(
        tuple(
            tuple(sp.diff(system.rhs[a], jet_symbol(b + 1, r)) for b in range(system.m))
            for a in range(system.m)
        )
        for r in range(system.n + 1)
    )


def linearize_along(
    system: JetSystem,
    point: JetPoint,
    order: int,
    solution: Sequence[TruncatedSeries] | None = None,
) -> LinearSystem:
    n = system.n
    if solution is None:
        solution = formal_solve(system, point, order + n)
    leaves = jet_series(solution, n)
    P = []
    for rows in jacobians(system):
        P.append(
            MatrixSeries(
                tuple(tuple(evaluate_along(e, leaves, order) for e in row) for row in rows)
            )
        )
    return LinearSystem(tuple(P))


def generalized_wilczynski(
    system: JetSystem,
    point: JetPoint,
    order: int,
    logger: LoggerProtocol | None = None,
    max_raises: int = 4,
    **free_constants,
) -> WilczynskiValues:
    """线性化 → LF 约化 → Θ_r，自动提高工作阶数直到结果可信到 order"""
    logger = logger or DummyLogger()
    n = system.n
    working = order + 3 * n
    values: WilczynskiValues | None = None
    for _ in range(max_raises + 1):
        solution = formal_solve(system, point, working + n)
        linear = linearize_along(system, point, working, solution)
        reduced, _ = lf_reduce(linear, **free_constants)
        values = theta_invariants(reduced)
        if values.certified_order >= order:
            return values.truncate(order)
        logger.debug(f"可信阶 {values.certified_order} < {order}，工作阶数提高到 {working + n + 2}")
        working += n + 2
    assert values is not None
    return values


@lru_cache(maxsize=32)
def literal_wilczynski(system: JetSystem) -> dict[int, tuple[tuple[sp.Expr, ...], ...]]:
    """直接代入 P_r → ∂f/∂u_r、导数 → 全导数得到的 Θ_r 射流表达式"""
    n, m = system.n, system.m
    J = jacobians(system)
    derivs: dict[tuple[int, int], tuple[tuple[sp.Expr, ...], ...]] = {}

    def derivative(index: int, k: int) -> tuple[tuple[sp.Expr, ...], ...]:
        key = (index, k)
        if key not in derivs:
            if k == 0:
                derivs[key] = J[index]
            else:
                prev = derivative(index, k - 1)
                derivs[key] = tuple(tuple(total_derivative(e, system) for e in row) for row in prev)
        return derivs[key]

    out = {}
    for r in range(2, n + 2):
        entries = [[sp.Integer(0)] * m for _ in range(m)]
        for j in range(1, r):
            c = theta_coefficient(n, r, j)
            D = derivative(n - r + j, j - 1)
            for a in range(m):
                for b in range(m):
                    entries[a][b] += c * D[a][b]
        out[r] = tuple(tuple(row) for row in entries)
    return out


# ==================================
# 采样判定
# ==================================
def sample_jets(
    system: JetSystem, sampling: SamplingConfig
) -> Iterator[tuple[int, JetPoint]]:
    """按 (seed, 序号) 确定地生成避开奇异点的整数射流点；返回 (尝试序号, 射流点)"""
    R = sampling.coordinate_range
    denominators = system.denominators
    found = 0
    for attempt in range(sampling.max_attempts_factor * sampling.samples):
        if found >= sampling.samples:
            return
        rng = random.Random(f"{sampling.seed}:{attempt}")
        t0 = rng.randint(-R, R)
        values = tuple(
            tuple(rng.randint(-R, R) for _ in range(system.n + 1)) for _ in range(system.m)
        )
        point = JetPoint(Fraction(t0), values)  # type: ignore[arg-type]
        try:
            if any(evaluate_at_jet(d, point) == 0 for d in denominators):
                continue
            for f in system.rhs:
                evaluate_at_jet(f, point)
        except JetEvaluationError:
            continue
        found += 1
        yield attempt, point


def _theta_json(theta: MatrixSeries, order: int) -> str | list[list[list[str]]]:
    theta = theta.truncate(order)
    if theta.is_zero():
        return "0"
    return [
        [[rational_str(x) for x in row] for row in theta.coefficient(k)]
        for k in range(order + 1)
    ]


def _first_witness(
    index: int, point: JetPoint, theta: dict[int, MatrixSeries], order: int
) -> Witness | None:
    for r, th in sorted(theta.items()):
        for k in range(min(order, th.order) + 1):
            for i, row in enumerate(th.coefficient(k)):
                for j, x in enumerate(row):
                    if x:
                        return Witness(
                            sample=index,
                            jet=point.to_dict(),
                            r=r,
                            coefficient=k,
                            entry=(i, j),
                            value=rational_str(x),
                        )
    return None


@dataclass
class SampleOutcome:
    report: SampleReport
    witness: Witness | None = None
    singular: bool = False
    diagnosis: list[str] = field(default_factory=list)


def evaluate_sample(
    system: JetSystem,
    index: int,
    point: JetPoint,
    order: int,
    variant: Variant = "solutionwise",
    logger: LoggerProtocol | None = None,
) -> SampleOutcome:
    """在一个射流点上计算（广义）Wilczynski 不变量"""
    logger = logger or DummyLogger()
    logger.debug(f"样本 {index}: 射流点 {point.to_dict()}，变体 {variant}")
    jet = point.to_dict()
    try:
        if variant == "literal":
            theta = {
                r: MatrixSeries.constant(
                    [[evaluate_at_jet(e, point) for e in row] for row in entries], 0, point.t0
                )
                for r, entries in literal_wilczynski(system).items()
            }
            J = jacobians(system)
            n = system.n
            lf_normal = all(
                evaluate_at_jet(e, point) == 0 for row in J[n] for e in row
            ) and sum((evaluate_at_jet(J[n - 1][a][a], point) for a in range(system.m)), Fraction(0)) == 0
            certified = 0
        else:
            values = generalized_wilczynski(system, point, order, logger=logger)
            theta = values.theta
            certified = values.certified_order
            lf_normal = None
    except (SingularJetError, JetEvaluationError) as e:
        logger.warning(f"样本 {index} 奇异，跳过: {e}")
        empty = SampleReport(index=index, jet=jet, certified_order=0, theta={}, flat=False)
        return SampleOutcome(empty, singular=True, diagnosis=[str(e)])

    report = SampleReport(
        index=index,
        jet=jet,
        certified_order=certified,
        theta={r: _theta_json(th, certified) for r, th in theta.items()},
        flat=all(th.truncate(certified).is_zero() for th in theta.values()),
        lf_normal=lf_normal,
    )
    witness = None if report.flat else _first_witness(index, point, theta, certified)
    return SampleOutcome(report, witness)


def combine_samples(
    system: JetSystem,
    sampling: SamplingConfig,
    outcomes: Sequence[SampleOutcome],
    attempts: int,
) -> FlatnessReport:
    order = sampling.order if sampling.order is not None else 2 * system.n + 6
    good = [o for o in outcomes if not o.singular]
    witnesses = [o.witness for o in good if o.witness is not None]
    diagnosis = None
    if not good:
        verdict = "INCONCLUSIVE"
        diagnosis = f"{attempts} 次尝试中没有可用的非奇异射流点"
        reasons = [d for o in outcomes for d in o.diagnosis]
        if reasons:
            diagnosis += f": {reasons[0]}"
    elif witnesses or not all(o.report.flat for o in good):
        verdict = "NOT_FLAT"
    else:
        verdict = "FLAT"
    return FlatnessReport(
        verdict=verdict,  # type: ignore[arg-type]
        variant=sampling.variant,
        m=system.m,
        n=system.n,
        order=order,
        certified_order=min((o.report.certified_order for o in good), default=None),
        seed=sampling.seed,
        samples_requested=sampling.samples,
        samples_evaluated=len(good),
        attempts=attempts,
        coordinate_range=sampling.coordinate_range,
        samples=[o.report for o in good],
        witnesses=witnesses,
        diagnosis=diagnosis,
    )


def flatness_verdict(
    system: JetSystem, sampling: SamplingConfig, logger: LoggerProtocol | None = None
) -> FlatnessReport:
    """串行版本；命令行在工作线程中并行调用 evaluate_sample"""
    logger = logger or DummyLogger()
    order = sampling.order if sampling.order is not None else 2 * system.n + 6
    outcomes = []
    attempts = 0
    for i, (attempt, point) in enumerate(sample_jets(system, sampling)):
        attempts = attempt + 1
        outcomes.append(evaluate_sample(system, i, point, order, sampling.variant, logger))
    if len(outcomes) < sampling.samples:
        attempts = sampling.max_attempts_factor * sampling.samples
    return combine_samples(system, sampling, outcomes, attempts)


def random_linear_system(
    seed: int | str, m: int, n: int, order: int, bound: int = 5, t0: int = 0
) -> LinearSystem:
    """系数为随机整数多项式的线性方程组，按 seed 确定"""
    rng = random.Random(f"linear:{seed}")
    P = []
    for _ in range(n + 1):
        coeffs = [
            [[rng.randint(-bound, bound) for _ in range(m)] for _ in range(m)]
            for _ in range(order + 1)
        ]
        P.append(MatrixSeries.from_coefficients(coeffs, t0))
    return LinearSystem(tuple(P))

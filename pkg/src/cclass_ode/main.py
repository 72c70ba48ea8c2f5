"""命令执行：algebra、structure、wilczynski、models 与 selftest"""

import itertools
import json
import random
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from pydantic import BaseModel

from .cochain import (
    Cochain,
    box_bijective_on_image,
    ce_matrix,
    cochain_space,
    d_a,
    d_g,
    d_gminus,
    d_gminus_direct,
    dstar,
    dstar_block,
    inner,
    split,
)
from .homogeneous import ModelError, build_rank2, report_for, verify_sl3_realization
from .jetcalc import JetEvaluationError, JetPoint, JetSystem
from .liealg import (
    LieAlgebraError,
    build_ode_algebra,
    table_dump,
    verify_lie_axioms,
)
from .linalg import Vector
from .models import RunConfig, SamplingConfig, SelftestCheck, SelftestReport
from .parser import ExpressionSyntaxError, JetVariableError
from .services import AppServices
from .structure import (
    aq_decomposition,
    expected_aq_decomposition,
    h1_by_homogeneity,
    reducibility_check,
    structure_report,
)
from .wilczynski import (
    combine_samples,
    evaluate_sample,
    flatness_verdict,
    generalized_wilczynski,
    lf_reduce,
    random_linear_system,
    sample_jets,
    theta_invariants,
    verify_reduction,
)

EXIT_OK = 0
EXIT_NOT_FLAT = 1
EXIT_USAGE = 2
EXIT_PROPERTY = 3
EXIT_INCONCLUSIVE = 4

VERDICT_EXIT = {"FLAT": EXIT_OK, "NOT_FLAT": EXIT_NOT_FLAT, "INCONCLUSIVE": EXIT_INCONCLUSIVE}

PARSE_ERRORS = (ExpressionSyntaxError, JetVariableError, JetEvaluationError)


@dataclass
class CommandResult:
    payload: dict[str, Any]
    exit_code: int
    text: str


def to_payload(model: BaseModel) -> dict[str, Any]:
    return model.model_dump(mode="json")


def render(result: CommandResult, fmt: str) -> str:
    """JSON 键排序输出；文本仅为摘要"""
    if fmt == "text":
        return result.text
    return json.dumps(result.payload, sort_keys=True, ensure_ascii=False, indent=2)


def usage_error(exc: Exception) -> CommandResult:
    payload: dict[str, Any] = {"error": str(exc)}
    offset = getattr(exc, "offset", None)
    if offset is not None:
        payload["offset"] = offset
    return CommandResult(payload, EXIT_USAGE, f"错误: {exc}")


# ==================================
# 示例方程
# ==================================
def _circles(m: int) -> str:
    dot_12 = " + ".join(f"D(u{b},1)*D(u{b},2)" for b in range(1, m + 1))
    dot_11 = " + ".join(f"D(u{b},1)^2" for b in range(1, m + 1))
    return "; ".join(
        f"3*D(u{a},2)*({dot_12})/(1 + {dot_11})" for a in range(1, m + 1)
    )


FLAT_EXAMPLES: dict[str, tuple[str, int, int]] = {
    "quintic": ("5*u3*u4/u2 - 40/9*u3^3/u2^2", 1, 4),
    "septic": (
        "(70*u3^2*u4*u6 + 49*u3^2*u5^2 - 280*u3*u4^2*u5 + 175*u4^4)/(10*u3^3)",
        1,
        6,
    ),
    "circles_m2": (_circles(2), 2, 2),
    "circles_m3": (_circles(3), 3, 2),
    "power_n3": ("4/3*u3^2/u2", 1, 3),
    "power_n5": ("6/5*u5^2/u4", 1, 5),
    "decoupled_m2": ("0; D(u1,2)^2", 2, 2),
}

TANAKA_CASES = ((1, 3), (1, 4), (1, 6), (2, 2), (3, 2))
COMPLEX_CASES = ((1, 3), (1, 4), (2, 2))
LAPLACIAN_CASES = ((1, 3), (2, 2))
ADJOINT_PAIRS = 200
LINEAR_SYSTEMS = 20


# ==================================
# 自检
# ==================================
def _random_cochain(rng: random.Random, space, terms: int = 4) -> Cochain:
    coords: Vector = {}
    for _ in range(terms):
        coords[rng.randrange(space.dim)] = Fraction(rng.randint(-3, 3))
    return Cochain(space, coords)


def check_lie_axioms() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for m, n in TANAKA_CASES:
        detail[f"g({m},{n})"] = verify_lie_axioms(build_ode_algebra(m, n)).passed
    for t in ("a2", "c2", "g2"):
        detail[t] = verify_lie_axioms(build_rank2(t).algebra).passed  # type: ignore[arg-type]
    return detail


DIFFERENTIALS = {"full": d_g, "a_coeff": d_a, "gminus": d_gminus_direct}


def check_complexes() -> dict[str, Any]:
    """d∘d = 0 与 ⟨dφ, ψ⟩ = ⟨φ, ∂*ψ⟩"""
    detail: dict[str, Any] = {}
    for m, n in COMPLEX_CASES:
        L = build_ode_algebra(m, n)
        for tag, d in DIFFERENTIALS.items():
            detail[f"dd:{tag}:g({m},{n})"] = all(
                (ce_matrix(L, k + 1, tag) @ ce_matrix(L, k, tag)).is_zero() for k in (0, 1)
            )
            ok = True
            for k in (1, 2):
                src, dst = cochain_space(L, k, tag), cochain_space(L, k + 1, tag)
                for i in range(ADJOINT_PAIRS):
                    rng = random.Random(f"adjoint:{tag}:{m}:{n}:{k}:{i}")
                    phi, psi = _random_cochain(rng, src), _random_cochain(rng, dst)
                    if inner(d(phi), psi) != inner(phi, dstar(psi)):
                        ok = False
                        break
                if not ok:
                    break
            detail[f"adjoint:{tag}:g({m},{n})"] = ok
        ok = True
        for k, i in itertools.product((2, 3), range(ADJOINT_PAIRS)):
            rng = random.Random(f"horizontal:{m}:{n}:{k}:{i}")
            psi = _random_cochain(rng, cochain_space(L, k, "gminus"))
            if dstar(psi.retag("horizontal")) != dstar(psi).retag("horizontal"):
                ok = False
                break
        detail[f"horizontal:g({m},{n})"] = ok
    return detail


def check_block_formulas() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for m, n in COMPLEX_CASES:
        L = build_ode_algebra(m, n)
        detail[f"dstar_block:g({m},{n})"] = all(
            dstar_block(phi) == split(dstar(phi))
            for phi in cochain_space(L, 2, "horizontal").basis()
        )
        detail[f"d_gminus:g({m},{n})"] = all(
            d_gminus(split(phi)) == split(d_gminus_direct(phi))
            for phi in cochain_space(L, 1, "gminus").basis()
        )
    return detail


def check_prolongation() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for m, n in TANAKA_CASES:
        report = h1_by_homogeneity(m, n)
        detail[f"g({m},{n})"] = report.spencer_injective and report.tanaka_full
    return detail


def check_reducibility() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for m, n in TANAKA_CASES:
        for method in ("proof_identity", "solve"):
            report = reducibility_check(m, n, method=method)
            detail[f"{method}:g({m},{n})"] = report.passed and report.certified == report.kernel_dim
    return detail


def check_aq_decomposition() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for n in range(3, 11):
        decomposition = aq_decomposition(1, n)
        detail[f"n={n}"] = (
            decomposition.multiplicities == expected_aq_decomposition(1, n)
            and decomposition.trivial_multiplicity == 0
        )
    return detail


def check_models() -> dict[str, Any]:
    detail: dict[str, Any] = {t: report_for(t).expected_matches for t in ("a2", "c2", "g2")}  # type: ignore[arg-type]
    detail["sl3_realization"] = verify_sl3_realization().passed
    return detail


def check_flat_example(name: str) -> dict[str, Any]:
    src, m, n = FLAT_EXAMPLES[name]
    report = flatness_verdict(JetSystem.parse(src, m, n), SamplingConfig())
    return {name: report.verdict == "FLAT", "samples": report.samples_evaluated}


def check_negative_control() -> dict[str, Any]:
    """u^(5) = u：Θ₅ ≡ −1680"""
    system = JetSystem.parse("u", 1, 4)
    sampling = SamplingConfig(samples=2)
    report = flatness_verdict(system, sampling)
    point = JetPoint(0, ((1, 0, 0, 0, 0),))
    theta5 = generalized_wilczynski(system, point, 4).theta[5]
    return {
        "not_flat": report.verdict == "NOT_FLAT",
        "theta5": theta5.coefficient(0)[0][0] == -1680
        and all(not theta5.coefficient(k)[0][0] for k in range(1, theta5.order + 1)),
    }


def check_linear_sanity() -> dict[str, Any]:
    theta2_zero, reductions = True, True
    for i in range(LINEAR_SYSTEMS):
        m = 1 + i % 2
        n = 2 + i % 3
        system = random_linear_system(i, m, n, order=8)
        reduced, record = lf_reduce(system)
        reductions = reductions and verify_reduction(system, reduced, record)
        if m == 1:
            theta2_zero = theta2_zero and theta_invariants(reduced).theta[2].is_zero()
    return {"theta2_zero": theta2_zero, "substitute_back": reductions}


def check_laplacian() -> dict[str, Any]:
    detail: dict[str, Any] = {}
    for m, n in LAPLACIAN_CASES:
        blocks = box_bijective_on_image(build_ode_algebra(m, n))
        detail[f"g({m},{n})"] = all(dim == rank for dim, rank in blocks.values())
    return detail


SELFTEST_CHECKS: list[tuple[str, Callable[[], dict[str, Any]]]] = [
    ("lie_axioms", check_lie_axioms),
    ("complexes", check_complexes),
    ("block_formulas", check_block_formulas),
    ("prolongation", check_prolongation),
    ("reducibility", check_reducibility),
    ("aq_decomposition", check_aq_decomposition),
    ("models", check_models),
    *(
        (f"flat:{name}", lambda name=name: check_flat_example(name))
        for name in FLAT_EXAMPLES
    ),
    ("negative_control", check_negative_control),
    ("linear_sanity", check_linear_sanity),
    ("laplacian", check_laplacian),
]


def run_check(name: str, func: Callable[[], dict[str, Any]]) -> SelftestCheck:
    try:
        detail = func()
    except Exception as e:
        return SelftestCheck(name=name, passed=False, detail={"error": f"{type(e).__name__}: {e}"})
    passed = all(v for v in detail.values() if isinstance(v, bool))
    return SelftestCheck(name=name, passed=passed, detail=detail)


# ==================================
# 命令
# ==================================
class CommandRunner:
    def __init__(self, services: AppServices):
        self.services = services
        self.logger = services.logger

    async def run(self, run: RunConfig) -> CommandResult:
        handlers = {
            "algebra": self.cmd_algebra,
            "structure": self.cmd_structure,
            "wilczynski": self.cmd_wilczynski,
            "models": self.cmd_models,
            "selftest": self.cmd_selftest,
        }
        return await handlers[run.command](run)

    async def cmd_algebra(self, run: RunConfig) -> CommandResult:
        try:
            L = build_ode_algebra(run.m, run.n)
        except LieAlgebraError as e:
            return usage_error(e)
        payload = table_dump(L)
        text = f"{L.name}: dim = {L.dim}\n基: {', '.join(L.labels)}"
        return CommandResult(payload, EXIT_OK, text)

    async def cmd_structure(self, run: RunConfig) -> CommandResult:
        report = await self.services.run_in_thread(structure_report, run.m, run.n, self.logger)
        lines = [
            f"g({report.m},{report.n}) 结构检验: {'通过' if report.passed else '失败'}",
            f"  Spencer 单射: {report.spencer.injective} ({report.spencer.rank}/{report.spencer.domain_dim})",
            f"  Tanaka 完全延拓: {report.tanaka_full}",
            f"  完全可约: {report.reducibility}",
            f"  ker/im/E: {report.dims.ker}/{report.dims.im}/{report.dims.E}",
        ]
        if not report.in_theorem_scope:
            lines.append("  (m, n) 不在定理适用范围内，仅报告")
        return CommandResult(to_payload(report), EXIT_OK if report.passed else EXIT_PROPERTY, "\n".join(lines))

    async def cmd_wilczynski(self, run: RunConfig) -> CommandResult:
        try:
            system = JetSystem.parse(run.expr or "", run.m, run.n)
        except PARSE_ERRORS as e:
            return usage_error(e)

        sampling = SamplingConfig(
            samples=run.samples,
            seed=run.seed,
            coordinate_range=run.coordinate_range,
            order=run.effective_order,
            variant=run.variant,
            max_attempts_factor=run.max_attempts_factor,
        )
        points = list(sample_jets(system, sampling))
        self.logger.info(f"在 {len(points)} 个射流点上计算 Wilczynski 不变量 (N = {run.effective_order})")
        outcomes = await self.services.map_in_threads(
            evaluate_sample,
            [
                (system, i, point, run.effective_order, run.variant, self.logger)
                for i, (_, point) in enumerate(points)
            ],
        )
        if len(points) == sampling.samples:
            attempts = points[-1][0] + 1
        else:
            attempts = sampling.max_attempts_factor * sampling.samples
        report = combine_samples(system, sampling, outcomes, attempts)

        lines = [f"判定: {report.verdict} ({report.samples_evaluated}/{report.samples_requested} 个样本)"]
        if report.witnesses:
            w = report.witnesses[0]
            lines.append(f"  反例: 样本 {w.sample}，Θ_{w.r} 的 (t−t₀)^{w.coefficient} 系数 {w.entry} = {w.value}")
        if report.diagnosis:
            lines.append(f"  诊断: {report.diagnosis}")
        return CommandResult(to_payload(report), VERDICT_EXIT[report.verdict], "\n".join(lines))

    async def cmd_models(self, run: RunConfig) -> CommandResult:
        payload: dict[str, Any] = {}
        lines = []
        ok = True
        try:
            if run.model_type is not None:
                report = await self.services.run_in_thread(report_for, run.model_type, self.logger)
                payload["model"] = to_payload(report)
                ok = ok and report.expected_matches
                lines.append(
                    f"{report.type.upper()} (n = {report.n}): ∂*κ = 0: {report.normal}，"
                    f"i_Xκ = 0: {report.insertion_X_zero}，正则: {report.regular}，"
                    f"强正则: {report.strongly_regular}"
                )
                if report.witness:
                    lines.append(f"  强正则反例次数: {report.witness}")
            if run.verify_sl3:
                sl3 = await self.services.run_in_thread(verify_sl3_realization, self.logger)
                payload["sl3_realization"] = to_payload(sl3)
                ok = ok and sl3.passed
                lines.append(f"sl₃ 向量场实现: {'通过' if sl3.passed else '失败'} ({sl3.pairs_checked} 对括号)")
        except ModelError as e:
            self.logger.error(f"模型构造失败: {e}")
            return CommandResult({"error": str(e)}, EXIT_PROPERTY, f"错误: {e}")
        return CommandResult(payload, EXIT_OK if ok else EXIT_PROPERTY, "\n".join(lines))

    async def cmd_selftest(self, run: RunConfig) -> CommandResult:
        self.logger.info(f"运行 {len(SELFTEST_CHECKS)} 项自检")
        checks = await self.services.map_in_threads(run_check, SELFTEST_CHECKS)
        for check in checks:
            if not check.passed:
                self.logger.warning(f"自检 {check.name} 失败: {check.detail}")
        report = SelftestReport(passed=all(c.passed for c in checks), checks=checks)
        text = "\n".join(f"[{'OK' if c.passed else 'FAIL'}] {c.name}" for c in checks)
        return CommandResult(to_payload(report), EXIT_OK if report.passed else EXIT_PROPERTY, text)

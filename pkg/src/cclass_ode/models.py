from typing import Annotated, Any, Literal, TypeAlias

from pydantic import BaseModel, Field, field_validator, model_validator

Variant: TypeAlias = Literal["solutionwise", "literal"]
OutputFormat: TypeAlias = Literal["json", "text"]
Command: TypeAlias = Literal["algebra", "structure", "wilczynski", "models", "selftest"]
ModelType: TypeAlias = Literal["a2", "c2", "g2"]
Verdict: TypeAlias = Literal["FLAT", "NOT_FLAT", "INCONCLUSIVE"]


# ==================================
# 配置模型
# ==================================
class LogConfig(BaseModel):
    level: Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"] = (
        "INFO"
    )
    file: bool = False  # 是否写入滚动日志文件

    @field_validator("level", mode="before")
    @classmethod
    def standardize_level_case(cls, v: Any) -> Any:
        """在验证前，将 level 转换为大写"""
        if isinstance(v, str):
            return v.upper()
        return v


class RuntimeConfig(BaseModel):
    threads: Annotated[int, Field(gt=0)] | None = None  # 工作线程上限，默认 CPU 数


class SamplingConfig(BaseModel):
    samples: Annotated[int, Field(ge=1)] = 8
    seed: int = 0
    coordinate_range: Annotated[int, Field(ge=1)] = 10
    order: Annotated[int, Field(ge=4)] | None = None  # 默认 2n+6
    variant: Variant = "solutionwise"
    max_attempts_factor: Annotated[int, Field(ge=1)] = 25


class Config(BaseModel):
    log: LogConfig = Field(default_factory=LogConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)


class RunConfig(BaseModel):
    """一次命令行调用的完整参数（命令行覆盖配置文件）"""

    command: Command
    m: int = 1
    n: int = 4
    expr: str | None = None
    seed: int = 0
    samples: int = 8
    order: int | None = None
    fmt: OutputFormat = "json"
    variant: Variant = "solutionwise"
    coordinate_range: int = 10
    max_attempts_factor: int = 25
    model_type: ModelType | None = None
    verify_sl3: bool = False

    @field_validator("model_type", mode="before")
    @classmethod
    def standardize_model_type(cls, v: Any) -> Any:
        if isinstance(v, str):
            return v.lower()
        return v

    @model_validator(mode="after")
    def check_ranges(self) -> "RunConfig":
        if self.m < 1:
            raise ValueError(f"m 必须 ≥ 1，实际为 {self.m}")
        if self.n < 2:
            raise ValueError(f"n 必须 ≥ 2，实际为 {self.n}")
        if self.samples < 1:
            raise ValueError(f"样本数必须 ≥ 1，实际为 {self.samples}")
        if self.coordinate_range < 1:
            raise ValueError(f"坐标范围必须 ≥ 1，实际为 {self.coordinate_range}")
        if self.order is not None and self.order < self.n + 2:
            raise ValueError(f"级数阶数必须 ≥ n+2 = {self.n + 2}，实际为 {self.order}")
        if self.command == "wilczynski" and not self.expr:
            raise ValueError("wilczynski 命令需要 --expr 或 --expr-file")
        if self.command == "models" and self.model_type is None and not self.verify_sl3:
            raise ValueError("models 命令需要 --type 或 --verify-sl3")
        return self

    @property
    def effective_order(self) -> int:
        return self.order if self.order is not None else 2 * self.n + 6


# ==================================
# 结构检验报告
# ==================================
class SpencerReport(BaseModel):
    rank: int
    domain_dim: int
    injective: bool
    zero_on_a_valued: bool = True


class ProlongationReport(BaseModel):
    m: int
    n: int
    spencer_rank: int
    spencer_injective: bool
    h1_dims_by_homogeneity: dict[int, int]
    tanaka_full: bool
    in_theorem_scope: bool = True


class NormalizationDims(BaseModel):
    ker: int
    im: int
    E: int
    quotient_by_homogeneity: dict[int, int]
    im_in_ker: bool
    e_in_ker: bool


class ReducibilityReport(BaseModel):
    passed: bool
    kernel_dim: int
    checked: int
    method: Literal["proof_identity", "solve"] = "proof_identity"
    certified: int = 0  # 代回验证通过的 ψ 个数
    certificates: list[list[dict[str, Any]]] = Field(default_factory=list)
    witness: int | None = None  # 第一个失败的核基向量序号


class StructureReport(BaseModel):
    m: int
    n: int
    in_theorem_scope: bool
    spencer: SpencerReport
    h1: dict[int, int]
    tanaka_full: bool
    reducibility: bool
    reducibility_certified: dict[str, int] = Field(default_factory=dict)  # 各方法给出的证书数
    dims: NormalizationDims
    slots: dict[int, int]
    essential_factorization: bool
    passed: bool


# ==================================
# Wilczynski 报告
# ==================================
class Witness(BaseModel):
    sample: int
    jet: dict[str, str]
    r: int
    coefficient: int  # (t−t₀) 的幂次
    entry: tuple[int, int]
    value: str


class SampleReport(BaseModel):
    index: int
    jet: dict[str, str]
    certified_order: int
    theta: dict[int, str | list[list[list[str]]]]
    flat: bool
    lf_normal: bool | None = None  # 仅 literal 变体给出


class FlatnessReport(BaseModel):
    verdict: Verdict
    variant: Variant
    m: int
    n: int
    order: int
    certified_order: int | None
    seed: int
    samples_requested: int
    samples_evaluated: int
    attempts: int
    coordinate_range: int
    samples: list[SampleReport]
    witnesses: list[Witness]
    diagnosis: str | None = None


# ==================================
# 齐性模型报告
# ==================================
class CochainTerm(BaseModel):
    indices: list[int]
    value_basis: int
    coeff: str


class TrivialSummandReport(BaseModel):
    module: Literal["V_n", "sl2"]
    module_dim: int
    decomposition: str
    trivial_count: int
    projection_norm_sq: str
    component_norm_sq: str
    contained: bool  # κ 的该分量是否整体落在平凡部分中


class YComparison(BaseModel):
    computed: list[str]
    reference: list[str]
    agrees: bool
    reference_matches_z1: bool


class CurvatureReport(BaseModel):
    type: ModelType
    n: int
    dim: int
    cartan_matrix: list[list[int]]
    kappa: list[CochainTerm]
    insertion_X_zero: bool
    normal: bool
    regular: bool
    strongly_regular: bool
    witness: tuple[int, int, int] | None = None
    filtration_degrees: dict[str, int]
    trivial_summands: list[TrivialSummandReport]
    y_comparison: YComparison
    expected_matches: bool


class Sl3Report(BaseModel):
    passed: bool
    pairs_checked: int
    spans: bool
    weights_ok: bool
    failures: list[str] = Field(default_factory=list)


# ==================================
# 自检
# ==================================
class SelftestCheck(BaseModel):
    name: str
    passed: bool
    detail: dict[str, Any] = Field(default_factory=dict)


class SelftestReport(BaseModel):
    passed: bool
    checks: list[SelftestCheck]

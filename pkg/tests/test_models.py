import pytest
from pydantic import ValidationError

from cclass_ode.models import Config, LogConfig, RunConfig, SamplingConfig


def test_log_level_case_insensitive():
    """测试日志级别会被转换为大写"""
    assert LogConfig.model_validate({"level": "debug"}).level == "DEBUG"


def test_log_level_invalid():
    """测试非法日志级别"""
    with pytest.raises(ValidationError):
        LogConfig.model_validate({"level": "verbose"})


def test_default_config():
    """测试默认配置"""
    config = Config.model_validate({})
    assert config.sampling.samples == 8
    assert config.sampling.seed == 0
    assert config.sampling.order is None
    assert config.sampling.variant == "solutionwise"
    assert config.log.file is False
    assert config.runtime.threads is None


@pytest.mark.parametrize(
    "data",
    [
        {"samples": 0},
        {"coordinate_range": 0},
        {"order": 2},
        {"variant": "other"},
    ],
)
def test_sampling_config_invalid(data):
    """测试采样配置的取值范围"""
    with pytest.raises(ValidationError):
        SamplingConfig.model_validate(data)


def test_run_config_defaults():
    """测试 N 默认为 2n+6"""
    run = RunConfig(command="structure", n=5)
    assert run.effective_order == 16
    assert RunConfig(command="structure", n=5, order=9).effective_order == 9


@pytest.mark.parametrize(
    "data",
    [
        {"command": "algebra", "m": 0},
        {"command": "algebra", "n": 1},
        {"command": "wilczynski", "n": 4, "order": 5, "expr": "u"},
        {"command": "wilczynski", "expr": None},
        {"command": "models"},
        {"command": "models", "model_type": "x7"},
        {"command": "algebra", "fmt": "xml"},
    ],
)
def test_run_config_invalid(data):
    """测试非法的命令行参数组合"""
    with pytest.raises(ValidationError):
        RunConfig.model_validate(data)


def test_run_config_model_type_case():
    """测试模型类型大小写无关"""
    assert RunConfig(command="models", model_type="G2").model_type == "g2"  # type: ignore[arg-type]

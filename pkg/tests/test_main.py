import json

import anyio
import pytest

from cclass_ode import async_main, build_parser, main
from cclass_ode.main import (
    EXIT_NOT_FLAT,
    EXIT_OK,
    EXIT_PROPERTY,
    EXIT_USAGE,
    FLAT_EXAMPLES,
    CommandResult,
    check_negative_control,
    render,
    run_check,
    usage_error,
)
from cclass_ode.parser import ExpressionSyntaxError

pytestmark = pytest.mark.anyio


@pytest.fixture
def run_cli(tmp_path, monkeypatch, capsys):
    """以临时配置文件运行命令行，返回 (退出码, 标准输出)"""
    monkeypatch.delenv("CCLASS_THREADS", raising=False)
    config = tmp_path / "config.yaml"

    async def runner(*argv: str) -> tuple[int, str]:
        code = await async_main([argv[0], "--config", str(config), *argv[1:]])
        return code, capsys.readouterr().out

    return runner


def test_render_json_is_sorted():
    """测试 JSON 输出按键排序"""
    result = CommandResult({"b": 1, "a": "½"}, EXIT_OK, "摘要")
    assert render(result, "json") == '{\n  "a": "½",\n  "b": 1\n}'
    assert render(result, "text") == "摘要"


def test_usage_error_keeps_offset():
    """测试语法错误的位置写入输出"""
    result = usage_error(ExpressionSyntaxError("表达式意外结束", 3))
    assert result.exit_code == EXIT_USAGE
    assert result.payload["offset"] == 3


def test_run_check_catches_errors():
    """测试自检项抛出异常时记为失败"""

    def broken():
        raise RuntimeError("boom")

    check = run_check("broken", broken)
    assert not check.passed
    assert "boom" in check.detail["error"]


def test_negative_control_check():
    """测试 u^(5) = u 的反例检查"""
    assert check_negative_control() == {"not_flat": True, "theta5": True}


def test_flat_examples_shapes():
    """测试示例方程的 (m, n)"""
    assert FLAT_EXAMPLES["quintic"][1:] == (1, 4)
    assert FLAT_EXAMPLES["circles_m3"][0].count(";") == 2


def test_parser_rejects_unknown_model_type():
    """测试 --type 只接受 a2/c2/g2"""
    with pytest.raises(SystemExit) as exc_info:
        build_parser().parse_args(["models", "--type", "x7"])
    assert exc_info.value.code == EXIT_USAGE


async def test_algebra_command(run_cli):
    """测试 algebra 命令输出结构常数表"""
    code, out = await run_cli("algebra", "-m", "1", "-n", "4")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["dim"] == 9
    assert payload["labels"][:3] == ["X", "H", "Y"]


async def test_algebra_output_is_deterministic(run_cli):
    """测试相同参数输出相同"""
    _, first = await run_cli("algebra", "-m", "2", "-n", "2")
    _, second = await run_cli("algebra", "-m", "2", "-n", "2")
    assert first == second


async def test_algebra_text_format(run_cli):
    """测试文本格式输出"""
    code, out = await run_cli("algebra", "-n", "3", "--format", "text")
    assert code == EXIT_OK
    assert out.startswith("g(1,3): dim = 8")


@pytest.mark.parametrize("argv", [("algebra", "-m", "0"), ("algebra", "-n", "1")])
async def test_invalid_shape(run_cli, argv):
    """测试非法的 (m, n)"""
    code, _ = await run_cli(*argv)
    assert code == EXIT_USAGE


async def test_structure_command(run_cli):
    """测试 structure 命令"""
    code, out = await run_cli("structure", "-m", "1", "-n", "3")
    assert code == EXIT_OK
    assert json.loads(out)["passed"] is True


async def test_wilczynski_syntax_error(run_cli):
    """测试表达式语法错误返回 2 并给出位置"""
    code, out = await run_cli("wilczynski", "-n", "4", "--expr", "u +")
    assert code == EXIT_USAGE
    assert json.loads(out)["offset"] == 3


async def test_wilczynski_missing_expression(run_cli):
    """测试缺少右端项"""
    code, _ = await run_cli("wilczynski", "-n", "4")
    assert code == EXIT_USAGE


async def test_wilczynski_not_flat(run_cli):
    """测试 u^(5) = u 返回 1"""
    code, out = await run_cli(
        "wilczynski", "-n", "4", "--expr", "u", "--samples", "2", "--order", "6"
    )
    assert code == EXIT_NOT_FLAT
    report = json.loads(out)
    assert report["verdict"] == "NOT_FLAT"
    assert report["witnesses"][0]["r"] == 5


async def test_wilczynski_expr_file(run_cli, tmp_path):
    """测试从文件读取右端项"""
    path = tmp_path / "quintic.txt"
    path.write_text(FLAT_EXAMPLES["quintic"][0], encoding="utf-8")
    code, out = await run_cli(
        "wilczynski", "-n", "4", "--expr-file", str(path), "--samples", "1", "--seed", "5"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["verdict"] == "FLAT"
    assert report["seed"] == 5


async def test_wilczynski_missing_file(run_cli, tmp_path):
    """测试右端项文件不存在"""
    code, _ = await run_cli("wilczynski", "--expr-file", str(tmp_path / "missing.txt"))
    assert code == EXIT_USAGE


async def test_models_requires_option(run_cli):
    """测试 models 命令缺少选项"""
    code, _ = await run_cli("models")
    assert code == EXIT_USAGE


@pytest.mark.slow
async def test_models_command(run_cli):
    """测试 models 命令"""
    code, out = await run_cli("models", "--type", "A2", "--verify-sl3")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["model"]["type"] == "a2"
    assert payload["sl3_realization"]["passed"] is True


@pytest.mark.slow
async def test_selftest_command(run_cli):
    """测试全部自检通过"""
    code, out = await run_cli("selftest")
    report = json.loads(out)
    assert [c["name"] for c in report["checks"] if not c["passed"]] == []
    assert code == EXIT_OK


async def test_invalid_config_file(tmp_path, capsys):
    """测试配置文件无效时返回 2"""
    config = tmp_path / "config.yaml"
    config.write_text("sampling:\n  samples: 0\n", encoding="utf-8")

    code = await async_main(["algebra", "--config", str(config)])

    assert code == EXIT_USAGE
    assert "配置文件无效" in capsys.readouterr().err


async def test_unexpected_error(run_cli, monkeypatch):
    """测试未预期的异常返回 3"""

    async def explode(self, run):
        raise RuntimeError("boom")

    monkeypatch.setattr("cclass_ode.main.CommandRunner.run", explode)
    code, _ = await run_cli("algebra")
    assert code == EXIT_PROPERTY


def test_main_keyboard_interrupt(monkeypatch, capsys):
    """测试 Ctrl+C 退出码为 130"""

    def interrupted(*args, **kwargs):
        raise KeyboardInterrupt

    monkeypatch.setattr(anyio, "run", interrupted)
    with pytest.raises(SystemExit) as exc_info:
        main()
    assert exc_info.value.code == 130
    assert "程序已退出" in capsys.readouterr().out

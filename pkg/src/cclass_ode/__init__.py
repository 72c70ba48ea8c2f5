"""C 类常微分方程的精确计算工具"""

import sys
from importlib.metadata import version

import anyio

__version__ = version("cclass_ode")


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="cclass-ode", description="C 类常微分方程：模型代数、结构检验与 Wilczynski 平坦性"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="配置文件路径")
    common.add_argument("--format", dest="fmt", choices=["json", "text"], help="输出格式")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("-m", type=int, help="未知函数个数 m")
    shape.add_argument("-n", type=int, help="方程阶数为 n+1")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("algebra", parents=[common, shape], help="输出 g(m,n) 的结构常数表")
    sub.add_parser("structure", parents=[common, shape], help="结构检验报告")

    wil = sub.add_parser("wilczynski", parents=[common, shape], help="广义 Wilczynski 平坦性判定")
    source = wil.add_mutually_exclusive_group()
    source.add_argument("--expr", help="右端项，方程组以 ';' 分隔")
    source.add_argument("--expr-file", help="从文件读取右端项")
    wil.add_argument("--seed", type=int, help="随机种子")
    wil.add_argument("--samples", type=int, help="样本数 R")
    wil.add_argument("--order", type=int, help="级数阶数 N，默认 2n+6")
    wil.add_argument("--variant", choices=["solutionwise", "literal"], help="计算方式")

    models = sub.add_parser("models", parents=[common], help="齐性模型的曲率报告")
    models.add_argument("--type", dest="model_type", type=str.lower, choices=["a2", "c2", "g2"])
    models.add_argument("--verify-sl3", action="store_true", help="检验 sl₃ 的向量场实现")

    sub.add_parser("selftest", parents=[common], help="运行全部验收检查")
    return parser


async def build_run_config(args, config):
    """命令行参数覆盖配置文件"""
    from .models import RunConfig

    sampling = config.sampling
    expr = getattr(args, "expr", None)
    expr_file = getattr(args, "expr_file", None)
    if expr_file:
        expr = await anyio.Path(expr_file).read_text(encoding="utf-8")

    def pick(name, default):
        value = getattr(args, name, None)
        return default if value is None else value

    data = {
        "command": args.command,
        "m": pick("m", 1),
        "n": pick("n", 4),
        "expr": expr,
        "seed": pick("seed", sampling.seed),
        "samples": pick("samples", sampling.samples),
        "order": pick("order", sampling.order),
        "fmt": pick("fmt", "json"),
        "variant": pick("variant", sampling.variant),
        "coordinate_range": sampling.coordinate_range,
        "max_attempts_factor": sampling.max_attempts_factor,
        "model_type": getattr(args, "model_type", None),
        "verify_sl3": getattr(args, "verify_sl3", False),
    }
    return RunConfig.model_validate(data)


async def async_main(argv: list[str] | None = None) -> int:
    from pydantic import ValidationError

    from .config import ConfigManager
    from .main import EXIT_PROPERTY, EXIT_USAGE, CommandRunner, render
    from .services import AppServices

    args = build_parser().parse_args(argv)

    try:
        config = await ConfigManager.create(args.config)
    except (ValidationError, OSError) as e:
        print(f"配置文件无效: {e}", file=sys.stderr)
        return EXIT_USAGE

    services = await AppServices.create(config=config)
    try:
        try:
            run = await build_run_config(args, config)
        except (ValidationError, OSError) as e:
            services.logger.error(f"参数无效: {e}")
            return EXIT_USAGE

        result = await CommandRunner(services).run(run)
        print(render(result, run.fmt))
        return result.exit_code

    except Exception:
        services.logger.exception("程序运行时发生错误")
        return EXIT_PROPERTY
    finally:
        await services.close()


def main() -> None:
    try:
        code = anyio.run(async_main)
    except KeyboardInterrupt:
        print("\n程序已退出。")
        code = 130
    sys.exit(code)

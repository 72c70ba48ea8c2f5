from collections.abc import Callable
from typing import TypeVar

import anyio

from .config import ConfigManager
from .logger import LoggerProtocol, setup_logger

R = TypeVar("R")


class AppServices:
    """创建和持有核心服务实例的容器"""

    def __init__(
        self,
        config: ConfigManager,
        logger: LoggerProtocol,
        limiter: anyio.CapacityLimiter,
    ):
        self.config = config
        self.logger = logger
        self.limiter = limiter

    @classmethod
    async def create(cls, config: ConfigManager) -> "AppServices":
        """异步创建并初始化所有应用服务。"""
        logger: LoggerProtocol = await setup_logger(config=config)  # type: ignore
        config.set_logger(logger)

        threads = config.threads
        logger.debug(f"工作线程上限 {threads}，配置文件 {config.config_path}")
        return cls(config=config, logger=logger, limiter=anyio.CapacityLimiter(threads))

    async def run_in_thread(self, func: Callable[..., R], *args) -> R:
        """在受限的工作线程中执行精确计算"""
        return await anyio.to_thread.run_sync(func, *args, limiter=self.limiter)

    async def map_in_threads(self, func: Callable[..., R], items: list[tuple]) -> list[R]:
        """并行执行，结果按输入顺序返回"""
        results: list[R | None] = [None] * len(items)

        async def worker(index: int, args: tuple) -> None:
            results[index] = await self.run_in_thread(func, *args)

        async with anyio.create_task_group() as tg:
            for i, args in enumerate(items):
                tg.start_soon(worker, i, args)
        return results  # type: ignore[return-value]

    async def close(self):
        """关闭所有服务"""
        self.logger.debug("服务已关闭")

import threading
import time
from unittest.mock import AsyncMock

import pytest

from cclass_ode.config import ConfigManager
from cclass_ode.logger import LoggerProtocol
from cclass_ode.services import AppServices

pytestmark = pytest.mark.anyio


async def test_app_services_create(
    test_config: ConfigManager, mock_logger: LoggerProtocol, monkeypatch
):
    """测试服务容器按配置的线程数创建限流器"""
    monkeypatch.setattr(
        "cclass_ode.services.setup_logger", AsyncMock(return_value=mock_logger)
    )
    await test_config.update({"runtime": {"threads": 3}})
    mock_logger.debug.reset_mock()  # type: ignore[attr-defined]

    services = await AppServices.create(config=test_config)

    assert services.limiter.total_tokens == 3
    assert services.logger is mock_logger
    assert test_config.logger is mock_logger
    mock_logger.debug.assert_called_once()


async def test_run_in_thread(test_services: AppServices):
    """测试计算在工作线程中执行"""
    main_thread = threading.get_ident()

    result = await test_services.run_in_thread(lambda a, b: (a + b, threading.get_ident()), 2, 3)

    assert result[0] == 5
    assert result[1] != main_thread


async def test_map_in_threads_keeps_order(test_services: AppServices):
    """测试并行结果按输入顺序返回"""

    def slow_square(x: int, delay: float) -> int:
        time.sleep(delay)
        return x * x

    items = [(i, 0.05 * (4 - i)) for i in range(5)]
    results = await test_services.map_in_threads(slow_square, items)

    assert results == [0, 1, 4, 9, 16]


async def test_map_in_threads_respects_limiter(test_services: AppServices):
    """测试同时运行的工作线程数不超过上限"""
    lock = threading.Lock()
    running = 0
    peak = 0

    def work(_: int) -> None:
        nonlocal running, peak
        with lock:
            running += 1
            peak = max(peak, running)
        time.sleep(0.05)
        with lock:
            running -= 1

    await test_services.map_in_threads(work, [(i,) for i in range(6)])

    assert peak <= test_services.limiter.total_tokens == 2


async def test_map_in_threads_propagates_errors(test_services: AppServices):
    """测试工作线程中的异常被传出"""

    def fail(x: int) -> int:
        if x == 2:
            raise ValueError("bad input")
        return x

    with pytest.raises(Exception) as exc_info:
        await test_services.map_in_threads(fail, [(i,) for i in range(4)])
    assert exc_info.group_contains(ValueError, match="bad input")


async def test_close(test_services: AppServices, mock_logger: LoggerProtocol):
    """测试关闭服务"""
    await test_services.close()
    mock_logger.debug.assert_called_once()  # type: ignore[attr-defined]


async def test_map_in_threads_empty(test_services: AppServices):
    """测试空输入"""
    assert await test_services.map_in_threads(abs, []) == []

from pathlib import Path
from unittest.mock import MagicMock

import anyio
import pytest
from anyio import Path as AnyioPath

from cclass_ode.config import ConfigManager
from cclass_ode.liealg import LieAlgebraTable, build_ode_algebra
from cclass_ode.logger import LoggerProtocol
from cclass_ode.services import AppServices

pytestmark = pytest.mark.anyio


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture
def mock_logger() -> LoggerProtocol:
    """创建一个功能完整的模拟 logger 对象。"""
    logger = MagicMock(spec=LoggerProtocol)
    for level in [
        "trace",
        "debug",
        "info",
        "success",
        "warning",
        "error",
        "critical",
        "exception",
    ]:
        setattr(logger, level, MagicMock())
    return logger


@pytest.fixture
def tmp_config_file(tmp_path: Path) -> AnyioPath:
    """创建一个临时的、空的配置文件路径。"""
    config_dir = tmp_path / "cclass-ode"
    config_dir.mkdir()
    return AnyioPath(config_dir / "config.yaml")


@pytest.fixture
async def test_config(
    tmp_config_file: AnyioPath, monkeypatch, mock_logger: LoggerProtocol
) -> ConfigManager:
    """创建一个使用临时配置文件和模拟 logger 的 ConfigManager 实例。"""

    async def mock_find_path() -> AnyioPath:
        return tmp_config_file

    monkeypatch.setattr(ConfigManager, "_find_config_path", mock_find_path)
    monkeypatch.delenv("CCLASS_THREADS", raising=False)

    cfg_manager = await ConfigManager.create()
    cfg_manager.set_logger(mock_logger)
    return cfg_manager


@pytest.fixture
def test_services(test_config: ConfigManager, mock_logger: LoggerProtocol) -> AppServices:
    """不经过 setup_logger 的服务容器，两个工作线程。"""
    return AppServices(config=test_config, logger=mock_logger, limiter=anyio.CapacityLimiter(2))


@pytest.fixture(scope="session")
def g14() -> LieAlgebraTable:
    return build_ode_algebra(1, 4)


@pytest.fixture(scope="session")
def g13() -> LieAlgebraTable:
    return build_ode_algebra(1, 3)


@pytest.fixture(scope="session")
def g22() -> LieAlgebraTable:
    return build_ode_algebra(2, 2)

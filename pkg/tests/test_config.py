import anyio
import pytest
import yaml
from pydantic import ValidationError

from cclass_ode.config import CONFIG_FILE, ConfigManager
from cclass_ode.models import Config

pytestmark = pytest.mark.anyio


async def test_find_config_path_fallback(monkeypatch, tmp_path):
    """测试当配置文件不存在时，是否回退到默认路径。"""
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.setenv("USERPROFILE", str(tmp_path))
    monkeypatch.delenv("XDG_CONFIG_HOME", raising=False)
    monkeypatch.chdir(tmp_path)

    found_path = await ConfigManager._find_config_path()

    expected_path = anyio.Path(str(tmp_path), ".config", "cclass-ode", CONFIG_FILE)
    assert found_path == expected_path


async def test_find_config_path_cwd(monkeypatch, tmp_path):
    """测试当前目录中的配置文件会被找到"""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    monkeypatch.chdir(tmp_path)
    (tmp_path / CONFIG_FILE).write_text("log:\n  level: debug\n", encoding="utf-8")

    found_path = await ConfigManager._find_config_path()

    assert found_path == anyio.Path(tmp_path) / CONFIG_FILE


async def test_config_creation(tmp_config_file: anyio.Path):
    """测试 _load_or_create 创建默认配置文件"""
    assert not await tmp_config_file.exists()

    await ConfigManager._load_or_create(tmp_config_file)

    assert await tmp_config_file.exists()
    data = yaml.safe_load(await tmp_config_file.read_text(encoding="utf-8"))
    assert data == Config.model_validate({}).model_dump(mode="json")


async def test_partial_config_is_completed(tmp_config_file: anyio.Path):
    """测试不完整的配置文件被补齐且保留用户值"""
    await tmp_config_file.write_text(yaml.safe_dump({"sampling": {"samples": 3}}))

    config = await ConfigManager._load_or_create(tmp_config_file)

    assert config.sampling.samples == 3
    assert config.sampling.seed == 0
    data = yaml.safe_load(await tmp_config_file.read_text(encoding="utf-8"))
    assert data["sampling"]["samples"] == 3
    assert "log" in data


async def test_explicit_config_path(tmp_path):
    """测试 --config 指定的路径优先"""
    path = tmp_path / "custom.yaml"
    path.write_text(yaml.safe_dump({"log": {"level": "warning"}}), encoding="utf-8")

    manager = await ConfigManager.create(path)

    assert manager.config_path == anyio.Path(path)
    assert manager.log.level == "WARNING"


async def test_config_update(test_config: ConfigManager):
    """测试配置更新并写回文件"""
    await test_config.update({"sampling": {"samples": 12, "variant": "literal"}})

    assert test_config.sampling.samples == 12
    assert test_config.sampling.variant == "literal"
    data = yaml.safe_load(await test_config.config_path.read_text(encoding="utf-8"))
    assert data["sampling"]["samples"] == 12


async def test_update_failure_rollback(test_config: ConfigManager):
    """测试更新失败时的回滚"""
    await test_config.update({"log": {"level": "CRITICAL"}})

    with pytest.raises(ValidationError):
        await test_config.update({"sampling": {"samples": 0}})

    assert test_config.log.level == "CRITICAL"
    assert test_config.sampling.samples == 8
    test_config.logger.error.assert_called_once()  # type: ignore[attr-defined]


async def test_threads_env_overrides_file(test_config: ConfigManager, monkeypatch):
    """测试 CCLASS_THREADS 优先于配置文件"""
    await test_config.update({"runtime": {"threads": 3}})
    assert test_config.threads == 3

    monkeypatch.setenv("CCLASS_THREADS", "5")
    assert test_config.threads == 5


async def test_threads_invalid_env(test_config: ConfigManager, monkeypatch):
    """测试非法的 CCLASS_THREADS 被忽略"""
    monkeypatch.setenv("CCLASS_THREADS", "many")

    assert test_config.threads >= 1
    test_config.logger.warning.assert_called_once()  # type: ignore[attr-defined]

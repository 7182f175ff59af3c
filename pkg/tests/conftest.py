# 测试配置

import pytest
import sys
from pathlib import Path

import numpy as np

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.config_manager import Config


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.default_rng(20240601)


@pytest.fixture
def config(tmp_path):
    """指向临时目录中不存在的配置文件，即全部默认值"""
    return Config(str(tmp_path / 'isopar.yaml'))

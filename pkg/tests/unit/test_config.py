"""
单元测试 - 配置管理模块
"""

import pytest
import sys
from pathlib import Path

import yaml

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.config_manager import Config, NumericTolerances


class TestConfig:
    """测试配置管理模块"""

    def test_default_config(self, config):
        """测试默认配置"""
        for section in ('numerics', 'sampling', 'parallel', 'output', 'logging', 'i18n'):
            assert section in config.config
        assert config.get('sampling.seed') == 42
        assert config.get('sampling.samples') == 20
        assert config.validate_config()

    def test_config_get(self, config):
        """测试配置获取功能"""
        assert config.get('numerics.tol') == 1e-8
        assert config.get('nonexistent.key') is None
        assert config.get('nonexistent.key', 'default_value') == 'default_value'

    def test_numerics(self, config):
        """默认阈值"""
        numerics = config.numerics()
        assert numerics == NumericTolerances()
        assert numerics.einstein_yes_tol == 1e-6
        assert numerics.einstein_no_threshold == 0.5

    def test_partial_override(self, tmp_path):
        """文件中的值覆盖默认值，其余保持默认"""
        path = tmp_path / 'isopar.yaml'
        path.write_text(yaml.safe_dump({'numerics': {'willmore_tol': 1e-9}, 'sampling': {'seed': 7}}),
                        encoding='utf-8')
        config = Config(str(path))
        assert config.numerics().willmore_tol == 1e-9
        assert config.numerics().tol == 1e-8
        assert config.get('sampling.seed') == 7
        assert config.get('sampling.samples') == 20

    def test_broken_file(self, tmp_path):
        """无法解析时回退到默认值"""
        path = tmp_path / 'isopar.yaml'
        path.write_text("numerics: [unclosed", encoding='utf-8')
        assert Config(str(path)).get('sampling.seed') == 42

    def test_non_mapping_file(self, tmp_path):
        """内容不是映射"""
        path = tmp_path / 'isopar.yaml'
        path.write_text("- 1\n- 2\n", encoding='utf-8')
        assert Config(str(path)).get('numerics.tol') == 1e-8

    @pytest.mark.parametrize("key,value", [
        ('numerics.tol', -1.0),
        ('numerics.cluster_tol', 'wide'),
        ('sampling.samples', 0),
        ('sampling.seed', -3),
        ('parallel.threads', -1),
        ('sampling.newton_tol', 0),
    ])
    def test_validation(self, config, key, value):
        """不合法的值使验证失败"""
        section, name = key.split('.')
        config.config[section][name] = value
        assert not config.validate_config()

    def test_numerics_invalid_value(self, config):
        """numerics 中的非数值回退到默认值"""
        config.config['numerics']['kernel_tol'] = 'small'
        assert config.numerics().kernel_tol == NumericTolerances().kernel_tol

    def test_python_tags_rejected(self, tmp_path):
        """只接受纯 YAML：带 Python 标签的文件回退到默认配置"""
        path = tmp_path / 'isopar.yaml'
        path.write_text("numerics: !!python/object/apply:os.getcwd []\n", encoding='utf-8')
        config = Config(str(path))
        assert config.get('numerics.tol') == 1e-8
        assert config.validate_config()

#!/usr/bin/env python3
"""
配置管理模块
用于加载和管理数值容差、采样、并行与输出设置
"""

import copy
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Any

import yaml

from src.utils.logger import warning

DEFAULT_CONFIG_NAME = 'isopar.yaml'


@dataclass(frozen=True)
class NumericTolerances:
    """各项检查使用的数值阈值"""
    tol: float = 1e-8
    focal_value_tol: float = 1e-8
    cluster_tol: float = 0.5
    spectrum_cluster_tol: float = 0.3
    spectrum_tol: float = 1e-7
    kernel_tol: float = 1e-7
    rank_rel_tol: float = 1e-8
    willmore_tol: float = 1e-7
    block_tol: float = 1e-7
    einstein_yes_tol: float = 1e-6
    einstein_no_threshold: float = 0.5


class Config:
    """配置管理类"""

    def __init__(self, config_file: str = None):
        """
        初始化配置管理器
        :param config_file: 配置文件路径，如果为None则使用项目根目录下的 isopar.yaml
        """
        if config_file:
            self.config_file = config_file
        else:
            # config_manager.py 位于 project_root/src/core/
            project_root = Path(__file__).parent.parent.parent
            self.config_file = str(project_root / DEFAULT_CONFIG_NAME)

        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """
        加载配置文件，缺失的键由默认值补齐
        :return: 配置字典
        """
        defaults = self._get_default_config()
        if not Path(self.config_file).exists():
            return defaults

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded_config = yaml.safe_load(f)
        except (yaml.YAMLError, IOError) as e:
            warning(f"Failed to load config file {self.config_file}: {e}")
            return defaults

        # 如果文件为空或内容不是映射，返回默认配置
        if not isinstance(loaded_config, dict):
            return defaults
        return self._merge(defaults, loaded_config)

    @staticmethod
    def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        merged = copy.deepcopy(base)
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = Config._merge(merged[key], value)
            else:
                merged[key] = value
        return merged

    def _get_default_config(self) -> Dict[str, Any]:
        """
        获取默认配置
        :return: 默认配置字典
        """
        return {
            'numerics': {f.name: f.default for f in fields(NumericTolerances)},
            'sampling': {
                'seed': 42,
                'samples': 20,
                'newton_tol': 1e-12,
                'newton_max_iter': 50,
                'newton_restarts': 5
            },
            'parallel': {
                'threads': 0
            },
            'output': {
                'indent': 2
            },
            'logging': {
                'level': 'WARNING',
                'file': '',
                'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            },
            'i18n': {
                'locale': 'en'
            }
        }

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值
        :param key: 配置键，支持点号分隔的多级键
        :param default: 默认值
        :return: 配置值
        """
        keys = key.split('.')
        value = self.config
        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def numerics(self) -> NumericTolerances:
        """
        由 numerics 段构造阈值对象，非法值回退到默认值
        :return: NumericTolerances
        """
        values = {}
        for f in fields(NumericTolerances):
            raw = self.get(f'numerics.{f.name}', f.default)
            try:
                value = float(raw)
            except (TypeError, ValueError):
                warning(f"invalid numerics.{f.name}={raw!r}, using {f.default}")
                value = f.default
            values[f.name] = value
        return NumericTolerances(**values)

    def validate_config(self) -> bool:
        """
        验证配置的有效性
        :return: 配置是否有效
        """
        for f in fields(NumericTolerances):
            value = self.get(f'numerics.{f.name}')
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                warning(f"config error: numerics.{f.name} must be a positive number, got {value!r}")
                return False

        for key in ('sampling.samples', 'sampling.newton_max_iter', 'sampling.newton_restarts'):
            value = self.get(key)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                warning(f"config error: {key} must be an integer >= 1, got {value!r}")
                return False

        seed = self.get('sampling.seed')
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            warning(f"config error: sampling.seed must be a non-negative 64-bit integer, got {seed!r}")
            return False

        newton_tol = self.get('sampling.newton_tol')
        if isinstance(newton_tol, bool) or not isinstance(newton_tol, (int, float)) or newton_tol <= 0:
            warning(f"config error: sampling.newton_tol must be positive, got {newton_tol!r}")
            return False

        threads = self.get('parallel.threads')
        if isinstance(threads, bool) or not isinstance(threads, int) or threads < 0:
            warning(f"config error: parallel.threads must be a non-negative integer, got {threads!r}")
            return False

        return True

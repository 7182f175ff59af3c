"""
单元测试 - 日志、国际化、并行与命令行工具
"""

import io
import json
import pytest
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.i18n.i18n import I18n, available_locales, get_locale, normalize_locale, set_locale, t
from src.utils import logger as logger_module
from src.utils.cli_utils import format_json, handle_exception, print_error, print_success, print_table, to_jsonable
from src.utils.logger import file_only, set_log_file, set_log_level, setup_logger
from src.utils.parallel import THREADS_ENV, derive_rngs, parallel_map, resolve_worker_count


@pytest.fixture
def log_capture(tmp_path):
    """INFO 级别，控制台处理器改写到内存，另开日志文件"""
    console = io.StringIO()
    handler = logger_module.logger.handlers[0]
    original = handler.setStream(console)
    path = tmp_path / 'lab.log'
    set_log_level('INFO')
    set_log_file(str(path))

    def read_log():
        for h in logger_module.logger.handlers:
            h.flush()
        return path.read_text(encoding='utf-8')

    yield console, read_log
    set_log_file(None)
    set_log_level('WARNING')
    handler.setStream(original)


class TestLogger:
    """测试日志模块"""

    def test_setup_logger(self):
        """控制台处理器写到 stderr"""
        logger = setup_logger('isopar_lab_test', level='DEBUG')
        assert logger.level == 10
        assert logger.handlers[0].stream is sys.stderr

    def test_log_file_keeps_level(self, tmp_path):
        """切换日志文件时保留级别"""
        set_log_level('INFO')
        path = tmp_path / 'logs' / 'lab.log'
        set_log_file(str(path))
        logger_module.info('written to file')
        for handler in logger_module.logger.handlers:
            handler.flush()
        assert 'written to file' in path.read_text(encoding='utf-8')
        assert logger_module.logger.level == 20
        set_log_file(None)
        set_log_level('WARNING')

    def test_file_only_skips_console(self, log_capture):
        """file_only 记录只进入日志文件"""
        console, read_log = log_capture
        file_only('INFO', 'only in the file')
        logger_module.info('on both')
        text = read_log()
        assert 'only in the file' not in console.getvalue()
        assert 'on both' in console.getvalue()
        assert 'only in the file' in text and 'on both' in text


class TestI18n:
    """测试国际化模块"""

    def teardown_method(self):
        set_locale('en')

    def test_available(self):
        """随包提供英文与简体中文"""
        assert available_locales() == ['en', 'zh-CN']

    def test_english(self):
        """英文文本与格式化"""
        set_locale('en')
        assert t('report_written', path='out.json') == 'Report written to out.json'

    def test_chinese_alias(self):
        """zh 映射到 zh-CN"""
        set_locale('zh')
        assert get_locale() == 'zh-CN'
        assert t('col_case') == '案例'

    def test_normalize_locale(self):
        """LANG 形式的语言代码"""
        assert normalize_locale('zh_CN.UTF-8') == 'zh-CN'
        assert normalize_locale('C.UTF-8') == 'en'
        assert normalize_locale(None) == 'en'

    def test_missing_key(self):
        """缺失的键原样返回"""
        assert I18n('en').t('no_such_key') == 'no_such_key'

    def test_unknown_locale_falls_back(self):
        """未知语言回退到英文"""
        assert I18n('fr').t('col_case') == 'Case'

    def test_catalogues_share_keys(self):
        """两个语言文件的键相同"""
        directory = project_root / 'src' / 'i18n' / 'translations'
        en = json.loads((directory / 'en.json').read_text(encoding='utf-8'))
        zh = json.loads((directory / 'zh-CN.json').read_text(encoding='utf-8'))
        assert set(en) == set(zh)


class TestParallel:
    """测试并行模块"""

    def test_order_preserved(self):
        """结果顺序与输入一致"""
        assert parallel_map(list(range(20)), lambda x, k: x * k, 4, 3) == [3 * i for i in range(20)]

    def test_empty(self):
        """空输入"""
        assert parallel_map([], lambda x: x, 2) == []

    def test_error_propagates(self):
        """任务异常重新抛出"""
        def fail_on_three(x):
            if x == 3:
                raise ValueError('three')
            return x

        with pytest.raises(ValueError):
            parallel_map(list(range(6)), fail_on_three, 2)

    def test_env_override(self, monkeypatch):
        """ISOPAR_THREADS 优先于配置"""
        monkeypatch.setenv(THREADS_ENV, '3')
        assert resolve_worker_count(8) == 3
        monkeypatch.setenv(THREADS_ENV, 'many')
        assert resolve_worker_count(5) == 5
        monkeypatch.delenv(THREADS_ENV)
        assert resolve_worker_count(0) >= 1

    def test_derived_streams(self):
        """相同种子与盐值得到相同的随机流，不同盐值不同"""
        a = [g.standard_normal() for g in derive_rngs(42, 3, 1, 2)]
        b = [g.standard_normal() for g in derive_rngs(42, 3, 1, 2)]
        c = [g.standard_normal() for g in derive_rngs(42, 3, 1, 3)]
        assert a == b
        assert a != c
        assert len(set(a)) == 3


@dataclass
class _Sample:
    name: str
    values: np.ndarray


class TestCliUtils:
    """测试命令行工具"""

    def test_to_jsonable(self):
        """numpy 类型、dataclass 与元组"""
        data = to_jsonable({
            'ints': np.array([[1, 2], [3, 4]]),
            'floats': np.array([0.5]),
            'scalar': np.float64(1.5),
            'flag': np.bool_(True),
            'pair': (1, 2),
            'sample': _Sample('s', np.arange(3)),
        })
        assert data['ints'] == [[1, 2], [3, 4]]
        assert isinstance(data['ints'][0][0], int)
        assert data['scalar'] == 1.5
        assert data['flag'] is True
        assert data['pair'] == [1, 2]
        assert data['sample'] == {'name': 's', 'values': [0, 1, 2]}

    def test_format_json_stable(self):
        """相同数据得到相同文本"""
        data = {'b': np.array([1.0, 2.0]), 'a': 1}
        assert format_json(data) == format_json(data)
        assert json.loads(format_json(data)) == {'b': [1.0, 2.0], 'a': 1}

    def test_messages_on_stderr(self, capsys):
        """状态信息与表格不进入 stdout"""
        set_locale('en')
        print_success('done')
        print_table(['A', 'B'], [[1, 2]], title='demo')
        captured = capsys.readouterr()
        assert captured.out == ''
        assert 'done' in captured.err

    def test_error_printed_once(self, log_capture, capsys):
        """INFO 级别下错误信息在 stderr 只出现一次"""
        set_locale('en')
        console, read_log = log_capture
        print_error('sampling went wrong')
        err = capsys.readouterr().err + console.getvalue()
        assert err.count('sampling went wrong') == 1
        assert 'ERROR: sampling went wrong' in read_log()

    def test_handle_exception(self, log_capture, capsys):
        """未预期的异常：终端一行信息，堆栈写入日志文件"""
        set_locale('en')
        console, read_log = log_capture
        try:
            raise ValueError('bad shape')
        except ValueError as e:
            handle_exception(e, 'check')
        err = capsys.readouterr().err + console.getvalue()
        text = read_log()
        assert err.count('Exception occurred during check: bad shape') == 1
        assert 'Traceback' not in err
        assert 'Traceback' in text and 'ValueError: bad shape' in text

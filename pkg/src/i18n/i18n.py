"""
国际化（i18n）模块
命令行帮助、状态信息与表头的多语言文本
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

TRANSLATIONS_DIR = Path(__file__).parent / 'translations'
DEFAULT_LOCALE = 'en'

# 与 src.utils.logger 同名的记录器；此处不直接导入以免循环引用
_log = logging.getLogger('isopar_lab')

LOCALE_ALIASES = {
    'zh': 'zh-CN',
    'zh_CN': 'zh-CN',
    'zh_Hans': 'zh-CN',
    'en_US': 'en',
    'en-US': 'en',
    'en_GB': 'en',
    'en-GB': 'en',
    'C': 'en',
    'POSIX': 'en',
}


def available_locales() -> List[str]:
    """
    列出已有的翻译文件
    :return: 语言代码列表，按字母排序
    """
    return sorted(path.stem for path in TRANSLATIONS_DIR.glob('*.json'))


def normalize_locale(locale: Optional[str]) -> str:
    """'zh_CN.UTF-8' 这类环境变量写法映射到翻译文件名，空值为 en"""
    if not locale:
        return DEFAULT_LOCALE
    code = str(locale).split('.')[0]
    return LOCALE_ALIASES.get(code, code)


@lru_cache(maxsize=None)
def _catalogue(locale: str) -> Optional[Dict[str, str]]:
    for name in dict.fromkeys((locale, locale.split('-')[0], locale.split('_')[0])):
        path = TRANSLATIONS_DIR / f'{name}.json'
        if path.exists():
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
    return None


class I18n:
    """
    一个语言环境及其后备语言的翻译表
    """

    def __init__(self, locale=DEFAULT_LOCALE, fallback_locale=DEFAULT_LOCALE):
        """
        :param locale: 当前语言环境
        :param fallback_locale: 后备语言环境
        """
        self.locale = normalize_locale(locale)
        self.fallback_locale = normalize_locale(fallback_locale)
        current = _catalogue(self.locale)
        if current is None:
            _log.warning(f"no translations for {self.locale}, falling back to {self.fallback_locale}")
        self.translations = current or {}
        self.fallback_translations = _catalogue(self.fallback_locale) or {}

    def t(self, key, **kwargs) -> str:
        """
        获取翻译文本
        :param key: 翻译键
        :param kwargs: 用于格式化的参数
        :return: 翻译后的文本，缺失时返回键本身
        """
        text = self.translations.get(key, self.fallback_translations.get(key))
        if text is None:
            _log.warning(f"missing translation key: {key}")
            return key
        if kwargs:
            try:
                return text.format(**kwargs)
            except (KeyError, IndexError):
                _log.warning(f"failed to format translation for key: {key}")
        return text


# 创建全局实例
i18n_instance = I18n()


def t(key, **kwargs):
    """全局翻译函数"""
    return i18n_instance.t(key, **kwargs)


def set_locale(locale):
    """
    设置语言环境
    :param locale: 语言代码或 LANG 形式的字符串
    """
    global i18n_instance
    i18n_instance = I18n(locale=locale)


def get_locale():
    return i18n_instance.locale

"""
案例注册模块
描述内置的 FKM 与齐性案例、各焦子流形上的期望判定，以及一次运行的配置
"""

import zlib
from dataclasses import dataclass, asdict, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from src.core import homogeneous
from src.core.clifford import build_clifford_system, build_extended_system, trace_invariant, CliffordSystem
from src.core.errors import InputError
from src.core.fkm import FkmContext, make_context, operator_list
from src.core.quartic import QuarticForm

EXPECTED_VERDICTS_FILE = Path(__file__).parent / 'expected_verdicts.yaml'
CASE_KINDS = ('fkm', 'so5-real', 'so5-complex')
FOCAL_SETS = ('plus', 'minus')
CHECKS = ('einstein', 'willmore', 'condition-a', 'blocks', 'span', 'spectrum', 'expansion', 'oracle')

# M₊ 上额外使用公共特征向量的重数对及算子族
SPECIAL_FAMILIES = {
    (7, 8): 'fano',
    (8, 7): 'paired',
    (9, 6): 'paired',
    (10, 21): 'm10',
}


def signs_from_text(text: Optional[str], k: int) -> Tuple[int, ...]:
    """
    '+-' 形式的符号串转为元组，None 表示全为 +
    :raises InputError: 长度或字符不合法
    """
    if text is None:
        return tuple([1] * k)
    if len(text) != k or any(c not in '+-' for c in text):
        raise InputError(f"signs must be a string of {k} characters from '+-', got {text!r}")
    return tuple(1 if c == '+' else -1 for c in text)


def signs_to_text(signs) -> str:
    return ''.join('+' if s > 0 else '-' for s in signs)


@dataclass(frozen=True)
class CaseSpec:
    """
    一个案例：FKM (m, k, signs)，扩展系统截取的 (8, 7)，或 so(5) 的两个齐性情形
    """
    kind: str
    m: Optional[int] = None
    k: Optional[int] = None
    signs: Tuple[int, ...] = ()
    extended: bool = False

    def __post_init__(self):
        if self.kind not in CASE_KINDS:
            raise InputError(f"unknown case kind: {self.kind}")
        if self.kind == 'fkm':
            if self.extended:
                object.__setattr__(self, 'm', 8 if self.m is None else self.m)
                object.__setattr__(self, 'k', None)
                object.__setattr__(self, 'signs', ())
            else:
                if self.m is None or self.k is None:
                    raise InputError("fkm cases need both m and k")
                signs = tuple(self.signs) or tuple([1] * self.k)
                if len(signs) != self.k:
                    raise InputError(f"expected {self.k} signs, got {len(signs)}")
                object.__setattr__(self, 'signs', signs)

    @property
    def name(self) -> str:
        if self.kind != 'fkm':
            return self.kind
        if self.extended:
            return f"fkm({self.m},ext)"
        return f"fkm({self.m},{self.k}){signs_to_text(self.signs)}"

    def to_dict(self) -> Dict[str, Any]:
        data = {'kind': self.kind, 'name': self.name}
        if self.kind == 'fkm':
            data.update({'m': self.m, 'k': self.k, 'signs': signs_to_text(self.signs),
                         'extended': self.extended})
        return data


@dataclass(frozen=True, eq=False)
class BuiltCase:
    """构造好的案例：四次型、FKM 上下文与公共特征向量所需的系统"""
    spec: CaseSpec
    form: QuarticForm
    multiplicities: Tuple[int, int]
    expected_key: str
    context: Optional[FkmContext] = None
    operator_system: Optional[CliffordSystem] = None
    special_family: Optional[str] = None
    q: Optional[float] = None
    labels: Dict[str, str] = field(default_factory=dict)

    @property
    def is_fkm(self) -> bool:
        return self.context is not None

    def focal_form(self, focal: str) -> QuarticForm:
        """在所选焦簇上取值为 1 的四次型"""
        return self.form if focal == 'plus' else self.form.negated()

    def tangent_dim(self, focal: str) -> int:
        m1, m2 = self.multiplicities
        n = self.form.ambient_dim
        return n - 2 - (m1 if focal == 'plus' else m2)

    def operator_family(self) -> Optional[List[Tuple[int, ...]]]:
        if self.special_family is None:
            return None
        return operator_list(self.special_family, len(self.operator_system) - 1)


def build_case(spec: CaseSpec) -> BuiltCase:
    """
    构造案例
    :raises InputError: 参数不合法
    """
    if spec.kind == 'fkm':
        if spec.extended:
            extended = build_extended_system(spec.m)
            system, operator_system = extended.base, extended.full
        else:
            system = build_clifford_system(spec.m, spec.k, spec.signs)
            operator_system = system
        context = make_context(system)
        multiplicities = (context.m1, context.m2)
        q = trace_invariant(system).q if system.m == 4 else None
        key = f"fkm({multiplicities[0]},{multiplicities[1]})"
        if q is not None:
            key += f"q{int(round(abs(q)))}"
        family = SPECIAL_FAMILIES.get(multiplicities)
        return BuiltCase(spec, context.form, multiplicities, key, context,
                         operator_system if family else None, family, q)

    case = 'real' if spec.kind == 'so5-real' else 'complex'
    form = homogeneous.polynomial(case)
    multiplicities = (form.m1, form.m2)
    return BuiltCase(spec, form, multiplicities, f"{spec.kind}({form.m1},{form.m2})",
                     labels=homogeneous.focal_labels(case))


def builtin_cases() -> List[CaseSpec]:
    """重现判定表所用的案例列表"""
    return [
        CaseSpec('fkm', 1, 3),
        CaseSpec('fkm', 2, 2),
        CaseSpec('fkm', 4, 2, (1, 1)),
        CaseSpec('fkm', 4, 2, (1, -1)),
        CaseSpec('fkm', 5, 1),
        CaseSpec('fkm', 6, 1),
        CaseSpec('fkm', 7, 2),
        CaseSpec('fkm', 8, extended=True),
        CaseSpec('fkm', 9, 1),
        CaseSpec('fkm', 10, 1),
        CaseSpec('so5-real'),
        CaseSpec('so5-complex'),
    ]


@lru_cache(maxsize=None)
def _load_expected(path: str) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return yaml.safe_load(f) or {}


def expected_verdict(built: BuiltCase, focal: str, check: str,
                     path: Path = EXPECTED_VERDICTS_FILE) -> Optional[str]:
    """
    期望判定：依次查 defaults、families、cases，后者覆盖前者
    :return: 判定字符串，没有记录时为 None
    """
    table = _load_expected(str(path))
    key = check.replace('-', '_')
    family = 'fkm' if built.is_fkm else None
    layers = [
        table.get('defaults', {}),
        table.get('families', {}).get(family, {}) if family else {},
        table.get('cases', {}).get(built.expected_key, {}),
    ]
    verdict = None
    for layer in layers:
        entry = (layer or {}).get(focal, {}) or {}
        if key in entry:
            verdict = str(entry[key])
    return verdict


def case_salt(spec: CaseSpec, focal: str, purpose: str = '') -> Tuple[int, int]:
    """由案例名与焦簇得到稳定的随机数盐值"""
    return zlib.crc32(spec.name.encode('utf-8')), zlib.crc32(f"{focal}:{purpose}".encode('utf-8'))


@dataclass
class RunConfig:
    """一次运行的配置；相同配置产生逐字节相同的报告"""
    command: str
    case: Optional[CaseSpec] = None
    focal: Optional[str] = None
    check: Optional[str] = None
    seed: int = 42
    samples: int = 20
    tol: float = 1e-8
    output: Optional[str] = None

    def __post_init__(self):
        if self.focal is not None and self.focal not in FOCAL_SETS:
            raise InputError(f"focal set must be one of {FOCAL_SETS}, got {self.focal}")
        if self.check is not None and self.check not in CHECKS:
            raise InputError(f"unknown check: {self.check}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InputError(f"seed must be a non-negative 64-bit integer, got {self.seed}")
        if self.samples < 1:
            raise InputError("samples must be at least 1")
        if not self.tol > 0:
            raise InputError("tol must be positive")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['case'] = self.case.to_dict() if self.case else None
        # 输出路径不影响报告内容
        data.pop('output')
        return data


def focal_from_text(text: str) -> str:
    aliases = {'+': 'plus', 'plus': 'plus', '-': 'minus', 'minus': 'minus'}
    if text not in aliases:
        raise InputError(f"focal selector must be '+' or '-', got {text!r}")
    return aliases[text]

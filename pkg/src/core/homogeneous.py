"""
齐性情形模块
so(5,ℝ) ≅ ℝ¹⁰ 与 so(5,ℂ) ≅ ℝ²⁰ 上伴随轨道给出的 Cartan-Münzner 四次型，
重数分别为 (2, 2) 与 (4, 5)；参考点、轨道采样与第二基本形式的显式核对
"""

from dataclasses import dataclass, field, asdict
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import lstsq

from src.core.curvature import ShapeOperatorSet
from src.core.errors import InputError
from src.core.quartic import QuarticForm, FocalFrame, focal_frame, second_fundamental_form
from src.utils.logger import debug, info

CASES = ('real', 'complex')
PAIRS = tuple(combinations(range(5), 2))
P_FORM_TOL = 1e-7
SQRT_HALF = np.sqrt(0.5)


def _normalize_case(case: str) -> str:
    aliases = {'real': 'real', 'so5-real': 'real', 'complex': 'complex', 'so5-complex': 'complex'}
    if case not in aliases:
        raise InputError(f"unknown homogeneous case: {case}")
    return aliases[case]


def _normalize_focal(which: str) -> str:
    aliases = {'+': 'plus', 'plus': 'plus', 'M+': 'plus', '-': 'minus', 'minus': 'minus', 'M-': 'minus'}
    if which not in aliases:
        raise InputError(f"focal selector must be '+' or '-', got {which}")
    return aliases[which]


def _skew_basis() -> np.ndarray:
    basis = np.zeros((len(PAIRS), 5, 5))
    for p, (i, j) in enumerate(PAIRS):
        basis[p, i, j] = 1.0
        basis[p, j, i] = -1.0
    return basis


SKEW_BASIS = _skew_basis()


@dataclass(frozen=True)
class SkewCoordinates:
    """
    平坦坐标与 5 阶斜对称矩阵之间的对应
    real: a_ij (i<j) ↔ ℝ¹⁰；complex: (x_ij, y_ij) ↔ ℝ²⁰，a_ij = x_ij + √-1 y_ij
    平坦范数平方等于 (1/2)·Trace(Zᵀ Z̄)
    """
    case: str

    def __post_init__(self):
        object.__setattr__(self, 'case', _normalize_case(self.case))

    @property
    def dim(self) -> int:
        return 10 if self.case == 'real' else 20

    def index(self, name: str) -> int:
        """
        坐标名到平坦下标，例如 'a13'、'x35'、'y12'（下标从 1 开始）
        """
        part, digits = name[0], name[1:]
        if len(digits) != 2 or not digits.isdigit():
            raise InputError(f"bad coordinate name: {name}")
        pair = (int(digits[0]) - 1, int(digits[1]) - 1)
        if pair not in PAIRS:
            raise InputError(f"coordinate {name} is not an upper-triangular entry")
        offset = PAIRS.index(pair)
        if self.case == 'real' and part == 'a':
            return offset
        if self.case == 'complex' and part in 'xy':
            return offset + (10 if part == 'y' else 0)
        raise InputError(f"coordinate {name} does not belong to the {self.case} case")

    def name(self, index: int) -> str:
        """平坦下标到坐标名，index 的逆"""
        if not 0 <= index < self.dim:
            raise InputError(f"coordinate index {index} out of range")
        prefix = 'a' if self.case == 'real' else ('x' if index < 10 else 'y')
        i, j = PAIRS[index % 10]
        return f"{prefix}{i + 1}{j + 1}"

    def vector(self, terms: Dict[str, float]) -> np.ndarray:
        v = np.zeros(self.dim)
        for name, value in terms.items():
            v[self.index(name)] += value
        return v

    def to_matrix(self, flat) -> np.ndarray:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.dim,):
            raise InputError(f"flat vector must have {self.dim} components, got {flat.shape}")
        if self.case == 'real':
            return np.einsum('p,pij->ij', flat, SKEW_BASIS)
        return np.einsum('p,pij->ij', flat[:10] + 1j * flat[10:], SKEW_BASIS)

    def from_matrix(self, matrix) -> np.ndarray:
        matrix = np.asarray(matrix)
        if matrix.shape != (5, 5):
            raise InputError("expected a 5x5 matrix")
        upper = np.array([matrix[i, j] for i, j in PAIRS])
        if self.case == 'real':
            return np.real(upper).astype(float)
        return np.concatenate([np.real(upper), np.imag(upper)])


@dataclass
class PFormReport:
    case: str
    which: str
    span_residual: Optional[float]
    orthogonality_residual: Optional[float]
    closed_form_residual: float
    tol: float
    passed: bool
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _square_entry_quartic(parts, label: str, m1: int, m2: int) -> QuarticForm:
    """
    3|v|⁴ - 2Σ (二次型)²，parts 中每个 products[a, b, r, s] 给出二次型 v ↦ Σ v_a v_b products[a, b, r, s]
    """
    dim = parts[0].shape[0]
    quadratics = [np.eye(dim)]
    for products in parts:
        for r in range(5):
            for s in range(5):
                entry = products[:, :, r, s]
                quadratics.append(0.5 * (entry + entry.T))
    coefficients = [3.0] + [-2.0] * (len(quadratics) - 1)
    return QuarticForm(np.array(quadratics), np.array(coefficients), m1=m1, m2=m2, label=label)


def so5_real_polynomial() -> QuarticForm:
    """
    F(Z) = ¾(Trace Z²)² - 2Trace(Z⁴) = 3|a|⁴ - 2Σ_rs ((Z²)_rs)²
    """
    products = np.einsum('aij,bjk->abik', SKEW_BASIS, SKEW_BASIS)
    return _square_entry_quartic([products], 'so(5,R)', 2, 2)


def so5_complex_polynomial() -> QuarticForm:
    """
    F(Z) = ¾(Trace ZZ̄)² - 2Trace((ZZ̄)²)，W = ZZ̄ 为 Hermite 矩阵，
    F = 3|v|⁴ - 2Σ_rs [(Re W_rs)² + (Im W_rs)²]
    """
    complex_basis = np.concatenate([SKEW_BASIS, 1j * SKEW_BASIS])
    products = np.einsum('aij,bjk->abik', complex_basis, np.conj(complex_basis))
    return _square_entry_quartic([np.real(products), np.imag(products)], 'so(5,C)', 4, 5)


def polynomial(case: str) -> QuarticForm:
    return so5_real_polynomial() if _normalize_case(case) == 'real' else so5_complex_polynomial()


def focal_form(case: str, which: str) -> QuarticForm:
    """在所选焦簇上取值为 1 的四次型：M₊ 用 F，M₋ 用 -F"""
    form = polynomial(case)
    return form if _normalize_focal(which) == 'plus' else form.negated()


def trace_form(case: str, z) -> float:
    """迹形式的直接计算，z 为 5x5 矩阵"""
    z = np.asarray(z)
    if _normalize_case(case) == 'real':
        z2 = z @ z
        return float(0.75 * np.trace(z2) ** 2 - 2.0 * np.trace(z2 @ z2))
    w = z @ np.conj(z)
    return float(np.real(0.75 * np.trace(w) ** 2 - 2.0 * np.trace(w @ w)))


def row_vector_form(case: str, z) -> float:
    """
    行向量形式：-5/4Σ|Z_i|⁴ + 3/2Σ_{i<j}|Z_i|²|Z_j|² - 4Σ_{i<j}|⟨Z_i, Z_j⟩|²
    复情形使用 Hermite 内积
    """
    _normalize_case(case)
    rows = np.asarray(z)
    gram = rows @ np.conj(rows).T
    norms = np.real(np.diag(gram))
    value = -1.25 * float(np.sum(norms ** 2))
    for i, j in combinations(range(rows.shape[0]), 2):
        value += 1.5 * norms[i] * norms[j] - 4.0 * abs(gram[i, j]) ** 2
    return float(value)


def reference_point(case: str, which: str) -> np.ndarray:
    """
    参考点：实情形 M₋ 取 a12 = 1，M₊ 取 a12 = a34 = 1/√2；
    复情形 M₊ 取 x12 = x34 = 1/√2，M₋ 取 x12 = 1
    """
    case, which = _normalize_case(case), _normalize_focal(which)
    coords = SkewCoordinates(case)
    prefix = 'a' if case == 'real' else 'x'
    single = {f'{prefix}12': 1.0}
    double = {f'{prefix}12': SQRT_HALF, f'{prefix}34': SQRT_HALF}
    if case == 'real':
        return coords.vector(single if which == 'minus' else double)
    return coords.vector(double if which == 'plus' else single)


def random_special_orthogonal(n: int, rng) -> np.ndarray:
    """Gauss 矩阵 QR 分解并修正符号，得到 SO(n) 上的 Haar 样本"""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_unitary(n: int, rng) -> np.ndarray:
    """复 Gauss 矩阵 QR 分解并修正相位，得到 U(n) 上的 Haar 样本"""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def adjoint_orbit_sample(case: str, base_point, rng) -> np.ndarray:
    """
    实情形 g·Z = gZg⁻¹，g ∈ SO(5)；复情形 g·Z = ḡZg⁻¹，g ∈ U(5)
    """
    case = _normalize_case(case)
    coords = SkewCoordinates(case)
    z = coords.to_matrix(base_point)
    if case == 'real':
        g = random_special_orthogonal(5, rng)
        moved = g @ z @ g.T
    else:
        g = random_unitary(5, rng)
        moved = np.conj(g) @ z @ np.conj(g).T
    return coords.from_matrix(moved)


def focal_labels(case: str) -> Dict[str, str]:
    """焦子流形的微分同胚类型，仅作报告标签"""
    if _normalize_case(case) == 'real':
        return {'minus': 'G~2(R^5)', 'plus': 'CP^3'}
    return {'plus': 'U(5)/(Sp(2)xU(1))', 'minus': 'U(5)/(SU(2)xU(3))'}


def _real_chart(which: str) -> Tuple[List[Dict[str, float]], List[Dict[str, float]]]:
    if which == 'minus':
        tangent = [{name: 1.0} for name in ('a13', 'a14', 'a15', 'a23', 'a24', 'a25')]
        normal = [{name: 1.0} for name in ('a34', 'a35', 'a45')]
        return tangent, normal
    tangent = [
        {'a35': 1.0}, {'a45': 1.0}, {'a15': 1.0}, {'a25': 1.0},
        {'a14': SQRT_HALF, 'a23': SQRT_HALF},
        {'a24': SQRT_HALF, 'a13': -SQRT_HALF},
    ]
    normal = [
        {'a12': SQRT_HALF, 'a34': -SQRT_HALF},
        {'a23': SQRT_HALF, 'a14': -SQRT_HALF},
        {'a13': SQRT_HALF, 'a24': SQRT_HALF},
    ]
    return tangent, normal


def reference_frame(case: str, which: str, tol: float = 1e-8) -> FocalFrame:
    """
    参考点处的焦标架；实情形的切/法基旋转到显式坐标图
    """
    case, which = _normalize_case(case), _normalize_focal(which)
    form = focal_form(case, which)
    frame = focal_frame(form, reference_point(case, which), tol)
    if case == 'complex':
        return frame
    coords = SkewCoordinates(case)
    tangent_terms, normal_terms = _real_chart(which)
    tangent = np.column_stack([coords.vector(t) for t in tangent_terms])
    normal = np.column_stack([coords.vector(t) for t in normal_terms])
    return frame.with_bases(tangent, normal, tol)


def _quadratic_matrix(size: int, terms) -> np.ndarray:
    """terms 为 (i, j, c) 列表，表示二次型中的 c·y_i·y_j"""
    matrix = np.zeros((size, size))
    for i, j, c in terms:
        if i == j:
            matrix[i, i] += c
        else:
            matrix[i, j] += 0.5 * c
            matrix[j, i] += 0.5 * c
    return matrix


def _published_p_forms(which: str) -> np.ndarray:
    if which == 'minus':
        # 切坐标顺序 a13, a14, a15, a23, a24, a25；法向 a34, a35, a45
        position = {'13': 0, '14': 1, '15': 2, '23': 3, '24': 4, '25': 5}
        forms = []
        for r, s in (('3', '4'), ('3', '5'), ('4', '5')):
            forms.append(_quadratic_matrix(6, [
                (position['2' + s], position['1' + r], 2.0),
                (position['2' + r], position['1' + s], -2.0),
            ]))
        return np.array(forms)
    # 切坐标顺序 x1, x2, y1, y2, z1, z2
    return np.array([
        _quadratic_matrix(6, [(0, 0, 1.0), (1, 1, 1.0), (2, 2, -1.0), (3, 3, -1.0)]),
        _quadratic_matrix(6, [(0, 2, 2.0), (1, 3, 2.0)]),
        _quadratic_matrix(6, [(1, 2, 2.0), (0, 3, -2.0)]),
    ])


def _restricted_square_sum(shapes: ShapeOperatorSet, frame: FocalFrame, coords: SkewCoordinates,
                           directions: List[Dict[str, float]], tol: float) -> np.ndarray:
    ambient = np.column_stack([coords.vector(d) for d in directions])
    local = frame.tangent_basis.T @ ambient
    if np.max(np.abs(frame.tangent_basis @ local - ambient)) > tol:
        raise InputError("closed-form directions are not tangent at the reference point")
    return local.T @ shapes.square_sum() @ local


def verify_published_p_forms(case: str, which: str, tol: float = P_FORM_TOL) -> PFormReport:
    """
    在参考点提取 S_i，与显式给出的二次型比较：
    实情形求解法基的正交变换后比较 p_i 张成的空间，并核对 Σ S_i² 的闭式；
    复情形只核对 Σ S_i² 在指定方向上的闭式
    """
    case, which = _normalize_case(case), _normalize_focal(which)
    coords = SkewCoordinates(case)
    frame = reference_frame(case, which)
    shapes = second_fundamental_form(focal_form(case, which), frame)
    notes = []
    span_residual = None
    orthogonality_residual = None

    if case == 'real':
        published = _published_p_forms(which)
        target = published.reshape(len(published), -1)
        extracted = shapes.operators.reshape(shapes.count, -1)
        rotation = lstsq(target.T, extracted.T)[0].T
        span_residual = float(np.max(np.abs(rotation @ target - extracted)))
        orthogonality_residual = float(np.max(np.abs(rotation.T @ rotation - np.eye(len(rotation)))))
        expected = 2.0 * np.eye(6) if which == 'minus' else np.diag([3.0, 3.0, 3.0, 3.0, 0.0, 0.0])
        closed_form = float(np.max(np.abs(shapes.square_sum() - expected)))
    elif which == 'plus':
        directions = [{'x35': 1.0}, {'y35': 1.0}, {'x45': 1.0}, {'y45': 1.0}, {'y34': 1.0}]
        restricted = _restricted_square_sum(shapes, frame, coords, directions, tol)
        closed_form = float(np.max(np.abs(restricted - np.diag([5.0, 5.0, 5.0, 5.0, 3.0]))))
        notes.append('closed form checked on x35, y35, x45, y45, y34')
    else:
        restricted = _restricted_square_sum(shapes, frame, coords, [{'y12': 1.0}], tol)
        closed_form = float(abs(restricted[0, 0]))
        top = float(np.max(np.linalg.eigvalsh(shapes.square_sum())))
        notes.append(f'kernel direction y12; largest eigenvalue of the square sum is {top:.6f}')
        if top <= tol:
            closed_form = max(closed_form, 1.0)
            notes.append('no direction with a positive value found')

    residuals = [closed_form] + [r for r in (span_residual, orthogonality_residual) if r is not None]
    passed = max(residuals) < tol
    info(f"p-form check {case} {which}: passed={passed}")
    debug(f"p-form residuals span={span_residual}, orth={orthogonality_residual}, closed={closed_form}")
    return PFormReport(case, which, span_residual, orthogonality_residual, closed_form, tol, passed, notes)

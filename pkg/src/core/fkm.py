"""
FKM 模块
由 Clifford 系统构造 FKM 四次型，采样焦子流形 M±，
并提供依赖 Clifford 结构的形状算子、Ricci 公式、张成维数与公共特征向量构造
"""

from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import lstsq, null_space, orth, svdvals

from src.core.clifford import (
    CliffordSystem, build_clifford_system, clifford_product, clifford_sphere_element,
    is_symmetric_involution,
)
from src.core.curvature import ShapeOperatorSet
from src.core.errors import InputError, FocalVarietyError, InvalidNormalError, SamplingError
from src.core.quartic import QuarticForm
from src.utils.logger import debug, info, warning

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
NEWTON_RESTARTS = 5
RANK_REL_TOL = 1e-8
MEMBERSHIP_TOL = 1e-9
COLLAPSE_RATIO = 1e-8
COMMUTATION_TOL = 1e-10

# M₊ 经张成维数判据后仍可能为 Einstein 的重数对
POSSIBLY_EINSTEIN_PAIRS = ((4, 3), (5, 2), (6, 1), (7, 8), (8, 7), (9, 6), (10, 21))

FANO_LINES = ((1, 2, 3), (1, 4, 5), (1, 6, 7), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 5, 6))
M10_OPERATORS = ((0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 8, 9), (2, 3, 8, 9), (0, 2, 8, 10))


@dataclass(frozen=True, eq=False)
class FkmContext:
    system: CliffordSystem
    form: QuarticForm

    @property
    def m1(self) -> int:
        return self.system.m

    @property
    def m2(self) -> int:
        return self.system.l - self.system.m - 1

    @property
    def ambient_dim(self) -> int:
        return self.system.ambient_dim

    @property
    def dim_m_plus(self) -> int:
        return 2 * self.system.l - self.system.m - 2

    @property
    def dim_m_minus(self) -> int:
        return self.system.l + self.system.m - 1


@dataclass
class MinusSample:
    """M₋ 上的点 y 以及满足 Py = y 的 Clifford 球面元素"""
    point: np.ndarray
    sphere_element: np.ndarray
    coeffs: np.ndarray


@dataclass
class MinusEigenspaces:
    kernel: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.kernel.shape[1], self.plus.shape[1], self.minus.shape[1]


@dataclass
class SpanCriterion:
    span_dimension: int
    dim_m_plus: int

    @property
    def deficient(self) -> bool:
        return self.span_dimension < self.dim_m_plus

    def to_dict(self):
        return {'span_dimension': self.span_dimension, 'dim_m_plus': self.dim_m_plus,
                'deficient': self.deficient}


def fkm_polynomial(system: CliffordSystem) -> QuarticForm:
    """
    F(x) = |x|⁴ - 2Σ⟨P_i x, x⟩²
    """
    quadratics = np.concatenate([np.eye(system.ambient_dim)[None], system.matrices])
    coefficients = np.array([1.0] + [-2.0] * len(system))
    return QuarticForm(quadratics, coefficients, m1=system.m, m2=system.l - system.m - 1,
                       label=f"FKM(m={system.m}, l={system.l})")


def make_context(system: CliffordSystem) -> FkmContext:
    return FkmContext(system, fkm_polynomial(system))


def fkm_context(m: int, k: int, signs: Optional[Sequence[int]] = None) -> FkmContext:
    """构造 Clifford 系统与对应的 FKM 四次型"""
    return make_context(build_clifford_system(m, k, signs))


def constraint_values(system: CliffordSystem, x) -> np.ndarray:
    """(⟨P_0x, x⟩, ..., ⟨P_mx, x⟩)"""
    x = np.asarray(x, dtype=float)
    return np.einsum('i,kij,j->k', x, system.matrices, x)


def sphere_coefficients(system: CliffordSystem, sphere_element) -> np.ndarray:
    """由 P = Σc_i P_i 反解 c_i = Trace(P P_i) / 2l"""
    p = np.asarray(sphere_element, dtype=float)
    return np.einsum('ij,kji->k', p, system.matrices) / system.ambient_dim


def sample_m_minus(context: FkmContext, rng) -> MinusSample:
    """
    随机单位系数给出 Clifford 球面元素 P，再取 E₊(P) 中的随机单位向量
    """
    coeffs = rng.standard_normal(len(context.system))
    coeffs /= np.linalg.norm(coeffs)
    p = clifford_sphere_element(context.system, coeffs)
    while True:
        y = rng.standard_normal(context.ambient_dim)
        y = y + p @ y
        norm = np.linalg.norm(y)
        if norm > 1e-6:
            break
    return MinusSample(y / norm, p, coeffs)


def _newton_project(system: CliffordSystem, x: np.ndarray, tol: float, max_iter: int) -> Optional[np.ndarray]:
    for iteration in range(max_iter):
        px = system.matrices @ x
        residual = np.append(px @ x, x @ x - 1.0)
        if np.max(np.abs(residual)) < tol:
            debug(f"Newton projection converged after {iteration} steps")
            return x / np.linalg.norm(x)
        jacobian = 2.0 * np.vstack([px, x[None, :]])
        step = lstsq(jacobian, residual)[0]
        x = x - step
    return None


def sample_m_plus(context: FkmContext, rng, tol: float = NEWTON_TOL,
                  max_iter: int = NEWTON_MAX_ITER, restarts: int = NEWTON_RESTARTS) -> np.ndarray:
    """
    从随机单位向量出发，用最小范数 Newton 步投影到 {⟨P_ix, x⟩ = 0, |x| = 1}
    :raises SamplingError: 所有重启都未收敛
    """
    system = context.system
    for attempt in range(restarts):
        start = rng.standard_normal(context.ambient_dim)
        x = _newton_project(system, start / np.linalg.norm(start), tol, max_iter)
        if x is not None and np.max(np.abs(constraint_values(system, x))) < tol:
            return x
        warning(f"Newton projection onto M+ did not converge (attempt {attempt + 1}/{restarts})")
    raise SamplingError(f"Newton projection failed after {restarts} restarts "
                        f"for m={system.m}, l={system.l}")


def normal_basis_m_plus(context: FkmContext, x, tol: float = 1e-8) -> np.ndarray:
    """
    M₊ 的法空间 {P_0x, ..., P_mx}，按列返回
    :raises FocalVarietyError: 向量组不正交或不垂直于 x
    """
    x = np.asarray(x, dtype=float)
    normals = (context.system.matrices @ x).T
    gram = normals.T @ normals
    residual = max(float(np.max(np.abs(gram - np.eye(gram.shape[0])))),
                   float(np.max(np.abs(normals.T @ x))))
    if residual > tol:
        raise FocalVarietyError(f"point off M+: normal Gram residual {residual:.3e}")
    return normals


def tangent_basis_m_plus(context: FkmContext, x) -> np.ndarray:
    """x 与 P_ix 的正交补"""
    x = np.asarray(x, dtype=float)
    normals = normal_basis_m_plus(context, x)
    return null_space(np.column_stack([x, normals]).T)


def normal_basis_m_minus(context: FkmContext, y, sphere_element) -> np.ndarray:
    """
    M₋ 在 y 处的法空间 E₋(P) ⊖ span{Q y : Q ∈ Σ_P}
    """
    y = np.asarray(y, dtype=float)
    _, q_matrices = _perpendicular_sphere(context.system, sphere_element)
    eigenvalues, vectors = np.linalg.eigh(sphere_element)
    minus_space = vectors[:, eigenvalues < 0]
    qy = np.column_stack([q @ y for q in q_matrices])
    return minus_space @ null_space(qy.T @ minus_space)


def shape_operators_direct(context: FkmContext, x, tangent_basis) -> ShapeOperatorSet:
    """
    (S_i)_jk = -⟨P_i e_j, e_k⟩，对应法向场 n_i(x) = P_i x
    """
    tangent = np.asarray(tangent_basis, dtype=float)
    operators = -np.einsum('ja,ijk,kb->iab', tangent, context.system.matrices, tangent)
    return ShapeOperatorSet(operators, [f"P{i}x" for i in range(len(context.system))])


def compare_shape_operators(poly_set: ShapeOperatorSet, direct_set: ShapeOperatorSet) -> Tuple[int, float]:
    """
    两种形状算子之间的整体符号对齐
    :return: (符号, 对齐后逐元素最大差)
    """
    if poly_set.operators.shape != direct_set.operators.shape:
        raise InputError("shape operator sets have different shapes")
    overlap = float(np.sum(poly_set.operators * direct_set.operators))
    sign = 1 if overlap >= 0 else -1
    return sign, float(np.max(np.abs(poly_set.operators - sign * direct_set.operators)))


def pipj_vectors(context: FkmContext, x, system: Optional[CliffordSystem] = None) -> np.ndarray:
    """列为 P_iP_jx (i < j)，按字典序排列"""
    system = context.system if system is None else system
    x = np.asarray(x, dtype=float)
    px = system.matrices @ x
    columns = [system.matrices[i] @ px[j] for i, j in combinations(range(len(system)), 2)]
    return np.column_stack(columns)


def pipj_gram(context: FkmContext, x) -> np.ndarray:
    vectors = pipj_vectors(context, x)
    return vectors.T @ vectors


def ricci_via_pipj(context: FkmContext, x, tangent_vector, tol: float = 1e-8) -> float:
    """
    Ric(X) = 2(l - m - 2) + 2Σ_{i<j}⟨X, P_iP_jx⟩²，X 为 x 处的单位切向量
    :raises InputError: X 不是单位切向量
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(tangent_vector, dtype=float)
    normals = normal_basis_m_plus(context, x)
    off = max(abs(float(v @ x)), float(np.max(np.abs(normals.T @ v))), abs(np.linalg.norm(v) - 1.0))
    if off > tol:
        raise InputError(f"vector is not a unit tangent vector at x (deviation {off:.3e})")
    projections = pipj_vectors(context, x).T @ v
    return float(2 * (context.system.l - context.system.m - 2) + 2 * np.sum(projections ** 2))


def span_dimension(context: FkmContext, x, rel_tol: float = RANK_REL_TOL) -> int:
    """span{P_iP_jx} 的数值秩"""
    singular = svdvals(pipj_vectors(context, x))
    return int(np.sum(singular > rel_tol * singular[0]))


def span_criterion(context: FkmContext, x, rel_tol: float = RANK_REL_TOL) -> SpanCriterion:
    """张成维数小于 dim M₊ 时 M₊ 在该点非 Einstein"""
    return SpanCriterion(span_dimension(context, x, rel_tol), context.dim_m_plus)


def operator_list(name: str, m: int = 9) -> List[Tuple[int, ...]]:
    """
    四重积算子族
    paired: P_{2i}P_{2i+1}P_{2j}P_{2j+1}
    m10: (10, 21) 情形的五个算子
    fano: P_0P_aP_bP_c，{a, b, c} 取遍 Fano 平面的直线
    """
    if name == 'paired':
        pairs = (m + 1) // 2
        return [(2 * i, 2 * i + 1, 2 * j, 2 * j + 1) for i, j in combinations(range(pairs), 2)]
    if name == 'm10':
        return list(M10_OPERATORS)
    if name == 'fano':
        return [(0, a, b, c) for a, b, c in FANO_LINES]
    raise InputError(f"unknown operator family: {name}")


def _gray_patterns(count: int):
    for i in range(2 ** count):
        g = i ^ (i >> 1)
        yield tuple(-1 if (g >> j) & 1 else 1 for j in range(count))


def common_eigenvector(context: FkmContext, operators: Sequence[Sequence[int]],
                       signs: Optional[Sequence[int]] = None, rng=None,
                       system: Optional[CliffordSystem] = None) -> np.ndarray:
    """
    依次投影到各交换算子的 ±1 特征空间，得到 M₊ 上的公共特征向量
    默认符号全为 +1，塌缩时按 Gray 码顺序尝试其余符号组合
    :param system: 提供算子的系统，默认为 context.system；(8, 7) 情形传入扩展系统
    :raises InputError: 算子不是对称对合或两两不交换
    :raises SamplingError: 所有符号组合都塌缩
    :raises FocalVarietyError: 结果不在 M₊ 上
    """
    system = context.system if system is None else system
    rng = np.random.default_rng() if rng is None else rng
    operators = [tuple(o) for o in operators]
    for indices in operators:
        if not is_symmetric_involution(indices):
            raise InputError(f"product {indices} is not a symmetric involution")
    matrices = [clifford_product(system, indices) for indices in operators]
    for a, b in combinations(range(len(matrices)), 2):
        residual = float(np.max(np.abs(matrices[a] @ matrices[b] - matrices[b] @ matrices[a])))
        if residual > COMMUTATION_TOL:
            raise InputError(f"operators {operators[a]} and {operators[b]} do not commute")

    if signs is not None and len(signs) != len(matrices):
        raise InputError(f"expected {len(matrices)} signs, got {len(signs)}")

    start = rng.standard_normal(system.ambient_dim)
    patterns = [tuple(signs)] if signs is not None else []
    patterns.extend(p for p in _gray_patterns(len(matrices)) if p not in patterns)
    for pattern in patterns:
        v = start.copy()
        for matrix, s in zip(matrices, pattern):
            v = 0.5 * (v + s * (matrix @ v))
        ratio = np.linalg.norm(v) / np.linalg.norm(start)
        if ratio < COLLAPSE_RATIO:
            debug(f"sign pattern {pattern} collapsed")
            continue
        x = v / np.linalg.norm(v)
        off = float(np.max(np.abs(constraint_values(context.system, x))))
        if off > MEMBERSHIP_TOL:
            raise FocalVarietyError(f"common eigenvector is off M+ (max |<P_i x, x>| = {off:.3e})")
        info(f"common eigenvector found with signs {pattern}")
        return x
    raise SamplingError("every sign pattern collapsed the projection")


def eigenvector_identities(context: FkmContext, x, pairs, system: Optional[CliffordSystem] = None) -> dict:
    """
    检查 P_iP_jx = ±P_kP_hx，返回每对的残差 min(|a - b|, |a + b|)
    """
    system = context.system if system is None else system
    residuals = []
    for (i, j), (k, h) in pairs:
        a = clifford_product(system, (i, j)) @ x
        b = clifford_product(system, (k, h)) @ x
        residuals.append(float(min(np.linalg.norm(a - b), np.linalg.norm(a + b))))
    return {'residuals': residuals, 'max_residual': max(residuals, default=0.0)}


def _perpendicular_sphere(system: CliffordSystem, sphere_element) -> Tuple[np.ndarray, List[np.ndarray]]:
    """c 与 c^⊥ 的正交系数基对应的矩阵 Q_a"""
    coeffs = sphere_coefficients(system, sphere_element)
    basis = null_space(coeffs[None, :])
    return coeffs, [np.einsum('i,ijk->jk', b, system.matrices) for b in basis.T]


def m_minus_eigenspaces(context: FkmContext, y, sphere_element, normal, tol: float = 1e-8) -> MinusEigenspaces:
    """
    M₋ 上 S_N 的特征空间：
    E₊ = span Q_a(y + N)，E₋ = span Q_a(y - N)，
    Ker = {v ∈ E₊(P) : v ⊥ y, v ⊥ Q_aN}
    :raises InvalidNormalError: N 不是单位法向，或维数不为 (l-m-1, m, m)
    """
    y = np.asarray(y, dtype=float)
    p = np.asarray(sphere_element, dtype=float)
    n = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > tol or np.linalg.norm(p @ n + n) > tol or abs(float(n @ y)) > tol:
        raise InvalidNormalError("N must be a unit vector in E-(P) orthogonal to y")
    _, q_matrices = _perpendicular_sphere(context.system, p)
    if any(abs(float((q @ y) @ n)) > tol for q in q_matrices):
        raise InvalidNormalError("N is not orthogonal to the Clifford directions Q y")

    plus = orth(np.column_stack([q @ (y + n) for q in q_matrices]))
    minus = orth(np.column_stack([q @ (y - n) for q in q_matrices]))
    eigenvalues, vectors = np.linalg.eigh(p)
    positive = vectors[:, eigenvalues > 0]
    constraints = np.column_stack([y] + [q @ n for q in q_matrices])
    kernel = positive @ null_space(constraints.T @ positive)

    spaces = MinusEigenspaces(kernel, plus, minus)
    expected = (context.m2, context.m1, context.m1)
    if spaces.dims != expected:
        raise InvalidNormalError(f"eigenspace dimensions {spaces.dims} differ from {expected}")
    return spaces

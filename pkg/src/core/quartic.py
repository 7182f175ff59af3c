"""
四次型模块
Cartan-Münzner 四次多项式的精确求值与极化，以及从任意此类四次型中
提取焦子流形标架、第二与第三基本形式的通用方法
"""

from dataclasses import dataclass, field, asdict
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from src.core.curvature import ShapeOperatorSet
from src.core.errors import InputError, FocalVarietyError
from src.utils.logger import debug, info

DEFAULT_TOL = 1e-8
CLUSTER_TOL = 0.5
TANGENT_EIGENVALUE = 2.0
NORMAL_EIGENVALUE = -6.0


@dataclass(frozen=True, eq=False)
class QuarticForm:
    """
    形如 F(x) = Σ_k c_k (xᵀ B_k x)² 的四次型
    B_k 为对称矩阵，极化四线性型 T 有显式公式
    """
    quadratics: np.ndarray
    coefficients: np.ndarray
    m1: Optional[int] = None
    m2: Optional[int] = None
    label: str = ''
    orientation: int = 1

    def __post_init__(self):
        quadratics = np.asarray(self.quadratics, dtype=float)
        coefficients = np.asarray(self.coefficients, dtype=float)
        if quadratics.ndim != 3 or quadratics.shape[1] != quadratics.shape[2]:
            raise InputError(f"quadratics must have shape (K, N, N), got {quadratics.shape}")
        if coefficients.shape != (quadratics.shape[0],):
            raise InputError("one coefficient per quadratic form is required")
        # 只保留对称部分
        quadratics = 0.5 * (quadratics + quadratics.transpose(0, 2, 1))
        object.__setattr__(self, 'quadratics', quadratics)
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def ambient_dim(self) -> int:
        return self.quadratics.shape[1]

    @property
    def multiplicities(self) -> Tuple[Optional[int], Optional[int]]:
        return self.m1, self.m2

    def _check(self, *vectors) -> None:
        for v in vectors:
            if np.shape(v) != (self.ambient_dim,):
                raise InputError(
                    f"vector of shape {np.shape(v)} does not live in R^{self.ambient_dim}"
                )

    def _pair(self, u, v) -> np.ndarray:
        return np.einsum('kij,i,j->k', self.quadratics, u, v)

    def polarized(self, u, v, w, z) -> float:
        """
        全对称四线性型 T(u, v, w, z)
        """
        u, v, w, z = (np.asarray(a, dtype=float) for a in (u, v, w, z))
        self._check(u, v, w, z)
        terms = (self._pair(u, v) * self._pair(w, z)
                 + self._pair(u, w) * self._pair(v, z)
                 + self._pair(u, z) * self._pair(v, w))
        return float(self.coefficients @ terms) / 3.0

    def bilinear_slice(self, u, v) -> np.ndarray:
        """
        矩阵 M_jk = T(u, v, e_j, e_k)
        """
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        self._check(u, v)
        bu = self.quadratics @ u
        bv = self.quadratics @ v
        uv = self._pair(u, v)
        cross = np.einsum('k,ki,kj->ij', self.coefficients, bu, bv)
        return (np.einsum('k,k,kij->ij', self.coefficients, uv, self.quadratics)
                + cross + cross.T) / 3.0

    def cubic_vector(self, x) -> np.ndarray:
        """T(x, x, x, ·)"""
        x = np.asarray(x, dtype=float)
        self._check(x)
        bx = self.quadratics @ x
        return (self.coefficients * self._pair(x, x)) @ bx

    def trilinear_slice(self, u, basis=None) -> np.ndarray:
        """
        三阶张量 T(u, e_a, e_b, e_c)
        :param u: 第一个变元
        :param basis: N×n 的列正交基，为 None 时使用标准基
        :return: n×n×n 对称张量
        """
        u = np.asarray(u, dtype=float)
        self._check(u)
        if basis is None:
            basis = np.eye(self.ambient_dim)
        reduced = np.einsum('ia,kij,jb->kab', basis, self.quadratics, basis)
        bu = (self.quadratics @ u) @ basis
        t = np.einsum('k,ka,kbc->abc', self.coefficients, bu, reduced)
        return (t + t.transpose(1, 0, 2) + t.transpose(1, 2, 0)) / 3.0

    def negated(self) -> 'QuarticForm':
        """返回 -F，重数交换，用于 M₋"""
        return QuarticForm(self.quadratics, -self.coefficients,
                           m1=self.m2, m2=self.m1,
                           label=f"-({self.label})" if self.label else '',
                           orientation=-self.orientation)

    def __call__(self, x) -> float:
        return evaluate(self, x)


@dataclass(frozen=True, eq=False)
class FocalFrame:
    """焦子流形上一点处的正交标架，切向量与法向量按列存放"""
    base_point: np.ndarray
    sign: int
    tangent_basis: np.ndarray
    normal_basis: np.ndarray

    @property
    def tangent_dim(self) -> int:
        return self.tangent_basis.shape[1]

    @property
    def normal_dim(self) -> int:
        return self.normal_basis.shape[1]

    def gram_residual(self) -> float:
        full = np.column_stack([self.base_point, self.tangent_basis, self.normal_basis])
        return float(np.max(np.abs(full.T @ full - np.eye(full.shape[1]))))

    def with_bases(self, tangent_basis=None, normal_basis=None, tol: float = 1e-8) -> 'FocalFrame':
        """
        用张成相同子空间的另一组正交基替换切/法基
        :raises InputError: 新基不正交或张成的子空间不同
        """
        tangent = self.tangent_basis if tangent_basis is None else np.asarray(tangent_basis, dtype=float)
        normal = self.normal_basis if normal_basis is None else np.asarray(normal_basis, dtype=float)
        for new, old in ((tangent, self.tangent_basis), (normal, self.normal_basis)):
            if new.shape != old.shape:
                raise InputError(f"basis shape {new.shape} differs from {old.shape}")
            if np.max(np.abs(new.T @ new - np.eye(new.shape[1]))) > tol:
                raise InputError("replacement basis is not orthonormal")
            # 投影到原子空间后长度不变
            if np.max(np.abs(old @ (old.T @ new) - new)) > tol:
                raise InputError("replacement basis spans a different subspace")
        return FocalFrame(self.base_point, self.sign, tangent, normal)


@dataclass
class CartanMunznerReport:
    sample_count: int
    max_grad_residual: float
    max_lap_residual: float
    tol: float
    passed: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class SphereRestrictionReport:
    sample_count: int
    max_grad_residual: float
    max_lap_residual: float
    tol: float
    passed: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class ExpansionReport:
    sample_count: int
    max_residual: float
    tol: float
    passed: bool
    worst_sample: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def quartic_from_quadratics(quadratics, coefficients, m1=None, m2=None, label='') -> QuarticForm:
    return QuarticForm(np.asarray(quadratics, dtype=float), np.asarray(coefficients, dtype=float),
                       m1=m1, m2=m2, label=label)


def euclidean_quartic(ambient_dim: int) -> QuarticForm:
    """|x|⁴，满足梯度恒等式但不是 Cartan-Münzner 多项式"""
    return quartic_from_quadratics(np.eye(ambient_dim)[None, :, :], [1.0], label='|x|^4')


def evaluate(form: QuarticForm, x) -> float:
    """
    计算 F(x) = T(x, x, x, x)
    :raises InputError: 维数不符
    """
    x = np.asarray(x, dtype=float)
    form._check(x)
    b = form._pair(x, x)
    return float(form.coefficients @ (b * b))


def gradient(form: QuarticForm, x) -> np.ndarray:
    """∇F(x) = 4·T(x, x, x, ·)"""
    return 4.0 * form.cubic_vector(x)


def laplacian(form: QuarticForm, x) -> float:
    """ΔF(x) = 12·Σ_i T(x, x, e_i, e_i)"""
    x = np.asarray(x, dtype=float)
    form._check(x)
    bx = form.quadratics @ x
    traces = np.trace(form.quadratics, axis1=1, axis2=2)
    return float(4.0 * form.coefficients @ (form._pair(x, x) * traces + 2.0 * np.sum(bx * bx, axis=1)))


def _require_multiplicities(form: QuarticForm, m1, m2) -> Tuple[int, int]:
    m1 = form.m1 if m1 is None else m1
    m2 = form.m2 if m2 is None else m2
    if m1 is None or m2 is None:
        raise InputError("multiplicities (m1, m2) are required for this check")
    return int(m1), int(m2)


def verify_cartan_munzner(form: QuarticForm, m1=None, m2=None, sample_count: int = 100,
                          tol: float = DEFAULT_TOL, rng=None) -> CartanMunznerReport:
    """
    在随机点上检查 |∇F|² = 16|x|⁶ 与 ΔF = 8(m2 - m1)|x|²
    采样点为高斯向量缩放到 [0.5, 2] 内的随机半径
    """
    if sample_count < 1:
        raise InputError("sample_count must be at least 1")
    m1, m2 = _require_multiplicities(form, m1, m2)
    rng = np.random.default_rng() if rng is None else rng
    max_grad = 0.0
    max_lap = 0.0
    for _ in range(sample_count):
        x = rng.standard_normal(form.ambient_dim)
        x *= rng.uniform(0.5, 2.0) / np.linalg.norm(x)
        r2 = float(x @ x)
        g = gradient(form, x)
        max_grad = max(max_grad, abs(float(g @ g) - 16.0 * r2 ** 3))
        max_lap = max(max_lap, abs(laplacian(form, x) - 8.0 * (m2 - m1) * r2))
    passed = max_grad < tol and max_lap < tol
    debug(f"Cartan-Munzner check {form.label}: grad {max_grad:.3e}, lap {max_lap:.3e}")
    return CartanMunznerReport(sample_count, max_grad, max_lap, tol, passed)


def sphere_restriction_check(form: QuarticForm, m1=None, m2=None, sample_count: int = 100,
                             tol: float = DEFAULT_TOL, rng=None) -> SphereRestrictionReport:
    """
    检查 f = F|_S 满足 |∇_S f|² = 16(1 - f²) 与 Δ_S f = 8(m2 - m1) - 4(N + 2)f
    球面算子由锥公式从环境导数得到
    """
    if sample_count < 1:
        raise InputError("sample_count must be at least 1")
    m1, m2 = _require_multiplicities(form, m1, m2)
    rng = np.random.default_rng() if rng is None else rng
    n = form.ambient_dim
    max_grad = 0.0
    max_lap = 0.0
    for _ in range(sample_count):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        f = evaluate(form, x)
        g = gradient(form, x)
        g_sphere = g - (g @ x) * x
        lap_sphere = laplacian(form, x) - 4.0 * (n - 1) * f - 12.0 * f
        max_grad = max(max_grad, abs(float(g_sphere @ g_sphere) - 16.0 * (1.0 - f * f)))
        max_lap = max(max_lap, abs(lap_sphere - (8.0 * (m2 - m1) - 4.0 * (n + 2) * f)))
    return SphereRestrictionReport(sample_count, max_grad, max_lap, tol,
                                   max_grad < tol and max_lap < tol)


def focal_frame(form: QuarticForm, x, tol: float = DEFAULT_TOL,
                cluster_tol: float = CLUSTER_TOL) -> FocalFrame:
    """
    在 F(x) = 1 的点上提取切/法正交基
    A(u, v) = 6·T(x, x, u, v) 在 x 的正交补上特征值聚集于 2（切向）与 -6（法向）
    :param form: 四次型，M₋ 上请传入 -F
    :param x: 单位向量
    :raises InputError: |x| ≠ 1 或 F(x) 偏离 1
    :raises FocalVarietyError: 谱不聚集于 {2, -6}
    """
    x = np.asarray(x, dtype=float)
    form._check(x)
    if abs(np.linalg.norm(x) - 1.0) >= tol:
        raise InputError(f"base point is not a unit vector (|x| = {np.linalg.norm(x):.12f})")
    value = evaluate(form, x)
    if abs(value - 1.0) >= tol:
        raise InputError(f"F(x) = {value:.12f} is not 1 within {tol}")

    complement = null_space(x[None, :])
    a = 6.0 * (complement.T @ form.bilinear_slice(x, x) @ complement)
    eigenvalues, vectors = np.linalg.eigh(0.5 * (a + a.T))
    tangent_mask = np.abs(eigenvalues - TANGENT_EIGENVALUE) < cluster_tol
    normal_mask = np.abs(eigenvalues - NORMAL_EIGENVALUE) < cluster_tol
    stray = ~(tangent_mask | normal_mask)
    if np.any(stray):
        raise FocalVarietyError(
            f"point not on focal variety: eigenvalues {np.round(eigenvalues[stray], 6).tolist()} "
            f"are outside the clusters at 2 and -6"
        )
    frame = FocalFrame(
        base_point=x,
        sign=form.orientation,
        tangent_basis=complement @ vectors[:, tangent_mask],
        normal_basis=complement @ vectors[:, normal_mask],
    )
    debug(f"focal frame: tangent {frame.tangent_dim}, normal {frame.normal_dim}")
    return frame


def second_fundamental_form(form: QuarticForm, frame: FocalFrame) -> ShapeOperatorSet:
    """
    (S_i)_jk = (3/2)·T(x, n_i, e_j, e_k)，切基坐标下的对称矩阵
    """
    tangent = frame.tangent_basis
    operators = []
    for i in range(frame.normal_dim):
        m = form.bilinear_slice(frame.base_point, frame.normal_basis[:, i])
        s = 1.5 * (tangent.T @ m @ tangent)
        operators.append(0.5 * (s + s.T))
    labels = [f"n{i}" for i in range(frame.normal_dim)]
    return ShapeOperatorSet(np.array(operators).reshape(frame.normal_dim, frame.tangent_dim, frame.tangent_dim),
                            labels)


def third_fundamental_form(form: QuarticForm, frame: FocalFrame) -> np.ndarray:
    """
    q_i(y) = (1/2)·T(n_i, y, y, y)
    :return: 形状 (p, n, n, n) 的对称三阶张量组
    """
    tensors = [0.5 * form.trilinear_slice(frame.normal_basis[:, i], frame.tangent_basis)
               for i in range(frame.normal_dim)]
    n = frame.tangent_dim
    return np.array(tensors).reshape(frame.normal_dim, n, n, n)


def reconstruct_expansion_check(form: QuarticForm, frame: FocalFrame, sample_count: int = 50,
                                tol: float = DEFAULT_TOL, rng=None) -> ExpansionReport:
    """
    比较 F(tx + y + w) 的直接值与由 p_i、q_i、⟨∇p_i, ∇p_j⟩ 重建的展开式
    残差除以 max(1, (t² + |y|² + |w|²)²)
    """
    rng = np.random.default_rng() if rng is None else rng
    shapes = second_fundamental_form(form, frame).operators
    cubics = third_fundamental_form(form, frame)
    x = frame.base_point
    worst = 0.0
    worst_sample = {}
    for index in range(sample_count):
        t = float(rng.standard_normal())
        a = rng.standard_normal(frame.tangent_dim)
        b = rng.standard_normal(frame.normal_dim)
        y2, w2 = float(a @ a), float(b @ b)
        lhs = evaluate(form, t * x + frame.tangent_basis @ a + frame.normal_basis @ b)

        sa = shapes @ a
        p = sa @ a
        q = np.einsum('iabc,a,b,c->i', cubics, a, a, a)
        grads = 4.0 * (sa @ sa.T)
        rhs = (t ** 4 + (2.0 * y2 - 6.0 * w2) * t ** 2 + 8.0 * t * float(p @ b)
               + y2 ** 2 - 2.0 * float(p @ p) + 8.0 * float(q @ b)
               + 2.0 * float(b @ grads @ b) - 6.0 * y2 * w2 + w2 ** 2)
        residual = abs(lhs - rhs) / max(1.0, (t * t + y2 + w2) ** 2)
        if residual >= worst:
            worst = residual
            worst_sample = {'index': index, 't': t, 'lhs': lhs, 'rhs': rhs}
    info(f"expansion check {form.label}: max residual {worst:.3e} over {sample_count} samples")
    return ExpansionReport(sample_count, worst, tol, worst < tol, worst_sample)

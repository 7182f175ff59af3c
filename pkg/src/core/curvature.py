"""
曲率判定模块
由形状算子计算 Gauss 方程给出的 Ricci 算子、Einstein 偏差、Willmore 残差、
主曲率谱、等参分块结构与条件 (A)
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svdvals

from src.core.errors import InputError
from src.utils.logger import debug

SYMMETRY_TOL = 1e-10
SPECTRUM_CLUSTER_TOL = 0.3
KERNEL_TOL = 1e-7
BLOCK_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class ShapeOperatorSet:
    """
    切基下的对称形状算子 S_1..S_p，每个单位法向一个
    operators 形状为 (p, n, n)
    """
    operators: np.ndarray
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        operators = np.asarray(self.operators, dtype=float)
        if operators.ndim != 3 or operators.shape[1] != operators.shape[2]:
            raise InputError(f"shape operators must have shape (p, n, n), got {operators.shape}")
        object.__setattr__(self, 'operators', operators)
        labels = list(self.labels) or [f"n{i}" for i in range(operators.shape[0])]
        if len(labels) != operators.shape[0]:
            raise InputError("one label per shape operator is required")
        object.__setattr__(self, 'labels', labels)

    @property
    def n(self) -> int:
        return self.operators.shape[1]

    @property
    def count(self) -> int:
        return self.operators.shape[0]

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, index: int) -> np.ndarray:
        return self.operators[index]

    def symmetry_residual(self) -> float:
        if self.count == 0:
            return 0.0
        return float(np.max(np.abs(self.operators - self.operators.transpose(0, 2, 1))))

    def trace_residual(self) -> float:
        if self.count == 0:
            return 0.0
        return float(np.max(np.abs(np.trace(self.operators, axis1=1, axis2=2))))

    def combination(self, coeffs) -> np.ndarray:
        """Σ c_α S_α"""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.count,):
            raise InputError(f"expected {self.count} coefficients, got shape {coeffs.shape}")
        return np.einsum('a,aij->ij', coeffs, self.operators)

    def square_sum(self) -> np.ndarray:
        """Σ S_α²"""
        return np.einsum('aij,ajk->ik', self.operators, self.operators)


@dataclass
class BlockData:
    index: int
    label: str
    a_norm: float
    b_norm: float
    c_norm: float
    diagonal_residual: float
    singular_value_gap: float


@dataclass
class BlockDecomposition:
    """以 S_{n0} 的特征空间 V₊、V₋、V₀ 为基的分块"""
    base_index: int
    dims: Tuple[int, int, int]
    plus_basis: np.ndarray = field(repr=False)
    minus_basis: np.ndarray = field(repr=False)
    zero_basis: np.ndarray = field(repr=False)
    blocks: List[BlockData] = field(default_factory=list)
    tol: float = BLOCK_TOL

    @property
    def max_diagonal_residual(self) -> float:
        return max((b.diagonal_residual for b in self.blocks), default=0.0)

    @property
    def max_norm_gap(self) -> float:
        return max((abs(b.b_norm - b.c_norm) for b in self.blocks), default=0.0)

    @property
    def max_singular_value_gap(self) -> float:
        return max((b.singular_value_gap for b in self.blocks), default=0.0)

    @property
    def passed(self) -> bool:
        return max(self.max_diagonal_residual, self.max_norm_gap, self.max_singular_value_gap) < self.tol

    def to_dict(self):
        return {
            'base_index': self.base_index,
            'dims': list(self.dims),
            'blocks': [asdict(b) for b in self.blocks],
            'max_diagonal_residual': self.max_diagonal_residual,
            'max_norm_gap': self.max_norm_gap,
            'max_singular_value_gap': self.max_singular_value_gap,
            'passed': self.passed,
        }


@dataclass
class RicciSplit:
    plus_sum: float
    minus_sum: float
    upper_bound: float

    @property
    def gap(self) -> float:
        return abs(self.plus_sum - self.minus_sum)

    def to_dict(self):
        return {**asdict(self), 'gap': self.gap}


@dataclass
class ConditionAResult:
    holds: bool
    kernel_dims: List[int]
    intersection_dim: int
    expected_kernel_dim: Optional[int] = None

    def to_dict(self):
        return asdict(self)


@dataclass
class CurvatureReport:
    ricci: np.ndarray
    einstein_mean: float
    einstein_defect: float
    willmore_residuals: np.ndarray
    spectra: List[np.ndarray]
    squared_norm: float
    block_norms: List[Dict[str, float]] = field(default_factory=list)

    @property
    def max_willmore_residual(self) -> float:
        return float(np.max(np.abs(self.willmore_residuals))) if len(self.willmore_residuals) else 0.0

    def to_dict(self):
        return {
            'ricci': self.ricci,
            'einstein_mean': self.einstein_mean,
            'einstein_defect': self.einstein_defect,
            'willmore_residuals': self.willmore_residuals,
            'max_willmore_residual': self.max_willmore_residual,
            'spectra': self.spectra,
            'squared_norm': self.squared_norm,
            'block_norms': self.block_norms,
        }


def _require_symmetric(shapes: ShapeOperatorSet) -> None:
    residual = shapes.symmetry_residual()
    if residual > SYMMETRY_TOL:
        raise InputError(f"shape operators are not symmetric (residual {residual:.3e})")


def ricci_operator(shapes: ShapeOperatorSet) -> np.ndarray:
    """
    极小子流形的 Gauss 方程：Ric = (n - 1)I - Σ S_α²
    :raises InputError: 算子不对称
    """
    _require_symmetric(shapes)
    return (shapes.n - 1) * np.eye(shapes.n) - shapes.square_sum()


def einstein_defect(shapes: ShapeOperatorSet) -> Tuple[float, float]:
    """
    E = Σ S_α²，返回 (λ̄, max|eig(E) - λ̄|)，λ̄ = Trace(E)/n
    """
    e = shapes.square_sum()
    eigenvalues = np.linalg.eigvalsh(0.5 * (e + e.T))
    mean = float(np.trace(e)) / shapes.n
    return mean, float(np.max(np.abs(eigenvalues - mean)))


def willmore_residuals(shapes: ShapeOperatorSet) -> np.ndarray:
    """r_α = Trace(Ric·S_α)"""
    ricci = ricci_operator(shapes)
    return np.einsum('ij,aji->a', ricci, shapes.operators)


def principal_curvature_spectrum(shapes: ShapeOperatorSet, normal_index: Optional[int] = None,
                                 coeffs=None) -> np.ndarray:
    """
    单个法向或法向单位组合 Σ c_α S_α 的特征值，升序
    :raises InputError: 组合系数不是单位向量
    """
    if normal_index is not None:
        matrix = shapes[normal_index]
    else:
        if coeffs is None:
            raise InputError("either normal_index or coeffs is required")
        coeffs = np.asarray(coeffs, dtype=float)
        if abs(np.linalg.norm(coeffs) - 1.0) > 1e-10:
            raise InputError("normal combination coefficients must form a unit vector")
        matrix = shapes.combination(coeffs)
    return np.linalg.eigvalsh(0.5 * (matrix + matrix.T))


def focal_spectrum(zero_count: int, pm_count: int) -> np.ndarray:
    """多重集 {(-1)^{pm}, 0^{zero}, 1^{pm}}，升序"""
    return np.array([-1.0] * pm_count + [0.0] * zero_count + [1.0] * pm_count)


def spectrum_matches(eigenvalues, expected, tol: float = 1e-7) -> bool:
    eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))
    expected = np.sort(np.asarray(expected, dtype=float))
    return eigenvalues.shape == expected.shape and float(np.max(np.abs(eigenvalues - expected), initial=0.0)) < tol


def _cluster(eigenvalues: np.ndarray, cluster_tol: float) -> np.ndarray:
    targets = np.array([-1.0, 0.0, 1.0])
    nearest = targets[np.argmin(np.abs(eigenvalues[:, None] - targets[None, :]), axis=1)]
    if np.any(np.abs(eigenvalues - nearest) > cluster_tol):
        raise InputError(
            f"base shape operator spectrum is not clustered at 0 and ±1: {np.round(eigenvalues, 6).tolist()}"
        )
    return nearest


def isoparametric_blocks(shapes: ShapeOperatorSet, base_normal_index: int = 0,
                         cluster_tol: float = SPECTRUM_CLUSTER_TOL,
                         tol: float = BLOCK_TOL) -> BlockDecomposition:
    """
    以 S_{n0} 的特征空间 V₊、V₋、V₀ 为基改写其余每个 S_a：
    A_a 为 (V₊, V₋) 块，B_a 为 (V₊, V₀) 块，C_a 为 (V₋, V₀) 块，三个对角块应为零
    :raises InputError: S_{n0} 的谱不聚集于 {0, ±1}
    """
    base = shapes[base_normal_index]
    eigenvalues, vectors = np.linalg.eigh(0.5 * (base + base.T))
    labels = _cluster(eigenvalues, cluster_tol)
    plus = vectors[:, labels == 1.0]
    minus = vectors[:, labels == -1.0]
    zero = vectors[:, labels == 0.0]

    blocks = []
    for index in range(shapes.count):
        if index == base_normal_index:
            continue
        s = shapes[index]
        a = plus.T @ s @ minus
        b = plus.T @ s @ zero
        c = minus.T @ s @ zero
        diagonal = max(
            float(np.max(np.abs(plus.T @ s @ plus), initial=0.0)),
            float(np.max(np.abs(minus.T @ s @ minus), initial=0.0)),
            float(np.max(np.abs(zero.T @ s @ zero), initial=0.0)),
        )
        if b.size:
            singular_gap = float(np.max(np.abs(np.sort(svdvals(b)) - np.sort(svdvals(c)))))
        else:
            singular_gap = 0.0
        blocks.append(BlockData(
            index=index,
            label=shapes.labels[index],
            a_norm=float(np.linalg.norm(a)),
            b_norm=float(np.linalg.norm(b)),
            c_norm=float(np.linalg.norm(c)),
            diagonal_residual=diagonal,
            singular_value_gap=singular_gap,
        ))
    decomposition = BlockDecomposition(base_normal_index, (plus.shape[1], minus.shape[1], zero.shape[1]),
                                       plus, minus, zero, blocks, tol)
    debug(f"blocks: dims {decomposition.dims}, diagonal {decomposition.max_diagonal_residual:.2e}")
    return decomposition


def ricci_sum_split(shapes: ShapeOperatorSet, blocks: BlockDecomposition) -> RicciSplit:
    """
    Ric 在 V₊ 与 V₋ 上的迹，以及上界 m2(m1 + 2m2 - 2)
    """
    ricci = ricci_operator(shapes)
    plus_sum = float(np.trace(blocks.plus_basis.T @ ricci @ blocks.plus_basis))
    minus_sum = float(np.trace(blocks.minus_basis.T @ ricci @ blocks.minus_basis))
    d_plus, _, d_zero = blocks.dims
    return RicciSplit(plus_sum, minus_sum, float(d_plus * (d_zero + 2 * d_plus - 2)))


def condition_A_check(shapes: ShapeOperatorSet, tol: float = KERNEL_TOL,
                      kernel_dim: Optional[int] = None) -> ConditionAResult:
    """
    条件 (A)：所有形状算子的核重合
    :param kernel_dim: 期望的核维数 m₁；给出时每个核与交集都必须恰为该维数，
                       否则要求各核与交集维数相同且交集非零（单个法向时平凡成立）
    """
    kernel_dims = []
    for s in shapes.operators:
        kernel_dims.append(int(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (s + s.T))) < tol)))
    stacked = shapes.operators.reshape(-1, shapes.n)
    # 绝对阈值：算子谱在 {0, ±1}，谱隙为 1
    singular = svdvals(stacked) if stacked.size else np.zeros(0)
    intersection_dim = shapes.n - int(np.sum(singular >= tol))
    if kernel_dim is not None:
        holds = intersection_dim == kernel_dim and all(d == kernel_dim for d in kernel_dims)
    else:
        holds = (all(d == intersection_dim for d in kernel_dims)
                 and (intersection_dim > 0 or shapes.count <= 1))
    return ConditionAResult(holds, kernel_dims, intersection_dim, kernel_dim)


def squared_norm(shapes: ShapeOperatorSet) -> float:
    """第二基本形式的长度平方 Σ_α Trace S_α²"""
    return float(np.einsum('aij,aij->', shapes.operators, shapes.operators))


def witness_directions(shapes: ShapeOperatorSet, basis=None) -> dict:
    """
    Σ S_α² 最小与最大特征值对应的方向，非 Einstein 的见证
    :param basis: N×n 切基，给出时返回环境坐标下的向量
    """
    e = shapes.square_sum()
    eigenvalues, vectors = np.linalg.eigh(0.5 * (e + e.T))
    low, high = vectors[:, 0], vectors[:, -1]
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        low, high = basis @ low, basis @ high
    return {
        'min_value': float(eigenvalues[0]),
        'min_direction': low,
        'max_value': float(eigenvalues[-1]),
        'max_direction': high,
    }


def rotate_normals(shapes: ShapeOperatorSet, rotation) -> ShapeOperatorSet:
    """
    法基正交变换：S'_β = Σ_α R_{βα} S_α
    """
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (shapes.count, shapes.count):
        raise InputError(f"rotation must be {shapes.count}x{shapes.count}")
    if np.max(np.abs(rotation.T @ rotation - np.eye(shapes.count))) > 1e-10:
        raise InputError("normal rotation is not orthogonal")
    return ShapeOperatorSet(np.einsum('ba,aij->bij', rotation, shapes.operators),
                            [f"r{i}" for i in range(shapes.count)])


def gauss_ricci(shapes: ShapeOperatorSet, x) -> float:
    """Ric(X, X) = (n - 1)|X|² - Σ|S_α X|²"""
    x = np.asarray(x, dtype=float)
    if x.shape != (shapes.n,):
        raise InputError(f"tangent vector must have {shapes.n} components")
    sx = shapes.operators @ x
    return float((shapes.n - 1) * (x @ x) - np.sum(sx * sx))


def curvature_report(shapes: ShapeOperatorSet, base_normal_index: Optional[int] = None) -> CurvatureReport:
    """
    汇总 Ricci 算子、Einstein 偏差、Willmore 残差、各法向的谱与长度平方
    给出 base_normal_index 时附带分块范数
    """
    ricci = ricci_operator(shapes)
    mean, defect = einstein_defect(shapes)
    block_norms = []
    if base_normal_index is not None and shapes.count > 1:
        decomposition = isoparametric_blocks(shapes, base_normal_index)
        block_norms = [{'label': b.label, 'a': b.a_norm, 'b': b.b_norm, 'c': b.c_norm}
                       for b in decomposition.blocks]
    return CurvatureReport(
        ricci=ricci,
        einstein_mean=mean,
        einstein_defect=defect,
        willmore_residuals=willmore_residuals(shapes),
        spectra=[principal_curvature_spectrum(shapes, normal_index=i) for i in range(shapes.count)],
        squared_norm=squared_norm(shapes),
        block_norms=block_norms,
    )

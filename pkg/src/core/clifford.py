"""
Clifford 系统模块
在 ℝ^{2l} 上构造并校验对称 Clifford 系统 {P_0, ..., P_m}
不可约斜对称表示由 Cayley-Dickson 乘法、倍化与 16 周期的张量积给出，矩阵元均为整数
"""

from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import InputError, DegenerateMultiplicityError
from src.utils.logger import debug, info

DELTA_TABLE = (1, 2, 4, 4, 8, 8, 8, 8)
MAX_HALF_DIM = 4096


def delta(m: int) -> int:
    """
    C_{m-1} 不可约表示的维数 δ(m)
    :param m: 正整数
    :return: δ(m)，满足 δ(m + 8) = 16·δ(m)
    """
    if int(m) != m or m <= 0:
        raise InputError(f"delta(m) needs a positive integer, got {m}")
    m = int(m)
    return DELTA_TABLE[(m - 1) % 8] * 16 ** ((m - 1) // 8)


def _conj(x: np.ndarray) -> np.ndarray:
    if len(x) == 1:
        return x.copy()
    half = len(x) // 2
    return np.concatenate([_conj(x[:half]), -x[half:]])


def _cayley_dickson(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # (a, b)(c, d) = (ac - d̄b, da + bc̄)
    if len(x) == 1:
        return x * y
    half = len(x) // 2
    a, b = x[:half], x[half:]
    c, d = y[:half], y[half:]
    return np.concatenate([
        _cayley_dickson(a, c) - _cayley_dickson(_conj(d), b),
        _cayley_dickson(d, a) + _cayley_dickson(b, _conj(c)),
    ])


def _left_multiplications(dim: int, count: int) -> List[np.ndarray]:
    """维数 dim 的 Cayley-Dickson 代数中，前 count 个虚单位的左乘矩阵"""
    basis = np.eye(dim, dtype=int)
    result = []
    for unit in range(1, count + 1):
        columns = [_cayley_dickson(basis[unit], basis[j]) for j in range(dim)]
        result.append(np.column_stack(columns))
    return result


def _doubled(generators: List[np.ndarray], size: int) -> List[np.ndarray]:
    """[[0, E], [E, 0]] 加上 [[0, -I], [I, 0]]，生成元个数加一"""
    zero = np.zeros((size, size), dtype=int)
    eye = np.eye(size, dtype=int)
    doubled = [np.block([[zero, e], [e, zero]]) for e in generators]
    doubled.append(np.block([[zero, -eye], [eye, zero]]))
    return doubled


@lru_cache(maxsize=None)
def _skew_generators_cached(count: int) -> Tuple[np.ndarray, ...]:
    if count == 0:
        return ()
    if count == 1:
        return tuple(_left_multiplications(2, 1))
    if count == 2:
        return tuple(_doubled(list(_skew_generators_cached(1)), 2))
    if count == 3:
        return tuple(_left_multiplications(4, 3))
    if count == 4:
        return tuple(_doubled(list(_skew_generators_cached(3)), 4))
    if count <= 7:
        return tuple(_left_multiplications(8, count))
    if count == 8:
        return tuple(_doubled(list(_skew_generators_cached(7)), 8))

    # 周期性：G_a ⊗ I 与 ω ⊗ E_i，ω = G_1⋯G_8 为对称对合
    base = _skew_generators_cached(8)
    volume = np.eye(16, dtype=int)
    for g in base:
        volume = volume @ g
    rest = _skew_generators_cached(count - 8)
    inner = delta(count - 7)
    generators = [np.kron(g, np.eye(inner, dtype=int)) for g in base]
    generators.extend(np.kron(volume, e) for e in rest)
    return tuple(generators)


def skew_generators(count: int) -> List[np.ndarray]:
    """
    C_{count} 的不可约实表示：count 个 δ(count+1) 阶斜对称矩阵，
    满足 E_iE_j + E_jE_i = -2δ_ij I
    :param count: 生成元个数
    :return: 整数矩阵列表
    """
    if int(count) != count or count < 0:
        raise InputError(f"generator count must be a non-negative integer, got {count}")
    return [g.copy() for g in _skew_generators_cached(int(count))]


@dataclass(frozen=True, eq=False)
class CliffordSystem:
    """
    对称 Clifford 系统
    signs 为空表示该系统由更大的系统截取而来，不区分各不可约分量的方向
    """
    m: int
    l: int
    k: int
    signs: Tuple[int, ...]
    matrices: np.ndarray
    origin: str = 'standard'

    @property
    def ambient_dim(self) -> int:
        return 2 * self.l

    @property
    def multiplicities(self) -> Tuple[int, int]:
        return self.m, self.l - self.m - 1

    def __len__(self) -> int:
        return self.m + 1

    def __getitem__(self, index: int) -> np.ndarray:
        return self.matrices[index]

    def subsystem(self, count: int) -> 'CliffordSystem':
        """
        前 count 个矩阵组成的子系统
        :raises DegenerateMultiplicityError: 截取后 m2 < 1
        """
        if not 2 <= count <= len(self):
            raise InputError(f"subsystem size must be between 2 and {len(self)}, got {count}")
        m = count - 1
        if self.l - m - 1 < 1:
            raise DegenerateMultiplicityError(f"subsystem m={m}, l={self.l} has m2 < 1")
        return CliffordSystem(m, self.l, self.l // delta(m), (), self.matrices[:count].copy(),
                              origin=f"first {count} of {self.origin}")


@dataclass
class CliffordReport:
    size: int
    symmetry_residual: float
    involution_residual: float
    trace_residual: float
    anticommutation_residual: float
    tol: float
    passed: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class TraceInvariant:
    trace: float
    q: Optional[float] = None

    def to_dict(self):
        return asdict(self)


@dataclass
class ExtendedSystem:
    """基础系统 {P_0..P_{m_base}}、伴随矩阵 P_{m_base+1} 以及完整系统"""
    base: CliffordSystem
    companion: np.ndarray
    full: CliffordSystem = field(repr=False)


def build_clifford_system(m: int, k: int, signs: Optional[Sequence[int]] = None) -> CliffordSystem:
    """
    构造 ℝ^{2l} 上的对称 Clifford 系统，l = k·δ(m)
    P_0 = diag(I, -I), P_1 = [[0, I], [I, 0]], P_{1+i} = [[0, E_i], [-E_i, 0]]
    :param m: 矩阵个数减一
    :param k: 不可约分量个数
    :param signs: 每个分量的方向 ±1，默认全为 +1
    :raises InputError: 参数不合法
    :raises DegenerateMultiplicityError: m2 = l - m - 1 < 1
    """
    if int(m) != m or m < 1:
        raise InputError(f"m must be a positive integer, got {m}")
    if int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k}")
    m, k = int(m), int(k)
    signs = tuple([1] * k if signs is None else (int(s) for s in signs))
    if len(signs) != k:
        raise InputError(f"expected {k} signs, got {len(signs)}")
    if any(s not in (1, -1) for s in signs):
        raise InputError(f"signs must be +1 or -1, got {signs}")

    l = k * delta(m)
    if l > MAX_HALF_DIM:
        raise InputError(f"l = {l} exceeds the supported size {MAX_HALF_DIM}")
    if l - m - 1 < 1:
        raise DegenerateMultiplicityError(f"m={m}, k={k}: m2 = l - m - 1 = {l - m - 1} < 1")

    eye = np.eye(l)
    zero = np.zeros((l, l))
    blocks = [np.kron(np.diag(signs), e) for e in skew_generators(m - 1)]
    matrices = [np.block([[eye, zero], [zero, -eye]]), np.block([[zero, eye], [eye, zero]])]
    matrices.extend(np.block([[zero, e], [-e, zero]]) for e in blocks)

    system = CliffordSystem(m, l, k, signs, np.array(matrices, dtype=float))
    info(f"built Clifford system m={m}, k={k}, l={l}, signs={signs}")
    return system


def _as_matrices(system: Union[CliffordSystem, Sequence[np.ndarray]]) -> np.ndarray:
    if isinstance(system, CliffordSystem):
        return system.matrices
    return np.asarray(system, dtype=float)


def verify_clifford(system: Union[CliffordSystem, Sequence[np.ndarray]], tol: float = 1e-12) -> CliffordReport:
    """
    检查对称性、P² = I、迹为零与反交换关系，报告最大残差
    """
    matrices = _as_matrices(system)
    count, size = matrices.shape[0], matrices.shape[1]
    eye = np.eye(size)
    symmetry = max(float(np.max(np.abs(p - p.T))) for p in matrices)
    involution = max(float(np.max(np.abs(p @ p - eye))) for p in matrices)
    trace = max(abs(float(np.trace(p))) for p in matrices)
    anticommutation = 0.0
    for i in range(count):
        for j in range(i + 1, count):
            residual = matrices[i] @ matrices[j] + matrices[j] @ matrices[i]
            anticommutation = max(anticommutation, float(np.linalg.norm(residual)))
    passed = max(symmetry, involution, trace, anticommutation) < tol
    debug(f"verify_clifford: sym {symmetry:.1e}, inv {involution:.1e}, "
          f"tr {trace:.1e}, anti {anticommutation:.1e}")
    return CliffordReport(count, symmetry, involution, trace, anticommutation, tol, passed)


def clifford_product(system: Union[CliffordSystem, Sequence[np.ndarray]], indices: Sequence[int]) -> np.ndarray:
    """
    有序乘积 P_{i1}⋯P_{ir}
    :raises InputError: 下标重复或越界
    """
    matrices = _as_matrices(system)
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise InputError(f"indices must be distinct, got {indices}")
    if any(i < 0 or i >= len(matrices) for i in indices):
        raise InputError(f"index out of range for {len(matrices)} matrices: {indices}")
    product = np.eye(matrices.shape[1])
    for i in indices:
        product = product @ matrices[i]
    return product


def is_symmetric_involution(indices: Sequence[int]) -> bool:
    """r 个不同生成元之积为对称对合当且仅当 r(r-1)/2 为偶数"""
    r = len(indices)
    return len(set(indices)) == r and (r * (r - 1) // 2) % 2 == 0


def trace_invariant(system: CliffordSystem) -> TraceInvariant:
    """
    Trace(P_0 P_1 ⋯ P_m)；m = 4 时同时给出 q = trace / (2δ(4))
    """
    trace = float(np.trace(clifford_product(system, range(len(system)))))
    q = trace / (2 * delta(4)) if system.m == 4 else None
    return TraceInvariant(trace, q)


def clifford_sphere_element(system: CliffordSystem, coeffs) -> np.ndarray:
    """
    P = Σ c_i P_i，c 为单位向量
    :raises InputError: 系数个数不符或 |c| ≠ 1
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(system),):
        raise InputError(f"expected {len(system)} coefficients, got shape {coeffs.shape}")
    if abs(np.linalg.norm(coeffs) - 1.0) > 1e-10:
        raise InputError(f"coefficients must form a unit vector, |c| = {np.linalg.norm(coeffs)}")
    return np.einsum('i,ijk->jk', coeffs, system.matrices)


def build_extended_system(m_base: int = 8) -> ExtendedSystem:
    """
    构造 m = m_base + 1, k = 1 的系统，返回前 m_base + 1 个矩阵组成的系统与最后一个矩阵
    m_base = 8 时基础系统位于 ℝ^32，重数为 (8, 7)
    """
    full = build_clifford_system(m_base + 1, 1)
    base = full.subsystem(m_base + 1)
    return ExtendedSystem(base=base, companion=full.matrices[-1].copy(), full=full)


def conjugate_system(system: CliffordSystem, g) -> CliffordSystem:
    """
    用正交矩阵 g 共轭整个系统：P_i ↦ g P_i gᵀ
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (system.ambient_dim, system.ambient_dim):
        raise InputError(f"conjugating matrix must be {system.ambient_dim}x{system.ambient_dim}")
    if np.max(np.abs(g.T @ g - np.eye(system.ambient_dim))) > 1e-10:
        raise InputError("conjugating matrix is not orthogonal")
    matrices = np.einsum('ab,ibc,dc->iad', g, system.matrices, g)
    return CliffordSystem(system.m, system.l, system.k, system.signs, matrices, origin='conjugated')


def _matrix_to_list(matrix: np.ndarray) -> list:
    rounded = np.rint(matrix)
    if np.array_equal(rounded, matrix):
        return rounded.astype(int).tolist()
    return matrix.tolist()


def system_to_dict(system: CliffordSystem) -> dict:
    """序列化为 {m, l, k, signs, matrices}，整数矩阵保持整数"""
    return {
        'm': system.m,
        'l': system.l,
        'k': system.k,
        'signs': list(system.signs),
        'matrices': [_matrix_to_list(p) for p in system.matrices],
    }


def system_from_dict(data: dict) -> CliffordSystem:
    """
    从字典恢复 Clifford 系统，只校验形状，数值校验交给 verify_clifford
    :raises InputError: 缺少字段或形状不符
    """
    try:
        m, l, k = int(data['m']), int(data['l']), int(data['k'])
        signs = tuple(int(s) for s in data.get('signs', []))
        matrices = np.array(data['matrices'], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed Clifford system document: {e}") from e
    if matrices.shape != (m + 1, 2 * l, 2 * l):
        raise InputError(f"matrices have shape {matrices.shape}, expected {(m + 1, 2 * l, 2 * l)}")
    return CliffordSystem(m, l, k, signs, matrices, origin='loaded')

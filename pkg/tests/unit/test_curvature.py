"""
单元测试 - 由形状算子计算的曲率量
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.curvature import (
    ShapeOperatorSet, ricci_operator, einstein_defect, willmore_residuals, principal_curvature_spectrum,
    focal_spectrum, spectrum_matches, isoparametric_blocks, ricci_sum_split, condition_A_check,
    squared_norm, witness_directions, rotate_normals, gauss_ricci, curvature_report,
)
from src.core.errors import InputError
from src.core.fkm import fkm_context, sample_m_plus
from src.core.homogeneous import random_special_orthogonal
from src.core.quartic import focal_frame, second_fundamental_form


def _toy_shapes():
    s1 = np.diag([1.0, -1.0, 0.0])
    s2 = np.zeros((3, 3))
    s2[0, 2] = s2[2, 0] = 1.0
    return ShapeOperatorSet(np.array([s1, s2]))


def _fkm_shapes(m, k, rng, signs=None):
    context = fkm_context(m, k, signs)
    frame = focal_frame(context.form, sample_m_plus(context, rng))
    return second_fundamental_form(context.form, frame)


class TestShapeOperatorSet:
    """测试形状算子集合"""

    def test_default_labels(self):
        """缺省标签为 n0, n1, ..."""
        assert _toy_shapes().labels == ['n0', 'n1']

    def test_bad_shape(self):
        """形状不合法"""
        with pytest.raises(InputError):
            ShapeOperatorSet(np.zeros((2, 3, 4)))

    def test_combination(self):
        """单位组合"""
        shapes = _toy_shapes()
        np.testing.assert_allclose(shapes.combination([0.0, 1.0]), shapes[1])
        with pytest.raises(InputError):
            shapes.combination([1.0])


class TestRicciAndEinstein:
    """测试 Ricci 算子与 Einstein 偏差"""

    def test_ricci_toy(self):
        """Ric = (n - 1)I - Σ S²"""
        np.testing.assert_allclose(ricci_operator(_toy_shapes()), np.diag([0.0, 1.0, 1.0]))

    def test_einstein_defect_toy(self):
        """Σ S² = diag(2, 1, 1)，均值 4/3，偏差 2/3"""
        mean, defect = einstein_defect(_toy_shapes())
        assert mean == pytest.approx(4.0 / 3.0)
        assert defect == pytest.approx(2.0 / 3.0)

    def test_non_symmetric(self):
        """非对称算子被拒绝"""
        shapes = ShapeOperatorSet(np.array([[[0.0, 1.0], [0.0, 0.0]]]))
        with pytest.raises(InputError):
            ricci_operator(shapes)

    def test_gauss_ricci(self):
        """Ric(X, X) 与 Ricci 算子的对角元一致"""
        shapes = _toy_shapes()
        ricci = ricci_operator(shapes)
        for i in range(3):
            e = np.eye(3)[i]
            assert gauss_ricci(shapes, e) == pytest.approx(ricci[i, i])
        with pytest.raises(InputError):
            gauss_ricci(shapes, np.ones(2))

    def test_sp2_einstein(self, rng):
        """(4, 3) |q| = 2 的 M₊ 为 Einstein，λ̄ = 3，Ric = 6I"""
        shapes = _fkm_shapes(4, 2, rng, (1, 1))
        mean, defect = einstein_defect(shapes)
        assert defect < 1e-9
        assert mean == pytest.approx(3.0)
        np.testing.assert_allclose(ricci_operator(shapes), 6.0 * np.eye(10), atol=1e-9)

    def test_q0_not_einstein(self, rng):
        """(4, 3) q = 0 的 M₊ 不是 Einstein"""
        _, defect = einstein_defect(_fkm_shapes(4, 2, rng, (1, -1)))
        assert defect >= 0.5


class TestWillmore:
    """测试 Willmore 残差"""

    def test_toy_residuals(self):
        """Trace(Ric·S_α)"""
        np.testing.assert_allclose(willmore_residuals(_toy_shapes()), [-1.0, 0.0])

    @pytest.mark.parametrize("m,k", [(1, 3), (2, 2), (5, 1)])
    def test_focal_willmore(self, m, k, rng):
        """焦子流形上残差为零"""
        residuals = willmore_residuals(_fkm_shapes(m, k, rng))
        assert np.max(np.abs(residuals)) < 1e-7

    def test_random_traceless_nonzero(self, rng):
        """随机无迹对称算子一般不满足 Willmore 条件，残差等于 -Σ_β Trace(S_β² S_α)"""
        raw = rng.standard_normal((3, 5, 5))
        operators = 0.5 * (raw + raw.transpose(0, 2, 1))
        operators -= np.einsum('aii->a', operators)[:, None, None] * np.eye(5) / 5
        shapes = ShapeOperatorSet(operators)
        residuals = willmore_residuals(shapes)
        cubic = -np.einsum('bij,bjk,aki->a', operators, operators, operators)
        np.testing.assert_allclose(residuals, cubic, atol=1e-10)
        assert np.max(np.abs(residuals)) > 1e-3

    def test_rotation_invariance(self, rng):
        """残差的范数不依赖法基"""
        shapes = _fkm_shapes(2, 2, rng)
        rotation = random_special_orthogonal(shapes.count, rng)
        rotated = rotate_normals(shapes, rotation)
        assert np.linalg.norm(willmore_residuals(rotated)) == pytest.approx(
            np.linalg.norm(willmore_residuals(shapes)), abs=1e-10)
        assert squared_norm(rotated) == pytest.approx(squared_norm(shapes))

    def test_rotation_not_orthogonal(self):
        """非正交变换被拒绝"""
        with pytest.raises(InputError):
            rotate_normals(_toy_shapes(), 2.0 * np.eye(2))


class TestSpectrum:
    """测试主曲率谱"""

    def test_focal_spectrum(self):
        """多重集 {-1, 0, 0, 1}"""
        np.testing.assert_array_equal(focal_spectrum(2, 1), [-1.0, 0.0, 0.0, 1.0])

    def test_matches(self):
        """允许顺序不同"""
        assert spectrum_matches([1.0, 0.0, -1.0], focal_spectrum(1, 1))
        assert not spectrum_matches([1.0, 0.0], focal_spectrum(1, 1))

    def test_unit_combination(self, rng):
        """任意单位法向的谱相同"""
        shapes = _fkm_shapes(5, 1, rng)
        coeffs = rng.standard_normal(shapes.count)
        coeffs /= np.linalg.norm(coeffs)
        eigenvalues = principal_curvature_spectrum(shapes, coeffs=coeffs)
        assert spectrum_matches(eigenvalues, focal_spectrum(5, 2))

    def test_requires_selector(self):
        """缺少法向选择"""
        with pytest.raises(InputError):
            principal_curvature_spectrum(_toy_shapes())
        with pytest.raises(InputError):
            principal_curvature_spectrum(_toy_shapes(), coeffs=[1.0, 1.0])


class TestBlocks:
    """测试分块结构与 Ricci 迹的分解"""

    def test_fkm_blocks(self, rng):
        """对角块为零，‖B‖ = ‖C‖"""
        shapes = _fkm_shapes(4, 2, rng, (1, -1))
        blocks = isoparametric_blocks(shapes)
        assert blocks.dims == (3, 3, 4)
        assert blocks.passed, blocks.to_dict()
        split = ricci_sum_split(shapes, blocks)
        assert split.gap < 1e-6
        assert split.plus_sum <= split.upper_bound + 1e-6

    def test_unclustered_base(self):
        """基算子谱不聚集于 {0, ±1}"""
        shapes = ShapeOperatorSet(np.array([np.diag([0.5, -0.5])]))
        with pytest.raises(InputError):
            isoparametric_blocks(shapes)


class TestConditionA:
    """测试条件 (A)"""

    def test_common_kernel(self):
        """核相同"""
        s1 = np.diag([1.0, -1.0, 0.0])
        s2 = np.zeros((3, 3))
        s2[0, 1] = s2[1, 0] = 1.0
        result = condition_A_check(ShapeOperatorSet(np.array([s1, s2])))
        assert result.holds
        assert result.kernel_dims == [1, 1]
        assert result.intersection_dim == 1

    def test_different_kernels(self):
        """核不同"""
        result = condition_A_check(_toy_shapes())
        assert not result.holds
        assert result.intersection_dim == 0

    def test_single_operator(self):
        """单个法向时平凡成立"""
        assert condition_A_check(ShapeOperatorSet(np.array([np.diag([1.0, 0.0])]))).holds

    def test_all_invertible(self):
        """各算子都可逆时核都是零，不算条件 (A)"""
        s1 = np.diag([1.0, -1.0])
        s2 = np.array([[0.0, 1.0], [1.0, 0.0]])
        result = condition_A_check(ShapeOperatorSet(np.array([s1, s2])))
        assert result.kernel_dims == [0, 0]
        assert result.intersection_dim == 0
        assert not result.holds

    def test_expected_kernel_dim(self):
        """给出 m₁ 时核维数必须与之相等"""
        s1 = np.diag([1.0, -1.0, 0.0])
        s2 = np.zeros((3, 3))
        s2[0, 1] = s2[1, 0] = 1.0
        shapes = ShapeOperatorSet(np.array([s1, s2]))
        assert condition_A_check(shapes, kernel_dim=1).holds
        mismatch = condition_A_check(shapes, kernel_dim=2)
        assert not mismatch.holds
        assert mismatch.to_dict()['expected_kernel_dim'] == 2

    def test_einstein_case_fails(self, rng):
        """(4, 3) |q| = 2 的 M₊ 不满足条件 (A)"""
        shapes = _fkm_shapes(4, 2, rng, (1, 1))
        assert not condition_A_check(shapes, kernel_dim=4).holds


class TestReports:
    """测试汇总量"""

    def test_squared_norm(self):
        """Σ Trace S²"""
        assert squared_norm(_toy_shapes()) == pytest.approx(4.0)

    def test_witness(self):
        """最大特征值方向为 e1"""
        witness = witness_directions(_toy_shapes())
        assert witness['min_value'] == pytest.approx(1.0)
        assert witness['max_value'] == pytest.approx(2.0)
        assert abs(witness['max_direction'][0]) == pytest.approx(1.0)

    def test_curvature_report(self, rng):
        """报告字段"""
        shapes = _fkm_shapes(2, 2, rng)
        report = curvature_report(shapes, base_normal_index=0)
        assert report.max_willmore_residual < 1e-7
        assert len(report.spectra) == shapes.count
        assert len(report.block_norms) == shapes.count - 1
        data = report.to_dict()
        assert set(data) >= {'ricci', 'einstein_defect', 'willmore_residuals', 'squared_norm'}

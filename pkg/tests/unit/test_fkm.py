"""
单元测试 - FKM 多项式、焦子流形采样与特殊点
"""

import pytest
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import subspace_angles

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.clifford import build_extended_system, build_clifford_system
from src.core.curvature import condition_A_check, einstein_defect
from src.core.errors import InputError, InvalidNormalError, SamplingError
from src.core.fkm import (
    POSSIBLY_EINSTEIN_PAIRS, fkm_context, make_context, constraint_values, sphere_coefficients,
    sample_m_minus, sample_m_plus, normal_basis_m_plus, tangent_basis_m_plus, normal_basis_m_minus,
    shape_operators_direct, compare_shape_operators, pipj_vectors, pipj_gram, ricci_via_pipj,
    span_dimension, span_criterion, operator_list, common_eigenvector, eigenvector_identities,
    m_minus_eigenspaces,
)
from src.core.quartic import evaluate, focal_frame, second_fundamental_form


class TestPolynomial:
    """测试 FKM 多项式"""

    def test_values_on_focal_sets(self, rng):
        """M₊ 上 F = 1，M₋ 上 F = -1"""
        context = fkm_context(2, 2)
        assert evaluate(context.form, sample_m_plus(context, rng)) == pytest.approx(1.0)
        assert evaluate(context.form, sample_m_minus(context, rng).point) == pytest.approx(-1.0)

    def test_context_dims(self):
        """dim M₊ = 2l - m - 2，dim M₋ = l + m - 1"""
        context = fkm_context(4, 2)
        assert (context.m1, context.m2) == (4, 3)
        assert context.dim_m_plus == 10
        assert context.dim_m_minus == 11

    def test_possibly_einstein_pairs(self):
        """张成判据后仍可能为 Einstein 的重数对"""
        assert (4, 3) in POSSIBLY_EINSTEIN_PAIRS
        assert (2, 1) not in POSSIBLY_EINSTEIN_PAIRS


class TestSampling:
    """测试采样"""

    @pytest.mark.parametrize("m,k", [(1, 3), (4, 2), (9, 1)])
    def test_m_plus_constraints(self, m, k, rng):
        """⟨P_ix, x⟩ = 0，|x| = 1"""
        context = fkm_context(m, k)
        x = sample_m_plus(context, rng)
        assert np.max(np.abs(constraint_values(context.system, x))) < 1e-12
        assert np.linalg.norm(x) == pytest.approx(1.0)

    def test_m_minus_sample(self, rng):
        """y 属于 P 的 +1 特征空间"""
        context = fkm_context(5, 1)
        sample = sample_m_minus(context, rng)
        np.testing.assert_allclose(sample.sphere_element @ sample.point, sample.point, atol=1e-12)
        np.testing.assert_allclose(sphere_coefficients(context.system, sample.sphere_element),
                                   sample.coeffs, atol=1e-12)

    def test_newton_failure(self, rng):
        """迭代次数为 0 时所有重启都失败"""
        with pytest.raises(SamplingError):
            sample_m_plus(fkm_context(2, 2), rng, max_iter=0, restarts=2)


class TestBases:
    """测试切/法基与两种形状算子"""

    def test_m_plus_bases(self, rng):
        """法基 P_ix 正交，切基维数正确"""
        context = fkm_context(4, 2)
        x = sample_m_plus(context, rng)
        normals = normal_basis_m_plus(context, x)
        tangent = tangent_basis_m_plus(context, x)
        assert normals.shape == (16, 5)
        assert tangent.shape == (16, 10)
        np.testing.assert_allclose(tangent.T @ normals, 0.0, atol=1e-10)

    def test_m_minus_normal_basis(self, rng):
        """M₋ 法空间维数为 m2 + 1"""
        context = fkm_context(4, 2)
        sample = sample_m_minus(context, rng)
        normals = normal_basis_m_minus(context, sample.point, sample.sphere_element)
        assert normals.shape == (16, 4)
        frame = focal_frame(context.form.negated(), sample.point)
        np.testing.assert_allclose(frame.normal_basis @ (frame.normal_basis.T @ normals), normals, atol=1e-8)

    @pytest.mark.parametrize("m,k", [(2, 2), (4, 2), (6, 1)])
    def test_dual_oracle(self, m, k, rng):
        """极化提取与切向投影公式一致，整体符号为 +1"""
        context = fkm_context(m, k)
        x = sample_m_plus(context, rng)
        frame = focal_frame(context.form, x).with_bases(normal_basis=normal_basis_m_plus(context, x))
        extracted = second_fundamental_form(context.form, frame)
        direct = shape_operators_direct(context, x, frame.tangent_basis)
        sign, max_diff = compare_shape_operators(extracted, direct)
        assert sign == 1
        assert max_diff < 1e-8

    @pytest.mark.parametrize("m,k,signs", [(4, 2, (1, -1)), (2, 2, None), (5, 1, None)])
    def test_direct_gauss_identity(self, m, k, signs, rng):
        """单位切向量 X：Σ|S_iX|² = (m + 1) - 2Σ_{i<j}⟨X, P_iP_jx⟩²"""
        context = fkm_context(m, k, signs)
        x = sample_m_plus(context, rng)
        tangent = tangent_basis_m_plus(context, x)
        direct = shape_operators_direct(context, x, tangent)
        for _ in range(3):
            v = rng.standard_normal(tangent.shape[1])
            v /= np.linalg.norm(v)
            lhs = float(np.sum((direct.operators @ v) ** 2))
            projections = pipj_vectors(context, x).T @ (tangent @ v)
            assert lhs == pytest.approx(m + 1 - 2 * np.sum(projections ** 2), abs=1e-9)


class TestSpanCriterion:
    """测试 P_iP_jx 的张成维数"""

    def test_sp2_gram_identity(self, rng):
        """|q| = 2 的 (4, 3) 情形 Gram 矩阵为单位阵"""
        context = fkm_context(4, 2, (1, 1))
        x = sample_m_plus(context, rng)
        np.testing.assert_allclose(pipj_gram(context, x), np.eye(10), atol=1e-9)
        assert span_criterion(context, x).deficient is False

    def test_deficient(self, rng):
        """(2, 1) 的张成维数小于 dim M₊"""
        context = fkm_context(2, 2)
        x = sample_m_plus(context, rng)
        assert pipj_vectors(context, x).shape == (8, 3)
        assert span_dimension(context, x) <= 3
        assert span_criterion(context, x).deficient

    def test_ricci_via_pipj(self, rng):
        """P_iP_jx 公式与 Gauss 方程一致"""
        context = fkm_context(4, 2, (1, -1))
        x = sample_m_plus(context, rng)
        frame = focal_frame(context.form, x)
        shapes = second_fundamental_form(context.form, frame)
        ricci = (shapes.n - 1) * np.eye(shapes.n) - shapes.square_sum()
        v = frame.tangent_basis[:, 0]
        assert ricci_via_pipj(context, x, v) == pytest.approx(ricci[0, 0], abs=1e-8)
        with pytest.raises(InputError):
            ricci_via_pipj(context, x, x)


class TestSpecialPoints:
    """测试公共特征向量"""

    def test_operator_families(self):
        """算子族的个数"""
        assert len(operator_list('paired', 9)) == 10
        assert len(operator_list('fano')) == 7
        assert len(operator_list('m10')) == 5
        with pytest.raises(InputError):
            operator_list('unknown')

    def test_paired_point(self, rng):
        """(9, 6) 公共特征向量在 M₊ 上，张成满维但仍非 Einstein"""
        context = fkm_context(9, 1)
        x = common_eigenvector(context, operator_list('paired', 9), rng=rng)
        assert np.max(np.abs(constraint_values(context.system, x))) < 1e-9
        identities = eigenvector_identities(context, x, [((0, 1), (2, 3))])
        assert identities['max_residual'] < 1e-9
        criterion = span_criterion(context, x)
        assert criterion.span_dimension == context.dim_m_plus == 21
        assert not criterion.deficient
        frame = focal_frame(context.form, x)
        _, defect = einstein_defect(second_fundamental_form(context.form, frame))
        assert defect >= 0.5

    def test_extended_point(self, rng):
        """(8, 7) 使用扩展系统的算子"""
        extended = build_extended_system(8)
        context = make_context(extended.base)
        x = common_eigenvector(context, operator_list('paired', 9), rng=rng, system=extended.full)
        assert np.max(np.abs(constraint_values(context.system, x))) < 1e-9
        assert span_dimension(context, x) <= 21

    def test_fano_condition_a(self, rng):
        """(7, 8) 在 Fano 族的公共特征向量处满足条件 (A)"""
        context = fkm_context(7, 2)
        x = common_eigenvector(context, operator_list('fano'), rng=rng)
        frame = focal_frame(context.form, x)
        result = condition_A_check(second_fundamental_form(context.form, frame), kernel_dim=context.m1)
        assert result.holds
        assert result.intersection_dim == result.expected_kernel_dim == 7

    def test_non_involution(self, rng):
        """三重积不是对称对合"""
        with pytest.raises(InputError):
            common_eigenvector(fkm_context(9, 1), [(0, 1, 2)], rng=rng)

    def test_wrong_sign_count(self, rng):
        """符号个数不符"""
        with pytest.raises(InputError):
            common_eigenvector(fkm_context(9, 1), operator_list('paired', 9), signs=(1,), rng=rng)


class TestMinusEigenspaces:
    """测试 M₋ 上 S_N 的特征空间"""

    def test_dimensions(self, rng):
        """维数为 (m2, m1, m1)"""
        context = fkm_context(4, 2)
        sample = sample_m_minus(context, rng)
        normals = normal_basis_m_minus(context, sample.point, sample.sphere_element)
        spaces = m_minus_eigenspaces(context, sample.point, sample.sphere_element, normals[:, 0])
        assert spaces.dims == (3, 4, 4)

    def test_invalid_normal(self, rng):
        """N 不在 E₋(P) 中"""
        context = fkm_context(4, 2)
        sample = sample_m_minus(context, rng)
        with pytest.raises(InvalidNormalError):
            m_minus_eigenspaces(context, sample.point, sample.sphere_element, sample.point)

    @pytest.mark.parametrize("m,k", [(4, 2), (1, 3), (2, 2)])
    def test_agrees_with_extracted_operator(self, m, k, rng):
        """Ker、E₊、E₋ 与由 -F 提取的 S_N 的特征空间重合（主角为零）"""
        context = fkm_context(m, k)
        negated = context.form.negated()
        sample = sample_m_minus(context, rng)
        y = sample.point
        normal = normal_basis_m_minus(context, y, sample.sphere_element)[:, 0]
        spaces = m_minus_eigenspaces(context, y, sample.sphere_element, normal)

        tangent = focal_frame(negated, y).tangent_basis
        s = 1.5 * (tangent.T @ negated.bilinear_slice(y, normal) @ tangent)
        eigenvalues, vectors = np.linalg.eigh(0.5 * (s + s.T))

        def eigenspace(value):
            return tangent @ vectors[:, np.abs(eigenvalues - value) < 0.3]

        assert np.max(subspace_angles(spaces.kernel, eigenspace(0.0))) < 1e-6
        aligned = [
            max(np.max(subspace_angles(spaces.plus, eigenspace(a))),
                np.max(subspace_angles(spaces.minus, eigenspace(-a))))
            for a in (1.0, -1.0)
        ]
        assert min(aligned) < 1e-6

    @pytest.mark.parametrize("m,k", [(4, 2), (1, 3), (2, 1)])
    def test_clifford_direction_norm(self, m, k, rng):
        """Y = Qy，Q ⊥ P 属于 Clifford 球面：Σ_α|S_{N_α}Y|² = l - m"""
        context = fkm_context(m, k)
        negated = context.form.negated()
        sample = sample_m_minus(context, rng)
        frame = focal_frame(negated, sample.point)
        shapes = second_fundamental_form(negated, frame)

        d = rng.standard_normal(len(context.system))
        d -= (d @ sample.coeffs) * sample.coeffs
        d /= np.linalg.norm(d)
        q = np.einsum('i,ijk->jk', d, context.system.matrices)
        y_dir = frame.tangent_basis.T @ (q @ sample.point)
        assert np.linalg.norm(y_dir) == pytest.approx(1.0, abs=1e-9)
        total = float(np.sum((shapes.operators @ y_dir) ** 2))
        assert total == pytest.approx(context.system.l - context.system.m, abs=1e-8)

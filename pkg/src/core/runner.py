#!/usr/bin/env python3
"""
验证运行器
对一个案例的一个焦子流形取点、按点并行计算各项检查，再汇总为判定并与期望表比较
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.core import homogeneous
from src.core.cases import (
    BuiltCase, CaseSpec, RunConfig, build_case, builtin_cases, case_salt, expected_verdict,
)
from src.core.config_manager import Config
from src.core.curvature import (
    condition_A_check, einstein_defect, focal_spectrum, isoparametric_blocks, principal_curvature_spectrum,
    ricci_sum_split, willmore_residuals, witness_directions,
)
from src.core.errors import InputError
from src.core.fkm import (
    common_eigenvector, compare_shape_operators, eigenvector_identities, normal_basis_m_plus,
    sample_m_minus, sample_m_plus, shape_operators_direct, span_criterion,
)
from src.core.quartic import (
    verify_cartan_munzner, sphere_restriction_check, focal_frame, second_fundamental_form,
    reconstruct_expansion_check,
)
from src.utils.logger import debug, info, warning
from src.utils.parallel import derive_rngs, parallel_map, resolve_worker_count

SPECIAL_POINT_COUNT = 2
RICCI_SPLIT_TOL = 1e-6
FKM_ONLY_CHECKS = ('span', 'oracle')
THEOREM_CHECKS = ('einstein', 'willmore')


@dataclass(eq=False)
class PointJob:
    index: int
    kind: str
    rng: np.random.Generator


def einstein_verdict(defects: Sequence[float], yes_tol: float, no_threshold: float) -> str:
    """
    全部偏差 < yes_tol 判 YES，存在偏差 >= no_threshold 判 NO，其余为 INCONCLUSIVE
    """
    if all(d < yes_tol for d in defects):
        return 'YES'
    if any(d >= no_threshold for d in defects):
        return 'NO'
    return 'INCONCLUSIVE'


class VerificationRunner:
    """验证运行器"""

    def __init__(self, config: Config, threads: Optional[int] = None):
        """
        初始化运行器
        :param config: 配置对象
        :param threads: 命令行给出的线程数，优先于配置
        """
        self.config = config
        self.numerics = config.numerics()
        configured = threads if threads is not None else config.get('parallel.threads', 0)
        self.workers = resolve_worker_count(configured)
        self.newton = {
            'tol': float(config.get('sampling.newton_tol', 1e-12)),
            'max_iter': int(config.get('sampling.newton_max_iter', 50)),
            'restarts': int(config.get('sampling.newton_restarts', 5)),
        }
        self._cases: Dict[str, BuiltCase] = {}

    def build(self, spec: CaseSpec) -> BuiltCase:
        if spec.name not in self._cases:
            self._cases[spec.name] = build_case(spec)
            debug(f"built case {spec.name}")
        return self._cases[spec.name]

    # ---------- 取点 ----------

    def point_jobs(self, built: BuiltCase, focal: str, samples: int, seed: int) -> List[PointJob]:
        """
        FKM M₊：Newton 投影的一般点，特殊重数对另加公共特征向量点
        FKM M₋：Clifford 球面采样
        齐性情形：参考点及其伴随轨道上的点
        """
        kinds = ['generic'] * samples
        if not built.is_fkm:
            kinds[0] = 'reference'
        elif focal == 'plus' and built.special_family:
            kinds += ['special'] * SPECIAL_POINT_COUNT
        rngs = derive_rngs(seed, len(kinds), *case_salt(built.spec, focal))
        return [PointJob(i, kind, rng) for i, (kind, rng) in enumerate(zip(kinds, rngs))]

    def locate(self, built: BuiltCase, focal: str, job: PointJob) -> Dict[str, Any]:
        """
        :return: {'x': 点, 以及 M₋ 上的 Clifford 球面元素}
        :raises SamplingError: Newton 投影失败或公共特征向量塌缩
        """
        if not built.is_fkm:
            case = 'real' if built.spec.kind == 'so5-real' else 'complex'
            base = homogeneous.reference_point(case, focal)
            if job.kind == 'reference':
                return {'x': base}
            return {'x': homogeneous.adjoint_orbit_sample(case, base, job.rng)}

        context = built.context
        if focal == 'minus':
            sample = sample_m_minus(context, job.rng)
            return {'x': sample.point, 'sphere_element': sample.sphere_element}
        if job.kind == 'special':
            operators = built.operator_family()
            x = common_eigenvector(context, operators, rng=job.rng, system=built.operator_system)
            first = operators[0]
            identities = eigenvector_identities(context, x, [(first[:2], first[2:])],
                                                system=built.operator_system)
            return {'x': x, 'identities': identities}
        return {'x': sample_m_plus(context, job.rng, self.newton['tol'],
                                   self.newton['max_iter'], self.newton['restarts'])}

    # ---------- 单点计算 ----------

    def evaluate_point(self, job: PointJob, built: BuiltCase, focal: str, checks: Sequence[str]) -> Dict[str, Any]:
        """
        在一个点上计算所需的各项检查
        """
        numerics = self.numerics
        located = self.locate(built, focal, job)
        x = located['x']
        form = built.focal_form(focal)
        frame = focal_frame(form, x, numerics.focal_value_tol, numerics.cluster_tol)
        shapes = second_fundamental_form(form, frame)
        result: Dict[str, Any] = {'index': job.index, 'kind': job.kind}
        if 'identities' in located:
            result['eigenvector_identities'] = located['identities']

        for check in checks:
            if check == 'einstein':
                mean, defect = einstein_defect(shapes)
                witness = witness_directions(shapes, frame.tangent_basis)
                entry = {'mean': mean, 'defect': defect,
                         'min_value': witness['min_value'], 'max_value': witness['max_value']}
                if not built.is_fkm:
                    coords = homogeneous.SkewCoordinates(built.spec.kind)
                    entry['min_coordinate'] = coords.name(int(np.argmax(np.abs(witness['min_direction']))))
                    entry['max_coordinate'] = coords.name(int(np.argmax(np.abs(witness['max_direction']))))
                result['einstein'] = entry
            elif check == 'willmore':
                residuals = willmore_residuals(shapes)
                result['willmore'] = {'max_residual': float(np.max(np.abs(residuals), initial=0.0))}
            elif check == 'condition-a':
                result['condition-a'] = condition_A_check(shapes, numerics.kernel_tol, form.m1).to_dict()
            elif check == 'blocks':
                blocks = isoparametric_blocks(shapes, 0, numerics.spectrum_cluster_tol, numerics.block_tol)
                split = ricci_sum_split(shapes, blocks)
                passed = (blocks.passed and split.gap < RICCI_SPLIT_TOL
                          and split.plus_sum <= split.upper_bound + RICCI_SPLIT_TOL)
                result['blocks'] = {
                    'dims': list(blocks.dims),
                    'max_diagonal_residual': blocks.max_diagonal_residual,
                    'max_norm_gap': blocks.max_norm_gap,
                    'max_singular_value_gap': blocks.max_singular_value_gap,
                    'ricci_split': split.to_dict(),
                    'passed': passed,
                }
            elif check == 'span':
                result['span'] = span_criterion(built.context, x, numerics.rank_rel_tol).to_dict()
            elif check == 'spectrum':
                coeffs = job.rng.standard_normal(shapes.count)
                coeffs /= np.linalg.norm(coeffs)
                eigenvalues = principal_curvature_spectrum(shapes, coeffs=coeffs)
                expected = focal_spectrum(form.m1, form.m2)
                deviation = (float(np.max(np.abs(np.sort(eigenvalues) - expected)))
                             if eigenvalues.shape == expected.shape else float('inf'))
                result['spectrum'] = {'max_deviation': deviation,
                                      'passed': deviation < numerics.spectrum_tol}
            elif check == 'expansion':
                report = reconstruct_expansion_check(form, frame, 50, numerics.tol, job.rng)
                result['expansion'] = {'max_residual': report.max_residual, 'passed': report.passed}
            elif check == 'oracle':
                aligned = frame.with_bases(normal_basis=normal_basis_m_plus(built.context, x),
                                           tol=numerics.focal_value_tol)
                extracted = second_fundamental_form(form, aligned)
                direct = shape_operators_direct(built.context, x, aligned.tangent_basis)
                sign, max_diff = compare_shape_operators(extracted, direct)
                result['oracle'] = {'sign': sign, 'max_diff': max_diff, 'passed': max_diff < numerics.tol}
        return result

    # ---------- 汇总 ----------

    def aggregate(self, check: str, points: List[Dict[str, Any]]) -> Dict[str, Any]:
        """
        :return: {'summary': ..., 'verdict': ...}
        """
        numerics = self.numerics
        values = [p[check] for p in points]
        if check == 'einstein':
            defects = [v['defect'] for v in values]
            worst = int(np.argmax(defects))
            summary = {'max_defect': max(defects), 'min_defect': min(defects),
                       'mean_values': sorted({round(v['mean'], 9) for v in values}),
                       'worst_point': points[worst]['index'],
                       'witness': {k: v for k, v in values[worst].items() if k not in ('mean', 'defect')}}
            verdict = einstein_verdict(defects, numerics.einstein_yes_tol, numerics.einstein_no_threshold)
        elif check == 'willmore':
            worst = max(v['max_residual'] for v in values)
            summary = {'max_residual': worst}
            verdict = 'YES' if worst < numerics.willmore_tol else 'NO'
        elif check == 'condition-a':
            holding = [p['index'] for p in points if p[check]['holds']]
            summary = {'points_holding': holding}
            verdict = 'YES' if holding else 'NO'
        elif check == 'blocks':
            summary = {
                'max_diagonal_residual': max(v['max_diagonal_residual'] for v in values),
                'max_norm_gap': max(v['max_norm_gap'] for v in values),
                'max_ricci_gap': max(v['ricci_split']['gap'] for v in values),
            }
            verdict = 'PASS' if all(v['passed'] for v in values) else 'FAIL'
        elif check == 'span':
            summary = {'min_span_dimension': min(v['span_dimension'] for v in values),
                       'dim_m_plus': values[0]['dim_m_plus'],
                       'deficient_points': [p['index'] for p in points if p[check]['deficient']]}
            verdict = 'DEFICIENT' if summary['deficient_points'] else 'FULL'
        elif check == 'oracle':
            signs = sorted({v['sign'] for v in values})
            summary = {'signs': signs, 'max_diff': max(v['max_diff'] for v in values)}
            verdict = 'PASS' if len(signs) == 1 and all(v['passed'] for v in values) else 'FAIL'
        else:
            key = 'max_deviation' if check == 'spectrum' else 'max_residual'
            summary = {key: max(v[key] for v in values)}
            verdict = 'PASS' if all(v['passed'] for v in values) else 'FAIL'
        return {'summary': summary, 'verdict': verdict}

    # ---------- 命令 ----------

    def _points(self, built: BuiltCase, focal: str, checks: Sequence[str], samples: int, seed: int):
        jobs = self.point_jobs(built, focal, samples, seed)
        info(f"{built.spec.name} M{'+' if focal == 'plus' else '-'}: {len(jobs)} points, checks {list(checks)}")
        return parallel_map(jobs, self.evaluate_point, self.workers, built, focal, checks)

    def run_check(self, run: RunConfig) -> Dict[str, Any]:
        """
        单项检查的完整报告 {config, case, focal, check, per_point, aggregate, verdict, expected, match}
        :raises InputError: span 与 oracle 只适用于 FKM 的 M₊
        """
        built = self.build(run.case)
        if run.check in FKM_ONLY_CHECKS and not (built.is_fkm and run.focal == 'plus'):
            raise InputError(f"check '{run.check}' is only defined on M+ of FKM cases")
        points = self._points(built, run.focal, (run.check,), run.samples, run.seed)
        aggregate = self.aggregate(run.check, points)
        expected = expected_verdict(built, run.focal, run.check)
        match = expected is None or aggregate['verdict'] == expected
        if not match:
            warning(f"{built.expected_key} {run.focal} {run.check}: observed {aggregate['verdict']}, "
                    f"expected {expected}")
        return {
            'config': run.to_dict(),
            'case': self.describe(built),
            'focal': run.focal,
            'check': run.check,
            'per_point': points,
            'aggregate': aggregate['summary'],
            'verdict': aggregate['verdict'],
            'expected': expected,
            'match': match,
        }

    def run_cartan_munzner(self, run: RunConfig) -> Dict[str, Any]:
        """Cartan-Münzner 恒等式与球面限制恒等式"""
        built = self.build(run.case)
        m1, m2 = built.multiplicities
        rng_cm, rng_sphere = derive_rngs(run.seed, 2, *case_salt(run.case, 'cm'))
        cm = verify_cartan_munzner(built.form, m1, m2, run.samples, run.tol, rng_cm)
        sphere = sphere_restriction_check(built.form, m1, m2, run.samples, run.tol, rng_sphere)
        passed = cm.passed and sphere.passed
        return {
            'config': run.to_dict(),
            'case': self.describe(built),
            'max_grad_residual': cm.max_grad_residual,
            'max_lap_residual': cm.max_lap_residual,
            'sphere': sphere.to_dict(),
            'pass': passed,
        }

    def run_theorem2(self, run: RunConfig, cases: Optional[List[CaseSpec]] = None) -> Dict[str, Any]:
        """
        内置案例逐个焦子流形的 Einstein 与 Willmore 判定，附期望列
        """
        rows = []
        for spec in cases or builtin_cases():
            built = self.build(spec)
            for focal in ('plus', 'minus'):
                points = self._points(built, focal, THEOREM_CHECKS, run.samples, run.seed)
                einstein = self.aggregate('einstein', points)
                willmore = self.aggregate('willmore', points)
                row = {
                    'case': spec.name,
                    'key': built.expected_key,
                    'focal': focal,
                    'label': built.labels.get(focal),
                    'dim': built.tangent_dim(focal),
                    'einstein': {'observed': einstein['verdict'],
                                 'expected': expected_verdict(built, focal, 'einstein'),
                                 'max_defect': einstein['summary']['max_defect'],
                                 'min_defect': einstein['summary']['min_defect']},
                    'willmore': {'observed': willmore['verdict'],
                                 'expected': expected_verdict(built, focal, 'willmore'),
                                 'max_residual': willmore['summary']['max_residual']},
                }
                row['match'] = all(row[c]['expected'] in (None, row[c]['observed']) for c in THEOREM_CHECKS)
                if not row['match']:
                    warning(f"theorem2 mismatch at {spec.name} {focal}")
                rows.append(row)
        return {'config': run.to_dict(), 'rows': rows, 'match': all(r['match'] for r in rows)}

    @staticmethod
    def describe(built: BuiltCase) -> Dict[str, Any]:
        data = built.spec.to_dict()
        data.update({'key': built.expected_key, 'multiplicities': list(built.multiplicities),
                     'ambient_dim': built.form.ambient_dim})
        if built.q is not None:
            data['q'] = built.q
        if built.special_family:
            data['special_family'] = built.special_family
        if built.labels:
            data['labels'] = built.labels
        return data

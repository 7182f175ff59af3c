# 等参焦子流形数值实验室
# 构造 Clifford 系统，验证 Cartan-Münzner 恒等式，在焦子流形上检查 Einstein 与 Willmore 性质

import argparse
import json
import sys
from pathlib import Path

# 添加项目根目录到Python路径
current_dir = Path(__file__).resolve().parent
sys.path.insert(0, str(current_dir))

from src.core.cases import CHECKS, CaseSpec, RunConfig, focal_from_text, signs_from_text
from src.core.clifford import build_clifford_system, system_from_dict, system_to_dict, trace_invariant, verify_clifford
from src.core.config_manager import Config
from src.core.errors import FocalVarietyError, InputError, InvalidNormalError, SamplingError
from src.core.runner import VerificationRunner
from src.i18n.i18n import set_locale, t
from src.utils import set_log_file, set_log_level
from src.utils.cli_utils import (
    format_json, handle_exception, print_error, print_info, print_success, print_table, print_warning,
)

# 退出码
EXIT_MATCH = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

CM_DEFAULT_SAMPLES = 100


def emit_report(report, args, config):
    """报告写到 --output 指定的文件，否则写到 stdout"""
    text = format_json(report, indent=int(config.get('output.indent', 2)))
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + '\n', encoding='utf-8')
        print_info(t("report_written", path=str(path)))
    else:
        print(text)


def case_from_args(args):
    """由 --case、--m、--k、--signs、--extended 构造案例"""
    if args.case != 'fkm':
        return CaseSpec(args.case)
    if args.m is None:
        raise InputError(t("error_missing_m"))
    if args.extended:
        return CaseSpec('fkm', args.m, extended=True)
    k = 1 if args.k is None else args.k
    return CaseSpec('fkm', args.m, k, signs_from_text(args.signs, k))


def clifford_command(args, config):
    """处理 clifford build|verify 命令"""
    if args.action == 'build':
        if args.m is None or args.k is None:
            raise InputError(t("error_missing_m_k"))
        system = build_clifford_system(args.m, args.k, signs_from_text(args.signs, args.k))
        report = verify_clifford(system)
        document = system_to_dict(system)
        document['verification'] = report.to_dict()
        if system.m == 4:
            document['trace_invariant'] = trace_invariant(system).to_dict()
            print_info(t("q_invariant", q=document['trace_invariant']['q']))
        emit_report(document, args, config)
    else:
        if not args.file:
            raise InputError(t("error_missing_file"))
        try:
            with open(args.file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(t("error_read_file", path=args.file, error=str(e))) from e
        system = system_from_dict(data)
        report = verify_clifford(system)
        print_table(
            [t("col_residual"), t("col_value")],
            [['symmetry', f"{report.symmetry_residual:.3e}"],
             ['involution', f"{report.involution_residual:.3e}"],
             ['trace', f"{report.trace_residual:.3e}"],
             ['anticommutation', f"{report.anticommutation_residual:.3e}"]],
            title=t("clifford_table_title", m=system.m, l=system.l),
        )
        emit_report(report, args, config)

    if report.passed:
        print_success(t("clifford_passed"))
    else:
        print_warning(t("clifford_failed"))
    return report.passed


def cm_command(args, config):
    """处理 cm 命令：Cartan-Münzner 恒等式"""
    run = RunConfig(
        command='cm',
        case=case_from_args(args),
        seed=args.seed if args.seed is not None else int(config.get('sampling.seed', 42)),
        samples=args.samples if args.samples is not None else CM_DEFAULT_SAMPLES,
        tol=args.tol if args.tol is not None else config.numerics().tol,
    )
    runner = VerificationRunner(config, args.threads)
    report = runner.run_cartan_munzner(run)
    emit_report(report, args, config)
    if report['pass']:
        print_success(t("cm_passed", case=run.case.name))
    else:
        print_warning(t("cm_failed", case=run.case.name))
    return report['pass']


def check_command(args, config):
    """处理 check 命令：单项检查与期望判定比较"""
    run = RunConfig(
        command='check',
        case=case_from_args(args),
        focal=focal_from_text(args.focal),
        check=args.check,
        seed=args.seed if args.seed is not None else int(config.get('sampling.seed', 42)),
        samples=args.samples if args.samples is not None else int(config.get('sampling.samples', 20)),
        tol=config.numerics().tol,
    )
    runner = VerificationRunner(config, args.threads)
    report = runner.run_check(run)
    emit_report(report, args, config)
    message = t("check_summary", check=run.check, case=run.case.name, focal=run.focal,
                verdict=report['verdict'], expected=report['expected'])
    if report['match']:
        print_success(message)
    else:
        print_warning(message)
    return report['match']


def theorem2_command(args, config):
    """处理 theorem2 命令：内置案例的 Einstein/Willmore 判定表"""
    run = RunConfig(
        command='theorem2',
        seed=args.seed if args.seed is not None else int(config.get('sampling.seed', 42)),
        samples=args.samples if args.samples is not None else int(config.get('sampling.samples', 20)),
        tol=config.numerics().tol,
    )
    runner = VerificationRunner(config, args.threads)
    report = runner.run_theorem2(run)

    rows = []
    for row in report['rows']:
        rows.append([
            row['key'],
            'M+' if row['focal'] == 'plus' else 'M-',
            row['dim'],
            f"{row['einstein']['observed']} / {row['einstein']['expected']}",
            f"{row['willmore']['observed']} / {row['willmore']['expected']}",
            t("yes") if row['match'] else t("no"),
        ])
    print_table(
        [t("col_case"), t("col_focal"), t("col_dim"), t("col_einstein"), t("col_willmore"), t("col_match")],
        rows,
        title=t("theorem2_table_title", seed=run.seed, samples=run.samples),
    )
    emit_report(report, args, config)
    return report['match']


def add_case_arguments(parser, with_focal=False):
    parser.add_argument('--case', choices=['fkm', 'so5-real', 'so5-complex'], default='fkm', help=t("cli_case_help"))
    parser.add_argument('--m', type=int, help=t("cli_m_help"))
    parser.add_argument('--k', type=int, help=t("cli_k_help"))
    parser.add_argument('--signs', help=t("cli_signs_help"))
    parser.add_argument('--extended', action='store_true', help=t("cli_extended_help"))
    if with_focal:
        parser.add_argument('--focal', required=True, help=t("cli_focal_help"))


def add_sampling_arguments(parser):
    parser.add_argument('--samples', type=int, help=t("cli_samples_help"))
    parser.add_argument('--seed', type=int, help=t("cli_seed_help"))


def main():
    """主函数"""
    parser = argparse.ArgumentParser(
        prog='isopar-lab',
        description=t("cli_description"),
        epilog=t("cli_epilog"),
        formatter_class=argparse.RawDescriptionHelpFormatter
    )

    parser.add_argument('--lang', help=t("cli_lang_help"))
    parser.add_argument('--log-file', help=t("cli_log_file_help"))
    parser.add_argument('--log-level', help=t("cli_log_level_help"))
    parser.add_argument('--config', help=t("cli_config_help"))
    parser.add_argument('--threads', type=int, help=t("cli_threads_help"))
    parser.add_argument('--output', help=t("cli_output_help"))

    subparsers = parser.add_subparsers(dest='command', help=t("subcommands_help"))

    # Clifford 系统
    clifford_parser = subparsers.add_parser('clifford', help=t("clifford_command_help"))
    clifford_parser.add_argument('action', choices=['build', 'verify'], help=t("cli_clifford_action_help"))
    clifford_parser.add_argument('file', nargs='?', help=t("cli_file_help"))
    clifford_parser.add_argument('--m', type=int, help=t("cli_m_help"))
    clifford_parser.add_argument('--k', type=int, help=t("cli_k_help"))
    clifford_parser.add_argument('--signs', help=t("cli_signs_help"))

    # Cartan-Münzner 恒等式
    cm_parser = subparsers.add_parser('cm', help=t("cm_command_help"))
    add_case_arguments(cm_parser)
    add_sampling_arguments(cm_parser)
    cm_parser.add_argument('--tol', type=float, help=t("cli_tol_help"))

    # 单项检查
    check_parser = subparsers.add_parser('check', help=t("check_command_help"))
    check_parser.add_argument('check', choices=list(CHECKS), help=t("cli_check_help"))
    add_case_arguments(check_parser, with_focal=True)
    add_sampling_arguments(check_parser)

    # 判定表
    theorem2_parser = subparsers.add_parser('theorem2', help=t("theorem2_command_help"))
    add_sampling_arguments(theorem2_parser)

    # --output 在子命令前后都可以给出；子命令中未给出时不覆盖全局值
    for sub in (clifford_parser, cm_parser, check_parser, theorem2_parser):
        sub.add_argument('--output', default=argparse.SUPPRESS, help=t("cli_output_help"))

    args = parser.parse_args()

    if args.config and not Path(args.config).exists():
        print_error(t("error_config_missing", path=args.config))
        sys.exit(EXIT_INPUT)
    config = Config(args.config)

    # 设置国际化
    set_locale(args.lang or config.get('i18n.locale', 'en'))

    # 设置日志
    set_log_file(args.log_file or config.get('logging.file') or None, config.get('logging.format'))
    set_log_level(args.log_level or config.get('logging.level', 'WARNING'))

    # 如果没有提供命令，显示帮助
    if not args.command:
        parser.print_help()
        return

    if not config.validate_config():
        print_error(t("error_config_invalid"))
        sys.exit(EXIT_INPUT)

    try:
        success = False
        if args.command == 'clifford':
            success = clifford_command(args, config)
        elif args.command == 'cm':
            success = cm_command(args, config)
        elif args.command == 'check':
            success = check_command(args, config)
        elif args.command == 'theorem2':
            success = theorem2_command(args, config)

        if not success:
            sys.exit(EXIT_MISMATCH)

    except InputError as e:
        print_error(t("input_error", error=str(e)))
        sys.exit(EXIT_INPUT)
    except (SamplingError, FocalVarietyError, InvalidNormalError) as e:
        print_error(t("numerical_error", error=str(e)))
        sys.exit(EXIT_NUMERICAL)
    except Exception as e:
        handle_exception(e, args.command)
        sys.exit(EXIT_MISMATCH)


if __name__ == "__main__":
    main()

"""
Command-line interface.

Subcommands: survey, noise-sweep, bounds, net, ghz, optimize, serve.
Every subcommand accepts ``--config PATH`` pointing at a plain-text file of
``key = value`` lines whose keys mirror the long flag names; flags given on
the command line override the file.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from typing import Dict, List, Optional, Sequence

from dotenv import dotenv_values

from bellsurvey import config
from bellsurvey.belleval import qnl
from bellsurvey.bounds import BoundQuery, net_params, theorem_bound
from bellsurvey.errors import BellSurveyError, ValidationError
from bellsurvey.harness import emit_report, noise_sweep, records_csv, survey
from bellsurvey.models import ExperimentConfig
from bellsurvey.optimize import SeesawConfig, mermin_reference, seesaw_maximize
from bellsurvey.qcore import ghz_state
from bellsurvey.storage import load_state, write_json, write_text

logger = logging.getLogger(__name__)

MODE_ALIASES = {'fixed': 'fixed_settings', 'fixed_settings': 'fixed_settings', 'optimized': 'optimized'}

# Flags that must end up set, from the command line or the config file
REQUIRED = {
    'survey': ('d', 'n', 'trials', 'seed', 'mode', 'v_grid', 'out'),
    'noise-sweep': ('d', 'n', 'trials', 'seed', 'mode', 'v_grid', 'out', 'lambdas'),
    'bounds': ('theorem', 'd', 'n', 'v'),
    'net': ('d', 'n', 'delta'),
    'ghz': ('n',),
    'optimize': ('state_file',),
    'serve': (),
}


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def delta_value(text: str):
    if text == 'auto':
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"delta must be a number or 'auto', got {text!r}")


def _add_seesaw_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--restarts', type=int, default=config.DEFAULT_RESTARTS)
    parser.add_argument('--max-sweeps', type=int, default=config.DEFAULT_MAX_SWEEPS)
    parser.add_argument('--tol', type=float, default=config.DEFAULT_IMPROVEMENT_TOL)


def _add_survey_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--d', type=int)
    parser.add_argument('--n', type=int)
    parser.add_argument('--trials', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--mode', choices=sorted(MODE_ALIASES))
    _add_seesaw_flags(parser)
    parser.add_argument('--v-grid', type=float_list)
    parser.add_argument('--out')
    parser.add_argument('--workers', type=int, default=config.DEFAULT_WORKERS)
    parser.add_argument('--format', choices=['csv', 'json'], default='csv')
    parser.add_argument('--timing', action='store_true', help='record wall_ms per trial')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key = value file mirroring the long flags')
    common.add_argument('--log-level', default=config.LOG_LEVEL)

    parser = argparse.ArgumentParser(prog='bellsurvey', description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('survey', parents=[common], help='Monte Carlo survey over Haar states')
    _add_survey_flags(p)

    p = commands.add_parser('noise-sweep', parents=[common], help='survey repeated per noise level')
    _add_survey_flags(p)
    p.add_argument('--lambdas', type=float_list)

    p = commands.add_parser('bounds', parents=[common], help='evaluate a concentration bound')
    p.add_argument('--theorem', type=int, choices=[1, 2])
    p.add_argument('--d', type=int)
    p.add_argument('--n', type=int)
    p.add_argument('--v', type=float)
    p.add_argument('--delta', type=delta_value, default='auto')
    p.add_argument('--lambda', dest='lam', type=float, default=0.0)

    p = commands.add_parser('net', parents=[common], help='epsilon-net parameters')
    p.add_argument('--d', type=int)
    p.add_argument('--n', type=int)
    p.add_argument('--delta', type=float)

    p = commands.add_parser('ghz', parents=[common], help='GHZ reference value')
    p.add_argument('--n', type=int)
    p.add_argument('--alpha', type=float, default=1 / math.sqrt(2))
    p.add_argument('--beta', type=float, default=1 / math.sqrt(2))

    p = commands.add_parser('optimize', parents=[common], help='see-saw on a state file')
    p.add_argument('--state-file')
    _add_seesaw_flags(p)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--lambda', dest='lam', type=float, default=None)

    p = commands.add_parser('serve', parents=[common], help='start the HTTP service')
    p.add_argument('--host', default='127.0.0.1')
    p.add_argument('--port', type=int, default=8000)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise ValidationError(f"unknown command {command!r}")


def load_config_file(path: str, sub: argparse.ArgumentParser) -> Dict[str, str]:
    """
    Read ``key = value`` lines and map keys onto the subcommand's destinations.

    Raises:
        ValidationError: unreadable file or a key no flag of the subcommand uses
    """
    values = dotenv_values(path)
    if not values and not _readable(path):
        raise ValidationError(f"cannot read config file {path}")
    dests = {}
    for action in sub._actions:
        for option in action.option_strings:
            dests[option.lstrip('-').replace('-', '_')] = action.dest
    defaults = {}
    for key, value in values.items():
        name = key.strip().lower().replace('-', '_')
        if name not in dests:
            raise ValidationError(f"{path}: unknown key {key!r}")
        if value is not None:
            defaults[dests[name]] = value
    return defaults


def _readable(path: str) -> bool:
    try:
        with open(path, 'r', encoding='utf-8'):
            return True
    except OSError:
        return False


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = _subparser(parser, args.command)
        defaults = load_config_file(args.config, sub)
        if defaults.get('timing', '').lower() in ('1', 'true', 'yes'):
            defaults['timing'] = True
        elif 'timing' in defaults:
            defaults['timing'] = False
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [name for name in REQUIRED[args.command] if getattr(args, name, None) is None]
    if missing:
        parser.error(f"{args.command}: missing " + ", ".join('--' + m.replace('_', '-') for m in missing))
    return args


def _experiment(args: argparse.Namespace, lambdas=(0.0,)) -> ExperimentConfig:
    return ExperimentConfig(
        d=args.d,
        n_sites=args.n,
        trials=args.trials,
        master_seed=args.seed,
        mode=MODE_ALIASES[args.mode],
        noise_lambdas=tuple(lambdas),
        v_grid=tuple(args.v_grid),
        seesaw=SeesawConfig(restarts=args.restarts, max_sweeps=args.max_sweeps,
                            improvement_tol=args.tol),
        output_path=args.out,
        workers=args.workers,
        record_timing=args.timing,
    )


def _print_json(data) -> None:
    print(json.dumps(data, indent=2))


def _summary_view(summary) -> dict:
    data = summary.to_dict()
    data.pop('records')
    return data


def cmd_survey(args: argparse.Namespace) -> None:
    experiment = _experiment(args)
    summary = survey(experiment)
    emit_report(summary, args.format, args.out)
    _print_json(_summary_view(summary))


def cmd_noise_sweep(args: argparse.Namespace) -> None:
    experiment = _experiment(args, args.lambdas)
    summaries = noise_sweep(experiment)
    if args.format == 'csv':
        write_text(args.out, records_csv([r for s in summaries for r in s.records]))
    else:
        write_json(args.out, {'summaries': [s.to_dict() for s in summaries]})
    _print_json([_summary_view(s) for s in summaries])


def cmd_bounds(args: argparse.Namespace) -> None:
    query = BoundQuery(d=args.d, n_sites=args.n, v=args.v, delta=args.delta, lam=args.lam)
    _print_json(theorem_bound(query, args.theorem).to_dict())


def cmd_net(args: argparse.Namespace) -> None:
    _print_json(asdict(net_params(args.d, args.n, args.delta)))


def cmd_ghz(args: argparse.Namespace) -> None:
    settings, reference = mermin_reference(args.n)
    state = ghz_state(args.alpha, args.beta, args.n)
    value = qnl(state, settings)
    _print_json({
        'n_sites': args.n,
        'alpha': args.alpha,
        'beta': args.beta,
        'mermin_reference': reference,
        'qnl': value,
        'difference': value - reference,
    })


def cmd_optimize(args: argparse.Namespace) -> None:
    state = load_state(args.state_file)
    seesaw = SeesawConfig(restarts=args.restarts, max_sweeps=args.max_sweeps,
                          improvement_tol=args.tol, seed=args.seed)
    result = seesaw_maximize(state, seesaw, noise=args.lam, workers=args.workers)
    _print_json(result.to_dict())


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)


COMMANDS = {
    'survey': cmd_survey,
    'noise-sweep': cmd_noise_sweep,
    'bounds': cmd_bounds,
    'net': cmd_net,
    'ghz': cmd_ghz,
    'optimize': cmd_optimize,
    'serve': cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; package errors exit with status 2"""
    try:
        args = parse_args(argv)
    except BellSurveyError as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return 2
    logging.basicConfig(level=str(args.log_level).upper(), format=config.LOG_FORMAT)
    try:
        COMMANDS[args.command](args)
    except BellSurveyError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

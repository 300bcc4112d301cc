"""
The lifeplan command line: elicit, evaluate, optimize and simulate.

Exit status is 0 on success (infeasible plans included), 1 for usage, configuration and domain
errors, and 2 for numerical failures. Logs go to stderr; results go to stdout.

Values that start with a minus sign must be attached with '=', for example
--prior-moments=-0.5,0.5,1.5,1.
"""
import argparse
import logging
import sys
import typing

import lifeplan
from lifeplan.cli import config as config_module
from lifeplan.cli import output
from lifeplan.cli.config import RunConfig
from lifeplan.data_types import exceptions
from lifeplan.design_layer import bayes_design
from lifeplan.design_layer import prior as prior_module
from lifeplan.design_layer import search
from lifeplan.model_layer import expectations
from lifeplan.model_layer import fisher
from lifeplan.model_layer import uhcs
from lifeplan.model_layer.lifetime_model import LogNormalParams

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

# Prior predictive lifetime quantiles reported by elicit.
PREDICTIVE_LEVELS = (0.1, 0.5, 0.9)

# (flag, config key, metavar, help)
_SETTING_FLAGS = (
    ('--prior-moments', 'prior_moments', 'MU,VARMU,TAU,VARTAU', 'prior means and variances'),
    ('--prior-hyper', 'prior_hyper', 'A1,B1,P2,Q2', 'prior hyperparameters'),
    ('--prior-preset', 'prior_preset', 'NAME', 'a named prior: prior1 or prior2'),
    ('--cost', 'cost', 'CF,CT', 'cost per failure and per unit of test time'),
    ('--budget', 'budget', 'LIST', 'comma-separated budgets'),
    ('--n', 'n', 'FIXED', 'fixed sample size'),
    ('--n-max', 'n_max', 'MAX', 'search sample sizes 2..MAX'),
    ('--scheme', 'scheme', 'N,R,L,T1,T2', 'a Type-II UHCS plan'),
    ('--theta', 'theta', 'MU,TAU', 'lifetime parameters (default: the prior mean)'),
    ('--draws', 'draws', 'N', 'number of prior draws'),
    ('--seed', 'seed', 'S', 'random seed'),
    ('--reps', 'reps', 'R', 'simulation replications'),
    ('--search', 'search', 'MODE', 'free, linked:KAPPA or both'),
    ('--format', 'format', 'FORMAT', 'table, csv or json'),
    ('--workers', 'workers', 'W', 'parallel workers'),
    ('--l', 'l', 'L', 'use this l for every r instead of ceil(r/2)'),
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='key=value settings file')
    for flag, key, metavar, help_text in _SETTING_FLAGS:
        common.add_argument(flag, dest=key, metavar=metavar, help=help_text)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='log progress to stderr')
    verbosity.add_argument('--debug', action='store_true', help='log details to stderr')

    parser = argparse.ArgumentParser(
        prog='lifeplan',
        description='Bayesian optimal Type-II unified hybrid censoring plans for log-normal '
                    'lifetimes.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + lifeplan.__version__)
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    commands.add_parser('elicit', parents=[common],
                        help='convert prior moments to hyperparameters')
    commands.add_parser('evaluate', parents=[common], help='evaluate the criteria of one plan')
    commands.add_parser('optimize', parents=[common], help='search for the optimal plan')
    commands.add_parser('simulate', parents=[common],
                        help='simulate a plan and compare with its expectations')
    return parser


def configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def load_run_config(arguments: argparse.Namespace) -> RunConfig:
    file_values = {}
    if arguments.config:
        file_values = config_module.read_config_file(arguments.config)
    flag_values = {key: getattr(arguments, key) for _, key, _, _ in _SETTING_FLAGS}
    return config_module.build_config(file_values, flag_values)


def _meta(config: RunConfig, command: str) -> typing.Dict[str, typing.Any]:
    return {'command': command, 'seed': config.seed, 'draws': config.mc_draws}


def _scheme_columns(scheme: uhcs.SchemeParams) -> typing.Dict[str, typing.Any]:
    return {'n': scheme.n, 'r': scheme.r, 'l': scheme.l, 'T1': scheme.T1, 'T2': scheme.T2}


def _theta(config: RunConfig) -> LogNormalParams:
    if config.theta is not None:
        return config.theta
    return config.require_prior().mean_params


def cmd_elicit(config: RunConfig, stream: typing.TextIO) -> int:
    """Print the hyperparameters of the configured prior. CSV and JSON rows also carry the
    moments it implies and quantiles of the prior predictive lifetime."""
    prior = config.require_prior()
    if config.output_format == 'table':
        stream.write('%s\n' % (prior,))
    else:
        row = dict({'a1': prior.a1, 'b1': prior.b1, 'p2': prior.p2, 'q2': prior.q2},
                   **prior.moments()._asdict())
        for level in PREDICTIVE_LEVELS:
            row['life_q%02d' % round(100 * level)] = prior.predictive_quantile(level)
        output.emit([row], config.output_format, stream, _meta(config, 'elicit'))
    return EXIT_OK


def cmd_evaluate(config: RunConfig, stream: typing.TextIO) -> int:
    """Evaluate one plan: the prior-averaged criteria, the cost against each budget, and the
    fixed-theta expectations and information at the prior mean (or --theta)."""
    scheme = config.require_scheme()
    prior = config.require_prior()
    sample = prior_module.sample_prior(prior, config.mc_draws, config.seed)
    values = bayes_design.criteria(scheme, sample)
    theta = _theta(config)
    information = fisher.fisher_uhcs(scheme, theta)
    diagnostics = {
        'theta_mu': theta.mu,
        'theta_tau': theta.tau,
        'exp_failures_at_theta': expectations.expected_failures(scheme, theta),
        'exp_duration_at_theta': expectations.expected_duration(scheme, theta),
        'i_mm': information.i_mm,
        'i_tt': information.i_tt,
        'i_mt': information.i_mt,
        'log_det_at_theta': fisher.log_det(information),
        'log_det_complete_at_theta': fisher.log_det(
            fisher.complete_sample_information(scheme.n, theta)),
        'prior_p_fail_by_T1': prior.predictive_cdf(scheme.T1),
        'prior_p_fail_by_T2': prior.predictive_cdf(scheme.T2),
    }
    base = dict(_scheme_columns(scheme), objective=values.psi, objective_se=values.psi_se,
                exp_failures=values.psi_fail, exp_duration=values.psi_dur)
    rows = []
    if config.cost is not None and config.budgets:
        for cost in config.cost_models():
            exp_cost = cost.total(values.psi_fail, values.psi_dur)
            rows.append(dict(base, c_b=cost.c_b, exp_cost=exp_cost,
                             feasible=cost.within_budget(exp_cost), **diagnostics))
    else:
        rows.append(dict(base, **diagnostics))
    output.emit(rows, config.output_format, stream, _meta(config, 'evaluate'))
    return EXIT_OK


def cmd_optimize(config: RunConfig, stream: typing.TextIO) -> int:
    """One optimal plan per (budget, search mode)."""
    prior = config.require_prior()
    if config.n is None and config.n_max is None:
        raise exceptions.ConfigError("Give --n FIXED or --n-max MAX.")
    sample = prior_module.sample_prior(prior, config.mc_draws, config.seed)
    rows = []
    for cost in config.cost_models():
        for options in config.search_options():
            _logger.info("Optimizing for budget %g in %s mode.", cost.c_b, options.label)
            solution = search.algorithm_one(sample, cost, n=config.n, n_max=config.n_max,
                                            options=options)
            if not solution.feasible:
                _logger.warning("No feasible plan within budget %g (%s mode).", cost.c_b,
                                options.label)
            rows.append(dict(solution.as_row(), c_b=cost.c_b))
    output.emit(rows, config.output_format, stream, _meta(config, 'optimize'))
    return EXIT_OK


def cmd_simulate(config: RunConfig, stream: typing.TextIO) -> int:
    """Simulate a plan at theta, next to the analytic expectations."""
    scheme = config.require_scheme()
    theta = _theta(config)
    if config.reps == 1:
        outcome = uhcs.simulate(scheme, theta, config.seed)
        if config.output_format == 'table':
            stream.write(outcome.to_record() + '\n')
        else:
            row = {'case': str(outcome.case_id), 'd': outcome.d, 'xi': outcome.xi,
                   'failures': ' '.join(repr(x) for x in outcome.observed_failures)}
            output.emit([row], config.output_format, stream, _meta(config, 'simulate'))
        return EXIT_OK
    summary = uhcs.summarize(scheme, theta, config.reps, config.seed, config.workers)
    row = dict(_scheme_columns(scheme), theta_mu=theta.mu, theta_tau=theta.tau,
               reps=summary.reps,
               mean_d=summary.mean_d, se_d=summary.se_d,
               analytic_d=expectations.expected_failures(scheme, theta),
               mean_xi=summary.mean_xi, se_xi=summary.se_xi,
               analytic_xi=expectations.expected_duration(scheme, theta))
    for case in uhcs.Case:
        row['freq_%s' % case] = summary.case_frequencies[case]
    output.emit([row], config.output_format, stream, _meta(config, 'simulate'))
    return EXIT_OK


COMMANDS: typing.Dict[str, typing.Callable[[RunConfig, typing.TextIO], int]] = {
    'elicit': cmd_elicit,
    'evaluate': cmd_evaluate,
    'optimize': cmd_optimize,
    'simulate': cmd_simulate,
}


def main(argv: typing.Optional[typing.Sequence[str]] = None,
         stream: typing.Optional[typing.TextIO] = None) -> int:
    """Run one command and return its exit status."""
    stream = sys.stdout if stream is None else stream
    parser = build_parser()
    try:
        arguments = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_OK if error.code == 0 else EXIT_USAGE
    configure_logging(arguments.verbose, arguments.debug)
    try:
        config = load_run_config(arguments)
        return COMMANDS[arguments.command](config, stream)
    except (exceptions.ConfigError, exceptions.DomainError) as error:
        sys.stderr.write('lifeplan %s: error: %s\n' % (arguments.command, error))
        return EXIT_USAGE
    except exceptions.NumericalError as error:
        sys.stderr.write('lifeplan %s: numerical failure: %s\n' % (arguments.command, error))
        return EXIT_NUMERICAL

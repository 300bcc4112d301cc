"""
Run configuration for the command line.

Settings come from three layers, later ones winning: built-in defaults, a flat key=value file
named by --config, and command-line flags. Recognized file keys:

    prior_moments  MU,VARMU,TAU,VARTAU      prior_hyper  A1,B1,P2,Q2      prior_preset  prior1|prior2
    cost           CF,CT                    budget       CB[,CB...]
    n              N                        n_max        N
    scheme         N,R,L,T1,T2              theta        MU,TAU
    draws          N                        seed         S                reps          R
    search         free|linked[:KAPPA]|both format       table|csv|json   workers       W
    l              L

Blank lines and text after '#' are ignored.
"""
import dataclasses
import logging
import pathlib
import typing

from lifeplan.data_types import exceptions
from lifeplan.design_layer import prior as prior_module
from lifeplan.design_layer import search
from lifeplan.design_layer.bayes_design import CostModel
from lifeplan.design_layer.prior import NormalGammaPrior
from lifeplan.model_layer import uhcs
from lifeplan.model_layer.lifetime_model import LogNormalParams

_logger = logging.getLogger(__name__)

CONFIG_KEYS = ('prior_moments', 'prior_hyper', 'prior_preset', 'cost', 'budget', 'n', 'n_max',
               'scheme', 'theta', 'draws', 'seed', 'reps', 'search', 'format', 'workers', 'l')

PRIOR_KEYS = ('prior_moments', 'prior_hyper', 'prior_preset')

OUTPUT_FORMATS = ('table', 'csv', 'json')

DEFAULT_DRAWS = 1000
DEFAULT_SEED = 20240601
DEFAULT_REPS = 10000


def read_config_file(path: typing.Union[str, pathlib.Path]) -> typing.Dict[str, str]:
    """Parse a key=value file into raw string values. Unknown keys are dropped with a warning."""
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as error:
        raise exceptions.ConfigError("Cannot read config file %s: %s" % (path, error)) from error
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise exceptions.ConfigError("%s:%d: expected key = value, got %r."
                                         % (path, number, line))
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.replace('-', '_')
        if key not in CONFIG_KEYS:
            _logger.warning("%s:%d: ignoring unknown key %r.", path, number, key)
            continue
        values[key] = value
    _logger.info("Loaded %d settings from %s.", len(values), path)
    return values


def parse_floats(text: str, count: typing.Optional[int], key: str) -> typing.Tuple[float, ...]:
    """A comma-separated list of numbers, of exactly count entries if count is given."""
    try:
        values = tuple(float(part) for part in text.split(',') if part.strip())
    except ValueError as error:
        raise exceptions.ConfigError("%s: cannot parse %r as numbers." % (key, text)) from error
    if count is not None and len(values) != count:
        raise exceptions.ConfigError("%s: expected %d comma-separated values, got %d."
                                     % (key, count, len(values)))
    if not values:
        raise exceptions.ConfigError("%s: no values given." % (key,))
    return values


def parse_int(text: str, key: str, minimum: int = 1) -> int:
    try:
        value = int(text)
    except ValueError as error:
        raise exceptions.ConfigError("%s: cannot parse %r as an integer." % (key, text)) from error
    if value < minimum:
        raise exceptions.ConfigError("%s: must be at least %d; got %d." % (key, minimum, value))
    return value


def parse_scheme(text: str) -> uhcs.SchemeParams:
    values = parse_floats(text, 5, 'scheme')
    for name, value in zip(('n', 'r', 'l'), values[:3]):
        if value != int(value):
            raise exceptions.ConfigError("scheme: %s must be an integer; got %r." % (name, value))
    scheme = uhcs.SchemeParams(int(values[0]), int(values[1]), int(values[2]), values[3],
                               values[4])
    return uhcs.validate(scheme)


def parse_search(text: str) -> typing.Tuple[search.SearchOptions, ...]:
    """'free', 'linked', 'linked:KAPPA' or 'both' (free and linked with kappa 2)."""
    text = text.strip().lower()
    if text == 'free':
        return (search.SearchOptions(mode=search.FREE),)
    if text == 'both':
        return search.SearchOptions(mode=search.FREE), search.SearchOptions(mode=search.LINKED)
    if text == 'linked' or text.startswith('linked:'):
        kappa = 2.0
        if ':' in text:
            kappa = parse_floats(text.split(':', 1)[1], 1, 'search')[0]
        return (search.SearchOptions(mode=search.LINKED, kappa=kappa),)
    raise exceptions.ConfigError("search: expected free, linked[:KAPPA] or both; got %r." % (text,))


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Fully parsed settings for one command."""
    prior: typing.Optional[NormalGammaPrior] = None
    cost: typing.Optional[typing.Tuple[float, float]] = None
    budgets: typing.Tuple[float, ...] = ()
    n: typing.Optional[int] = None
    n_max: typing.Optional[int] = None
    scheme: typing.Optional[uhcs.SchemeParams] = None
    theta: typing.Optional[LogNormalParams] = None
    mc_draws: int = DEFAULT_DRAWS
    seed: int = DEFAULT_SEED
    reps: int = DEFAULT_REPS
    search_modes: typing.Tuple[search.SearchOptions, ...] = (search.DEFAULT_SEARCH,)
    output_format: str = 'table'
    workers: int = 1
    fixed_l: typing.Optional[int] = None

    def require_prior(self) -> NormalGammaPrior:
        if self.prior is None:
            raise exceptions.ConfigError(
                "A prior is required: give --prior-moments, --prior-hyper or --prior-preset.")
        return self.prior

    def require_scheme(self) -> uhcs.SchemeParams:
        if self.scheme is None:
            raise exceptions.ConfigError("A plan is required: give --scheme N,R,L,T1,T2.")
        return self.scheme

    def cost_models(self) -> typing.List[CostModel]:
        """One CostModel per budget."""
        if self.cost is None or not self.budgets:
            raise exceptions.ConfigError("Costs are required: give --cost CF,CT and --budget LIST.")
        try:
            return [CostModel(self.cost[0], self.cost[1], budget) for budget in self.budgets]
        except exceptions.DomainError as error:
            raise exceptions.ConfigError(str(error)) from error

    def search_options(self) -> typing.List[search.SearchOptions]:
        """The requested search modes, with workers and any fixed l applied."""
        return [dataclasses.replace(options, workers=self.workers, fixed_l=self.fixed_l)
                for options in self.search_modes]


def _prior_from(key: str, text: str) -> NormalGammaPrior:
    if key == 'prior_preset':
        name = text.strip().lower()
        if name not in prior_module.PRESETS:
            raise exceptions.ConfigError("prior_preset: expected one of %s; got %r."
                                         % (', '.join(sorted(prior_module.PRESETS)), text))
        return prior_module.PRESETS[name]
    values = parse_floats(text, 4, key)
    if key == 'prior_moments':
        return prior_module.elicit(*values)
    return NormalGammaPrior(*values)


def build_config(file_values: typing.Mapping[str, str],
                 flag_values: typing.Mapping[str, typing.Optional[str]]) -> RunConfig:
    """Merge raw settings (flags over file) and parse them into a RunConfig."""
    raw = dict(file_values)
    raw.update({key: value for key, value in flag_values.items() if value is not None})
    unknown = set(raw) - set(CONFIG_KEYS)
    assert not unknown, unknown

    prior_keys = [key for key in PRIOR_KEYS if key in raw]
    flag_prior_keys = [key for key in PRIOR_KEYS if flag_values.get(key) is not None]
    if len(flag_prior_keys) > 1:
        raise exceptions.ConfigError("Give only one of --prior-moments, --prior-hyper and "
                                     "--prior-preset.")
    if flag_prior_keys:
        prior_keys = flag_prior_keys
    elif len(prior_keys) > 1:
        raise exceptions.ConfigError("Config file gives more than one of %s."
                                     % ', '.join(prior_keys))
    prior = _prior_from(prior_keys[0], raw[prior_keys[0]]) if prior_keys else None

    settings: typing.Dict[str, typing.Any] = {'prior': prior}
    if 'cost' in raw:
        settings['cost'] = parse_floats(raw['cost'], 2, 'cost')
    if 'budget' in raw:
        settings['budgets'] = parse_floats(raw['budget'], None, 'budget')
    if flag_values.get('n') is not None and flag_values.get('n_max') is not None:
        raise exceptions.ConfigError("Give only one of --n and --n-max.")
    if flag_values.get('n') is not None:
        raw.pop('n_max', None)
    elif flag_values.get('n_max') is not None:
        raw.pop('n', None)
    elif 'n' in raw and 'n_max' in raw:
        raise exceptions.ConfigError("Config file gives both n and n_max.")
    if 'n' in raw:
        settings['n'] = parse_int(raw['n'], 'n', minimum=2)
    if 'n_max' in raw:
        settings['n_max'] = parse_int(raw['n_max'], 'n_max', minimum=2)
    if 'scheme' in raw:
        settings['scheme'] = parse_scheme(raw['scheme'])
    if 'theta' in raw:
        settings['theta'] = LogNormalParams(*parse_floats(raw['theta'], 2, 'theta'))
    if 'draws' in raw:
        settings['mc_draws'] = parse_int(raw['draws'], 'draws')
    if 'seed' in raw:
        settings['seed'] = parse_int(raw['seed'], 'seed', minimum=0)
    if 'reps' in raw:
        settings['reps'] = parse_int(raw['reps'], 'reps')
    if 'search' in raw:
        settings['search_modes'] = parse_search(raw['search'])
    if 'format' in raw:
        output_format = raw['format'].strip().lower()
        if output_format not in OUTPUT_FORMATS:
            raise exceptions.ConfigError("format: expected one of %s; got %r."
                                         % (', '.join(OUTPUT_FORMATS), raw['format']))
        settings['output_format'] = output_format
    if 'workers' in raw:
        settings['workers'] = parse_int(raw['workers'], 'workers')
    if 'l' in raw:
        settings['fixed_l'] = parse_int(raw['l'], 'l')
    return RunConfig(**settings)

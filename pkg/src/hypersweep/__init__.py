"""Grid-based hyperparameter search toolkit: sequential coordinate sweep,
genetic search, evaluation journaling, and sensitivity analysis."""

from .space import (
    Config,
    ConfigSpace,
    ParamSpec,
    SpaceError,
    canonical_key,
    iter_configs,
    load_space,
    materialize,
    neighbor,
    parse_space,
    random_config,
    serialize_space,
    space_digest,
)
from .objective import (
    CoupledSurrogate,
    EvaluationRecord,
    Evaluator,
    Objective,
    ObjectiveError,
    SeparableSurrogate,
    TableObjective,
    separable_from_defaults,
)
from .journal import JournalError, LoadedJournal, RunJournal, load_journal, new_header
from .sequential import SearchError, SearchResult, random_search, sequential_search
from .ga import GaParams, crossover, fitness, ga_search, init_population, mutate, roulette_select
from .analysis import (
    AnalysisError,
    BoxStats,
    SensitivityReport,
    categorize,
    compare_default_vs_best,
    export_report,
    group_stats,
    mann_whitney,
)
from .svgplot import render_boxplot_svg
from .worker_client import WorkerObjective, WorkerPool, WorkerStartupError

__version__ = "0.1.0"

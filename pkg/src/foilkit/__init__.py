"""foilkit: induction of function-free clausal definitions from ground
tuples, with a specialised learner for functional relations and an
evaluator for the learned Prolog-subset programs."""

from .bindings import (
    BindingTable,
    GainStats,
    effective_counts,
    extend,
    gain,
    information,
    is_determinate,
)
from .datafile import parse_dataset, render_dataset
from .evaluator import Query, EvalResult, answer_standard_query, provable, score, solve
from .ffoil import (
    CoverageLedger,
    NonFunctionalTarget,
    add_default_clause,
    build_ledger,
    global_simplify,
    induce_ffoil,
    learn_ffoil,
)
from .language import (
    Clause,
    Definition,
    parse_prolog_definition,
    render_prolog,
)
from .learner import (
    LearnerConfig,
    LearnOutcome,
    induce_foil,
    learn_foil,
    prune_clause,
    prune_definition,
    sample_negatives,
)
from .model import (
    Dataset,
    DatasetError,
    Relation,
    TypeDef,
    check_functional,
    closed_world_complement,
    most_common_output,
)
from .taskgen import TaskSpec, gen_list_vocabulary, gen_noisy_functional, gen_task

__version__ = "0.1.0"

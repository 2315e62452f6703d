"""False-discovery control for interactive data exploration.

The package tracks hypotheses generated while exploring a dataset,
assigns each a significance budget from an alpha-investing wealth ledger
(controlling marginal FDR), offers the classic static and sequential
procedures for comparison, and ships a Monte-Carlo harness plus an HTTP
service for live sessions.
"""

from .baselines import (
    BatchDecision,
    benjamini_hochberg,
    bonferroni,
    forward_stop,
    fwer_inflation,
    holdout_false_rejection,
    holdout_test,
    pcer,
    streaming_bonferroni,
)
from .dataset import Dataset, FilterPredicate, histogram_of, load_dataset, sample_rows
from .errors import AlphaLedgerError
from .ledger import (
    Decision,
    Farsighted,
    Fixed,
    Hopeful,
    Hybrid,
    LedgerConfig,
    LedgerState,
    Support,
    apply_outcome,
    initial_state,
    ledger_step,
    next_budget,
    run_stream,
)
from .session import (
    HypothesisRecord,
    Session,
    VisualizationSpec,
    add_hypothesis,
    create_session,
    data_to_flip,
    delete_hypothesis,
    override_hypothesis,
    rebuild_session,
    record_visualization,
    session_state,
    star_hypothesis,
)
from .simulate import (
    ExperimentConfig,
    ProcedureSpec,
    RunMetrics,
    gen_stream,
    holdout_power_study,
    metrics_to_csv,
    replay_workflow,
    run_experiment,
    theorem1_check,
)
from .special import chi2_sf, ln_gamma, reg_inc_beta, t_sf
from .stattests import (
    Histogram,
    TestResult,
    chi2_goodness_of_fit,
    chi2_homogeneity,
    welch_t_test,
)

__version__ = "0.1.0"

"""Multiplayer nonlocal games: exact values, transforms, amplification checks."""

from .games import (
    ANCHOR,
    Distribution,
    Game,
    GameFormatError,
    MuTable,
    Predicate,
    Strategy,
    ValidationError,
    ValidationReport,
    chsh_game,
    load_game,
    load_mu,
    save_game,
    save_mu,
    product_dist,
    uniform_dist,
    validate_game,
)
from .oracle import (
    EntropyReport,
    NonProductDistribution,
    ShapeMismatch,
    ThresholdSet,
    entropy,
    expect,
    expect_inner,
    nested_expect,
    nested_expect_subset,
    threshold_set,
)
from .transforms import (
    CapExceededError,
    CoordinateSet,
    RepeatedGame,
    RestrictionFilter,
    admits,
    admits_any,
    anchor,
    conditional_win_prob,
    const_answer_filter,
    entropy_floor,
    no_restriction,
    repeat,
    strategy_filter,
)
from .value import (
    ValueReport,
    local_search_value,
    optimal_value,
    repeated_value,
    restricted_value,
    win_probability,
)
from .amplification import (
    AmpParams,
    BoundReport,
    ConcaveFn,
    DecayValue,
    FindingsTable,
    SamplerConfig,
    amp_constant,
    check_bound2,
    check_bound3,
    check_bound4_5_6,
    check_lm_theorems,
    check_main_theorem1,
    check_system1,
    custom,
    decay_bound_kplayer,
    decay_bound_multiplayer,
    mult,
    power,
    psi_eval,
    psi_inverse_diag,
    s_param,
    search_counterexamples,
    xi_inverse,
)

__version__ = "0.1.0"

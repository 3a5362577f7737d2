"""Square-free number generation with exact Mobius values.

The generator walks the discontinuity points of a growing fractional-part
combination and reads Mobius values off the jumps; the oracle sieve and the
verifier judge the output independently.  See the README for the CLI.
"""

from .core import (
    BeurlingCombination,
    BeurlingTerm,
    ExactRational,
    block_eval,
    frac_part,
)
from .generator import (
    ConsistencyError,
    GeneratedRecord,
    GeneratorError,
    IterationState,
    Mode,
    NonUnitMuError,
    ScanCapExceeded,
    fast_delta,
    initial_state,
    next_discontinuity,
    run,
    step,
)
from .oracle import (
    MobiusSieve,
    classical_approximant,
    is_square_free,
    mertens_g,
    sieve_mobius,
    square_divisor,
    square_free_up_to,
)
from .verifier import (
    BatteryResult,
    ConditionReport,
    VerificationReport,
    check_condition_a,
    check_condition_b,
    check_condition_c,
    check_condition_d,
    check_condition_e,
    run_condition_battery,
    verify_run,
)

__version__ = "0.1.0"

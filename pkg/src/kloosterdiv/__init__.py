"""Kloosterman sums to odd prime-power moduli and the divisor function
in arithmetic progressions mod p**k."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .modcore import (  # noqa: E402
    PrimePowerModulus,
    Residue,
    hensel_sqrt,
    is_prime,
    legendre,
    mod_inv,
    mod_pow,
    sqrt_mod_p,
)
from .kloosterman import (  # noqa: E402
    KloostermanValue,
    kloosterman,
    kloosterman_explicit,
    kloosterman_naive,
    weil_check,
)
from .padic_phase import PhaseExpansion, build_expansion, phase_value, short_sum_via_phases  # noqa: E402
from .shortsum import (  # noqa: E402
    ShortSumReport,
    delta_scan,
    short_sum_direct,
    weyl_inequality_check,
    weyl_rhs,
)
from .divisor_ap import (  # noqa: E402
    DiscrepancyRecord,
    ap_divisor_sum,
    discrepancy_scan,
    main_term,
    tau_sieve,
)

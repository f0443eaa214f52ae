"""Full counting statistics of photon transport through a collective N-atom medium."""

from .analytics import (
    ScalingRegimeReport,
    classify_regime,
    current_closed_form,
    equilibrium_cumulants_high_t,
    equilibrium_moments,
    limit_cumulants,
    scaling_report,
    sigma_asymptotic,
    sigma_n,
    thermal_conductance,
    zero_bias_noise,
)
from .engine import (
    CrossValidationReport,
    CumulantSet,
    cross_validate,
    cumulants_eigenvalue,
    cumulants_resolvent,
    current_numeric,
    stationary_state_numeric,
)
from .fluctuation import (
    AffinityReport,
    FluctuationTheoremReport,
    eigenvalue_symmetry_violation,
    fluctuation_theorem_check,
    occupation_affinity,
    symmetry_check,
)
from .fullspace import (
    FullSpaceGenerator,
    build_full_generator,
    oracle_current_and_cumulants,
    stationary_populations_fullspace,
)
from .liouvillian import (
    CountedGenerator,
    CountingAssignment,
    LadderGenerator,
    build_generator,
    characteristic_polynomial,
    dominant_eigenvalue,
    dress_with_counting,
    ladder_weights,
)
from .model import (
    CavitySource,
    EffectiveBath,
    ReservoirParams,
    SystemParams,
    cavity_source_occupation,
    classical_rate,
    effective_occupation,
    stationary_distribution,
    thermal_occupation,
)
from .transient import (
    DetectorWindow,
    NResolvedState,
    finite_bandwidth_distribution,
    finite_bandwidth_pn,
    flash_rate,
    initial_n_resolved,
    pn_distribution,
    propagate_n_resolved,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

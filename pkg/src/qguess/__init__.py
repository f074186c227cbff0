"""Optimal single-qubit state estimation under the no-signaling principle.

The library simulates isotropic estimation strategies on the Bloch sphere,
checks that their outcome densities take the two-parameter form
A cos^2(t/2) + B sin^2(t/2) forced by decomposition indistinguishability,
and verifies the 2/3 optimum of the average fidelity, both analytically and
by seeded Monte Carlo experiment. The `qguess` command line exposes the
experiments as reproducible CSV/JSON reports.
"""

from .bloch import (
    BlochVector,
    DensityOperator,
    EnsembleDecomposition,
    QubitKet,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    angle_between,
    bloch_from_ket,
    density_from_mixture,
    ket_from_bloch,
    overlap2,
    random_direction,
)
from .ensembles import (
    AliceBasis,
    BipartiteState,
    COMPUTATIONAL_BASIS,
    aligned_distance,
    assemble_bipartite,
    build_psi,
    phase_aligned,
    decomposition_from_alice_measurement,
    rotated_alice_basis,
    standard_decomposition,
    symmetric_decomposition,
    tilt_angle,
)
from .errors import (
    DegenerateEntanglementError,
    InvalidDirectionError,
    InvalidEnsembleError,
    InvalidFormError,
    InvalidProbabilityError,
    InvalidStateError,
    QGuessError,
    UnfittableHistogramError,
)
from .estimator import (
    ABFormStrategy,
    DEFAULT_BINS,
    DEFAULT_TRIALS,
    DensityHistogram,
    EstimatorStrategy,
    GuessingForm,
    MASSAR_POPESCU_FORM,
    MassarPopescuStrategy,
    TabulatedStrategy,
    UNIFORM_FORM,
    bin_outcomes,
    cap_probability,
    collect_histogram,
    estimate_massar_popescu,
    guessing_density,
    histogram_chi2,
    histogram_csv,
    sample_from_form,
    stern_gerlach,
)
from .merit import (
    FidelityMerit,
    MeritFunction,
    MeritReport,
    MonotoneTabulatedMerit,
    ScanResult,
    average_fidelity_exact,
    average_merit,
    expected_fidelity,
    monte_carlo_fidelity,
    named_merit,
    optimize_ab,
    reverse_outcomes,
)
from .nosignal import (
    AbDerivation,
    ConstraintResidual,
    DEFAULT_CAP_HALF_ANGLE,
    DEFAULT_DIRECTIONS,
    DEFAULT_P_GRID,
    DiscriminationReport,
    FitResult,
    cap_frequency,
    verdict_for,
    constraint_residual,
    constraint_residual_grid,
    cos4_density,
    cos4_strategy,
    derive_ab_form,
    expected_cap_frequencies,
    fibonacci_directions,
    fit_ab_least_squares,
    required_trials,
    run_discrimination_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "ABFormStrategy",
    "AbDerivation",
    "AliceBasis",
    "BipartiteState",
    "BlochVector",
    "COMPUTATIONAL_BASIS",
    "ConstraintResidual",
    "DEFAULT_BINS",
    "DEFAULT_CAP_HALF_ANGLE",
    "DEFAULT_DIRECTIONS",
    "DEFAULT_P_GRID",
    "DEFAULT_TRIALS",
    "DegenerateEntanglementError",
    "DensityHistogram",
    "DensityOperator",
    "DiscriminationReport",
    "EnsembleDecomposition",
    "EstimatorStrategy",
    "FidelityMerit",
    "FitResult",
    "GuessingForm",
    "InvalidDirectionError",
    "InvalidEnsembleError",
    "InvalidFormError",
    "InvalidProbabilityError",
    "InvalidStateError",
    "MASSAR_POPESCU_FORM",
    "MassarPopescuStrategy",
    "MeritFunction",
    "MeritReport",
    "MonotoneTabulatedMerit",
    "QGuessError",
    "QubitKet",
    "ScanResult",
    "TabulatedStrategy",
    "UNIFORM_FORM",
    "UnfittableHistogramError",
    "X_AXIS",
    "Y_AXIS",
    "Z_AXIS",
    "aligned_distance",
    "angle_between",
    "assemble_bipartite",
    "average_fidelity_exact",
    "average_merit",
    "bin_outcomes",
    "bloch_from_ket",
    "build_psi",
    "cap_frequency",
    "cap_probability",
    "collect_histogram",
    "constraint_residual",
    "constraint_residual_grid",
    "cos4_density",
    "cos4_strategy",
    "decomposition_from_alice_measurement",
    "density_from_mixture",
    "derive_ab_form",
    "estimate_massar_popescu",
    "expected_cap_frequencies",
    "expected_fidelity",
    "fibonacci_directions",
    "fit_ab_least_squares",
    "guessing_density",
    "histogram_chi2",
    "histogram_csv",
    "ket_from_bloch",
    "monte_carlo_fidelity",
    "named_merit",
    "optimize_ab",
    "overlap2",
    "phase_aligned",
    "random_direction",
    "required_trials",
    "reverse_outcomes",
    "rotated_alice_basis",
    "run_discrimination_experiment",
    "sample_from_form",
    "standard_decomposition",
    "stern_gerlach",
    "symmetric_decomposition",
    "tilt_angle",
    "verdict_for",
]

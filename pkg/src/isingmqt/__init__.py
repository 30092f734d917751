"""Transverse-field Ising chain toolkit: parity-sector tunneling
splittings by four independent routes (dense/Lanczos diagonalization,
closed-form perturbation theory, a resolvent-series oracle, and an
exact free-fermion solution), plus NOON-state dynamics and a sweep CLI.
"""

from .chain import (
    Boundary,
    ChainSpec,
    ParitySector,
    StateVector,
    SymmetrizedBasis,
    all_down_state,
    all_up_state,
    apply_string_x,
    bond_energies,
    build_hamiltonian,
    build_parity_basis,
    domain_wall_counts,
    magnetization_z,
    noon_state,
    parity_expectation,
    string_z_expectation,
)
from .dynamics import (
    EvolutionTrace,
    FidelitySummary,
    TwoLevelModel,
    evolve,
    noon_fidelity_curve,
    two_level_predict,
)
from .ed import (
    SPLITTING_RECORD_SCHEMA,
    SpectrumLevel,
    SplittingRecord,
    low_spectrum,
    sector_ground,
    tunneling_splitting_ed,
)
from .errors import CapacityError, ConfigError, ConvergenceError
from .free_fermion import (
    DispersionCurve,
    bdg_matrix,
    bogoliubov_sector_oracle,
    dispersion,
    quantized_momenta,
    quasiparticle_energies,
    sector_ground_energy,
    single_particle_energy,
)
from .perturbation import (
    PERTURBATION_RESULT_SCHEMA,
    PerturbationResult,
    ResolventResult,
    characteristic_times,
    leading_order_path_count,
    perturbation_summary,
    resolvent_matrix_element,
    resolvent_oracle,
    splitting_closed_form,
    splitting_closed_form_rational,
    tunneling_time,
)
from .sweep import (
    SWEEP_REPORT_SCHEMA,
    SweepPlan,
    SweepResult,
    emit_report,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CapacityError",
    "ChainSpec",
    "ConfigError",
    "ConvergenceError",
    "DispersionCurve",
    "EvolutionTrace",
    "FidelitySummary",
    "ParitySector",
    "PerturbationResult",
    "PERTURBATION_RESULT_SCHEMA",
    "ResolventResult",
    "SpectrumLevel",
    "SplittingRecord",
    "SPLITTING_RECORD_SCHEMA",
    "StateVector",
    "SweepPlan",
    "SweepResult",
    "SWEEP_REPORT_SCHEMA",
    "SymmetrizedBasis",
    "TwoLevelModel",
    "all_down_state",
    "all_up_state",
    "apply_string_x",
    "bdg_matrix",
    "bogoliubov_sector_oracle",
    "bond_energies",
    "build_hamiltonian",
    "build_parity_basis",
    "characteristic_times",
    "dispersion",
    "domain_wall_counts",
    "emit_report",
    "evolve",
    "leading_order_path_count",
    "low_spectrum",
    "magnetization_z",
    "noon_fidelity_curve",
    "noon_state",
    "parity_expectation",
    "perturbation_summary",
    "quantized_momenta",
    "quasiparticle_energies",
    "resolvent_matrix_element",
    "resolvent_oracle",
    "run_sweep",
    "sector_ground",
    "sector_ground_energy",
    "single_particle_energy",
    "splitting_closed_form",
    "splitting_closed_form_rational",
    "string_z_expectation",
    "tunneling_splitting_ed",
    "tunneling_time",
    "two_level_predict",
]

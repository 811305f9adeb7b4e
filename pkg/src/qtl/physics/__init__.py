"""Numerical core: spectra, states, interactions, closed-form theory and dynamics."""

from qtl.physics.spectra import CompositeSystem, EnergyLevel, Spectrum, build_composite, shell_degeneracy
from qtl.physics.states import (
    DensityOperator,
    JointDistribution,
    PureState,
    occupations,
    partial_trace_container,
    partial_trace_gas,
    product_state,
    purity,
    sample_accessible_region,
    state_distance,
    von_neumann_entropy,
)
from qtl.physics.interactions import (
    CouplingDiagnostics,
    HermitianOperator,
    coupling_diagnostics,
    microcanonical_interaction,
    random_hermitian,
    shell_interaction,
)
from qtl.physics.theory import (
    LevelDistribution,
    Prediction,
    TotalEnergyDistribution,
    canonical_distribution,
    dominant_distribution,
    equilibrium_state,
    fit_exponential_degeneracy,
    hs_average_purity_approx,
    hs_average_purity_exact,
    max_entropy,
    min_purity,
    predict,
    spectral_temperature,
    total_energy_distribution,
)
from qtl.physics.dynamics import (
    Propagator,
    ScalingFit,
    Trajectory,
    assemble_hamiltonian,
    fit_inverse_size_scaling,
    propagate,
    time_fluctuation,
)

__all__ = [
    "CompositeSystem",
    "EnergyLevel",
    "Spectrum",
    "build_composite",
    "shell_degeneracy",
    "DensityOperator",
    "JointDistribution",
    "PureState",
    "occupations",
    "partial_trace_container",
    "partial_trace_gas",
    "product_state",
    "purity",
    "sample_accessible_region",
    "state_distance",
    "von_neumann_entropy",
    "CouplingDiagnostics",
    "HermitianOperator",
    "coupling_diagnostics",
    "microcanonical_interaction",
    "random_hermitian",
    "shell_interaction",
    "LevelDistribution",
    "Prediction",
    "TotalEnergyDistribution",
    "canonical_distribution",
    "dominant_distribution",
    "equilibrium_state",
    "fit_exponential_degeneracy",
    "hs_average_purity_approx",
    "hs_average_purity_exact",
    "max_entropy",
    "min_purity",
    "predict",
    "spectral_temperature",
    "total_energy_distribution",
    "Propagator",
    "ScalingFit",
    "Trajectory",
    "assemble_hamiltonian",
    "fit_inverse_size_scaling",
    "propagate",
    "time_fluctuation",
]

"""Exact dynamics of a two-level atom coupled to a Kerr-filled cavity mode.

The interaction of a single cavity mode with a two-level atom under the
rotating wave approximation stays exactly solvable when the cavity contains
a Kerr-like nonlinear medium.  This package evolves truncated Fock-space
density matrices under that closed-form solution and provides the standard
diagnostics: atomic inversion, linear entropy, photon statistics, field
fidelity, Husimi Q and Wigner functions, plus the analytic machinery that
identifies the critical detuning at which the generalized Rabi frequency is
exactly linear in photon number and the dynamics becomes periodic.  At that
operating point an initial coherent state (or a statistical mixture of two
coherent states) evolves into a Schrodinger-cat superposition at every
collapse time.

Conventions: hbar = 1; the atom-field coupling sets the unit of frequency,
so detuning and Kerr strength are quoted in units of the coupling and times
in units of the inverse coupling.
"""

from .fock import (
    AtomState,
    CatSpec,
    FieldState,
    ModelParams,
    TruncationError,
    cat_state,
    choose_truncation,
    coherent_amplitudes,
    coherent_state,
    fock_state,
    mixture_state,
    pure_state,
    thermal_state,
)
from .dynamics import (
    Coefficients,
    JointState,
    coefficient_arrays,
    coefficients,
    effective_detuning,
    evolve_atom,
    evolve_field,
    evolve_joint,
    hamiltonian_oracle,
    rabi_frequency,
)
from .observables import (
    TimeSeries,
    atomic_inversion,
    default_time_grid,
    field_fidelity,
    linear_entropy,
    mean_photon,
    photon_distribution,
    series,
)
from .phasespace import (
    GridSpec,
    PhaseSpaceGrid,
    animate,
    displacement_element,
    grid_eval,
    q_function,
    read_psgrid,
    wigner,
)
from .periodicity import (
    CatFitResult,
    PeriodicityReport,
    REFERENCE_CAT_FIT,
    REFERENCE_MEAN_PHOTON,
    critical_detuning,
    fit_cat_phase,
    rabi_taylor,
    reproduce_table1,
    reproduce_table2,
    revival_time,
)
from .dispersive import (
    DressedPair,
    dispersive_cat_amplitudes,
    dispersive_evolve,
    dispersive_vs_exact,
    dressed_states,
    in_dispersive_regime,
    mixture_cat_identity,
)

__version__ = "0.1.0"

__all__ = [
    "AtomState",
    "CatFitResult",
    "CatSpec",
    "Coefficients",
    "DressedPair",
    "FieldState",
    "GridSpec",
    "JointState",
    "ModelParams",
    "PeriodicityReport",
    "PhaseSpaceGrid",
    "REFERENCE_CAT_FIT",
    "REFERENCE_MEAN_PHOTON",
    "TimeSeries",
    "TruncationError",
    "animate",
    "atomic_inversion",
    "cat_state",
    "choose_truncation",
    "coefficient_arrays",
    "coefficients",
    "coherent_amplitudes",
    "coherent_state",
    "critical_detuning",
    "default_time_grid",
    "dispersive_cat_amplitudes",
    "dispersive_evolve",
    "dispersive_vs_exact",
    "displacement_element",
    "dressed_states",
    "effective_detuning",
    "evolve_atom",
    "evolve_field",
    "evolve_joint",
    "field_fidelity",
    "fit_cat_phase",
    "fock_state",
    "grid_eval",
    "hamiltonian_oracle",
    "in_dispersive_regime",
    "linear_entropy",
    "mean_photon",
    "mixture_cat_identity",
    "mixture_state",
    "photon_distribution",
    "pure_state",
    "q_function",
    "rabi_frequency",
    "rabi_taylor",
    "read_psgrid",
    "reproduce_table1",
    "reproduce_table2",
    "revival_time",
    "series",
    "thermal_state",
    "wigner",
]

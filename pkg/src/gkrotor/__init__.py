"""Gravity-kicked quantum rotor: fidelity dynamics at and near quantum resonance."""

from .params import RotorParams
from .rotor import (
    BasisOverflowError,
    NoAcceleratorModeError,
    ObservableRecord,
    QuantumState,
    evolve,
    evolve_following,
    floquet_step,
    gaussian_accelerator_state,
    observables,
    plane_wave,
    survival_probability,
)
from .resonance import (
    RegimeReport,
    WeylSeries,
    analytic_fidelity,
    analytic_state,
    bessel_j,
    classify_regime,
    rational_decomposition,
    weyl_series,
)
from .fidelity import (
    EnsembleSpec,
    FidelityTrace,
    coevolve,
    fidelity_ensemble,
    fidelity_single,
    moving_average,
    resonant_fidelity_trace,
    time_average,
)
from .epsclassical import (
    Island,
    MapParams,
    OverlapMeasures,
    cloud_measures,
    fixed_point,
    island_boundary,
    linear_stability,
    map_step,
    mode_velocity,
    phase_portrait,
)
from .decay import (
    AnsatzModel,
    DecayFit,
    ansatz_eval,
    calibrate_ansatz,
    compare,
    fit_exponential,
    fit_power_law,
)

__version__ = "0.1.0"

"""Heralded single-photon source characterisation.

Thin Python layer over the C++ core: twin-beam photon statistics, click
detector models, the exact click-probability oracle, the pulse-by-pulse
simulator, time-tag gating and the figure-of-merit estimators.
"""

from ._core import (
    CountRecord,
    DomainError,
    ExperimentModel,
    FigureOfMerit,
    ParseError,
    PulseProbabilities,
    SimConfig,
    TruncationError,
    TwinBeamState,
    UndefinedResult,
    __version__,
    car,
    car_theory,
    estimate_all,
    estimate_from_probabilities,
    g2_heralded,
    g2_unconditional,
    g2_unconditional_theory,
    g2h_theory,
    gate_and_count,
    heralded_mean_and_parity_theory,
    klyshko,
    mean_photon_first,
    mean_photon_second,
    multimode_total_pmf,
    parity,
    parse_tags,
    povm_click_diagonal,
    pulse_probabilities,
    reduced_O1_diagonal,
    run_simulation,
    schmidt_k,
    simulate_tags,
    solve_mean_for_car,
    thermal_pmf,
)

__all__ = [name for name in dir() if not name.startswith("_")]

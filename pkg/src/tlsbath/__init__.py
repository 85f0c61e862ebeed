"""Semi-classical model of a microwave resonator coupled to a pumped TLS bath.

Closed-form bath response, independent numerical oracles, and the analysis
chain used to extract TLS bath parameters from pump-probe sweeps.
"""

from tlsbath.model import (
    BathParams,
    ComplexShift,
    PumpCondition,
    ThermalEnvironment,
    bath_complex_shift,
    bath_damping,
    bath_frequency_shift,
    cooperativity,
    ground_state_population,
    saturated_sigma_z,
    single_tls_shift,
    thermal_imbalance,
)

__version__ = "0.1.0"

__all__ = [
    "BathParams",
    "ComplexShift",
    "PumpCondition",
    "ThermalEnvironment",
    "bath_complex_shift",
    "bath_damping",
    "bath_frequency_shift",
    "cooperativity",
    "ground_state_population",
    "saturated_sigma_z",
    "single_tls_shift",
    "thermal_imbalance",
]

"""
Reference ququart device used by the examples and the acceptance checks.

The transmon has ``E_J/E_C = 45.6`` and ``E_C/2pi = 0.2915 GHz``, which
puts ``omega_01/2pi`` near 5.258 GHz with ``alpha_1/2pi`` near
-0.338 GHz. Its charge dispersion is about 25 kHz on the 0-1 transition
and -142 MHz on the 3-4 transition. The bare resonator sits at 7.25 GHz.
"""

from .dispersive import DispersiveModel, dispersive_model
from .readout import ReadoutConfig
from .spectrum import TransmonParams, eigenenergies
from .units import GHZ, MHZ

EJ_OVER_EC = 45.6
EC = 0.2915 * GHZ
OMEGA_R = 7.25 * GHZ
G = 100 * MHZ
OMEGA = 100 * MHZ
KAPPA = 5 * MHZ
T_MEAS = 0.35e-6
SIGMA_REL = 0.13


def reference_transmon() -> TransmonParams:
    return TransmonParams(EJ_OVER_EC, ec=EC, n_g=0.0)


def reference_model(d: int = 4, g: float = G, omega_r: float = OMEGA_R) -> DispersiveModel:
    """Dispersive model of the lowest ``d`` states (uses ``d + 1`` bare levels)."""
    levels = eigenenergies(reference_transmon(), d + 1)
    return dispersive_model(levels.energies("ng0"), g, omega_r, d)


def reference_readout(kappa: float = KAPPA, omega: float = OMEGA, T: float = T_MEAS,
                      phi: float = 0.0) -> ReadoutConfig:
    return ReadoutConfig(omega_r=OMEGA_R, kappa=kappa, omega=omega, T=T, phi=phi)


def reference_sigma(kappa: float = KAPPA, omega: float = OMEGA) -> float:
    return SIGMA_REL * omega / kappa

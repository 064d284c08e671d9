"""
Second-order dispersive shifts of a qudit coupled to a readout resonator.

Only the closed-form results of the Schrieffer-Wolff expansion are used.
With bare qudit energies ``omega_j`` and couplings
``g_{j,j+1} = g sqrt(j+1)``::

    chi_{j,j+1} = g_{j,j+1}^2 / (omega_{j+1} - omega_j - omega_r)
    chi_j       = chi_{j-1,j} - chi_{j,j+1},   chi_{-1,0} = 0

The qudit levels are dressed to ``omega_j + chi_{j-1,j}`` and the
resonator frequency to ``omega_r + chi_j``.

The module also holds the qudit-drive formulas used for gate calibration:
the two-photon factor ``f_j`` and the Rabi angles / pi amplitudes for
first- and second-order transitions. All frequencies are in rad/s (any
consistent unit works).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonanceError

POLE_RTOL = 1e-6


@dataclass(frozen=True)
class CouplingSpec:
    g: float
    omega_r: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("coupling g must be positive")


@dataclass(frozen=True)
class CalibrationParams:
    """Qudit drive settings for X-gate calibration."""

    omega_q: float
    omega_d: float
    durations: dict
    phi: float = 0.0

    def __post_init__(self):
        if any(not t > 0 for t in self.durations.values()):
            raise ValueError("pulse durations must be positive")


@dataclass(frozen=True)
class DispersiveModel:
    """Dispersive shifts for the lowest ``d`` qudit states.

    ``chi_pair[j]`` is ``chi_{j,j+1}`` for ``j = 0..d-1``; ``chi``,
    ``omega_tilde`` and ``omega_tilde_r`` are indexed by qudit state.
    """

    chi_pair: np.ndarray
    chi: np.ndarray
    omega_tilde: np.ndarray
    omega_tilde_r: np.ndarray
    g: float
    omega_r: float

    @property
    def d(self) -> int:
        return len(self.chi)


def coupling(g: float, j: int) -> float:
    if j < 0:
        raise ValueError("level index must be >= 0")
    return g * np.sqrt(j + 1)


def chi_pair(omega, g: float, omega_r: float, j: int) -> float:
    """``chi_{j,j+1}`` from bare energies ``omega``.

    Transitions leaving the supplied levels (``j = -1`` or
    ``j + 1 >= len(omega)``) are outside the truncated model and give 0.
    """
    omega = np.asarray(omega, dtype=float)
    if j == -1 or j + 1 >= len(omega):
        return 0.0
    detuning = omega[j + 1] - omega[j] - omega_r
    if abs(detuning) < POLE_RTOL * abs(omega_r) or detuning == 0:
        raise ResonanceError(
            f"transition {j}->{j + 1} is resonant with the resonator "
            f"(detuning {detuning:.3g})")
    return coupling(g, j) ** 2 / detuning


def chi_total(omega, g: float, omega_r: float, j: int) -> float:
    """Resonator pull ``chi_j`` when the qudit is in state ``j``."""
    return chi_pair(omega, g, omega_r, j - 1) - chi_pair(omega, g, omega_r, j)


def dispersive_model(omega, g: float, omega_r: float, d: int | None = None) -> DispersiveModel:
    """Shifts for the lowest ``d`` states from ``d + 1`` bare energies.

    ``d`` defaults to ``len(omega) - 1``. The g*sqrt(j+1) ladder is an
    approximation that degrades for high levels; keep ``d <= 8``.
    """
    omega = np.asarray(omega, dtype=float)
    if d is None:
        d = len(omega) - 1
    if d < 1 or len(omega) < d + 1:
        raise ValueError(f"need at least d+1={d + 1} bare energies, got {len(omega)}")
    pairs = np.array([chi_pair(omega, g, omega_r, j) for j in range(d)])
    below = np.concatenate(([0.0], pairs[:-1]))
    chi = below - pairs
    return DispersiveModel(
        chi_pair=pairs,
        chi=chi,
        omega_tilde=omega[:d] + below,
        omega_tilde_r=omega_r + chi,
        g=g,
        omega_r=omega_r,
    )


def dressed_transition(model: DispersiveModel, i: int, j: int) -> float:
    """Per-photon dressed transition frequency ``(w~_j - w~_i) / (j - i)``."""
    if not 0 <= i < j < model.d:
        raise IndexError(f"need 0 <= i < j < {model.d}, got ({i}, {j})")
    w = model.omega_tilde
    return (w[j] - w[i]) / (j - i)


def two_photon_factor(omega_tilde, omega_d: float, j: int) -> float:
    """Strength factor ``f_j`` of the ``j <-> j+2`` two-photon transition.

    Raises :class:`ResonanceError` when the drive is within 1e-6 (relative
    to ``omega_d``) of either single-photon transition it bridges.
    """
    w = np.asarray(omega_tilde, dtype=float)
    if j < 0 or j + 2 >= len(w):
        raise IndexError(f"two-photon factor needs levels {j}..{j + 2}")
    upper = w[j + 2] - w[j + 1] - omega_d
    lower = w[j + 1] - w[j] - omega_d
    guard = POLE_RTOL * abs(omega_d)
    for den in (upper, lower):
        if abs(den) <= guard:
            raise ResonanceError(
                f"drive at {omega_d:.6g} is resonant with a single-photon transition")
    curvature = w[j + 2] - 2.0 * w[j + 1] + w[j]
    return np.sqrt((j + 1) * (j + 2)) * curvature / (upper * lower)


def rabi_angle_first(t: float, omega_q: float, j: int) -> float:
    """Rotation angle of a resonant ``j <-> j+1`` pulse."""
    return t * omega_q * np.sqrt(j + 1)


def rabi_angle_second(t: float, omega_q: float, f_j: float) -> float:
    """Rotation angle of a resonant ``j <-> j+2`` pulse; quadratic in amplitude."""
    return t * omega_q ** 2 * f_j / 4.0


def pi_amplitudes(omega01_pi: float, t01: float, t_j_jplus2: float,
                  f_j: float, j: int) -> tuple[float, float]:
    """Initial pi-pulse amplitude estimates for ``j <-> j+1`` and ``j <-> j+2``.

    Both follow from the calibrated ``0 <-> 1`` amplitude, assuming all
    single-photon gates share the duration ``t01``.
    """
    first = omega01_pi / np.sqrt(j + 1)
    denom = f_j * t_j_jplus2
    radicand = omega01_pi * t01 / denom if denom != 0 else np.inf
    if not (np.isfinite(radicand) and radicand > 0):
        raise DomainError(
            "two-photon pi amplitude undefined: f_j * t must be positive "
            "(place the drive between the two single-photon transitions)")
    return first, 2.0 * np.sqrt(radicand)

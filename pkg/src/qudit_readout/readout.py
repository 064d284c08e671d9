"""
Mean-field resonator response during dispersive readout.

With the qudit in state ``j`` the resonator amplitude obeys::

    dA/dt = -i (omega_r + chi_j) A - i (Omega/2) exp(-i omega_d t + i phi) - (kappa/2) A

and the device returns ``(1/T) int_0^T k(t) A dt`` with the kernel
``k(t) = exp(i omega_m t)``. In the long-time limit this tends to the
steady-state amplitudes below. Amplitudes are plain complex numbers
(real part = in-phase quadrature); every function broadcasts over numpy
arrays of ``chi`` and ``omega_d``.
"""

import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, ShortIntegrationWarning, StepError

MIN_KAPPA_T = 5.0


@dataclass(frozen=True)
class ReadoutConfig:
    """Resonator and readout-drive settings (rad/s, seconds, radians)."""

    omega_r: float
    kappa: float
    omega: float
    T: float = 0.35e-6
    phi: float = 0.0
    omega_d: float | None = None
    omega_m: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.omega >= 0:
            raise ValueError("drive amplitude must be non-negative")
        if not self.T > 0:
            raise ValueError("measurement duration must be positive")

    @property
    def diameter(self) -> float:
        """Diameter ``Omega/kappa`` of the drive-frame circle."""
        return self.omega / self.kappa

    def with_drive(self, omega_d=None, omega_m=None) -> "ReadoutConfig":
        return replace(self,
                       omega_d=self.omega_d if omega_d is None else omega_d,
                       omega_m=self.omega_m if omega_m is None else omega_m)


class OptimalDrive(NamedTuple):
    frequencies: tuple
    distance: float


def _drive(cfg: ReadoutConfig, omega_d):
    omega_d = cfg.omega_d if omega_d is None else omega_d
    if omega_d is None:
        raise ValueError("no drive frequency given")
    return omega_d


def circle_center(cfg: ReadoutConfig) -> complex:
    """Center ``A_c`` of the circle traced by drive-frame amplitudes."""
    return -1j * np.exp(1j * cfg.phi) * cfg.omega / (2.0 * cfg.kappa)


def steady_amp_drive_frame(cfg: ReadoutConfig, chi, omega_d=None):
    """Steady-state amplitude in the frame rotating with the drive."""
    omega_d = _drive(cfg, omega_d)
    detuning = cfg.omega_r + np.asarray(chi) - np.asarray(omega_d)
    return -0.5 * cfg.omega * np.exp(1j * cfg.phi) / (detuning - 0.5j * cfg.kappa)


def sinc(x):
    """``sin(x)/x`` with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def steady_amp_general_frame(cfg: ReadoutConfig, chi, omega_d=None, omega_m=None):
    """Long-time amplitude when the kernel rotates at ``omega_m``.

    Emits :class:`ShortIntegrationWarning` when ``kappa*T < 5``, where the
    dropped transient is no longer small.
    """
    omega_d = np.asarray(_drive(cfg, omega_d))
    omega_m = cfg.omega_m if omega_m is None else omega_m
    if omega_m is None:
        raise ValueError("no modulation frequency given")
    if cfg.kappa * cfg.T < MIN_KAPPA_T:
        warnings.warn(f"kappa*T = {cfg.kappa * cfg.T:.3g} < {MIN_KAPPA_T}; "
                      "steady-state limit is unreliable", ShortIntegrationWarning,
                      stacklevel=2)
    x = (omega_d - omega_m) * cfg.T / 2.0
    phase = np.exp(-1j * x)
    return phase * sinc(x) * steady_amp_drive_frame(cfg, chi, omega_d)


def pair_distance(cfg: ReadoutConfig, chi_i, chi_j, omega_d=None):
    """Drive-frame phase-space distance between the two state amplitudes."""
    return np.abs(steady_amp_drive_frame(cfg, chi_i, omega_d)
                  - steady_amp_drive_frame(cfg, chi_j, omega_d))


def optimal_frequencies(cfg: ReadoutConfig, chi_i: float, chi_j: float) -> OptimalDrive:
    """Drive frequencies maximizing :func:`pair_distance` and the distance reached.

    For ``kappa >= |chi_i - chi_j|`` there is one optimum at the midpoint
    frequency; otherwise two symmetric optima put the states on opposite
    sides of the circle (distance ``Omega/kappa``).
    """
    delta = chi_i - chi_j
    if delta == 0:
        raise DegenerateError("states share the same dispersive shift")
    mid = cfg.omega_r + 0.5 * (chi_i + chi_j)
    if cfg.kappa >= abs(delta):
        dist = 2.0 * cfg.omega * abs(delta) / (delta ** 2 + cfg.kappa ** 2)
        return OptimalDrive((mid,), dist)
    half = 0.5 * np.sqrt(delta ** 2 - cfg.kappa ** 2)
    return OptimalDrive((mid - half, mid + half), cfg.diameter)


def integrate_mean_field(cfg: ReadoutConfig, chi, steps: int = 20000,
                         omega_d=None, omega_m=None):
    """Kernel-weighted time average of the resonator amplitude, from ``A(0) = 0``.

    Fixed-step RK4 on the drive-frame variable ``B = A exp(i omega_d t)``
    together with the running integral of ``exp(i (omega_m - omega_d) t) B``.
    ``omega_m`` defaults to the drive frequency. Returns ``Abar / T``; the
    start-up transient is included, so this tends to the steady-state
    formulas only as ``kappa*T`` grows.
    """
    if steps < 1000:
        raise StepError(f"need at least 1000 steps, got {steps}")
    omega_d = np.asarray(_drive(cfg, omega_d), dtype=float)
    omega_m = omega_d if (omega_m is None and cfg.omega_m is None) else np.asarray(
        cfg.omega_m if omega_m is None else omega_m, dtype=float)
    chi = np.asarray(chi, dtype=float)
    h = cfg.T / steps
    rate = 1j * (cfg.omega_r + chi - omega_d) + 0.5 * cfg.kappa
    beat = omega_m - omega_d
    stiffness = np.max(np.abs(rate)) * h
    phase_step = np.max(np.abs(beat)) * h
    if stiffness > 0.5 or phase_step > 0.5:
        raise StepError(
            f"step too coarse: |rate|*h = {stiffness:.3g}, |beat|*h = {phase_step:.3g} "
            "(both must be <= 0.5)")
    source = -0.5j * cfg.omega * np.exp(1j * cfg.phi)

    def f_b(b):
        return -rate * b + source

    def kernel(t):
        return np.exp(1j * beat * t)

    shape = np.broadcast(rate, beat).shape
    b = np.zeros(shape, dtype=complex)
    acc = np.zeros(shape, dtype=complex)
    for n in range(steps):
        t = n * h
        k1 = f_b(b)
        b2 = b + 0.5 * h * k1
        k2 = f_b(b2)
        b3 = b + 0.5 * h * k2
        k3 = f_b(b3)
        b4 = b + h * k3
        k4 = f_b(b4)
        # integrand of the running average, evaluated at the RK4 stages
        acc += h / 6.0 * (kernel(t) * b + 2.0 * kernel(t + 0.5 * h) * (b2 + b3)
                          + kernel(t + h) * b4)
        b = b + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = acc / cfg.T
    return out[()] if out.ndim == 0 else out

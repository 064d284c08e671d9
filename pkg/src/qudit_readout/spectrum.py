"""
Transmon spectrum in the charge basis.

The Cooper-pair-box Hamiltonian is tridiagonal in the charge states
``|n>``, ``n = -n_cut..n_cut``::

    H = 4 E_C (n - n_g)^2 |n><n| - E_J/2 (|n><n+1| + h.c.)

Levels are computed at the two extreme offset charges ``n_g = 0`` and
``n_g = 1/2``. All energies are shifted so that the ground state at
``n_g = 0`` sits at zero. Derived quantities (average transition
frequencies, their charge sensitivity, anharmonicities and charge
dispersions) follow from the two level sets.

Energies carry the unit of ``E_C``. When ``TransmonParams.ec`` is left as
``None`` the spectrum is dimensionless (``E_C = 1``), which is enough for
ratios such as ``alpha_1 / omega_01``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import bisect

from .errors import ConvergenceError, NoRootError

CONVERGENCE_RTOL = 1e-10


@dataclass(frozen=True)
class TransmonParams:
    """Inputs of the charge-basis Hamiltonian.

    ``ec`` is E_C in rad/s; ``None`` selects dimensionless mode.
    """

    ej_over_ec: float
    ec: float | None = None
    n_g: float = 0.0
    n_cut: int = 15

    def __post_init__(self):
        if not self.ej_over_ec >= 0:
            raise ValueError("ej_over_ec must be non-negative")
        if self.ec is not None and not self.ec > 0:
            raise ValueError("ec must be positive")
        if not -1.0 <= self.n_g <= 1.0:
            raise ValueError("n_g must lie in [-1, 1]")
        if int(self.n_cut) != self.n_cut or self.n_cut < 10:
            raise ValueError("n_cut must be an integer >= 10")

    @property
    def e_c(self) -> float:
        return 1.0 if self.ec is None else float(self.ec)

    @property
    def e_j(self) -> float:
        return self.ej_over_ec * self.e_c


@dataclass(frozen=True)
class Spectrum:
    """Lowest ``d`` levels at ``n_g = 0`` and ``n_g = 1/2``.

    Both arrays are shifted by the same constant so that
    ``levels_ng0[0] == 0``.
    """

    levels_ng0: np.ndarray
    levels_nghalf: np.ndarray
    d: int

    def energies(self, mode: str = "ng0") -> np.ndarray:
        """Qudit energies used downstream: ``"ng0"``, ``"nghalf"`` or ``"average"``."""
        if mode == "ng0":
            return self.levels_ng0.copy()
        if mode == "nghalf":
            return self.levels_nghalf.copy()
        if mode == "average":
            return 0.5 * (self.levels_ng0 + self.levels_nghalf)
        raise ValueError(f"unknown energy mode {mode!r}")


def _diagonals(p: TransmonParams, n_cut: int, n_g: float):
    n = np.arange(-n_cut, n_cut + 1, dtype=float)
    diag = 4.0 * p.e_c * (n - n_g) ** 2
    off = np.full(2 * n_cut, -0.5 * p.e_j)
    return diag, off


def charge_hamiltonian(p: TransmonParams, n_cut: int | None = None) -> np.ndarray:
    """Dense charge-basis Hamiltonian of dimension ``2*n_cut + 1``.

    ``n_cut`` overrides ``p.n_cut`` (useful for tiny illustrative matrices).
    """
    n_cut = p.n_cut if n_cut is None else int(n_cut)
    if n_cut < 0:
        raise ValueError("n_cut must be non-negative")
    diag, off = _diagonals(p, n_cut, p.n_g)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _raw_levels(p: TransmonParams, n_g: float, count: int, n_cut: int) -> np.ndarray:
    diag, off = _diagonals(p, n_cut, n_g)
    return eigh_tridiagonal(diag, off, eigvals_only=True,
                            select="i", select_range=(0, count - 1))


def _converged_levels(p: TransmonParams, n_g: float, count: int, check: bool) -> np.ndarray:
    levels = _raw_levels(p, n_g, count, p.n_cut)
    if check:
        finer = _raw_levels(p, n_g, count, p.n_cut + 5)
        scale = np.maximum(np.abs(finer), p.e_c)
        worst = np.max(np.abs(finer - levels) / scale)
        if worst > CONVERGENCE_RTOL:
            raise ConvergenceError(
                f"levels changed by {worst:.2e} (relative) when n_cut grew "
                f"from {p.n_cut} to {p.n_cut + 5}")
    return levels


def eigenenergies(p: TransmonParams, d: int, check: bool = True) -> Spectrum:
    """Lowest ``d`` levels at ``n_g = 0`` and ``n_g = 1/2``.

    Parameters
    ----------
    p : TransmonParams
        Hamiltonian inputs; ``p.n_g`` is not used here (see
        :func:`levels_at` for arbitrary offset charge).
    d : int
        Number of retained levels, ``1 <= d <= p.n_cut``.
    check : bool
        Re-diagonalize with ``n_cut + 5`` and raise
        :class:`ConvergenceError` if any level moves by more than 1e-10
        relative.
    """
    if not 1 <= d <= p.n_cut:
        raise ValueError(f"need 1 <= d <= n_cut, got d={d}, n_cut={p.n_cut}")
    e0 = _converged_levels(p, 0.0, d, check)
    e_half = _converged_levels(p, 0.5, d, check)
    shift = e0[0]
    e0 = e0 - shift
    e0[0] = 0.0
    return Spectrum(levels_ng0=e0, levels_nghalf=e_half - shift, d=d)


def levels_at(p: TransmonParams, d: int, check: bool = True) -> np.ndarray:
    """Lowest ``d`` levels at offset charge ``p.n_g``, shifted by ``E_0(0)``."""
    if not 1 <= d <= p.n_cut:
        raise ValueError(f"need 1 <= d <= n_cut, got d={d}, n_cut={p.n_cut}")
    ground = _converged_levels(p, 0.0, 1, check)[0]
    return _converged_levels(p, p.n_g, d, check) - ground


def _check_pair(s: Spectrum, i: int, j: int):
    if not 0 <= i < j < s.d:
        raise IndexError(f"need 0 <= i < j < {s.d}, got ({i}, {j})")


def transition_frequency(s: Spectrum, i: int, j: int) -> float:
    """Per-photon transition frequency between ``i`` and ``j``, averaged over both offset charges."""
    _check_pair(s, i, j)
    a, b = s.levels_ng0, s.levels_nghalf
    return (a[j] + b[j] - a[i] - b[i]) / (2 * (j - i))


def frequency_difference(s: Spectrum, i: int, j: int) -> float:
    """Change of the ``i -> j`` per-photon frequency between ``n_g = 0`` and ``n_g = 1/2``."""
    _check_pair(s, i, j)
    a, b = s.levels_ng0, s.levels_nghalf
    return (a[j] - a[i] - b[j] + b[i]) / (j - i)


def anharmonicity(s: Spectrum, j: int) -> float:
    """``omega_{j,j+1} - omega_{j-1,j}``; defined for ``1 <= j <= d-2``."""
    if not 1 <= j <= s.d - 2:
        raise IndexError(f"anharmonicity needs 1 <= j <= {s.d - 2}, got {j}")
    return transition_frequency(s, j, j + 1) - transition_frequency(s, j - 1, j)


def charge_dispersion(s: Spectrum, j: int) -> float:
    """``E_j(0) - E_j(1/2)`` with sign retained."""
    if not 0 <= j < s.d:
        raise IndexError(f"level {j} not in spectrum of {s.d} levels")
    return float(s.levels_ng0[j] - s.levels_nghalf[j])


def _model_ratio(ej_over_ec: float, n_cut: int = 15) -> float:
    s = eigenenergies(TransmonParams(ej_over_ec, n_cut=n_cut), 3, check=False)
    return anharmonicity(s, 1) / transition_frequency(s, 0, 1)


def fit_ej_ec(omega01: float, alpha1: float, bracket=(10.0, 400.0),
              n_cut: int = 15, rtol: float = 1e-12) -> tuple[float, float]:
    """Recover ``(E_J/E_C, E_C)`` from a qubit frequency and anharmonicity.

    ``alpha1 / omega01`` is monotone in ``E_J/E_C``, so ``E_J/E_C`` is
    found by bisection over ``bracket`` and ``E_C`` then follows from the
    absolute qubit frequency. Units of ``E_C`` are those of the inputs.
    """
    if not (omega01 > 0 and alpha1 < 0 and abs(alpha1) < omega01):
        raise NoRootError("need omega01 > 0 and -omega01 < alpha1 < 0")
    target = alpha1 / omega01
    lo, hi = bracket
    f_lo = _model_ratio(lo, n_cut) - target
    f_hi = _model_ratio(hi, n_cut) - target
    if f_lo * f_hi > 0:
        raise NoRootError(
            f"ratio {target:.5g} outside the model range "
            f"[{f_lo + target:.5g}, {f_hi + target:.5g}] for E_J/E_C in {bracket}")
    ratio = bisect(lambda x: _model_ratio(x, n_cut) - target, lo, hi,
                   xtol=1e-14, rtol=rtol, maxiter=200)
    # verify truncation at the solution
    s = eigenenergies(TransmonParams(ratio, n_cut=n_cut), 3)
    ec = omega01 / transition_frequency(s, 0, 1)
    return ratio, ec

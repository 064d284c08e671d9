"""Owen's T function and its three-argument generalization.

``owen_t_general(h, a, b)`` is

    T(h, a, b) = 1/(2 sqrt(2 pi)) int_h^inf exp(-x^2/2) erf((a x + b)/sqrt(2)) dx

and is reduced to four standard T evaluations plus an erf term. The
reduction divides by ``h`` and ``b``; the ``h = 0`` and ``b = 0`` limits
are evaluated in closed form.
"""

import numpy as np
from scipy.special import erf, owens_t

_SQRT2 = np.sqrt(2.0)
_ZERO = 1e-12


def owen_t(h, a):
    """Standard Owen's T, ``1/(2 pi) int_0^a exp(-h^2 (1+x^2)/2) / (1+x^2) dx``."""
    return owens_t(h, a)


def owen_t_general(h, a, b):
    """Generalized Owen's T; ``owen_t_general(h, a, 0) == owen_t(h, a)``."""
    h, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (h, a, b)))
    s = np.sqrt(1.0 + a * a)
    bp = b / s

    h_zero = np.abs(h) < _ZERO
    b_zero = np.abs(b) < _ZERO
    regular = ~(h_zero | b_zero)
    hs = np.where(regular, h, 1.0)
    bs = np.where(regular, b, 1.0)

    with np.errstate(over="ignore", invalid="ignore"):
        full = (0.25 * erf(bp / _SQRT2) * (1.0 - erf(h / _SQRT2))
                + owens_t(bp, a + hs * s * s / bs)
                + owens_t(h, a + bs / hs)
                - owens_t(bp, hs * s / bs)
                - owens_t(h, bs / (hs * s)))
    # h -> 0 with b != 0: the two T(h, .) terms cancel at T(0, +-inf)
    h_limit = 0.25 * erf(bp / _SQRT2) + owens_t(bp, a)
    b_limit = owens_t(h, a)

    out = np.where(regular, full, np.where(b_zero, b_limit, h_limit))
    return out[()] if out.ndim == 0 else out


def halfplane_wedge(h, a, b):
    """``P(X > h, Y < a X + b)`` for independent standard normals X, Y."""
    return 0.25 * (1.0 - erf(np.asarray(h, dtype=float) / _SQRT2)) + owen_t_general(h, a, b)

"""
Gaussian readout clouds, state classification and assignment matrices.

Each prepared qudit state ``j`` produces integrated readout points ``z``
drawn from an isotropic 2-D Gaussian centred at ``A_j``. Points are
classified by minimum distance (the default) or maximum likelihood, and
``M[i, j]`` is the probability of classifying as ``i`` when ``j`` was
prepared. ``M`` is obtained by Monte Carlo sampling, from labelled shots,
or analytically with Owen's T function when all centres lie on one
circle and share a width.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import GeometryError
from .owen import halfplane_wedge

CIRCLE_RTOL = 1e-8


@dataclass(frozen=True)
class GaussianCloud:
    center: complex
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class AssignmentMatrix:
    """Column-stochastic ``M[i, j] = P(classified i | prepared j)``.

    ``method`` is one of ``"mc"``, ``"owen"`` or ``"empirical"``;
    ``n_samples`` is the per-column sample count for sampled matrices.
    """

    m: np.ndarray
    method: str
    n_samples: int | None = None

    @property
    def d(self) -> int:
        return self.m.shape[0]

    def standard_error(self, reference=None) -> np.ndarray:
        """Binomial standard error of each entry (``reference`` defaults to ``m``)."""
        if self.n_samples is None:
            raise ValueError("standard error needs a sampled matrix")
        p = self.m if reference is None else np.asarray(reference)
        return np.sqrt(p * (1.0 - p) / self.n_samples)


def _split(clouds):
    centers = np.array([c.center for c in clouds], dtype=complex)
    sigmas = np.array([c.sigma for c in clouds], dtype=float)
    return centers, sigmas


def gaussian_density(z, center, sigma):
    z = np.asarray(z)
    return np.exp(-np.abs(z - center) ** 2 / (2.0 * sigma ** 2)) / (2.0 * np.pi * sigma ** 2)


def classify_mde(z, centers):
    """Index of the nearest centre; ties go to the lowest index."""
    z = np.asarray(z, dtype=complex)
    centers = np.asarray(centers, dtype=complex)
    if centers.size == 0:
        raise ValueError("need at least one centre")
    dist2 = np.abs(z[..., None] - centers) ** 2
    return np.argmin(dist2, axis=-1)


def classify_mle(z, clouds):
    """Index of the most likely cloud; ties go to the lowest index.

    With equal widths this is exactly :func:`classify_mde`.
    """
    centers, sigmas = _split(clouds)
    if np.all(sigmas == sigmas[0]):
        return classify_mde(z, centers)
    z = np.asarray(z, dtype=complex)
    logp = (-np.abs(z[..., None] - centers) ** 2 / (2.0 * sigmas ** 2)
            - np.log(2.0 * np.pi * sigmas ** 2))
    return np.argmax(logp, axis=-1)


def sample_cloud(cloud: GaussianCloud, n: int, rng) -> np.ndarray:
    xy = rng.normal(scale=cloud.sigma, size=(n, 2))
    return cloud.center + xy[:, 0] + 1j * xy[:, 1]


def assignment_matrix_mc(clouds, n_samples: int = 100_000, seed=0) -> AssignmentMatrix:
    """Sampled assignment matrix with minimum-distance classification.

    Column ``j`` uses its own child stream of ``SeedSequence(seed)``, so
    the result depends only on ``seed``.
    """
    if n_samples < 10_000:
        raise ValueError("use at least 1e4 samples per column")
    centers, _ = _split(clouds)
    d = len(centers)
    children = np.random.SeedSequence(seed).spawn(d)
    m = np.zeros((d, d))
    for j, (cloud, child) in enumerate(zip(clouds, children)):
        z = sample_cloud(cloud, n_samples, np.random.default_rng(child))
        m[:, j] = np.bincount(classify_mde(z, centers), minlength=d) / n_samples
    return AssignmentMatrix(m, "mc", n_samples)


def assignment_matrix_empirical(labels_by_state) -> AssignmentMatrix:
    """Matrix of classified-count ratios ``N_i / N`` from labelled shots.

    ``labels_by_state[j]`` holds the classified labels of the shots taken
    with state ``j`` prepared.
    """
    d = len(labels_by_state)
    m = np.zeros((d, d))
    sizes = set()
    for j, labels in enumerate(labels_by_state):
        labels = np.asarray(labels, dtype=int)
        if labels.size == 0:
            raise ValueError(f"no shots for prepared state {j}")
        m[:, j] = np.bincount(labels, minlength=d)[:d] / labels.size
        sizes.add(labels.size)
    n = sizes.pop() if len(sizes) == 1 else None
    return AssignmentMatrix(m, "empirical", n)


def fit_circle_center(centers) -> complex:
    """Centre of the circle through the points (algebraic least squares)."""
    centers = np.asarray(centers, dtype=complex)
    if len(centers) == 1:
        return complex(centers[0])
    if len(centers) == 2:
        return complex(centers.mean())
    x, y = centers.real, centers.imag
    design = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(design, x * x + y * y, rcond=None)
    if not np.all(np.isfinite(sol)) or np.linalg.matrix_rank(design) < 3:
        raise GeometryError("centres are collinear; no circle passes through them")
    return complex(sol[0], sol[1])


def _check_on_circle(centers, apex):
    radii = np.abs(centers - apex[..., None])
    scale = np.max(radii, axis=-1)
    spread = np.max(radii, axis=-1) - np.min(radii, axis=-1)
    bad = spread > CIRCLE_RTOL * np.maximum(scale, np.finfo(float).tiny)
    if np.any(bad):
        raise GeometryError(
            f"centres are not on a common circle (radius spread "
            f"{np.max(spread / np.maximum(scale, np.finfo(float).tiny)):.2e} relative)")


def _sectors(centers, apex):
    """Start angle and opening of every state's minimum-distance sector.

    All perpendicular bisectors of points on a circle pass through its
    centre, so each decision region is the angular sector around the
    state's direction bounded by the mid-angles to its neighbours.
    """
    theta = np.angle(centers - apex[..., None])
    order = np.argsort(theta, axis=-1)
    sorted_theta = np.take_along_axis(theta, order, axis=-1)
    nxt = np.roll(sorted_theta, -1, axis=-1)
    gap_next = np.mod(nxt - sorted_theta, 2.0 * np.pi)
    d = centers.shape[-1]
    if d == 1:
        gap_next = np.full_like(gap_next, 2.0 * np.pi)
    gap_prev = np.roll(gap_next, 1, axis=-1)
    if d > 1 and np.any(np.minimum(gap_next, gap_prev) < 1e-12):
        raise GeometryError("two centres coincide in angle; use the MC route")
    start_sorted = sorted_theta - 0.5 * gap_prev
    open_sorted = 0.5 * (gap_prev + gap_next)
    start = np.empty_like(start_sorted)
    opening = np.empty_like(open_sorted)
    np.put_along_axis(start, order, start_sorted, axis=-1)
    np.put_along_axis(opening, order, open_sorted, axis=-1)
    return start, opening


def _sector_probability(mu, apex, start, opening, sigma, pieces: int = 4):
    """Gaussian mass (centre ``mu``, width ``sigma``) inside an angular sector.

    The sector is cut into ``pieces`` equal wedges of opening <= pi/2.
    Each wedge is rotated so that its first edge points along -y; it is
    then the region ``x > 0, y < x * slope`` with ``slope = -cot(delta)``,
    whose mass is ``P(X > h, Y < a X + b)`` for standard normals.
    """
    delta = opening / pieces
    slope = -np.cos(delta) / np.sin(delta)
    total = 0.0
    for k in range(pieces):
        edge = start + k * delta
        w = (mu - apex) * np.exp(1j * (-0.5 * np.pi - edge))
        h = -w.real / sigma
        b = (slope * w.real - w.imag) / sigma
        total = total + halfplane_wedge(h, slope, b)
    return total


def owen_matrix_batch(centers, sigma, apex=None) -> np.ndarray:
    """Analytic assignment matrices for a batch of on-circle configurations.

    Parameters
    ----------
    centers : complex array, shape (..., d)
    sigma : float or array broadcastable to ``centers.shape[:-1]``
    apex : complex array, shape (...), optional
        Circle centre; fitted from the points when omitted.

    Returns
    -------
    ndarray, shape (..., d, d)
    """
    centers = np.asarray(centers, dtype=complex)
    batch = centers.shape[:-1]
    if apex is None:
        flat = centers.reshape(-1, centers.shape[-1])
        apex = np.array([fit_circle_center(c) for c in flat]).reshape(batch)
    apex = np.broadcast_to(np.asarray(apex, dtype=complex), batch)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), batch)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    _check_on_circle(centers, apex)
    start, opening = _sectors(centers, apex)
    # axis -2: decision region i, axis -1: prepared cloud j
    m = _sector_probability(centers[..., None, :], apex[..., None, None],
                            start[..., :, None], opening[..., :, None],
                            sigma[..., None, None])
    return np.clip(m, 0.0, 1.0)


def assignment_matrix_owen(clouds, center=None) -> AssignmentMatrix:
    """Analytic assignment matrix via generalized Owen's T.

    Requires equal widths and all centres on one circle (about ``center``
    if given, otherwise the fitted circle); raises :class:`GeometryError`
    otherwise.
    """
    centers, sigmas = _split(clouds)
    if not np.allclose(sigmas, sigmas[0], rtol=1e-12, atol=0):
        raise GeometryError("analytic matrix needs equal cloud widths")
    if len(centers) == 1:
        return AssignmentMatrix(np.ones((1, 1)), "owen")
    apex = fit_circle_center(centers) if center is None else complex(center)
    m = owen_matrix_batch(centers, sigmas[0], apex)
    return AssignmentMatrix(m, "owen")


def two_cloud_error(distance, sigma):
    """Off-diagonal entry for two equal-width clouds a given distance apart."""
    return 0.5 * (1.0 - erf(distance / (2.0 * np.sqrt(2.0) * sigma)))


def error_measures(m):
    """Per-state misclassification ``1 - M[j, j]`` and their mean."""
    m = getattr(m, "m", m)
    xi = 1.0 - np.diagonal(np.asarray(m), axis1=-2, axis2=-1)
    return xi, xi.mean(axis=-1)

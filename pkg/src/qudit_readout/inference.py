"""
Bayesian estimation of qudit populations from classified shot counts.

Given counts ``n_k`` recorded with assignment matrices ``M_k`` (one block
per readout frequency) the posterior over populations ``p`` on the
simplex is proportional to ``prod_k prod_j ((M_k p)_j)^{n_kj}``. With a
single identity block this is the Dirichlet distribution with parameters
``N_j + 1``.

Posterior moments are computed by self-normalized importance sampling;
the normalizer is never integrated directly.
"""

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy
from scipy.optimize import minimize

from .assignment import gaussian_density
from .errors import DomainError, ESSWarning, ResolutionError, SingularMatrixError

MAX_COND = 1e12


def _as_blocks(matrices, counts):
    if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
        matrices, counts = [matrices], [counts]
    mats = [np.asarray(getattr(m, "m", m), dtype=float) for m in matrices]
    cnts = [np.asarray(c, dtype=float) for c in counts]
    if len(mats) != len(cnts) or not mats:
        raise ValueError("need one count vector per assignment matrix")
    d = mats[0].shape[1]
    for m, c in zip(mats, cnts):
        if m.shape != (d, d) or c.shape != (d,):
            raise ValueError("assignment matrices must be d x d and counts length d")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
    return mats, cnts


@dataclass
class PopulationPosterior:
    """Product of Dirichlet-with-assignment-matrix terms, one per frequency."""

    matrices: list
    counts: list
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.matrices, self.counts = _as_blocks(self.matrices, self.counts)

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def total_counts(self) -> np.ndarray:
        return np.sum(self.counts, axis=0)

    def condition_numbers(self) -> list:
        return [float(np.linalg.cond(m)) for m in self.matrices]

    def is_identity(self) -> bool:
        eye = np.eye(self.d)
        return all(np.array_equal(m, eye) for m in self.matrices)

    @property
    def log_normalizer(self):
        """Importance-sampling estimate from the last :func:`posterior_sd` run."""
        return self._cache.get("log_normalizer")


def log_dirichlet_coefficient(counts) -> float:
    """``log((N + d - 1)! / prod_j N_j!)``."""
    counts = np.asarray(counts, dtype=float)
    return gammaln(counts.sum() + len(counts)) - gammaln(counts + 1).sum()


def _log_kernel(post: PopulationPosterior, p) -> np.ndarray:
    out = 0.0
    for m, c in zip(post.matrices, post.counts):
        out = out + xlogy(c, p @ m.T).sum(axis=-1)
    return out


def log_density(post: PopulationPosterior, p, coefficients: bool = False):
    """Unnormalized log posterior density at ``p`` (shape ``(..., d)``).

    Returns ``sum_k sum_j n_kj log((M_k p)_j)``; with ``coefficients`` the
    per-block Dirichlet prefactors are added, which makes the single
    identity-block case the exact Dirichlet log pdf.
    """
    p = np.asarray(p, dtype=float)
    for m in post.matrices:
        if np.any(p @ m.T <= 0):
            raise DomainError("M p has a non-positive component")
    out = _log_kernel(post, p)
    if coefficients:
        out = out + sum(log_dirichlet_coefficient(c) for c in post.counts)
    return out


@dataclass(frozen=True)
class ModeResult:
    p: np.ndarray
    in_simplex: bool
    negative: tuple


def posterior_mode(m, counts) -> ModeResult:
    """Unconstrained mode ``M^{-1} N / N``; negative components are reported, not clipped."""
    m = np.asarray(getattr(m, "m", m), dtype=float)
    counts = np.asarray(counts, dtype=float)
    try:
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > MAX_COND:
            raise SingularMatrixError(f"assignment matrix condition number {cond:.3g}")
        p = np.linalg.solve(m, counts / counts.sum())
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    negative = tuple(int(i) for i in np.flatnonzero(p < 0))
    return ModeResult(p, not negative, negative)


def _support_ls(m, y, support):
    ms = m[:, support]
    k = len(support)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2.0 * ms.T @ ms
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.concatenate([2.0 * ms.T @ y, [1.0]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:k]


def simplex_least_squares(m, y) -> np.ndarray:
    """``argmin_{p in simplex} |y - M p|^2`` by exhaustive active-set enumeration.

    The problem is convex, so the optimum is the best feasible
    equality-constrained solution over all supports. ``M`` may be
    rectangular (stacked blocks).
    """
    m = np.asarray(m, dtype=float)
    y = np.asarray(y, dtype=float)
    d = m.shape[1]
    if d > 12:
        raise ValueError("support enumeration is limited to d <= 12")
    best, best_obj = None, np.inf
    for size in range(1, d + 1):
        for support in itertools.combinations(range(d), size):
            q = _support_ls(m, y, list(support))
            if q is None or np.any(q < -1e-12):
                continue
            p = np.zeros(d)
            p[list(support)] = np.clip(q, 0.0, None)
            p /= p.sum()
            obj = np.sum((y - m @ p) ** 2)
            if obj < best_obj - 1e-15:
                best, best_obj = p, obj
    return best


def mitigate_least_squares(m, counts) -> np.ndarray:
    """Closest valid population vector to the observed frequencies.

    Returns the unconstrained mode exactly when it already lies in the
    simplex.
    """
    m = np.asarray(getattr(m, "m", m), dtype=float)
    counts = np.asarray(counts, dtype=float)
    y = counts / counts.sum()
    try:
        mode = posterior_mode(m, counts)
        if mode.in_simplex:
            return mode.p
    except SingularMatrixError:
        pass
    return simplex_least_squares(m, y)


@dataclass(frozen=True)
class SDResult:
    """Posterior summary from importance sampling."""

    mean: np.ndarray
    sd: np.ndarray
    ess: float
    samples: int
    log_normalizer: float

    @property
    def average_sd(self) -> float:
        return float(self.sd.mean())


def _weighted_moments(x, logw):
    w = np.exp(logw - logw.max())
    w /= w.sum()
    mean = w @ x
    centred = x - mean
    cov = (w[:, None] * centred).T @ centred
    ess = 1.0 / np.sum(w ** 2)
    return mean, cov, ess


def _softmax(y):
    full = np.concatenate([y, np.zeros(y.shape[:-1] + (1,))], axis=-1)
    full -= full.max(axis=-1, keepdims=True)
    e = np.exp(full)
    return e / e.sum(axis=-1, keepdims=True)


def _log_target(post, y):
    """Log posterior in additive log-ratio coordinates (includes the Jacobian)."""
    p = _softmax(y)
    with np.errstate(divide="ignore"):
        return _log_kernel(post, p) + np.log(p).sum(axis=-1)


def _grad_target(post, y):
    p = _softmax(y)
    g = 1.0 / p
    for m, c in zip(post.matrices, post.counts):
        g = g + m.T @ (c / (m @ p))
    return p[:-1] * (g[:-1] - g @ p)


def _laplace(post, start):
    p0 = np.clip(start, 1.0 / (post.total_counts.sum() + post.d), None)
    y0 = np.log(p0[:-1] / p0[-1])
    res = minimize(lambda y: -_log_target(post, y), y0,
                   jac=lambda y: -_grad_target(post, y), method="BFGS")
    y = res.x
    k = len(y)
    hess = np.empty((k, k))
    for i in range(k):
        step = 1e-5 * max(1.0, abs(y[i]))
        e = np.zeros(k)
        e[i] = step
        hess[i] = -(_grad_target(post, y + e) - _grad_target(post, y - e)) / (2 * step)
    hess = 0.5 * (hess + hess.T)
    evals, evecs = np.linalg.eigh(hess)
    evals = np.maximum(evals, 1e-8)
    return y, (evecs / evals) @ evecs.T


def _t_logpdf(y, loc, cov, df):
    k = len(loc)
    chol = np.linalg.cholesky(cov)
    sol = np.linalg.solve(chol, (y - loc).T)
    maha = np.sum(sol ** 2, axis=0)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return (gammaln((df + k) / 2) - gammaln(df / 2) - 0.5 * k * np.log(df * np.pi)
            - 0.5 * logdet - 0.5 * (df + k) * np.log1p(maha / df))


def _t_draw(loc, cov, df, n, rng):
    z = rng.multivariate_normal(np.zeros(len(loc)), cov, size=n, method="cholesky")
    u = rng.chisquare(df, size=n)
    return loc + z * np.sqrt(df / u)[:, None]


def posterior_sd(post: PopulationPosterior, samples: int = 20_000, seed=0,
                 adapt_rounds: int = 2, df: float = 5.0) -> SDResult:
    """Posterior mean and standard deviation of every population.

    Identity matrices: exact Dirichlet(N_j + 1) sampling. Otherwise
    self-normalized importance sampling in additive log-ratio coordinates
    with a multivariate-t proposal, started from a Laplace approximation
    and re-fitted to the weighted moments for ``adapt_rounds`` rounds.
    Emits :class:`ESSWarning` when the final effective sample size is
    below 5% of ``samples``.
    """
    d = post.d
    if d > 6:
        raise ValueError("posterior_sd supports d <= 6")
    rng = np.random.default_rng(seed)
    total = post.total_counts
    if post.is_identity():
        alpha = total + 1.0
        x = rng.dirichlet(alpha, size=samples)
        mean = x.mean(axis=0)
        sd = x.std(axis=0, ddof=1)
        log_z = -log_dirichlet_coefficient(total)
        post._cache["log_normalizer"] = log_z
        return SDResult(mean, sd, float(samples), samples, log_z)

    sizes = [c.sum() for c in post.counts]
    stacked = np.vstack([m * np.sqrt(n) for m, n in zip(post.matrices, sizes)])
    target = np.concatenate([c / np.sqrt(n) if n > 0 else c
                             for c, n in zip(post.counts, sizes)])
    loc, cov = _laplace(post, simplex_least_squares(stacked, target))
    cov = 1.5 * cov
    for _ in range(adapt_rounds + 1):
        y = _t_draw(loc, cov, df, samples, rng)
        logw = _log_target(post, y) - _t_logpdf(y, loc, cov, df)
        logw = np.where(np.isfinite(logw), logw, -np.inf)
        y_mean, y_cov, ess = _weighted_moments(y, logw)
        loc, cov = y_mean, 1.2 * y_cov + 1e-12 * np.eye(d - 1)
    # statistics come from the last round's draws
    mean, cov_p, ess = _weighted_moments(_softmax(y), logw)
    log_z = float(logsumexp(logw) - np.log(samples))
    post._cache["log_normalizer"] = log_z
    if ess < 0.05 * samples:
        warnings.warn(f"effective sample size {ess:.0f} of {samples}", ESSWarning,
                      stacklevel=2)
    return SDResult(mean, np.sqrt(np.diag(cov_p)), float(ess), samples, log_z)


def dirichlet_variance(counts) -> np.ndarray:
    """Closed-form variance of every population for a perfect measurement."""
    counts = np.asarray(counts, dtype=float)
    n, d = counts.sum(), len(counts)
    q = (counts + 1.0) / (n + d)
    return q * (1.0 - q) / (n + d + 1.0)


# --- shot-by-shot Bayesian update on a simplex lattice (d <= 3) ---


@dataclass(frozen=True)
class SimplexGrid:
    """Density values on the lattice ``{i / n : sum(i) = n}``.

    ``weights`` integrate exactly any function that is linear on every
    lattice cell, so ``sum(weights * density) == 1``.
    """

    index: np.ndarray
    resolution: int
    density: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.index / self.resolution

    @property
    def weights(self) -> np.ndarray:
        return _lattice_weights(self.index, self.resolution)

    def mode(self) -> np.ndarray:
        return self.points[np.argmax(self.density)]

    def mean(self) -> np.ndarray:
        return (self.weights * self.density) @ self.points


def _lattice(d, n):
    pts = [c + (n - sum(c),) for c in itertools.product(range(n + 1), repeat=d - 1)
           if sum(c) <= n]
    return np.array(pts, dtype=int)


def _lattice_weights(index, n):
    d = index.shape[1]
    if d == 1:
        return np.ones(len(index))
    zeros = np.sum(index == 0, axis=1)
    if d == 2:
        incident = np.where(zeros == 1, 1, 2)
        return incident / (2.0 * n)
    incident = np.choose(zeros, [6, 3, 1])
    return incident / (6.0 * n * n)


def simplex_grid(d: int, resolution: int = 100) -> SimplexGrid:
    """Uniform prior on a simplex lattice; ``resolution`` must be even."""
    if not 1 <= d <= 3:
        raise ValueError("grid posterior supports d <= 3")
    if resolution < 2 or resolution % 2:
        raise ValueError("resolution must be an even integer >= 2")
    index = _lattice(d, resolution)
    w = _lattice_weights(index, resolution)
    density = np.full(len(index), 1.0 / w.sum())
    return SimplexGrid(index, resolution, density)


def shot_likelihood(z, p, clouds):
    """``P(z | p) = sum_j p_j G(z, A_j, sigma_j)`` for every row of ``p``."""
    g = np.array([gaussian_density(z, c.center, c.sigma) for c in clouds])
    return np.asarray(p) @ g


def sequential_update(grid: SimplexGrid, z, clouds, max_drift: float = 1e-3) -> SimplexGrid:
    """Posterior after one shot ``z``.

    Raises :class:`ResolutionError` when the shot's evidence ``P(z)``
    evaluated on the even sub-lattice differs from the full lattice by more
    than ``max_drift`` (relative): the posterior is too narrow for the grid.
    """
    new = shot_likelihood(z, grid.points, clouds) * grid.density
    w = grid.weights
    evidence = w @ new
    if not evidence > 0:
        raise ResolutionError("shot has zero likelihood on every grid point")
    coarse = np.all(grid.index % 2 == 0, axis=1)
    coarse_w = _lattice_weights(grid.index[coarse] // 2, grid.resolution // 2)
    coarse_evidence = coarse_w @ new[coarse]
    drift = abs(coarse_evidence - evidence) / evidence
    if drift > max_drift:
        raise ResolutionError(f"evidence drift {drift:.2e} between lattice and sub-lattice")
    return SimplexGrid(grid.index, grid.resolution, new / evidence)


def grid_posterior(grid: SimplexGrid, shots, clouds, max_drift: float = 1e-3) -> SimplexGrid:
    for z in np.atleast_1d(shots):
        grid = sequential_update(grid, z, clouds, max_drift)
    return grid

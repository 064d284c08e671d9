"""
Single- versus multi-frequency readout of a qudit with finite shots.

*Single frequency*: all ``N`` shots at the drive frequency minimizing the
mean misclassification ``xi``. *Multi frequency*: ``N/d`` shots at each
frequency minimizing one ``xi_j``, combined into a product posterior.
Each strategy is scored by the posterior standard deviation of the
populations.

Randomness is derived from ``SeedSequence`` entropy tuples, so every
result is a deterministic function of the scenario and its seed
regardless of execution order or worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .assignment import (GaussianCloud, assignment_matrix_mc, classify_mde,
                         error_measures, owen_matrix_batch)
from .inference import PopulationPosterior, posterior_sd
from .readout import (ReadoutConfig, circle_center, steady_amp_drive_frame,
                      steady_amp_general_frame)


@dataclass(frozen=True)
class StrategyScenario:
    """Everything needed to run and score both strategies.

    ``chi`` are the per-state resonator pulls (rad/s); ``sigma`` is the
    cloud width in amplitude units (compare with ``Omega/kappa``).
    """

    chi: np.ndarray
    readout: ReadoutConfig
    sigma: float
    n_shots: int = 1000
    populations: np.ndarray | None = None
    seed: int = 0
    frame: str = "drive"
    grid_points: int = 401
    sd_samples: int = 20_000
    mc_samples: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float))
        if self.populations is None:
            object.__setattr__(self, "populations", np.full(self.d, 1.0 / self.d))
        p = np.asarray(self.populations, dtype=float)
        object.__setattr__(self, "populations", p)
        if p.shape != (self.d,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("populations must lie on the simplex")
        if self.n_shots < self.d:
            raise ValueError("need at least one shot per state")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.frame not in ("drive", "modulation"):
            raise ValueError("frame must be 'drive' or 'modulation'")

    @property
    def d(self) -> int:
        return len(self.chi)


@dataclass(frozen=True)
class XiCurve:
    grid: np.ndarray
    xi_j: np.ndarray
    xi: np.ndarray

    def argmin_xi(self) -> int:
        # np.argmin returns the first (lowest-frequency) index on ties
        return int(np.argmin(self.xi))

    def argmin_xi_j(self) -> np.ndarray:
        return np.argmin(self.xi_j, axis=0)


@dataclass(frozen=True)
class StrategyResult:
    frequencies: tuple
    shots_per_frequency: tuple
    counts: list
    matrices: list
    sd: np.ndarray
    ess: float

    @property
    def average_sd(self) -> float:
        return float(np.mean(self.sd))


@dataclass(frozen=True)
class StrategyReport:
    single: StrategyResult
    multi: StrategyResult
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        """``SD_m / SD_s``; below one favours the multi-frequency strategy."""
        return self.multi.average_sd / self.single.average_sd


def default_grid(chi, cfg: ReadoutConfig, points: int = 401) -> np.ndarray:
    chi = np.asarray(chi)
    return cfg.omega_r + np.linspace(chi.min() - 3 * cfg.kappa, chi.max() + 3 * cfg.kappa, points)


def state_amplitudes(scenario: StrategyScenario, omega_d, frame=None) -> np.ndarray:
    """Cloud centres, shape ``omega_d.shape + (d,)``."""
    frame = frame or scenario.frame
    omega_d = np.asarray(omega_d, dtype=float)[..., None]
    cfg = scenario.readout
    if frame == "drive":
        return steady_amp_drive_frame(cfg, scenario.chi, omega_d)
    return steady_amp_general_frame(cfg, scenario.chi, omega_d)


def assignment_matrices(scenario: StrategyScenario, omega_d, frame=None, seed=0) -> np.ndarray:
    """Assignment matrices at each drive frequency, shape ``(..., d, d)``.

    Drive frame (and any frame for ``d <= 3``): analytic. Otherwise Monte
    Carlo with per-frequency child seeds.
    """
    frame = frame or scenario.frame
    centers = state_amplitudes(scenario, omega_d, frame)
    if frame == "drive":
        apex = np.full(centers.shape[:-1], circle_center(scenario.readout))
        return owen_matrix_batch(centers, scenario.sigma, apex)
    if scenario.d <= 3:
        return owen_matrix_batch(centers, scenario.sigma)
    flat = centers.reshape(-1, scenario.d)
    out = np.empty((len(flat), scenario.d, scenario.d))
    for g, row in enumerate(flat):
        clouds = [GaussianCloud(c, scenario.sigma) for c in row]
        out[g] = assignment_matrix_mc(clouds, scenario.mc_samples, seed=(seed, g)).m
    return out.reshape(centers.shape[:-1] + (scenario.d, scenario.d))


def xi_curve(scenario: StrategyScenario, grid=None, frame=None, seed=0) -> XiCurve:
    """Misclassification measures across a drive-frequency grid."""
    if grid is None:
        grid = default_grid(scenario.chi, scenario.readout, scenario.grid_points)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    xi_j, xi = error_measures(assignment_matrices(scenario, grid, frame, seed))
    return XiCurve(grid, xi_j, xi)


def simulate_shots(p, clouds, n: int, seed=0):
    """Draw ``n`` shots: a state with probability ``p_j``, then a point from its cloud.

    Returns ``(states, z)``.
    """
    rng = np.random.default_rng(seed)
    p = np.asarray(p, dtype=float)
    states = rng.choice(len(p), size=n, p=p)
    centers = np.array([c.center for c in clouds])
    sigmas = np.array([c.sigma for c in clouds])
    xy = rng.normal(size=(n, 2)) * sigmas[states, None]
    return states, centers[states] + xy[:, 0] + 1j * xy[:, 1]


def _counts_at(scenario, omega_d, n, seed):
    centers = state_amplitudes(scenario, omega_d)
    clouds = [GaussianCloud(c, scenario.sigma) for c in centers]
    _, z = simulate_shots(scenario.populations, clouds, n, seed)
    return np.bincount(classify_mde(z, centers), minlength=scenario.d)


def _run(scenario, frequencies, shots, seed_seq, curve_matrices=None):
    shot_seed, sd_seed = seed_seq.spawn(2)
    shot_seeds = shot_seed.spawn(len(frequencies))
    counts = [_counts_at(scenario, w, n, s) for w, n, s in zip(frequencies, shots, shot_seeds)]
    if curve_matrices is None:
        mats = list(assignment_matrices(scenario, np.array(frequencies)))
    else:
        mats = list(curve_matrices)
    post = PopulationPosterior(mats, counts)
    res = posterior_sd(post, scenario.sd_samples, seed=sd_seed)
    return StrategyResult(tuple(float(w) for w in frequencies), tuple(shots), counts,
                          mats, res.sd, res.ess)


def _seed(scenario, *extra):
    return np.random.SeedSequence((scenario.seed,) + tuple(int(e) for e in extra))


def single_frequency_strategy(scenario: StrategyScenario, curve: XiCurve | None = None,
                              stream: int = 0) -> StrategyResult:
    """All shots at the grid frequency minimizing ``xi`` (lowest on ties)."""
    curve = curve or xi_curve(scenario)
    w = curve.grid[curve.argmin_xi()]
    return _run(scenario, [w], [scenario.n_shots], _seed(scenario, stream, 0))


def multi_frequency_strategy(scenario: StrategyScenario, curve: XiCurve | None = None,
                             stream: int = 0) -> StrategyResult:
    """``N // d`` shots at each ``xi_j``-minimizing frequency; remainder goes to the last."""
    curve = curve or xi_curve(scenario)
    freqs = curve.grid[curve.argmin_xi_j()]
    d = scenario.d
    shots = [scenario.n_shots // d] * d
    shots[-1] += scenario.n_shots - sum(shots)
    return _run(scenario, list(freqs), shots, _seed(scenario, stream, 1))


def compare_strategies(scenario: StrategyScenario, curve: XiCurve | None = None,
                       stream: int = 0) -> StrategyReport:
    curve = curve or xi_curve(scenario)
    return StrategyReport(single_frequency_strategy(scenario, curve, stream),
                          multi_frequency_strategy(scenario, curve, stream))


@dataclass(frozen=True)
class RatioPoint:
    kappa: float
    sigma: float
    sd_single: float
    sd_multi: float

    @property
    def ratio(self) -> float:
        return self.sd_multi / self.sd_single

    @property
    def flagged(self) -> bool:
        """Both strategies leave more than 10% uncertainty."""
        return self.sd_single > 0.1 and self.sd_multi > 0.1


def _ratio_task(args):
    template, kappa, sigma, grid_index, seeds = args
    cfg = replace(template.readout, kappa=kappa)
    scenario = replace(template, readout=cfg, sigma=sigma)
    curve = xi_curve(scenario)
    single, multi = [], []
    for s in range(seeds):
        report = compare_strategies(scenario, curve, stream=grid_index * 100_003 + s)
        single.append(report.single.average_sd)
        multi.append(report.multi.average_sd)
    return RatioPoint(kappa, sigma, float(np.mean(single)), float(np.mean(multi)))


def sweep_ratio(kappas, sigmas, template: StrategyScenario, seeds: int = 8,
                workers: int = 1) -> list:
    """Seed-averaged ``SD_s``, ``SD_m`` over a ``kappa x sigma`` grid.

    Points are returned in row-major ``(kappa, sigma)`` order.
    """
    kappas, sigmas = list(kappas), list(sigmas)
    if not kappas or not sigmas:
        raise ValueError("empty parameter grid")
    tasks = [(template, k, s, i * len(sigmas) + j, seeds)
             for i, k in enumerate(kappas) for j, s in enumerate(sigmas)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_ratio_task, tasks))
    return [_ratio_task(t) for t in tasks]

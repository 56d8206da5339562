"""Steady-state null models: noisy normal forms and an exact OU sampler.

The data-generating processes are the codimension-one normal forms

    fold:           dx = (-r - x^2) dt
    transcritical:  dx = (r x - x^2) dt
    pitchfork:      dx = (r x + mu x^3) dt

with additive (``sigma dW``) or multiplicative (``sigma x dW``) noise and
the bifurcation parameter r held fixed on the stable branch. Near the
stable equilibrium each of them linearizes to an Ornstein-Uhlenbeck
process with rate ``theta = -f'(x*)``; :func:`ou_exact` samples that
process exactly and serves as the numerical oracle for the
Euler-Maruyama integrator.

Trajectories are deterministic in (config, seed), including the
discard-and-restart handling of basin escapes: attempt k of a trajectory
draws from the stream ``mix_seed(seed, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from scipy.signal import lfilter

from .errors import EscapeLimit, NoStableBranch, RangeError
from .seeding import mix_seed
from .series import TimeSeries, write_series_csv

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency
    njit = None

__all__ = [
    "NormalForm",
    "NoiseSpec",
    "SimConfig",
    "Trajectory",
    "drift",
    "stable_equilibrium",
    "linearization_rate",
    "simulate",
    "ou_exact",
    "write_trajectory_csv",
]

FORMS = ("fold", "transcritical", "pitchfork")
NOISE_MODES = ("additive", "multiplicative")

_MAX_RESTARTS = 1000


@dataclass(frozen=True)
class NormalForm:
    """A codimension-one normal form.

    ``mu`` is the pitchfork cubic coefficient (mu > 0 subcritical,
    mu < 0 supercritical) and is ignored by the other forms.
    """

    kind: str
    mu: float = -1.0

    def __post_init__(self) -> None:
        if self.kind not in FORMS:
            raise RangeError(f"unknown normal form {self.kind!r}; expected one of {FORMS}")
        if self.kind == "pitchfork" and self.mu == 0.0:
            raise RangeError("pitchfork requires a nonzero cubic coefficient mu")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise structure: additive g = sigma or multiplicative g = sigma*x."""

    mode: str = "additive"
    sigma: float = 0.1

    def __post_init__(self) -> None:
        if self.mode not in NOISE_MODES:
            raise RangeError(f"unknown noise mode {self.mode!r}; expected one of {NOISE_MODES}")
        if not self.sigma > 0:
            raise RangeError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one simulated trajectory.

    Attributes:
        form: Normal form of the drift.
        noise: Noise mode and intensity.
        r: Bifurcation parameter, fixed for the whole trajectory.
        x0: Initial state; None starts at the stable equilibrium.
        h: Euler-Maruyama integration step.
        burn_in: Transient time discarded before the first sample.
        sample_dt: Uniform sampling interval of the recorded series.
        n_samples: Number of recorded samples.
        escape_radius: Maximum allowed |x - x*|; beyond it the whole
            trajectory is discarded and restarted on the next seed.
        seed: Master seed of the trajectory.
    """

    form: NormalForm = NormalForm("fold")
    noise: NoiseSpec = NoiseSpec()
    r: float = -1.0
    x0: float | None = None
    h: float = 0.01
    burn_in: float = 100.0
    sample_dt: float = 1.0
    n_samples: int = 100
    escape_radius: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise RangeError(f"h must be positive, got {self.h}")
        if self.h > self.sample_dt:
            raise RangeError(f"h = {self.h} must not exceed sample_dt = {self.sample_dt}")
        if self.burn_in < 0:
            raise RangeError(f"burn_in must be nonnegative, got {self.burn_in}")
        if self.n_samples < 1:
            raise RangeError(f"n_samples must be positive, got {self.n_samples}")
        if not self.escape_radius > 0:
            raise RangeError(f"escape_radius must be positive, got {self.escape_radius}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A sampled path plus restart bookkeeping."""

    series: TimeSeries
    escapes_discarded: int
    seed_used: int


def drift(form: NormalForm, x: float, r: float) -> float:
    """Deterministic drift f(x, r) of the normal form."""
    if form.kind == "fold":
        return -r - x * x
    if form.kind == "transcritical":
        return r * x - x * x
    return r * x + form.mu * x * x * x


def stable_equilibrium(form: NormalForm, r: float) -> float:
    """Stable equilibrium of the steady-state null model.

    Valid strictly on the stable side of the bifurcation (r < 0 for all
    three forms): +sqrt(-r) for the fold, 0 otherwise.

    Raises:
        NoStableBranch: if r is not strictly on the stable side.
    """
    if r >= 0:
        raise NoStableBranch(
            f"{form.kind} null model needs r < 0 for a stable branch, got r = {r}"
        )
    if form.kind == "fold":
        return math.sqrt(-r)
    return 0.0


def linearization_rate(form: NormalForm, r: float) -> float:
    """Mean-reversion rate theta = -f'(x*) of the linearized dynamics."""
    x_star = stable_equilibrium(form, r)
    if form.kind == "fold":
        return 2.0 * x_star
    if form.kind == "transcritical":
        return -r
    return -r - 3.0 * form.mu * x_star * x_star


_FORM_CODES = {"fold": 0, "transcritical": 1, "pitchfork": 2}


def _em_path_py(x0, x_star, radius, form_code, mu, r, multiplicative, sigma,
                h, burn_steps, steps_per_sample, n_samples, noise):
    out = np.empty(n_samples)
    x = x0
    sqrt_h = math.sqrt(h)
    if abs(x - x_star) > radius:
        return out, True
    idx = 0
    for k in range(n_samples):
        steps = burn_steps if k == 0 else steps_per_sample
        for _ in range(steps):
            if form_code == 0:
                f = -r - x * x
            elif form_code == 1:
                f = r * x - x * x
            else:
                f = r * x + mu * x * x * x
            g = sigma * x if multiplicative else sigma
            x = x + f * h + g * sqrt_h * noise[idx]
            idx += 1
            if abs(x - x_star) > radius:
                return out, True
        out[k] = x
    return out, False


_em_path = njit(cache=True)(_em_path_py) if njit is not None else _em_path_py


def _step_counts(config: SimConfig) -> tuple[int, int, int]:
    burn_steps = int(round(config.burn_in / config.h))
    steps_per_sample = int(round(config.sample_dt / config.h))
    if steps_per_sample < 1:
        raise RangeError("sample_dt must cover at least one integration step")
    total = burn_steps + (config.n_samples - 1) * steps_per_sample
    return burn_steps, steps_per_sample, total


def simulate(config: SimConfig) -> Trajectory:
    """Integrate the null model and return a uniformly sampled trajectory.

    Euler-Maruyama recursion ``x <- x + f(x, r) h + g(x) sqrt(h) xi`` with
    standard-normal increments; ``burn_in`` time units are discarded, the
    state at the end of the burn-in is the first sample, and one sample is
    recorded every ``sample_dt`` thereafter (both intervals rounded to
    whole steps). If the state ever leaves ``escape_radius`` around the
    stable equilibrium the whole path is discarded and re-run on the next
    derived seed.

    Raises:
        EscapeLimit: after more than 1000 consecutive restarts.
    """
    x_star = stable_equilibrium(config.form, config.r)
    x0 = config.x0 if config.x0 is not None else x_star
    burn_steps, steps_per_sample, total = _step_counts(config)
    escapes = 0
    for attempt in range(_MAX_RESTARTS + 1):
        attempt_seed = mix_seed(config.seed, attempt)
        noise = np.random.default_rng(attempt_seed).standard_normal(total)
        samples, escaped = _em_path(
            float(x0), float(x_star), float(config.escape_radius),
            _FORM_CODES[config.form.kind], float(config.form.mu), float(config.r),
            config.noise.mode == "multiplicative", float(config.noise.sigma),
            float(config.h), burn_steps, steps_per_sample, config.n_samples, noise,
        )
        if not escaped:
            series = TimeSeries(samples, dt=config.sample_dt)
            return Trajectory(series=series, escapes_discarded=escapes,
                              seed_used=attempt_seed)
        escapes += 1
    raise EscapeLimit(
        f"trajectory escaped on {escapes} consecutive attempts; "
        "the configuration is pathological"
    )


def ou_exact(theta: float, sigma: float, delta: float, n: int, seed: int) -> TimeSeries:
    """Exact stationary Ornstein-Uhlenbeck samples at uniform spacing.

    x_0 ~ N(0, sigma^2/(2 theta)) and
    x_{k+1} = a x_k + sqrt(sigma^2 (1 - a^2)/(2 theta)) xi_k with
    a = exp(-theta delta): the sampled OU process is exactly this AR(1).
    """
    if not (theta > 0 and sigma > 0 and delta > 0):
        raise RangeError("theta, sigma and delta must all be positive")
    if n < 1:
        raise RangeError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n)
    a = math.exp(-theta * delta)
    stationary_sd = sigma / math.sqrt(2.0 * theta)
    x = np.empty(n)
    x[0] = stationary_sd * xi[0]
    if n > 1:
        innovations = stationary_sd * math.sqrt(1.0 - a * a) * xi[1:]
        x[1:] = lfilter([1.0], [1.0, -a], innovations, zi=np.array([a * x[0]]))[0]
    return TimeSeries(x, dt=delta)


def _config_comments(config: SimConfig, trajectory: Trajectory) -> Iterable[str]:
    yield f"form = {config.form.kind}"
    yield f"mu = {config.form.mu!r}"
    yield f"noise = {config.noise.mode}"
    yield f"sigma = {config.noise.sigma!r}"
    yield f"r = {config.r!r}"
    yield f"x0 = {'equilibrium' if config.x0 is None else repr(config.x0)}"
    yield f"h = {config.h!r}"
    yield f"burn_in = {config.burn_in!r}"
    yield f"sample_dt = {config.sample_dt!r}"
    yield f"n_samples = {config.n_samples}"
    yield f"escape_radius = {config.escape_radius!r}"
    yield f"seed = {config.seed}"
    yield f"seed_used = {trajectory.seed_used}"
    yield f"escapes_discarded = {trajectory.escapes_discarded}"


def write_trajectory_csv(trajectory: Trajectory, config: SimConfig, path) -> None:
    """Write a trajectory in the standard series CSV format.

    The full simulation configuration, the seed actually used and the
    restart count are recorded as comment lines.
    """
    write_series_csv(trajectory.series, path, comments=_config_comments(config, trajectory))

"""
Monte-Carlo Trial Harness

Samples fixed-weight located/unlocated Pauli error patterns, decodes them
with the concatenated-code decoder and collects success records, either as
a scatter over a rectangle of error rates or as failure-rate estimates at
chosen (t_u, t_l) points.

Every trial draws from its own counter-based stream (Philox keyed by the
master seed and the trial index), so results do not depend on how trials
are distributed over workers.
"""

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache, partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from .decoder import ConcatenatedCode, ConcatenatedDecoder, PriorVector, split_logical_pattern
from .stabilizer import LocatedSet, PauliOperator, get_code
from .utils import banner, report

P_DEC_FLOOR = 1e-12
DESK_SCALE_MAX_LEVELS = 6
LARGE_SCALE_MAX_LEVELS = 9

_EPS = 1e-9


@lru_cache(maxsize=None)
def _base_size(code_name):
    return get_code(code_name).n


@lru_cache(maxsize=8)
def decoder_for(code_name, levels):
    """Shared decoder per (base code, levels); block tables are built once per process."""
    return ConcatenatedDecoder(ConcatenatedCode(get_code(code_name), levels))


def trial_rng(master_seed, *key):
    """Counter-based generator for one stream, keyed by (master seed, key...)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=key)))


@dataclass(frozen=True)
class RateRectangle:
    """Sampling area in rate coordinates: p = t_u/(n - t_l) in [p_lo, p_hi], q = t_l/n in [q_lo, q_hi]."""
    p_lo: float = 0.0
    p_hi: float = 0.4
    q_lo: float = 0.0
    q_hi: float = 0.7

    def __post_init__(self):
        for name in ('p_lo', 'p_hi', 'q_lo', 'q_hi'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.p_lo > self.p_hi or self.q_lo > self.q_hi:
            raise ValueError(f"rectangle bounds are inverted: {self}")

    def located_bounds(self, n):
        lo = math.ceil(self.q_lo * n - _EPS)
        hi = math.floor(self.q_hi * n + _EPS)
        if lo > hi:
            raise ValueError(f"no integer t_l in q range [{self.q_lo}, {self.q_hi}] at n = {n}")
        return lo, hi

    def unlocated_bounds(self, n, t_l):
        remaining = n - t_l
        lo = math.ceil(self.p_lo * remaining - _EPS)
        hi = math.floor(self.p_hi * remaining + _EPS)
        # a fully located block reports p = 0
        if lo > hi or (remaining == 0 and self.p_lo > 0.0):
            raise ValueError(
                f"no integer t_u in p range [{self.p_lo}, {self.p_hi}] at n = {n}, t_l = {t_l}"
            )
        return lo, hi

    def located_choices(self, n):
        """
        The t_l values a uniform trial may draw at block length n.

        These are the integers of the q range whose p range still holds an
        integer t_u, so every drawn (t_u, t_l) lies inside the rectangle.

        Raises:
        -------
        ValueError
            If no such t_l exists
        """
        return _located_choices(self, n)


@lru_cache(maxsize=16)
def _located_choices(rectangle, n):
    lo, hi = rectangle.located_bounds(n)
    t_l = np.arange(lo, hi + 1, dtype=np.int64)
    remaining = (n - t_l).astype(float)
    tu_lo = np.ceil(rectangle.p_lo * remaining - _EPS)
    tu_hi = np.floor(rectangle.p_hi * remaining + _EPS)
    choices = t_l[(tu_lo <= tu_hi) & ((remaining > 0) | (rectangle.p_lo == 0.0))]
    if not len(choices):
        raise ValueError(f"rectangle {rectangle} holds no integer (t_u, t_l) at n = {n}")
    choices.setflags(write=False)
    return choices


@dataclass(frozen=True)
class TrialConfig:
    """
    Configuration of a batch of decoding trials.

    mode is 'fixed' (every trial at (t_u, t_l)) or 'uniform' (t_l uniform on
    the integers of the q range whose p range holds an integer, then t_u
    uniform on the integers of the p range at that t_l). p_dec overrides the
    decoder prior rate, which otherwise is the realized unlocated rate of
    each trial.
    """
    code_name: str = 'five'
    levels: int = 5
    trials: int = 2000
    master_seed: int = 0
    mode: str = 'uniform'
    t_u: int = 0
    t_l: int = 0
    rectangle: RateRectangle = field(default_factory=RateRectangle)
    p_dec: Optional[float] = None
    large_scale: bool = False

    def __post_init__(self):
        if self.mode not in ('fixed', 'uniform'):
            raise ValueError(f"mode must be 'fixed' or 'uniform', got '{self.mode}'")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        limit = LARGE_SCALE_MAX_LEVELS if self.large_scale else DESK_SCALE_MAX_LEVELS
        if self.levels > limit:
            hint = "" if self.large_scale else " (enable large-scale mode for more)"
            raise ValueError(f"levels must be <= {limit}{hint}, got {self.levels}")
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")
        if self.p_dec is not None and not 0.0 <= self.p_dec < 1.0:
            raise ValueError(f"p_dec must lie in [0, 1), got {self.p_dec}")
        if self.mode == 'fixed':
            if self.t_u < 0 or self.t_l < 0 or self.t_u + self.t_l > self.n:
                raise ValueError(f"infeasible weights (t_u={self.t_u}, t_l={self.t_l}) for n = {self.n}")
        else:
            self.rectangle.located_choices(self.n)

    @property
    def n(self):
        return _base_size(self.code_name) ** self.levels

    def to_dict(self):
        return {
            'code': self.code_name,
            'levels': self.levels,
            'n': self.n,
            'trials': self.trials,
            'master_seed': self.master_seed,
            'mode': self.mode,
            't_u': self.t_u,
            't_l': self.t_l,
            'rectangle': [self.rectangle.p_lo, self.rectangle.p_hi, self.rectangle.q_lo, self.rectangle.q_hi],
            'p_dec': self.p_dec,
            'large_scale': self.large_scale,
        }


@dataclass(frozen=True)
class SweepConfig:
    """Points and trial budget of a failure-rate sweep."""
    code_name: str = 'five'
    levels: int = 5
    points: Tuple[Tuple[int, int], ...] = ((0, 0),)
    trials_per_point: int = 200
    master_seed: int = 0
    p_dec: Optional[float] = None
    large_scale: bool = False

    def __post_init__(self):
        if self.trials_per_point < 0:
            raise ValueError(f"trials_per_point must be >= 0, got {self.trials_per_point}")
        if not self.points:
            raise ValueError("a sweep needs at least one (t_u, t_l) point")

    def to_dict(self):
        return {
            'code': self.code_name,
            'levels': self.levels,
            'points': [list(p) for p in self.points],
            'trials_per_point': self.trials_per_point,
            'master_seed': self.master_seed,
            'p_dec': self.p_dec,
            'large_scale': self.large_scale,
        }


@dataclass(frozen=True)
class ErrorPattern:
    """Located positions (sorted) and the full n-qubit letter assignment."""
    located: np.ndarray
    assignment: np.ndarray

    @property
    def n(self):
        return len(self.assignment)

    @property
    def t_l(self):
        return len(self.located)

    @property
    def t_u(self):
        mask = np.ones(self.n, dtype=bool)
        mask[self.located] = False
        return int(np.count_nonzero(self.assignment[mask]))

    def located_set(self):
        return LocatedSet.of(self.located.tolist(), self.n)

    def to_pauli(self):
        return PauliOperator.from_letters(self.assignment)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    t_u: int
    t_l: int
    success: bool
    stream: str


def sample_error(n, t_u, t_l, rng) -> ErrorPattern:
    """
    Uniform error pattern with t_l located and t_u unlocated errors.

    Located positions are drawn without replacement and carry a uniform
    letter from {I, X, Y, Z}; unlocated positions are then drawn without
    replacement from the rest and carry a uniform letter from {X, Y, Z}.
    """
    if t_u < 0 or t_l < 0 or t_u + t_l > n:
        raise ValueError(f"infeasible weights (t_u={t_u}, t_l={t_l}) for n = {n}")
    located = np.sort(rng.choice(n, size=t_l, replace=False)).astype(np.int64)
    complement = np.setdiff1d(np.arange(n, dtype=np.int64), located, assume_unique=True)
    unlocated = rng.choice(complement, size=t_u, replace=False)

    assignment = np.zeros(n, dtype=np.uint8)
    assignment[located] = rng.integers(0, 4, size=t_l, dtype=np.uint8)
    assignment[unlocated] = rng.integers(1, 4, size=t_u, dtype=np.uint8)
    return ErrorPattern(located=located, assignment=assignment)


def build_priors(pattern: ErrorPattern, p_dec: float):
    """[1/4]*4 on located positions, [1 - p, p/3, p/3, p/3] elsewhere (p floored at 1e-12)."""
    if not 0.0 <= p_dec < 1.0:
        raise ValueError(f"p_dec must lie in [0, 1), got {p_dec}")
    if p_dec < P_DEC_FLOOR and pattern.t_u > 0:
        warnings.warn(f"p_dec = {p_dec} floored at {P_DEC_FLOOR} to keep unlocated errors possible")
    p = max(p_dec, P_DEC_FLOOR)
    priors = np.tile(PriorVector.depolarizing(p).as_array(), (pattern.n, 1))
    priors[pattern.located] = PriorVector.located().as_array()
    return priors


def _sample_weights(config, n, rng):
    if config.mode == 'fixed':
        return config.t_u, config.t_l
    choices = config.rectangle.located_choices(n)
    t_l = int(choices[rng.integers(0, len(choices))])
    tu_lo, tu_hi = config.rectangle.unlocated_bounds(n, t_l)
    t_u = int(rng.integers(tu_lo, tu_hi + 1))
    return t_u, t_l


def run_trial(config: TrialConfig, index: int, stream: Optional[Tuple[int, ...]] = None) -> TrialRecord:
    """
    One decoding trial.

    Parameters:
    -----------
    config : TrialConfig
        Batch configuration
    index : int
        Trial index recorded in the result
    stream : tuple of int, optional
        RNG stream key; defaults to (index,)
    """
    key = stream if stream is not None else (index,)
    rng = trial_rng(config.master_seed, *key)
    n = config.n
    t_u, t_l = _sample_weights(config, n, rng)
    pattern = sample_error(n, t_u, t_l, rng)
    if config.p_dec is not None:
        p_dec = config.p_dec
    else:
        p_dec = t_u / (n - t_l) if n > t_l else 0.0
    outcome = decoder_for(config.code_name, config.levels).decode(build_priors(pattern, p_dec), pattern.assignment)
    return TrialRecord(
        trial=index,
        t_u=t_u,
        t_l=t_l,
        success=bool(outcome.success),
        stream='-'.join(str(k) for k in key),
    )


def _run_jobs(func, jobs, threads):
    jobs = list(jobs)
    available = os.cpu_count() or 1
    if threads > available:
        warnings.warn(f"{threads} workers requested but only {available} CPUs available; using {available}")
        threads = available
    if threads <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    chunksize = max(1, len(jobs) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, jobs, chunksize=chunksize))


def _scatter_job(config, index):
    return run_trial(config, index)


def scatter_experiment(config: TrialConfig, threads: int = 1, verbose: bool = False) -> List[TrialRecord]:
    """Run config.trials independent trials; records come back in trial-index order."""
    if config.mode != 'uniform':
        raise ValueError("scatter_experiment needs a config in 'uniform' mode")
    banner(f"🎲 Scatter experiment: {config.code_name} code, L={config.levels}, n={config.n}", verbose)
    records = _run_jobs(partial(_scatter_job, config), range(config.trials), threads)
    failures = sum(not r.success for r in records)
    report(f"✓ Completed {len(records)} trials ({failures} decoding failures)", verbose)
    return records


def wilson_interval(failures, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 0.0
    z = float(norm.ppf(1.0 - (1.0 - confidence) / 2.0))
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _sweep_job(base_config, job):
    point_index, trial_index, t_u, t_l = job
    config = replace(base_config, mode='fixed', t_u=t_u, t_l=t_l)
    return point_index, run_trial(config, trial_index, stream=(point_index, trial_index))


def failure_rate_sweep(code_name: str, levels: int, points: Sequence[Tuple[int, int]],
                       trials_per_point: int, master_seed: int, p_dec: Optional[float] = None,
                       threads: int = 1, large_scale: bool = False, verbose: bool = False):
    """
    Failure fraction and Wilson 95% interval at each (t_u, t_l) point.

    Returns:
    --------
    pandas.DataFrame
        Columns t_u, t_l, failures, trials, rate, ci_lo, ci_hi; one row per point
    """
    base = TrialConfig(code_name=code_name, levels=levels, trials=trials_per_point,
                       master_seed=master_seed, mode='fixed', p_dec=p_dec, large_scale=large_scale)
    points = [(int(t_u), int(t_l)) for t_u, t_l in points]
    for t_u, t_l in points:
        # validates each point against n
        replace(base, t_u=t_u, t_l=t_l)

    banner(f"📈 Failure-rate sweep: {len(points)} points x {trials_per_point} trials", verbose)
    jobs = [(i, j, t_u, t_l) for i, (t_u, t_l) in enumerate(points) for j in range(trials_per_point)]
    results = _run_jobs(partial(_sweep_job, base), jobs, threads)

    failures = [0] * len(points)
    for point_index, record in results:
        failures[point_index] += not record.success

    rows = []
    for (t_u, t_l), count in zip(points, failures):
        lo, hi = wilson_interval(count, trials_per_point)
        rows.append({
            't_u': t_u,
            't_l': t_l,
            'failures': count,
            'trials': trials_per_point,
            'rate': count / trials_per_point if trials_per_point else 0.0,
            'ci_lo': lo,
            'ci_hi': hi,
        })
    report(f"✓ Estimated failure rates at {len(rows)} points", verbose)
    return pd.DataFrame(rows, columns=['t_u', 't_l', 'failures', 'trials', 'rate', 'ci_lo', 'ci_hi'])


def rate_points(n, rates):
    """Convert (p, q) rate pairs to integer (t_u, t_l) weights at block length n."""
    points = []
    for p, q in rates:
        t_l = int(round(q * n))
        t_u = int(round(p * (n - t_l)))
        points.append((t_u, t_l))
    return points


# ---------------------------------------------------------------------------
# Record tables and boundary comparison
# ---------------------------------------------------------------------------

def records_to_dataframe(records: Sequence[TrialRecord], n: Optional[int] = None):
    """trial, t_u, t_l, success (0/1); with n given, rate columns p and q are added."""
    df = pd.DataFrame(
        [(r.trial, r.t_u, r.t_l, int(r.success)) for r in records],
        columns=['trial', 't_u', 't_l', 'success'],
    )
    if n is not None:
        remaining = n - df['t_l']
        df['p'] = np.where(remaining > 0, df['t_u'] / remaining.where(remaining > 0, 1), 0.0)
        df['q'] = df['t_l'] / n
    return df


def failure_points(records: Sequence[TrialRecord], n: int):
    """The failed trials only, in weight and rate coordinates (the scatter point cloud)."""
    df = records_to_dataframe(records, n)
    return df.loc[df['success'] == 0, ['trial', 't_u', 't_l', 'p', 'q']].reset_index(drop=True)


def boundary_distance(points, curve):
    """
    Signed Euclidean distance in the (q, p) plane from each point to a
    boundary polyline; positive inside the region (p below the boundary).

    Parameters:
    -----------
    points : pandas.DataFrame
        Columns p and q
    curve : pandas.DataFrame
        Boundary polyline with columns q and p
    """
    curve = curve.sort_values('q').reset_index(drop=True)
    cq = curve['q'].to_numpy(float)
    cp = curve['p'].to_numpy(float)
    q = points['q'].to_numpy(float)
    p = points['p'].to_numpy(float)

    if len(cq) == 1:
        dist = np.hypot(q - cq[0], p - cp[0])
    else:
        a = np.stack([cq[:-1], cp[:-1]], axis=1)
        d = np.stack([cq[1:], cp[1:]], axis=1) - a
        length2 = np.maximum((d ** 2).sum(axis=1), 1e-300)
        rel_q = q[:, None] - a[None, :, 0]
        rel_p = p[:, None] - a[None, :, 1]
        t = np.clip((rel_q * d[None, :, 0] + rel_p * d[None, :, 1]) / length2[None, :], 0.0, 1.0)
        dq = rel_q - t * d[None, :, 0]
        dp = rel_p - t * d[None, :, 1]
        dist = np.sqrt(dq ** 2 + dp ** 2).min(axis=1)

    inside = (q <= cq[-1] + _EPS) & (p <= np.interp(q, cq, cp) + _EPS)
    return np.where(inside, dist, -dist)


def summarize_scatter(records_df, inner_curve, outer_curve, margin=0.05):
    """
    Failure fractions well inside one boundary and well outside another.

    inner_curve is the boundary whose interior should decode reliably (the
    combined bound); outer_curve is the one beyond which decoding should
    mostly fail (the generalized bound).
    """
    inner = boundary_distance(records_df, inner_curve)
    outer = boundary_distance(records_df, outer_curve)
    failed = records_df['success'].to_numpy() == 0
    deep_inside = inner > margin
    far_outside = outer < -margin
    return {
        'inside_trials': int(deep_inside.sum()),
        'inside_failure_fraction': float(failed[deep_inside].mean()) if deep_inside.any() else float('nan'),
        'outside_trials': int(far_outside.sum()),
        'outside_failure_fraction': float(failed[far_outside].mean()) if far_outside.any() else float('nan'),
    }


def run_split_logical_trial(code_name='five', levels=2, p_dec=0.1):
    """
    Decode the heavier half of a minimum-weight logical under i.i.d.
    depolarizing priors. ML decoding prefers the lighter complement, so the
    outcome is a failure.
    """
    base = get_code(code_name)
    pattern = split_logical_pattern(base, levels)
    n = len(pattern)
    priors = np.tile(PriorVector.depolarizing(max(p_dec, P_DEC_FLOOR)).as_array(), (n, 1))
    return decoder_for(code_name, levels).decode(priors, pattern)


def run_sweep(config: SweepConfig, threads: int = 1, verbose: bool = False):
    return failure_rate_sweep(
        config.code_name, config.levels, config.points, config.trials_per_point, config.master_seed,
        p_dec=config.p_dec, threads=threads, large_scale=config.large_scale, verbose=verbose,
    )

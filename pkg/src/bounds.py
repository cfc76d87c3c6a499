"""
Correctability Bounds Module

Evaluates the quantum Hamming bound, its located/unlocated generalization,
the tighter bound obtained by trading two located errors for one unlocated
error, and the large-n coherent-information boundary.

Counting is exact (arbitrary-precision integers) for n <= 64 and done in the
base-2 log domain with log-gamma binomials above that. Whenever a log-domain
result falls within GUARD_BAND bits of equality it is recomputed exactly.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect
from scipy.special import gammaln, logsumexp, xlogy
from scipy.stats import entropy

EXACT_LIMIT = 64
GUARD_BAND = 1e-6
BOUNDARY_XTOL = 1e-9
# region walks defer to a full evaluation this close (in bits) to equality
WALK_MARGIN = 1e-3

_LN2 = math.log(2.0)
_LN3 = math.log(3.0)
_LOG2_3 = math.log2(3.0)


@dataclass(frozen=True)
class CodeParams:
    """[[n, k]] block parameters: n physical qubits encoding k logical qubits."""
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k must lie in [0, n={self.n}], got {self.k}")


@dataclass(frozen=True)
class ErrorWeights:
    """Numbers of unlocated (t_u) and located (t_l) errors."""
    t_u: int
    t_l: int

    def validate(self, n):
        if self.t_u < 0 or self.t_l < 0:
            raise ValueError(f"error weights must be nonnegative, got (t_u={self.t_u}, t_l={self.t_l})")
        if self.t_l > n:
            raise ValueError(f"t_l={self.t_l} exceeds n={n}")
        if self.t_u > n - self.t_l:
            raise ValueError(f"t_u={self.t_u} exceeds n - t_l = {n - self.t_l}")
        return self


@dataclass(frozen=True)
class ErrorRates:
    """
    Asymptotic noise parameterization.

    p is the unlocated rate t_u/(n - t_l), q the located rate t_l/n and r the
    code rate k/n.
    """
    p: float
    q: float
    r: float = 0.0

    def __post_init__(self):
        for name in ('p', 'q', 'r'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


class BoundKind(Enum):
    ORIGINAL = 'original'
    GENERALIZED = 'generalized'
    TIGHTER = 'tighter'
    COMBINED = 'combined'


@dataclass(frozen=True)
class BoundEvaluation:
    """Outcome of one bound evaluation, with the arithmetic path that decided it."""
    holds: bool
    log2_lhs: float
    exact: bool
    in_guard_band: bool


@dataclass
class RegionCurve:
    """Boundary of a correctable region: (t_u, max_t_l) for t_u = 0, 1, ..."""
    params: CodeParams
    kind: BoundKind
    points: List[Tuple[int, int]] = field(default_factory=list)

    def to_dataframe(self):
        return pd.DataFrame(self.points, columns=['t_u', 'max_t_l'], dtype='int64')

    def to_json_pairs(self):
        return [[int(t_u), int(t_l)] for t_u, t_l in self.points]

    def to_rate_dataframe(self):
        """The same boundary in rate coordinates q = t_l/n, p = t_u/(n - t_l)."""
        n = self.params.n
        rows = []
        for t_u, t_l in self.points:
            remaining = n - t_l
            rows.append({'q': t_l / n, 'p': t_u / remaining if remaining else 0.0})
        return pd.DataFrame(rows, columns=['q', 'p'])


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def _exact_weight_sum(m, t):
    """sum_{i=0}^{t} C(m, i) 3^i as an exact integer."""
    return sum(math.comb(m, i) * 3 ** i for i in range(min(t, m) + 1))


def _log2_weight_sum(m, t):
    """log2 of sum_{i=0}^{t} C(m, i) 3^i via log-gamma binomials."""
    i = np.arange(min(t, m) + 1, dtype=float)
    terms = gammaln(m + 1.0) - gammaln(i + 1.0) - gammaln(m - i + 1.0) + i * _LN3
    return float(logsumexp(terms)) / _LN2


def _evaluate_exact(n, k, t_u, t_l):
    lhs = 4 ** t_l * _exact_weight_sum(n - t_l, t_u) * 2 ** k
    log2_lhs = math.log2(lhs)
    return BoundEvaluation(
        holds=lhs <= (1 << n),
        log2_lhs=log2_lhs,
        exact=True,
        in_guard_band=abs(log2_lhs - n) < GUARD_BAND,
    )


def _evaluate_log(n, k, t_u, t_l):
    log2_lhs = 2.0 * t_l + k + _log2_weight_sum(n - t_l, t_u)
    return BoundEvaluation(
        holds=log2_lhs <= n,
        log2_lhs=log2_lhs,
        exact=False,
        in_guard_band=abs(log2_lhs - n) < GUARD_BAND,
    )


def _evaluate(n, k, t_u, t_l, method='auto'):
    """4^{t_l} sum_{i<=t_u} C(n - t_l, i) 3^i 2^k <= 2^n, by the requested path."""
    if method == 'exact':
        return _evaluate_exact(n, k, t_u, t_l)
    if method == 'log':
        return _evaluate_log(n, k, t_u, t_l)
    if method != 'auto':
        raise ValueError(f"method must be 'auto', 'exact' or 'log', got '{method}'")

    if n <= EXACT_LIMIT:
        return _evaluate_exact(n, k, t_u, t_l)

    result = _evaluate_log(n, k, t_u, t_l)
    if result.in_guard_band:
        warnings.warn(
            f"log-domain bound at (n={n}, k={k}, t_u={t_u}, t_l={t_l}) is within "
            f"{GUARD_BAND} bits of equality; recomputing exactly"
        )
        exact = _evaluate_exact(n, k, t_u, t_l)
        return BoundEvaluation(exact.holds, exact.log2_lhs, True, True)
    return result


def _check_t(params, t):
    if not 0 <= t <= params.n:
        raise ValueError(f"t must lie in [0, n={params.n}], got {t}")


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

def evaluate_hamming(params: CodeParams, t: int, method='auto') -> BoundEvaluation:
    """
    Evaluate the quantum Hamming bound sum_{i<=t} C(n,i) 3^i 2^k <= 2^n.

    Parameters:
    -----------
    params : CodeParams
        Block parameters
    t : int
        Number of correctable unlocated errors, 0 <= t <= n
    method : str
        'auto' (exact for n <= 64, log domain above), 'exact' or 'log'

    Returns:
    --------
    BoundEvaluation
    """
    _check_t(params, t)
    return _evaluate(params.n, params.k, t, 0, method)


def satisfies_hamming(params: CodeParams, t: int) -> bool:
    """
    Whether t unlocated errors pass the quantum Hamming bound.

    Parameters:
    -----------
    params : CodeParams
        Block length n and logical qubit count k
    t : int
        Number of unlocated errors, 0 <= t <= n

    Returns:
    --------
    bool
        True when sum_{i<=t} C(n, i) 3^i 2^k <= 2^n
    """
    return evaluate_hamming(params, t).holds


def evaluate_generalized(params: CodeParams, w: ErrorWeights, method='auto') -> BoundEvaluation:
    """Evaluate 4^{t_l} sum_{i<=t_u} C(n - t_l, i) 3^i 2^k <= 2^n."""
    w.validate(params.n)
    return _evaluate(params.n, params.k, w.t_u, w.t_l, method)


def satisfies_generalized(params: CodeParams, w: ErrorWeights) -> bool:
    """Whether (t_u, t_l) passes the generalized bound; see evaluate_generalized."""
    return evaluate_generalized(params, w).holds


def satisfies_tighter(params: CodeParams, w: ErrorWeights) -> bool:
    """Hamming bound at t = t_u + floor(t_l / 2)."""
    w.validate(params.n)
    return satisfies_hamming(params, w.t_u + w.t_l // 2)


def satisfies_original(params: CodeParams, w: ErrorWeights) -> bool:
    """Hamming bound with every located error counted as an unlocated one."""
    w.validate(params.n)
    return satisfies_hamming(params, w.t_u + w.t_l)


def satisfies(params: CodeParams, w: ErrorWeights, kind: BoundKind) -> bool:
    kind = BoundKind(kind)
    if kind is BoundKind.ORIGINAL:
        return satisfies_original(params, w)
    if kind is BoundKind.GENERALIZED:
        return satisfies_generalized(params, w)
    if kind is BoundKind.TIGHTER:
        return satisfies_tighter(params, w)
    return satisfies_generalized(params, w) and satisfies_tighter(params, w)


def hamming_max_t(params: CodeParams) -> Optional[int]:
    """Largest t with satisfies_hamming, or None when even t = 0 fails."""
    return _largest(lambda t: satisfies_hamming(params, t), params.n)


def _largest(holds, upper):
    """Largest x in [0, upper] with holds(x), for a predicate true on a prefix."""
    if not holds(0):
        return None
    if holds(upper):
        return upper
    lo, hi = 0, upper
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_correctable_located(params: CodeParams, t_u: int, kind: BoundKind) -> Optional[int]:
    """
    Largest t_l such that (t_u, t_l) satisfies the chosen bound.

    Every bound is monotone in t_l, so the satisfying set is a prefix and
    the boundary is found by bisection on the integers.
    """
    _check_t(params, t_u)
    kind = BoundKind(kind)
    return _largest(lambda t_l: satisfies(params, ErrorWeights(t_u, t_l), kind), params.n - t_u)


def max_correctable_unlocated(params: CodeParams, t_l: int, kind: BoundKind) -> Optional[int]:
    """Largest t_u such that (t_u, t_l) satisfies the chosen bound."""
    _check_t(params, t_l)
    kind = BoundKind(kind)
    return _largest(lambda t_u: satisfies(params, ErrorWeights(t_u, t_l), kind), params.n - t_l)


def bound_region(params: CodeParams, kind: BoundKind) -> RegionCurve:
    """
    Boundary curve of the region allowed by a bound.

    Parameters:
    -----------
    params : CodeParams
        Block parameters
    kind : BoundKind
        Which bound (or the conjunction 'combined')

    Returns:
    --------
    RegionCurve
        (t_u, max_t_l) for t_u = 0 up to the last t_u that admits t_l = 0
    """
    kind = BoundKind(kind)
    if kind is BoundKind.GENERALIZED:
        points = _generalized_staircase(params)
    elif kind is BoundKind.COMBINED:
        tighter = _hamming_staircase(params, BoundKind.TIGHTER)
        points = [(t_u, min(a, b)) for (t_u, a), (_, b) in zip(_generalized_staircase(params), tighter)]
    else:
        points = _hamming_staircase(params, kind)
    return RegionCurve(params=params, kind=kind, points=points)


def _hamming_staircase(params, kind):
    """Tighter and original regions both follow from the single Hamming threshold."""
    t_max = hamming_max_t(params)
    if t_max is None:
        return []
    points = []
    for t_u in range(t_max + 1):
        slack = t_max - t_u
        max_t_l = slack if kind is BoundKind.ORIGINAL else 2 * slack + 1
        points.append((t_u, min(max_t_l, params.n - t_u)))
    return points


def _walk_staircase(n, holds, start):
    """
    Boundary of a region that is a down-set in (t_u, t_l).

    max_t_l never grows with t_u, so each t_u resumes from the previous
    boundary and steps down. holds is called with t_u non-decreasing and
    t_l non-increasing.
    """
    points = []
    t_l = start
    for t_u in range(n + 1):
        t_l = min(t_l, n - t_u)
        while t_l >= 0 and not holds(t_u, t_l):
            t_l -= 1
        if t_l < 0:
            break
        points.append((t_u, t_l))
    return points


class _RunningWeightSum:
    """
    ln sum_{i<=t} C(m, i) 3^i, kept up to date as t or m grows by one.

    Also tracks the top term ln C(m, t) 3^t. Requires t <= m. The running
    values are recomputed from scratch every REANCHOR_EVERY moves.
    """

    REANCHOR_EVERY = 4096

    def __init__(self, m, t):
        self.m = m
        self.t = t
        self._anchor()

    def _anchor(self):
        self.log_sum = _log2_weight_sum(self.m, self.t) * _LN2
        self.log_top = float(
            gammaln(self.m + 1.0) - gammaln(self.t + 1.0) - gammaln(self.m - self.t + 1.0) + self.t * _LN3
        )
        self.moves = 0

    def _moved(self):
        self.moves += 1
        if self.moves >= self.REANCHOR_EVERY:
            self._anchor()

    def grow_t(self):
        self.log_top += math.log(self.m - self.t) - math.log(self.t + 1) + _LN3
        self.log_sum = float(np.logaddexp(self.log_sum, self.log_top))
        self.t += 1
        self._moved()

    def grow_m(self):
        # S(m + 1, t) = 4 S(m, t) - 3 C(m, t) 3^t
        self.log_sum += 2.0 * _LN2 + math.log1p(-0.75 * math.exp(self.log_top - self.log_sum))
        self.log_top += math.log(self.m + 1) - math.log(self.m + 1 - self.t)
        self.m += 1
        self._moved()


def _generalized_staircase(params):
    n, k = params.n, params.k
    start = _largest(lambda t_l: _evaluate(n, k, 0, t_l).holds, n)
    if start is None:
        return []
    if n <= EXACT_LIMIT:
        return _walk_staircase(n, lambda t_u, t_l: _evaluate_exact(n, k, t_u, t_l).holds, start)

    sums = _RunningWeightSum(n - start, 0)

    def holds(t_u, t_l):
        # m first keeps t <= m during every move
        while sums.m < n - t_l:
            sums.grow_m()
        while sums.t < t_u:
            sums.grow_t()
        log2_lhs = 2.0 * t_l + k + sums.log_sum / _LN2
        if abs(log2_lhs - n) < WALK_MARGIN:
            return _evaluate(n, k, t_u, t_l).holds
        return log2_lhs <= n

    return _walk_staircase(n, holds, start)


# ---------------------------------------------------------------------------
# Large-n limit
# ---------------------------------------------------------------------------

def _check_unit(name, value):
    if np.any(np.asarray(value) < 0.0) or np.any(np.asarray(value) > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _coherent_information(p, q):
    # xlogy gives 0 * log(0) = 0 at the endpoints
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return (
        1.0
        + (1.0 - q) * xlogy(1.0 - p, 1.0 - p) / _LN2
        + (1.0 - q) * xlogy(p, p) / _LN2
        - p * (1.0 - q) * _LOG2_3
        - 2.0 * q
    )


def coherent_information(rates: ErrorRates) -> float:
    """
    Coherent information of a maximally mixed qubit sent through the
    combined unlocated (rate p) / located (rate q) depolarizing channel.
    """
    return float(_coherent_information(rates.p, rates.q))


def coherent_information_from_entropies(rates: ErrorRates) -> float:
    """
    Same quantity as coherent_information, computed as the difference of the
    two Shannon entropies: output (qubit plus location flag) minus the joint
    output with the purifying reference.
    """
    p, q = rates.p, rates.q
    output = [(1 - q) / 2, (1 - q) / 2, q / 2, q / 2]
    joint = [(1 - q) * (1 - p)] + [(1 - q) * p / 3] * 3 + [q / 4] * 4
    return float(entropy(output, base=2) - entropy(joint, base=2))


def coherent_information_grid(p_values, q_values):
    """Tabulate the closed form on a (p, q) grid as a long DataFrame."""
    _check_unit('p', p_values)
    _check_unit('q', q_values)
    pp, qq = np.meshgrid(np.asarray(p_values, float), np.asarray(q_values, float), indexing='ij')
    return pd.DataFrame({
        'p': pp.ravel(),
        'q': qq.ravel(),
        'coherent_information': _coherent_information(pp, qq).ravel(),
    })


def asymptotic_margin(rates: ErrorRates) -> float:
    """
    Left side of the large-n generalized bound; the bound holds
    asymptotically iff the result is <= 0.
    """
    p, q, r = rates.p, rates.q, rates.r
    return float(
        2.0 * q
        - (1.0 - q) * xlogy(p, p) / _LN2
        + p * (1.0 - q) * _LOG2_3
        - (1.0 - q) * xlogy(1.0 - p, 1.0 - p) / _LN2
        - 1.0
        + r
    )


def asymptotic_boundary(q: float, r: float) -> Optional[float]:
    """
    Largest unlocated rate p with coherent information >= r at located rate q.

    The coherent information decreases in p on [0, 3/4] and equals -1 at
    p = 3/4, so the root is bracketed there. Returns None when p = 0 already
    fails (1 - 2q < r).
    """
    _check_unit('q', q)
    _check_unit('r', r)
    at_zero = float(_coherent_information(0.0, q)) - r
    if at_zero < 0.0:
        return None
    if at_zero == 0.0:
        return 0.0
    return float(bisect(lambda p: float(_coherent_information(p, q)) - r, 0.0, 0.75, xtol=BOUNDARY_XTOL))


def asymptotic_curve(r: float, q_step: float = 0.001):
    """
    (q, p_boundary) rows on a uniform q grid; q values without a boundary
    are omitted.
    """
    if not 0.0 < q_step <= 1.0:
        raise ValueError(f"q_step must lie in (0, 1], got {q_step}")
    n_steps = int(round(1.0 / q_step))
    rows = []
    for q in np.linspace(0.0, 1.0, n_steps + 1):
        p = asymptotic_boundary(float(q), r)
        if p is not None:
            rows.append({'q': float(q), 'p_boundary': p})
    return pd.DataFrame(rows, columns=['q', 'p_boundary'])


def discrete_rate_boundary(params: CodeParams, q_values, kind=BoundKind.GENERALIZED):
    """
    Finite-n boundary in rate coordinates: for each located rate q, the
    largest t_u allowed at t_l = round(q n), reported as p = t_u / (n - t_l).
    """
    rows = []
    for q in q_values:
        _check_unit('q', q)
        t_l = int(round(q * params.n))
        max_t_u = max_correctable_unlocated(params, t_l, kind)
        remaining = params.n - t_l
        rows.append({
            'q': float(q),
            't_l': t_l,
            'max_t_u': max_t_u,
            'p_boundary': (max_t_u / remaining) if (max_t_u is not None and remaining) else np.nan,
        })
    return pd.DataFrame(rows, columns=['q', 't_l', 'max_t_u', 'p_boundary'])

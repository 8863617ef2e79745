"""Histogram, quantile hotspot groups, Pareto shares and distribution fitting
of aggregated visibility totals.

Fitting policy
--------------
Parameters are maximum-likelihood estimates.  Gamma, Exponential and
WeibullMin have a hard lower support bound, so their loc is pinned just below
the sample minimum and only shape/scale are estimated.  LogNormal and
InverseGamma estimate loc by a one-dimensional profile-likelihood search with
the remaining parameters in closed form (or a 1-D root) for each trial loc.
Normal and GumbelR use their ordinary two-parameter MLE.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special, stats

from utils.constants import DEFAULT_QUANTILE_CUTS, DEFAULTS, FIT_FAMILIES
from utils.errors import DegenerateSample, EmptyInput, InvalidParameter, NonConvergence
from utils.logger import setup_logger

logger = setup_logger(__name__)

LOC_EPSILON = 1e-9
MIN_FIT_SAMPLES = 30
PROFILE_GRID_POINTS = 80
PROFILE_LOWER_SCALE_MULTIPLE = 10.0
PROFILE_MIN_GAP_FRACTION = 1e-6

_SHAPE_NAME = {'LogNormal': 's', 'Gamma': 'a', 'InverseGamma': 'a', 'WeibullMin': 'c'}


@dataclass(frozen=True)
class FitResult:
    family: str
    loc: float
    scale: float
    shape: Optional[float]
    ks_D: float
    wasserstein: float
    converged: bool = True

    def distribution(self):
        return frozen_distribution(self.family, self.loc, self.scale, self.shape)

    def as_dict(self) -> dict:
        payload = asdict(self)
        payload['shape_name'] = _SHAPE_NAME.get(self.family)
        return payload


@dataclass
class QuantileClassification:
    cuts: Tuple[float, ...]
    thresholds: Tuple[float, ...]
    group_names: Tuple[str, ...]
    labels: List[str]
    group_sizes: Dict[str, int] = field(default_factory=dict)
    shares: Dict[str, float] = field(default_factory=dict)


def frozen_distribution(family: str, loc: float, scale: float, shape: Optional[float] = None):
    if family == 'LogNormal':
        return stats.lognorm(shape, loc=loc, scale=scale)
    if family == 'Gamma':
        return stats.gamma(shape, loc=loc, scale=scale)
    if family == 'Exponential':
        return stats.expon(loc=loc, scale=scale)
    if family == 'WeibullMin':
        return stats.weibull_min(shape, loc=loc, scale=scale)
    if family == 'Normal':
        return stats.norm(loc=loc, scale=scale)
    if family == 'InverseGamma':
        return stats.invgamma(shape, loc=loc, scale=scale)
    if family == 'GumbelR':
        return stats.gumbel_r(loc=loc, scale=scale)
    raise InvalidParameter(f"unknown distribution family {family!r}; expected one of {', '.join(FIT_FAMILIES)}")


# ---------------------------------------------------------------- summaries

def histogram(totals: Sequence[float], bins: int = DEFAULTS['histogram_bins']) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-width bins over [min, max]; raw frequencies (log scaling is for display)"""
    values = np.asarray(totals, dtype=float)
    if values.size == 0:
        raise EmptyInput("histogram of an empty sample")
    if bins < 1:
        raise InvalidParameter(f"bins must be >= 1, got {bins}")
    frequencies, edges = np.histogram(values, bins=bins, range=(values.min(), values.max()))
    return edges, frequencies


def nearest_rank(sorted_values: np.ndarray, q: float):
    """k-th smallest value with k = ceil(q * N)"""
    n = len(sorted_values)
    k = min(n, max(1, math.ceil(q * n - 1e-9)))
    return sorted_values[k - 1]


def _percent(fraction: float) -> str:
    return f"{round(100.0 * fraction, 6):g}"


def quantile_group_names(cuts: Sequence[float]) -> Tuple[str, ...]:
    names = [f"Bottom{_percent(cuts[0])}"]
    for low, high in zip(cuts, cuts[1:]):
        names.append(f"Q{_percent(low)}_{_percent(high)}")
    names.append(f"Top{_percent(1.0 - cuts[-1])}")
    return tuple(names)


def classify_totals(totals: Sequence[float], cuts: Sequence[float] = DEFAULT_QUANTILE_CUTS) -> QuantileClassification:
    """Label each total by the highest cut whose threshold it strictly exceeds.

    Thresholds use the nearest-rank method, so ties at a threshold stay in the
    lower group.
    """
    values = np.asarray(totals, dtype=float)
    if values.size == 0:
        raise EmptyInput("cannot classify an empty aggregate")
    cuts = tuple(float(c) for c in cuts)
    if not cuts or any(not 0.0 < c < 1.0 for c in cuts) or list(cuts) != sorted(set(cuts)):
        raise InvalidParameter(f"cuts must be strictly ascending fractions in (0, 1), got {cuts}")

    ordered = np.sort(values)
    thresholds = tuple(float(nearest_rank(ordered, c)) for c in cuts)
    names = quantile_group_names(cuts)
    group_index = np.searchsorted(np.asarray(thresholds), values, side='left')
    labels = [names[g] for g in group_index]

    grand_total = float(values.sum())
    sizes = {name: 0 for name in names}
    sums = {name: 0.0 for name in names}
    for value, label in zip(values, labels):
        sizes[label] += 1
        sums[label] += float(value)
    shares = {name: (sums[name] / grand_total if grand_total else 0.0) for name in names}
    return QuantileClassification(cuts, thresholds, names, labels, sizes, shares)


def quantile_classify(agg, cuts: Sequence[float] = DEFAULT_QUANTILE_CUTS) -> QuantileClassification:
    """Classify an ``AggregateVisibility``; labels follow canonical key order"""
    return classify_totals(agg.totals(), cuts)


def pareto_share(totals: Sequence[float], top_fraction: float = 0.10) -> float:
    """Share of the grand total held by the top ``top_fraction`` of entries (by rank)"""
    values = np.sort(np.asarray(totals, dtype=float))[::-1]
    if values.size == 0:
        raise EmptyInput("pareto share of an empty sample")
    if not 0.0 < top_fraction <= 1.0:
        raise InvalidParameter(f"top_fraction must be in (0, 1], got {top_fraction}")
    k = max(1, math.ceil(top_fraction * values.size - 1e-9))
    grand_total = values.sum()
    return float(values[:k].sum() / grand_total) if grand_total else 0.0


# ---------------------------------------------------------- goodness of fit

def ks_statistic(sorted_sample: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov D of a sorted sample against a continuous CDF"""
    x = np.asarray(sorted_sample, dtype=float)
    n = x.size
    if n == 0:
        raise EmptyInput("K-S statistic of an empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1, dtype=float)
    upper = np.abs(i / n - f)
    lower = np.abs((i - 1.0) / n - f)
    return float(np.max(np.maximum(upper, lower)))


def wasserstein_distance(sorted_sample: Sequence[float], ppf: Callable[[np.ndarray], np.ndarray]) -> float:
    """1-Wasserstein distance using the fitted quantiles at (i - 0.5) / N"""
    x = np.asarray(sorted_sample, dtype=float)
    n = x.size
    if n == 0:
        raise EmptyInput("Wasserstein distance of an empty sample")
    q = (np.arange(1, n + 1, dtype=float) - 0.5) / n
    return float(np.mean(np.abs(x - np.asarray(ppf(q), dtype=float))))


# ------------------------------------------------------------------ fitting

def _gamma_shape(log_mean: float, mean_log: float) -> float:
    """Root of log(a) - digamma(a) = log(mean) - mean(log)"""
    s = log_mean - mean_log
    if not s > 0:
        raise DegenerateSample("sample has no spread to estimate a gamma shape")
    a0 = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)

    def f(a):
        return math.log(a) - special.digamma(a) - s

    lo, hi = a0 / 4.0, a0 * 4.0
    for _ in range(200):
        if f(lo) > 0:
            break
        lo /= 4.0
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 4.0
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-12, maxiter=500)


def _fit_gamma_fixed_loc(x: np.ndarray, loc: float) -> Tuple[float, float]:
    y = x - loc
    mean = float(np.mean(y))
    a = _gamma_shape(math.log(mean), float(np.mean(np.log(y))))
    return a, mean / a


def _fit_weibull_fixed_loc(x: np.ndarray, loc: float) -> Tuple[float, float]:
    y = x - loc
    y_max = float(np.max(y))
    log_y = np.log(y / y_max)
    mean_log = float(np.mean(log_y))

    def h(c):
        w = np.exp(c * log_y)
        return float(np.sum(w * log_y) / np.sum(w)) - 1.0 / c - mean_log

    lo, hi = 0.5, 2.0
    for _ in range(60):
        if h(lo) < 0:
            break
        lo /= 2.0
    for _ in range(60):
        if h(hi) > 0:
            break
        hi *= 2.0
    if not (h(lo) < 0 < h(hi)):
        raise NonConvergence("could not bracket the Weibull shape")
    c = optimize.brentq(h, lo, hi, xtol=1e-14, rtol=1e-12, maxiter=500)
    scale = y_max * float(np.mean(np.exp(c * log_y))) ** (1.0 / c)
    return c, scale


def _lognormal_profile(x: np.ndarray, loc: float) -> Tuple[float, Tuple[float, float]]:
    log_y = np.log(x - loc)
    mu = float(np.mean(log_y))
    s = float(np.std(log_y))
    if not s > 0:
        return -math.inf, (s, math.exp(mu))
    n = x.size
    ll = -float(np.sum(log_y)) - n * math.log(s) - 0.5 * n * math.log(2.0 * math.pi) - 0.5 * n
    return ll, (s, math.exp(mu))


def _invgamma_profile(x: np.ndarray, loc: float) -> Tuple[float, Tuple[float, float]]:
    y = x - loc
    z = 1.0 / y
    log_y = np.log(y)
    try:
        a = _gamma_shape(math.log(float(np.mean(z))), -float(np.mean(log_y)))
    except (DegenerateSample, ValueError):
        return -math.inf, (math.nan, math.nan)
    beta = a / float(np.mean(z))
    n = x.size
    ll = (n * a * math.log(beta) - n * special.gammaln(a)
          - (a + 1.0) * float(np.sum(log_y)) - beta * float(np.sum(z)))
    return ll, (a, beta)


def _profile_search(x: np.ndarray, profile) -> Tuple[float, float, float, bool]:
    """Maximize ``profile(x, loc)`` over loc in (-10 * scale0, min(x) - max(eps, 1e-6 * range(x))).

    Searches in u = min(x) - loc on a geometric grid, then refines the best
    bracket with bounded Brent.  Returns (loc, shape, scale, converged).
    """
    x_min = float(x[0])
    scale0 = float(np.std(x))
    upper_u = x_min + PROFILE_LOWER_SCALE_MULTIPLE * scale0
    lower_u = max(LOC_EPSILON, PROFILE_MIN_GAP_FRACTION * float(x[-1] - x[0]))
    if upper_u <= lower_u:
        upper_u = lower_u * 1e6
    grid = np.geomspace(lower_u, upper_u, PROFILE_GRID_POINTS)
    scores = [profile(x, x_min - u)[0] for u in grid]
    best = int(np.argmax(scores))
    if not math.isfinite(scores[best]):
        raise NonConvergence("profile likelihood is not finite anywhere on the search grid")

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    result = optimize.minimize_scalar(lambda u: -profile(x, x_min - u)[0], bounds=(lo, hi),
                                      method='bounded', options={'xatol': 1e-10 * max(1.0, hi)})
    u = float(result.x) if result.success and -result.fun >= scores[best] else float(grid[best])
    loc = x_min - u
    _, (shape, scale) = profile(x, loc)
    # an optimum pinned at the far end of the grid means the search ran out of room
    converged = bool(result.success) and best < len(grid) - 1
    return loc, shape, scale, converged


def _validated_sample(totals: Sequence[float]) -> np.ndarray:
    x = np.sort(np.asarray(totals, dtype=float))
    if x.size < MIN_FIT_SAMPLES:
        raise InvalidParameter(f"need at least {MIN_FIT_SAMPLES} values to fit, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("sample contains non-finite values")
    if float(x[-1]) == float(x[0]):
        raise DegenerateSample("sample has zero variance")
    return x


def fit_distribution(totals: Sequence[float], family: str) -> FitResult:
    """Maximum-likelihood fit of one family, scored by K-S D and 1-Wasserstein.

    Raises:
        DegenerateSample: zero-variance sample
        NonConvergence: no usable optimum anywhere in the loc search range
    """
    x = _validated_sample(totals)
    converged = True
    shape: Optional[float] = None
    if family in ('Gamma', 'Exponential', 'WeibullMin'):
        loc = float(x[0]) - LOC_EPSILON
        if family == 'Gamma':
            shape, scale = _fit_gamma_fixed_loc(x, loc)
        elif family == 'Exponential':
            scale = float(np.mean(x - loc))
        else:
            shape, scale = _fit_weibull_fixed_loc(x, loc)
    elif family == 'LogNormal':
        loc, shape, scale, converged = _profile_search(x, _lognormal_profile)
    elif family == 'InverseGamma':
        loc, shape, scale, converged = _profile_search(x, _invgamma_profile)
    elif family == 'Normal':
        loc, scale = float(np.mean(x)), float(np.std(x))
    elif family == 'GumbelR':
        loc, scale = (float(v) for v in stats.gumbel_r.fit(x))
    else:
        raise InvalidParameter(f"unknown distribution family {family!r}")

    if not converged:
        logger.warning(f"{family} fit: loc search ended at its bound; reporting best found")
    dist = frozen_distribution(family, loc, scale, shape)
    return FitResult(
        family=family,
        loc=float(loc),
        scale=float(scale),
        shape=None if shape is None else float(shape),
        ks_D=ks_statistic(x, dist.cdf),
        wasserstein=wasserstein_distance(x, dist.ppf),
        converged=converged,
    )


def fit_all(totals: Sequence[float], families: Sequence[str] = FIT_FAMILIES,
            workers: int = 1) -> Tuple[List[FitResult], Dict[str, str]]:
    """Fit several families; returns successful fits and per-family failure messages"""
    x = np.sort(np.asarray(totals, dtype=float))
    results: List[FitResult] = []
    failures: Dict[str, str] = {}

    def attempt(family):
        try:
            return family, fit_distribution(x, family), None
        except (DegenerateSample, NonConvergence, FloatingPointError, ValueError) as e:
            return family, None, f"{type(e).__name__}: {e}"

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for family, result, failure in pool.map(attempt, families):
            if result is not None:
                results.append(result)
                logger.info(f"{family}: D={result.ks_D:.4f} W1={result.wasserstein:.4f}")
            else:
                failures[family] = failure
                logger.warning(f"{family} fit failed: {failure}")
    return results, failures


def rank_fits(results: Sequence[FitResult]) -> List[FitResult]:
    """Best first: ascending K-S D, ties broken by Wasserstein distance"""
    if not results:
        raise EmptyInput("no fit results to rank")
    return sorted(results, key=lambda r: (r.ks_D, r.wasserstein))


def format_fit_table(ranked: Sequence[FitResult]) -> str:
    header = f"{'Distribution':<14}{'K-S D':>10}{'W1':>12}{'loc':>12}{'scale':>12}{'shape':>10}  converged"
    lines = [header, '-' * len(header)]
    for r in ranked:
        shape = '--' if r.shape is None else f"{_SHAPE_NAME[r.family]}={r.shape:.4f}"
        lines.append(f"{r.family:<14}{r.ks_D:>10.4f}{r.wasserstein:>12.4f}{r.loc:>12.4f}"
                     f"{r.scale:>12.4f}{shape:>10}  {'yes' if r.converged else 'no'}")
    return '\n'.join(lines)


def fit_report(ranked: Sequence[FitResult], n: int, failures: Optional[Dict[str, str]] = None) -> dict:
    return {
        'n': n,
        'policy': {
            'method': 'maximum likelihood',
            'fixed_loc': {'families': ['Gamma', 'Exponential', 'WeibullMin'],
                          'loc': f'min(totals) - {LOC_EPSILON:g}'},
            'profile_loc': {'families': ['LogNormal', 'InverseGamma'],
                            'range': (f'(-{PROFILE_LOWER_SCALE_MULTIPLE:g} * std(totals), min(totals) - '
                                      f'max({LOC_EPSILON:g}, {PROFILE_MIN_GAP_FRACTION:g} * (max(totals) - min(totals))))')},
            'free_two_parameter': ['Normal', 'GumbelR'],
        },
        'fits': {r.family: r.as_dict() for r in ranked},
        'ranking': [r.family for r in ranked],
        'failures': dict(failures or {}),
    }

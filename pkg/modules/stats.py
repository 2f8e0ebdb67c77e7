"""
Distribution similarity and paired hypothesis testing over metric samples.

- Gaussian KDE with Scott's rule bandwidth divided by 4
- Overlapping Area (trapezoid rule on a fixed grid) and 1-Wasserstein distance
- Wilcoxon signed-rank test (exact null distribution for small samples)
- Paired t-test
- Holm-Bonferroni step-down correction
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from modules.const import Defaults, METRIC_NAMES
from modules.error_handler import (
    DegenerateDistributionError, InsufficientDataError, InvalidConfigError,
)
from modules.metrics import MetricReport, metric_column

analytics_logger = logging.getLogger('analytics_logger')

METHOD_AUTO = 'auto'
METHOD_EXACT = 'exact'
METHOD_APPROX = 'approx'
METHOD_TTEST = 'ttest'


@dataclass(frozen=True)
class KdeModel:
    """One-dimensional Gaussian KDE over a fixed sample."""
    samples: Tuple[float, ...]
    bandwidth: float
    _kde: stats.gaussian_kde = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = _as_samples(self.samples)
        if len(values) < 2 or float(np.std(values, ddof=1)) <= 0.0:
            raise DegenerateDistributionError("KDE needs at least 2 distinct samples",
                                              context={"n": len(values)})
        if not self.bandwidth > 0.0:
            raise DegenerateDistributionError(f"KDE bandwidth must be positive, got {self.bandwidth}",
                                              context={"bandwidth": self.bandwidth})
        object.__setattr__(self, 'samples', tuple(float(v) for v in values))
        # gaussian_kde scales the sample SD (ddof=1) by the factor
        factor = self.bandwidth / float(np.std(values, ddof=1))
        object.__setattr__(self, '_kde', stats.gaussian_kde(values, bw_method=factor))

    def __call__(self, x) -> np.ndarray:
        return self._kde(np.atleast_1d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class DistributionComparison:
    metric_name: str
    oa: Optional[float]
    w1: Optional[float]
    n_model: int
    n_reference: int

    HEADERS = ('metric', 'oa', 'w1', 'n_model', 'n_reference')

    def as_row(self) -> List[object]:
        return [self.metric_name, self.oa, self.w1, self.n_model, self.n_reference]


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # not a pytest test class
    metric_name: str
    statistic: float
    p_value: float
    adjusted_alpha: Optional[float] = None
    rejected: bool = False
    n: int = 0
    method: str = METHOD_EXACT

    HEADERS = ('metric', 'statistic', 'p', 'adjusted_alpha', 'rejected', 'n', 'method')

    def as_row(self) -> List[object]:
        return [self.metric_name, self.statistic, self.p_value, self.adjusted_alpha,
                self.rejected, self.n, self.method]


def _as_samples(samples: Sequence[float]) -> np.ndarray:
    values = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(values)):
        raise DegenerateDistributionError("samples contain non-finite values")
    return values


def scott_bandwidth(samples: Sequence[float]) -> float:
    """
    Scott's rule of thumb divided by 4: sd * n^(-1/5) / 4.

    Raises:
        DegenerateDistributionError: fewer than 2 samples or zero spread
    """
    values = _as_samples(samples)
    n = len(values)
    if n < 2:
        raise DegenerateDistributionError(f"KDE needs at least 2 samples, got {n}",
                                          context={"n": n})
    sd = float(np.std(values, ddof=1))
    if sd <= 0.0:
        raise DegenerateDistributionError("KDE samples have zero variance",
                                          context={"n": n, "value": float(values[0])})
    return sd * n ** -0.2 / Defaults.BANDWIDTH_DIVISOR


def build_kde(samples: Sequence[float]) -> KdeModel:
    values = _as_samples(samples)
    bandwidth = scott_bandwidth(values)
    return KdeModel(tuple(float(v) for v in values), bandwidth)


def kde_pdf(model: KdeModel, x) -> np.ndarray:
    """Density at x: (1 / (n h)) * sum of standard normal kernels."""
    return model(x)


def density_grid(a: KdeModel, b: KdeModel, points: int = Defaults.OA_GRID_POINTS,
                 tail: float = Defaults.OA_TAIL_BANDWIDTHS) -> np.ndarray:
    margin = tail * max(a.bandwidth, b.bandwidth)
    low = min(min(a.samples), min(b.samples)) - margin
    high = max(max(a.samples), max(b.samples)) + margin
    return np.linspace(low, high, points)


def density_table(a: KdeModel, b: KdeModel,
                  points: int = Defaults.OA_GRID_POINTS) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(grid, pdf_a, pdf_b) on the Overlapping Area integration grid."""
    grid = density_grid(a, b, points)
    return grid, kde_pdf(a, grid), kde_pdf(b, grid)


def overlapping_area(a: KdeModel, b: KdeModel, points: int = Defaults.OA_GRID_POINTS) -> float:
    """
    Area under min(pdf_a, pdf_b), clamped to [0, 1].

    Both densities are evaluated on the same grid, so the result is symmetric.
    """
    grid, pdf_a, pdf_b = density_table(a, b, points)
    area = float(integrate.trapezoid(np.minimum(pdf_a, pdf_b), grid))
    return min(1.0, max(0.0, area))


def wasserstein1(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    1-Wasserstein distance between two empirical distributions.

    Raises:
        InsufficientDataError: either sample is empty
    """
    u, v = _as_samples(xs), _as_samples(ys)
    if len(u) == 0 or len(v) == 0:
        raise InsufficientDataError("Wasserstein distance needs non-empty samples",
                                    context={"n_x": len(u), "n_y": len(v)})
    return float(stats.wasserstein_distance(u, v))


def _paired_differences(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    x, y = _as_samples(a), _as_samples(b)
    if len(x) != len(y):
        raise InsufficientDataError(f"paired samples differ in length ({len(x)} vs {len(y)})",
                                    context={"n_a": len(x), "n_b": len(y)})
    return x - y


def _exact_signed_rank_counts(doubled_ranks: np.ndarray) -> np.ndarray:
    """
    Number of sign assignments giving each doubled positive-rank sum.

    Ranks are doubled so tied (average) ranks stay integral.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(paired_a: Sequence[float], paired_b: Sequence[float],
                         method: str = METHOD_AUTO, metric_name: str = '') -> TestOutcome:
    """
    Two-sided paired Wilcoxon signed-rank test.

    Zero differences are dropped and tied magnitudes share average ranks. The
    exact null distribution is used for up to 20 non-zero pairs (or when
    method='exact'); otherwise a normal approximation with tie and continuity
    corrections.

    Args:
        paired_a: First sample
        paired_b: Second sample, same length
        method: 'auto', 'exact' or 'approx'
        metric_name: Label carried into the outcome

    Returns:
        TestOutcome: statistic = min(T+, T-)

    Raises:
        InsufficientDataError: fewer than 5 non-zero differences
    """
    if method not in (METHOD_AUTO, METHOD_EXACT, METHOD_APPROX):
        raise InvalidConfigError(f"unknown Wilcoxon method '{method}'")
    d = _paired_differences(paired_a, paired_b)
    d = d[d != 0.0]
    m = len(d)
    if m < Defaults.MIN_TEST_PAIRS:
        raise InsufficientDataError(
            f"Wilcoxon test needs at least {Defaults.MIN_TEST_PAIRS} non-zero differences, got {m}",
            context={"metric": metric_name, "n": m},
        )

    doubled = np.rint(2.0 * stats.rankdata(np.abs(d))).astype(np.int64)
    t_plus2 = int(doubled[d > 0].sum())
    total2 = int(doubled.sum())
    statistic = min(t_plus2, total2 - t_plus2) / 2.0

    if method == METHOD_EXACT or (method == METHOD_AUTO and m <= Defaults.EXACT_WILCOXON_LIMIT):
        counts = _exact_signed_rank_counts(doubled)
        lower = counts[:t_plus2 + 1].sum()
        upper = counts[t_plus2:].sum()
        p_value = min(1.0, 2.0 * min(lower, upper) / 2.0 ** m)
        used = METHOD_EXACT
    else:
        _, tie_counts = np.unique(doubled, return_counts=True)
        mean = m * (m + 1) / 4.0
        var = m * (m + 1) * (2 * m + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
        deviation = max(abs(t_plus2 / 2.0 - mean) - 0.5, 0.0)
        p_value = min(1.0, 2.0 * float(stats.norm.sf(deviation / np.sqrt(var))))
        used = METHOD_APPROX

    return TestOutcome(metric_name=metric_name, statistic=float(statistic),
                       p_value=float(p_value), n=m, method=used)


def paired_t_test(paired_a: Sequence[float], paired_b: Sequence[float],
                  metric_name: str = '') -> TestOutcome:
    """Two-sided paired t-test (scipy ttest_rel)."""
    d = _paired_differences(paired_a, paired_b)
    n = len(d)
    if n < Defaults.MIN_TEST_PAIRS:
        raise InsufficientDataError(
            f"paired t-test needs at least {Defaults.MIN_TEST_PAIRS} pairs, got {n}",
            context={"metric": metric_name, "n": n},
        )
    if np.all(d == d[0]):
        raise DegenerateDistributionError("paired differences are constant",
                                          context={"metric": metric_name, "n": n})
    result = stats.ttest_rel(np.asarray(paired_a, dtype=float), np.asarray(paired_b, dtype=float))
    return TestOutcome(metric_name=metric_name, statistic=float(result.statistic),
                       p_value=float(min(1.0, max(0.0, result.pvalue))), n=n, method=METHOD_TTEST)


def holm_bonferroni(p_values: Sequence[float], alpha: float = Defaults.ALPHA,
                    metric_names: Optional[Sequence[str]] = None,
                    outcomes: Optional[Sequence[TestOutcome]] = None) -> List[TestOutcome]:
    """
    Holm step-down correction.

    Sort p ascending; the k-th smallest (1-indexed) is rejected when
    p <= alpha / (m - k + 1) and every smaller p was rejected.

    Args:
        p_values: Family of p-values
        alpha: Family-wise error rate
        metric_names: Labels in p_values order (defaults to positions)
        outcomes: Test outcomes to annotate instead of building new ones

    Returns:
        List[TestOutcome]: In original order, with adjusted_alpha and rejected set
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidConfigError(f"alpha must be in (0, 1), got {alpha}", context={"alpha": alpha})
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    thresholds: Dict[int, float] = {}
    rejected: Dict[int, bool] = {}
    still_rejecting = True
    for rank, i in enumerate(order, start=1):
        thresholds[i] = alpha / (m - rank + 1)
        still_rejecting = still_rejecting and p_values[i] <= thresholds[i]
        rejected[i] = still_rejecting

    results = []
    for i, p in enumerate(p_values):
        if outcomes is not None:
            base = outcomes[i]
        else:
            name = metric_names[i] if metric_names is not None else str(i)
            base = TestOutcome(metric_name=name, statistic=float('nan'), p_value=float(p))
        results.append(TestOutcome(
            metric_name=base.metric_name, statistic=base.statistic, p_value=base.p_value,
            adjusted_alpha=thresholds[i], rejected=rejected[i], n=base.n, method=base.method,
        ))
    return results


def compare_metric(name: str, xs: np.ndarray, ys: np.ndarray) -> DistributionComparison:
    """OA and W1 of one metric; a side with fewer than 2 values gives an absent row."""
    if len(xs) < 2 or len(ys) < 2:
        analytics_logger.warning(f"{name}: too few defined values ({len(xs)} vs {len(ys)}), skipped")
        return DistributionComparison(name, None, None, len(xs), len(ys))
    w1 = wasserstein1(xs, ys)
    try:
        oa: Optional[float] = overlapping_area(build_kde(xs), build_kde(ys))
    except DegenerateDistributionError as e:
        analytics_logger.warning(f"{name}: {e.message}, OA left empty")
        oa = None
    return DistributionComparison(name, oa, w1, len(xs), len(ys))


def compare_sets(model_reports: Sequence[MetricReport], reference_reports: Sequence[MetricReport],
                 metric_names: Sequence[str] = METRIC_NAMES) -> List[DistributionComparison]:
    """
    Per-metric OA and W1 between two report sets, skipping undefined values.

    Raises:
        InsufficientDataError: either report set is empty
    """
    if not model_reports or not reference_reports:
        raise InsufficientDataError("both report sets must be non-empty",
                                    context={"n_model": len(model_reports),
                                             "n_reference": len(reference_reports)})
    comparisons = [
        compare_metric(name, metric_column(model_reports, name), metric_column(reference_reports, name))
        for name in metric_names
    ]
    analytics_logger.info(
        f"Compared {len(model_reports)} vs {len(reference_reports)} melodies on {len(comparisons)} metrics"
    )
    return comparisons


def run_metric_tests(group_a: Sequence[Dict[str, Optional[float]]],
                     group_b: Sequence[Dict[str, Optional[float]]],
                     metric_names: Sequence[str] = METRIC_NAMES,
                     alpha: float = Defaults.ALPHA,
                     method: str = METHOD_AUTO) -> Tuple[List[TestOutcome], List[Tuple[str, str]]]:
    """
    Paired test per metric over runs, then Holm-Bonferroni across the family.

    Args:
        group_a: One {metric: value} mapping per run
        group_b: Paired runs, same length and order as group_a
        metric_names: Metric family
        alpha: Family-wise error rate
        method: 'auto', 'exact', 'approx' (Wilcoxon) or 'ttest'

    Returns:
        (outcomes, skipped): corrected outcomes for testable metrics and
        (metric, reason) for the ones that could not be tested
    """
    if len(group_a) != len(group_b):
        raise InsufficientDataError(f"groups are not paired ({len(group_a)} vs {len(group_b)} runs)")
    tested: List[TestOutcome] = []
    skipped: List[Tuple[str, str]] = []
    for name in metric_names:
        pairs = [(a.get(name), b.get(name)) for a, b in zip(group_a, group_b)]
        pairs = [(x, y) for x, y in pairs if x is not None and y is not None]
        xs = [x for x, _ in pairs]
        ys = [y for _, y in pairs]
        try:
            if method == METHOD_TTEST:
                tested.append(paired_t_test(xs, ys, metric_name=name))
            else:
                tested.append(wilcoxon_signed_rank(xs, ys, method=method, metric_name=name))
        except (InsufficientDataError, DegenerateDistributionError) as e:
            analytics_logger.warning(f"{name}: {e.message}, skipped")
            skipped.append((name, e.message))
    if not tested:
        return [], skipped
    corrected = holm_bonferroni([t.p_value for t in tested], alpha, outcomes=tested)
    rejected = sum(1 for t in corrected if t.rejected)
    analytics_logger.info(f"Holm-Bonferroni at alpha={alpha}: {rejected}/{len(corrected)} rejected")
    return corrected, skipped

"""Filter evaluation: precision/recall scoring, range histograms, timing
benchmarks, subsampling, scalability fits, and parameter tuning.

Scoring convention: the positive class is "point removed by the filter",
and ground truth positive means the point's semantic class is one of the
labeled snow classes. Recall is then the fraction of snow the filter
removed; precision the fraction of removals that really were snow.

Timing measures the filter call only (spatial-index construction happens
inside the filter and is paid by every filter alike); file I/O stays
outside the clock.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from dataclasses import asdict, astuple, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cloud_io import LabeledCloud, PointCloud
from .errors import LengthMismatchError
from .filters import FilterParams, FilterResult, param_type, run_filter
from .rng import make_generator

logger = logging.getLogger(__name__)

_STREAM_SUBSAMPLE = 3

DEFAULT_BIN_WIDTH = 5.0
DEFAULT_MAX_RANGE = 80.0
DEFAULT_PRECISION_FLOOR = 0.6


@dataclass(frozen=True)
class Confusion:
    """Counts with positive = removed; tp = removed and labeled snow."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float | None:
        denom = self.tp + self.fp
        return self.tp / denom if denom else None

    @property
    def recall(self) -> float | None:
        denom = self.tp + self.fn
        return self.tp / denom if denom else None


@dataclass(frozen=True)
class RangeBin:
    """One histogram bin [bin_start, bin_start + width); the final bin is
    an overflow bucket for everything past max_range."""

    bin_start: float
    total: int
    removed: int

    @property
    def pct_removed(self) -> float | None:
        return self.removed / self.total if self.total else None


@dataclass(frozen=True)
class EvalReport:
    """Score of one filtered cloud (or an aggregate over a corpus)."""

    confusion: Confusion
    range_histogram: tuple[RangeBin, ...]
    bin_width: float
    params_used: dict | None = None

    @property
    def precision(self) -> float | None:
        return self.confusion.precision

    @property
    def recall(self) -> float | None:
        return self.confusion.recall

    def to_dict(self) -> dict:
        return {
            "confusion": asdict(self.confusion),
            "precision": self.precision,
            "recall": self.recall,
            "bin_width": self.bin_width,
            "range_histogram": [
                {
                    "bin_start": b.bin_start,
                    "total": b.total,
                    "removed": b.removed,
                    "pct_removed": b.pct_removed,
                }
                for b in self.range_histogram
            ],
            "params_used": self.params_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            confusion=Confusion(**d["confusion"]),
            range_histogram=tuple(
                RangeBin(b["bin_start"], b["total"], b["removed"])
                for b in d["range_histogram"]
            ),
            bin_width=d["bin_width"],
            params_used=d.get("params_used"),
        )


@dataclass(frozen=True)
class TimingStats:
    """Wall-clock stats for one filter over a corpus, in milliseconds."""

    filter_id: str
    mean: float
    stddev: float
    median: float
    reps: int
    warmup: int
    cloud_size: int
    threads: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TimingStats":
        return cls(**d)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of log t = log a + b log N over (N, t_ms) samples."""

    samples: tuple[tuple[int, float], ...]
    exponent: float
    coefficient: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "samples": [[n, t] for n, t in self.samples],
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "r_squared": self.r_squared,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingFit":
        return cls(
            samples=tuple((int(n), float(t)) for n, t in d["samples"]),
            exponent=d["exponent"],
            coefficient=d["coefficient"],
            r_squared=d["r_squared"],
        )


@dataclass(frozen=True)
class TuneResult:
    """Winner of a grid search plus the full grid table."""

    filter_id: str
    best_params: FilterParams
    precision_floor: float
    meets_floor: bool
    table: tuple[tuple[FilterParams, float | None, float | None], ...]

    def to_dict(self) -> dict:
        return {
            "filter_id": self.filter_id,
            "best_params": asdict(self.best_params),
            "precision_floor": self.precision_floor,
            "meets_floor": self.meets_floor,
            "table": [
                {"params": asdict(p), "precision": prec, "recall": rec}
                for p, prec, rec in self.table
            ],
        }


def score(
    labeled: LabeledCloud,
    result: FilterResult,
    bin_width: float = DEFAULT_BIN_WIDTH,
    max_range: float = DEFAULT_MAX_RANGE,
    params_used: dict | None = None,
) -> EvalReport:
    """Confusion counts, precision/recall and range histogram for one
    filtered cloud."""
    if len(result) != len(labeled):
        raise LengthMismatchError(
            f"mask has {len(result)} entries but cloud has {len(labeled)} points"
        )
    removed = ~result.keep_mask
    snow = labeled.snow_mask
    tp = int((removed & snow).sum())
    fp = int((removed & ~snow).sum())
    fn = int((~removed & snow).sum())
    tn = int((~removed & ~snow).sum())
    hist = range_histogram(labeled.cloud, result, bin_width, max_range)
    return EvalReport(
        confusion=Confusion(tp, fp, fn, tn),
        range_histogram=hist,
        bin_width=bin_width,
        params_used=params_used,
    )


def range_histogram(
    cloud: PointCloud,
    result: FilterResult,
    bin_width: float = DEFAULT_BIN_WIDTH,
    max_range: float = DEFAULT_MAX_RANGE,
) -> tuple[RangeBin, ...]:
    """Removal counts binned by 3-D sensor range: bins [i*w, (i+1)*w) up to
    max_range, then one overflow bin."""
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    if len(result) != len(cloud):
        raise LengthMismatchError(
            f"mask has {len(result)} entries but cloud has {len(cloud)} points"
        )
    n_full = int(math.ceil(max_range / bin_width))
    xyz = cloud.xyz.astype(np.float64)
    r = np.sqrt(np.einsum("ij,ij->i", xyz, xyz))
    idx = np.minimum((r // bin_width).astype(np.int64), n_full)
    totals = np.bincount(idx, minlength=n_full + 1)
    removed = np.bincount(idx[~result.keep_mask], minlength=n_full + 1)
    return tuple(
        RangeBin(bin_start=i * bin_width, total=int(totals[i]), removed=int(removed[i]))
        for i in range(n_full + 1)
    )


def aggregate_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Corpus-level report: summed confusion and summed histogram bins.
    All reports must share the same binning."""
    if not reports:
        raise ValueError("no reports to aggregate")
    widths = {rep.bin_width for rep in reports}
    lengths = {len(rep.range_histogram) for rep in reports}
    if len(widths) > 1 or len(lengths) > 1:
        raise ValueError("reports use different histogram binnings")
    conf = Confusion(
        tp=sum(r.confusion.tp for r in reports),
        fp=sum(r.confusion.fp for r in reports),
        fn=sum(r.confusion.fn for r in reports),
        tn=sum(r.confusion.tn for r in reports),
    )
    first = reports[0].range_histogram
    hist = tuple(
        RangeBin(
            bin_start=first[i].bin_start,
            total=sum(r.range_histogram[i].total for r in reports),
            removed=sum(r.range_histogram[i].removed for r in reports),
        )
        for i in range(len(first))
    )
    return EvalReport(
        confusion=conf,
        range_histogram=hist,
        bin_width=reports[0].bin_width,
        params_used=reports[0].params_used,
    )


def benchmark(
    filter_id: str,
    params: FilterParams,
    clouds: Sequence[PointCloud],
    reps: int = 1,
    warmup: int = 0,
    workers: int = 1,
) -> TimingStats:
    """Wall-clock timing of a filter over a corpus: ``warmup`` discarded
    runs then ``reps`` measured runs per cloud, monotonic clock."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if warmup < 0:
        raise ValueError(f"warmup must be >= 0, got {warmup}")
    if not clouds:
        raise ValueError("cloud list is empty")
    times_ms = []
    for cloud in clouds:
        for _ in range(warmup):
            run_filter(filter_id, cloud, params, workers=workers)
        for _ in range(reps):
            t0 = time.perf_counter()
            run_filter(filter_id, cloud, params, workers=workers)
            times_ms.append((time.perf_counter() - t0) * 1e3)
    arr = np.asarray(times_ms)
    return TimingStats(
        filter_id=filter_id,
        mean=float(arr.mean()),
        stddev=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        median=float(np.median(arr)),
        reps=reps,
        warmup=warmup,
        cloud_size=int(round(float(np.mean([len(c) for c in clouds])))),
        threads=workers,
    )


def subsample(cloud: PointCloud, fraction: float, seed: int = 0) -> PointCloud:
    """Uniform random subset of round(fraction * N) points, original order
    preserved, deterministic by seed."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(cloud)
    m = int(math.floor(fraction * n + 0.5))
    if m == n:
        return cloud
    gen = make_generator(seed, _STREAM_SUBSAMPLE)
    chosen = np.sort(gen.permutation(n)[:m])
    return cloud.select(chosen)


def fit_power_law(samples: Sequence[tuple[int, float]]) -> ScalingFit:
    """Least squares on log t vs log N; returns exponent b, coefficient a,
    and the fit's r squared."""
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples, got {len(samples)}")
    ns = np.asarray([n for n, _ in samples], dtype=np.float64)
    ts = np.asarray([t for _, t in samples], dtype=np.float64)
    if np.unique(ns).size < 2:
        raise ValueError("degenerate fit: all sample sizes are equal")
    if not ((ns > 0).all() and (ts > 0).all()):
        raise ValueError("sample sizes and times must be positive")
    log_n, log_t = np.log(ns), np.log(ts)
    b, log_a = np.polyfit(log_n, log_t, 1)
    pred = log_a + b * log_n
    ss_res = float(((log_t - pred) ** 2).sum())
    ss_tot = float(((log_t - log_t.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(
        samples=tuple((int(n), float(t)) for n, t in samples),
        exponent=float(b),
        coefficient=float(math.exp(log_a)),
        r_squared=r2,
    )


def scalability_study(
    filter_id: str,
    params: FilterParams,
    cloud: PointCloud,
    fractions: Sequence[float],
    reps: int = 1,
    warmup: int = 0,
    seed: int = 0,
    workers: int = 1,
) -> ScalingFit:
    """Time the filter on subsampled versions of one cloud and fit the
    log-log complexity exponent."""
    if len(fractions) < 3:
        raise ValueError(f"need at least 3 fractions, got {len(fractions)}")
    samples = []
    for frac in fractions:
        sub = subsample(cloud, frac, seed=seed)
        stats = benchmark(filter_id, params, [sub], reps=reps, warmup=warmup, workers=workers)
        samples.append((len(sub), stats.mean))
    return fit_power_law(samples)


def tune(
    filter_id: str,
    param_grid: Iterable[FilterParams],
    corpus: Sequence[LabeledCloud],
    precision_floor: float = DEFAULT_PRECISION_FLOOR,
    workers: int = 1,
) -> TuneResult:
    """Grid search maximizing corpus recall subject to corpus precision >=
    ``precision_floor``; ties break on lexicographic parameter order. When
    nothing meets the floor, the best-precision point is returned with a
    warning."""
    grid = list(param_grid)
    if not grid:
        raise ValueError("parameter grid is empty")
    if not corpus:
        raise ValueError("corpus is empty")
    expected = param_type(filter_id)
    rows = []
    for params in grid:
        if not isinstance(params, expected):
            raise TypeError(
                f"{filter_id} expects {expected.__name__}, got {type(params).__name__}"
            )
        reports = [
            score(labeled, run_filter(filter_id, labeled.cloud, params, workers=workers))
            for labeled in corpus
        ]
        agg = aggregate_reports(reports)
        rows.append((params, agg.precision, agg.recall))

    def meets(row):
        _, prec, rec = row
        return prec is not None and rec is not None and prec >= precision_floor

    feasible = [row for row in rows if meets(row)]
    if feasible:
        best = min(feasible, key=lambda row: (-row[2], astuple(row[0])))
        ok = True
    else:
        logger.warning(
            "no %s grid point reaches precision >= %.3g; returning the best-precision point",
            filter_id,
            precision_floor,
        )
        best = min(rows, key=lambda row: (-(row[1] if row[1] is not None else -1.0), astuple(row[0])))
        ok = False
    return TuneResult(
        filter_id=filter_id,
        best_params=best[0],
        precision_floor=precision_floor,
        meets_floor=ok,
        table=tuple(rows),
    )


def save_json(obj, path: str | os.PathLike) -> None:
    """Write a report object (anything with to_dict, or a plain dict/list)."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def load_json(path: str | os.PathLike) -> dict:
    return json.loads(Path(path).read_text())


def histogram_csv_rows(report: EvalReport) -> list[str]:
    """Plot-ready CSV lines for a report's range histogram."""
    lines = ["bin_start,total,removed,pct_removed"]
    for b in report.range_histogram:
        pct = "" if b.pct_removed is None else repr(b.pct_removed)
        lines.append(f"{b.bin_start!r},{b.total},{b.removed},{pct}")
    return lines


def timing_csv_rows(stats_list: Sequence[TimingStats]) -> list[str]:
    lines = ["filter,mean_ms,stddev_ms,median_ms,reps,warmup,cloud_size,threads"]
    for s in stats_list:
        lines.append(
            f"{s.filter_id},{s.mean!r},{s.stddev!r},{s.median!r},"
            f"{s.reps},{s.warmup},{s.cloud_size},{s.threads}"
        )
    return lines


def scaling_csv_rows(fit: ScalingFit) -> list[str]:
    lines = ["n_points,time_ms"]
    for n, t in fit.samples:
        lines.append(f"{n},{t!r}")
    return lines

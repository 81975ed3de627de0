"""Experiment engine: single tests on tabular data and Monte Carlo power curves.

Power experiments are deterministic given the master seed. The data of
replicate ``r`` at grid point ``g`` come from substream ``(g, r, 0)`` and
method ``m`` draws its resamples from ``(g, r, 1 + METHODS.index(m))``, so
results do not depend on how replicates are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np
from scipy.stats import binomtest

from . import __version__
from ._errors import InputError, NumericError
from ._rng import generator, substream
from .baselines import anderson_darling_k, kruskal_wallis
from .calibration import permutation_pvalue, spectral_pvalue, subsampling_pvalue
from .estimator import GroupedSamples, gmmd_statistic
from .kernel import KernelSpec, median_heuristic
from .samplers import (GAMMA_CONVENTIONS, NORMAL_CONVENTIONS, DistributionSpec, case_config,
                       parse_distribution, sample)

METHODS = ("gmmd-permutation", "gmmd-spectral", "gmmd-subsampling", "kruskal-wallis",
           "anderson-darling-k")
SINGLE_METHODS = {"permutation": "gmmd-permutation", "spectral": "gmmd-spectral",
                  "subsampling": "gmmd-subsampling", "kruskal-wallis": "kruskal-wallis",
                  "anderson-darling-k": "anderson-darling-k"}


@dataclass(frozen=True)
class ExperimentConfig:
    distributions: tuple[DistributionSpec, ...]
    grid: tuple[tuple[int, ...], ...]
    methods: tuple[str, ...] = ("gmmd-permutation",)
    alpha: float = 0.05
    replications: int = 100
    kernel_family: str = "gaussian-rbf"
    gamma: Union[float, str] = 2.0
    B: int = 199
    subsampling_B: int = 199
    block_fraction: float = 0.5
    draws: int = 10_000
    master_seed: int = 0
    case: Optional[int] = None
    normal_param: str = "variance"
    gamma_param: str = "rate"

    def __post_init__(self):
        if not self.grid:
            raise InputError("group-size grid is empty")
        k = len(self.distributions)
        if k < 2:
            raise InputError("need at least two group distributions")
        grid = tuple(tuple(int(n) for n in point) for point in self.grid)
        for point in grid:
            if len(point) != k:
                raise InputError(f"grid point {point} has {len(point)} sizes for {k} groups")
            if min(point) < 2:
                raise InputError(f"grid point {point}: every group needs at least 2 points")
        object.__setattr__(self, "grid", grid)
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise InputError(f"unknown or missing methods {bad}; choose from {METHODS}")
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.replications < 1:
            raise InputError(f"replications must be positive, got {self.replications}")
        if self.gamma != "median":
            KernelSpec(self.kernel_family, float(self.gamma))
        if self.normal_param not in NORMAL_CONVENTIONS or self.gamma_param not in GAMMA_CONVENTIONS:
            raise InputError("unknown parameter convention")

    @property
    def case_label(self) -> str:
        return f"case{self.case}" if self.case is not None else "custom"

    def kernel_for(self, pooled: np.ndarray) -> KernelSpec:
        gamma = median_heuristic(pooled) if self.gamma == "median" else float(self.gamma)
        return KernelSpec(self.kernel_family, gamma)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "distributions": [str(d) for d in self.distributions],
            "grid": [list(p) for p in self.grid],
            "methods": list(self.methods),
            "alpha": self.alpha,
            "replications": self.replications,
            "kernel": self.kernel_family,
            "gamma": self.gamma,
            "B": self.B,
            "subsampling_B": self.subsampling_B,
            "block_fraction": self.block_fraction,
            "draws": self.draws,
            "master_seed": self.master_seed,
            "normal_param": "variance",
            "gamma_param": "rate",
        }


_INT_KEYS = {"replications", "B", "subsampling_B", "draws", "master_seed", "case"}
_FLOAT_KEYS = {"alpha", "block_fraction"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` experiment format.

    Keys mirror :class:`ExperimentConfig` fields (hyphens and underscores are
    interchangeable). Groups come from ``case = 1..4`` or from
    ``distributions = normal(0,1); gamma(3,1); ...``; sizes from
    ``grid = 20,20,20; 40,40,40`` or the equal-size shorthand
    ``sizes = 20, 40``. ``#`` starts a comment.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in raw:
            raise InputError(f"config line {lineno}: duplicate key {key!r}")
        raw[key] = value

    kw: dict = {}
    try:
        for key, value in raw.items():
            if key in _INT_KEYS:
                kw[key] = int(value)
            elif key in _FLOAT_KEYS:
                kw[key] = float(value)
            elif key == "gamma":
                kw[key] = value if value == "median" else float(value)
            elif key == "kernel":
                kw["kernel_family"] = value
            elif key == "methods":
                kw[key] = tuple(m.strip() for m in value.split(",") if m.strip())
            elif key in ("normal_param", "gamma_param"):
                kw[key] = value
            elif key in ("grid", "sizes", "distributions"):
                pass
            else:
                raise InputError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise InputError(f"bad config value: {exc}") from None

    conv = {"normal": kw.get("normal_param", "variance"), "gamma": kw.get("gamma_param", "rate")}
    if "distributions" in raw:
        if "case" in kw:
            raise InputError("give either 'case' or 'distributions', not both")
        dists = [parse_distribution(t, **conv) for t in raw["distributions"].split(";") if t.strip()]
    elif "case" in kw:
        dists = case_config(kw["case"], **conv)
    else:
        raise InputError("config needs 'case' or 'distributions'")
    kw["normal_param"] = "variance"
    kw["gamma_param"] = "rate"

    try:
        if "grid" in raw:
            grid = [tuple(int(n) for n in point.split(",")) for point in raw["grid"].split(";")
                    if point.strip()]
        elif "sizes" in raw:
            grid = [(int(n),) * len(dists) for n in raw["sizes"].split(",") if n.strip()]
        else:
            raise InputError("config needs 'grid' or 'sizes'")
    except ValueError as exc:
        raise InputError(f"bad group-size grid: {exc}") from None
    return ExperimentConfig(distributions=tuple(dists), grid=tuple(grid), **kw)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class PowerPoint:
    method: str
    sizes: tuple[int, ...]
    replications: int
    rejections: int
    excluded: int = 0

    @property
    def n_total(self) -> int:
        return sum(self.sizes)

    @property
    def power(self) -> float:
        return self.rejections / self.replications if self.replications else math.nan

    @property
    def wilson(self) -> tuple[float, float]:
        if not self.replications:
            return (math.nan, math.nan)
        ci = binomtest(self.rejections, self.replications).proportion_ci(0.95, method="wilson")
        return (float(ci.low), float(ci.high))


@dataclass
class PowerCurve:
    points: list[PowerPoint]
    case: str
    seed: int
    metadata: dict = field(default_factory=dict)

    def rate(self, method: str, sizes: Sequence[int]) -> float:
        for p in self.points:
            if p.method == method and p.sizes == tuple(sizes):
                return p.power
        raise KeyError((method, tuple(sizes)))

    def series(self, method: str) -> list[PowerPoint]:
        return [p for p in self.points if p.method == method]

    @property
    def excluded(self) -> int:
        return sum(p.excluded for p in self.points)


def _run_method(method: str, config: ExperimentConfig, kernel: KernelSpec,
                data: GroupedSamples, seed) -> float:
    if method == "gmmd-permutation":
        return permutation_pvalue(kernel, data, config.B, seed).p_value
    if method == "gmmd-spectral":
        return spectral_pvalue(kernel, data, config.draws, seed).p_value
    if method == "gmmd-subsampling":
        return subsampling_pvalue(kernel, data, config.block_fraction, config.subsampling_B,
                                  seed).p_value
    if method == "kruskal-wallis":
        return kruskal_wallis(data).p_value
    return anderson_darling_k(data).p_value


def run_replicate(config: ExperimentConfig, grid_index: int, replicate: int) -> dict[str, object]:
    """Run every configured method on one simulated dataset.

    Returns ``{method: True/False}`` for reject/accept, or the error message
    when the method raised a numeric error.
    """
    rng = generator(config.master_seed, grid_index, replicate, 0)
    sizes = config.grid[grid_index]
    data = GroupedSamples([sample(d, n, rng) for d, n in zip(config.distributions, sizes)])
    kernel = config.kernel_for(data.pooled)
    out: dict[str, object] = {}
    for method in config.methods:
        seed = substream(config.master_seed, grid_index, replicate, 1 + METHODS.index(method))
        try:
            out[method] = _run_method(method, config, kernel, data, seed) <= config.alpha
        except NumericError as exc:
            out[method] = str(exc)
    return out


def run_power_experiment(config: ExperimentConfig, jobs: int = 1) -> PowerCurve:
    """Rejection rates of every method at every grid point.

    Args:
        config: Experiment definition.
        jobs: Worker threads; the result does not depend on this value.
    """
    tasks = [(g, r) for g in range(len(config.grid)) for r in range(config.replications)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = dict(zip(tasks, pool.map(lambda t: run_replicate(config, *t), tasks)))
    else:
        outcomes = {t: run_replicate(config, *t) for t in tasks}

    points, errors = [], []
    for method in config.methods:
        for g, sizes in enumerate(config.grid):
            rejections = excluded = 0
            for r in range(config.replications):
                res = outcomes[(g, r)][method]
                if isinstance(res, str):
                    excluded += 1
                    errors.append({"method": method, "grid_index": g, "replicate": r, "error": res})
                else:
                    rejections += bool(res)
            points.append(PowerPoint(method, sizes, config.replications - excluded, rejections,
                                     excluded))
    metadata = {"config": config.to_dict(), "version": __version__,
                "excluded": sum(p.excluded for p in points), "errors": errors}
    return PowerCurve(points, config.case_label, config.master_seed, metadata)


def _max_k(curve: PowerCurve) -> int:
    return max((len(p.sizes) for p in curve.points), default=0)


def csv_columns(k: int) -> list[str]:
    return (["method", "case", "n_total"] + [f"n{j + 1}" for j in range(k)]
            + ["replications", "rejections", "power", "wilson_lo", "wilson_hi", "seed"])


def _row(curve: PowerCurve, p: PowerPoint, k: int) -> dict:
    lo, hi = p.wilson
    row = {"method": p.method, "case": curve.case, "n_total": p.n_total,
           "replications": p.replications, "rejections": p.rejections,
           "power": p.power, "wilson_lo": lo, "wilson_hi": hi, "seed": curve.seed}
    for j in range(k):
        row[f"n{j + 1}"] = p.sizes[j] if j < len(p.sizes) else ""
    return row


def emit_results(curve: PowerCurve, fmt: str = "csv") -> bytes:
    """Serialize a power curve as CSV or JSON bytes."""
    k = _max_k(curve)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=csv_columns(k), lineterminator="\n")
        writer.writeheader()
        for p in curve.points:
            writer.writerow({key: repr(v) if isinstance(v, float) else v
                             for key, v in _row(curve, p, k).items()})
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {"case": curve.case, "seed": curve.seed, "metadata": curve.metadata,
               "rows": [dict(_row(curve, p, k), sizes=list(p.sizes), excluded=p.excluded)
                        for p in curve.points]}
        return (json.dumps(doc, indent=2, allow_nan=True) + "\n").encode()
    raise InputError(f"unknown output format {fmt!r}; expected csv or json")


def read_results(blob: Union[bytes, str], fmt: str = "csv") -> PowerCurve:
    """Inverse of :func:`emit_results`."""
    text = blob.decode() if isinstance(blob, bytes) else blob
    if fmt == "json":
        doc = json.loads(text)
        points = [PowerPoint(r["method"], tuple(r["sizes"]), r["replications"], r["rejections"],
                             r.get("excluded", 0)) for r in doc["rows"]]
        return PowerCurve(points, doc["case"], doc["seed"], doc.get("metadata", {}))
    if fmt != "csv":
        raise InputError(f"unknown input format {fmt!r}")
    rows = list(csv.DictReader(io.StringIO(text)))
    points, case, seed = [], "custom", 0
    for r in rows:
        sizes = []
        j = 1
        while f"n{j}" in r:
            if r[f"n{j}"] != "":
                sizes.append(int(r[f"n{j}"]))
            j += 1
        points.append(PowerPoint(r["method"], tuple(sizes), int(r["replications"]),
                                 int(r["rejections"])))
        case, seed = r["case"], int(r["seed"])
    return PowerCurve(points, case, seed, {})


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_grouped_csv(source: Union[str, Path, TextIO]) -> tuple[GroupedSamples, list[str]]:
    """Read ``value_1, ..., value_d, group`` rows into grouped samples.

    Groups are ordered by first appearance. A first row whose value cells
    are all non-numeric is taken as a header; blank lines and lines starting
    with ``#`` are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_grouped_csv(fh)
    values: list[list[float]] = []
    labels: list[str] = []
    width = None
    seen_data = False
    for lineno, row in enumerate(csv.reader(source), 1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if len(cells) < 2:
            raise InputError(f"line {lineno}: expected at least one value and a group label")
        if not seen_data and not any(_is_number(c) for c in cells[:-1]):
            seen_data = True
            width = len(cells)
            continue
        seen_data = True
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise InputError(f"line {lineno}: expected {width} columns, got {len(cells)}")
        try:
            point = [float(c) for c in cells[:-1]]
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value in {cells[:-1]}") from None
        if not all(math.isfinite(v) for v in point):
            raise InputError(f"line {lineno}: non-finite value")
        values.append(point)
        labels.append(cells[-1])
    if not values:
        raise InputError("input has no data rows")
    order = list(dict.fromkeys(labels))
    counts = {lab: labels.count(lab) for lab in order}
    small = [lab for lab in order if counts[lab] < 2]
    if small:
        raise InputError(f"group(s) {small} have fewer than 2 rows")
    return GroupedSamples.from_labels(np.array(values), labels), order


def run_single_test(data: GroupedSamples, kernel: KernelSpec, method: str = "permutation",
                    B: int = 999, draws: int = 10_000, block_fraction: float = 0.5, seed: int = 0,
                    labels: Optional[Iterable[str]] = None) -> dict:
    """Run one test and return a JSON-ready result document."""
    if method not in SINGLE_METHODS:
        raise InputError(f"unknown method {method!r}; expected one of {sorted(SINGLE_METHODS)}")
    stat = gmmd_statistic(kernel, data)
    doc = {
        "statistic": stat.t_hat,
        "scaled_statistic": stat.scaled,
        "n": stat.n,
        "k": stat.k,
        "group_sizes": data.sizes.tolist(),
        "kernel": {"family": kernel.family, "gamma": kernel.gamma},
        "method": SINGLE_METHODS[method],
        "seed": seed,
    }
    if labels is not None:
        doc["group_labels"] = list(labels)
    if method == "kruskal-wallis" or method == "anderson-darling-k":
        res = kruskal_wallis(data) if method == "kruskal-wallis" else anderson_darling_k(data)
        doc.update(p_value=res.p_value, baseline_statistic=res.statistic, details=res.details)
        return doc
    if method == "permutation":
        cal = permutation_pvalue(kernel, data, B, seed)
    elif method == "subsampling":
        cal = subsampling_pvalue(kernel, data, block_fraction, B, seed)
    else:
        cal = spectral_pvalue(kernel, data, draws, seed)
    doc.update(p_value=cal.p_value, resamples=cal.resamples, details=cal.details)
    return doc


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(config, master_seed=seed)

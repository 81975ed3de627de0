"""P-values for the GMMD test.

Three calibrations are provided:

* :func:`permutation_pvalue` recomputes ``n * T_n`` under random relabelings
  of the pooled sample that keep the group sizes.
* :func:`subsampling_pvalue` recomputes the scaled statistic on random
  without-replacement subsamples of the relabeled pooled sample.
* :func:`spectral_pvalue` simulates the asymptotic null law of ``n * T_n``,

      S = sum_p lambda_p { (k-2)(Z_p - k)
            + sum_j [ (Y_pj^2 - 1)/rho_j
                      - 2 sum_{l != j} sqrt(rho_l / rho_j) Y_pj Y_pl ] },

  with ``Y_pj`` iid N(0, 1) and ``Z_p = sum_j Y_pj^2``, using eigenvalues
  estimated from the centered pooled Gram matrix.

Resampling p-values use ``(1 + #{null >= observed}) / (B + 1)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._errors import InputError, NumericError
from ._rng import Seed, generator, seed_label
from .estimator import GroupedSamples, block_sums, gamma_from_blocks, statistic_from_gamma
from .kernel import KernelSpec, as_points, center_gram, gram, psd_tolerance

TRUNCATION_RULES = ("threshold", "top-q")
DEFAULT_THRESHOLD = 1e-10
# observed-vs-null ties are decided up to this relative slack
TIE_RTOL = 1e-10
_CHUNK = 128


@dataclass(frozen=True)
class Spectrum:
    """Estimated eigenvalues of the centered kernel integral operator, descending."""

    eigenvalues: np.ndarray
    rule: str = "threshold"
    parameter: float = DEFAULT_THRESHOLD
    source_size: int = 0

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float).ravel()
        if ev.size == 0:
            raise InputError("spectrum is empty")
        if not np.all(np.isfinite(ev)) or np.any(ev < 0):
            raise InputError("spectrum eigenvalues must be finite and nonnegative")
        if np.any(np.diff(ev) > 0):
            ev = np.sort(ev)[::-1]
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class LimitLawConfig:
    k: int
    rho: np.ndarray
    spectrum: Spectrum
    draws: int
    seed: Seed = 0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float).ravel()
        if self.k < 2:
            raise InputError(f"k must be at least 2, got {self.k}")
        if rho.size != self.k:
            raise InputError(f"rho has {rho.size} entries but k = {self.k}")
        if np.any(rho <= 0) or np.any(rho >= 1):
            raise InputError("every rho_j must lie in (0, 1)")
        if abs(rho.sum() - 1.0) > 1e-12:
            raise InputError(f"rho must sum to 1, sums to {rho.sum()!r}")
        if self.draws < 1:
            raise InputError(f"draws must be positive, got {self.draws}")
        if self.draws < 1000:
            warnings.warn(f"{self.draws} limit-law draws is too few for p-values (use >= 1000)",
                          stacklevel=3)
        spectrum = self.spectrum
        if not isinstance(spectrum, Spectrum):
            spectrum = Spectrum(np.asarray(spectrum, dtype=float), rule="top-q",
                                parameter=np.size(spectrum))
        if not np.any(spectrum.eigenvalues > 0):
            raise InputError("spectrum has no positive eigenvalue")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "spectrum", spectrum)


@dataclass
class CalibrationResult:
    p_value: float
    method: str
    resamples: int
    observed: float
    seed: int
    null_samples: Optional[np.ndarray] = field(default=None, repr=False)
    details: dict = field(default_factory=dict)


def resampling_pvalue(observed: float, null: np.ndarray) -> float:
    """``(1 + #{null >= observed}) / (len(null) + 1)``, with float-noise ties counted."""
    null = np.asarray(null, dtype=float)
    slack = TIE_RTOL * max(1.0, abs(observed))
    return float((1 + np.count_nonzero(null >= observed - slack)) / (null.size + 1))


def _scaled_stats(g: np.ndarray, labels: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    sums, diag = block_sums(g, labels, sizes.shape[0])
    t = statistic_from_gamma(gamma_from_blocks(sums, diag, sizes), sizes)
    return int(sizes.sum()) * t


def _setup(kernel: KernelSpec, data: GroupedSamples):
    g = gram(kernel, data.canonical_pooled)
    observed = float(_scaled_stats(g, data.labels, data.sizes)[0])
    return g, observed


def _check_count(name: str, value: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InputError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def permutation_pvalue(kernel: KernelSpec, data: GroupedSamples, B: int = 999,
                       seed: Seed = 0, keep_null: bool = False) -> CalibrationResult:
    """Permutation p-value of ``n * T_n`` from ``B`` size-preserving relabelings."""
    B = _check_count("B", B)
    g, observed = _setup(kernel, data)
    rng = generator(seed)
    base = data.labels
    null = np.empty(B)
    for start in range(0, B, _CHUNK):
        stop = min(start + _CHUNK, B)
        labels = np.stack([rng.permutation(base) for _ in range(stop - start)])
        null[start:stop] = _scaled_stats(g, labels, data.sizes)
    return CalibrationResult(
        p_value=resampling_pvalue(observed, null),
        method="permutation",
        resamples=B,
        observed=observed,
        seed=seed_label(seed),
        null_samples=null if keep_null else None,
    )


def subsample_sizes(sizes, block_fraction: float) -> np.ndarray:
    if not 0.0 < block_fraction < 1.0:
        raise InputError(f"block fraction must lie in (0, 1), got {block_fraction}")
    m = np.floor(block_fraction * np.asarray(sizes)).astype(np.int64)
    if np.any(m < 2):
        raise InputError(f"block fraction {block_fraction} gives subsample sizes {m.tolist()}; "
                         "each must be at least 2")
    return m


def subsampling_pvalue(kernel: KernelSpec, data: GroupedSamples, block_fraction: float = 0.5,
                       B: int = 999, seed: Seed = 0, keep_null: bool = False) -> CalibrationResult:
    """Subsampling p-value.

    Each iteration relabels the pooled sample at random and keeps
    ``floor(block_fraction * n_j)`` points of each relabeled group; the null
    value is the scaled statistic of that subsample, using its own total size.
    """
    B = _check_count("B", B)
    m = subsample_sizes(data.sizes, block_fraction)
    g, observed = _setup(kernel, data)
    rng = generator(seed)
    n = data.n
    template = np.repeat(np.arange(data.k), m)
    null = np.empty(B)
    for start in range(0, B, _CHUNK):
        stop = min(start + _CHUNK, B)
        labels = np.full((stop - start, n), -1, dtype=np.int64)
        for row in labels:
            row[rng.permutation(n)[: template.size]] = template
        null[start:stop] = _scaled_stats(g, labels, m)
    return CalibrationResult(
        p_value=resampling_pvalue(observed, null),
        method="subsampling",
        resamples=B,
        observed=observed,
        seed=seed_label(seed),
        null_samples=null if keep_null else None,
        details={"block_fraction": block_fraction, "subsample_sizes": m.tolist()},
    )


def truncate_spectrum(eigenvalues, rule: str = "threshold", parameter: float = DEFAULT_THRESHOLD,
                      source_size: int = 0) -> Spectrum:
    """Keep the informative part of a descending nonnegative eigenvalue list.

    ``threshold`` drops ``lambda < parameter * lambda_max``; ``top-q`` keeps
    the ``parameter`` largest values.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float).ravel())[::-1]
    if ev.size == 0 or ev[0] <= 0.0:
        raise NumericError("degenerate spectrum: the centered Gram matrix has no positive "
                           "eigenvalue (the pooled sample carries no variance under this kernel)")
    if rule == "threshold":
        if not 0.0 <= parameter < 1.0:
            raise InputError(f"threshold must lie in [0, 1), got {parameter}")
        kept = ev[(ev >= parameter * ev[0]) & (ev > 0.0)]
    elif rule == "top-q":
        q = _check_count("q", parameter)
        kept = ev[:q]
    else:
        raise InputError(f"unknown truncation rule {rule!r}; expected one of {TRUNCATION_RULES}")
    return Spectrum(kept, rule=rule, parameter=parameter, source_size=source_size)


def spectrum_from_gram(g: np.ndarray, rule: str = "threshold",
                       parameter: float = DEFAULT_THRESHOLD) -> Spectrum:
    n = g.shape[0]
    try:
        ev = np.linalg.eigvalsh(center_gram(g))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    if ev[0] < -psd_tolerance(n):
        raise NumericError(f"centered Gram matrix has eigenvalue {ev[0]:.3g}, "
                           "below the PSD tolerance; is the kernel positive definite?")
    ev = np.clip(ev, 0.0, None) / n
    return truncate_spectrum(ev, rule, parameter, source_size=n)


def estimate_spectrum(kernel: KernelSpec, pooled, rule: str = "threshold",
                      parameter: float = DEFAULT_THRESHOLD) -> Spectrum:
    """Eigenvalues of the centered pooled Gram matrix divided by the pooled size."""
    x = as_points(pooled, "pooled")
    if x.shape[0] < 2:
        raise InputError("spectrum estimation needs at least 2 points")
    return spectrum_from_gram(gram(kernel, x), rule, parameter)


def limit_law_terms(y: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Bracketed summand of the limit law for normals ``y`` of shape ``(..., k)``.

    The cross term uses ``sum_j sum_{l != j} a_j b_l y_j y_l =
    (a.y)(b.y) - sum_j a_j b_j y_j^2`` with ``a = rho^-1/2``, ``b = rho^1/2``.
    """
    k = rho.shape[0]
    y2 = y * y
    z = y2.sum(axis=-1)
    a = rho ** -0.5
    b = rho ** 0.5
    cross = (y @ a) * (y @ b) - z
    return (k - 2) * (z - k) + (y2 - 1.0) @ (1.0 / rho) - 2.0 * cross


def simulate_limit_law(config: LimitLawConfig) -> np.ndarray:
    """Draw ``config.draws`` realizations of the truncated limit law."""
    lam = config.spectrum.eigenvalues
    q, k = lam.size, config.k
    chunk = max(1, (1 << 20) // (q * k))
    out = np.empty(config.draws)
    for c, start in enumerate(range(0, config.draws, chunk)):
        stop = min(start + chunk, config.draws)
        rng = generator(config.seed, c)
        y = rng.standard_normal((stop - start, q, k))
        out[start:stop] = limit_law_terms(y, config.rho) @ lam
    return out


def spectral_pvalue(kernel: KernelSpec, data: GroupedSamples, draws: int = 10_000, seed: Seed = 0,
                    rule: str = "threshold", parameter: float = DEFAULT_THRESHOLD,
                    keep_null: bool = False) -> CalibrationResult:
    """P-value of ``n * T_n`` against the simulated asymptotic null law.

    The spectrum is estimated on the pooled sample and ``rho_j`` is set to
    the observed ``n_j / n``.
    """
    draws = _check_count("draws", draws)
    if draws < 1000:
        raise InputError(f"spectral calibration needs at least 1000 draws, got {draws}")
    g, observed = _setup(kernel, data)
    spectrum = spectrum_from_gram(g, rule, parameter)
    config = LimitLawConfig(k=data.k, rho=data.weights, spectrum=spectrum, draws=draws, seed=seed)
    null = simulate_limit_law(config)
    return CalibrationResult(
        p_value=resampling_pvalue(observed, null),
        method="spectral",
        resamples=draws,
        observed=observed,
        seed=seed_label(seed),
        null_samples=null if keep_null else None,
        details={"n_eigenvalues": len(spectrum), "lambda_max": float(spectrum.eigenvalues[0])},
    )

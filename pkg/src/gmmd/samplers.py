"""Seeded scalar distributions and the four simulation cases.

Parameter conventions: ``normal(mean, variance)``, ``gamma(shape, rate)``,
``uniform(lower, upper)``, ``beta(alpha, beta)``. Case definitions written
with other conventions (normal standard deviation, gamma scale) are
converted when parsed; see :func:`parse_distribution`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ._errors import InputError
from ._rng import Seed, generator

FAMILIES = {"normal": ("mean", "variance"), "gamma": ("shape", "rate"),
            "uniform": ("lower", "upper"), "beta": ("alpha", "beta")}
NORMAL_CONVENTIONS = ("variance", "sd")
GAMMA_CONVENTIONS = ("rate", "scale")


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: tuple[float, float]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown distribution family {self.family!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != 2 or not all(math.isfinite(p) for p in params):
            raise InputError(f"{self.family} needs two finite parameters, got {self.params!r}")
        a, b = params
        if self.family == "normal" and b <= 0:
            raise InputError(f"normal variance must be positive, got {b}")
        if self.family in ("gamma", "beta") and (a <= 0 or b <= 0):
            raise InputError(f"{self.family} parameters must be positive, got {params}")
        if self.family == "uniform" and not a < b:
            raise InputError(f"uniform needs lower < upper, got {params}")
        object.__setattr__(self, "params", params)

    @property
    def mean(self) -> float:
        a, b = self.params
        return {"normal": a, "gamma": a / b, "uniform": (a + b) / 2, "beta": a / (a + b)}[self.family]

    @property
    def variance(self) -> float:
        a, b = self.params
        if self.family == "normal":
            return b
        if self.family == "gamma":
            return a / b**2
        if self.family == "uniform":
            return (b - a) ** 2 / 12
        return a * b / ((a + b) ** 2 * (a + b + 1))

    def __str__(self) -> str:
        return f"{self.family}({self.params[0]!r},{self.params[1]!r})"


_DIST_RE = re.compile(r"^\s*([A-Za-z]+)\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\s*$")


def parse_distribution(text: str, normal: str = "variance", gamma: str = "rate") -> DistributionSpec:
    """Parse ``family(a, b)``, e.g. ``Gamma(6, 2)``.

    Args:
        normal: Meaning of the second normal parameter, ``variance`` or ``sd``.
        gamma: Meaning of the second gamma parameter, ``rate`` or ``scale``.
    """
    if normal not in NORMAL_CONVENTIONS or gamma not in GAMMA_CONVENTIONS:
        raise InputError(f"unknown parameter convention: normal={normal!r}, gamma={gamma!r}")
    m = _DIST_RE.match(text)
    if not m:
        raise InputError(f"cannot parse distribution {text!r}; expected family(a, b)")
    family = m.group(1).lower()
    try:
        a, b = float(m.group(2)), float(m.group(3))
    except ValueError:
        raise InputError(f"non-numeric parameter in {text!r}") from None
    if family == "normal" and normal == "sd":
        b = b * b
    if family == "gamma" and gamma == "scale":
        b = 1.0 / b if b > 0 else b
    return DistributionSpec(family, (a, b))


def sample(spec: DistributionSpec, count: int, seed: Seed | np.random.Generator = 0) -> np.ndarray:
    """``count`` iid draws from ``spec``; a seed gives bit-identical output."""
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InputError(f"count must be a positive integer, got {count!r}")
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    a, b = spec.params
    if spec.family == "normal":
        return rng.normal(a, math.sqrt(b), count)
    if spec.family == "gamma":
        # numpy's gamma sampler is exact for every shape > 0
        return rng.gamma(a, 1.0 / b, count)
    if spec.family == "uniform":
        return rng.uniform(a, b, count)
    return rng.beta(a, b, count)


CASES = {
    1: ("normal(3,1)", "gamma(3,1)", "gamma(6,2)"),
    2: ("normal(0,1)", "normal(0,2)", "normal(0,4)"),
    3: ("uniform(0,1)", "beta(1,1.5)", "beta(1.5,1)"),
    4: ("normal(0,1)", "normal(0.3,1)", "normal(0.6,1)"),
}


def case_config(case_id: int, normal: str = "variance", gamma: str = "rate") -> list[DistributionSpec]:
    """The three group distributions of simulation case 1, 2, 3 or 4."""
    try:
        texts = CASES[int(case_id)]
    except (KeyError, ValueError, TypeError):
        raise InputError(f"unknown case {case_id!r}; expected 1, 2, 3 or 4") from None
    return [parse_distribution(t, normal=normal, gamma=gamma) for t in texts]

"""Log-log decay fits used to turn O(rho^-beta) statements into pass/fail checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from .errors import NonPositiveValue

DEFAULT_SLACK = 0.8


@dataclass(frozen=True)
class DecayFit:
    name: str
    pairs: tuple
    slope: float
    slope_stderr: float
    target: float
    slack: float
    passed: bool

    @property
    def threshold(self) -> float:
        return -self.target * self.slack + 2 * self.slope_stderr


def fit_decay(pairs, target_exponent: float, name: str = "", slack: float = DEFAULT_SLACK) -> DecayFit:
    """Slope of log|value| against log rho; passes when slope <= -target * slack + 2 stderr."""
    pairs = tuple((float(r), float(v)) for r, v in pairs)
    if len(pairs) < 3:
        raise ValueError("need at least three (rho, value) pairs")
    rho = np.array([p[0] for p in pairs])
    val = np.array([p[1] for p in pairs])
    if np.any(np.diff(rho) <= 0):
        raise ValueError("rho must be strictly increasing")
    if np.any(val <= 0):
        raise NonPositiveValue("decay fits need positive values")
    fit = linregress(np.log(rho), np.log(val))
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    slope = float(fit.slope)
    passed = slope <= -target_exponent * slack + 2 * stderr
    return DecayFit(name, pairs, slope, stderr, float(target_exponent), slack, bool(passed))

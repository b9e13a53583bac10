"""Count-threshold discrimination of atom transits against shot noise.

A transit changes the mean detected count from N_empty to N; both are
Poisson. A threshold d turns the two distributions into a detection quantum
efficiency and a false-count probability, computed from exact Poisson CDFs
(regularized incomplete gamma under the hood; no Gaussian approximation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .params import ParameterError


class SeparationError(ValueError):
    """The two count distributions are not p-sigma separable."""

    def __init__(self, message: str, *, required_snr: float, achieved_snr: float):
        super().__init__(message)
        self.required_snr = required_snr
        self.achieved_snr = achieved_snr


@dataclass(frozen=True)
class CountModel:
    """Mean counts with and without an atom, and the signal polarity."""

    n_empty: float
    n_transit: float
    polarity: str  # "dip" (transit darkens) | "peak" (transit brightens)

    def __post_init__(self) -> None:
        if self.n_empty < 0.0 or self.n_transit < 0.0:
            raise ParameterError("mean counts must be nonnegative")
        if self.polarity not in ("dip", "peak"):
            raise ParameterError(f"polarity must be 'dip' or 'peak', got {self.polarity!r}")
        if self.polarity == "dip" and self.n_transit > self.n_empty:
            raise ParameterError("dip polarity requires n_transit <= n_empty")
        if self.polarity == "peak" and self.n_transit < self.n_empty:
            raise ParameterError("peak polarity requires n_transit >= n_empty")

    @classmethod
    def from_counts(cls, n_empty: float, n_transit: float) -> "CountModel":
        """Infer polarity from the ordering of the means."""
        polarity = "dip" if n_transit <= n_empty else "peak"
        return cls(n_empty, n_transit, polarity)

    @property
    def snr(self) -> float:
        total = self.n_empty + self.n_transit
        if total == 0.0:
            return 0.0
        return (self.n_empty - self.n_transit) / math.sqrt(total)


@dataclass(frozen=True)
class DiscriminatorCurve:
    """QE and false-count probability versus integer threshold."""

    thresholds: np.ndarray
    qe: np.ndarray
    false_rate: np.ndarray


def qe_false_curves(model: CountModel, thresholds: np.ndarray | None = None) -> DiscriminatorCurve:
    """Detection QE and false-count probability for each threshold.

    Dip polarity counts an atom when X <= d: QE(d) = P(X <= d | N),
    false(d) = P(X <= d | N_empty). Peak polarity uses the complements
    (X >= d). Both curves are monotone in d and reach {0, 1} at the ends.
    """
    if thresholds is None:
        top = int(math.ceil(max(model.n_empty, model.n_transit)
                            + 6.0 * math.sqrt(max(model.n_empty, model.n_transit) + 1.0)))
        thresholds = np.arange(0, top + 1)
    thresholds = np.asarray(thresholds, dtype=int)
    if model.polarity == "dip":
        qe = stats.poisson.cdf(thresholds, model.n_transit)
        false = stats.poisson.cdf(thresholds, model.n_empty)
    else:
        # P(X >= d) = sf(d - 1)
        qe = stats.poisson.sf(thresholds - 1, model.n_transit)
        false = stats.poisson.sf(thresholds - 1, model.n_empty)
    return DiscriminatorCurve(thresholds=thresholds, qe=qe, false_rate=false)


@dataclass(frozen=True)
class ThresholdChoice:
    threshold: int
    qe: float
    false_rate: float
    interval: tuple[float, float]  # the p-sigma separation interval (real-valued)


def choose_threshold(model: CountModel, p: float) -> ThresholdChoice:
    """Place the threshold p Poisson standard deviations from both means.

    For a dip the admissible interval is [N + p*sqrt(N), N_empty -
    p*sqrt(N_empty)]; its midpoint, rounded down, becomes the threshold, and
    the achieved QE/false rate are reported from exact Poisson CDFs. An
    empty interval raises SeparationError carrying the SNR the rule would
    need (sqrt(2)*p).
    """
    if p <= 0.0:
        raise ParameterError(f"sigma count p must be positive, got {p!r}")
    ne, nt = model.n_empty, model.n_transit
    if model.polarity == "dip":
        lo = nt + p * math.sqrt(nt)
        hi = ne - p * math.sqrt(ne)
    else:
        lo = ne + p * math.sqrt(ne)
        hi = nt - p * math.sqrt(nt)
    if lo > hi:
        achieved = abs(model.snr)
        raise SeparationError(
            f"count distributions are not separated at {p:g} sigma "
            f"(interval [{lo:.3f}, {hi:.3f}] is empty); the rule needs "
            f"|SNR| >= {min_snr_for_sigma(p):.4f}, achieved {achieved:.4f}",
            required_snr=min_snr_for_sigma(p),
            achieved_snr=achieved,
        )
    d = int(math.floor(0.5 * (lo + hi)))
    curve = qe_false_curves(model, np.array([d]))
    return ThresholdChoice(
        threshold=d,
        qe=float(curve.qe[0]),
        false_rate=float(curve.false_rate[0]),
        interval=(lo, hi),
    )


def min_snr_for_sigma(p: float) -> float:
    """Smallest |SNR| for which p-sigma separation is guaranteed: sqrt(2)*p."""
    if p < 0.0:
        raise ParameterError(f"sigma count p must be nonnegative, got {p!r}")
    return math.sqrt(2.0) * p

"""Merit functionals over guessing densities and their optimization.

A merit function scores a guess by the angle t it makes with the true input
direction, monotonically non-increasing in t. The average merit of a
two-parameter density A cos^2(t/2) + B sin^2(t/2) is affine in (A, B), so
over the normalized family 2pi(A+B) = 1 every monotone merit is maximized at
an endpoint; for the fidelity score cos^2(t/2) the average has the closed
form (2pi/3)(2A + B), peaking at 2/3 when B = 0.

Averages are computed by adaptive quadrature (with the merit's tabulation
nodes as breakpoints when it has them) so the closed form and the optimizer
scan stay independent checks of each other rather than one construction.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import streams
from .bloch import dots, random_directions
from .errors import QGuessError
from .estimator import (
    DEFAULT_TRIALS,
    EstimatorStrategy,
    GuessingForm,
    TWO_PI,
    guessing_density,
)


class MeritFunction(ABC):
    """Score of a guess as a function of its angle to the input, in [0, 1]."""

    label: str = "merit"

    @abstractmethod
    def score(self, theta):
        """Vectorized score at angle(s) theta in [0, pi]."""

    def quad_points(self):
        """Breakpoints for adaptive quadrature, or None when smooth."""
        return None


class FidelityMerit(MeritFunction):
    """score(t) = cos^2(t/2), the squared overlap of guess and input."""

    label = "fidelity"

    def score(self, theta):
        out = (1.0 + np.cos(np.asarray(theta))) / 2.0
        return float(out) if np.isscalar(theta) else out


class MonotoneTabulatedMerit(MeritFunction):
    """Merit tabulated on a theta grid, interpolated linearly.

    Node scores must lie in [0, 1] and be non-increasing in theta; constant
    tables are allowed (every density then earns the same average).
    """

    def __init__(self, thetas, scores, label: str = "tabulated-merit"):
        thetas = np.asarray(thetas, dtype=float)
        scores = np.asarray(scores, dtype=float)
        if thetas.ndim != 1 or thetas.shape != scores.shape or len(thetas) < 2:
            raise QGuessError("need matching 1-d theta and score grids with >= 2 nodes")
        if thetas[0] != 0.0 or abs(thetas[-1] - math.pi) > 1e-12 or np.any(np.diff(thetas) <= 0):
            raise QGuessError("theta grid must increase strictly from 0 to pi")
        if scores.min() < 0.0 or scores.max() > 1.0:
            raise QGuessError("merit scores must lie in [0, 1]")
        if np.any(np.diff(scores) > 1e-12):
            raise QGuessError("merit scores must be non-increasing in theta")
        self.thetas = thetas
        self.scores = scores
        self.label = label

    def score(self, theta):
        out = np.interp(np.asarray(theta, dtype=float), self.thetas, self.scores)
        return float(out) if np.isscalar(theta) else out

    def quad_points(self):
        return self.thetas[1:-1]


def named_merit(name: str) -> MeritFunction:
    """Merit functions exposed on the command line."""
    if name == "fidelity":
        return FidelityMerit()
    if name == "cos4":
        grid = np.linspace(0.0, math.pi, 41)
        return MonotoneTabulatedMerit(grid, ((1.0 + np.cos(grid)) / 2.0) ** 2, label="cos4")
    if name == "constant":
        grid = np.linspace(0.0, math.pi, 11)
        return MonotoneTabulatedMerit(grid, np.full(len(grid), 0.5), label="constant")
    raise QGuessError(f"unknown merit {name!r}")


# ---------------------------------------------------------------------------
# averages

def average_fidelity_exact(form: GuessingForm) -> float:
    """Closed-form sphere average of cos^2(t/2) against the density: (2pi/3)(2A+B)."""
    return (TWO_PI / 3.0) * (2.0 * form.A + form.B)


def average_merit(form: GuessingForm, merit: MeritFunction) -> float:
    """Sphere average of the merit against the density, by adaptive quadrature."""
    form.require_normalized()

    def integrand(theta: float) -> float:
        return float(merit.score(theta)) * guessing_density(form, theta) * TWO_PI * math.sin(theta)

    points = merit.quad_points()
    limit = 100 if points is None else max(100, 2 * len(points) + 10)
    value, _ = quad(integrand, 0.0, math.pi, points=points, limit=limit, epsabs=1e-12, epsrel=1e-12)
    return value


def expected_fidelity(strategy: EstimatorStrategy) -> float:
    """Analytic average fidelity of a strategy: closed form when it carries a
    two-parameter form, dense quadrature of its tabulated density otherwise."""
    form = getattr(strategy, "form", None)
    if form is not None:
        return average_fidelity_exact(form)
    return strategy.sphere_expectation(FidelityMerit().score)


def reverse_outcomes(form: GuessingForm) -> GuessingForm:
    """Density after flipping every guess to its antipode: swaps A and B.

    Averages are conserved in the sense avg(form) + avg(reversed) integrates
    score(t) + score(pi - t); for fidelity that sum is 1.
    """
    return GuessingForm(form.B, form.A)


# ---------------------------------------------------------------------------
# optimization over the normalized family

@dataclass(frozen=True)
class ScanResult:
    """Merit values over the normalized family, parameterized by a_frac = 2pi A."""

    merit_label: str
    a_fractions: np.ndarray
    values: np.ndarray
    best_index: int
    tie: bool

    @property
    def best_form(self) -> GuessingForm:
        return GuessingForm.from_a_fraction(float(self.a_fractions[self.best_index]))

    @property
    def best_value(self) -> float:
        return float(self.values[self.best_index])


def optimize_ab(merit: MeritFunction, grid_points: int = 1001) -> ScanResult:
    """Maximize the average merit over normalized forms by scanning a_frac.

    The average is affine in a_frac, so the maximum must sit at an endpoint;
    the scan verifies the shape and an explicit endpoint check guards the
    affine assumption. A flat scan (constant merit) is reported as a tie
    rather than an arbitrary argmax.
    """
    if grid_points < 2:
        raise QGuessError(f"need at least 2 grid points, got {grid_points}")
    a_fractions = np.linspace(0.0, 1.0, grid_points)
    values = np.array([average_merit(GuessingForm.from_a_fraction(a), merit) for a in a_fractions])
    best = int(np.argmax(values))
    scale = max(1.0, float(np.max(np.abs(values))))
    tie = float(values.max() - values.min()) <= 1e-12 * scale
    if values[best] - max(values[0], values[-1]) > 1e-9 * scale:
        raise QGuessError("merit scan has an interior maximum; average is not affine in the density")
    return ScanResult(
        merit_label=merit.label,
        a_fractions=a_fractions,
        values=values,
        best_index=best,
        tie=tie,
    )


# ---------------------------------------------------------------------------
# Monte Carlo fidelity

@dataclass(frozen=True)
class MeritReport:
    """A merit average with its provenance and, when sampled, its error bar."""

    value: float
    method: str
    std_error: float | None = None
    trials: int | None = None

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "std_error": self.std_error,
            "trials": self.trials,
        }


def monte_carlo_fidelity(
    strategy: EstimatorStrategy,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    workers: int = 1,
    stream_block: int = 0,
) -> MeritReport:
    """Sample mean of cos^2(t/2) over isotropic inputs, with standard error.

    Inputs are drawn uniformly, guesses from the strategy; scores accumulate
    per batch in worker order, so the value is bit-identical for a fixed
    (seed, workers).
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    total = 0.0
    total_sq = 0.0
    for rng, m in streams.worker_batches(seed, trials, workers, block=stream_block):
        inputs = random_directions(rng, m)
        outcomes = strategy.sample_batch(inputs, rng)
        s = (1.0 + dots(inputs, outcomes)) / 2.0
        total += float(np.sum(s))
        total_sq += float(np.sum(s * s))
    mean = total / trials
    variance = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return MeritReport(
        value=mean,
        method="monte-carlo",
        std_error=math.sqrt(variance / trials),
        trials=trials,
    )

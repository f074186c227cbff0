"""Estimation strategies and empirical guessing densities over outcome directions.

A strategy maps an input direction to a guessed direction; every strategy here
is isotropic, so the outcome distribution depends on the input only through
the angle t between guess and input. The two-parameter family

    density(t) = A cos^2(t/2) + B sin^2(t/2) = alpha + beta cos t,
    alpha = (A + B)/2,  beta = (A - B)/2

covers the random-axis measurement strategy (A = 1/2pi, B = 0) and the
uniform guesser (A = B = 1/4pi). Tabulated strategies carry an arbitrary
nonnegative density over t, interpolated linearly, and are sampled by
numerical CDF inversion. Sampling for the two-parameter family inverts the
closed-form CDF, which is quadratic in cos t.

Histogram bins are equal width in t (not equal solid angle) so the
cos^2-versus-cos^4 shapes stay resolved near the poles; densities are
reported per steradian.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import streams
from .bloch import (
    ALGEBRA_TOL,
    BlochVector,
    angles_between,
    directions_at_angle,
    dots,
    overlap2,
    random_direction,
    random_directions,
)
from .errors import InvalidFormError

TWO_PI = 2.0 * math.pi
FULL_SPHERE = 4.0 * math.pi

DEFAULT_BINS = 50
DEFAULT_TRIALS = 1_000_000

# linear-interpolant sphere integral must hit 1 within this
TABULATED_NORM_TOL = 1e-6


@dataclass(frozen=True)
class GuessingForm:
    """The (A, B) pair of the two-parameter guessing density.

    A and B are probability densities per steradian (the values at t = 0 and
    t = pi); they must be non-negative. Normalization, 2pi(A + B) = 1, is
    required only where the form is used as a density and is checked there.
    """

    A: float
    B: float

    def __post_init__(self):
        if self.A < 0.0 or self.B < 0.0:
            raise InvalidFormError(f"A and B must be non-negative, got ({self.A}, {self.B})")

    @property
    def alpha(self) -> float:
        return (self.A + self.B) / 2.0

    @property
    def beta(self) -> float:
        return (self.A - self.B) / 2.0

    @property
    def is_normalized(self) -> bool:
        return abs(TWO_PI * (self.A + self.B) - 1.0) <= ALGEBRA_TOL

    def require_normalized(self) -> "GuessingForm":
        if not self.is_normalized:
            raise InvalidFormError(
                f"form must satisfy 2pi(A+B)=1 to be a density, got A={self.A}, B={self.B}"
            )
        return self

    @classmethod
    def from_a_fraction(cls, a_frac: float) -> "GuessingForm":
        """Normalized form with A = a_frac/2pi, B = (1 - a_frac)/2pi."""
        if not 0.0 <= a_frac <= 1.0:
            raise InvalidFormError(f"a_frac must lie in [0, 1], got {a_frac}")
        return cls(a_frac / TWO_PI, (1.0 - a_frac) / TWO_PI)


MASSAR_POPESCU_FORM = GuessingForm(1.0 / TWO_PI, 0.0)
UNIFORM_FORM = GuessingForm(1.0 / FULL_SPHERE, 1.0 / FULL_SPHERE)


def guessing_density(form: GuessingForm, theta):
    """A cos^2(t/2) + B sin^2(t/2) at angle(s) theta in [0, pi]."""
    c2 = np.cos(np.asarray(theta) / 2.0) ** 2
    out = form.A * c2 + form.B * (1.0 - c2)
    return float(out) if np.isscalar(theta) else out


def cap_probability(form: GuessingForm, cap_half_angle: float) -> float:
    """Closed-form integral of the density over a cap of given half-angle.

    The integrand is linear in cos t, so the antiderivative is quadratic in
    cos t; for the full sphere and a normalized form this returns 1.
    """
    if not 0.0 < cap_half_angle <= math.pi:
        raise InvalidFormError(f"cap half-angle must lie in (0, pi], got {cap_half_angle}")
    c = math.cos(cap_half_angle)
    return TWO_PI * (1.0 - c) * (form.alpha + form.beta * (1.0 + c) / 2.0)


def ab_bin_probabilities(form: GuessingForm, theta_edges: np.ndarray) -> np.ndarray:
    """Exact per-bin probabilities of the form over a theta grid."""
    t = np.cos(np.asarray(theta_edges, dtype=float))
    lo, hi = t[:-1], t[1:]
    return TWO_PI * (form.alpha * (lo - hi) + form.beta * (lo * lo - hi * hi) / 2.0)


def _ab_inverse_cdf(form: GuessingForm, u: np.ndarray) -> np.ndarray:
    """cos t such that the form's cap CDF equals u; branch stable as beta -> 0.

    With g = u - 1/2 + pi*beta the quadratic CDF inverts to
    t = 2g / (1/2 + sqrt(1/4 + 4*pi*beta*g)); the discriminant is a perfect
    square at u in {0, 1} and non-negative throughout for admissible forms.
    """
    pb = math.pi * form.beta
    g = u - 0.5 + pb
    disc = np.clip(0.25 + 4.0 * pb * g, 0.0, None)
    return np.clip(2.0 * g / (0.5 + np.sqrt(disc)), -1.0, 1.0)


# ---------------------------------------------------------------------------
# elementary measurements

def stern_gerlach(input: BlochVector, axis: BlochVector, rng: np.random.Generator) -> BlochVector:
    """Two-outcome measurement along `axis`: returns axis with the Born-rule
    probability cos^2(t/2), its antipode otherwise. Consumes one uniform."""
    if rng.random() < overlap2(axis, input):
        return axis
    return axis.antipode()


def estimate_massar_popescu(input: BlochVector, rng: np.random.Generator) -> BlochVector:
    """Measure along a uniformly random axis and report the observed eigendirection.

    Outcome density over the sphere is (1/2pi) cos^2(t/2) in the angle t to
    the input. Consumes three uniforms (axis z, axis azimuth, Born draw).
    """
    axis = random_direction(rng)
    return stern_gerlach(input, axis, rng)


def sample_from_form(
    form: GuessingForm, input: BlochVector, rng: np.random.Generator
) -> BlochVector:
    """One direction with density A cos^2(t/2) + B sin^2(t/2) about `input`.

    Inverse-CDF in cos t plus a uniform azimuth; consumes two uniforms.
    """
    form.require_normalized()
    t = _ab_inverse_cdf(form, np.array([rng.random()]))
    phi = np.array([rng.uniform(0.0, TWO_PI)])
    out = directions_at_angle(input.as_array()[None, :], t, phi)[0]
    return BlochVector.normalized(*out)


# ---------------------------------------------------------------------------
# strategies

class EstimatorStrategy(ABC):
    """Isotropic estimator: output density depends only on the angle to the input."""

    label: str = "strategy"

    @abstractmethod
    def density(self, theta):
        """Analytic outcome density (per steradian) at angle(s) theta to the input."""

    @abstractmethod
    def sample_batch(self, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Guess directions for an (n, 3) array of inputs; fixed draw order."""

    def sample(self, input: BlochVector, rng: np.random.Generator) -> BlochVector:
        return BlochVector.normalized(*self.sample_batch(input.as_array()[None, :], rng)[0])

    def bin_probabilities(self, theta_edges: np.ndarray) -> np.ndarray:
        """Probability mass of the outcome angle in each [edge_i, edge_i+1) bin."""
        raise NotImplementedError


class MassarPopescuStrategy(EstimatorStrategy):
    """Random-axis two-outcome measurement; density (1/2pi) cos^2(t/2)."""

    label = "massar-popescu"
    form = MASSAR_POPESCU_FORM

    def density(self, theta):
        return guessing_density(self.form, theta)

    def sample_batch(self, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        axes = random_directions(rng, len(inputs))
        born = rng.random(len(inputs))
        keep = born < (1.0 + dots(axes, inputs)) / 2.0
        return np.where(keep[:, None], axes, -axes)

    def sample(self, input: BlochVector, rng: np.random.Generator) -> BlochVector:
        return estimate_massar_popescu(input, rng)

    def bin_probabilities(self, theta_edges: np.ndarray) -> np.ndarray:
        return ab_bin_probabilities(self.form, theta_edges)


class ABFormStrategy(EstimatorStrategy):
    """Direct sampler of a normalized two-parameter guessing density."""

    def __init__(self, form: GuessingForm):
        self.form = form.require_normalized()
        self.label = f"ab(A={form.A!r},B={form.B!r})"

    def density(self, theta):
        return guessing_density(self.form, theta)

    def sample_batch(self, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        t = _ab_inverse_cdf(self.form, rng.random(len(inputs)))
        phi = rng.uniform(0.0, TWO_PI, size=len(inputs))
        return directions_at_angle(inputs, t, phi)

    def sample(self, input: BlochVector, rng: np.random.Generator) -> BlochVector:
        return sample_from_form(self.form, input, rng)

    def bin_probabilities(self, theta_edges: np.ndarray) -> np.ndarray:
        return ab_bin_probabilities(self.form, theta_edges)


class TabulatedStrategy(EstimatorStrategy):
    """Density tabulated on a theta grid, interpolated linearly.

    The grid must span [0, pi]; values must be non-negative and the sphere
    integral of the interpolant must be 1 within 1e-6. Within each grid cell
    the interpolant is linear in theta, so cell integrals of f(t) sin t have
    a closed antiderivative; the CDF used for sampling is exact at the nodes
    of an internal refinement and inverted by interpolation.
    """

    REFINEMENT = 8193  # internal CDF nodes before merging the user grid

    def __init__(self, thetas, values, label: str = "tabulated"):
        thetas = np.asarray(thetas, dtype=float)
        values = np.asarray(values, dtype=float)
        if thetas.ndim != 1 or thetas.shape != values.shape or len(thetas) < 2:
            raise InvalidFormError("need matching 1-d theta and value grids with >= 2 nodes")
        if thetas[0] != 0.0 or abs(thetas[-1] - math.pi) > 1e-12 or np.any(np.diff(thetas) <= 0):
            raise InvalidFormError("theta grid must increase strictly from 0 to pi")
        if values.min() < 0.0:
            raise InvalidFormError("tabulated densities must be non-negative")
        self.thetas = thetas
        self.values = values
        self.label = label

        nodes = np.union1d(np.linspace(0.0, math.pi, self.REFINEMENT), thetas)
        dens = np.interp(nodes, thetas, values)
        self._nodes = nodes
        self._node_density = dens
        self._cdf = np.concatenate([[0.0], np.cumsum(_linear_cells_sphere_mass(nodes, dens))])
        self.sphere_integral = float(self._cdf[-1])
        if abs(self.sphere_integral - 1.0) > TABULATED_NORM_TOL:
            raise InvalidFormError(
                f"tabulated density must integrate to 1 over the sphere, got {self.sphere_integral}"
            )

    def density(self, theta):
        out = np.interp(np.asarray(theta, dtype=float), self.thetas, self.values)
        return float(out) if np.isscalar(theta) else out

    def cdf(self, theta) -> np.ndarray:
        """Outcome-angle CDF (normalized), exact for the interpolated density."""
        q = np.atleast_1d(np.asarray(theta, dtype=float))
        idx = np.clip(np.searchsorted(self._nodes, q, side="right") - 1, 0, len(self._nodes) - 2)
        t0, t1 = self._nodes[idx], self._nodes[idx + 1]
        f0, f1 = self._node_density[idx], self._node_density[idx + 1]
        partial = _linear_segment_sphere_mass(t0, f0, t1, f1, np.clip(q, t0, t1))
        return (self._cdf[idx] + partial) / self.sphere_integral

    def sample_batch(self, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(len(inputs))
        theta = np.interp(u, self._cdf / self.sphere_integral, self._nodes)
        phi = rng.uniform(0.0, TWO_PI, size=len(inputs))
        return directions_at_angle(inputs, np.cos(theta), phi)

    def bin_probabilities(self, theta_edges: np.ndarray) -> np.ndarray:
        return np.diff(self.cdf(np.asarray(theta_edges, dtype=float)))

    def sphere_expectation(self, score) -> float:
        """Sphere average of a vectorized angle score under the sampled
        (renormalized) density, by 5-point Gauss-Legendre per refinement cell
        (the density is linear within a cell, so only the score limits accuracy)."""
        x, w = np.polynomial.legendre.leggauss(5)
        t0, t1 = self._nodes[:-1, None], self._nodes[1:, None]
        half = (t1 - t0) / 2.0
        s = (t0 + t1) / 2.0 + half * x
        d0, d1 = self._node_density[:-1, None], self._node_density[1:, None]
        dens = d0 + (d1 - d0) * (x + 1.0) / 2.0
        y = dens * np.reshape(score(s.ravel()), s.shape) * np.sin(s)
        total = TWO_PI * float(np.sum(half * y * w))
        return total / self.sphere_integral


def _linear_cells_sphere_mass(nodes: np.ndarray, dens: np.ndarray) -> np.ndarray:
    """Sphere mass 2pi * integral of f(t) sin t over each consecutive node cell."""
    return _linear_segment_sphere_mass(nodes[:-1], dens[:-1], nodes[1:], dens[1:], nodes[1:])


def _linear_segment_sphere_mass(t0, f0, t1, f1, t):
    """2pi * integral_{t0}^{t} f(s) sin s ds with f linear through (t0,f0),(t1,f1).

    Antiderivative of (a + b s) sin s is -(a + b s) cos s + b sin s.
    """
    b = (f1 - f0) / (t1 - t0)
    a = f0 - b * t0

    def anti(s):
        return -(a + b * s) * np.cos(s) + b * np.sin(s)

    return TWO_PI * (anti(t) - anti(t0))


# ---------------------------------------------------------------------------
# histograms

@dataclass(frozen=True)
class DensityHistogram:
    """Counts of outcome angles on an equal-width theta grid over [0, pi]."""

    theta_edges: np.ndarray
    counts: np.ndarray
    trials: int

    def __post_init__(self):
        edges = np.asarray(self.theta_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if len(edges) != len(counts) + 1 or len(counts) < 1:
            raise ValueError("need len(theta_edges) == len(counts) + 1")
        if edges[0] != 0.0 or abs(edges[-1] - math.pi) > 1e-12:
            raise ValueError("theta grid must span [0, pi]")
        widths = np.diff(edges)
        if not np.allclose(widths, widths[0], rtol=0.0, atol=1e-12):
            raise ValueError("theta bins must have equal width")
        if counts.min() < 0 or counts.sum() != self.trials:
            raise ValueError("counts must be non-negative and sum to the trial count")
        edges = edges.copy()
        counts = counts.copy()
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "theta_edges", edges)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_angles(cls, angles: np.ndarray, bins: int = DEFAULT_BINS) -> "DensityHistogram":
        counts, edges = np.histogram(angles, bins=bins, range=(0.0, math.pi))
        return cls(edges, counts, int(len(angles)))

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def solid_angles(self) -> np.ndarray:
        """Per-bin solid angle 2pi (cos t_lo - cos t_hi); sums to 4pi."""
        t = np.cos(self.theta_edges)
        return TWO_PI * (t[:-1] - t[1:])

    @property
    def empirical_density(self) -> np.ndarray:
        """count / (trials * bin solid angle), per steradian."""
        return self.counts / (self.trials * self.solid_angles)


def bin_outcomes(samples, bins: int = DEFAULT_BINS) -> DensityHistogram:
    """Histogram the angle between input and outcome for (input, outcome) pairs."""
    pairs = list(samples)
    if not pairs:
        raise ValueError("need at least one (input, outcome) pair")
    inputs = np.array([[v.x, v.y, v.z] for v, _ in pairs])
    outcomes = np.array([[v.x, v.y, v.z] for _, v in pairs])
    return DensityHistogram.from_angles(angles_between(inputs, outcomes), bins=bins)


def collect_histogram(
    strategy: EstimatorStrategy,
    trials: int = DEFAULT_TRIALS,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
    workers: int = 1,
    stream_block: int = 0,
) -> DensityHistogram:
    """Monte Carlo outcome-angle histogram with isotropically drawn inputs.

    Trials are split across per-worker substreams of (seed, worker); counts
    aggregate by summation so the result is bit-identical for a fixed worker
    count.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    counts = np.zeros(bins, dtype=np.int64)
    edges = np.histogram_bin_edges(np.empty(0), bins=bins, range=(0.0, math.pi))
    for rng, m in streams.worker_batches(seed, trials, workers, block=stream_block):
        inputs = random_directions(rng, m)
        outcomes = strategy.sample_batch(inputs, rng)
        counts += np.histogram(angles_between(inputs, outcomes), bins=edges)[0]
    return DensityHistogram(edges, counts, trials)


def histogram_chi2(hist: DensityHistogram, bin_probs: np.ndarray) -> tuple[float, int]:
    """Pearson chi-square of observed counts against expected probabilities.

    Returns (chi2, dof) with dof = bins - 1; bins with zero expected mass and
    zero observed count are skipped, a count where none is expected gives inf.
    """
    expected = hist.trials * np.asarray(bin_probs, dtype=float)
    observed = hist.counts.astype(float)
    live = expected > 0.0
    if np.any(observed[~live] > 0):
        return math.inf, hist.bins - 1
    chi2 = float(np.sum((observed[live] - expected[live]) ** 2 / expected[live]))
    return chi2, hist.bins - 1


def histogram_csv(hist: DensityHistogram, analytic_density: np.ndarray) -> str:
    """CSV block with the declared columns; one row per bin.

    `analytic_density` is the strategy's bin-averaged density per steradian
    (bin probability / bin solid angle), directly comparable to the empirical
    column.
    """
    lines = ["theta_lo,theta_hi,solid_angle,count,empirical_density,analytic_density"]
    edges = hist.theta_edges
    emp = hist.empirical_density
    sa = hist.solid_angles
    for i in range(hist.bins):
        lines.append(
            f"{float(edges[i])!r},{float(edges[i + 1])!r},{float(sa[i])!r},{int(hist.counts[i])},"
            f"{float(emp[i])!r},{float(analytic_density[i])!r}"
        )
    return "\n".join(lines) + "\n"

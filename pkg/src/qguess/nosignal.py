"""Operational indistinguishability of mixture decompositions.

One mixed qubit state admits many ensemble decompositions; a remote party
able to steer which decomposition is prepared must not be detectable from
estimation outcomes alone. For an isotropic estimator with outcome density
g(t) in the angle t between guess and input, indistinguishability of the
weighted-pole decomposition and the symmetric tilted-pair decomposition of
the same mixture requires, for every outcome direction m and mixing weight p,

    (1/2) g(angle(m, up_tilt)) + (1/2) g(angle(m, down_tilt))
        = p g(angle(m, +z)) + (1-p) g(angle(m, -z)).

Densities of the two-parameter family A cos^2(t/2) + B sin^2(t/2) satisfy
this identically (they are affine in cos t, and the two decompositions share
first moments); any density with curvature in cos t violates it. This module
checks the identity on direction grids, derives the nearest two-parameter
form from endpoint values, fits the form to sampled histograms with errors,
and runs the counting experiment that tries to tell the two preparations
apart from cap frequencies alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import streams
from .bloch import BlochVector
from .ensembles import EnsembleDecomposition, standard_decomposition, symmetric_decomposition, tilt_angle
from .errors import QGuessError, UnfittableHistogramError
from .estimator import (
    DensityHistogram,
    EstimatorStrategy,
    GuessingForm,
    TabulatedStrategy,
    TWO_PI,
    guessing_density,
)

DEFAULT_P_GRID = (0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_CAP_HALF_ANGLE = 0.2
DEFAULT_DIRECTIONS = 200

# z-statistic bands for the discrimination verdict
Z_NOT_DETECTABLE = 4.0
Z_DETECTABLE = 5.0

VERDICT_NOT_DETECTABLE = "not detectable"
VERDICT_DETECTABLE = "detectable"
VERDICT_INDETERMINATE = "indeterminate"


def fibonacci_directions(n: int) -> np.ndarray:
    """n quasi-uniform unit vectors (Fibonacci sphere lattice), as an (n, 3) array."""
    if n < 1:
        raise ValueError(f"need at least one direction, got {n}")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def _direction_array(m_grid) -> np.ndarray:
    if isinstance(m_grid, np.ndarray):
        dirs = np.asarray(m_grid, dtype=float)
    else:
        dirs = np.array(
            [m.as_array() if isinstance(m, BlochVector) else np.asarray(m, dtype=float) for m in m_grid]
        )
    if dirs.ndim != 2 or dirs.shape[1] != 3 or len(dirs) == 0:
        raise ValueError("m_grid must be a non-empty collection of 3-vectors")
    return dirs


@dataclass(frozen=True)
class ConstraintResidual:
    """Pointwise violation of the two-decomposition identity at one weight p."""

    p: float
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def rms_residual(self) -> float:
        return float(np.sqrt(np.mean(self.residuals ** 2)))


def constraint_residual(density, p: float, m_grid) -> ConstraintResidual:
    """|lhs - rhs| of the decomposition identity over outcome directions.

    `density` must map an ndarray of angles to densities (vectorized). The
    four reference directions come from the two decompositions at weight p.
    """
    dirs = _direction_array(m_grid)
    std = standard_decomposition(p)
    sym = symmetric_decomposition(p)

    def dens_to(ref: np.ndarray) -> np.ndarray:
        return np.asarray(density(np.arccos(np.clip(dirs @ ref, -1.0, 1.0))))

    lhs = 0.5 * dens_to(sym.directions[0]) + 0.5 * dens_to(sym.directions[1])
    rhs = p * dens_to(std.directions[0]) + (1.0 - p) * dens_to(std.directions[1])
    return ConstraintResidual(p=p, residuals=np.abs(lhs - rhs))


def constraint_residual_grid(density, p_values=DEFAULT_P_GRID, m_grid=None) -> list[ConstraintResidual]:
    """constraint_residual at each weight; default 200-direction Fibonacci grid."""
    if m_grid is None:
        m_grid = fibonacci_directions(DEFAULT_DIRECTIONS)
    return [constraint_residual(density, p, m_grid) for p in p_values]


@dataclass(frozen=True)
class AbDerivation:
    """Two-parameter form read off a density's endpoints, with its worst misfit."""

    form: GuessingForm
    max_deviation: float


def derive_ab_form(density, theta_grid=None) -> AbDerivation:
    """Form with A = density(0), B = density(pi); deviation maxed over the grid.

    A density obeying the decomposition identity matches its endpoint form
    everywhere (deviation at rounding level); curvature in cos t shows up as
    a non-trivial deviation, largest near t = pi/2.
    """
    if theta_grid is None:
        theta_grid = np.linspace(0.0, math.pi, 1001)
    grid = np.asarray(theta_grid, dtype=float)
    g = np.asarray(density(grid))
    form = GuessingForm(float(g[0]), float(g[-1]))
    deviation = np.abs(g - guessing_density(form, grid))
    return AbDerivation(form=form, max_deviation=float(np.max(deviation)))


# ---------------------------------------------------------------------------
# counterexample density with curvature in cos t

def cos4_density(theta):
    """(3/4pi) cos^4(t/2): normalized, but quadratic in cos t."""
    out = (3.0 / (2.0 * TWO_PI)) * np.cos(np.asarray(theta) / 2.0) ** 4
    return float(out) if np.isscalar(theta) else out


def cos4_strategy(nodes: int = 4001) -> TabulatedStrategy:
    """Tabulated sampler of the cos^4 density (grid fine enough to renormalize
    within the tabulation tolerance)."""
    grid = np.linspace(0.0, math.pi, nodes)
    return TabulatedStrategy(grid, cos4_density(grid), label="cos4")


# ---------------------------------------------------------------------------
# expected cap frequencies (quadrature oracle for the counting experiment)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _composite_gl(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = np.broadcast_to(_GL_WEIGHTS, (panels, len(_GL_WEIGHTS))) * half[:, None]
    return nodes, weights.ravel()


def cap_frequency(density, axis_angle: float, cap_half_angle: float) -> float:
    """Probability that a guess lands in the cap about +z when the input
    direction makes `axis_angle` with +z, for an isotropic outcome density.

    Quadrature over the cap: polar angle by composite Gauss-Legendre,
    azimuth by the midpoint rule (periodic, so spectrally accurate).
    """
    if not 0.0 < cap_half_angle <= math.pi:
        raise ValueError(f"cap half-angle must lie in (0, pi], got {cap_half_angle}")
    u, wu = _composite_gl(0.0, cap_half_angle, panels=16)
    n_v = 1024
    v = (np.arange(n_v) + 0.5) * (TWO_PI / n_v)
    cos_t = np.cos(u)[:, None] * math.cos(axis_angle) + np.sin(u)[:, None] * math.sin(
        axis_angle
    ) * np.cos(v)[None, :]
    vals = np.asarray(density(np.arccos(np.clip(cos_t, -1.0, 1.0))))
    return float(np.sum(wu * np.sin(u) * vals.sum(axis=1)) * (TWO_PI / n_v))


def expected_cap_frequencies(density, p: float, cap_half_angle: float) -> tuple[float, float]:
    """(standard, symmetric) cap frequencies for the two decompositions at weight p.

    Both members of the symmetric pair make the same angle with +z, so its
    frequency needs a single kernel evaluation.
    """
    f_std = p * cap_frequency(density, 0.0, cap_half_angle) + (1.0 - p) * cap_frequency(
        density, math.pi, cap_half_angle
    )
    f_sym = cap_frequency(density, tilt_angle(p), cap_half_angle)
    return f_std, f_sym


def required_trials(
    density,
    p: float,
    cap_half_angle: float = DEFAULT_CAP_HALF_ANGLE,
    z_detect: float = Z_DETECTABLE,
    power: float = 0.999,
    safety: float = 1.2,
) -> int:
    """Trials per decomposition so the experiment flags a frequency gap with
    the given power at the z_detect threshold.

    Sized from the quadrature frequencies: z grows like gap * sqrt(N / (v1+v2))
    with v = f(1-f), so N = safety * ((z_detect + z_power) / gap)^2 * (v1+v2).
    """
    f_std, f_sym = expected_cap_frequencies(density, p, cap_half_angle)
    gap = abs(f_std - f_sym)
    if gap == 0.0:
        raise QGuessError("decompositions have identical cap frequencies; no finite trial count separates them")
    z_power = float(norm.ppf(power))
    variance = f_std * (1.0 - f_std) + f_sym * (1.0 - f_sym)
    return math.ceil(safety * ((z_detect + z_power) / gap) ** 2 * variance)


# ---------------------------------------------------------------------------
# discrimination experiment

@dataclass(frozen=True)
class DiscriminationReport:
    """Cap-frequency comparison between the two preparations of one mixture."""

    p: float
    cap_half_angle: float
    trials: int
    freq_standard: float
    freq_symmetric: float
    se_standard: float
    se_symmetric: float
    z: float
    verdict: str
    seed: int

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "cap_half_angle": self.cap_half_angle,
            "trials": self.trials,
            "freq_standard": self.freq_standard,
            "freq_symmetric": self.freq_symmetric,
            "se_standard": self.se_standard,
            "se_symmetric": self.se_symmetric,
            "z": self.z,
            "verdict": self.verdict,
            "seed": self.seed,
        }


def verdict_for(z: float) -> str:
    if z < Z_NOT_DETECTABLE:
        return VERDICT_NOT_DETECTABLE
    if z > Z_DETECTABLE:
        return VERDICT_DETECTABLE
    return VERDICT_INDETERMINATE


def _cap_hits(
    strategy: EstimatorStrategy,
    decomposition: EnsembleDecomposition,
    cap_cos: float,
    trials: int,
    seed: int,
    workers: int,
    block: int,
) -> int:
    cum = np.cumsum(decomposition.weights)
    dirs = decomposition.directions
    hits = 0
    for rng, m in streams.worker_batches(seed, trials, workers, block=block):
        pick = rng.random(m)
        idx = np.minimum(np.searchsorted(cum, pick, side="right"), len(dirs) - 1)
        outcomes = strategy.sample_batch(dirs[idx], rng)
        hits += int(np.count_nonzero(outcomes[:, 2] >= cap_cos))
    return hits


def run_discrimination_experiment(
    strategy: EstimatorStrategy,
    p: float,
    cap_half_angle: float = DEFAULT_CAP_HALF_ANGLE,
    trials: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    stream_block: int = 0,
) -> DiscriminationReport:
    """Prepare the same mixture both ways, estimate, and compare cap frequencies.

    Each run draws `trials` member choices and guesses per decomposition on
    its own substream (blocks 2*stream_block and 2*stream_block + 1), counts
    guesses inside the cap about +z, and scores the frequency gap as a
    two-sample z statistic with binomial standard errors.
    """
    if not 0.0 < cap_half_angle <= math.pi:
        raise ValueError(f"cap half-angle must lie in (0, pi], got {cap_half_angle}")
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    cap_cos = math.cos(cap_half_angle)
    hits_std = _cap_hits(strategy, standard_decomposition(p), cap_cos, trials, seed, workers, 2 * stream_block)
    hits_sym = _cap_hits(strategy, symmetric_decomposition(p), cap_cos, trials, seed, workers, 2 * stream_block + 1)

    f_std = hits_std / trials
    f_sym = hits_sym / trials
    se_std = math.sqrt(f_std * (1.0 - f_std) / trials)
    se_sym = math.sqrt(f_sym * (1.0 - f_sym) / trials)
    spread = math.hypot(se_std, se_sym)
    if spread == 0.0:
        z = 0.0 if f_std == f_sym else math.inf
    else:
        z = abs(f_std - f_sym) / spread
    return DiscriminationReport(
        p=p,
        cap_half_angle=cap_half_angle,
        trials=trials,
        freq_standard=f_std,
        freq_symmetric=f_sym,
        se_standard=se_std,
        se_symmetric=se_sym,
        z=z,
        verdict=verdict_for(z),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# least-squares recovery of the two-parameter form from a histogram

@dataclass(frozen=True)
class FitResult:
    """Weighted least-squares estimate of the two-parameter form.

    A and B are the densities at t = 0 and t = pi; alpha and beta the
    equivalent affine coefficients in cos t. Unlike GuessingForm, fitted A or
    B may come out slightly negative when the true value sits on the boundary.
    """

    A: float
    B: float
    se_A: float
    se_B: float
    alpha: float
    beta: float
    se_alpha: float
    se_beta: float
    chi2: float
    dof: int
    bins: int
    trials: int

    def as_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "se_A": self.se_A,
            "se_B": self.se_B,
            "alpha": self.alpha,
            "beta": self.beta,
            "se_alpha": self.se_alpha,
            "se_beta": self.se_beta,
            "chi2": self.chi2,
            "dof": self.dof,
            "bins": self.bins,
            "trials": self.trials,
        }


def _wls_line(x: np.ndarray, y: np.ndarray, variances: np.ndarray):
    w = 1.0 / variances
    s00 = float(np.sum(w))
    s01 = float(np.sum(w * x))
    s11 = float(np.sum(w * x * x))
    det = s00 * s11 - s01 * s01
    if det <= 0.0 or not math.isfinite(det):
        raise UnfittableHistogramError("degenerate abscissa spread; cannot fit a slope")
    r0 = float(np.sum(w * y))
    r1 = float(np.sum(w * x * y))
    alpha = (s11 * r0 - s01 * r1) / det
    beta = (s00 * r1 - s01 * r0) / det
    cov = np.array([[s11, -s01], [-s01, s00]]) / det
    return alpha, beta, cov


def fit_ab_least_squares(hist: DensityHistogram) -> FitResult:
    """Fit density = alpha + beta cos t to a histogram, weights from counts.

    The abscissa per bin is the solid-angle mean of cos t (midpoint of the
    edge cosines), which makes the affine model exactly unbiased. Weights are
    Poisson: a first pass uses observed counts (occupied bins only), a second
    pass reweights every bin by the expected counts of the first-pass model
    (floored at one count) so sparse bins near t = pi neither drop out nor
    dominate.
    """
    if np.count_nonzero(hist.counts) < 2:
        raise UnfittableHistogramError("need at least two occupied bins to fit the form")
    t_edges = np.cos(hist.theta_edges)
    tbar = (t_edges[:-1] + t_edges[1:]) / 2.0
    density = hist.empirical_density
    scale = hist.trials * hist.solid_angles

    live = hist.counts > 0
    var1 = hist.counts[live] / scale[live] ** 2
    alpha, beta, _ = _wls_line(tbar[live], density[live], var1)

    expected = np.maximum((alpha + beta * tbar) * scale, 1.0)
    var2 = expected / scale ** 2
    alpha, beta, cov = _wls_line(tbar, density, var2)

    fitted = alpha + beta * tbar
    chi2 = float(np.sum((density - fitted) ** 2 / var2))
    var_a = cov[0, 0] + cov[1, 1] + 2.0 * cov[0, 1]
    var_b = cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]
    return FitResult(
        A=alpha + beta,
        B=alpha - beta,
        se_A=math.sqrt(max(var_a, 0.0)),
        se_B=math.sqrt(max(var_b, 0.0)),
        alpha=alpha,
        beta=beta,
        se_alpha=math.sqrt(cov[0, 0]),
        se_beta=math.sqrt(cov[1, 1]),
        chi2=chi2,
        dof=hist.bins - 2,
        bins=hist.bins,
        trials=hist.trials,
    )

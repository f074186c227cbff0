"""Strategy samplers against their analytic densities."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chi2 as chi2_dist

from qguess.bloch import BlochVector, random_direction
from qguess.errors import InvalidFormError
from qguess.estimator import (
    ABFormStrategy,
    DensityHistogram,
    GuessingForm,
    MASSAR_POPESCU_FORM,
    MassarPopescuStrategy,
    TabulatedStrategy,
    UNIFORM_FORM,
    _ab_inverse_cdf,
    ab_bin_probabilities,
    bin_outcomes,
    cap_probability,
    collect_histogram,
    estimate_massar_popescu,
    guessing_density,
    histogram_chi2,
    histogram_csv,
    sample_from_form,
    stern_gerlach,
)
from qguess.streams import substream

TWO_PI = 2.0 * math.pi
A_GRID = np.linspace(0.0, 1.0, 11)


# ---------------------------------------------------------------------------
# the two-parameter form

def test_form_rejects_negative_parameters():
    with pytest.raises(InvalidFormError):
        GuessingForm(-0.1, 0.2)
    with pytest.raises(InvalidFormError):
        GuessingForm(0.1, -0.2)


def test_form_alpha_beta_identities():
    form = GuessingForm(0.11, 0.05)
    assert form.alpha == pytest.approx((0.11 + 0.05) / 2.0, abs=1e-15)
    assert form.beta == pytest.approx((0.11 - 0.05) / 2.0, abs=1e-15)


def test_from_a_fraction_normalization():
    for a in A_GRID:
        form = GuessingForm.from_a_fraction(a)
        assert form.is_normalized
        assert TWO_PI * (form.A + form.B) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidFormError):
        GuessingForm.from_a_fraction(1.5)
    with pytest.raises(InvalidFormError):
        GuessingForm(1.0, 1.0).require_normalized()


def test_density_endpoints_and_affine_form():
    form = GuessingForm(0.2, 0.05)
    assert guessing_density(form, 0.0) == pytest.approx(0.2, abs=1e-12)
    assert guessing_density(form, math.pi) == pytest.approx(0.05, abs=1e-12)
    t = np.linspace(0.0, math.pi, 101)
    affine = form.alpha + form.beta * np.cos(t)
    assert np.max(np.abs(guessing_density(form, t) - affine)) <= 1e-12


def test_cap_probability_closed_form_matches_quadrature():
    for form in (MASSAR_POPESCU_FORM, UNIFORM_FORM, GuessingForm(0.03, 0.21)):
        for cap in (0.2, 1.0, math.pi / 2.0, math.pi):
            ref, _ = quad(
                lambda t: guessing_density(form, t) * TWO_PI * math.sin(t), 0.0, cap,
                epsabs=1e-13, epsrel=1e-13,
            )
            assert cap_probability(form, cap) == pytest.approx(ref, abs=1e-10)


def test_cap_probability_full_sphere_is_one_for_normalized_forms():
    for a in A_GRID:
        assert cap_probability(GuessingForm.from_a_fraction(a), math.pi) == pytest.approx(
            1.0, abs=1e-12
        )
    with pytest.raises(InvalidFormError):
        cap_probability(MASSAR_POPESCU_FORM, 0.0)


def test_bin_probabilities_sum_to_one():
    edges = np.linspace(0.0, math.pi, 51)
    for a in A_GRID:
        probs = ab_bin_probabilities(GuessingForm.from_a_fraction(a), edges)
        assert probs.min() >= 0.0
        assert float(probs.sum()) == pytest.approx(1.0, abs=1e-12)


def test_inverse_cdf_round_trip():
    u = np.linspace(0.0, 1.0, 1001)
    for a in A_GRID:
        form = GuessingForm.from_a_fraction(a)
        t = _ab_inverse_cdf(form, u)
        cdf = (t + 1.0) / 2.0 + math.pi * form.beta * (t * t - 1.0)
        assert np.max(np.abs(cdf - u)) <= 1e-10
        assert t.min() >= -1.0 and t.max() <= 1.0


# ---------------------------------------------------------------------------
# elementary measurements

def test_stern_gerlach_outcomes_and_frequency():
    inp = BlochVector.normalized(0.2, 0.3, 0.9)
    axis = BlochVector.normalized(-0.5, 0.1, 0.85)
    rng = substream(8)
    hits = 0
    for _ in range(20_000):
        out = stern_gerlach(inp, axis, rng)
        assert out == axis or out == axis.antipode()
        hits += out == axis
    p = (1.0 + axis.dot(inp)) / 2.0
    se = math.sqrt(p * (1.0 - p) / 20_000)
    assert abs(hits / 20_000 - p) < 4.0 * se


def test_estimate_massar_popescu_is_reproducible():
    inp = BlochVector.normalized(0.3, -0.5, 0.8)
    out1 = estimate_massar_popescu(inp, substream(5))
    out2 = estimate_massar_popescu(inp, substream(5))
    assert out1 == out2
    # composition: one axis draw then one Born draw on the same stream
    rng = substream(5)
    axis = random_direction(rng)
    assert stern_gerlach(inp, axis, rng) == out1


def test_sample_from_form_requires_normalization():
    with pytest.raises(InvalidFormError):
        sample_from_form(GuessingForm(0.2, 0.2), BlochVector(0.0, 0.0, 1.0), substream(0))


def test_scalar_samples_match_batch_of_one():
    inp = BlochVector.normalized(0.3, -0.5, 0.8)
    row = inp.as_array()[None, :]
    for strat in (
        MassarPopescuStrategy(),
        ABFormStrategy(GuessingForm.from_a_fraction(0.7)),
        TabulatedStrategy(
            np.linspace(0.0, math.pi, 101),
            np.full(101, 1.0 / (4.0 * math.pi)),
        ),
    ):
        scalar = strat.sample(inp, substream(11)).as_array()
        batch = strat.sample_batch(row, substream(11))[0]
        assert np.allclose(scalar, batch, atol=1e-12)


# ---------------------------------------------------------------------------
# tabulated densities

def test_tabulated_validation():
    grid = np.linspace(0.0, math.pi, 11)
    with pytest.raises(InvalidFormError):
        TabulatedStrategy(grid, -np.ones(11))
    with pytest.raises(InvalidFormError):
        TabulatedStrategy(grid[1:], np.ones(10))  # does not start at 0
    with pytest.raises(InvalidFormError):
        TabulatedStrategy(grid, np.full(11, 1.0))  # integrates to 4 pi, not 1


def test_tabulated_uniform_matches_closed_form():
    grid = np.linspace(0.0, math.pi, 2001)
    tab = TabulatedStrategy(grid, np.full(2001, 1.0 / (4.0 * math.pi)))
    assert tab.sphere_integral == pytest.approx(1.0, abs=1e-9)
    edges = np.linspace(0.0, math.pi, 51)
    closed = ab_bin_probabilities(UNIFORM_FORM, edges)
    assert np.max(np.abs(tab.bin_probabilities(edges) - closed)) <= 1e-12
    assert tab.cdf(0.0) == pytest.approx(0.0, abs=1e-15)
    assert tab.cdf(math.pi) == pytest.approx(1.0, abs=1e-12)


def test_tabulated_sphere_expectation():
    grid = np.linspace(0.0, math.pi, 2001)
    tab = TabulatedStrategy(grid, np.full(2001, 1.0 / (4.0 * math.pi)))
    score = lambda t: (1.0 + np.cos(t)) / 2.0
    assert tab.sphere_expectation(score) == pytest.approx(0.5, abs=1e-9)


# ---------------------------------------------------------------------------
# histograms

def test_histogram_validation():
    edges = np.linspace(0.0, math.pi, 6)
    with pytest.raises(ValueError):
        DensityHistogram(edges, np.array([1, 2, 3]), 6)  # wrong bin count
    with pytest.raises(ValueError):
        DensityHistogram(edges, np.array([1, 2, 3, 4, 5]), 16)  # counts do not sum
    with pytest.raises(ValueError):
        DensityHistogram(edges + 0.1, np.array([1, 2, 3, 4, 5]), 15)  # wrong span


def test_histogram_solid_angles_sum_to_sphere():
    hist = DensityHistogram(np.linspace(0.0, math.pi, 51), np.zeros(50, dtype=int), 0)
    assert float(hist.solid_angles.sum()) == pytest.approx(4.0 * math.pi, abs=1e-9)


def test_bin_outcomes_places_pairs_by_angle():
    up = BlochVector(0.0, 0.0, 1.0)
    pairs = [(up, up), (up, up.antipode()), (up, BlochVector(1.0, 0.0, 0.0))]
    hist = bin_outcomes(pairs, bins=4)
    assert hist.trials == 3
    assert list(hist.counts) == [1, 0, 1, 1]
    with pytest.raises(ValueError):
        bin_outcomes([], bins=4)


def test_collect_histogram_deterministic_and_complete():
    mp = MassarPopescuStrategy()
    h1 = collect_histogram(mp, trials=30_000, bins=20, seed=9, workers=3)
    h2 = collect_histogram(mp, trials=30_000, bins=20, seed=9, workers=3)
    assert np.array_equal(h1.counts, h2.counts)
    assert int(h1.counts.sum()) == 30_000
    h3 = collect_histogram(mp, trials=30_000, bins=20, seed=9, workers=1)
    assert int(h3.counts.sum()) == 30_000  # different split, same coverage


@pytest.mark.parametrize(
    "strategy, seed",
    [
        (MassarPopescuStrategy(), 0),
        (ABFormStrategy(GuessingForm.from_a_fraction(0.0)), 3),
        (ABFormStrategy(GuessingForm.from_a_fraction(0.5)), 6),
    ],
)
def test_sampler_matches_analytic_density(strategy, seed):
    hist = collect_histogram(strategy, trials=200_000, seed=seed)
    chi2, dof = histogram_chi2(hist, strategy.bin_probabilities(hist.theta_edges))
    assert dof == 49
    assert chi2 < float(chi2_dist.ppf(0.999, dof))


def test_cos4_tabulated_sampler_matches_density():
    from qguess.nosignal import cos4_strategy

    s4 = cos4_strategy()
    hist = collect_histogram(s4, trials=200_000, seed=4)
    chi2, dof = histogram_chi2(hist, s4.bin_probabilities(hist.theta_edges))
    assert chi2 < float(chi2_dist.ppf(0.999, dof))


def test_histogram_chi2_flags_impossible_counts():
    edges = np.linspace(0.0, math.pi, 4)
    hist = DensityHistogram(edges, np.array([1, 1, 1]), 3)
    chi2, _ = histogram_chi2(hist, np.array([0.5, 0.5, 0.0]))
    assert math.isinf(chi2)


def test_histogram_csv_round_trips():
    mp = MassarPopescuStrategy()
    hist = collect_histogram(mp, trials=5_000, bins=10, seed=2)
    probs = mp.bin_probabilities(hist.theta_edges)
    text = histogram_csv(hist, probs / hist.solid_angles)
    lines = text.strip().split("\n")
    assert lines[0] == "theta_lo,theta_hi,solid_angle,count,empirical_density,analytic_density"
    assert len(lines) == 11
    for i, line in enumerate(lines[1:]):
        cells = line.split(",")
        # shortest round-trip decimals: parsing back reproduces the float exactly
        assert float(cells[0]) == hist.theta_edges[i]
        assert float(cells[2]) == hist.solid_angles[i]
        assert int(cells[3]) == hist.counts[i]
        assert float(cells[4]) == hist.empirical_density[i]

"""Tests for the closed-form on-time law and the exact dynamic-programming oracle.

Frozen expected values were computed beforehand with 30-digit mpmath
arithmetic and independent quadrature; the quadrature oracles are repeated
here at float precision via scipy.
"""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from onoffnet.activity import NodeState, OnOffParams, monte_carlo_on_times
from onoffnet.occupancy import (
    DensityCurve,
    OccupancySpec,
    closed_form_gap,
    density_curve,
    exact_occupation_distribution,
    mean_on_time,
    normalization_constant,
    on_time_cdf,
    on_time_density,
)


def spec_of(lam: float, mu: float, t: float) -> OccupancySpec:
    return OccupancySpec(OnOffParams(lam, mu), t)


# A modest rate/horizon grid exercised by the property tests below; the
# acceptance suite runs the full grid with its stated tolerances.
GRID = [
    (lam, mu, t)
    for lam in (0.0, 0.5, 3.0)
    for mu in (0.0, 0.1, 1.0)
    for t in (0.5, 10.0)
]


# --- normalization constant ---------------------------------------------


def test_constant_limit_at_equal_rates():
    assert normalization_constant(spec_of(0.0, 0.0, 4.0)) == pytest.approx(0.25, rel=1e-15)


def test_constant_frozen_values():
    assert normalization_constant(spec_of(0.5, 1.0, 2.0)) == pytest.approx(
        2.1501292676641858, rel=1e-12
    )
    assert normalization_constant(spec_of(0.0, 1.0, 1.0)) == pytest.approx(
        1.5819767068693264, rel=1e-12
    )


@pytest.mark.parametrize("lam,mu,t", GRID)
def test_constant_inverts_envelope_integral(lam, mu, t):
    # 1/C equals the integral of exp(-mu*t) * exp(x*theta) over [0, t].
    spec = spec_of(lam, mu, t)
    c = normalization_constant(spec)
    x = spec.rate_gap
    integral, _ = quad(lambda th: math.exp(-mu * t) * math.exp(x * th), 0.0, t,
                       epsabs=1e-13, epsrel=1e-13)
    assert c * integral == pytest.approx(1.0, abs=1e-9)


# --- density --------------------------------------------------------------


def test_density_uniform_limit():
    spec = spec_of(0.7, 0.7, 10.0)
    for theta in (0.0, 3.3, 10.0):
        assert on_time_density(spec, theta) == 0.1


def test_density_frozen_value():
    assert on_time_density(spec_of(0.0, 1.0, 1.0), 1.0) == pytest.approx(
        1.5819767068693264, rel=1e-12
    )


def test_density_endpoint_tends_to_one_for_unit_gap():
    # At x=1 the endpoint density x/(1 - exp(-x*t)) approaches 1 from above;
    # by t=50 the excess exp(-50) sits below float resolution.
    assert on_time_density(spec_of(0.0, 1.0, 5.0), 5.0) > 1.0
    assert on_time_density(spec_of(0.0, 1.0, 50.0), 50.0) == pytest.approx(1.0, abs=1e-3)


def test_density_rejects_theta_outside_window():
    spec = spec_of(0.2, 0.8, 2.0)
    with pytest.raises(ValueError):
        on_time_density(spec, -0.01)
    with pytest.raises(ValueError):
        on_time_density(spec, 2.01)


@pytest.mark.parametrize("lam,mu,t", GRID)
def test_density_positive_and_normalized(lam, mu, t):
    spec = spec_of(lam, mu, t)
    grid = np.linspace(0.0, t, 101)
    assert np.all(on_time_density(spec, grid) > 0.0)
    mass, _ = quad(lambda th: on_time_density(spec, th), 0.0, t, epsabs=1e-12, epsrel=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("lam,mu,t", GRID)
def test_density_rate_swap_mirrors_curve(lam, mu, t):
    spec = spec_of(lam, mu, t)
    swapped = spec_of(mu, lam, t)
    grid = np.linspace(0.0, t, 57)
    direct = on_time_density(spec, grid)
    mirrored = on_time_density(swapped, t - grid)
    assert direct == pytest.approx(mirrored, rel=1e-12)


def test_density_no_overflow_for_huge_rate_gap():
    spec = spec_of(0.0, 2000.0, 5.0)
    assert on_time_density(spec, 0.0) >= 0.0  # underflows cleanly, no exception
    assert on_time_density(spec, 5.0) == pytest.approx(2000.0, rel=1e-12)


# --- cdf -------------------------------------------------------------------


def test_cdf_endpoints():
    for lam, mu, t in GRID:
        spec = spec_of(lam, mu, t)
        assert on_time_cdf(spec, 0.0) == 0.0
        assert on_time_cdf(spec, t) == pytest.approx(1.0, rel=1e-12)


def test_cdf_frozen_value():
    assert on_time_cdf(spec_of(0.0, 1.0, 1.0), 0.5) == pytest.approx(
        0.37754066879814544, rel=1e-12
    )


def test_cdf_matches_integrated_density():
    spec = spec_of(0.0, 1.0, 1.0)
    mass, _ = quad(lambda th: on_time_density(spec, th), 0.0, 0.5, epsabs=1e-12, epsrel=1e-12)
    assert on_time_cdf(spec, 0.5) == pytest.approx(mass, abs=1e-9)


@pytest.mark.parametrize("lam,mu,t", GRID)
def test_cdf_strictly_increasing(lam, mu, t):
    spec = spec_of(lam, mu, t)
    grid = np.linspace(0.0, t, 200)
    values = on_time_cdf(spec, grid)
    assert np.all(np.diff(values) > 0.0)
    assert np.all((values >= 0.0) & (values <= 1.0))


@pytest.mark.parametrize("lam,mu,t", [(0.3, 1.2, 2.0), (2.0, 0.4, 5.0), (0.0, 1.0, 1.0)])
def test_cdf_derivative_matches_density(lam, mu, t):
    spec = spec_of(lam, mu, t)
    h = 1e-6 * t
    for theta in np.linspace(0.1 * t, 0.9 * t, 9):
        derivative = (on_time_cdf(spec, theta + h) - on_time_cdf(spec, theta - h)) / (2 * h)
        assert derivative == pytest.approx(on_time_density(spec, theta), rel=1e-5)


def test_cdf_rejects_theta_outside_window():
    with pytest.raises(ValueError):
        on_time_cdf(spec_of(0.1, 0.2, 1.0), 1.5)


# --- mean -------------------------------------------------------------------


def test_mean_uniform_case_is_half_horizon():
    assert mean_on_time(spec_of(2.0, 2.0, 10.0)) == 5.0


def test_mean_frozen_values():
    assert mean_on_time(spec_of(0.0, 1.0, 10.0)) == pytest.approx(9.000454019910097, rel=1e-12)
    assert mean_on_time(spec_of(0.0, 0.4, 1.0)) == pytest.approx(0.5332447817197364, rel=1e-12)


@pytest.mark.parametrize("lam,mu,t", GRID)
def test_mean_matches_quadrature(lam, mu, t):
    spec = spec_of(lam, mu, t)
    integral, _ = quad(lambda th: th * on_time_density(spec, th), 0.0, t,
                       epsabs=1e-13, epsrel=1e-13)
    assert mean_on_time(spec) == pytest.approx(integral, rel=1e-8)
    assert 0.0 < mean_on_time(spec) < t


def test_mean_sign_variant_diverges_at_small_gap():
    # The plus-signed variant t + 1/x + t/(exp(x*t)-1) blows up like 2/x as
    # x -> 0; the implemented minus-signed form tends to t/2 as the defining
    # integral requires.  Regression-pins the correct sign.
    t = 10.0
    for x in (1e-6, -1e-6):
        variant = t + 1.0 / x + t / math.expm1(x * t)
        assert abs(variant - t / 2.0) > 1e5
        assert mean_on_time(spec_of(0.0, x, t) if x > 0 else spec_of(-x, 0.0, t)) == pytest.approx(
            t / 2.0, abs=1e-4
        )


def test_limits_continuity_across_singularity():
    # density, cdf and mean all converge to the uniform-case values at |x|=1e-6.
    t = 10.0
    uniform = spec_of(1.0, 1.0, t)
    for x in (1e-6, -1e-6):
        spec = spec_of(1.0, 1.0 + x, t)
        assert on_time_density(spec, 3.0) == pytest.approx(on_time_density(uniform, 3.0), rel=1e-4)
        assert on_time_cdf(spec, 3.0) == pytest.approx(on_time_cdf(uniform, 3.0), rel=1e-4)
        assert mean_on_time(spec) == pytest.approx(mean_on_time(uniform), rel=1e-4)


# --- curves -----------------------------------------------------------------


def test_curve_uniform_values():
    curve = density_curve(spec_of(1.0, 1.0, 1.0), 5)
    assert np.all(curve.values == 1.0)


def test_curve_mass_is_one_when_well_resolved():
    curve = density_curve(spec_of(0.0, 1.0, 1.0), 10_001)
    assert curve.mass() == pytest.approx(1.0, abs=1e-6)


def test_curve_endpoint_ordering_in_rate_gap():
    t = 10.0
    endpoints = [
        density_curve(spec_of(0.0, x, t), 101).values[-1] for x in (0.4, 0.6, 0.8, 1.0)
    ]
    assert all(a < b for a, b in zip(endpoints, endpoints[1:]))


def test_curve_rejects_single_point():
    with pytest.raises(ValueError):
        density_curve(spec_of(0.0, 1.0, 1.0), 1)


def test_curve_csv_lines_are_parseable():
    curve = density_curve(spec_of(0.5, 1.0, 2.0), 101)
    lines = curve.csv_lines()
    assert lines[0].startswith("# lambda=0.5 mu=1.0 horizon=2.0 x=0.5")
    assert lines[1] == "theta,density"
    theta, value = lines[2].split(",")
    assert float(theta) == 0.0
    assert float(value) == curve.values[0]


def test_curve_rejects_unsorted_grid():
    spec = spec_of(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        DensityCurve(spec, np.array([0.0, 0.5, 0.5]), np.array([1.0, 1.0, 1.0]))


# --- exact occupation law ----------------------------------------------------


def test_exact_law_absorbing_on_puts_all_mass_at_horizon():
    law = exact_occupation_distribution(spec_of(0.0, 2.0, 4.0), 0.01, NodeState.ON)
    assert law.atom_full == pytest.approx(1.0, abs=1e-12)
    assert law.mean == pytest.approx(4.0, abs=1e-12)


def test_exact_law_conserves_mass():
    law = exact_occupation_distribution(spec_of(1.0, 3.0, 4.0), 4.0 / 4096, NodeState.ON)
    assert float(law.pmf.sum()) == pytest.approx(1.0, abs=1e-9)
    assert np.all(law.pmf >= 0.0)


def test_exact_law_rejects_coarse_step():
    with pytest.raises(ValueError):
        exact_occupation_distribution(spec_of(1.0, 1.0, 1.0), 0.02)


def test_exact_law_atoms_match_no_switch_probabilities():
    # Mass at T=t is the probability of never leaving ON: exp(-lam*t) up to
    # the O(step) discretisation of the first switch.
    lam, t = 1.0, 4.0
    law = exact_occupation_distribution(spec_of(lam, 3.0, t), t / 4096, NodeState.ON)
    assert law.atom_zero == 0.0  # starting ON always accrues at least one slot
    assert law.atom_full == pytest.approx(math.exp(-lam * t), rel=1e-2)
    off_law = exact_occupation_distribution(spec_of(lam, 3.0, t), t / 4096, NodeState.OFF)
    assert off_law.atom_zero == pytest.approx(math.exp(-3.0 * t), rel=1e-2)


def test_exact_law_mean_matches_monte_carlo():
    spec = spec_of(1.0, 3.0, 4.0)
    law = exact_occupation_distribution(spec, 4.0 / 4096, NodeState.ON)
    samples = monte_carlo_on_times(spec.params, NodeState.ON, 4.0, 20_000, 3)
    stderr = samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(samples.mean() - law.mean) < 3.0 * stderr


def test_exact_law_differs_from_closed_form():
    # The closed form is an envelope approximation; its gap to the true law
    # is genuinely nonzero and the initial state matters.
    spec = spec_of(0.2, 1.0, 5.0)
    law_on = exact_occupation_distribution(spec, 5.0 / 1024, NodeState.ON)
    law_off = exact_occupation_distribution(spec, 5.0 / 1024, NodeState.OFF)
    gap_on = closed_form_gap(law_on)
    gap_off = closed_form_gap(law_off)
    assert 0.0 < gap_on < 1.0
    assert 0.0 < gap_off < 1.0
    assert gap_on != pytest.approx(gap_off, rel=1e-3)


def equiprobable_edges(law, n_bins: int) -> np.ndarray:
    """Bin edges over [0, horizon] carrying ~equal mass under the exact law."""
    cum = np.cumsum(law.pmf)
    targets = np.arange(1, n_bins) / n_bins
    interior = law.on_times[np.searchsorted(cum, targets)]
    edges = np.concatenate([[0.0], interior, [law.on_times[-1]]])
    return np.unique(edges)


def test_exact_law_agrees_with_monte_carlo_in_distribution():
    spec = spec_of(1.0, 3.0, 4.0)
    law = exact_occupation_distribution(spec, 4.0 / 4096, NodeState.ON)
    samples = monte_carlo_on_times(spec.params, NodeState.ON, 4.0, 20_000, 5)
    edges = equiprobable_edges(law, 15)
    observed, _ = np.histogram(samples, bins=edges)
    expected = law.bin_masses(edges) * samples.size
    assert np.all(expected > 5.0)
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    p_value = stats.chi2.sf(chi2, len(expected) - 1)
    assert p_value > 0.001

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairks.domain import (
    Frame,
    InvalidArgument,
    Params,
    RadialDensity,
    barenblatt,
    characteristic,
    dilate,
    gaussian,
    geometric_grid,
    uniform_grid,
)
from fairks.energy import (
    DomainError,
    el_diagnostics,
    el_residual,
    entropy,
    estimate_chi_c,
    fast_diffusion_constants,
    first_variation,
    free_energy,
    hls_ratio,
    lm_norm,
)

PM = Params(1, -0.5, 0.3, Frame.RESCALED)


@pytest.fixture(scope="module")
def hls_estimate():
    return estimate_chi_c(Params(1, -0.5, 1.0))


def test_entropy_of_uniform_interval():
    rho = characteristic(1, 0.5, np.linspace(0.0, 0.5, 51))
    assert entropy(rho, Params(1, -0.5, 1.0)) == pytest.approx(2.0, rel=1e-13)


def test_log_entropy_of_uniform_interval():
    # density 1/2 on [-1, 1]: int rho log rho = log(1/2)
    rho = characteristic(1, 1.0, np.linspace(0.0, 1.0, 51))
    assert entropy(rho, Params(1, 0.0, 1.0)) == pytest.approx(math.log(0.5), rel=1e-13)


@pytest.mark.parametrize("frame", [Frame.ORIGINAL, Frame.RESCALED])
def test_breakdown_sums(frame):
    params = Params(2, -0.7, 0.4, frame)
    e = free_energy(gaussian(2, 1.0), params)
    assert e.total == pytest.approx(e.entropy + params.chi * e.interaction + e.confinement, rel=1e-14)
    assert (e.confinement > 0) == (frame is Frame.RESCALED)
    assert e.F_k == pytest.approx(e.entropy + params.chi * e.interaction, rel=1e-14)


@pytest.mark.parametrize("k, positive", [(-0.5, True), (0.5, False)])
def test_entropy_sign_follows_exponent(k, positive):
    rho = gaussian(1, 1.0)
    assert (entropy(rho, Params(1, k, 1.0)) > 0) == positive


def test_json_schema_keys():
    e = free_energy(gaussian(1, 1.0), PM)
    d = json.loads(json.dumps(e.to_json()))
    assert set(d) == {"entropy", "interaction", "confinement", "total", "kth_moment", "chi", "k", "N", "frame"}


def test_energy_converges_under_refinement():
    params = Params(1, -0.5, 0.3, Frame.RESCALED)
    ref = free_energy(gaussian(1, 1.0, uniform_grid(10.0, 6401)), params).total
    errs = [abs(free_energy(gaussian(1, 1.0, uniform_grid(10.0, n)), params).total - ref) for n in (101, 201, 401)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(rates) >= 1.9


def test_log_kernel_interaction_closed_form():
    # uniform on [-1/2, 1/2]: int int log|x - y| = -3/2
    # the potential has an (r log r)-type kink at the edge, so nodal quadrature is O(h^2 log h)
    errs = []
    for n in (101, 201, 401):
        rho = characteristic(1, 0.5, np.linspace(0.0, 0.5, n))
        errs.append(abs(free_energy(rho, Params(1, 0.0, 1.0)).interaction + 1.5))
    assert errs[-1] <= 1e-5
    assert errs[1] / errs[2] > 3.0


def test_first_variation_constant_for_barenblatt():
    rho = barenblatt(1, 1.5)
    params = Params(1, -0.5, 0.0, Frame.RESCALED)
    R = rho.support_radius()
    r = rho.nodes[rho.nodes < 0.95 * R]
    T = first_variation(rho, r, params)
    assert np.ptp(T) <= 1e-8
    # outside the support the first variation lies above its on-support value
    outside = first_variation(rho.with_values(rho.values), np.array([R * 1.0001, 1.2 * R, 2 * R]), params)
    assert np.all(outside >= T.max() - 1e-12)


def test_first_variation_undefined_at_zero_for_fast_diffusion():
    rho = characteristic(1, 0.5, np.linspace(0.0, 1.0, 101))
    with pytest.raises(DomainError):
        first_variation(rho, 0.9, Params(1, 0.5, 1.0))


def test_el_residual_barenblatt():
    rho = barenblatt(1, 1.5)
    res, R = el_residual(rho, Params(1, -0.5, 0.0, Frame.RESCALED))
    assert res <= 1e-8
    assert R == pytest.approx(rho.nodes[-2])


def test_el_constant_fit_and_closed_form_agree_for_barenblatt():
    d = el_diagnostics(barenblatt(1, 1.5), Params(1, -0.5, 0.0, Frame.RESCALED))
    assert d.constant_fit == pytest.approx(d.constant_closed_form, rel=1e-3)


def test_fast_diffusion_constants():
    A, B = fast_diffusion_constants(Params(1, 0.2, 1.2))
    assert A == pytest.approx(2 * 1.2 * 0.2 / 0.8)
    assert B == pytest.approx(0.2 / (2 * 0.8))


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("N, k", [(1, -0.5), (2, -0.8), (3, -1.0)])
def test_hls_ratio_dilation_invariant(N, k, lam):
    params = Params(N, k, 1.0)
    rho = gaussian(N, 1.0, geometric_grid(8.0, 1e-3, 1.03, 0.05))
    assert hls_ratio(dilate(rho, lam), params) == pytest.approx(hls_ratio(rho, params), rel=1e-8)


@given(c=st.floats(0.01, 100.0))
def test_hls_ratio_mass_invariant(c):
    params = Params(2, -0.6, 1.0)
    rho = gaussian(2, 1.0, np.linspace(0, 8, 161))
    scaled = rho.with_values(c * rho.values)
    assert hls_ratio(scaled, params) == pytest.approx(hls_ratio(rho, params), rel=1e-10)


def test_hls_ratio_argument_errors():
    rho = gaussian(1, 1.0)
    with pytest.raises(InvalidArgument):
        hls_ratio(rho, Params(1, 0.5, 1.0))
    with pytest.raises(InvalidArgument):
        hls_ratio(rho.with_values(np.zeros_like(rho.values)), Params(1, -0.5, 1.0))


def test_chi_c_estimate_running_maximum(hls_estimate):
    ratios = [r for _, r in hls_estimate.optimizer_trace[1:]]
    running = np.maximum.accumulate(ratios)
    assert hls_estimate.C_star_lower == pytest.approx(running[-1])
    assert hls_estimate.chi_c == pytest.approx(1.0 / hls_estimate.C_star_lower)
    assert hls_estimate.chi_c > 0
    assert hls_estimate.to_json()["implementation_derived"] is True


def lieb_constant(N, lam):
    """Sharp HLS constant for p = q = 2N/(2N - lam)."""
    g = math.gamma
    return math.pi ** (lam / 2) * g(N / 2 - lam / 2) / g(N - lam / 2) * (g(N / 2) / g(N)) ** (-1 + lam / N)


def test_chi_c_below_hls_cap(hls_estimate):
    # Holder interpolation bounds ||f||_p^2 by ||f||_1^((N+k)/N) ||f||_m^m, so the
    # ratio cannot exceed the sharp HLS constant
    cap = lieb_constant(1, 0.5)
    assert cap == pytest.approx(2.959, abs=1e-3)
    assert hls_estimate.C_star_lower <= cap


def test_zero_energy_at_critical_strength(hls_estimate):
    rho = hls_estimate.profile
    params = Params(1, -0.5, hls_estimate.chi_c, Frame.ORIGINAL)
    e = free_energy(rho, params)
    assert abs(e.total) <= 1e-10 * e.entropy


def test_log_case_critical_strength_is_one():
    assert estimate_chi_c(Params(1, 0.0, 1.0)).chi_c == pytest.approx(1.0, abs=1e-8)


def test_estimate_rejects_fast_diffusion():
    with pytest.raises(InvalidArgument):
        estimate_chi_c(Params(1, 0.5, 1.0))


@given(
    heights=st.lists(st.floats(0.05, 1.0), min_size=2, max_size=5),
    chi_frac=st.floats(0.05, 0.95),
)
def test_energy_lower_bound_below_critical(hls_estimate, heights, chi_frac):
    nodes = np.linspace(0.0, 3.0, 121)
    radii = np.linspace(0.4, 2.5, len(heights))
    vals = sum(h * (nodes <= R) for h, R in zip(heights, radii)) * np.exp(-nodes)
    rho = RadialDensity(nodes, vals, 1).normalized()
    chi = chi_frac * hls_estimate.chi_c
    params = Params(1, -0.5, chi, Frame.ORIGINAL)
    F = free_energy(rho, params).total
    bound = (1 - chi * hls_estimate.C_star_lower) / 0.5 * lm_norm(rho, params.m)
    assert F >= bound - 1e-10

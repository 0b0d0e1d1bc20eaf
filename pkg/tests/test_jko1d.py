import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

import oracles
from fairks.domain import Frame, InvalidArgument, Params, RadialDensity, characteristic, gaussian
from fairks.energy import el_residual
from fairks.jko1d import (
    InvalidState,
    NewtonSettings,
    Pseudoinverse,
    SweepPoint,
    _velocity_parts,
    chi_crossing,
    discrete_energy,
    polish_steady,
    quantiles,
    radial_profile,
    run,
    self_interaction_coefficient,
    self_similar_reconstruct,
    step_implicit,
    velocity,
    write_profile_csv,
    write_trajectory_csv,
)

KS = [-0.5, 0.0, 0.5]


def random_state(seed, M=24):
    rng = np.random.default_rng(seed)
    X = np.cumsum(rng.uniform(0.2, 1.0, M))
    return X - X.mean() + rng.uniform(-0.3, 0.3)


def energy_total(X, params, correction):
    return discrete_energy(X, params, correction).total


def test_quantiles_of_uniform_interval():
    X = quantiles(characteristic(1, 0.5), 10)
    np.testing.assert_allclose(X, (np.arange(10) + 0.5) / 10 - 0.5, atol=1e-14)


def test_quantiles_of_gaussian():
    rho = gaussian(1, 1.0, np.linspace(0.0, 9.0, 9001))
    M = 50
    w = (np.arange(M) + 0.5) / M
    np.testing.assert_allclose(quantiles(rho, M), stats.norm.ppf(w), atol=1e-6)


def test_pseudoinverse_validation():
    with pytest.raises(InvalidState):
        Pseudoinverse(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(InvalidState):
        Pseudoinverse(np.array([1.0]))
    with pytest.raises(InvalidArgument):
        Pseudoinverse.from_density(gaussian(2, 1.0), 10)


def test_dimension_and_range_checks():
    with pytest.raises(InvalidArgument):
        velocity(np.array([0.0, 1.0]), Params(2, -0.5, 1.0))


def test_pseudoinverse_cells():
    s = Pseudoinverse(np.array([-1.0, 0.0, 2.0, 3.0]))
    assert s.dw == 0.25
    np.testing.assert_allclose(s.cell_density(), [0.25, 0.125, 0.25])
    assert s.com() == 1.0


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("correction", [True, False])
def test_velocity_antisymmetric_for_symmetric_data(k, correction):
    X = random_state(1, 20)
    X = np.concatenate([-X[X > 0][::-1], X[X > 0]])
    v = velocity(X, Params(1, k, 0.7, Frame.RESCALED), correction)
    np.testing.assert_allclose(v, -v[::-1], atol=1e-12)


@pytest.mark.parametrize("k", KS)
def test_confinement_adds_minus_x(k):
    X = random_state(2)
    vo = velocity(X, Params(1, k, 0.4, Frame.ORIGINAL))
    vr = velocity(X, Params(1, k, 0.4, Frame.RESCALED))
    np.testing.assert_allclose(vr - vo, -X, atol=1e-12)


def test_two_quantiles_attract():
    X = np.array([-1.0, 1.0])
    k = -0.5
    attract = velocity(X, Params(1, k, 1.0), False) - velocity(X, Params(1, k, 0.0), False)
    # each quantile moves towards the other with speed 2 chi dw |X1 - X0|^(k-1)
    np.testing.assert_allclose(attract, [2.0 ** (k - 1), -(2.0 ** (k - 1))], rtol=1e-14)


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("correction", [True, False])
@pytest.mark.parametrize("frame", [Frame.ORIGINAL, Frame.RESCALED])
def test_velocity_is_scaled_energy_gradient(k, correction, frame):
    params = Params(1, k, 0.6, frame)
    X = random_state(3)
    M = X.size
    h = 1e-6
    grad = np.empty(M)
    for i in range(M):
        e = np.zeros(M)
        e[i] = h
        grad[i] = (energy_total(X + e, params, correction) - energy_total(X - e, params, correction)) / (2 * h)
    np.testing.assert_allclose(velocity(X, params, correction), -M * grad, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("k", KS)
@pytest.mark.parametrize("correction", [True, False])
def test_jacobian_matches_finite_differences(k, correction):
    params = Params(1, k, 0.6, Frame.RESCALED)
    X = random_state(4, 12)
    _, J = _velocity_parts(X, params, correction, True)
    h = 1e-7
    Jfd = np.empty_like(J)
    for j in range(X.size):
        e = np.zeros(X.size)
        e[j] = h
        Jfd[:, j] = (velocity(X + e, params, correction) - velocity(X - e, params, correction)) / (2 * h)
    np.testing.assert_allclose(J, Jfd, rtol=1e-6, atol=1e-6 * np.abs(J).max())


def test_self_interaction_coefficient():
    assert self_interaction_coefficient(0.0) == 0.0
    # zeta(0.5) = -1.4603545088...
    assert self_interaction_coefficient(-0.5) == pytest.approx(2 * -1.4603545088095868 / -0.5, rel=1e-12)


def test_vanishing_step_is_identity():
    X = Pseudoinverse(random_state(5), dt=1e-12)
    Y = step_implicit(X, Params(1, -0.5, 0.3, Frame.RESCALED))
    assert np.max(np.abs(Y.X - X.X)) <= 1e-10


def test_implicit_step_solves_backward_euler():
    # original frame: the centre-of-mass mode is stationary, so no exact-decay shift is applied
    params = Params(1, 0.5, 0.4, Frame.ORIGINAL)
    X = Pseudoinverse(random_state(6), dt=1e-2)
    Y = step_implicit(X, params)
    np.testing.assert_allclose(Y.X - X.X, X.dt * velocity(Y.X, params), atol=1e-9)


@given(seed=st.integers(0, 10_000), k=st.sampled_from(KS), correction=st.booleans())
def test_energy_non_increasing(seed, k, correction):
    rng = np.random.default_rng(seed)
    chi = rng.uniform(0.05, 0.3) if k < 0 else rng.uniform(0.1, 1.0)
    params = Params(1, k, chi, Frame.RESCALED if rng.random() < 0.5 else Frame.ORIGINAL)
    init = Pseudoinverse(random_state(seed, 30))
    rep = run(init, params, 0.5, 1e-3, settings=NewtonSettings(correction=correction), stop_at_steady=False)
    E = rep.totals
    assert np.all(np.diff(E) <= 1e-10)


@pytest.mark.parametrize("k", KS)
def test_centre_of_mass(k):
    init = Pseudoinverse(quantiles(characteristic(1, 0.5), 60) + 0.7)
    rep = run(init, Params(1, k, 0.2, Frame.RESCALED), 3.0, stop_at_steady=False)
    t = np.array(rep.times)
    assert np.max(np.abs(np.array(rep.com) - 0.7 * np.exp(-t))) <= 1e-6 * 0.7
    rep = run(init, Params(1, k, 0.2, Frame.ORIGINAL), 1.0, stop_at_steady=False)
    assert np.max(np.abs(np.array(rep.com) - 0.7)) <= 1e-12


def test_steady_state_detection_and_profile():
    rep = run(characteristic(1, 0.5), Params(1, -0.5, 0.0, Frame.RESCALED), 200.0, M=100)
    assert rep.converged_to_steady
    prof = rep.steady_profile
    assert prof.mass() == pytest.approx(1.0, abs=2e-2)
    assert prof.values[-1] == 0.0


def test_barenblatt_interior_converges_with_resolution():
    m = 1.5
    errs = []
    for M in (100, 400):
        rep = run(characteristic(1, 0.5), Params(1, -0.5, 0.0, Frame.RESCALED), 400.0, M=M, steady_tol=1e-9)
        assert rep.converged_to_steady
        ref = oracles.barenblatt_quantiles(m, M)
        inner = slice(M // 10, M - M // 10)
        errs.append(np.max(np.abs(rep.final.X - ref)[inner]))
    assert errs[1] < errs[0] / 2
    assert errs[1] < 1e-3


def test_supercritical_original_frame_collapses():
    rep = run(characteristic(1, 0.5), Params(1, -0.5, 0.5, Frame.ORIGINAL), 50.0, M=100)
    assert rep.blow_up
    assert not rep.converged_to_steady


def test_subcritical_rescaled_run_settles():
    rep = run(characteristic(1, 0.5), Params(1, -0.5, 0.2, Frame.RESCALED), 300.0, M=100)
    assert rep.converged_to_steady and not rep.blow_up


@pytest.mark.parametrize("k", [-0.5, 0.5])
def test_self_similar_reconstruction(k):
    params = Params(1, k, 0.3)
    u = gaussian(1, 1.0)
    assert self_similar_reconstruct(u, params, 0.0) is u
    tau = 2.5
    rho = self_similar_reconstruct(u, params, tau)
    t = math.log(1 + (2 - k) * tau) / (2 - k)
    alpha = math.exp(t)
    assert rho.mass() == pytest.approx(u.mass(), rel=1e-13)
    assert rho.second_moment() == pytest.approx(alpha**2 * u.second_moment(), rel=1e-12)


def test_polished_subcritical_profile():
    params = Params(1, -0.5, 0.2, Frame.RESCALED)
    rep = run(characteristic(1, 0.5), params, 300.0, M=200)
    pol = polish_steady(rep.steady_profile, params)
    assert pol.converged
    res, R = el_residual(pol.density, params)
    assert res <= 1e-6
    assert R < pol.density.nodes[-1]


def test_polish_rejects_fast_diffusion():
    with pytest.raises(InvalidArgument):
        polish_steady(gaussian(1, 1.0), Params(1, 0.5, 1.0, Frame.RESCALED))


def test_crossing_of_synthetic_sweep():
    k = -0.5
    e = (2 - k) / 2
    chi_c = 0.4

    def point(chi, ok=True):
        V = (2.0 * (chi_c - chi)) ** (1 / e)
        return SweepPoint(chi, ok, not ok, -V / k, V, 100.0)

    res = chi_crossing([point(0.1), point(0.2), point(0.3), point(0.5, ok=False)], k)
    assert res.crossing == pytest.approx(chi_c, rel=1e-12)
    assert res.bracket == (0.3, 0.5)
    assert chi_crossing([point(0.1)], k).crossing is None


def test_output_files(tmp_path):
    rep = run(characteristic(1, 0.5), Params(1, 0.0, 0.5, Frame.RESCALED), 0.05, M=20)
    write_trajectory_csv(tmp_path / "t.csv", rep)
    write_profile_csv(tmp_path / "p.csv", rep.final)
    t = (tmp_path / "t.csv").read_text().splitlines()
    assert t[0] == "t,F_total,U,W,V,com,min_cell,max_density"
    assert len(t) == len(rep.times) + 1
    p = (tmp_path / "p.csv").read_text().splitlines()
    assert p[0] == "x,rho" and len(p) == 20


def test_radial_profile_is_centred():
    s = Pseudoinverse(quantiles(characteristic(1, 0.5), 40) + 3.0)
    prof = radial_profile(s)
    assert isinstance(prof, RadialDensity)
    assert prof.nodes[-1] == pytest.approx(0.5 - 1 / 80)

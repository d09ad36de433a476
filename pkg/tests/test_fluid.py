import math

import numpy as np
import pytest

from edffluid.calculus import (
    Distribution,
    QuadratureSpec,
    indicator_nonpositive,
    indicator_positive,
    integrate,
    suite_by_name,
)
from edffluid.fluid import (
    det_edf_model,
    mginf_congestion,
    mginf_served,
    mginf_workload,
    nu_fluid_general,
    omega_star,
    p_fluid_det,
    q_fluid_det,
    r_bar_det,
    r_bar_det_pwl,
)


def random_valid_triples(count, seed=3):
    """(lam, mu, d) with 1/d < mu < lam."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = rng.uniform(0.4, 4.0)
        mu = 1.0 / d + rng.uniform(0.05, 2.5)
        lam = mu * rng.uniform(1.1, 3.5)
        out.append((float(lam), float(mu), float(d)))
    return out


class TestClosedForms:
    def test_canonical_fixture(self):
        assert omega_star(2, 1, 2) == pytest.approx(3.0, abs=1e-12)
        assert r_bar_det(0.5, 2, 1, 2) == pytest.approx(1.5, abs=1e-12)
        assert r_bar_det(3.0, 2, 1, 2) == pytest.approx(0.0, abs=1e-12)
        assert q_fluid_det(2.0, 2, 1, 2) == pytest.approx(3.0, abs=1e-12)
        assert q_fluid_det(10.0, 2, 1, 2) == pytest.approx(4.0, abs=1e-12)
        assert p_fluid_det(3.0, 2, 1, 2) == pytest.approx(0.0, abs=1e-12)
        assert p_fluid_det(4.0, 2, 1, 2) == pytest.approx(1.0, abs=1e-12)

    def test_frontier_starts_at_the_deadline(self):
        for lam, mu, d in random_valid_triples(10, seed=5):
            assert r_bar_det(0.0, lam, mu, d) == d

    def test_frontier_stays_at_zero(self):
        for t in (3.0, 3.5, 8.0, 100.0):
            assert r_bar_det(t, 2, 1, 2) == 0.0

    def test_frontier_hits_zero_at_first_loss_epoch(self):
        for lam, mu, d in random_valid_triples(50):
            w0 = omega_star(lam, mu, d)
            assert abs(r_bar_det(w0, lam, mu, d)) <= 1e-12

    def test_frontier_branches_agree_at_service_timescale(self):
        for lam, mu, d in random_valid_triples(50):
            rho = lam / mu
            left = d - 1.0 / mu
            right = d - ((rho - 1.0) / rho * (1.0 / mu) + 1.0 / lam)
            assert abs(left - right) <= 1e-12

    def test_omega_star_limit_as_d_shrinks(self):
        mu, lam = 1.0, 2.0
        for eps in (1e-3, 1e-6, 1e-9):
            assert omega_star(lam, mu, 1.0 / mu + eps) == pytest.approx(
                1.0 / mu, abs=3 * eps
            )

    def test_queue_continuous_loss_vanishing_at_switch(self):
        for lam, mu, d in random_valid_triples(50):
            w0 = omega_star(lam, mu, d)
            assert 1.0 + (lam - mu) * w0 == pytest.approx(lam * d, rel=1e-12)
            assert p_fluid_det(w0, lam, mu, d) == pytest.approx(0.0, abs=1e-9)

    def test_parameter_constraints_enforced(self):
        with pytest.raises(ValueError):
            omega_star(1.0, 2.0, 2.0)  # mu > lam
        with pytest.raises(ValueError):
            r_bar_det(1.0, 2.0, 0.4, 2.0)  # mu < 1/d
        with pytest.raises(ValueError):
            q_fluid_det(-1.0, 2.0, 1.0, 2.0)


class TestGeneralPairing:
    def test_t_zero_returns_initial_pairing(self):
        model = det_edf_model(2, 1, 2)
        phi = suite_by_name(["gauss[2,0.7]"])[0]
        assert nu_fluid_general(0.0, phi, model) == pytest.approx(phi(2.0), abs=0)

    def test_mass_balance(self):
        one = suite_by_name(["one"])[0]
        for lam, mu, d in random_valid_triples(6):
            model = det_edf_model(lam, mu, d)
            w0 = omega_star(lam, mu, d)
            for t in np.linspace(0.0, 2 * w0, 9).tolist():
                assert nu_fluid_general(t, one, model) == pytest.approx(
                    1.0 + (lam - mu) * t, abs=1e-8
                )

    def test_indicator_pairings_match_closed_forms(self):
        pos, nonpos = indicator_positive(), indicator_nonpositive()
        for lam, mu, d in random_valid_triples(5, seed=11):
            model = det_edf_model(lam, mu, d)
            w0 = omega_star(lam, mu, d)
            for t in np.linspace(0.0, 1.5 * w0, 11).tolist():
                assert nu_fluid_general(t, pos, model) == pytest.approx(
                    q_fluid_det(t, lam, mu, d), abs=1e-8
                )
                assert nu_fluid_general(t, nonpos, model) == pytest.approx(
                    p_fluid_det(t, lam, mu, d), abs=1e-8
                )

    def test_canonical_values(self):
        pos = indicator_positive()
        model = det_edf_model(2, 1, 2)
        for t, want in ((0.5, 1.5), (2.0, 3.0), (4.0, 4.0)):
            assert nu_fluid_general(t, pos, model) == pytest.approx(want, abs=1e-8)

    def test_callable_frontier_matches_piecewise(self):
        from dataclasses import replace

        phi = suite_by_name(["gauss[0,1]"])[0]
        pwl = det_edf_model(2, 1, 2)
        plain = replace(pwl, frontier=lambda s: r_bar_det(s, 2, 1, 2))
        for t in (0.5, 1.7, 3.2):
            assert nu_fluid_general(t, phi, plain) == pytest.approx(
                nu_fluid_general(t, phi, pwl), abs=1e-7
            )


class TestPureDelayFluid:
    def test_exponential_service_congestion_point(self):
        alpha = Distribution.exponential(1.0)
        assert mginf_congestion(math.log(2.0), 0.5, alpha) == pytest.approx(0.75, abs=1e-12)

    def test_exponential_congestion_curve(self):
        lam, mu = 0.5, 1.0
        alpha = Distribution.exponential(mu)
        rho = lam / mu
        for t in (0.0, 0.3, 1.0, 2.5, 7.0):
            want = math.exp(-mu * t) + rho * (1.0 - math.exp(-mu * t))
            assert mginf_congestion(t, lam, alpha) == pytest.approx(want, abs=1e-12)

    def test_long_run_congestion_is_rho(self):
        alpha = Distribution.exponential(2.0)
        assert mginf_congestion(50.0, 1.0, alpha) == pytest.approx(0.5, abs=1e-10)

    def test_time_zero(self):
        for alpha in (Distribution.exponential(1.0), Distribution.uniform(0.5, 2.0)):
            assert mginf_congestion(0.0, 0.7, alpha) == pytest.approx(1.0, abs=0)
            assert mginf_served(0.0, 0.7, alpha) == pytest.approx(0.0, abs=0)

    def test_deterministic_workload_example(self):
        alpha = Distribution.deterministic(1.0)
        assert mginf_workload(2.0, 1.0, alpha) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize(
        "alpha",
        [
            Distribution.deterministic(1.5),
            Distribution.exponential(0.8),
            Distribution.uniform(0.5, 2.0),
            Distribution.discrete([1.0, 2.0], [0.3, 0.7]),
        ],
        ids=["det", "exp", "unif", "disc"],
    )
    def test_everyone_is_accounted_for(self, alpha):
        lam = 0.9
        for t in (0.0, 0.4, 1.1, 2.7, 6.0):
            total = mginf_congestion(t, lam, alpha) + mginf_served(t, lam, alpha)
            assert total == pytest.approx(1.0 + lam * t, abs=1e-8)

    def test_closed_forms_match_raw_quadrature(self):
        alpha = Distribution.exponential(1.3)
        lam = 0.6
        for t in (0.5, 2.0):
            brute = alpha.survival(t) + lam * integrate(
                alpha.survival, 0.0, t, QuadratureSpec(abs_tol=1e-11)
            )
            assert mginf_congestion(t, lam, alpha) == pytest.approx(brute, abs=1e-9)


def test_frontier_pwl_equals_pointwise():
    lam, mu, d = 2.3, 1.1, 1.7
    pwl = r_bar_det_pwl(lam, mu, d)
    for t in np.linspace(0, 2 * omega_star(lam, mu, d), 40).tolist():
        assert pwl(t) == pytest.approx(r_bar_det(t, lam, mu, d), abs=1e-12)

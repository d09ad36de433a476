import math

import numpy as np
import pytest

from edffluid.calculus import (
    Distribution,
    QuadratureSpec,
    standard_test_suite,
    suite_by_name,
)
from edffluid.fluid import det_edf_model, nu_fluid_general, r_bar_det_pwl
from edffluid.measure import PointMeasure
from edffluid.transport import (
    FluidSource,
    PointMassSource,
    TransportProblem,
    ZeroSource,
    classical_crosscheck,
    ramp_weight,
    residual,
    run_transport_check,
    solution_candidate,
    solve_pairing,
    step_weight,
    transport_cases,
)


def pure_translation(location=2.0, speed=1.0):
    return TransportProblem(PointMeasure.dirac(location), ZeroSource(), speed)


class TestSolvePairing:
    def test_pure_translation_is_a_drifting_atom(self):
        prob = pure_translation()
        for phi in standard_test_suite():
            for t in (0.0, 0.5, 1.3, 2.0):
                assert solve_pairing(prob, phi, t) == pytest.approx(
                    float(phi(2.0 - t)), abs=1e-12
                )

    def test_zero_speed_keeps_initial_plus_source(self):
        src = PointMassSource(components=((0.5, ramp_weight(0.8)),))
        prob = TransportProblem(PointMeasure.dirac(1.0), src, 0.0)
        phi = suite_by_name(["gauss[0,1]"])[0]
        for t in (0.0, 1.0, 2.5):
            want = float(phi(1.0)) + 0.8 * t * float(phi(0.5))
            assert solve_pairing(prob, phi, t) == pytest.approx(want, abs=1e-12)

    def test_matches_fluid_limit_pairing(self):
        lam, mu, d = 2.0, 1.0, 2.0
        prob = TransportProblem(
            PointMeasure.dirac(d),
            FluidSource(
                removal_rate=mu,
                frontier=r_bar_det_pwl(lam, mu, d),
                arrival_rate=lam,
                mark_law=Distribution.deterministic(d),
            ),
            1.0,
        )
        model = det_edf_model(lam, mu, d)
        for phi in suite_by_name(["capped_id", "gauss[0,1]", "sigmoid[2]"]):
            for t in (0.5, 1.0, 2.0, 3.5):
                assert solve_pairing(prob, phi, t) == pytest.approx(
                    nu_fluid_general(t, phi, model), abs=1e-7
                )

    def test_linearity_in_initial_and_probe(self):
        phi, psi = suite_by_name(["gauss[0,1]", "sigmoid[2]"])
        src = PointMassSource(components=((0.0, ramp_weight(0.5)),))
        k1 = TransportProblem(PointMeasure.dirac(1.0), src, 1.0)
        k2 = TransportProblem(PointMeasure([(1.0, 2.0)]), src, 1.0)
        k2_no_src = TransportProblem(PointMeasure.dirac(1.0), ZeroSource(), 1.0)
        t = 1.2

        from edffluid.calculus import TestFunction

        combo = TestFunction(
            eval=lambda x: 2.0 * phi(x) - 3.0 * psi(x),
            deriv=lambda x: 2.0 * phi.deriv(x) - 3.0 * psi.deriv(x),
            sup_norm_bound=2 * phi.sup_norm_bound + 3 * psi.sup_norm_bound,
        )
        lhs = solve_pairing(k1, combo, t)
        rhs = 2.0 * solve_pairing(k1, phi, t) - 3.0 * solve_pairing(k1, psi, t)
        assert lhs == pytest.approx(rhs, abs=1e-9)

        # doubling the initial mass adds one extra drifting-atom pairing
        assert solve_pairing(k2, phi, t) - solve_pairing(k1, phi, t) == pytest.approx(
            solve_pairing(k2_no_src, phi, t), abs=1e-9
        )

    def test_mesh_independence(self):
        cases = transport_cases()
        coarse = QuadratureSpec(abs_tol=1e-8)
        fine = QuadratureSpec(abs_tol=1e-10, breakpoints=(0.33, 1.77))
        for case in cases.values():
            phi = suite_by_name(["gauss[2,0.7]"])[0]
            for t in (1.0, 2.5):
                a = solve_pairing(case.problem, phi, t, coarse)
                b = solve_pairing(case.problem, phi, t, fine)
                assert a == pytest.approx(b, abs=5e-8)


class TestResidual:
    def test_solution_has_tiny_residual(self):
        case = transport_cases()["pure-translation"]
        cand = solution_candidate(case.problem)
        for phi in suite_by_name(["gauss[0,1]", "capped_id"]):
            for t in (0.5, 1.0, 2.0):
                assert residual(cand, case.problem, phi, t) <= 1e-6

    def test_frozen_candidate_detected(self):
        # a candidate frozen at the initial pairing misses the drift term
        prob = pure_translation(location=0.0, speed=1.0)
        phi = suite_by_name(["gauss[2,0.7]"])[0]  # nonzero slope mass at the atom

        def frozen(t, probe):
            return prob.initial.pair(probe)

        t = 1.5
        r = residual(frozen, prob, phi, t)
        assert r == pytest.approx(t * abs(float(phi.deriv(0.0))), abs=1e-8)
        assert r > 1e-3

    def test_zero_time_always_matches(self):
        prob = pure_translation()
        phi = suite_by_name(["sigmoid[6]"])[0]
        assert residual(lambda t, p: prob.initial.pair(p), prob, phi, 0.0) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_registry_runs_clean(self):
        case = transport_cases()["point-mass-source"]
        rows, ok = run_transport_check(case, suite_by_name(["gauss[0,1]", "sigmoid[2]"]))
        assert ok and all(r[3] <= r[4] for r in rows)

    def test_probe_without_second_derivative_rejected(self):
        from edffluid.calculus import TestFunction

        bare = TestFunction(eval=lambda x: 0.0, deriv=lambda x: 0.0, sup_norm_bound=1.0)
        prob = pure_translation()
        with pytest.raises(ValueError):
            residual(solution_candidate(prob), prob, bare, 1.0)


class TestSourceTerms:
    def test_source_starts_at_zero(self):
        with pytest.raises(ValueError):
            PointMassSource(components=((0.0, lambda t: 1.0),))
        with pytest.raises(ValueError):
            step_weight(1.0, at=0.0)

    def test_fluid_source_pairing_value(self):
        src = FluidSource(
            removal_rate=1.0,
            frontier=r_bar_det_pwl(2.0, 1.0, 2.0),
            arrival_rate=2.0,
            mark_law=Distribution.deterministic(2.0),
        )
        one = suite_by_name(["one"])[0]
        # <g_t, 1> = -mu*t + lam*t
        for t in (0.5, 2.0, 3.0):
            assert src.pair(t, one) == pytest.approx(t, abs=1e-10)


class TestClassicalCrosscheck:
    def test_no_source_is_translation(self):
        h = lambda x: math.exp(-(x**2))
        for b, x, t in ((1.0, 0.3, 0.8), (-2.0, -0.5, 0.4)):
            assert classical_crosscheck(h, lambda x, s: 0.0, b, x, t) == pytest.approx(
                h(x - t * b), abs=0
            )

    def test_unit_source_accumulates_time(self):
        val = classical_crosscheck(lambda x: 0.0, lambda x, s: 1.0, 1.0, 0.7, 2.5)
        assert val == pytest.approx(2.5, abs=1e-10)

    def test_against_upwind_finite_differences(self):
        # u_t = -u_x + exp(-x^2), u(.,0) = Gaussian; CFL = 1 advects exactly
        b = 1.0
        h = lambda x: math.exp(-(x**2) / 2.0)
        f = lambda x, s: math.exp(-(x**2))
        x_lo, x_hi = -8.0, 8.0
        dx = 5e-4
        xs = np.arange(x_lo, x_hi + dx / 2, dx)
        dt = dx / b
        steps = int(round(1.0 / dt))
        u = np.exp(-(xs**2) / 2.0)
        src = np.exp(-(xs**2))
        for _ in range(steps):
            u[1:] = u[:-1]
            u[0] = 0.0
            u += dt * src
        i0 = int(round((0.0 - x_lo) / dx))
        want = classical_crosscheck(h, f, b, 0.0, 1.0)
        assert want == pytest.approx(float(u[i0]), abs=1e-3)

    def test_measure_solution_matches_smooth_density_solution(self):
        # discretize a smooth initial density and a time-constant source
        # density into point masses; pairing a narrow probe against the
        # measure solution approximates the classical solution at speed -b.
        b = 1.0
        h = lambda x: np.exp(-((np.asarray(x) - 0.5) ** 2))
        f_density = lambda x: 0.7 * np.exp(-(np.asarray(x) ** 2))
        dx = 0.02
        xs = np.arange(-6.0, 6.0 + dx / 2, dx)
        initial = PointMeasure(
            [(float(x), float(h(x)) * dx) for x in xs if float(h(x)) * dx > 1e-14]
        )
        comps = tuple(
            (float(x), ramp_weight(float(f_density(x)) * dx))
            for x in xs
            if float(f_density(x)) * dx > 1e-14
        )
        prob = TransportProblem(initial, PointMassSource(components=comps), b)

        eps = 0.05
        x0, t = 0.2, 0.8
        norm = 1.0 / (eps * math.sqrt(2 * math.pi))

        from edffluid.calculus import TestFunction

        probe = TestFunction(
            eval=lambda x: norm * np.exp(-((np.asarray(x) - x0) ** 2) / (2 * eps**2)),
            deriv=lambda x: -norm
            * (np.asarray(x) - x0)
            / eps**2
            * np.exp(-((np.asarray(x) - x0) ** 2) / (2 * eps**2)),
            sup_norm_bound=norm * (1 + 1 / eps),
        )
        got = solve_pairing(prob, probe, t, QuadratureSpec(abs_tol=1e-8))
        want = classical_crosscheck(
            lambda x: float(h(x)), lambda x, s: float(f_density(x)), -b, x0, t
        )
        assert got == pytest.approx(want, abs=5e-3)


def test_unknown_case_listing():
    assert set(transport_cases()) == {
        "pure-translation",
        "point-mass-source",
        "fluid-edf-source",
    }

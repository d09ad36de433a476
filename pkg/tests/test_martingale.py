"""Compensated-pairing (martingale) and bracket path checks.

The sign convention is pinned by the deterministic case: with no arrivals and
no services the path must vanish identically, because pure translation is
exactly offset by the drift-integral term.
"""

import numpy as np
import pytest

from edffluid.calculus import Distribution, standard_test_suite, suite_by_name
from edffluid.simulator import SimConfig, bracket_path, martingale_path, run, run_scripted

DET2 = Distribution.deterministic(2.0)


class TestDeterministicContracts:
    def test_pure_translation_vanishes_identically(self):
        c = SimConfig(lam=0.0, mu=0.0, patience=DET2, horizon=5.0, initial_credits=(2.0,))
        traj = run(c)
        for phi in standard_test_suite():
            path = martingale_path(traj, phi, 0.0, 0.0, DET2)
            assert max(abs(path.eval(t)) for t in (0.0, 0.7, 2.0, 3.5, 5.0)) < 1e-12

    def test_starts_at_zero(self):
        c = SimConfig(lam=1.0, mu=1.0, patience=DET2, horizon=2.0, seed=5, initial_credits=(3.0,))
        traj = run(c)
        phi = suite_by_name(["gauss[0,1]"])[0]
        assert martingale_path(traj, phi, 1.0, 1.0, DET2).eval(0.0) == pytest.approx(0.0, abs=1e-14)

    def test_hand_computed_service_compensation(self):
        # initial credits (2, 5); the credit-2 customer is served over [0, 1];
        # the other waits with credit 5 - s until picked at t=1.
        c = SimConfig(lam=0.0, mu=1.0, patience=DET2, horizon=3.0, initial_credits=(2.0, 5.0))
        traj = run_scripted(c, [], [1.0, 10.0])
        cap = suite_by_name(["capped_id"])[0]
        path = martingale_path(traj, cap, 0.0, 1.0, DET2)
        # on [0,1): M(t) = int_0^t (5 - s) ds = 5t - t^2/2
        assert path.eval(0.5) == pytest.approx(2.375, abs=1e-9)
        # after the pick at 1: M(t) = -phi(5) + (phi(5)-phi(4)) + 4.5
        assert path.eval(2.0) == pytest.approx(0.5, abs=1e-9)

    def test_bracket_zero_without_events(self):
        c = SimConfig(lam=0.0, mu=0.0, patience=DET2, horizon=4.0, initial_credits=(1.5,))
        traj = run(c)
        phi = suite_by_name(["sigmoid[2]"])[0]
        br = bracket_path(traj, phi, 0.0, 0.0, DET2)
        assert all(br.eval(t) == 0.0 for t in (0.0, 1.0, 4.0))

    def test_bracket_arrivals_only(self):
        # lam=2, mu=0, deterministic marks at 2 with phi(2)=1 -> bracket 2t
        phi = suite_by_name(["gauss[2,0.7]"])[0]
        c = SimConfig(lam=2.0, mu=0.0, patience=DET2, horizon=2.0, seed=42)
        traj = run(c)
        br = bracket_path(traj, phi, 2.0, 0.0, DET2)
        assert br.eval(1.0) == pytest.approx(2.0, abs=1e-12)
        assert br.eval(2.0) == pytest.approx(4.0, abs=1e-12)


@pytest.fixture(scope="module")
def ensemble():
    reps = 300
    credits = tuple(float(c) for c in range(3, 15))
    suite = standard_test_suite()
    ts = (0.5, 1.0, 2.0)
    M = {tf.name: {t: np.empty(reps) for t in ts} for tf in suite}
    B = {tf.name: {t: np.empty(reps) for t in ts} for tf in suite}
    for rep in range(reps):
        c = SimConfig(
            lam=1.0, mu=1.0, patience=DET2, horizon=2.0,
            initial_credits=credits, seed=9_000_000 + rep,
        )
        traj = run(c)
        for tf in suite:
            mp = martingale_path(traj, tf, 1.0, 1.0, DET2)
            bp = bracket_path(traj, tf, 1.0, 1.0, DET2)
            for t in ts:
                M[tf.name][t][rep] = mp.eval(t)
                B[tf.name][t][rep] = bp.eval(t)
    return M, B, reps


class TestStatisticalSmoke:
    """Small-ensemble versions of the acceptance statistics (loose gates)."""

    def test_zero_mean_within_five_sigma(self, ensemble):
        M, _, reps = ensemble
        for name, per_t in M.items():
            for t, vals in per_t.items():
                se = vals.std(ddof=1) / np.sqrt(reps)
                assert abs(vals.mean()) <= 5.0 * se, (name, t)

    def test_variance_tracks_bracket(self, ensemble):
        M, B, _ = ensemble
        for name in M:
            for t in M[name]:
                ratio = M[name][t].var(ddof=1) / B[name][t].mean()
                assert 0.6 <= ratio <= 1.4, (name, t, ratio)

"""Distribution-level oracles for the simulator.

These pin the engine against independently known laws rather than structural
invariants: the exact transient Poisson law of the infinite-server system,
the arrival-order (FIFO) service property under deterministic deadlines, and
a moment comparison with a from-scratch minimal single-server simulator.
"""

import math

import numpy as np
import pytest

from edffluid.calculus import Distribution
from edffluid.simulator import SimConfig, observables, run


class TestInfiniteServerTransientLaw:
    def test_number_in_service_is_poisson(self):
        # pure delay, exponential durations, empty start: the number in
        # service at t is Poisson with mean rho*(1 - exp(-mu t))
        lam, mu, t = 2.0, 1.0, 1.5
        mean_want = lam / mu * (1.0 - math.exp(-mu * t))
        reps = 3000
        counts = np.empty(reps)
        for rep in range(reps):
            cfg = SimConfig(
                lam=lam,
                mu=0.0,
                patience=Distribution.exponential(mu),
                horizon=2.0,
                seed=500_000 + rep,
                mode="pure_delay",
            )
            counts[rep] = observables(run(cfg)).q_at(t)
        se = counts.std(ddof=1) / math.sqrt(reps)
        assert abs(counts.mean() - mean_want) <= 4 * se
        # Poisson: variance equals the mean
        assert counts.var(ddof=1) == pytest.approx(mean_want, rel=0.15)


class TestDeterministicDeadlinesAreFifo:
    def test_service_order_is_arrival_order(self):
        # equal patience makes deadline order equal arrival order, so the
        # earliest-deadline pick must serve in FIFO order
        cfg = SimConfig(
            lam=2.0,
            mu=1.0,
            patience=Distribution.deterministic(3.0),
            horizon=200.0,
            seed=31415,
        )
        traj = run(cfg)
        started = [cid for _, kind, cid in traj.events if kind == "service_start"]
        assert started == sorted(started)
        assert len(started) > 100


def minimal_mm1_in_system(lam: float, mu: float, t: float, seed: int) -> int:
    """Independent queue-length-only M/M/1 (no EDF machinery, no profile)."""
    rng = np.random.default_rng(seed)
    clock = 0.0
    x = 0
    next_arr = rng.exponential(1.0 / lam)
    next_dep = math.inf
    while True:
        nxt = min(next_arr, next_dep)
        if nxt > t:
            return x
        clock = nxt
        if next_dep <= next_arr:
            x -= 1
            next_dep = clock + rng.exponential(1.0 / mu) if x > 0 else math.inf
        else:
            x += 1
            if x == 1:
                next_dep = clock + rng.exponential(1.0 / mu)
            next_arr = clock + rng.exponential(1.0 / lam)


class TestAgainstMinimalMm1:
    def test_in_system_moments_match(self):
        # patience far beyond the horizon: nobody reneges and the EDF queue
        # is exactly an M/M/1 in the number-in-system process
        lam, mu, t = 0.8, 1.0, 4.0
        reps = 3000
        ours = np.empty(reps)
        theirs = np.empty(reps)
        for rep in range(reps):
            cfg = SimConfig(
                lam=lam,
                mu=mu,
                patience=Distribution.deterministic(1000.0),
                horizon=5.0,
                seed=700_000 + rep,
            )
            ours[rep] = observables(run(cfg)).x_at(t)
            theirs[rep] = minimal_mm1_in_system(lam, mu, t, 900_000 + rep)
        se = math.sqrt(ours.var(ddof=1) / reps + theirs.var(ddof=1) / reps)
        assert abs(ours.mean() - theirs.mean()) <= 4 * se
        p_empty_gap = abs((ours == 0).mean() - (theirs == 0).mean())
        assert p_empty_gap <= 4 * math.sqrt(0.25 / reps) + 1e-12

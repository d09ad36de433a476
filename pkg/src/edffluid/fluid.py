"""Closed-form and quadrature evaluation of the fluid (law-of-large-numbers)
limits of the heavily loaded EDF queue and of the pure-delay infinite-server
system.

The deterministic-deadline case has everything in closed form: the deadline
frontier ``r_bar_det``, the first-loss epoch ``omega_star`` and the limiting
queue-length / loss curves.  ``nu_fluid_general`` evaluates the limiting
measure paired with an arbitrary bounded function, which is what the closed
forms are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import (
    DEFAULT_QUADRATURE,
    Distribution,
    PiecewiseLinear,
    QuadratureSpec,
    ShiftedEval,
    integrate,
)
from .measure import PointMeasure

__all__ = [
    "FluidModel",
    "det_edf_model",
    "r_bar_det",
    "r_bar_det_pwl",
    "omega_star",
    "q_fluid_det",
    "p_fluid_det",
    "nu_fluid_general",
    "mginf_congestion",
    "mginf_workload",
    "mginf_served",
]


def _check_det_params(lam: float, mu: float, d: float) -> float:
    """Validate 1/d < mu < lam and return rho = lam/mu."""
    if not (d > 0 and mu > 0 and lam > 0):
        raise ValueError("deterministic case needs lam, mu, d > 0")
    if not (1.0 / d < mu < lam):
        raise ValueError(
            f"deterministic case needs 1/d < mu < lam, got d={d}, mu={mu}, lam={lam}"
        )
    return lam / mu


def omega_star(lam: float, mu: float, d: float) -> float:
    """Epoch at which the fluid system starts losing customers.

    Equals (rho*d - 1/mu) / (rho - 1) with rho = lam/mu; finite and > d under
    the heavy-load parameter constraints.
    """
    rho = _check_det_params(lam, mu, d)
    return (rho * d - 1.0 / mu) / (rho - 1.0)


def r_bar_det(t: float, lam: float, mu: float, d: float) -> float:
    """Deadline frontier of the deterministic-deadline fluid limit.

    Decays from d at unit speed until 1/mu, then at the slower rate
    (rho-1)/rho, reaching zero exactly at ``omega_star`` and staying there.
    """
    rho = _check_det_params(lam, mu, d)
    if t < 0:
        raise ValueError("frontier defined for t >= 0")
    if t <= 1.0 / mu:
        val = d - t
    else:
        val = d - ((rho - 1.0) / rho * t + 1.0 / lam)
    return max(val, 0.0)


def r_bar_det_pwl(lam: float, mu: float, d: float) -> PiecewiseLinear:
    """The frontier as an explicit piecewise-linear function."""
    rho = _check_det_params(lam, mu, d)
    w0 = omega_star(lam, mu, d)
    return PiecewiseLinear(
        knots=(0.0, 1.0 / mu, w0),
        values=(d, d - 1.0 / mu, 0.0),
        right_slope=0.0,
    )


def q_fluid_det(t: float, lam: float, mu: float, d: float) -> float:
    """Fluid number-in-buffer curve: 1 + (lam-mu)t up to the first-loss
    epoch, the constant lam*d afterwards (both branches agree there)."""
    w0 = omega_star(lam, mu, d)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t <= w0:
        return 1.0 + (lam - mu) * t
    return float(lam * d)


def p_fluid_det(t: float, lam: float, mu: float, d: float) -> float:
    """Fluid cumulative-loss curve: zero before the first-loss epoch, then
    1 + lam*(t - d) - mu*t."""
    w0 = omega_star(lam, mu, d)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t < w0:
        return 0.0
    return 1.0 + lam * (t - d) - mu * t


@dataclass(frozen=True)
class FluidModel:
    """Parameter pack of a fluid limit: rates, initial profile, limiting
    patience law and the deadline frontier.

    ``frontier`` maps t to the credit of the customer the server is about to
    pick.  A :class:`PiecewiseLinear` frontier gets exact breakpoint handling
    in pairings; any other callable is integrated with whatever smoothness it
    has.  Only the deterministic-deadline frontier ships validated.
    """

    lam: float
    mu: float
    initial: PointMeasure
    patience_limit: Distribution
    frontier: Callable[[float], float]

    @property
    def rho(self) -> float:
        if self.mu == 0:
            raise ZeroDivisionError("rho undefined for mu = 0 (pure delay)")
        return self.lam / self.mu


def det_edf_model(lam: float, mu: float, d: float) -> FluidModel:
    """Fluid model of the deterministic-deadline EDF queue: unit mass at d,
    patience d, closed-form frontier."""
    _check_det_params(lam, mu, d)
    return FluidModel(
        lam=lam,
        mu=mu,
        initial=PointMeasure.dirac(d),
        patience_limit=Distribution.deterministic(d),
        frontier=r_bar_det_pwl(lam, mu, d),
    )


def nu_fluid_general(
    t: float,
    f,
    model: FluidModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Pairing of the limiting profile measure at time t against ``f``.

    Three terms: the translated initial profile, removal of mass at the
    frontier at rate mu, and the arrival influx at rate lam with the limiting
    patience law.  Quadrature panels are split exactly where the (affine in s)
    arguments cross breakpoints of ``f``, so indicator pairings carry no
    smoothing bias.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    initial_term = model.initial.pair(lambda x: f(x - t))
    if t == 0.0:
        return float(initial_term)

    f_breaks = tuple(getattr(f, "breakpoints", ()))

    # mass removed at the frontier: integrand s -> f(r(s) + s - t)
    frontier = model.frontier
    cuts: list[float] = []
    if isinstance(frontier, PiecewiseLinear):
        shifted = PiecewiseLinear(
            knots=frontier.knots,
            values=tuple(v + k for v, k in zip(frontier.values, frontier.knots)),
            right_slope=frontier.right_slope + 1.0,
        )
        cuts.extend(shifted.kinks(0.0, t))
        for bp in f_breaks:
            cuts.extend(shifted.crossing_times(bp + t, 0.0, t))

        def mu_integrand(s: float) -> float:
            return float(f(shifted(s) - t))

    else:

        def mu_integrand(s: float) -> float:
            return float(f(frontier(s) + s - t))

    mu_term = (
        model.mu * integrate(mu_integrand, 0.0, t, spec.with_breakpoints(cuts))
        if model.mu != 0.0
        else 0.0
    )

    # arrival influx: integrand s -> E[f(D - (t - s))]
    law = model.patience_limit
    lam_cuts = [bp + t - edge for bp in f_breaks for edge in law.jump_points]
    lam_cuts = [s for s in lam_cuts if 0.0 < s < t]
    if law.kind == "deterministic":
        d0 = law.mean

        def lam_integrand(s: float) -> float:
            return float(f(d0 - t + s))

    else:

        def lam_integrand(s: float) -> float:
            shift = t - s
            return law.expect(ShiftedEval(f, shift), abs_tol=min(spec.abs_tol, 1e-9))

    lam_term = model.lam * integrate(lam_integrand, 0.0, t, spec.with_breakpoints(lam_cuts))
    return float(initial_term - mu_term + lam_term)


# ---------------------------------------------------------------------------
# pure-delay infinite-server limits


def _survival_integral(alpha: Distribution, t: float, spec: QuadratureSpec) -> float:
    """Integral of P(alpha > s) ds over [0, t]."""
    if alpha.kind == "deterministic":
        return min(t, alpha.params[0])
    if alpha.kind == "exponential":
        rate = alpha.params[0]
        return (1.0 - math.exp(-rate * t)) / rate
    return integrate(alpha.survival, 0.0, t, spec.with_breakpoints(alpha.jump_points))


def mginf_congestion(
    t: float, lam: float, alpha: Distribution, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Fluid number-in-service of the pure-delay system:
    P(alpha > t) + lam * int_0^t P(alpha > s) ds.

    For exponential alpha this is exp(-mu t) + rho (1 - exp(-mu t)), which
    tends to rho = lam/mu as t grows.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    return alpha.survival(t) + lam * _survival_integral(alpha, t, spec)


def mginf_workload(
    t: float, lam: float, alpha: Distribution, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Fluid residual-work curve: E[(alpha-t)^+] + lam * int_0^t E[(alpha-s)^+] ds."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if alpha.kind == "deterministic":
        d = alpha.params[0]
        m = min(t, d)
        tail_int = d * m - 0.5 * m * m
    elif alpha.kind == "exponential":
        rate = alpha.params[0]
        tail_int = (1.0 - math.exp(-rate * t)) / rate**2
    else:
        tail_int = integrate(
            alpha.mean_excess, 0.0, t, spec.with_breakpoints(alpha.jump_points)
        )
    return alpha.mean_excess(t) + lam * tail_int


def mginf_served(
    t: float, lam: float, alpha: Distribution, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Fluid count of departures: P(alpha <= t) + lam * int_0^t P(alpha <= s) ds.

    Together with :func:`mginf_congestion` it accounts for every customer:
    congestion(t) + served(t) = 1 + lam*t.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if alpha.kind == "deterministic":
        cdf_int = max(t - alpha.params[0], 0.0)
    elif alpha.kind == "exponential":
        rate = alpha.params[0]
        cdf_int = t - (1.0 - math.exp(-rate * t)) / rate
    else:
        cdf_int = integrate(alpha.cdf, 0.0, t, spec.with_breakpoints(alpha.jump_points))
    return alpha.cdf(t) + lam * cdf_int


def fluid_curves_det(
    ts: np.ndarray, lam: float, mu: float, d: float
) -> dict[str, np.ndarray]:
    """Closed-form reference curves sampled on a grid (columns of fluid.csv)."""
    ts = np.asarray(ts, dtype=np.float64)
    return {
        "t": ts,
        "Q_fluid": np.array([q_fluid_det(t, lam, mu, d) for t in ts]),
        "P_fluid": np.array([p_fluid_det(t, lam, mu, d) for t in ts]),
        "r_bar": np.array([r_bar_det(t, lam, mu, d) for t in ts]),
    }


def fluid_curves_mginf(
    ts: np.ndarray, lam: float, alpha: Distribution
) -> dict[str, np.ndarray]:
    ts = np.asarray(ts, dtype=np.float64)
    return {
        "t": ts,
        "congestion": np.array([mginf_congestion(t, lam, alpha) for t in ts]),
        "workload": np.array([mginf_workload(t, lam, alpha) for t in ts]),
        "served": np.array([mginf_served(t, lam, alpha) for t in ts]),
    }

"""Test functions, probability laws and quadrature shared across the package.

Everything here is a pure value: test functions carry their exact derivative,
distributions carry closed-form expectations where they exist, and the
integrator is a breakpoint-aware adaptive Simpson rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "TestFunction",
    "RcllFunction",
    "QuadratureSpec",
    "QuadratureError",
    "Distribution",
    "PiecewiseLinear",
    "integrate",
    "standard_test_suite",
    "suite_by_name",
    "indicator_positive",
    "indicator_nonpositive",
    "ShiftedEval",
]


class QuadratureError(RuntimeError):
    """Adaptive subdivision hit its depth limit: pathological integrand."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and split points handed to :func:`integrate`."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    breakpoints: tuple[float, ...] = ()
    max_depth: int = 50

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")

    def with_breakpoints(self, pts: Sequence[float]) -> "QuadratureSpec":
        return replace(self, breakpoints=tuple(self.breakpoints) + tuple(pts))


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class TestFunction:
    """Bounded C^1 function with its exact derivative.

    ``sup_norm_bound`` bounds sup |f| + sup |f'|.  ``second_deriv`` is optional
    and only needed where a pairing formula is applied to the derivative
    itself (the transport residual check).  ``breakpoints`` flag locations
    where higher derivatives jump, so quadrature can split there.
    """

    eval: Callable[[np.ndarray | float], np.ndarray | float]
    deriv: Callable[[np.ndarray | float], np.ndarray | float]
    sup_norm_bound: float
    name: str = ""
    second_deriv: Callable | None = None
    deriv_sup_norm_bound: float | None = None
    breakpoints: tuple[float, ...] = ()

    def __call__(self, x):
        return self.eval(x)

    def derivative(self) -> "TestFunction":
        """The derivative as a test function in its own right (needs f'')."""
        if self.second_deriv is None:
            raise ValueError(f"test function {self.name!r} carries no second derivative")
        bound = self.deriv_sup_norm_bound
        if bound is None:
            raise ValueError(f"test function {self.name!r} carries no derivative sup bound")
        return TestFunction(
            eval=self.deriv,
            deriv=self.second_deriv,
            sup_norm_bound=bound,
            name=f"{self.name}'",
            breakpoints=self.breakpoints,
        )

    def shifted(self, y: float) -> "TestFunction":
        """x -> f(x - y), with derivative and breakpoints shifted alike."""
        if y == 0.0:
            return self
        f, d, d2 = self.eval, self.deriv, self.second_deriv
        return TestFunction(
            eval=lambda x: f(x - y),
            deriv=lambda x: d(x - y),
            sup_norm_bound=self.sup_norm_bound,
            name=f"{self.name}<<{y:g}",
            second_deriv=(lambda x: d2(x - y)) if d2 is not None else None,
            deriv_sup_norm_bound=self.deriv_sup_norm_bound,
            breakpoints=tuple(b + y for b in self.breakpoints),
        )

    def squared(self) -> "TestFunction":
        f, d = self.eval, self.deriv
        return TestFunction(
            eval=lambda x: f(x) ** 2,
            deriv=lambda x: 2.0 * f(x) * d(x),
            sup_norm_bound=self.sup_norm_bound**2 + 2 * self.sup_norm_bound**2,
            name=f"{self.name}^2",
            breakpoints=self.breakpoints,
        )


@dataclass(frozen=True)
class RcllFunction:
    """Bounded right-continuous function with a finite list of jump points.

    The breakpoints drive exact quadrature splitting; the pointwise value at
    a jump follows the convention of whoever built the function (the two
    canonical indicators put an atom at 0 on the nonpositive side).
    """

    eval: Callable[[np.ndarray | float], np.ndarray | float]
    breakpoints: tuple[float, ...] = ()
    bound: float = 1.0
    name: str = ""

    def __call__(self, x):
        return self.eval(x)

    def shifted(self, y: float) -> "RcllFunction":
        if y == 0.0:
            return self
        f = self.eval
        return RcllFunction(
            eval=lambda x: f(x - y),
            breakpoints=tuple(b + y for b in self.breakpoints),
            bound=self.bound,
            name=f"{self.name}<<{y:g}",
        )


class ShiftedEval:
    """``x -> f(x - shift)`` carrying the bound and shifted breakpoints that
    :meth:`Distribution.expect` needs."""

    __slots__ = ("_f", "_shift", "bound", "breakpoints")

    def __init__(self, f, shift: float):
        self._f = f
        self._shift = shift
        self.bound = getattr(f, "sup_norm_bound", None) or getattr(f, "bound", None)
        self.breakpoints = tuple(b + shift for b in getattr(f, "breakpoints", ()))

    def __call__(self, x):
        return self._f(x - self._shift)


def indicator_positive() -> RcllFunction:
    """Indicator of (0, inf); 0 at the origin (expired-at-zero convention)."""
    return RcllFunction(
        eval=lambda x: np.where(np.asarray(x) > 0.0, 1.0, 0.0),
        breakpoints=(0.0,),
        bound=1.0,
        name="ind_pos",
    )


def indicator_nonpositive() -> RcllFunction:
    """Indicator of (-inf, 0]; 1 at the origin."""
    return RcllFunction(
        eval=lambda x: np.where(np.asarray(x) <= 0.0, 1.0, 0.0),
        breakpoints=(0.0,),
        bound=1.0,
        name="ind_nonpos",
    )


# ---------------------------------------------------------------------------
# quadrature


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, b, fa, fm, fb, whole, tol, floor, depth, max_depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = (left + right - whole) / 15.0
    # `floor` keeps the demanded accuracy above floating-point / nested-
    # quadrature noise; without it the recursion stalls at machine scale.
    if abs(err) <= tol or abs(err) <= floor:
        return left + right + err
    if depth >= max_depth:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a}, {b}] after depth {max_depth}"
        )
    half = 0.5 * tol
    return _adaptive(
        f, a, m, fa, flm, fm, left, half, floor, depth + 1, max_depth
    ) + _adaptive(f, m, b, fm, frm, fb, right, half, floor, depth + 1, max_depth)


def _integrate_panel(f, a: float, b: float, tol: float, max_depth: int) -> float:
    if b <= a:
        return 0.0
    # Endpoint samples are nudged inward so a declared jump sitting exactly on
    # a panel edge is integrated by its one-sided (interior) value.
    eps = (b - a) * 1e-12
    fa = float(f(a + eps))
    fb = float(f(b - eps))
    m = 0.5 * (a + b)
    fm = float(f(m))
    whole = _simpson(fa, fm, fb, b - a)
    floor = 1e-14 * (1.0 + abs(whole))
    return _adaptive(f, a, b, fa, fm, fb, whole, tol, floor, 0, max_depth)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Breakpoint-aware adaptive Simpson integral of ``f`` over [a, b].

    The interval is split at every declared breakpoint and each panel is
    integrated adaptively to ``spec.abs_tol`` (shared proportionally to panel
    width).  Raises :class:`QuadratureError` after ``spec.max_depth`` levels.
    """
    if a > b:
        raise ValueError(f"integrate requires a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    cuts = sorted({float(p) for p in spec.breakpoints if a < p < b})
    edges = [a, *cuts, b]
    total = 0.0
    span = b - a
    for lo, hi in zip(edges[:-1], edges[1:]):
        tol = max(spec.abs_tol * (hi - lo) / span, 1e-300)
        total += _integrate_panel(f, lo, hi, tol, spec.max_depth)
    return total


# ---------------------------------------------------------------------------
# piecewise-linear functions (frontiers)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [knots[0], inf).

    Beyond the last knot the function continues with ``right_slope``.  Used
    for deadline frontiers, whose pieces make pairing integrals exact.
    """

    knots: tuple[float, ...]
    values: tuple[float, ...]
    right_slope: float = 0.0

    def __post_init__(self):
        if len(self.knots) != len(self.values) or len(self.knots) < 1:
            raise ValueError("knots and values must be equal-length, nonempty")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ValueError("knots must be strictly increasing")

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        out = np.interp(t_arr, self.knots, self.values)
        beyond = t_arr > self.knots[-1]
        if np.any(beyond):
            out = np.where(
                beyond, self.values[-1] + self.right_slope * (t_arr - self.knots[-1]), out
            )
        if np.isscalar(t) or t_arr.ndim == 0:
            return float(out)
        return out

    def pieces(self, lo: float, hi: float) -> list[tuple[float, float, float, float]]:
        """Linear pieces (u0, u1, a, b) with value a + b*u covering [lo, hi]."""
        if hi <= lo:
            return []
        out = []
        ks = self.knots
        vs = self.values
        segs = []
        if lo < ks[0]:
            raise ValueError(f"{lo} precedes the first knot {ks[0]}")
        for i in range(len(ks) - 1):
            slope = (vs[i + 1] - vs[i]) / (ks[i + 1] - ks[i])
            segs.append((ks[i], ks[i + 1], vs[i] - slope * ks[i], slope))
        segs.append((ks[-1], math.inf, vs[-1] - self.right_slope * ks[-1], self.right_slope))
        for u0, u1, a, b in segs:
            s0 = max(lo, u0)
            s1 = min(hi, u1)
            if s1 > s0:
                out.append((s0, s1, a, b))
        return out

    def kinks(self, lo: float, hi: float) -> list[float]:
        return [k for k in self.knots if lo < k < hi]

    def crossing_times(self, level: float, lo: float, hi: float) -> list[float]:
        """Solutions of self(u) = level inside (lo, hi), one per linear piece."""
        roots = []
        for u0, u1, a, b in self.pieces(lo, hi):
            if b != 0.0:
                u = (level - a) / b
                if u0 < u < u1:
                    roots.append(u)
        return roots

    def integral_of_deriv_composed(self, phi: TestFunction, shift: float, lo: float, hi: float) -> float:
        """Exact value of the integral of phi'(self(u) - shift) du over [lo, hi]."""
        total = 0.0
        for u0, u1, a, b in self.pieces(lo, hi):
            if b != 0.0:
                total += (phi.eval(a + b * u1 - shift) - phi.eval(a + b * u0 - shift)) / b
            else:
                total += (u1 - u0) * phi.deriv(a - shift)
        return float(total)


# ---------------------------------------------------------------------------
# distributions


_KINDS = ("deterministic", "exponential", "uniform", "discrete")


@dataclass(frozen=True)
class Distribution:
    """Nonnegative patience / service-duration law with exact moments.

    Construct through the classmethods; ``params`` is kind-specific.
    Sampling is inverse-CDF on a single uniform per draw, so substreams stay
    aligned however draws are batched.
    """

    kind: str
    params: tuple = ()
    points: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    _cum: tuple[float, ...] = field(default=(), repr=False)

    @classmethod
    def deterministic(cls, d: float) -> "Distribution":
        if d < 0:
            raise ValueError("deterministic value must be nonnegative")
        return cls("deterministic", (float(d),))

    @classmethod
    def exponential(cls, rate: float) -> "Distribution":
        if rate <= 0:
            raise ValueError("exponential rate must be positive")
        return cls("exponential", (float(rate),))

    @classmethod
    def uniform(cls, a: float, b: float) -> "Distribution":
        if not (0 <= a < b):
            raise ValueError("uniform support must satisfy 0 <= a < b")
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def discrete(cls, points: Sequence[float], probs: Sequence[float]) -> "Distribution":
        pts = tuple(float(p) for p in points)
        prs = tuple(float(p) for p in probs)
        if len(pts) != len(prs) or not pts:
            raise ValueError("discrete law needs matching nonempty points/probs")
        if any(p < 0 for p in pts):
            raise ValueError("discrete support must be nonnegative")
        if any(p <= 0 for p in prs) or abs(sum(prs) - 1.0) > 1e-12:
            raise ValueError("discrete probabilities must be positive and sum to 1")
        cum = tuple(np.cumsum(prs).tolist())
        return cls("discrete", (), pts, prs, cum)

    # -- config records ----------------------------------------------------

    @classmethod
    def from_config(cls, record: dict) -> "Distribution":
        kind = record.get("kind")
        if kind == "deterministic":
            return cls.deterministic(_get_num(record, "d"))
        if kind == "exponential":
            return cls.exponential(_get_num(record, "rate"))
        if kind == "uniform":
            return cls.uniform(_get_num(record, "a"), _get_num(record, "b"))
        if kind == "discrete":
            return cls.discrete(record["points"], record["probs"])
        raise ValueError(f"unknown distribution kind {kind!r} (expected one of {_KINDS})")

    def to_config(self) -> dict:
        if self.kind == "deterministic":
            return {"kind": "deterministic", "d": self.params[0]}
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.params[0]}
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.params[0], "b": self.params[1]}
        return {"kind": "discrete", "points": list(self.points), "probs": list(self.probs)}

    # -- moments and tails ---------------------------------------------------

    @property
    def mean(self) -> float:
        if self.kind == "deterministic":
            return self.params[0]
        if self.kind == "exponential":
            return 1.0 / self.params[0]
        if self.kind == "uniform":
            return 0.5 * (self.params[0] + self.params[1])
        return float(np.dot(self.points, self.probs))

    def survival(self, t: float) -> float:
        """P(D > t)."""
        if self.kind == "deterministic":
            return 1.0 if self.params[0] > t else 0.0
        if self.kind == "exponential":
            return 1.0 if t < 0 else math.exp(-self.params[0] * t)
        if self.kind == "uniform":
            a, b = self.params
            if t < a:
                return 1.0
            if t >= b:
                return 0.0
            return (b - t) / (b - a)
        return float(sum(p for x, p in zip(self.points, self.probs) if x > t))

    def cdf(self, t: float) -> float:
        return 1.0 - self.survival(t)

    def mean_excess(self, t: float) -> float:
        """E[(D - t)^+], closed form for every kind."""
        if self.kind == "deterministic":
            return max(self.params[0] - t, 0.0)
        if self.kind == "exponential":
            rate = self.params[0]
            if t < 0:
                return 1.0 / rate - t
            return math.exp(-rate * t) / rate
        if self.kind == "uniform":
            a, b = self.params
            if t <= a:
                return self.mean - t
            if t >= b:
                return 0.0
            return (b - t) ** 2 / (2.0 * (b - a))
        return float(sum(p * max(x - t, 0.0) for x, p in zip(self.points, self.probs)))

    @property
    def jump_points(self) -> tuple[float, ...]:
        """Support atoms / density kinks, for breakpoint-aware consumers."""
        if self.kind == "deterministic":
            return (self.params[0],)
        if self.kind == "uniform":
            return self.params
        if self.kind == "discrete":
            return self.points
        return ()

    # -- sampling ------------------------------------------------------------

    def from_uniform(self, u):
        """Inverse CDF; ``u`` may be a scalar or an array in [0, 1)."""
        if self.kind == "deterministic":
            return np.full_like(np.asarray(u, dtype=np.float64), self.params[0]) + 0.0
        if self.kind == "exponential":
            return -np.log1p(-np.asarray(u, dtype=np.float64)) / self.params[0]
        if self.kind == "uniform":
            a, b = self.params
            return a + (b - a) * np.asarray(u, dtype=np.float64)
        idx = np.searchsorted(np.asarray(self._cum), np.asarray(u, dtype=np.float64), side="right")
        return np.asarray(self.points)[np.minimum(idx, len(self.points) - 1)]

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.from_uniform(rng.random()))

    def sample_array(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(self.from_uniform(rng.random(size)), dtype=np.float64)

    def scaled(self, c: float) -> "Distribution":
        """Law of c*D (c > 0); used by space-scaled experiment schemes."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.kind == "deterministic":
            return Distribution.deterministic(c * self.params[0])
        if self.kind == "exponential":
            return Distribution.exponential(self.params[0] / c)
        if self.kind == "uniform":
            return Distribution.uniform(c * self.params[0], c * self.params[1])
        return Distribution.discrete([c * p for p in self.points], self.probs)

    # -- expectations ----------------------------------------------------------

    def expect(self, f, abs_tol: float = 1e-9) -> float:
        """E[f(D)]: closed form for point laws, quadrature against the density
        otherwise.  ``f`` bounded; a TestFunction/RcllFunction bound is checked
        so unbounded integrands are rejected.
        """
        bound = getattr(f, "sup_norm_bound", None) or getattr(f, "bound", None)
        if bound is None or not math.isfinite(bound):
            raise ValueError("expect needs a bounded function (missing sup-norm bound)")
        fb = getattr(f, "breakpoints", ())
        if self.kind == "deterministic":
            return float(f(self.params[0]))
        if self.kind == "discrete":
            return float(sum(p * float(f(x)) for x, p in zip(self.points, self.probs)))
        if self.kind == "uniform":
            a, b = self.params
            spec = QuadratureSpec(abs_tol=abs_tol, breakpoints=tuple(fb))
            return integrate(lambda x: float(f(x)) / (b - a), a, b, spec)
        rate = self.params[0]
        # exponential tail below abs_tol/2 once rate*exp(-rate*x)*bound is spent
        upper = max(1.0 / rate, math.log(max(2.0 * bound / abs_tol, 2.0)) / rate)
        spec = QuadratureSpec(abs_tol=abs_tol / 2.0, breakpoints=tuple(fb))
        return integrate(lambda x: float(f(x)) * rate * math.exp(-rate * x), 0.0, upper, spec)


def _get_num(record: dict, key: str) -> float:
    if key not in record:
        raise ValueError(f"distribution record missing key {key!r}")
    return float(record[key])


# ---------------------------------------------------------------------------
# standard probe suite


# Suite members take scalars on the quadrature-heavy paths and arrays on the
# ensemble paths; the float branch skips numpy dispatch overhead.


def _capped_identity(cap: float, band: float) -> TestFunction:
    hi, w = cap, band

    def ev(x):
        if isinstance(x, float):
            u_hi = min(max(x - hi, 0.0), w)
            u_lo = min(max(-hi - x, 0.0), w)
            core = min(max(x, -hi), hi)
            return core + (u_hi - u_hi * u_hi / (2 * w)) - (u_lo - u_lo * u_lo / (2 * w))
        x = np.asarray(x, dtype=np.float64)
        u_hi = np.clip(x - hi, 0.0, w)
        u_lo = np.clip(-hi - x, 0.0, w)
        core = np.clip(x, -hi, hi)
        out = core + (u_hi - u_hi**2 / (2 * w)) - (u_lo - u_lo**2 / (2 * w))
        return out if out.ndim else float(out)

    def dv(x):
        if isinstance(x, float):
            ax = abs(x)
            if ax <= hi:
                return 1.0
            return 0.0 if ax >= hi + w else 1.0 - (ax - hi) / w
        x = np.asarray(x, dtype=np.float64)
        out = np.where(
            np.abs(x) <= hi,
            1.0,
            np.where(np.abs(x) >= hi + w, 0.0, 1.0 - (np.abs(x) - hi) / w),
        )
        return out if out.ndim else float(out)

    def d2(x):
        if isinstance(x, float):
            ax = abs(x)
            if hi < ax < hi + w:
                return -1.0 / w if x > 0 else 1.0 / w
            return 0.0
        x = np.asarray(x, dtype=np.float64)
        out = np.where((np.abs(x) > hi) & (np.abs(x) < hi + w), -np.sign(x) / w, 0.0)
        return out if out.ndim else float(out)

    return TestFunction(
        eval=ev,
        deriv=dv,
        sup_norm_bound=hi + band / 2 + 1.0,
        name="capped_id",
        second_deriv=d2,
        deriv_sup_norm_bound=1.0 + 1.0 / w,
        breakpoints=(-hi - w, -hi, hi, hi + w),
    )


def _gaussian_bump(center: float, width: float) -> TestFunction:
    c, s = center, width
    inv2 = 1.0 / (2 * s * s)
    inv_s2 = 1.0 / (s * s)

    def ev(x):
        if isinstance(x, float):
            return math.exp(-((x - c) ** 2) * inv2)
        x = np.asarray(x, dtype=np.float64)
        out = np.exp(-((x - c) ** 2) * inv2)
        return out if out.ndim else float(out)

    def dv(x):
        if isinstance(x, float):
            return -(x - c) * inv_s2 * math.exp(-((x - c) ** 2) * inv2)
        x = np.asarray(x, dtype=np.float64)
        out = -(x - c) * inv_s2 * np.exp(-((x - c) ** 2) * inv2)
        return out if out.ndim else float(out)

    def d2(x):
        if isinstance(x, float):
            return (((x - c) ** 2) * inv_s2 - 1.0) * inv_s2 * math.exp(-((x - c) ** 2) * inv2)
        x = np.asarray(x, dtype=np.float64)
        out = (((x - c) ** 2) * inv_s2 - 1.0) * inv_s2 * np.exp(-((x - c) ** 2) * inv2)
        return out if out.ndim else float(out)

    return TestFunction(
        eval=ev,
        deriv=dv,
        sup_norm_bound=1.0 + math.exp(-0.5) / s,
        name=f"gauss[{c:g},{s:g}]",
        second_deriv=d2,
        deriv_sup_norm_bound=math.exp(-0.5) / s + 1.0 / s**2,
    )


def _sigmoid(steepness: float) -> TestFunction:
    k = steepness

    def _sig_scalar(x: float) -> float:
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-k * x))
        z = math.exp(k * x)
        return z / (1.0 + z)

    def _sig(x):
        x = np.asarray(x, dtype=np.float64)
        z = np.exp(-k * np.abs(x))
        return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))

    def ev(x):
        if isinstance(x, float):
            return _sig_scalar(x)
        out = _sig(x)
        return out if np.ndim(out) else float(out)

    def dv(x):
        if isinstance(x, float):
            s = _sig_scalar(x)
            return k * s * (1.0 - s)
        s = _sig(x)
        out = k * s * (1.0 - s)
        return out if np.ndim(out) else float(out)

    def d2(x):
        if isinstance(x, float):
            s = _sig_scalar(x)
            return k * k * s * (1.0 - s) * (1.0 - 2.0 * s)
        s = _sig(x)
        out = k * k * s * (1.0 - s) * (1.0 - 2.0 * s)
        return out if np.ndim(out) else float(out)

    return TestFunction(
        eval=ev,
        deriv=dv,
        sup_norm_bound=1.0 + k / 4.0,
        name=f"sigmoid[{k:g}]",
        second_deriv=d2,
        deriv_sup_norm_bound=k / 4.0 + k * k / (6.0 * math.sqrt(3.0)),
    )


def _constant_one() -> TestFunction:
    def ev(x):
        if isinstance(x, float):
            return 1.0
        out = np.ones_like(np.asarray(x, dtype=np.float64))
        return out if out.ndim else 1.0

    def zero(x):
        if isinstance(x, float):
            return 0.0
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        return out if out.ndim else 0.0

    return TestFunction(
        eval=ev,
        deriv=zero,
        sup_norm_bound=1.0,
        name="one",
        second_deriv=zero,
        deriv_sup_norm_bound=1e-12,
    )


def standard_test_suite() -> list[TestFunction]:
    """Probe functions used across pairing, martingale and transport checks.

    Contains the constant, a smoothly capped identity, Gaussian bumps at
    several centers/widths and two logistic step surrogates.
    """
    return [
        _constant_one(),
        _capped_identity(10.0, 2.0),
        _gaussian_bump(0.0, 1.0),
        _gaussian_bump(2.0, 0.7),
        _gaussian_bump(-1.0, 1.5),
        _sigmoid(2.0),
        _sigmoid(6.0),
    ]


def suite_by_name(names: Sequence[str] | None = None) -> list[TestFunction]:
    """Subset of the standard suite by name (all of it when names is None)."""
    suite = standard_test_suite()
    if names is None:
        return suite
    table = {tf.name: tf for tf in suite}
    missing = [n for n in names if n not in table]
    if missing:
        raise KeyError(f"unknown test functions {missing}; have {sorted(table)}")
    return [table[n] for n in names]

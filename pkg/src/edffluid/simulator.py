"""Event-driven simulation of the M/M/1+GI queue under hard EDF scheduling.

The engine is exact: arrivals, service completions and credit expirations are
scheduled as first-class events at their exact times, never detected by
polling.  With ``mode="pure_delay"`` the server is removed and every credit
expiration is a departure, which turns the same engine into the pure-delay
infinite-server system.

Equal-time events are processed in the fixed order loss < service_end <
arrival (service starts are emitted inside whichever event freed or fed the
server), so trajectories are bit-identical for identical seeds.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterable, Sequence

import numpy as np

from .calculus import DEFAULT_QUADRATURE, Distribution, QuadratureSpec, TestFunction, integrate
from .measure import PointMeasure

__all__ = [
    "SimConfig",
    "Customer",
    "Trajectory",
    "ScriptExhaustedError",
    "run",
    "run_scripted",
    "profile_at",
    "observables",
    "Observables",
    "martingale_path",
    "bracket_path",
    "generator_apply",
    "substream",
]

_INF = math.inf

ARRIVAL = "arrival"
SERVICE_START = "service_start"
SERVICE_END = "service_end"
LOSS = "loss"


class ScriptExhaustedError(RuntimeError):
    """A scripted driver ran out of service durations before the horizon."""


@dataclass(frozen=True)
class SimConfig:
    """Run parameters.  ``initial_credits`` are the residual credits of the
    customers already waiting at time zero."""

    lam: float
    mu: float
    patience: Distribution
    horizon: float
    initial_credits: tuple[float, ...] = ()
    seed: int = 0
    mode: str = "edf"

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("rates must be nonnegative")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "initial_credits", tuple(float(c) for c in self.initial_credits))
        if any(c <= 0 for c in self.initial_credits):
            raise ValueError("initial credits must be strictly positive")
        if self.mode not in ("edf", "pure_delay"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class Customer:
    id: int
    arrival_time: float
    deadline: float
    service_start: float | None
    service_end: float | None
    loss_time: float | None

    @property
    def fate(self) -> str:
        if self.loss_time is not None:
            return "lost"
        if self.service_start is not None:
            return "served" if self.service_end is not None else "in_service"
        return "in_system"


def substream(seed: int, purpose: int) -> np.random.Generator:
    """Independent generator for one purpose (arrivals / services / patience /
    initial draws) of one replication."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(purpose,))))


class _UniformStream:
    """Batched uniforms from one substream; draw order is batch-invariant."""

    __slots__ = ("_gen", "_buf", "_i")

    def __init__(self, seed: int, purpose: int):
        self._gen = substream(seed, purpose)
        self._buf: list[float] = []
        self._i = 0

    def next(self) -> float:
        i = self._i
        if i >= len(self._buf):
            self._buf = self._gen.random(4096).tolist()
            i = 0
        self._i = i + 1
        return self._buf[i]


def _scalar_sampler(dist: Distribution):
    """Closure mapping one uniform to one draw, matching from_uniform bit for bit."""
    if dist.kind == "deterministic":
        d = dist.params[0]
        return lambda u: d
    if dist.kind == "exponential":
        rate = dist.params[0]
        return lambda u: -math.log1p(-u) / rate
    if dist.kind == "uniform":
        a, b = dist.params
        return lambda u: a + (b - a) * u
    cum = dist._cum
    pts = dist.points
    last = len(pts) - 1
    return lambda u: pts[min(bisect.bisect_right(cum, u), last)]


class Trajectory:
    """Full event history of one run; everything else is derived from it."""

    def __init__(
        self,
        config: SimConfig,
        n_initial: int,
        events: list[tuple[float, str, int]],
        arrival_times: list[float],
        deadlines: list[float],
        start_times: list[float],
        end_times: list[float],
        loss_times: list[float],
    ):
        self.config = config
        self.n_initial = n_initial
        self.events = events
        self._arrival = arrival_times
        self._deadline = deadlines
        self._start = start_times
        self._end = end_times
        self._loss = loss_times

    @property
    def horizon(self) -> float:
        return self.config.horizon

    @property
    def num_customers(self) -> int:
        return len(self._arrival)

    def customer(self, cid: int) -> Customer:
        def opt(v: float) -> float | None:
            return None if math.isnan(v) else v

        return Customer(
            id=cid,
            arrival_time=self._arrival[cid],
            deadline=self._deadline[cid],
            service_start=opt(self._start[cid]),
            service_end=opt(self._end[cid]),
            loss_time=opt(self._loss[cid]),
        )

    @property
    def customers(self) -> list[Customer]:
        return [self.customer(i) for i in range(self.num_customers)]

    def arrays(self) -> dict[str, np.ndarray]:
        """Per-customer columns as float arrays (nan = never happened)."""
        return {
            "arrival": np.asarray(self._arrival, dtype=np.float64),
            "deadline": np.asarray(self._deadline, dtype=np.float64),
            "start": np.asarray(self._start, dtype=np.float64),
            "end": np.asarray(self._end, dtype=np.float64),
            "loss": np.asarray(self._loss, dtype=np.float64),
        }

    def event_rows(self) -> Iterable[tuple[float, str, int, float]]:
        """Rows of the ``time,kind,customer_id,deadline`` export."""
        for t, kind, cid in self.events:
            yield (t, kind, cid, self._deadline[cid])


def _simulate(
    config: SimConfig,
    *,
    scripted_arrivals: Sequence[tuple[float, float]] | None = None,
    scripted_services: Sequence[float] | None = None,
) -> Trajectory:
    horizon = config.horizon
    edf = config.mode == "edf"

    arrival_times: list[float] = []
    deadlines: list[float] = []
    start_times: list[float] = []
    end_times: list[float] = []
    loss_times: list[float] = []
    events: list[tuple[float, str, int]] = []

    scripted = scripted_arrivals is not None
    if scripted:
        script_arr = list(scripted_arrivals or ())
        for (ta, _), (tb, _) in zip(script_arr, script_arr[1:]):
            if tb < ta:
                raise ValueError("scripted arrival times must be nondecreasing")
        if any(t < 0 or p < 0 for t, p in script_arr):
            raise ValueError("scripted arrivals need nonnegative times and patiences")
        script_svc = list(scripted_services or ())
        arr_idx = 0
        svc_idx = 0
    else:
        arr_u = _UniformStream(config.seed, 0)
        svc_u = _UniformStream(config.seed, 1)
        pat_u = _UniformStream(config.seed, 2)
        draw_patience = _scalar_sampler(config.patience)
        lam = config.lam
        mu = config.mu

    # next-arrival schedule
    if scripted:
        next_arrival = script_arr[0][0] if script_arr else _INF
    elif config.lam > 0:
        next_arrival = -math.log1p(-arr_u.next()) / lam
    else:
        next_arrival = _INF

    waiting: list[tuple[float, int]] = []
    serving = -1
    svc_end = _INF

    def record_new(t: float, deadline: float) -> int:
        cid = len(arrival_times)
        arrival_times.append(t)
        deadlines.append(deadline)
        start_times.append(math.nan)
        end_times.append(math.nan)
        loss_times.append(math.nan)
        return cid

    def start_service(t: float) -> None:
        nonlocal serving, svc_end, svc_idx
        dl, cid = heappop(waiting)
        start_times[cid] = t
        events.append((t, SERVICE_START, cid))
        if scripted:
            if svc_idx >= len(script_svc):
                raise ScriptExhaustedError(
                    f"service script exhausted at t={t} (needed draw #{svc_idx + 1})"
                )
            dur = script_svc[svc_idx]
            svc_idx += 1
        else:
            dur = -math.log1p(-svc_u.next()) / mu if mu > 0 else _INF
        serving = cid
        svc_end = t + dur

    # initial customers occupy ids 0..m-1; in EDF mode the smallest credit
    # enters service immediately (non-idling), erasing its atom at 0+.
    for credit in config.initial_credits:
        cid = record_new(0.0, credit)
        heappush(waiting, (credit, cid))
    n_initial = len(config.initial_credits)
    if edf and serving < 0 and waiting:
        start_service(0.0)

    while True:
        next_loss = waiting[0][0] if waiting else _INF
        if next_loss <= svc_end and next_loss <= next_arrival:
            t, what = next_loss, 0
        elif svc_end <= next_arrival:
            t, what = svc_end, 1
        else:
            t, what = next_arrival, 2
        if t > horizon:
            break

        if what == 0:
            dl, cid = heappop(waiting)
            loss_times[cid] = t
            events.append((t, LOSS, cid))
        elif what == 1:
            end_times[serving] = t
            events.append((t, SERVICE_END, serving))
            serving = -1
            svc_end = _INF
            if waiting:
                start_service(t)
        else:
            if scripted:
                _, pat = script_arr[arr_idx]
                arr_idx += 1
                next_arrival = script_arr[arr_idx][0] if arr_idx < len(script_arr) else _INF
            else:
                pat = draw_patience(pat_u.next())
                next_arrival = t - math.log1p(-arr_u.next()) / lam
            deadline = t + pat
            cid = record_new(t, deadline)
            events.append((t, ARRIVAL, cid))
            if deadline <= t:
                # zero patience: expired on arrival
                loss_times[cid] = t
                events.append((t, LOSS, cid))
            else:
                heappush(waiting, (deadline, cid))
                if edf and serving < 0:
                    start_service(t)

    return Trajectory(
        config, n_initial, events, arrival_times, deadlines, start_times, end_times, loss_times
    )


def run(config: SimConfig) -> Trajectory:
    """Simulate one trajectory with seeded substreams per purpose
    (arrivals / services / patience), bit-identical per seed."""
    return _simulate(config)


def run_scripted(
    config: SimConfig,
    arrivals: Sequence[tuple[float, float]],
    services: Sequence[float],
) -> Trajectory:
    """Same engine with the random draws replaced by scripts.

    ``arrivals`` is a list of (time, patience) with nondecreasing times;
    ``services`` is consumed in service_start order and raises
    :class:`ScriptExhaustedError` when it runs dry before the horizon.
    """
    return _simulate(config, scripted_arrivals=arrivals, scripted_services=services)


def profile_at(traj: Trajectory, t: float, left_limit: bool = False) -> PointMeasure:
    """Time-credit profile at t: a unit atom at (deadline - t) for every
    customer present by t that has not entered service.

    Lost customers keep their (nonpositive) atom.  With ``left_limit`` the
    events exactly at t are undone; at t=0 that exposes the pre-start profile
    containing every initial customer.
    """
    if not (0.0 <= t <= traj.horizon):
        raise ValueError(f"t={t} outside [0, {traj.horizon}]")
    arrival = traj._arrival
    start = traj._start
    deadline = traj._deadline
    n_init = traj.n_initial
    atoms = []
    for cid in range(len(arrival)):
        if left_limit:
            if cid >= n_init and not arrival[cid] < t:
                continue
            if start[cid] < t:  # nan-safe: nan < t is False
                continue
        else:
            if arrival[cid] > t:
                continue
            if start[cid] <= t:
                continue
        atoms.append((deadline[cid] - t, 1.0))
    return PointMeasure(atoms)


class Observables:
    """Piecewise-constant performance paths derived from one trajectory.

    ``times`` holds 0 and every event time; row k is the state right after
    all events at ``times[k]`` (paths are right-continuous).
    """

    def __init__(self, traj: Trajectory):
        self._traj = traj
        n_init = traj.n_initial
        ts = [0.0]
        qs = [n_init]
        ps = [0]
        ss = [0]
        xs = [n_init]
        q = x = n_init
        p = s = 0
        for t, kind, _cid in traj.events:
            if kind == ARRIVAL:
                q += 1
                x += 1
            elif kind == SERVICE_START:
                q -= 1
            elif kind == SERVICE_END:
                s += 1
                x -= 1
            else:  # LOSS
                q -= 1
                p += 1
                x -= 1
            if t == ts[-1]:
                qs[-1], ps[-1], ss[-1], xs[-1] = q, p, s, x
            else:
                ts.append(t)
                qs.append(q)
                ps.append(p)
                ss.append(s)
                xs.append(x)
        self.times = np.asarray(ts, dtype=np.float64)
        self.Q = np.asarray(qs, dtype=np.int64)
        self.P = np.asarray(ps, dtype=np.int64)
        self.S = np.asarray(ss, dtype=np.int64)
        self.X = np.asarray(xs, dtype=np.int64)

        zero_idx = np.flatnonzero(self.Q == 0)
        self.tau0 = float(self.times[zero_idx[0]]) if zero_idx.size else _INF
        self.omega0 = _INF
        for t, kind, _cid in traj.events:
            if kind == LOSS:
                self.omega0 = t
                break

    def _index(self, ts) -> np.ndarray:
        return np.maximum(np.searchsorted(self.times, ts, side="right") - 1, 0)

    def q_at(self, ts):
        return self.Q[self._index(ts)]

    def p_at(self, ts):
        return self.P[self._index(ts)]

    def s_at(self, ts):
        return self.S[self._index(ts)]

    def x_at(self, ts):
        return self.X[self._index(ts)]

    def t1_on_grid(self, ts: np.ndarray) -> np.ndarray:
        """Smallest positive atom location at each (ascending) query time;
        nan whenever no waiting customer has positive credit."""
        ts = np.asarray(ts, dtype=np.float64)
        if np.any(np.diff(ts) < 0):
            raise ValueError("query times must be ascending")
        traj = self._traj
        order = sorted(range(traj.num_customers), key=lambda c: traj._arrival[c])
        start = traj._start
        deadline = traj._deadline
        arrival = traj._arrival
        heap: list[tuple[float, int]] = []
        out = np.full(ts.shape, np.nan)
        j = 0
        for k, t in enumerate(ts.tolist()):
            while j < len(order) and arrival[order[j]] <= t:
                cid = order[j]
                heappush(heap, (deadline[cid], cid))
                j += 1
            while heap:
                dl, cid = heap[0]
                # stale once served-or-started by t or already expired at t
                if dl <= t or start[cid] <= t:
                    heappop(heap)
                else:
                    break
            if heap:
                out[k] = heap[0][0] - t
        return out

    def t1_at(self, t: float) -> float | None:
        v = self.t1_on_grid(np.asarray([t]))[0]
        return None if math.isnan(v) else float(v)

    def csv_rows(self, grid: np.ndarray | None = None) -> Iterable[tuple]:
        """Rows of the ``t,Q,P,S,X,t1`` export on grid + event times."""
        ts = self.times
        if grid is not None:
            ts = np.unique(np.concatenate([ts, np.asarray(grid, dtype=np.float64)]))
        t1 = self.t1_on_grid(ts)
        idx = self._index(ts)
        for k, t in enumerate(ts.tolist()):
            i = idx[k]
            yield (t, int(self.Q[i]), int(self.P[i]), int(self.S[i]), int(self.X[i]), float(t1[k]))


def observables(traj: Trajectory) -> Observables:
    return Observables(traj)


# ---------------------------------------------------------------------------
# compensator machinery


@dataclass(frozen=True)
class _Segment:
    a: float
    b: float
    atom_deadlines: np.ndarray  # deadlines of atoms present on [a, b)
    t1_deadline: float  # deadline of the next pick; nan if buffer empty


def _build_segments(traj: Trajectory) -> list[_Segment]:
    """Inter-event segments with the measure composition frozen on each.

    Atom locations are affine in time inside a segment (deadline - s); losses
    do not change the measure, only which side of zero the atom sits on.
    """
    boundaries: list[float] = [0.0]
    grouped: dict[float, list[tuple[str, int]]] = {0.0: []}
    for t, kind, cid in traj.events:
        if t not in grouped:
            boundaries.append(t)
            grouped[t] = []
        grouped[t].append((kind, cid))
    if boundaries[-1] < traj.horizon:
        boundaries.append(traj.horizon)
        grouped[traj.horizon] = []

    active: dict[int, float] = {}
    waiting: dict[int, float] = {}
    deadline = traj._deadline
    for cid in range(traj.n_initial):
        active[cid] = deadline[cid]
        waiting[cid] = deadline[cid]

    segments: list[_Segment] = []
    for i, t in enumerate(boundaries):
        for kind, cid in grouped[t]:
            if kind == ARRIVAL:
                active[cid] = deadline[cid]
                waiting[cid] = deadline[cid]
            elif kind == SERVICE_START:
                del active[cid]
                del waiting[cid]
            elif kind == LOSS:
                del waiting[cid]  # atom stays in `active`, now nonpositive
        # a zero-width terminal segment keeps queries at the horizon post-event
        b = boundaries[i + 1] if i + 1 < len(boundaries) else t
        segments.append(
            _Segment(
                a=t,
                b=b,
                atom_deadlines=np.asarray(list(active.values()), dtype=np.float64),
                t1_deadline=min(waiting.values()) if waiting else math.nan,
            )
        )
    return segments


def _segments_of(traj: Trajectory) -> list[_Segment]:
    segs = getattr(traj, "_segment_cache", None)
    if segs is None:
        segs = _build_segments(traj)
        traj._segment_cache = segs
    return segs


def _pair_atoms(phi, deadlines: np.ndarray, t: float) -> float:
    if not deadlines.size:
        return 0.0
    return float(np.sum(phi(deadlines - t)))


def _pick_integral(phi, seg: _Segment, upto: float, spec: QuadratureSpec) -> float:
    """Integral over [seg.a, upto] of phi(credit of the next pick at s)."""
    if math.isnan(seg.t1_deadline):
        return 0.0
    width = upto - seg.a
    if width <= 0.0:
        return 0.0
    c = seg.t1_deadline - seg.a  # pick credit at segment start; decays at unit rate
    cuts = [c - bp for bp in getattr(phi, "breakpoints", ()) if 0.0 < c - bp < width]
    return integrate(lambda u: float(phi(c - u)), 0.0, width, spec.with_breakpoints(cuts))


class _CompensatedPath:
    """Shared evaluation of the compensator pieces of ``<nu_t, phi>``."""

    def __init__(
        self,
        traj: Trajectory,
        phi: TestFunction,
        lam: float,
        mu: float,
        patience: Distribution,
        spec: QuadratureSpec,
        squared: bool,
    ):
        self._segments = _segments_of(traj)
        self._phi = phi
        self._lam = lam
        self._mu = mu
        self._spec = spec
        self._squared = squared
        probe = phi.squared() if squared else phi
        self._probe = probe
        self._mean_mark = patience.expect(probe) if lam > 0 else 0.0
        # cumulative full-segment integrals
        drift = [0.0]
        picks = [0.0]
        for seg in self._segments:
            if squared:
                drift.append(0.0)
            else:
                d = _pair_atoms(probe, seg.atom_deadlines, seg.a) - _pair_atoms(
                    probe, seg.atom_deadlines, seg.b
                )
                drift.append(drift[-1] + d)
            picks.append(picks[-1] + _pick_integral(probe, seg, seg.b, spec))
        self._drift_cum = drift
        self._picks_cum = picks

    def _locate(self, t: float) -> int:
        segs = self._segments
        lo, hi = 0, len(segs) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if segs[mid].a <= t:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def pieces(self, t: float) -> tuple[float, float, float, float]:
        """(pairing at t, drift integral, pick integral, mark term) on [0, t]."""
        segs = self._segments
        if not segs:
            return 0.0, 0.0, 0.0, self._lam * t * self._mean_mark
        if not (segs[0].a <= t <= segs[-1].b):
            raise ValueError(f"t={t} outside [0, {segs[-1].b}]")
        k = self._locate(t)
        seg = segs[k]
        probe = self._probe
        pairing = _pair_atoms(probe, seg.atom_deadlines, t)
        drift = self._drift_cum[k]
        if not self._squared:
            drift += _pair_atoms(probe, seg.atom_deadlines, seg.a) - pairing
        picks = self._picks_cum[k] + _pick_integral(probe, seg, t, self._spec)
        return pairing, drift, picks, self._lam * t * self._mean_mark


class MartingalePath:
    """Dynkin compensation of the pairing ``<nu_t, phi>``.

    Starts at zero; with no arrivals and no services the translation drift is
    compensated exactly, so the path is identically zero.  The drift integral
    enters with the sign that achieves this (the pairing decreases by the
    integral of <nu_s, phi'> under pure leftward translation).
    """

    def __init__(
        self,
        traj: Trajectory,
        phi: TestFunction,
        lam: float,
        mu: float,
        patience: Distribution,
        spec: QuadratureSpec = DEFAULT_QUADRATURE,
    ):
        self._path = _CompensatedPath(traj, phi, lam, mu, patience, spec, squared=False)
        self._mu = mu
        p0, _, _, _ = self._path.pieces(0.0)
        self._pair0 = p0

    def eval(self, t: float) -> float:
        pairing, drift, picks, marks = self._path.pieces(t)
        return pairing - self._pair0 + drift + self._mu * picks - marks

    __call__ = eval


class BracketPath:
    """Predictable quadratic variation of the compensated pairing."""

    def __init__(
        self,
        traj: Trajectory,
        phi: TestFunction,
        lam: float,
        mu: float,
        patience: Distribution,
        spec: QuadratureSpec = DEFAULT_QUADRATURE,
    ):
        self._path = _CompensatedPath(traj, phi, lam, mu, patience, spec, squared=True)
        self._mu = mu

    def eval(self, t: float) -> float:
        _, _, picks, marks = self._path.pieces(t)
        return self._mu * picks + marks

    __call__ = eval


def martingale_path(
    traj: Trajectory,
    phi: TestFunction,
    lam: float,
    mu: float,
    patience: Distribution,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> MartingalePath:
    return MartingalePath(traj, phi, lam, mu, patience, spec)


def bracket_path(
    traj: Trajectory,
    phi: TestFunction,
    lam: float,
    mu: float,
    patience: Distribution,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> BracketPath:
    return BracketPath(traj, phi, lam, mu, patience, spec)


def generator_apply(
    nu: PointMeasure,
    phi: TestFunction,
    lam: float,
    mu: float,
    patience: Distribution,
) -> float:
    """Infinitesimal drift of the pairing ``<nu, phi>`` at state nu:
    translation, service removal at the first positive atom, arrival influx."""
    val = -nu.pair(phi.deriv)
    t1 = nu.first_positive_atom()
    if mu != 0.0 and t1 is not None:
        val -= mu * float(phi(t1))
    if lam != 0.0:
        val += lam * patience.expect(phi)
    return float(val)

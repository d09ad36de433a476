"""Finite weighted point measures on the real line.

A :class:`PointMeasure` is a finite sum of weighted Dirac atoms.  It is the
state of the time-credit profile of an EDF queue: positive atom locations are
residual credits of waiting customers, nonpositive locations belong to
customers already expired.  Weights generalize unit masses so the same type
carries the 1/n-renormalized measures used in scaling experiments.

Values are immutable after construction and safe to share between tasks.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator

import numpy as np

__all__ = ["PointMeasure"]


def _as_eval(f) -> Callable:
    # TestFunction / RcllFunction expose __call__; plain callables pass through.
    if not callable(f):
        raise TypeError(f"cannot pair against non-callable {f!r}")
    return f


class PointMeasure:
    """Ordered finite collection of (location, weight) atoms, weights > 0.

    Atoms are kept sorted by location, ascending.  Atoms at equal locations
    are kept separate (stable insertion order breaks ties) so that customer
    identity survives; :meth:`normalize` merges them when wanted.
    """

    __slots__ = ("_locations", "_weights")

    def __init__(self, atoms: Iterable[tuple[float, float]] = ()):
        pairs = list(atoms)
        locs = np.array([p[0] for p in pairs], dtype=np.float64)
        wts = np.array([p[1] for p in pairs], dtype=np.float64)
        if locs.size:
            if not np.all(np.isfinite(locs)) or not np.all(np.isfinite(wts)):
                raise ValueError("atom locations and weights must be finite")
            if np.any(wts <= 0.0):
                raise ValueError("atom weights must be strictly positive")
            order = np.argsort(locs, kind="stable")
            locs = locs[order]
            wts = wts[order]
        locs.flags.writeable = False
        wts.flags.writeable = False
        self._locations = locs
        self._weights = wts

    @classmethod
    def _from_sorted(cls, locations: np.ndarray, weights: np.ndarray) -> "PointMeasure":
        m = cls.__new__(cls)
        locations.flags.writeable = False
        weights.flags.writeable = False
        m._locations = locations
        m._weights = weights
        return m

    @classmethod
    def dirac(cls, location: float, weight: float = 1.0) -> "PointMeasure":
        return cls([(location, weight)])

    @classmethod
    def empty(cls) -> "PointMeasure":
        return cls()

    # -- basic accessors ---------------------------------------------------

    @property
    def locations(self) -> np.ndarray:
        return self._locations

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def __len__(self) -> int:
        return self._locations.size

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return zip(self._locations.tolist(), self._weights.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointMeasure):
            return NotImplemented
        return (
            self._locations.shape == other._locations.shape
            and bool(np.all(self._locations == other._locations))
            and bool(np.all(self._weights == other._weights))
        )

    def __hash__(self):  # atoms are float arrays; identity hashing is useless
        return hash((self._locations.tobytes(), self._weights.tobytes()))

    def __repr__(self) -> str:
        inside = " + ".join(f"{w:g}*d({x:g})" for x, w in self)
        return f"PointMeasure({inside or '0'})"

    @property
    def total_mass(self) -> float:
        return float(self._weights.sum())

    # -- operations --------------------------------------------------------

    def pair(self, f) -> float:
        """Integral of ``f`` against the measure: sum of w_i * f(x_i).

        Exact finite sum, no quadrature.  ``f`` may be any callable; if it
        accepts arrays the evaluation is vectorized.
        """
        if not self._locations.size:
            return 0.0
        fn = _as_eval(f)
        try:
            vals = np.asarray(fn(self._locations), dtype=np.float64)
            if vals.shape != self._locations.shape:
                raise TypeError
        except (TypeError, ValueError):
            vals = np.array([fn(x) for x in self._locations.tolist()], dtype=np.float64)
        return float(np.dot(self._weights, vals))

    def translate_left(self, h: float) -> "PointMeasure":
        """Shift every atom location by -h (h >= 0); weights unchanged.

        This is the credit-decay evolution: atoms drift left at unit speed.
        """
        if h < 0:
            raise ValueError(f"translate_left requires h >= 0, got {h}")
        if h == 0 or not self._locations.size:
            return self
        return PointMeasure._from_sorted(self._locations - h, self._weights.copy())

    def first_positive_atom(self) -> float | None:
        """Smallest atom location strictly greater than zero, or ``None``.

        An atom exactly at 0 does not count: it belongs to a customer whose
        credit just expired.
        """
        idx = int(np.searchsorted(self._locations, 0.0, side="right"))
        if idx >= self._locations.size:
            return None
        return float(self._locations[idx])

    def mass_positive(self) -> float:
        """Mass carried by atoms with location > 0."""
        idx = int(np.searchsorted(self._locations, 0.0, side="right"))
        return float(self._weights[idx:].sum())

    def mass_nonpositive(self) -> float:
        """Mass carried by atoms with location <= 0 (an atom at 0 counts here)."""
        idx = int(np.searchsorted(self._locations, 0.0, side="right"))
        return float(self._weights[:idx].sum())

    def renormalize(self, n: int) -> "PointMeasure":
        """Scale space and weight by 1/n: atom (x, w) becomes (x/n, w/n)."""
        if n < 1 or int(n) != n:
            raise ValueError(f"renormalize requires a positive integer n, got {n}")
        if n == 1:
            return self
        return PointMeasure._from_sorted(self._locations / n, self._weights / n)

    def normalize(self) -> "PointMeasure":
        """Merge atoms at equal locations, preserving total mass."""
        if self._locations.size < 2:
            return self
        locs, inverse = np.unique(self._locations, return_inverse=True)
        wts = np.zeros_like(locs)
        np.add.at(wts, inverse, self._weights)
        return PointMeasure._from_sorted(locs, wts)

    # -- serialization -----------------------------------------------------

    def to_csv_rows(self) -> list[str]:
        """Headerless ``location,weight`` fragment for trajectory snapshots."""
        return [f"{x!r},{w!r}" for x, w in zip(self._locations.tolist(), self._weights.tolist())]

    @classmethod
    def from_csv_rows(cls, rows: Iterable[str]) -> "PointMeasure":
        atoms = []
        for row in rows:
            loc_s, w_s = row.strip().split(",")
            atoms.append((float(loc_s), float(w_s)))
        return cls(atoms)

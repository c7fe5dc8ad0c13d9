"""Shared domain types: alphabets, symbol sequences, blocks and CDFs.

Two distribution-function shapes live here. ``StepCdf`` is the usual
right-continuous step function (empirical return-time laws, direct
hitting-time estimates, exact oracle laws). ``LinearCdf`` is a continuous
piecewise-linear function; it is what the integrated survival of a
``StepCdf`` looks like, and it is the default hitting-time surrogate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) < 2:
            raise ValueError("alphabet size must be at least 2")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size or len(set(labels)) != self.size:
                raise ValueError("labels must be %d distinct names" % self.size)
            object.__setattr__(self, "labels", labels)

    def label(self, symbol: int) -> str:
        if self.labels is not None:
            return self.labels[symbol]
        return str(symbol)

    def format_word(self, word: Sequence[int]) -> str:
        """Render a word; single-character labels are concatenated, others joined by '.'."""
        names = [self.label(int(s)) for s in word]
        if all(len(s) == 1 for s in names):
            return "".join(names)
        return ".".join(names)

    def parse_word(self, text: str) -> tuple[int, ...]:
        if self.labels is not None:
            lookup = {name: i for i, name in enumerate(self.labels)}
        else:
            lookup = {str(i): i for i in range(self.size)}
        if "," in text:
            parts = text.split(",")
        elif "." in text:
            parts = text.split(".")
        else:
            parts = list(text)
        try:
            return tuple(lookup[p] for p in parts)
        except KeyError as exc:
            raise ValueError("symbol %s not in alphabet of size %d" % (exc, self.size)) from None

    def to_dict(self) -> dict:
        d = {"size": self.size}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d


def symbol_dtype(size: int):
    return np.uint8 if size <= 256 else np.int32


@dataclass(frozen=True)
class Provenance:
    generator: str
    digest: str
    seed: int
    params: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"generator": self.generator, "digest": self.digest,
                "seed": int(self.seed), "params": self.params}


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A finite sample path over ``alphabet``; ``data`` is a read-only array."""

    alphabet: Alphabet
    data: np.ndarray
    provenance: Provenance | None = None

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 1:
            raise ValueError("sequence data must be one-dimensional")
        if data.size and (data.min() < 0 or data.max() >= self.alphabet.size):
            raise ValueError("sequence contains symbols outside the alphabet")
        object.__setattr__(self, "data", _frozen(data.astype(symbol_dtype(self.alphabet.size))))

    def __len__(self):
        return int(self.data.size)

    def __eq__(self, other):
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.alphabet, self.data.tobytes()))

    def text(self) -> str:
        return self.alphabet.format_word(self.data)


@dataclass(frozen=True)
class Block:
    alphabet: Alphabet
    word: tuple[int, ...]

    def __post_init__(self):
        word = tuple(int(s) for s in self.word)
        if not word:
            raise ValueError("a block needs at least one symbol")
        if any(s < 0 or s >= self.alphabet.size for s in word):
            raise ValueError("block symbols must lie in [0, %d)" % self.alphabet.size)
        object.__setattr__(self, "word", word)

    @classmethod
    def parse(cls, alphabet: Alphabet, text: str) -> "Block":
        return cls(alphabet, alphabet.parse_word(text))

    def __len__(self):
        return len(self.word)

    @property
    def n(self) -> int:
        return len(self.word)

    def text(self) -> str:
        return self.alphabet.format_word(self.word)


class StepCdf:
    """Right-continuous step distribution function on [0, inf).

    The value is 0 before ``jumps[0]`` and ``values[i]`` on
    ``[jumps[i], jumps[i+1])``. Instances are immutable.
    """

    __slots__ = ("jumps", "values", "_area")

    def __init__(self, jumps, values):
        jumps = np.asarray(jumps, dtype=float)
        values = np.asarray(values, dtype=float)
        if jumps.ndim != 1 or jumps.shape != values.shape or jumps.size == 0:
            raise ValueError("jumps and values must be equal-length nonempty 1-d arrays")
        if not np.all(np.isfinite(jumps)) or jumps[0] < 0:
            raise ValueError("jump points must be finite and nonnegative")
        if np.any(np.diff(jumps) <= 0):
            raise ValueError("jump points must be strictly increasing")
        if values[0] < 0 or values[-1] > 1 + 1e-12 or np.any(np.diff(values) < 0):
            raise ValueError("values must be nondecreasing within [0, 1]")
        values = np.minimum(values, 1.0)
        object.__setattr__(self, "jumps", _frozen(jumps))
        object.__setattr__(self, "values", _frozen(values))
        # area under the survival function up to each jump point
        surv_before = np.concatenate(([1.0], 1.0 - values[:-1]))
        widths = np.diff(jumps, prepend=0.0)
        object.__setattr__(self, "_area", _frozen(np.cumsum(widths * surv_before)))

    @classmethod
    def _trusted(cls, jumps, values, area) -> "StepCdf":
        """Skip validation; for hot paths that build the arrays themselves."""
        obj = cls.__new__(cls)
        for name, arr in (("jumps", jumps), ("values", values), ("_area", area)):
            arr.setflags(write=False)
            object.__setattr__(obj, name, arr)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("StepCdf is immutable")

    def __repr__(self):
        return "StepCdf(%d jumps, last=%g)" % (self.jumps.size, self.jumps[-1])

    def __eq__(self, other):
        if not isinstance(other, StepCdf):
            return NotImplemented
        return np.array_equal(self.jumps, other.jumps) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __call__(self, t):
        return cdf_eval(self, t)

    def left_limit(self, t):
        """Value of F(t-) for t > 0."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jumps, t, side="left")
        out = np.where(idx > 0, self.values[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)

    @property
    def total_mass(self) -> float:
        return float(self.values[-1])

    def mean(self) -> float:
        """Integral of the survival function over [0, inf); infinite if mass < 1."""
        if self.values[-1] < 1.0:
            return float("inf")
        return float(self._area[-1])

    def breakpoints(self) -> np.ndarray:
        return self.jumps

    def to_dict(self) -> dict:
        return {"jumps": self.jumps.tolist(), "values": self.values.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "StepCdf":
        return cls(d["jumps"], d["values"])

    @classmethod
    def from_json(cls, text: str) -> "StepCdf":
        return cls.from_dict(json.loads(text))

    def integral_of_survival(self, t):
        return cdf_integral_of_survival(self, t)


class LinearCdf:
    """Continuous piecewise-linear nondecreasing function, constant after the last knot.

    Values are not clipped to 1: an empirical integrated survival can end a
    hair above 1 when the sample mean of the normalized gaps does.
    """

    __slots__ = ("knots", "values")

    def __init__(self, knots, values):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size == 0:
            raise ValueError("knots and values must be equal-length nonempty 1-d arrays")
        if knots[0] < 0 or np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be nonnegative and strictly increasing")
        if values[0] < 0 or np.any(np.diff(values) < -1e-12):
            raise ValueError("values must be nonnegative and nondecreasing")
        object.__setattr__(self, "knots", _frozen(knots))
        object.__setattr__(self, "values", _frozen(np.maximum.accumulate(values)))

    @classmethod
    def _trusted(cls, knots, values) -> "LinearCdf":
        obj = cls.__new__(cls)
        for name, arr in (("knots", knots), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(obj, name, arr)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("LinearCdf is immutable")

    def __repr__(self):
        return "LinearCdf(%d knots, last=%g)" % (self.knots.size, self.knots[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("negative time")
        if self.knots[0] > 0:
            out = np.interp(t, np.concatenate(([0.0], self.knots)),
                            np.concatenate(([0.0], self.values)))
        else:
            out = np.interp(t, self.knots, self.values)
        return out if out.ndim else float(out)

    def left_limit(self, t):
        return self(t)

    def breakpoints(self) -> np.ndarray:
        return self.knots

    def to_dict(self) -> dict:
        return {"knots": self.knots.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True)
class EvalGrid:
    """Sorted positive evaluation points for continuous-time functionals."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid needs at least one point")
        if not np.all(np.isfinite(pts)) or pts[0] <= 0 or np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be finite, positive and strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def geometric(cls, lo: float = 0.01, hi: float = 10.0, size: int = 256) -> "EvalGrid":
        return cls(np.geomspace(lo, hi, size))

    def with_points(self, extra) -> np.ndarray:
        """Grid merged with additional positive finite points (jumps, knots)."""
        extra = np.asarray(extra, dtype=float)
        extra = extra[np.isfinite(extra) & (extra > 0)]
        return np.union1d(self.points, extra)

    def __eq__(self, other):
        return isinstance(other, EvalGrid) and np.array_equal(self.points, other.points)

    __hash__ = None


DEFAULT_GRID = EvalGrid.geometric()


def ecdf_from_samples(samples) -> StepCdf:
    """Empirical distribution function of nonnegative samples."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no samples")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite and nonnegative")
    uniq, counts = np.unique(x, return_counts=True)
    values = np.cumsum(counts) / x.size
    values[-1] = 1.0
    return StepCdf(uniq, values)


def weighted_step_cdf(points, weights) -> StepCdf:
    """Step CDF of a discrete law with given atoms and nonnegative weights (sum <= 1)."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = weights > 0
    points, weights = points[keep], weights[keep]
    order = np.argsort(points, kind="stable")
    uniq, inv = np.unique(points[order], return_inverse=True)
    mass = np.bincount(inv, weights=weights[order])
    values = np.minimum(np.cumsum(mass), 1.0)
    if values.size and values[-1] > 1.0 - 1e-12:
        values[-1] = 1.0  # rounding in the cumulative sum, not a defect
    return StepCdf(uniq, values)


def cdf_eval(cdf: StepCdf, t):
    """Right-continuous evaluation; accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    idx = np.searchsorted(cdf.jumps, t, side="right")
    out = np.where(idx > 0, cdf.values[np.maximum(idx - 1, 0)], 0.0)
    return out if out.ndim else float(out)


def cdf_integral_of_survival(cdf: StepCdf, t):
    """Exact value of the integral of 1 - cdf(s) over [0, t].

    Uses the step structure directly, so the result carries only
    floating-point rounding. ``t`` may be ``inf``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative time")
    jumps, values, area = cdf.jumps, cdf.values, cdf._area
    idx = np.searchsorted(jumps, t, side="right")
    prev = np.maximum(idx - 1, 0)
    base = np.where(idx > 0, area[prev], 0.0)
    start = np.where(idx > 0, jumps[prev], 0.0)
    surv = np.where(idx > 0, 1.0 - values[prev], 1.0)
    with np.errstate(invalid="ignore"):
        tail = np.where(surv > 0, (t - start) * surv, 0.0)
    out = base + tail
    return out if out.ndim else float(out)


def survival_integral_curve(cdf: StepCdf) -> LinearCdf:
    """The function t -> integral of survival over [0, t] as a ``LinearCdf``.

    Knots are 0 and the jump points; past the last jump the curve is flat
    provided the CDF reaches 1 there.
    """
    knots = np.concatenate(([0.0], cdf.jumps)) if cdf.jumps[0] > 0 else cdf.jumps
    if cdf.values[-1] < 1.0:
        raise ValueError("survival integral is unbounded for a defective distribution")
    return LinearCdf(knots, cdf_integral_of_survival(cdf, knots))

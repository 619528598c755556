"""Metric-space primitives, seeded sampling and defect measurement.

Everything here works on *batches*: a batch of points is an array whose first
axis indexes samples and whose remaining axes are the point shape (``()`` for
scalars, ``(n,)`` for vectors, ``(n, n)`` for matrices).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, EstimationError, EvaluationError, InputError

METRIC_KINDS = ("absolute-difference", "euclidean", "frobenius", "discrete")
SIMILARITY_MODES = ("bounded", "unbounded")

# Relative slack applied to every "exactly zero" comparison in binary64.
ROUNDING_SLACK = 1e-12


def slack(*operands) -> float:
    """Tolerance ``1e-12 * (1 + max |operand|)`` for exact-zero checks."""
    mags = [float(np.max(np.abs(np.asarray(o, dtype=float)), initial=0.0)) for o in operands]
    return ROUNDING_SLACK * (1.0 + max(mags, default=0.0))


def as_point(x) -> np.ndarray:
    """Validate and convert a scalar, vector or square matrix to a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim > 2:
        raise InputError(f"points are scalars, vectors or matrices; got ndim={arr.ndim}")
    if arr.ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise InputError(f"matrix points must be square; got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite entries")
    return arr


@dataclass(frozen=True)
class Metric:
    """A metric on a carrier.

    ``kind`` is one of :data:`METRIC_KINDS`, or ``"custom"`` with ``fn`` a
    vectorised dissimilarity ``fn(x_batch, y_batch) -> distances``.
    """

    kind: str
    fn: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "custom":
            if self.fn is None:
                raise InputError("custom metric needs a distance function")
        elif self.kind not in METRIC_KINDS:
            raise InputError(f"unknown metric kind {self.kind!r}; expected one of {METRIC_KINDS}")

    @classmethod
    def custom(cls, fn: Callable) -> "Metric":
        return cls("custom", fn)

    def batch(self, x, y, ndim: int) -> np.ndarray:
        """Distances between two batches whose points have ``ndim`` axes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "custom":
            return np.asarray(self.fn(x, y), dtype=float)
        axes = tuple(range(-ndim, 0))
        if self.kind == "discrete":
            if ndim == 0:
                return np.where(x == y, 0.0, 1.0)
            return np.where(np.all(x == y, axis=axes), 0.0, 1.0)
        diff = x - y
        if self.kind == "absolute-difference":
            if ndim != 0:
                raise InputError("absolute-difference metric is for scalar carriers")
            return np.abs(diff)
        if ndim == 0:
            return np.abs(diff)
        return np.sqrt(np.sum(diff * diff, axis=axes))

    def __call__(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape:
            raise InputError(f"shape mismatch: {x.shape} vs {y.shape}")
        return float(self.batch(x, y, x.ndim))


def default_metric(shape: Sequence[int]) -> Metric:
    """Absolute difference for scalars, Euclidean for vectors, Frobenius for matrices."""
    return Metric({0: "absolute-difference", 1: "euclidean"}.get(len(shape), "frobenius"))


def approx_equal(x, y, d: Metric, eps: float) -> bool:
    """``x ≈_eps y`` iff ``d(x, y) <= eps``."""
    if eps < 0:
        raise InputError("eps must be nonnegative")
    return d(x, y) <= eps


def similarity_from_metric(d_value, mode: str = "bounded"):
    """Convert a distance to a similarity in [0, 1].

    ``bounded`` gives ``1 - d`` and needs ``d`` in [0, 1]; ``unbounded`` gives
    ``1 / (1 + d)``.  Works elementwise on arrays.
    """
    d_value = np.asarray(d_value, dtype=float)
    if np.any(d_value < 0):
        raise DomainError("distances are nonnegative")
    if mode == "bounded":
        if np.any(d_value > 1.0):
            raise DomainError("bounded similarity requires d <= 1; use mode='unbounded'")
        out = 1.0 - d_value
    elif mode == "unbounded":
        out = 1.0 / (1.0 + d_value)
    else:
        raise InputError(f"unknown similarity mode {mode!r}")
    return float(out) if out.ndim == 0 else out


def similarity_threshold(eps: float, mode: str = "bounded") -> float:
    """The similarity level equivalent to ``d <= eps`` under ``mode``."""
    if eps < 0:
        raise InputError("eps must be nonnegative")
    if mode == "bounded":
        return 1.0 - eps
    if mode == "unbounded":
        return 1.0 / (1.0 + eps)
    raise InputError(f"unknown similarity mode {mode!r}")


class SampleSet:
    """A materialised, reproducible set of sample tuples.

    ``points`` has shape ``(count, slots, *shape)``: each sample is a tuple of
    ``slots`` carrier points, so ``points[:, i]`` is the batch bound to the
    i-th free variable of an axiom.  Construct with the class methods for
    non-uniform schemes; the plain constructor samples i.i.d. uniformly from
    the box ``[low, high]`` (broadcast to the point shape).
    """

    def __init__(self, seed: int, low, high, count: int, slots: int = 1, shape=None):
        self.scheme = "uniform"
        self._init_box(low, high, shape)
        self.seed = _check_seed(seed)
        self.count = _check_positive(count, "count")
        self.slots = _check_positive(slots, "slots")
        self._params = {}
        self.points = self._generate()

    def _init_box(self, low, high, shape):
        low = np.asarray(low, dtype=float)
        high = np.asarray(high, dtype=float)
        if shape is None:
            shape = np.broadcast_shapes(low.shape, high.shape)
        self.shape = tuple(shape)
        self.low = np.broadcast_to(low, self.shape).copy()
        self.high = np.broadcast_to(high, self.shape).copy()
        if not (np.all(np.isfinite(self.low)) and np.all(np.isfinite(self.high))):
            raise InputError("box bounds must be finite")
        if np.any(self.low > self.high):
            raise InputError("box has low > high")

    @classmethod
    def grid(cls, low, high, per_axis: int, slots: int = 1, shape=None) -> "SampleSet":
        """Tensor-product lattice including the box vertices; ``count = per_axis ** D``."""
        self = cls.__new__(cls)
        self.scheme = "grid"
        self._init_box(low, high, shape)
        self.seed = 0
        self.slots = _check_positive(slots, "slots")
        per_axis = _check_positive(per_axis, "per_axis")
        dims = self.slots * int(np.prod(self.shape, dtype=int))
        self.count = per_axis**dims
        if self.count > 10_000_000:
            raise InputError(f"grid of {self.count} points is too large")
        self._params = {"per_axis": per_axis}
        self.points = self._generate()
        return self

    @classmethod
    def ball(cls, seed: int, center, radius: float, count: int, slots: int = 1) -> "SampleSet":
        """Uniform samples from the Euclidean/Frobenius ball ``|p - center| <= radius``."""
        self = cls.__new__(cls)
        self.scheme = "ball"
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise InputError("radius must be positive")
        self._init_box(center - radius, center + radius, center.shape)
        self.seed = _check_seed(seed)
        self.count = _check_positive(count, "count")
        self.slots = _check_positive(slots, "slots")
        self._params = {"center": center.copy(), "radius": float(radius)}
        self.points = self._generate()
        return self

    @classmethod
    def exhaustive(cls, elements: Sequence[float], slots: int = 1) -> "SampleSet":
        """Every ``slots``-tuple over a finite scalar carrier, in lexicographic order."""
        self = cls.__new__(cls)
        self.scheme = "exhaustive"
        elems = np.asarray(list(elements), dtype=float)
        if elems.ndim != 1 or elems.size == 0:
            raise InputError("exhaustive sampling needs a nonempty list of scalars")
        self._init_box(elems.min(), elems.max(), ())
        self.seed = 0
        self.slots = _check_positive(slots, "slots")
        self.count = elems.size**self.slots
        self._params = {"elements": elems}
        self.points = self._generate()
        return self

    @classmethod
    def choice(cls, seed: int, elements: Sequence[float], count: int, slots: int = 1) -> "SampleSet":
        """Seeded i.i.d. uniform draws from a finite scalar carrier."""
        self = cls.exhaustive(elements, 1)
        self.scheme = "choice"
        self.seed = _check_seed(seed)
        self.count = _check_positive(count, "count")
        self.slots = _check_positive(slots, "slots")
        self.points = self._generate()
        return self

    def _generate(self) -> np.ndarray:
        size = (self.count, self.slots) + self.shape
        if self.scheme == "uniform":
            rng = np.random.default_rng(self.seed)
            pts = rng.uniform(self.low, self.high, size=size)
        elif self.scheme == "grid":
            m = self._params["per_axis"]
            lo = np.broadcast_to(self.low, (self.slots,) + self.shape).ravel()
            hi = np.broadcast_to(self.high, (self.slots,) + self.shape).ravel()
            axes = [np.linspace(a, b, m) for a, b in zip(lo, hi)]
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([g.ravel() for g in mesh], axis=-1).reshape(size)
        elif self.scheme == "ball":
            rng = np.random.default_rng(self.seed)
            dims = int(np.prod(self.shape, dtype=int))
            direction = rng.standard_normal((self.count, self.slots, dims))
            direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
            r = self._params["radius"] * rng.uniform(size=(self.count, self.slots, 1)) ** (1.0 / dims)
            pts = self._params["center"] + (r * direction).reshape(size)
        elif self.scheme == "exhaustive":
            elems = self._params["elements"]
            pts = np.array(list(itertools.product(elems, repeat=self.slots)), dtype=float).reshape(size)
        elif self.scheme == "choice":
            rng = np.random.default_rng(self.seed)
            elems = self._params["elements"]
            pts = elems[rng.integers(0, elems.size, size=size)]
        else:  # pragma: no cover
            raise InputError(f"unknown scheme {self.scheme!r}")
        pts.setflags(write=False)
        return pts

    def regenerate(self) -> "SampleSet":
        """A fresh SampleSet rebuilt from this one's parameters."""
        clone = self.__class__.__new__(self.__class__)
        clone.__dict__.update({k: v for k, v in self.__dict__.items() if k != "points"})
        clone.points = clone._generate()
        return clone

    def variables(self, k: Optional[int] = None) -> list:
        """The first ``k`` slot batches (all slots by default)."""
        k = self.slots if k is None else k
        if k > self.slots:
            raise InputError(f"need {k} sample slots, SampleSet has {self.slots}")
        return [self.points[:, i] for i in range(k)]

    def scalars(self, low: float, high: float, k: int) -> np.ndarray:
        """``(count, k)`` scalars from ``[low, high]`` on a stream independent of ``points``."""
        rng = np.random.default_rng([self.seed, 0x5CA1A5])
        return rng.uniform(low, high, size=(self.count, k))

    def inside_box(self, atol: float = 0.0) -> bool:
        return bool(np.all(self.points >= self.low - atol) and np.all(self.points <= self.high + atol))

    def describe(self) -> dict:
        out = {"scheme": self.scheme, "seed": self.seed, "count": self.count, "slots": self.slots,
               "shape": list(self.shape)}
        if len(self.shape) == 0:
            out["box"] = [float(self.low), float(self.high)]
        if self.scheme == "ball":
            out["radius"] = self._params["radius"]
        if self.scheme == "grid":
            out["per_axis"] = self._params["per_axis"]
        return out

    def __len__(self):
        return self.count

    def __repr__(self):
        return (f"SampleSet(scheme={self.scheme!r}, seed={self.seed}, count={self.count}, "
                f"slots={self.slots}, shape={self.shape})")


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InputError("seed must be a 64-bit unsigned integer")
    return seed


def _check_positive(value, name) -> int:
    value = int(value)
    if value < 1:
        raise InputError(f"{name} must be a positive integer")
    return value


@dataclass
class DefectStatistics:
    """Max and mean of a defect over the evaluated samples.

    ``argmax_witness`` is the input tuple attaining ``max_defect`` (``None``
    when no sample was evaluated); ``skipped`` counts samples removed by an
    exclusion mask.
    """

    max_defect: float
    mean_defect: float
    argmax_witness: Optional[tuple]
    evaluated: int
    skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "max_defect": self.max_defect,
            "mean_defect": self.mean_defect,
            "argmax_witness": _witness_to_json(self.argmax_witness),
            "evaluated": self.evaluated,
            "skipped": self.skipped,
        }


def _witness_to_json(w):
    if w is None:
        return None
    return [np.asarray(p).tolist() for p in w]


def _evaluate(fn, args, label):
    """Call ``fn`` on the batch; on failure locate the first offending sample."""
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(fn(*args), dtype=float)
    except Exception as exc:
        n = len(args[0]) if args else 0
        for i in range(n):
            point = tuple(a[i : i + 1] for a in args)
            try:
                with np.errstate(all="ignore"):
                    fn(*point)
            except Exception as inner:
                raise EvaluationError(f"{label} failed at sample {i}: {inner}",
                                      witness=tuple(a[i] for a in args)) from inner
        raise EvaluationError(f"{label} failed: {exc}") from exc
    return out


def defect(f: Callable, g: Callable, samples, d: Metric, arity: Optional[int] = None,
           mask: Optional[np.ndarray] = None) -> DefectStatistics:
    """Measure ``d(f(p), g(p))`` over sample tuples ``p``.

    ``f`` and ``g`` take ``arity`` batched arguments (the first ``arity``
    sample slots) and return batched outputs. ``samples`` is a SampleSet or a
    list of batches. ``mask`` (boolean, per sample) restricts the sweep.
    """
    args = samples.variables(arity) if isinstance(samples, SampleSet) else list(samples)
    n = len(args[0]) if args else 0
    skipped = 0
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        skipped = int(n - mask.sum())
        args = [a[mask] for a in args]
        n = len(args[0]) if args else 0
    if n == 0:
        return DefectStatistics(0.0, 0.0, None, 0, skipped)

    fa = _evaluate(f, args, "left expression")
    ga = _evaluate(g, args, "right expression")
    fa, ga = np.broadcast_arrays(fa, ga)
    if fa.ndim == 0 or fa.shape[0] != n:
        fa = np.broadcast_to(fa, (n,) + fa.shape)
        ga = np.broadcast_to(ga, (n,) + ga.shape)
    bad = ~(np.isfinite(fa).reshape(n, -1).all(axis=1) & np.isfinite(ga).reshape(n, -1).all(axis=1))
    if bad.any():
        i = int(np.argmax(bad))
        raise EvaluationError(f"non-finite output at sample {i}", witness=tuple(a[i] for a in args))

    dist = d.batch(fa, ga, fa.ndim - 1)
    i = int(np.argmax(dist))
    witness = tuple(np.array(a[i]) for a in args)
    return DefectStatistics(float(dist[i]), float(np.mean(dist)), witness, n, skipped)


def witness_defect(f: Callable, g: Callable, stats: DefectStatistics, d: Metric) -> float:
    """Re-evaluate the defect at ``stats.argmax_witness`` as a batch of one."""
    args = [np.asarray(w)[None] for w in stats.argmax_witness]
    fa = np.asarray(f(*args), dtype=float)
    ga = np.asarray(g(*args), dtype=float)
    fa, ga = np.broadcast_arrays(fa, ga)
    return float(d.batch(fa, ga, fa.ndim - 1).reshape(-1)[0])


def estimate_lipschitz(op: Callable, samples: SampleSet, d: Metric, trials: int) -> float:
    """Sampled lower bound on the Lipschitz constant of a binary operation.

    Uses ``trials`` random pairs of sample tuples ``(x, y)``, ``(x', y')``
    drawn from slots 0 and 1, and returns the max of
    ``d(op(x, y), op(x', y')) / (d(x, x') + d(y, y'))`` over pairs with a
    nonzero denominator. Not a certified bound.
    """
    trials = _check_positive(trials, "trials")
    if samples.count < 2:
        raise InputError("need at least two samples")
    x, y = samples.variables(2)
    rng = np.random.default_rng([samples.seed, 0x11F5])
    i = rng.integers(0, samples.count, size=trials)
    j = rng.integers(0, samples.count, size=trials)
    ndim = x.ndim - 1
    den = d.batch(x[i], x[j], ndim) + d.batch(y[i], y[j], ndim)
    keep = den > 0
    if not keep.any():
        raise EstimationError("all sampled pairs are degenerate")
    i, j, den = i[keep], j[keep], den[keep]
    oi = np.asarray(op(x[i], y[i]), dtype=float)
    oj = np.asarray(op(x[j], y[j]), dtype=float)
    oi, oj = np.broadcast_arrays(oi, oj)
    if oi.ndim == 0 or oi.shape[0] != len(i):
        return 0.0
    num = d.batch(oi, oj, oi.ndim - 1)
    return float(np.max(num / den))

"""Fuzzy sets, t-norms and their relation to similarity structures.

A fuzzy set is a carrier with a membership function ``mu`` into [0, 1].  Its
induced similarity is ``s(a, b) = T(mu(a), mu(b))`` with dissimilarity
``d = 1 - s``.  ``d`` is generally not a metric (``d(a, a) > 0`` whenever
``mu(a) < 1``), so only the epsilon bounds are checked on it.

Finite carriers are element lists of numbers, so every check on them can be
exhaustive.  Binary operations are vectorised callables ``op(x, y)``; use
:func:`tabulated` to turn a Cayley table into one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .core import Metric, SampleSet, similarity_from_metric
from .errors import ClosureError, DomainError, InputError

TNORM_KINDS = ("minimum", "product", "lukasiewicz")
LAW_TOLERANCE = 1e-12


# -- t-norms ----------------------------------------------------------------


def _unit_interval(*values):
    arrs = [np.asarray(v, dtype=float) for v in values]
    for a in arrs:
        if np.any(~np.isfinite(a)) or np.any(a < 0.0) or np.any(a > 1.0):
            raise DomainError("t-norm arguments must lie in [0, 1]")
    return arrs


@dataclass(frozen=True)
class TNorm:
    kind: str = "minimum"

    def __post_init__(self):
        if self.kind not in TNORM_KINDS:
            raise InputError(f"unknown t-norm {self.kind!r}; expected one of {TNORM_KINDS}")

    def __call__(self, a, b):
        a, b = _unit_interval(a, b)
        if self.kind == "minimum":
            out = np.minimum(a, b)
        elif self.kind == "product":
            out = a * b
        else:
            out = np.clip(a + b - 1.0, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def reduce(self, *values):
        """Left-nested ``T(T(v1, v2), v3) ...``; well defined since t-norms are associative."""
        if not values:
            return 1.0
        acc = values[0]
        _unit_interval(acc)
        for v in values[1:]:
            acc = self(acc, v)
        return acc


BUILTIN_TNORMS = tuple(TNorm(k) for k in TNORM_KINDS)


def tnorm_eval(t: TNorm, a, b):
    return t(a, b)


def check_tnorm_laws(t: TNorm, step: float = 0.01) -> Dict[str, float]:
    """Worst violation of each t-norm law on a ``step`` grid over [0, 1].

    Boundary ``T(a, 1) = a``, commutativity, monotonicity in each argument,
    associativity (on all grid triples) and range.
    """
    n = int(round(1.0 / step)) + 1
    g = np.linspace(0.0, 1.0, n)
    a, b = np.meshgrid(g, g, indexing="ij")
    tab = t(a, b)
    x, y, z = g[:, None, None], g[None, :, None], g[None, None, :]
    assoc = np.abs(t(t(x, y), z) - t(x, t(y, z)))
    return {
        "boundary": float(np.max(np.abs(t(g, np.ones_like(g)) - g))),
        "commutativity": float(np.max(np.abs(tab - tab.T))),
        # rows/columns must be nondecreasing
        "monotonicity": 0.0 + float(max(np.max(-np.diff(tab, axis=0), initial=0.0),
                                  np.max(-np.diff(tab, axis=1), initial=0.0), 0.0)),
        "associativity": float(np.max(assoc)),
        "range": 0.0 + float(max(np.max(-tab, initial=0.0), np.max(tab - 1.0, initial=0.0), 0.0)),
    }


# -- fuzzy sets -------------------------------------------------------------


def tabulated(elements: Sequence[float], table) -> Callable:
    """Vectorised binary operation from a Cayley table.

    ``table`` is a square nested list (``table[i][j] = e_i * e_j``) or a dict
    ``{(a, b): c}``.  Looking up a pair outside the element list raises
    :class:`ClosureError`.
    """
    elems = np.asarray(list(elements), dtype=float)
    k = len(elems)
    if isinstance(table, dict):
        grid = np.full((k, k), np.nan)
        pos = {float(e): i for i, e in enumerate(elems)}
        for (p, q), r in table.items():
            grid[pos[float(p)], pos[float(q)]] = r
    else:
        grid = np.asarray(table, dtype=float)
    if grid.shape != (k, k):
        raise InputError(f"operation table must be {k}x{k}")
    if np.isnan(grid).any():
        raise InputError("operation table is incomplete")

    def op(x, y):
        return grid[_index(elems, x), _index(elems, y)]

    return op


def _index(elems: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    order = np.argsort(elems)
    srt = elems[order]
    pos = np.clip(np.searchsorted(srt, x), 0, len(srt) - 1)
    hit = srt[pos] == x
    if not np.all(hit):
        bad = x[~hit] if x.ndim else x
        raise ClosureError(f"value {np.asarray(bad).ravel()[0]:g} is not a carrier element")
    return order[pos]


@dataclass
class FuzzySet:
    """A carrier with a membership function.

    Either ``elements`` with matching ``memberships`` (a finite, tabulated
    fuzzy set) or a vectorised callable ``membership`` on a box
    ``(low, high)``.
    """

    elements: Optional[Sequence[float]] = None
    memberships: Optional[Sequence[float]] = None
    membership: Optional[Callable] = None
    box: Optional[Tuple[float, float]] = None
    name: str = ""

    def __post_init__(self):
        if self.elements is not None:
            self.elements = np.asarray(list(self.elements), dtype=float)
            if len(np.unique(self.elements)) != len(self.elements):
                raise InputError("carrier elements must be distinct")
            if self.memberships is None:
                if self.membership is None:
                    raise InputError("finite fuzzy set needs memberships or a membership function")
                self.memberships = np.asarray(self.membership(self.elements), dtype=float)
            self.memberships = np.asarray(list(self.memberships), dtype=float)
            if self.memberships.shape != self.elements.shape:
                raise InputError("one membership degree per element is required")
            _check_degrees(self.memberships)
        elif self.membership is None:
            raise InputError("fuzzy set needs an element list or a membership function")

    @property
    def finite(self) -> bool:
        return self.elements is not None

    @property
    def tabulated(self) -> bool:
        """True when membership is only known on the element list."""
        return self.finite and self.membership is None

    def mu(self, x):
        x = np.asarray(x, dtype=float)
        if self.tabulated:
            out = self.memberships[_index(self.elements, x)]
        else:
            out = np.asarray(self.membership(x), dtype=float)
            _check_degrees(out)
        return float(out) if out.ndim == 0 else out

    def samples(self, slots: int = 3, seed: Optional[int] = None, count: Optional[int] = None) -> SampleSet:
        """All ``slots``-tuples of a finite carrier, or seeded uniform tuples from the box."""
        if self.finite:
            return SampleSet.exhaustive(self.elements, slots)
        if self.box is None or seed is None or count is None:
            raise InputError("a box fuzzy set needs box, seed and count to sample")
        return SampleSet(seed, self.box[0], self.box[1], count, slots)

    def describe(self) -> dict:
        if self.finite:
            return {"elements": self.elements.tolist(), "memberships": self.memberships.tolist()}
        return {"box": list(self.box) if self.box else None, "membership": self.name}


def _check_degrees(mu):
    mu = np.asarray(mu, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(mu < 0.0) or np.any(mu > 1.0):
        raise DomainError("membership degrees must lie in [0, 1]")


def crisp(elements: Sequence[float], members: Sequence[float]) -> FuzzySet:
    """Indicator of the subset ``members``."""
    members = set(float(m) for m in members)
    return FuzzySet(elements, [1.0 if float(e) in members else 0.0 for e in elements])


# -- induced similarity -----------------------------------------------------


@dataclass
class InducedSimilarity:
    source: FuzzySet
    tnorm: TNorm

    def s(self, a, b):
        return self.tnorm(self.source.mu(a), self.source.mu(b))

    def d(self, a, b):
        out = 1.0 - np.asarray(self.s(a, b), dtype=float)
        return float(out) if out.ndim == 0 else out

    def metric(self) -> Metric:
        """``d`` wrapped for the defect engine (a dissimilarity, not a metric)."""
        return Metric.custom(self.d)


def embed_fuzzy(fs: FuzzySet, t: TNorm) -> InducedSimilarity:
    return InducedSimilarity(fs, t)


def _apply(op: Callable, fs: FuzzySet, x, y):
    out = np.asarray(op(x, y), dtype=float)
    if fs.tabulated:
        inside = np.isin(out, fs.elements)
        if not np.all(inside):
            i = int(np.argmin(inside.ravel()))
            raise ClosureError(f"operation leaves the carrier: {np.ravel(x)[i]:g} * {np.ravel(y)[i]:g}"
                               f" = {out.ravel()[i]:g}")
    return out


def epsilon_from_degrees(t: TNorm, mu_ab, mu_c, mu_a, mu_bc):
    """``1 - T(T(mu(a*b), mu(c)), T(mu(a), mu(b*c)))``."""
    out = 1.0 - np.asarray(t(t(mu_ab, mu_c), t(mu_a, mu_bc)), dtype=float)
    return float(out) if out.ndim == 0 else out


def derived_epsilon(fs: FuzzySet, t: TNorm, op: Callable, a, b, c):
    """Tolerance for the association defect of ``(a, b, c)`` implied by the fuzzy axioms."""
    ab = _apply(op, fs, a, b)
    bc = _apply(op, fs, b, c)
    return epsilon_from_degrees(t, fs.mu(ab), fs.mu(c), fs.mu(a), fs.mu(bc))


def nominal_epsilon(fs: FuzzySet, t: TNorm, a, b, c):
    """``1 - T(mu(a), mu(b), mu(c))`` by left nesting."""
    out = 1.0 - np.asarray(t.reduce(fs.mu(a), fs.mu(b), fs.mu(c)), dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass
class BoundCheck:
    """Per-triple comparison of ``d((a*b)*c, a*(b*c))`` against a tolerance."""

    holds: bool
    triples: int
    violations: int
    worst_margin: float  # min of (tolerance - defect); negative when violated
    witness: Optional[tuple]
    max_defect: float

    def to_dict(self) -> dict:
        return {"holds": self.holds, "triples": self.triples, "violations": self.violations,
                "worst_margin": self.worst_margin, "max_defect": self.max_defect,
                "witness": None if self.witness is None else [float(w) for w in self.witness]}


def _bound_check(a, b, c, defect, tol) -> BoundCheck:
    margin = np.asarray(tol, dtype=float) - np.asarray(defect, dtype=float)
    bad = margin < -LAW_TOLERANCE
    i = int(np.argmin(margin))
    return BoundCheck(not bad.any(), int(margin.size), int(bad.sum()), float(margin[i]),
                      (a[i], b[i], c[i]), float(np.max(defect)))


def check_embedding_bound(fs: FuzzySet, t: TNorm, op: Callable,
                          samples: Optional[SampleSet] = None) -> BoundCheck:
    """Induced association defect against :func:`derived_epsilon` on every triple.

    Finite carriers are scanned exhaustively when ``samples`` is omitted.
    """
    samples = samples or fs.samples(3)
    a, b, c = samples.variables(3)
    ind = embed_fuzzy(fs, t)
    left = _apply(op, fs, _apply(op, fs, a, b), c)
    right = _apply(op, fs, a, _apply(op, fs, b, c))
    return _bound_check(a, b, c, ind.d(left, right), derived_epsilon(fs, t, op, a, b, c))


# -- Rosenfeld-style fuzzy associativity -----------------------------------


@dataclass
class RosenfeldReport:
    holds: bool
    triples: int
    left_violations: int   # mu((a*b)*c) >= T(mu(a*b), mu(c))
    right_violations: int  # mu(a*(b*c)) >= T(mu(a), mu(b*c))
    worst_margin: float
    witness: Optional[tuple]

    def to_dict(self) -> dict:
        return {"holds": self.holds, "triples": self.triples, "left_violations": self.left_violations,
                "right_violations": self.right_violations, "worst_margin": self.worst_margin,
                "witness": None if self.witness is None else [float(w) for w in self.witness]}


def check_rosenfeld(fs: FuzzySet, op: Callable, t: TNorm,
                    samples: Optional[SampleSet] = None) -> RosenfeldReport:
    """Check both fuzzy associativity inequalities on every sampled triple.

    The witness is the first triple (in sample order) attaining the worst margin.
    """
    samples = samples or fs.samples(3)
    a, b, c = samples.variables(3)
    ab, bc = _apply(op, fs, a, b), _apply(op, fs, b, c)
    left = fs.mu(_apply(op, fs, ab, c)) - t(fs.mu(ab), fs.mu(c))
    right = fs.mu(_apply(op, fs, a, bc)) - t(fs.mu(a), fs.mu(bc))
    margin = np.minimum(left, right)
    lv = left < -LAW_TOLERANCE
    rv = right < -LAW_TOLERANCE
    i = int(np.argmin(margin))
    return RosenfeldReport(not (lv.any() or rv.any()), int(margin.size), int(lv.sum()), int(rv.sum()),
                           float(margin[i]), (a[i], b[i], c[i]))


# -- duality ----------------------------------------------------------------


def similarity_of(metric: Metric, mode: str = "bounded") -> Callable:
    """``s(x, y)`` from a metric on scalar points."""

    def s(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return similarity_from_metric(metric.batch(x, y, 0), mode)

    return s


def duality_membership(s: Callable, e) -> Callable:
    """``mu(a) = s(a, e)``: the fuzzy set seen from a reference element."""

    def mu(a):
        a = np.asarray(a, dtype=float)
        out = np.asarray(s(a, np.full_like(a, e)), dtype=float)
        _check_degrees(out)
        return float(out) if out.ndim == 0 else out

    return mu


def check_duality(desc, e, samples: SampleSet, mode: Optional[str] = None) -> BoundCheck:
    """``|mu((a*b)*c) - mu(a*(b*c))| <= d((a*b)*c, a*(b*c))`` with ``mu = s(., e)``.

    Bounding each triple by its own association defect means the reported
    ``max_defect`` is the structure's associativity defect over the samples.
    """
    if desc.carrier.shape != ():
        raise InputError("duality checks are for scalar carriers")
    op = desc.ops.mul or desc.ops.add
    if op is None:
        raise InputError("structure has no binary operation")
    mode = mode or desc.similarity_mode
    mu = duality_membership(similarity_of(desc.metric, mode), e)
    a, b, c = samples.variables(3)
    left, right = op(op(a, b), c), op(a, op(b, c))
    gap = np.abs(mu(left) - mu(right))
    dist = desc.metric.batch(left, right, 0)
    chk = _bound_check(a, b, c, gap, dist)
    chk.max_defect = float(np.max(dist))
    return chk


def crisp_reference_similarity(t: TNorm) -> Callable:
    """``s(a, b) = T(mu_b(a), mu_a(b))`` with crisp reference memberships ``mu_e = [x == e]``.

    Every pair is seen through its own reference element, which recovers the
    discrete similarity from crisp fuzzy sets.
    """

    def s(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return t((x == y).astype(float), (y == x).astype(float))

    return s


def crisp_reference_metric(t: TNorm = TNorm("minimum")) -> Metric:
    s = crisp_reference_similarity(t)
    return Metric.custom(lambda x, y: 1.0 - np.asarray(s(x, y), dtype=float))


# -- factorisation ----------------------------------------------------------


def find_factorization(elements: Sequence[float], s: Callable, tnorms: Sequence[TNorm] = BUILTIN_TNORMS,
                       levels: Optional[Sequence[float]] = None, tol: float = 1e-9):
    """Search memberships on ``levels`` and t-norms with ``T(mu(a), mu(b)) = s(a, b)`` for all pairs.

    Returns ``(tnorm, memberships)`` for the first match or ``None``.  The
    search is exhaustive over ``len(levels) ** len(elements)`` membership
    vectors per t-norm.
    """
    elems = np.asarray(list(elements), dtype=float)
    k = len(elems)
    levels = np.linspace(0.0, 1.0, 11) if levels is None else np.asarray(levels, dtype=float)
    if len(levels) ** k > 5_000_000:
        raise InputError("factorisation search space too large")
    ii, jj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    target = np.asarray(s(elems[ii], elems[jj]), dtype=float).reshape(-1)
    combos = np.array(list(itertools.product(levels, repeat=k)))  # (m, k)
    for t in tnorms:
        vals = t(combos[:, ii.reshape(-1)], combos[:, jj.reshape(-1)])
        ok = np.all(np.abs(vals - target) <= tol, axis=1)
        if ok.any():
            return t, combos[int(np.argmax(ok))].tolist()
    return None

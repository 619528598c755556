"""Axiom catalog and auditor for the similarity-structure hierarchy.

Axioms are data: each one is a pair of expression trees over the symbols of an
:class:`OperationTable` plus the number of free carrier variables (and free
scalars, for module and Lie-algebra axioms).  The same catalog drives
auditing, collapse sweeps and ``--list-kinds`` rendering.

Single-operation kinds (semigroup through abelian-group) use the ``mul``,
``one`` and ``inv`` slots whatever the operation is called in the instance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import DefectStatistics, Metric, SampleSet, default_metric, defect
from .errors import ConfigurationError, EvaluationError, InputError

KINDS = (
    "semigroup",
    "monoid",
    "abelian-monoid",
    "group",
    "abelian-group",
    "semiring",
    "ring",
    "field",
    "module",
    "vector-space",
    "lie-algebra",
)

OP_SYMBOLS = ("add", "mul", "zero", "one", "neg", "inv", "scalar_action", "bracket")
CONSTANTS = ("zero", "one")


# -- expression trees -------------------------------------------------------


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Scalar:
    index: int


@dataclass(frozen=True)
class Const:
    symbol: str


@dataclass(frozen=True)
class Apply:
    symbol: str
    args: Tuple["Expr", ...]


Expr = Union[Var, Scalar, Const, Apply]

_VAR_NAMES = "xyzw"
_SCALAR_NAMES = "abrs"


def _ap(symbol, *args) -> Apply:
    return Apply(symbol, tuple(args))


def symbols(expr: Expr) -> set:
    if isinstance(expr, Const):
        return {expr.symbol}
    if isinstance(expr, Apply):
        out = {expr.symbol}
        for a in expr.args:
            out |= symbols(a)
        return out
    return set()


def render(expr: Expr) -> str:
    """Human-readable infix form, e.g. ``(x * y) * z``."""
    if isinstance(expr, Var):
        return _VAR_NAMES[expr.index]
    if isinstance(expr, Scalar):
        return _SCALAR_NAMES[expr.index]
    if isinstance(expr, Const):
        return {"zero": "0", "one": "e"}[expr.symbol]
    args = [render(a) for a in expr.args]
    wrap = [f"({s})" if isinstance(a, Apply) and a.symbol in ("add", "mul") else s
            for s, a in zip(args, expr.args)]
    if expr.symbol == "add":
        return f"{wrap[0]} + {wrap[1]}"
    if expr.symbol == "mul":
        return f"{wrap[0]} * {wrap[1]}"
    if expr.symbol == "neg":
        return f"-({args[0]})"
    if expr.symbol == "inv":
        return f"({args[0]})^-1"
    if expr.symbol == "scalar_action":
        return f"{args[0]}·{wrap[1]}"
    if expr.symbol == "bracket":
        return f"[{args[0]}, {args[1]}]"
    return f"{expr.symbol}({', '.join(args)})"


@dataclass(frozen=True)
class Axiom:
    """``d(lhs, rhs) <= eps`` quantified over ``arity`` carrier variables."""

    name: str
    lhs: Expr
    rhs: Expr
    arity: int
    scalar_arity: int = 0

    @property
    def symbols(self) -> set:
        return symbols(self.lhs) | symbols(self.rhs)

    def render(self) -> str:
        return f"d({render(self.lhs)}, {render(self.rhs)}) <= eps"


# -- the catalog ------------------------------------------------------------

x, y, z = Var(0), Var(1), Var(2)
a, b = Scalar(0), Scalar(1)


def _single_op(prefix: str, op: str, unit: str, inverse: str) -> Dict[str, Axiom]:
    p = f"{prefix}-" if prefix else ""
    e = Const(unit)
    return {
        "associativity": Axiom(f"{p}associativity", _ap(op, _ap(op, x, y), z), _ap(op, x, _ap(op, y, z)), 3),
        "commutativity": Axiom(f"{p}commutativity", _ap(op, x, y), _ap(op, y, x), 2),
        "left-identity": Axiom(f"{p}left-identity", _ap(op, e, x), x, 1),
        "right-identity": Axiom(f"{p}right-identity", _ap(op, x, e), x, 1),
        "left-inverse": Axiom(f"{p}left-inverse", _ap(op, _ap(inverse, x), x), e, 1),
        "right-inverse": Axiom(f"{p}right-inverse", _ap(op, x, _ap(inverse, x)), e, 1),
    }


_MUL = _single_op("", "mul", "one", "inv")
_RMUL = _single_op("mul", "mul", "one", "inv")
_RADD = _single_op("add", "add", "zero", "neg")

_DISTRIBUTIVITY = Axiom(
    "distributivity", _ap("mul", x, _ap("add", y, z)), _ap("add", _ap("mul", x, y), _ap("mul", x, z)), 3
)
_SCALAR_DISTRIBUTIVITY = Axiom(
    "scalar-distributivity",
    _ap("scalar_action", a, _ap("add", x, y)),
    _ap("add", _ap("scalar_action", a, x), _ap("scalar_action", a, y)),
    2,
    1,
)


def _bracket(u, v):
    return _ap("bracket", u, v)


def _lincomb(u, v):
    return _ap("add", _ap("scalar_action", a, u), _ap("scalar_action", b, v))


_LIE = [
    Axiom("left-bilinearity", _bracket(_lincomb(x, y), z), _lincomb(_bracket(x, z), _bracket(y, z)), 3, 2),
    Axiom("right-bilinearity", _bracket(z, _lincomb(x, y)), _lincomb(_bracket(z, x), _bracket(z, y)), 3, 2),
    Axiom("antisymmetry", _bracket(x, y), _ap("neg", _bracket(y, x)), 2),
    Axiom(
        "jacobi",
        _ap("add", _ap("add", _bracket(x, _bracket(y, z)), _bracket(y, _bracket(z, x))), _bracket(z, _bracket(x, y))),
        Const("zero"),
        3,
    ),
]


def _build_catalogs() -> Dict[str, List[Axiom]]:
    monoid = [_MUL["associativity"], _MUL["left-identity"], _MUL["right-identity"]]
    group = monoid + [_MUL["left-inverse"], _MUL["right-inverse"]]
    add_monoid = [_RADD["associativity"], _RADD["commutativity"], _RADD["left-identity"], _RADD["right-identity"]]
    add_group = add_monoid + [_RADD["left-inverse"], _RADD["right-inverse"]]
    semiring = add_monoid + [_RMUL["associativity"], _RMUL["left-identity"], _RMUL["right-identity"], _DISTRIBUTIVITY]
    ring = semiring + [_RADD["left-inverse"], _RADD["right-inverse"]]
    field_ = ring + [_RMUL["commutativity"], _RMUL["left-inverse"], _RMUL["right-inverse"]]
    module = add_group + [_SCALAR_DISTRIBUTIVITY]
    return {
        "semigroup": [_MUL["associativity"]],
        "monoid": monoid,
        "abelian-monoid": monoid + [_MUL["commutativity"]],
        "group": group,
        "abelian-group": group + [_MUL["commutativity"]],
        "semiring": semiring,
        "ring": ring,
        "field": field_,
        "module": module,
        "vector-space": list(module),
        "lie-algebra": list(_LIE),
    }


_CATALOGS = _build_catalogs()


def axiom_catalog(kind: str) -> List[Axiom]:
    """Ordered axiom list for a structure kind."""
    try:
        return list(_CATALOGS[kind])
    except KeyError:
        raise InputError(f"unknown structure kind {kind!r}; expected one of {KINDS}") from None


def required_symbols(kind: str) -> set:
    out = set()
    for ax in axiom_catalog(kind):
        out |= ax.symbols
    return out


# -- descriptors ------------------------------------------------------------


@dataclass
class OperationTable:
    """Operations of a similarity structure; all are vectorised over a leading batch axis.

    ``exclusions`` maps an operation symbol to a predicate returning a
    boolean mask of batch points where that (partial) operation is undefined.
    """

    add: Optional[Callable] = None
    mul: Optional[Callable] = None
    zero: Optional[object] = None
    one: Optional[object] = None
    neg: Optional[Callable] = None
    inv: Optional[Callable] = None
    scalar_action: Optional[Callable] = None
    bracket: Optional[Callable] = None
    exclusions: Dict[str, Callable] = field(default_factory=dict)

    def has(self, symbol: str) -> bool:
        return getattr(self, symbol, None) is not None


@dataclass
class Carrier:
    """A box ``[low, high]`` of points of a given shape, optionally a finite element list."""

    low: np.ndarray
    high: np.ndarray
    shape: Tuple[int, ...] = ()
    elements: Optional[np.ndarray] = None

    @classmethod
    def box(cls, low, high, shape=()) -> "Carrier":
        shape = tuple(shape)
        lo = np.broadcast_to(np.asarray(low, dtype=float), shape).copy()
        hi = np.broadcast_to(np.asarray(high, dtype=float), shape).copy()
        if np.any(lo > hi):
            raise InputError("carrier box has low > high")
        return cls(lo, hi, shape)

    @classmethod
    def finite(cls, elements: Sequence[float]) -> "Carrier":
        elems = np.asarray(list(elements), dtype=float)
        return cls(np.asarray(elems.min()), np.asarray(elems.max()), (), elems)

    def contains(self, points, atol: float = 1e-12) -> np.ndarray:
        """Per-sample membership mask for a batch ``(n, *shape)``."""
        points = np.asarray(points, dtype=float)
        if self.elements is not None:
            return np.isin(points, self.elements)
        axes = tuple(range(1, points.ndim))
        inside = (points >= self.low - atol) & (points <= self.high + atol)
        return np.all(inside, axis=axes) if axes else inside

    def excursion(self, points, metric: Metric) -> np.ndarray:
        """Distance from each point to the carrier (0 inside)."""
        points = np.asarray(points, dtype=float)
        ndim = points.ndim - 1
        if self.elements is not None:
            dists = np.stack([metric.batch(points, np.full_like(points, e), ndim) for e in self.elements])
            return dists.min(axis=0)
        projected = np.clip(points, self.low, self.high)
        return metric.batch(points, projected, ndim)

    def describe(self) -> dict:
        if self.elements is not None:
            return {"elements": self.elements.tolist()}
        if self.shape == ():
            return {"box": [float(self.low), float(self.high)]}
        return {"shape": list(self.shape), "low": self.low.tolist(), "high": self.high.tolist()}


@dataclass
class StructureDescriptor:
    """Executable form of a similarity-structure tuple."""

    kind: str
    carrier: Carrier
    eps: float
    ops: OperationTable
    metric: Optional[Metric] = None
    scalar_box: Tuple[float, float] = (-1.0, 1.0)
    similarity: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown structure kind {self.kind!r}; expected one of {KINDS}")
        if self.eps < 0:
            raise InputError("eps must be nonnegative")
        if self.metric is None:
            self.metric = default_metric(self.carrier.shape)
        self.validate()

    def validate(self):
        for ax in axiom_catalog(self.kind):
            for sym in sorted(ax.symbols):
                if not self.ops.has(sym):
                    raise ConfigurationError(
                        f"{self.kind} axiom {ax.name!r} needs operation {sym!r}, which is missing"
                    )

    @property
    def similarity_mode(self) -> str:
        """``bounded`` for the discrete metric, ``unbounded`` otherwise, unless set explicitly."""
        if self.similarity is not None:
            return self.similarity
        return "bounded" if self.metric.kind == "discrete" else "unbounded"

    def catalog(self) -> List[Axiom]:
        return axiom_catalog(self.kind)


# -- evaluation -------------------------------------------------------------


def evaluate(expr: Expr, desc: StructureDescriptor, variables: Sequence[np.ndarray],
             scalars: Optional[np.ndarray] = None) -> np.ndarray:
    """Evaluate an expression tree on batched variables."""
    n = len(variables[0])
    shape = desc.carrier.shape
    if isinstance(expr, Var):
        return variables[expr.index]
    if isinstance(expr, Scalar):
        return scalars[:, expr.index].reshape((n,) + (1,) * len(shape))
    if isinstance(expr, Const):
        return np.broadcast_to(np.asarray(getattr(desc.ops, expr.symbol), dtype=float), (n,) + shape)
    args = [evaluate(arg, desc, variables, scalars) for arg in expr.args]
    return np.asarray(getattr(desc.ops, expr.symbol)(*args), dtype=float)


def _exclusion_mask(expr: Expr, desc, variables, scalars) -> np.ndarray:
    n = len(variables[0])
    mask = np.zeros(n, dtype=bool)
    if isinstance(expr, Apply):
        pred = desc.ops.exclusions.get(expr.symbol)
        if pred is not None:
            arg = evaluate(expr.args[0], desc, variables, scalars)
            mask |= np.asarray(pred(arg), dtype=bool).reshape(n)
        for sub in expr.args:
            mask |= _exclusion_mask(sub, desc, variables, scalars)
    return mask


@dataclass
class AxiomResult:
    name: str
    stats: DefectStatistics
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {"axiom": self.name, "bound": self.bound, "pass": self.passed, **self.stats.to_dict()}


@dataclass
class AxiomDefectReport:
    kind: str
    eps: float
    results: List[AxiomResult]

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def certified_eps(self) -> float:
        """Smallest tolerance at which every audited axiom passes on these samples."""
        return max((r.stats.max_defect for r in self.results), default=0.0)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self) -> List[str]:
        return [r.name for r in self.results]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "eps": self.eps,
            "overall_pass": self.overall_pass,
            "certified_eps": self.certified_eps,
            "axioms": [r.to_dict() for r in self.results],
        }


def _check_samples(desc: StructureDescriptor, samples: SampleSet):
    if tuple(samples.shape) != tuple(desc.carrier.shape):
        raise ConfigurationError(
            f"sample point shape {samples.shape} does not match carrier shape {desc.carrier.shape}"
        )
    for i, batch in enumerate(samples.variables()):
        inside = desc.carrier.contains(batch)
        if not inside.all():
            j = int(np.argmin(inside))
            raise ConfigurationError(f"sample {j} slot {i} lies outside the carrier")


def audit_axiom(desc: StructureDescriptor, axiom: Axiom, samples: SampleSet) -> AxiomResult:
    """Measure a single axiom's defect; tuples in an exclusion set are skipped."""
    for sym in sorted(axiom.symbols):
        if not desc.ops.has(sym):
            raise ConfigurationError(f"axiom {axiom.name!r} needs operation {sym!r}, which is missing")
    variables = samples.variables(axiom.arity)
    scalars = samples.scalars(*desc.scalar_box, axiom.scalar_arity) if axiom.scalar_arity else None

    mask = None
    if desc.ops.exclusions:
        excluded = _exclusion_mask(axiom.lhs, desc, variables, scalars) | _exclusion_mask(
            axiom.rhs, desc, variables, scalars
        )
        if excluded.any():
            mask = ~excluded

    # scalars ride along as extra batched arguments so masks and witnesses cover them
    k = axiom.arity
    args = list(variables) + ([scalars[:, j] for j in range(axiom.scalar_arity)] if scalars is not None else [])

    def _split(vs):
        sc = np.stack(vs[k:], axis=1) if len(vs) > k else None
        return vs[:k], sc

    def lhs(*vs):
        return evaluate(axiom.lhs, desc, *_split(vs))

    def rhs(*vs):
        return evaluate(axiom.rhs, desc, *_split(vs))

    try:
        stats = defect(lhs, rhs, args, desc.metric, mask=mask)
    except EvaluationError as exc:
        raise EvaluationError(f"axiom {axiom.name!r}: {exc}", witness=exc.witness) from exc
    return AxiomResult(axiom.name, stats, desc.eps, stats.max_defect <= desc.eps)


def audit(desc: StructureDescriptor, samples: SampleSet, axioms: Optional[Sequence[str]] = None,
          jobs: int = 1) -> AxiomDefectReport:
    """Evaluate every axiom of ``desc.kind`` (or the named subset) on ``samples``.

    Parameters
    ----------
    desc : StructureDescriptor
    samples : SampleSet
        Must have at least as many slots as the largest axiom arity; every
        point must lie in the carrier.
    axioms : sequence of str, optional
        Restrict to these axiom names, kept in catalog order.
    jobs : int
        Evaluate axioms on a thread pool of this size. Results do not depend on it.
    """
    desc.validate()
    _check_samples(desc, samples)
    catalog = desc.catalog()
    if axioms is not None:
        wanted = set(axioms)
        unknown = wanted - {ax.name for ax in catalog}
        if unknown:
            raise InputError(f"{desc.kind} has no axiom(s) {sorted(unknown)}")
        catalog = [ax for ax in catalog if ax.name in wanted]
    if jobs > 1 and len(catalog) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda ax: audit_axiom(desc, ax, samples), catalog))
    else:
        results = [audit_axiom(desc, ax, samples) for ax in catalog]
    return AxiomDefectReport(desc.kind, desc.eps, results)


@dataclass
class ClosureReport:
    passed: bool
    worst_excursion: float
    witness: Optional[tuple]
    per_operation: Dict[str, float]

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "worst_excursion": self.worst_excursion,
            "witness": None if self.witness is None else [np.asarray(p).tolist() for p in self.witness],
            "per_operation": dict(self.per_operation),
        }


def check_closure(desc: StructureDescriptor, samples: SampleSet, output_box: Optional[Carrier] = None
                  ) -> ClosureReport:
    """Approximate closure: every sampled ``x op y`` lies within ``eps`` of the output box.

    The output box defaults to the carrier itself.
    """
    target = output_box if output_box is not None else desc.carrier
    u, v = samples.variables(2)
    worst, witness, per_op = 0.0, None, {}
    for sym in ("add", "mul"):
        fn = getattr(desc.ops, sym)
        if fn is None:
            continue
        out = np.asarray(fn(u, v), dtype=float)
        exc = target.excursion(out, desc.metric)
        i = int(np.argmax(exc))
        per_op[sym] = float(exc[i])
        if witness is None or exc[i] > worst:
            worst, witness = float(exc[i]), (np.array(u[i]), np.array(v[i]))
    return ClosureReport(worst <= desc.eps, worst, witness, per_op)


def describe_kinds() -> str:
    """Text listing of every kind and its axioms, for ``--list-kinds``."""
    lines = []
    for kind in KINDS:
        lines.append(f"{kind}:")
        for ax in axiom_catalog(kind):
            lines.append(f"  {ax.name:24s} {ax.render()}")
    return "\n".join(lines)

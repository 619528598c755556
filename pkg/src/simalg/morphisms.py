"""Morphisms between similarity structures.

A morphism is a map between carriers that does not decrease similarity and
commutes with the operations up to the target tolerance.  The checks here
are elementwise over samples; the category itself is never materialised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ROUNDING_SLACK, DefectStatistics, Metric, SampleSet, defect
from .errors import CompositionError, ConfigurationError, InputError, NotClassicalError
from .structures import StructureDescriptor, audit

CLASSICAL_TOLERANCE = 1e-12
HOM_OPERATIONS = ("add", "mul")


@dataclass
class MorphismDescriptor:
    source: StructureDescriptor
    target: StructureDescriptor
    map: Callable
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.map(x), dtype=float)


def identity_morphism(desc: StructureDescriptor) -> MorphismDescriptor:
    return MorphismDescriptor(desc, desc, lambda x: np.asarray(x, dtype=float), name="identity")


def compose(m1: MorphismDescriptor, m2: MorphismDescriptor) -> MorphismDescriptor:
    """``m2 . m1``: apply ``m1`` first."""
    if m1.target is not m2.source:
        raise CompositionError(
            f"cannot compose: target of {m1.name or 'first map'!r} is not the source of {m2.name or 'second map'!r}"
        )
    f, g = m1.map, m2.map
    return MorphismDescriptor(m1.source, m2.target, lambda x: g(f(x)), name=f"{m2.name}.{m1.name}")


# -- similarity preservation ------------------------------------------------


def _similarity(desc: StructureDescriptor, x, y, mode: str) -> np.ndarray:
    ndim = len(desc.carrier.shape)
    dist = desc.metric.batch(x, y, ndim)
    if mode == "bounded":
        # 1 - d on the truncated metric min(d, 1)
        return 1.0 - np.minimum(dist, 1.0)
    return 1.0 / (1.0 + dist)


def _shared_mode(m: MorphismDescriptor) -> str:
    a, b = m.source.similarity_mode, m.target.similarity_mode
    if a != b:
        raise ConfigurationError(f"source similarity is {a!r} but target similarity is {b!r}")
    return a


def preservation_margins(m: MorphismDescriptor, samples: SampleSet) -> np.ndarray:
    """Per-pair ``s_B(f(x), f(y)) - s_A(x, y)`` on sample slots 0 and 1."""
    mode = _shared_mode(m)
    x, y = samples.variables(2)
    return _similarity(m.target, m(x), m(y), mode) - _similarity(m.source, x, y, mode)


@dataclass
class PreservationResult:
    passed: bool
    worst_margin: float
    witness: Optional[tuple]
    pairs: int

    def to_dict(self) -> dict:
        return {"pass": self.passed, "worst_margin": self.worst_margin, "pairs": self.pairs,
                "witness": None if self.witness is None else [np.asarray(w).tolist() for w in self.witness]}


def check_similarity_preserving(m: MorphismDescriptor, samples: SampleSet) -> PreservationResult:
    """``s_A(x, y) <= s_B(f(x), f(y))`` on every sampled pair; reports the worst margin."""
    margins = preservation_margins(m, samples)
    x, y = samples.variables(2)
    i = int(np.argmin(margins))
    worst = float(margins[i])
    return PreservationResult(worst >= -ROUNDING_SLACK, worst, (np.array(x[i]), np.array(y[i])), len(margins))


# -- homomorphism defects ---------------------------------------------------


@dataclass
class MorphismReport:
    similarity_preserving: PreservationResult
    hom_defect_add: Optional[DefectStatistics]
    hom_defect_mul: Optional[DefectStatistics]
    eps: float
    passes_at_eps: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "passes_at_eps": self.passes_at_eps,
            "similarity_preserving": self.similarity_preserving.to_dict(),
            "hom_defect_add": None if self.hom_defect_add is None else self.hom_defect_add.to_dict(),
            "hom_defect_mul": None if self.hom_defect_mul is None else self.hom_defect_mul.to_dict(),
        }


def hom_defect(m: MorphismDescriptor, op: str, samples: SampleSet) -> DefectStatistics:
    """``d_B(f(x op_A y), f(x) op_B f(y))`` over sample pairs."""
    src, tgt = getattr(m.source.ops, op), getattr(m.target.ops, op)
    if src is None or tgt is None:
        raise ConfigurationError(f"operation {op!r} is missing on the {'source' if src is None else 'target'}")
    return defect(lambda x, y: m(src(x, y)), lambda x, y: tgt(m(x), m(y)), samples, m.target.metric, arity=2)


def check_approx_homomorphism(m: MorphismDescriptor, eps: Optional[float], samples: SampleSet
                              ) -> MorphismReport:
    """Homomorphism defects for every operation both sides expose.

    ``eps`` defaults to the target's tolerance.  The map passes iff it
    preserves similarity and every defect is ``<= eps`` (plus binary64
    rounding slack).  An operation present on only one side is a
    configuration error.
    """
    eps = m.target.eps if eps is None else float(eps)
    if eps < 0:
        raise InputError("eps must be nonnegative")
    stats = {}
    for op in HOM_OPERATIONS:
        has_src, has_tgt = m.source.ops.has(op), m.target.ops.has(op)
        if has_src != has_tgt:
            side = "target" if has_src else "source"
            raise ConfigurationError(f"operation {op!r} is missing on the {side}")
        stats[op] = hom_defect(m, op, samples) if has_src else None
    if all(v is None for v in stats.values()):
        raise ConfigurationError("source and target share no binary operation")
    pres = check_similarity_preserving(m, samples)
    ok = pres.passed and all(v.max_defect <= eps + ROUNDING_SLACK for v in stats.values() if v is not None)
    return MorphismReport(pres, stats["add"], stats["mul"], eps, ok)


# -- classical embedding ----------------------------------------------------


def embed_classical(classical: StructureDescriptor, samples: SampleSet) -> StructureDescriptor:
    """Equip an exact structure with the discrete metric at eps = 0.

    The structure must be audited exact (every defect ``<= 1e-12``) on ``samples``.
    """
    report = audit(classical, samples)
    if report.certified_eps > CLASSICAL_TOLERANCE:
        worst = max(report.results, key=lambda r: r.stats.max_defect)
        raise NotClassicalError(f"axiom {worst.name!r} has defect {worst.stats.max_defect:.3g}; not classical")
    return StructureDescriptor(classical.kind, classical.carrier, 0.0, classical.ops, metric=Metric("discrete"),
                               scalar_box=classical.scalar_box, similarity="bounded",
                               name=f"{classical.name or classical.kind} (discrete)")


# -- map library ------------------------------------------------------------


def scaling_map(c: float) -> Callable:
    return lambda x: c * np.asarray(x, dtype=float)


def affine_map(a: float, b: float) -> Callable:
    return lambda x: a * np.asarray(x, dtype=float) + b


def mod_linear_map(c: int, k: int) -> Callable:
    return lambda x: np.mod(c * np.asarray(x, dtype=float), k)


def mod_power_map(p: int, k: int) -> Callable:
    return lambda x: np.mod(np.asarray(x, dtype=float) ** p, k)


def tabulated_map(table: dict) -> Callable:
    """Map given by ``{input: output}`` on a finite carrier."""
    pairs = sorted((float(k), float(v)) for k, v in table.items())
    keys = np.asarray([k for k, _ in pairs], dtype=float)
    vals = np.asarray([v for _, v in pairs], dtype=float)

    def f(x):
        x = np.asarray(x, dtype=float)
        pos = np.clip(np.searchsorted(keys, x), 0, len(keys) - 1)
        if not np.all(keys[pos] == x):
            raise InputError("tabulated map is undefined at a sampled point")
        return vals[pos]

    return f

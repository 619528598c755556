"""Empirical collapse: sweep eps, measure axiom defects, fit log-log rates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .core import SampleSet
from .errors import EvaluationError, InputError, SimAlgError
from .structures import Carrier, OperationTable, StructureDescriptor, audit

# Defects at or below this are rounding noise: excluded from fits.
ROUNDING_FLOOR = 1e-13
# A curve whose every defect is below this is an exact identity.
DEGENERATE_LEVEL = 1e-12
MIN_R_SQUARED = 0.9
MONOTONE_SLACK = 0.10
VERDICT_FACTOR = 10.0

DEFAULT_GRID = tuple(float(e) for e in np.geomspace(1e-1, 1e-6, 8))


def geometric_grid(start: float, stop: float, num: int = 8) -> List[float]:
    if not (start > stop > 0) or num < 2:
        raise InputError("grid must run from a larger to a smaller positive eps with >= 2 points")
    return [float(e) for e in np.geomspace(start, stop, num)]


@dataclass
class EpsilonFamily:
    """A structure family indexed by eps; ``constructor(0)`` is the classical limit."""

    constructor: Callable[[float], StructureDescriptor]
    name: str = ""
    default_grid: Sequence[float] = DEFAULT_GRID

    @property
    def classical_limit(self) -> StructureDescriptor:
        return self.constructor(0.0)

    def __call__(self, eps: float) -> StructureDescriptor:
        return self.constructor(eps)


@dataclass
class CollapseCurve:
    axiom: str
    eps: List[float]
    max_defect: List[float]
    mean_defect: List[float] = field(default_factory=list)

    def __post_init__(self):
        e = np.asarray(self.eps, dtype=float)
        if e.ndim != 1 or len(e) != len(self.max_defect):
            raise InputError("eps and max_defect must be equal-length lists")
        if np.any(e <= 0) or np.any(np.diff(e) >= 0):
            raise InputError("eps values must be positive and strictly decreasing")
        if np.any(np.asarray(self.max_defect) < 0):
            raise InputError("defects are nonnegative")
        if not self.mean_defect:
            self.mean_defect = [float("nan")] * len(self.eps)

    @property
    def degenerate(self) -> bool:
        return max(self.max_defect) <= DEGENERATE_LEVEL

    def to_rows(self) -> List[dict]:
        return [{"epsilon": e, "max_defect": m, "mean_defect": a}
                for e, m, a in zip(self.eps, self.max_defect, self.mean_defect)]

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, "degenerate": self.degenerate,
                "points": [[e, m] for e, m in zip(self.eps, self.max_defect)]}


@dataclass
class SlopeFit:
    """Least-squares line through ``(log eps, log defect)``.

    ``status`` is ``"rate"`` for a usable fit, ``"inconclusive"`` when too few
    points survive the rounding floor or r^2 < 0.9, and ``"exact-identity"``
    for degenerate curves (then slope and intercept are None).
    """

    slope: Optional[float]
    intercept: Optional[float]
    r_squared: Optional[float]
    points_used: int
    status: str

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "points_used": self.points_used, "status": self.status}


def fit_rate(curve: CollapseCurve) -> SlopeFit:
    """Empirical convergence order of a collapse curve."""
    if curve.degenerate:
        return SlopeFit(None, None, None, 0, "exact-identity")
    e = np.asarray(curve.eps, dtype=float)
    dfc = np.asarray(curve.max_defect, dtype=float)
    keep = dfc > ROUNDING_FLOOR
    used = int(keep.sum())
    if used < 3:
        return SlopeFit(None, None, None, used, "inconclusive")
    lx, ly = np.log(e[keep]), np.log(dfc[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    status = "rate" if r2 >= MIN_R_SQUARED else "inconclusive"
    return SlopeFit(float(slope), float(intercept), r2, used, status)


def _check_grid(grid):
    g = [float(e) for e in grid]
    if not g or any(e <= 0 for e in g) or any(b >= a for a, b in zip(g, g[1:])):
        raise InputError("eps grid must be positive and strictly decreasing")
    return g


def collapse_curves(family: EpsilonFamily, grid: Sequence[float], samples: SampleSet,
                    axioms: Optional[Sequence[str]] = None, jobs: int = 1) -> Dict[str, CollapseCurve]:
    """One curve per axiom; the same samples are reused at every eps."""
    grid = _check_grid(grid)
    rows: Dict[str, list] = {}
    for e in grid:
        try:
            report = audit(family(e), samples, axioms=axioms, jobs=jobs)
        except SimAlgError as exc:
            raise EvaluationError(f"audit failed at eps={e:g}: {exc}", witness=getattr(exc, "witness", None)) from exc
        for r in report.results:
            rows.setdefault(r.name, []).append((r.stats.max_defect, r.stats.mean_defect))
    return {name: CollapseCurve(name, grid, [m for m, _ in vals], [a for _, a in vals])
            for name, vals in rows.items()}


def collapse_curve(family: EpsilonFamily, axiom: str, grid: Sequence[float], samples: SampleSet) -> CollapseCurve:
    return collapse_curves(family, grid, samples, axioms=[axiom])[axiom]


@dataclass
class CollapseVerdict:
    axiom: str
    passed: bool
    curve: CollapseCurve
    fit: SlopeFit
    coefficient: float
    reason: str

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, "verdict": "PASS" if self.passed else "FAIL", "reason": self.reason,
                "coefficient": self.coefficient, "fit": self.fit.to_dict(), "curve": self.curve.to_dict()}


def judge(curve: CollapseCurve) -> CollapseVerdict:
    """PASS iff the curve is degenerate, or nonincreasing (10% slack) with final defect <= 10 * final eps."""
    fit = fit_rate(curve)
    coeff = curve.max_defect[-1] / curve.eps[-1]
    if curve.degenerate:
        return CollapseVerdict(curve.axiom, True, curve, fit, coeff, "exact identity")
    d = curve.max_defect
    monotone = all(b <= (1 + MONOTONE_SLACK) * a + DEGENERATE_LEVEL for a, b in zip(d, d[1:]))
    small = d[-1] <= VERDICT_FACTOR * curve.eps[-1]
    if monotone and small:
        return CollapseVerdict(curve.axiom, True, curve, fit, coeff, "defect decays with eps")
    why = []
    if not monotone:
        why.append("defect is not nonincreasing as eps shrinks")
    if not small:
        why.append(f"final defect {d[-1]:.3g} exceeds {VERDICT_FACTOR:g} * eps = {VERDICT_FACTOR * curve.eps[-1]:.3g}")
    return CollapseVerdict(curve.axiom, False, curve, fit, coeff, "; ".join(why))


def verify_collapse(family: EpsilonFamily, grid: Optional[Sequence[float]] = None,
                    samples: Optional[SampleSet] = None, jobs: int = 1) -> Dict[str, CollapseVerdict]:
    """Collapse verdict for every axiom in the family's catalog."""
    if samples is None:
        raise InputError("verify_collapse needs a SampleSet")
    grid = family.default_grid if grid is None else grid
    curves = collapse_curves(family, grid, samples, jobs=jobs)
    return {name: judge(c) for name, c in curves.items()}


# -- reference families -----------------------------------------------------


def perturbed_field_family(low: float = -2.0, high: float = 2.0, kind: str = "field",
                           inverse_radius: float = 0.1) -> EpsilonFamily:
    from .instances import PerturbedRealField, as_structure

    return EpsilonFamily(lambda e: as_structure(PerturbedRealField(e, low, high, inverse_radius), kind),
                         name=f"perturbed-field[{low}, {high}]")


def matrix_group_family(n: int = 2, radius: float = 0.5, phi=None) -> EpsilonFamily:
    from .liegroup import BilinearPerturbation, PerturbedMatrixGroup, group_structure

    phi = phi or BilinearPerturbation()
    return EpsilonFamily(lambda e: group_structure(PerturbedMatrixGroup(n, e, phi, radius)),
                         name=f"perturbed-GL({n})")


def constant_defect_family(level: float = 0.1, low: float = -1.0, high: float = 1.0) -> EpsilonFamily:
    """A monoid whose identity is off by ``level`` at every eps; it never collapses."""

    def make(e):
        ops = OperationTable(mul=np.add, one=level)
        return StructureDescriptor("monoid", Carrier.box(low, high), e, ops, name=f"constant-defect({level})")

    return EpsilonFamily(make, name=f"constant-defect({level})")


def classical_family(low: float = -2.0, high: float = 2.0) -> EpsilonFamily:
    """Exact real arithmetic, ignoring eps."""
    from .instances import classical_real_field

    return EpsilonFamily(lambda e: classical_real_field(low, high), name="classical-reals")

"""Concrete similarity structures.

* :class:`PerturbedRealField` -- reals with ``x + y + eps*x*y`` and ``x*y + eps*x**2*y``.
* :class:`PerturbedVectorSpace` -- componentwise perturbed addition with the
  scalar action ``r*v + eps*r**2*v``.
* :class:`FloatInstance` -- machine-rounded binary32/binary64 arithmetic.
* :class:`IntegersMod` -- exact arithmetic modulo ``n`` on a finite carrier.

:func:`as_structure` adapts any of them (and
:class:`~simalg.liegroup.PerturbedMatrixGroup`) to a
:class:`~simalg.structures.StructureDescriptor`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Metric
from .errors import ConfigurationError, DomainError, InputError, SingularityError
from .structures import Carrier, OperationTable, StructureDescriptor

SINGLE_OP_KINDS = ("semigroup", "monoid", "abelian-monoid", "group", "abelian-group")


def perturbed_add(x, y, eps):
    return x + y + eps * x * y


def perturbed_mul(x, y, eps):
    return x * y + eps * x * x * y


def perturbed_add_inverse(x, eps):
    """Exact solution ``w`` of ``x +_eps w = 0``, i.e. ``-x / (1 + eps*x)``."""
    x = np.asarray(x, dtype=float)
    den = 1.0 + eps * x
    if np.any(den == 0):
        raise SingularityError("1 + eps*x = 0: no additive inverse")
    out = -x / den
    return float(out) if out.ndim == 0 else out


def perturbed_mul_inverse(x, eps):
    """Exact solution ``w`` of ``x *_eps w = 1``, i.e. ``1 / (x (1 + eps*x))``."""
    x = np.asarray(x, dtype=float)
    den = x * (1.0 + eps * x)
    if np.any(den == 0):
        raise SingularityError("x = 0 or 1 + eps*x = 0: no multiplicative inverse")
    out = 1.0 / den
    return float(out) if out.ndim == 0 else out


def scalar_action(r, v, eps):
    """``r*v + eps*r**2*v``; ``r`` broadcasts against ``v``."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    return r * v + eps * r * r * v


def _check_box(low, high):
    if low > high:
        raise InputError("carrier box has low > high")


def _check_conjugate_nonzero(eps, low, high):
    # 1 + eps*x is affine in x and equals 1 at x = 0, so checking the end points suffices
    if 1.0 + eps * low <= 0 or 1.0 + eps * high <= 0:
        raise DomainError(f"1 + eps*x vanishes on [{low}, {high}] for eps={eps}")


@dataclass
class PerturbedRealField:
    """The perturbed real field on the interval ``[low, high]``.

    ``inverse_radius`` removes ``|x| < inverse_radius`` (and points where
    ``|1 + eps*x| < inverse_radius``) from multiplicative-inverse sampling.
    """

    eps: float
    low: float = -2.0
    high: float = 2.0
    inverse_radius: float = 0.1

    def __post_init__(self):
        if self.eps < 0:
            raise InputError("eps must be nonnegative")
        _check_box(self.low, self.high)
        _check_conjugate_nonzero(self.eps, self.low, self.high)

    def add(self, x, y):
        return perturbed_add(x, y, self.eps)

    def mul(self, x, y):
        return perturbed_mul(x, y, self.eps)

    def neg(self, x):
        return perturbed_add_inverse(x, self.eps)

    def inv(self, x):
        return perturbed_mul_inverse(x, self.eps)

    def inverse_excluded(self, x):
        x = np.asarray(x, dtype=float)
        return (np.abs(x) < self.inverse_radius) | (np.abs(1.0 + self.eps * x) < self.inverse_radius)

    def output_box(self):
        """A box containing ``x +_eps y`` and ``x *_eps y`` for ``x, y`` in the carrier."""
        m = max(abs(self.low), abs(self.high))
        bound = max(2 * m + self.eps * m * m, m * m + self.eps * m**3)
        return Carrier.box(-bound, bound)


@dataclass
class PerturbedVectorSpace:
    """Vectors in ``[low, high]**dim`` over the perturbed real field."""

    dim: int
    eps: float
    low: float = -1.0
    high: float = 1.0
    scalar_low: float = -1.0
    scalar_high: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be positive")
        if self.eps < 0:
            raise InputError("eps must be nonnegative")
        _check_box(self.low, self.high)
        _check_conjugate_nonzero(self.eps, self.low, self.high)

    def add(self, u, v):
        return perturbed_add(u, v, self.eps)

    def neg(self, v):
        return perturbed_add_inverse(v, self.eps)

    def act(self, r, v):
        return scalar_action(r, v, self.eps)


@dataclass
class FloatInstance:
    """Rounded machine arithmetic: every operation result is rounded to ``precision``."""

    precision: str = "binary64"
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.precision not in ("binary32", "binary64"):
            raise InputError("precision must be 'binary32' or 'binary64'")
        _check_box(self.low, self.high)

    @property
    def dtype(self):
        return np.float32 if self.precision == "binary32" else np.float64

    def add(self, x, y):
        t = self.dtype
        return (np.asarray(x).astype(t) + np.asarray(y).astype(t)).astype(np.float64)

    def mul(self, x, y):
        t = self.dtype
        return (np.asarray(x).astype(t) * np.asarray(y).astype(t)).astype(np.float64)


@dataclass
class IntegersMod:
    """``Z/nZ`` with exact modular arithmetic on the finite carrier ``{0, ..., n-1}``."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("modulus must be positive")

    @property
    def elements(self):
        return list(range(self.n))

    @property
    def is_prime(self) -> bool:
        return self.n > 1 and all(self.n % p for p in range(2, int(self.n**0.5) + 1))

    def add(self, x, y):
        return np.mod(np.asarray(x) + np.asarray(y), self.n)

    def mul(self, x, y):
        return np.mod(np.asarray(x) * np.asarray(y), self.n)

    def neg(self, x):
        return np.mod(-np.asarray(x), self.n)

    def inv(self, x):
        x = np.asarray(x).astype(np.int64)
        out = np.array([pow(int(v), -1, self.n) if v % self.n else 0 for v in x.ravel()], dtype=float)
        return out.reshape(x.shape)


def _single_op_table(add, mul, zero, one, neg, inv, operation, exclusions=None):
    if operation == "add":
        return OperationTable(mul=add, one=zero, inv=neg)
    if operation == "mul":
        return OperationTable(mul=mul, one=one, inv=inv, exclusions=dict(exclusions or {}))
    raise InputError(f"operation must be 'add' or 'mul', got {operation!r}")


def as_structure(instance, kind: Optional[str] = None, operation: str = "add",
                 metric: Optional[Metric] = None) -> StructureDescriptor:
    """Adapt an instance to the auditor.

    ``operation`` picks which operation fills the single-operation slot for
    semigroup..abelian-group kinds.
    """
    from .liegroup import PerturbedMatrixGroup, group_structure

    if isinstance(instance, PerturbedMatrixGroup):
        if kind not in (None, "group", "monoid", "semigroup"):
            raise ConfigurationError(f"perturbed matrix group cannot be audited as {kind!r}")
        return group_structure(instance, kind or "group")

    if isinstance(instance, PerturbedRealField):
        kind = kind or "field"
        f = instance
        carrier = Carrier.box(f.low, f.high)
        excl = {"inv": f.inverse_excluded}
        if kind in SINGLE_OP_KINDS:
            ops = _single_op_table(f.add, f.mul, 0.0, 1.0, f.neg, f.inv, operation, excl)
        elif kind in ("semiring", "ring", "field"):
            ops = OperationTable(add=f.add, mul=f.mul, zero=0.0, one=1.0, neg=f.neg, inv=f.inv, exclusions=excl)
        else:
            raise ConfigurationError(f"perturbed real field cannot be audited as {kind!r}")
        return StructureDescriptor(kind, carrier, f.eps, ops, metric=metric, name=f"perturbed-field(eps={f.eps})")

    if isinstance(instance, PerturbedVectorSpace):
        kind = kind or "vector-space"
        v = instance
        carrier = Carrier.box(v.low, v.high, (v.dim,))
        zero = np.zeros(v.dim)
        if kind in SINGLE_OP_KINDS:
            if operation != "add":
                raise ConfigurationError("a vector space has only the additive operation")
            ops = OperationTable(mul=v.add, one=zero, inv=v.neg)
        elif kind in ("module", "vector-space"):
            ops = OperationTable(add=v.add, zero=zero, neg=v.neg, scalar_action=v.act)
        else:
            raise ConfigurationError(f"perturbed vector space cannot be audited as {kind!r}")
        return StructureDescriptor(kind, carrier, v.eps, ops, metric=metric,
                                   scalar_box=(v.scalar_low, v.scalar_high),
                                   name=f"perturbed-vector-space(dim={v.dim}, eps={v.eps})")

    if isinstance(instance, FloatInstance):
        kind = kind or "monoid"
        fl = instance
        carrier = Carrier.box(fl.low, fl.high)
        # rounded arithmetic has no exact inverses; only inverse-free kinds are offered
        if kind in ("semigroup", "monoid", "abelian-monoid"):
            ops = _single_op_table(fl.add, fl.mul, 0.0, 1.0, None, None, operation)
        elif kind == "semiring":
            ops = OperationTable(add=fl.add, mul=fl.mul, zero=0.0, one=1.0)
        else:
            raise ConfigurationError(f"floating-point arithmetic cannot be audited as {kind!r}")
        return StructureDescriptor(kind, carrier, 0.0, ops, metric=metric, name=f"float({fl.precision})")

    if isinstance(instance, IntegersMod):
        kind = kind or "ring"
        zn = instance
        carrier = Carrier.finite(zn.elements)
        metric = metric or Metric("discrete")
        nonzero = {"inv": lambda x: np.asarray(x) == 0}
        if kind in SINGLE_OP_KINDS:
            if operation == "mul" and kind in ("group", "abelian-group") and not zn.is_prime:
                raise ConfigurationError(f"Z/{zn.n} has no multiplicative group on its nonzero elements")
            ops = _single_op_table(zn.add, zn.mul, 0.0, 1.0, zn.neg, zn.inv, operation, nonzero)
        elif kind in ("semiring", "ring"):
            ops = OperationTable(add=zn.add, mul=zn.mul, zero=0.0, one=1.0, neg=zn.neg)
        elif kind == "field":
            if not zn.is_prime:
                raise ConfigurationError(f"Z/{zn.n} is not a field")
            ops = OperationTable(add=zn.add, mul=zn.mul, zero=0.0, one=1.0, neg=zn.neg, inv=zn.inv,
                                 exclusions=nonzero)
        else:
            raise ConfigurationError(f"Z/{zn.n} cannot be audited as {kind!r}")
        return StructureDescriptor(kind, carrier, 0.0, ops, metric=metric, name=f"Z/{zn.n}")

    raise ConfigurationError(f"unsupported instance type {type(instance).__name__}")


def classical_real_field(low: float = -2.0, high: float = 2.0) -> StructureDescriptor:
    """Exact real arithmetic on ``[low, high]`` as a field descriptor (eps = 0)."""
    return as_structure(PerturbedRealField(0.0, low, high), "field")

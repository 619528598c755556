"""Perturbed matrix Lie groups ``A *_eps B = AB + eps * Phi(A, B)``.

All matrix functions accept stacked inputs ``(..., n, n)`` and broadcast over
the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .core import Metric, SampleSet
from .errors import ConditioningError, ConvergenceError, InputError
from .structures import AxiomDefectReport, Carrier, OperationTable, StructureDescriptor, audit

FROBENIUS = Metric("frobenius")


def commutator(A, B):
    return A @ B - B @ A


@dataclass(frozen=True)
class BilinearPerturbation:
    """A bilinear map ``Phi`` with ``Phi(I, .) = Phi(., I) = 0`` and ``|Phi(A,B)| <= C |A| |B|``.

    ``kind`` is ``"commutator"`` (``C = 2``) or ``"custom"`` with ``fn`` vectorised like :func:`commutator`.
    """

    kind: str = "commutator"
    bound_constant: float = 2.0
    fn: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "commutator":
            object.__setattr__(self, "fn", commutator)
        elif self.kind != "custom" or self.fn is None:
            raise InputError("perturbation kind must be 'commutator' or 'custom' with a function")
        if self.bound_constant < 0:
            raise InputError("bound constant must be nonnegative")

    def __call__(self, A, B):
        return self.fn(A, B)


def check_perturbation(phi: BilinearPerturbation, samples: SampleSet) -> dict:
    """Sampled violations of the three conditions on ``Phi``.

    Needs a matrix SampleSet with at least three slots; the bilinearity check
    draws its scalars from [-1, 1].
    """
    A, B, C = samples.variables(3)
    n = A.shape[-1]
    eye = np.broadcast_to(np.eye(n), A.shape)
    ab = samples.scalars(-1.0, 1.0, 2)
    al, be = ab[:, 0, None, None], ab[:, 1, None, None]
    norm = np.linalg.norm
    identity = max(norm(phi(eye, A), axis=(-2, -1)).max(), norm(phi(A, eye), axis=(-2, -1)).max())
    bound = (norm(phi(A, B), axis=(-2, -1)) - phi.bound_constant * norm(A, axis=(-2, -1)) * norm(B, axis=(-2, -1))).max()
    left = phi(al * A + be * C, B) - (al * phi(A, B) + be * phi(C, B))
    right = phi(B, al * A + be * C) - (al * phi(B, A) + be * phi(B, C))
    bilinear = max(norm(left, axis=(-2, -1)).max(), norm(right, axis=(-2, -1)).max())
    return {"identity_defect": float(identity), "bound_excess": float(bound), "bilinearity_defect": float(bilinear)}


@dataclass(frozen=True)
class PerturbedMatrixGroup:
    """GL(n, R) near the identity with perturbed multiplication.

    The carrier is the Frobenius ball of ``radius`` around ``I``; sampled
    elements must have 2-norm condition number below ``cond_cap``.
    """

    n: int
    eps: float
    phi: BilinearPerturbation = BilinearPerturbation()
    radius: float = 0.5
    cond_cap: float = 10.0

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be positive")
        if self.eps < 0:
            raise InputError("eps must be nonnegative")
        if not 0 < self.radius < 1:
            raise InputError("radius must lie in (0, 1) so the ball avoids singular matrices")

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.n)

    def with_eps(self, eps: float) -> "PerturbedMatrixGroup":
        return replace(self, eps=eps)

    def mul(self, A, B):
        return mul_eps(A, B, self)

    def sample(self, seed: int, count: int, slots: int = 1) -> SampleSet:
        """Uniform samples from the carrier ball, checked against ``cond_cap``."""
        s = SampleSet.ball(seed, np.eye(self.n), self.radius, count, slots)
        cond = np.linalg.cond(s.points.reshape(-1, self.n, self.n))
        if np.max(cond) >= self.cond_cap:
            raise ConditioningError(f"sampled element has condition number {np.max(cond):.3g} >= cap")
        return s


def mul_eps(A, B, grp: PerturbedMatrixGroup):
    """``AB + eps * Phi(A, B)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[-2:] != (grp.n, grp.n) or B.shape[-2:] != (grp.n, grp.n):
        raise InputError(f"expected {grp.n}x{grp.n} matrices")
    if grp.eps == 0:
        return A @ B
    return A @ B + grp.eps * grp.phi(A, B)


@dataclass
class InverseResult:
    X: np.ndarray
    iterations: int
    residual: float


def fixed_point_inverse(A, grp: PerturbedMatrixGroup, tol: float = 1e-13, max_iters: int = 50) -> InverseResult:
    """Solve ``A *_eps X = I`` by ``X <- A^-1 (I - eps Phi(A, X))`` from ``X = A^-1``.

    ``iterations`` counts fixed-point updates after the initial guess;
    ``residual`` is the largest ``|A *_eps X - I|_F`` over the batch.

    Raises
    ------
    ConditioningError
        If ``eps * C * |A^-1|_F * |A|_F >= 1`` for some matrix in the batch.
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iters`` updates.
    """
    A = np.asarray(A, dtype=float)
    eye = np.eye(grp.n)
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"matrix is singular: {exc}") from exc
    norm = lambda M: np.linalg.norm(M, axis=(-2, -1))  # noqa: E731
    contraction = grp.eps * grp.phi.bound_constant * norm(Ainv) * norm(A)
    if np.any(contraction >= 1.0):
        raise ConditioningError(f"contraction factor {np.max(contraction):.3g} >= 1; fixed point not guaranteed")

    X = Ainv
    it = 0
    while True:
        residual = float(np.max(norm(mul_eps(A, X, grp) - eye)))
        if residual <= tol:
            return InverseResult(X, it, residual)
        if it >= max_iters:
            raise ConvergenceError(
                f"fixed-point inverse did not reach tol={tol:g} in {max_iters} iterations "
                f"(residual {residual:.3g})", residual=residual, iterations=it)
        X = Ainv @ (eye - grp.eps * grp.phi(A, X))
        it += 1


def inverse_eps(A, grp: PerturbedMatrixGroup, tol: float = 1e-13, max_iters: int = 50) -> np.ndarray:
    """The eps-inverse ``X`` with ``|A *_eps X - I|_F <= tol``."""
    return fixed_point_inverse(A, grp, tol, max_iters).X


def inverse_eps_dense(A, grp: PerturbedMatrixGroup) -> np.ndarray:
    """Oracle: solve ``(X -> A X + eps Phi(A, X)) vec(X) = vec(I)`` as a dense n^2 x n^2 system.

    Independent of the fixed-point iteration; meant for small ``n``.
    """
    A = np.asarray(A, dtype=float)
    n = grp.n
    basis = np.eye(n * n).reshape(n * n, n, n)
    columns = A @ basis + grp.eps * grp.phi(np.broadcast_to(A, basis.shape), basis)
    M = columns.reshape(n * n, n * n).T
    return np.linalg.solve(M, np.eye(n).ravel()).reshape(n, n)


def extract_bracket(X, Y, grp: PerturbedMatrixGroup, t: float, tol: float = 1e-14):
    """Second-order group-commutator estimate of the eps-bracket at ``I``.

    Returns ``(((g *h) *g^-1) *h^-1 - I) / t**2`` with ``g = I + tX`` and
    ``h = I + tY``; the error against the limiting bracket is O(t).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        raise InputError("t must be positive")
    step = t * np.maximum(np.linalg.norm(X, axis=(-2, -1)), np.linalg.norm(Y, axis=(-2, -1)))
    if np.any(step > grp.radius):
        raise InputError(f"t*|X| = {np.max(step):.3g} leaves the carrier ball of radius {grp.radius}")
    eye = np.eye(grp.n)
    g = eye + t * X
    h = eye + t * Y
    g_inv = inverse_eps(g, grp, tol=tol)
    h_inv = inverse_eps(h, grp, tol=tol)
    c = mul_eps(mul_eps(mul_eps(g, h, grp), g_inv, grp), h_inv, grp)
    return (c - eye) / (t * t)


def bracket_operation(grp: PerturbedMatrixGroup, t: float) -> Callable:
    """The extracted bracket as a binary operation on matrix batches."""
    return lambda X, Y: extract_bracket(X, Y, grp, t)


def lie_algebra_structure(bracket: Callable, n: int, eps: float, low=-1.0, high=1.0,
                          scalar_box=(-1.0, 1.0)) -> StructureDescriptor:
    """gl(n) with exact vector-space operations and the given bracket."""
    ops = OperationTable(
        add=np.add,
        zero=np.zeros((n, n)),
        neg=np.negative,
        scalar_action=lambda r, X: r * X,
        bracket=bracket,
    )
    return StructureDescriptor("lie-algebra", Carrier.box(low, high, (n, n)), eps, ops, metric=FROBENIUS,
                               scalar_box=tuple(scalar_box), name=f"gl({n})")


def lie_algebra_defects(bracket: Callable, samples: SampleSet, eps: float, jobs: int = 1) -> AxiomDefectReport:
    """Bilinearity, antisymmetry and Jacobi defects of ``bracket`` on matrix samples (3 slots)."""
    if len(samples.shape) != 2:
        raise InputError("lie_algebra_defects needs matrix samples")
    n = samples.shape[-1]
    desc = lie_algebra_structure(bracket, n, eps, samples.low, samples.high)
    return audit(desc, samples, jobs=jobs)


def group_structure(grp: PerturbedMatrixGroup, kind: str = "group", tol: float = 1e-14) -> StructureDescriptor:
    eye = np.eye(grp.n)
    ops = OperationTable(mul=grp.mul, one=eye, inv=lambda A: inverse_eps(A, grp, tol=tol))
    carrier = Carrier.box(eye - grp.radius, eye + grp.radius, (grp.n, grp.n))
    return StructureDescriptor(kind, carrier, grp.eps, ops, metric=FROBENIUS,
                               name=f"perturbed-GL({grp.n}, eps={grp.eps})")


# -- C^1 diagnostics ----------------------------------------------------------


def jacobian_fd(grp: PerturbedMatrixGroup, A, B, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of ``(A, B) -> A *_eps B``.

    Shape ``(..., n*n, 2*n*n)``: columns index the entries of A then of B.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = grp.n
    k = n * n
    basis = np.eye(k).reshape(k, n, n) * h
    zeros = np.zeros_like(basis)
    dA = np.concatenate([basis, zeros])         # (2k, n, n)
    dB = np.concatenate([zeros, basis])
    Ap, Bp = A[..., None, :, :] + dA, B[..., None, :, :] + dB
    Am, Bm = A[..., None, :, :] - dA, B[..., None, :, :] - dB
    diff = (mul_eps(Ap, Bp, grp) - mul_eps(Am, Bm, grp)) / (2 * h)  # (..., 2k, n, n)
    return np.swapaxes(diff.reshape(diff.shape[:-2] + (k,)), -1, -2)


@dataclass
class C1Table:
    """Max (and mean) Frobenius gap between Jacobians of the eps and classical multiplications."""

    eps: List[float]
    max_gap: List[float]
    mean_gap: List[float]
    h: float

    def curve(self):
        from .collapse import CollapseCurve

        return CollapseCurve("c1-jacobian-gap", list(self.eps), list(self.max_gap), list(self.mean_gap))

    def to_rows(self) -> list:
        return [{"epsilon": e, "max_defect": g, "mean_defect": m}
                for e, g, m in zip(self.eps, self.max_gap, self.mean_gap)]


def c1_convergence(family: Union[PerturbedMatrixGroup, Callable], eps_grid: Sequence[float], probes: SampleSet,
                   h: float = 1e-5) -> C1Table:
    """Jacobian gap ``max_p |J_h[m_eps](p) - J_h[m_0](p)|_F`` for each eps in the grid.

    ``family`` is an eps -> group constructor or a group whose ``eps`` is
    swept. ``probes`` supplies (A, B) pairs in slots 0 and 1.
    """
    make = family.with_eps if isinstance(family, PerturbedMatrixGroup) else family
    if h <= 0:
        raise InputError("h must be positive")
    A, B = probes.variables(2)
    j0 = jacobian_fd(make(0.0), A, B, h)
    max_gap, mean_gap = [], []
    for e in eps_grid:
        gap = np.linalg.norm(jacobian_fd(make(e), A, B, h) - j0, axis=(-2, -1))
        max_gap.append(float(gap.max()))
        mean_gap.append(float(gap.mean()))
    return C1Table([float(e) for e in eps_grid], max_gap, mean_gap, h)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simalg.core import Metric, SampleSet
from simalg.errors import ConfigurationError, DomainError, InputError, SingularityError
from simalg.instances import (
    FloatInstance,
    IntegersMod,
    PerturbedRealField,
    PerturbedVectorSpace,
    as_structure,
    classical_real_field,
    perturbed_add,
    perturbed_add_inverse,
    perturbed_mul,
    perturbed_mul_inverse,
    scalar_action,
)
from simalg.liegroup import PerturbedMatrixGroup
from simalg.structures import audit, check_closure

unit = st.floats(-2, 2, allow_nan=False)
small_eps = st.floats(0, 0.2)


# -- scalar operations ------------------------------------------------------


def test_perturbed_add_examples():
    assert perturbed_add(1, 2, 0.1) == pytest.approx(3.2)
    assert perturbed_add(1.7, 0, 0.3) == 1.7
    assert perturbed_add(2, 3, 0) == 5


def test_perturbed_mul_examples():
    assert perturbed_mul(2, 3, 0.1) == pytest.approx(7.2)
    assert perturbed_mul(1.5, 1, 0.1) == pytest.approx(1.5 + 0.1 * 1.5**2)
    assert perturbed_mul(2, 3, 0) == 6


def test_additive_inverse_examples():
    w = perturbed_add_inverse(1, 0.1)
    assert w == pytest.approx(-1 / 1.1)
    assert perturbed_add(1, w, 0.1) == pytest.approx(0.0, abs=1e-15)
    assert perturbed_add_inverse(0, 0.3) == 0
    assert perturbed_add_inverse(0.7, 0) == -0.7
    with pytest.raises(SingularityError):
        perturbed_add_inverse(-10, 0.1)


def test_multiplicative_inverse_examples():
    w = perturbed_mul_inverse(2, 0.1)
    assert w == pytest.approx(1 / 2.4)
    assert perturbed_mul(2, w, 0.1) == pytest.approx(1.0)
    assert perturbed_mul_inverse(1, 0) == 1
    assert perturbed_mul_inverse(4, 0) == 0.25
    with pytest.raises(SingularityError):
        perturbed_mul_inverse(0, 0.1)
    with pytest.raises(SingularityError):
        perturbed_mul_inverse(-10, 0.1)


def test_scalar_action_examples():
    assert np.array_equal(scalar_action(0.7, np.zeros(3), 0.1), np.zeros(3))
    assert np.allclose(scalar_action(1, np.array([1.0, 2.0]), 0.1), [1.1, 2.2])
    assert np.array_equal(scalar_action(2, np.array([1.0, 0.0]), 0), [2.0, 0.0])


@given(unit, unit, unit, small_eps)
def test_perturbed_add_exactly_associative_and_commutative(x, y, z, e):
    left = perturbed_add(perturbed_add(x, y, e), z, e)
    right = perturbed_add(x, perturbed_add(y, z, e), e)
    assert abs(left - right) <= 1e-12 * (1 + abs(left))
    assert perturbed_add(x, y, e) == perturbed_add(y, x, e)


@given(unit, unit, small_eps)
def test_conjugacy_identity(x, y, e):
    assert 1 + e * perturbed_add(x, y, e) == pytest.approx((1 + e * x) * (1 + e * y), abs=1e-12)


def test_mul_not_commutative_for_positive_eps():
    x, y, e = 0.5, 1.5, 0.1
    gap = abs(perturbed_mul(x, y, e) - perturbed_mul(y, x, e))
    assert gap == pytest.approx(e * abs(x * x * y - x * y * y))
    assert gap > 0


@given(st.floats(-2, 2).filter(lambda v: abs(v) > 0.1), small_eps)
def test_inverse_closed_forms_are_exact(x, e):
    assert abs(perturbed_add(x, perturbed_add_inverse(x, e), e)) <= 1e-12
    assert abs(perturbed_mul(x, perturbed_mul_inverse(x, e), e) - 1) <= 1e-12


# -- field instance ---------------------------------------------------------


def test_field_rejects_vanishing_conjugate():
    with pytest.raises(DomainError):
        PerturbedRealField(0.6, -2, 2)
    with pytest.raises(InputError):
        PerturbedRealField(-0.1)


def test_field_descriptor_and_catalog():
    desc = as_structure(PerturbedRealField(0.1, -2, 2))
    assert desc.kind == "field"
    assert len(desc.catalog()) == 13


def test_field_inverse_axioms():
    desc = as_structure(PerturbedRealField(0.1, -2, 2))
    rep = audit(desc, SampleSet(42, -2, 2, 4096, slots=3))
    for name in ("add-left-inverse", "add-right-inverse", "mul-right-inverse"):
        assert rep[name].stats.max_defect <= 1e-12, name
    # the closed form solves x * w = 1; the other order misses by eps * |w - x| / (1 + eps x)... of order eps
    assert 0 < rep["mul-left-inverse"].stats.max_defect < 10 * 0.1


def test_distributivity_leading_term_within_ten_percent():
    eps = 1e-4
    desc = as_structure(PerturbedRealField(eps, -2, 2))
    grid = SampleSet.grid(-2, 2, 16, slots=3)
    x, y, z = grid.variables(3)
    oracle = np.abs(eps * x * y * z * (1 - x)).max()
    measured = audit(desc, grid, axioms=["distributivity"])["distributivity"].stats.max_defect
    assert abs(measured - oracle) / oracle < 0.10


def test_classical_limit_defects_vanish():
    rep = audit(as_structure(PerturbedRealField(0.0, -3, 3)), SampleSet(2, -3, 3, 4096, slots=3))
    assert rep.certified_eps <= 1e-12


def test_single_operation_views():
    f = PerturbedRealField(0.1, -1, 1)
    add = as_structure(f, "abelian-group", "add")
    rep = audit(add, SampleSet(3, -1, 1, 1024, slots=3))
    assert rep.certified_eps <= 1e-12
    mul = as_structure(f, "group", "mul")
    assert mul.ops.exclusions
    with pytest.raises(InputError):
        as_structure(f, "group", "xor")
    with pytest.raises(ConfigurationError):
        as_structure(f, "lie-algebra")


def test_output_box_contains_images():
    f = PerturbedRealField(0.1, -1, 1)
    desc = as_structure(f, "semiring")
    rep = check_closure(desc, SampleSet.grid(-1, 1, 21, slots=2), f.output_box())
    assert rep.worst_excursion == 0.0


# -- vector space -----------------------------------------------------------


def test_vector_space_scalar_distributivity_oracle():
    eps = 0.05
    v = PerturbedVectorSpace(3, eps)
    desc = as_structure(v)
    s = SampleSet(17, -1, 1, 2000, slots=3, shape=(3,))
    rep = audit(desc, s)
    r = s.scalars(-1, 1, 1)[:, 0]
    x, y = s.variables(2)
    # r.(x + y) - (r.x + r.y) = eps * r(1+eps r)(1 - r(1+eps r)) * x*y, componentwise
    k = eps * r * (1 + eps * r) * (1 - r * (1 + eps * r))
    oracle = np.abs(k) * np.linalg.norm(x * y, axis=1)
    assert rep["scalar-distributivity"].stats.max_defect == pytest.approx(oracle.max(), rel=1e-9)
    assert rep["add-associativity"].stats.max_defect <= 1e-12
    assert desc.metric.kind == "euclidean"


def test_vector_space_rejects_other_kinds():
    v = PerturbedVectorSpace(2, 0.1)
    with pytest.raises(ConfigurationError):
        as_structure(v, "field")
    with pytest.raises(ConfigurationError):
        as_structure(v, "monoid", "mul")
    with pytest.raises(InputError):
        PerturbedVectorSpace(0, 0.1)


# -- floating point ---------------------------------------------------------


def test_float_instance_is_never_a_field():
    with pytest.raises(ConfigurationError):
        as_structure(FloatInstance("binary64"), "field")
    with pytest.raises(ConfigurationError):
        as_structure(FloatInstance("binary32"), "group")
    with pytest.raises(InputError):
        FloatInstance("binary16")


def test_binary64_monoid_certifies_machine_scale():
    # uniform draws sit on a dyadic lattice where sums are exact, so use products
    rep = audit(as_structure(FloatInstance("binary64"), "monoid", "mul"), SampleSet(42, -1, 1, 4096, slots=3))
    assert 0 < rep.certified_eps <= 4 * np.finfo(np.float64).eps


def test_binary32_associativity_against_exhaustive_oracle():
    grid = np.linspace(-1, 1, 17, dtype=np.float64)
    s = SampleSet.exhaustive(grid, 3)
    s32 = SampleSet.exhaustive(np.float32(1 / 3) * grid, 3)  # values that round in binary32
    desc = as_structure(FloatInstance("binary32"), "semigroup", "mul")
    for samples in (s, s32):
        x, y, z = (v.astype(np.float32) for v in samples.variables(3))
        # independent oracle: the same rounded products computed in float32 directly
        left = (x * y) * z
        right = x * (y * z)
        oracle = np.abs(left.astype(np.float64) - right.astype(np.float64)).max()
        assert audit(desc, samples)["associativity"].stats.max_defect == oracle
    assert oracle > 0


# -- integers mod n and dispatch --------------------------------------------


def test_integers_mod_structures():
    z5, z6 = IntegersMod(5), IntegersMod(6)
    assert z5.is_prime and not z6.is_prime
    assert z5.inv(np.array([1.0, 2.0, 3.0, 4.0])).tolist() == [1.0, 3.0, 2.0, 4.0]
    rep = audit(as_structure(z5, "field"), SampleSet.exhaustive(range(5), 3))
    assert rep.certified_eps == 0.0
    assert rep["mul-left-inverse"].stats.skipped == 25
    with pytest.raises(ConfigurationError):
        as_structure(z6, "field")
    with pytest.raises(ConfigurationError):
        as_structure(z6, "group", "mul")


def test_matrix_group_dispatch():
    desc = as_structure(PerturbedMatrixGroup(2, 1e-3))
    assert desc.kind == "group"
    with pytest.raises(ConfigurationError):
        as_structure(PerturbedMatrixGroup(2, 1e-3), "ring")


def test_unsupported_instance():
    with pytest.raises(ConfigurationError):
        as_structure(object())


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.2), st.integers(0, 2**31))
def test_audit_add_associativity_exact_for_any_eps(e, seed):
    desc = as_structure(PerturbedRealField(e, -2, 2))
    rep = audit(desc, SampleSet(seed, -2, 2, 256, slots=3), axioms=["add-associativity", "add-commutativity"])
    assert rep.certified_eps <= 1e-12


def test_classical_field_helper():
    assert classical_real_field().eps == 0.0
    assert classical_real_field().metric == Metric("absolute-difference")

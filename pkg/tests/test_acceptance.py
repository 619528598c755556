"""Acceptance suite: one or more tests per criterion, each with its runtime bound.

Run with ``pytest tests/test_acceptance.py`` to get the per-criterion
PASS/FAIL summary at the end of the session.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

from simalg.collapse import (DEFAULT_GRID, collapse_curves, constant_defect_family, fit_rate, matrix_group_family,
                             perturbed_field_family, verify_collapse)
from simalg.core import SampleSet
from simalg.fuzzy import TNorm, FuzzySet, check_embedding_bound, check_rosenfeld, crisp_reference_metric
from simalg.instances import (FloatInstance, IntegersMod, PerturbedRealField, PerturbedVectorSpace, as_structure,
                              classical_real_field)
from simalg.liegroup import (BilinearPerturbation, PerturbedMatrixGroup, c1_convergence, commutator,
                             extract_bracket, fixed_point_inverse, group_structure, inverse_eps_dense,
                             lie_algebra_structure, mul_eps)
from simalg.morphisms import (MorphismDescriptor, check_approx_homomorphism, check_similarity_preserving, compose,
                              embed_classical, identity_morphism, mod_linear_map, mod_power_map, preservation_margins,
                              scaling_map)
from simalg.structures import audit

ROOT = Path(__file__).resolve().parents[1]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def field_samples():
    return SampleSet(42, -2, 2, 4096, slots=3)


# -- 1 ----------------------------------------------------------------------


@pytest.mark.acceptance(1, "exact-identity detection: additive associativity <= 1e-12 on every grid eps")
def test_exact_identity_detection(note):
    x, y, z, e = sp.symbols("x y z e")
    add = lambda p, q: p + q + e * p * q  # noqa: E731
    expected = x + y + z + e * (x * y + x * z + y * z) + e**2 * x * y * z
    assert sp.expand(add(add(x, y), z) - expected) == 0
    assert sp.expand(add(x, add(y, z)) - expected) == 0

    s = field_samples()
    with Timer() as t:
        worst = max(audit(as_structure(PerturbedRealField(eps, -2, 2)), s, axioms=["add-associativity"])
                    ["add-associativity"].stats.max_defect for eps in DEFAULT_GRID)
    note(f"max defect {worst:.2e}, {t.elapsed:.2f}s")
    assert worst <= 1e-12
    assert t.elapsed < 1.0


# -- 2 ----------------------------------------------------------------------


@pytest.mark.acceptance(2, "rate recovery: slopes in [0.9, 1.1] with r^2 >= 0.99")
def test_rate_recovery(note):
    s = field_samples()
    x, y, z = s.variables(3)
    leading = {"mul-associativity": np.abs(x * y**2 * z * (x - 1)).max(),
               "distributivity": np.abs(x * y * z * (1 - x)).max()}
    with Timer() as t:
        curves = collapse_curves(perturbed_field_family(-2, 2), DEFAULT_GRID, s, axioms=list(leading))
    fits = {k: fit_rate(c) for k, c in curves.items()}
    note(", ".join(f"{k} slope {f.slope:.4f} r2 {f.r_squared:.5f}" for k, f in fits.items()) + f", {t.elapsed:.2f}s")
    for name, fit in fits.items():
        assert 0.9 <= fit.slope <= 1.1, name
        assert fit.r_squared >= 0.99, name
        # at the small end of the grid defect / eps matches the leading-term coefficient
        c = curves[name]
        assert c.max_defect[-1] / c.eps[-1] == pytest.approx(leading[name], rel=1e-3)
    assert t.elapsed < 5.0


# -- 3 ----------------------------------------------------------------------


@pytest.mark.acceptance(3, "defect magnitude at eps=1e-3 within 10% of the grid oracle")
def test_defect_magnitude(note):
    eps = 1e-3
    grid = SampleSet.grid(-2, 2, 16, slots=3)
    x, y, z = grid.variables(3)
    oracle = np.abs(eps * x * y**2 * z * (x - 1)).max()
    with Timer() as t:
        measured = audit(as_structure(PerturbedRealField(eps, -2, 2)), grid,
                         axioms=["mul-associativity"])["mul-associativity"].stats.max_defect
    rel = abs(measured - oracle) / oracle
    note(f"measured {measured:.5f} vs oracle {oracle:.5f}, rel {rel:.3%}, {t.elapsed:.2f}s")
    assert rel <= 0.10
    assert t.elapsed < 2.0


# -- 4 ----------------------------------------------------------------------


@pytest.mark.acceptance(4, "matrix group identity exact: mul_eps(A, I) = A within 1e-14")
def test_matrix_identity_exact(note):
    rng = np.random.default_rng(42)
    A = rng.standard_normal((100, 3, 3))
    grp = PerturbedMatrixGroup(3, 1e-2)
    with Timer() as t:
        err = np.max(np.abs(mul_eps(A, np.eye(3), grp) - A))
    note(f"max entry error {err:.1e}")
    assert err <= 1e-14
    assert t.elapsed < 1.0


# -- 5 ----------------------------------------------------------------------


def _twisted(N):
    return BilinearPerturbation("custom", 4 * np.linalg.norm(N) ** 2,
                                lambda A, B: commutator(A, N) @ commutator(B, N))


@pytest.mark.acceptance(5, "implicit inverse: residual <= 1e-12 in <= 10 iterations, dense oracle <= 1e-10")
@pytest.mark.parametrize("phi_name", ["commutator", "twisted"])
def test_implicit_inverse(phi_name, note):
    N = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]) * 0.5
    phi = BilinearPerturbation() if phi_name == "commutator" else _twisted(N)
    grp = PerturbedMatrixGroup(3, 1e-3, phi)
    A = grp.sample(42, 50).variables(1)[0]
    with Timer() as t:
        results = [fixed_point_inverse(a, grp, tol=1e-12) for a in A]
        gaps = [np.linalg.norm(r.X - inverse_eps_dense(a, grp)) for a, r in zip(A, results)]
    iters = max(r.iterations for r in results)
    note(f"{phi_name}: max iterations {iters}, max residual {max(r.residual for r in results):.1e}, "
         f"max oracle gap {max(gaps):.1e}")
    assert all(r.residual <= 1e-12 for r in results)
    assert iters <= 10
    assert max(gaps) <= 1e-10
    assert t.elapsed < 2.0


# -- 6 ----------------------------------------------------------------------


@pytest.mark.acceptance(6, "bracket recovery within 5% (eps=0) and 5% + 10 eps (eps=1e-4)")
@pytest.mark.parametrize("n", [2, 3])
def test_bracket_recovery(n, note):
    rng = np.random.default_rng(42 + n)
    X, Y = rng.standard_normal((2, 20, n, n))
    X /= np.linalg.norm(X, axis=(1, 2), keepdims=True)
    Y /= np.linalg.norm(Y, axis=(1, 2), keepdims=True)
    exact = X @ Y - Y @ X
    t_step = 1e-3
    worst = {}
    with Timer() as t:
        for eps in (0.0, 1e-4):
            est = extract_bracket(X, Y, PerturbedMatrixGroup(n, eps), t_step)
            rel = np.linalg.norm(est - exact, axis=(1, 2)) / np.linalg.norm(exact, axis=(1, 2))
            worst[eps] = float(rel.max())
    note(f"n={n}: max rel error {worst[0.0]:.2e} (eps=0), {worst[1e-4]:.2e} (eps=1e-4)")
    assert worst[0.0] <= 0.05
    assert worst[1e-4] <= 0.05 + 10 * 1e-4
    assert t.elapsed < 2.0


# -- 7 ----------------------------------------------------------------------


@pytest.mark.acceptance(7, "C1 gap linear in eps and independent of the step h")
def test_c1_gap(note):
    grp = PerturbedMatrixGroup(2, 0.0)
    probes = grp.sample(42, 64, slots=2)
    with Timer() as t:
        full = c1_convergence(grp, DEFAULT_GRID, probes, h=1e-5)
        half = c1_convergence(grp, DEFAULT_GRID, probes, h=5e-6)
    fit = fit_rate(full.curve())
    change = max(abs(a - b) / a for a, b in zip(full.max_gap, half.max_gap))
    note(f"slope {fit.slope:.4f}, r2 {fit.r_squared:.6f}, max change on halving h {change:.2e}")
    assert abs(fit.slope - 1.0) <= 0.1 and fit.r_squared >= 0.99
    assert change < 0.01
    assert t.elapsed < 10.0


# -- 8 ----------------------------------------------------------------------


@pytest.mark.acceptance(8, "collapse verdicts: field and group catalogs pass, constant defect fails")
def test_collapse_verdicts(note):
    with Timer() as t:
        field = verify_collapse(perturbed_field_family(-1, 1), samples=SampleSet(42, -1, 1, 4096, slots=3))
        group = verify_collapse(matrix_group_family(2), samples=SampleSet.ball(42, np.eye(2), 0.5, 1024, slots=3))
        const = verify_collapse(constant_defect_family(0.1), samples=SampleSet(42, -1, 1, 1024, slots=3))
    failed = [k for k, v in {**field, **group}.items() if not v.passed]
    note(f"field {sum(v.passed for v in field.values())}/{len(field)}, "
         f"group {sum(v.passed for v in group.values())}/{len(group)}, {t.elapsed:.2f}s")
    assert len(field) == 13 and len(group) == 5
    assert not failed, failed
    assert not all(v.passed for v in const.values())
    assert t.elapsed < 10.0


# -- 9 ----------------------------------------------------------------------


@pytest.mark.acceptance(9, "fuzzy embedding bound and crisp reproduction of the discrete embedding")
def test_fuzzy_embedding(note):
    add5 = lambda a, b: np.mod(np.asarray(a) + b, 5)  # noqa: E731
    fs = FuzzySet(range(5), [1.0, 0.8, 0.7, 0.7, 0.8])
    product = TNorm("product")
    with Timer() as t:
        ros = check_rosenfeld(fs, add5, product)
        bound = check_embedding_bound(fs, product, add5)

        base = as_structure(IntegersMod(6), "abelian-group", "add")
        discrete = embed_classical(base, SampleSet.exhaustive(range(6), 3))
        crisp = type(base)(base.kind, base.carrier, 0.0, base.ops,
                           metric=crisp_reference_metric(TNorm("minimum")), similarity="bounded")
        pairs = SampleSet.exhaustive(range(6), 2)
        reports = {}
        for label, desc in (("crisp", crisp), ("discrete", discrete)):
            for fname, f in (("2x", mod_linear_map(2, 6)), ("x^2", mod_power_map(2, 6))):
                reports[label, fname] = check_approx_homomorphism(MorphismDescriptor(desc, desc, f), 0.0, pairs)
    note(f"{bound.triples} triples, worst margin {bound.worst_margin:.3f}, {t.elapsed:.3f}s")
    assert ros.holds
    assert bound.triples == 125 and bound.holds
    for label in ("crisp", "discrete"):
        assert reports[label, "2x"].passes_at_eps
        sq = reports[label, "x^2"]
        assert not sq.passes_at_eps
        assert [float(w) for w in sq.hom_defect_mul.argmax_witness] == [1.0, 1.0]
    assert reports["crisp", "x^2"].to_dict() == reports["discrete", "x^2"].to_dict()
    assert t.elapsed < 1.0


# -- 10 ---------------------------------------------------------------------


def _structures():
    grp = PerturbedMatrixGroup(2, 1e-3)
    z6 = as_structure(IntegersMod(6), "abelian-group", "add")
    return [
        (as_structure(PerturbedRealField(0.1, -1, 1)), SampleSet(42, -1, 1, 1000, slots=2)),
        (classical_real_field(-1, 1), SampleSet(42, -1, 1, 1000, slots=2)),
        (as_structure(PerturbedVectorSpace(3, 0.05)), SampleSet(42, -1, 1, 1000, slots=2, shape=(3,))),
        (as_structure(FloatInstance("binary64"), "monoid", "mul"), SampleSet(42, -1, 1, 1000, slots=2)),
        (as_structure(IntegersMod(5), "field"), SampleSet.exhaustive(range(5), 2)),
        (embed_classical(z6, SampleSet.exhaustive(range(6), 3)), SampleSet.exhaustive(range(6), 2)),
        (group_structure(grp), grp.sample(42, 1000, slots=2)),
        (lie_algebra_structure(commutator, 2, 0.0), SampleSet(42, -1, 1, 1000, slots=2, shape=(2, 2))),
    ]


@pytest.mark.acceptance(10, "morphism laws: identity, composition associativity, preservation chaining")
def test_morphism_laws(note):
    with Timer() as t:
        structures = _structures()
        for desc, s in structures:
            rep = check_approx_homomorphism(identity_morphism(desc), 0.0, s)
            assert rep.passes_at_eps, desc.name
            assert rep.similarity_preserving.worst_margin == 0.0
            assert all(d is None or d.max_defect == 0.0 for d in (rep.hom_defect_add, rep.hom_defect_mul))

        line = classical_real_field(-10, 10)
        f = MorphismDescriptor(line, line, scaling_map(0.5))
        g = MorphismDescriptor(line, line, np.sin)
        h = MorphismDescriptor(line, line, lambda v: np.asarray(v) ** 3 - v)
        x = SampleSet(42, -1, 1, 1000).variables(1)[0]
        assert np.array_equal(compose(compose(f, g), h)(x), compose(f, compose(g, h))(x))

        pairs = SampleSet(42, -1, 1, 1000, slots=2)
        gf = compose(f, g)
        mf = preservation_margins(f, pairs)
        mgf = preservation_margins(gf, pairs)
        res = check_similarity_preserving(gf, pairs)
    note(f"{len(structures)} structures, {t.elapsed:.3f}s")
    assert np.all(mf >= 0)
    # s_A <= s_B(f) <= s_C(g f): the composite margin is at least the first factor's
    assert np.all(mgf >= mf - 1e-15)
    assert res.passed and res.pairs == 1000
    assert t.elapsed < 1.0


# -- 11 ---------------------------------------------------------------------


@pytest.mark.acceptance(11, "determinism: reference CLI runs byte-identical across --jobs")
def test_cli_determinism(tmp_path, note):
    config = ROOT / "configs" / "reference.json"
    outputs = []
    with Timer() as t:
        for jobs in (1, 4):
            out = tmp_path / f"jobs{jobs}"
            proc = subprocess.run([sys.executable, "-m", "simalg", "run", str(config), "--seed", "42",
                                   "--jobs", str(jobs), "--out", str(out)],
                                  capture_output=True, text=True, timeout=60)
            assert proc.returncode == 0, proc.stderr
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    note(f"{len(outputs[0])} files, {t.elapsed:.2f}s")
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0]["report.json"])["status"] == "PASS"
    assert t.elapsed < 30.0

"""Batch driver: ``simalg run <config.json>``.

The config is a JSON object with a mandatory integer ``seed`` and a ``tasks``
list.  Every task has a ``type`` (audit, collapse, bracket, c1, fuzzy-embed,
morphism), an optional ``name`` and an optional ``expect`` (``pass`` or
``fail``); a task's verdict is PASS when its outcome matches ``expect``.
The full schema is documented in the README.

Exit status: 0 when every task passes, 1 when some task fails, 2 on a
configuration or evaluation error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .collapse import (EpsilonFamily, constant_defect_family, fit_rate, geometric_grid, verify_collapse,
                       DEFAULT_GRID)
from .core import Metric, METRIC_KINDS, SampleSet, SIMILARITY_MODES
from .errors import ConfigurationError, SimAlgError
from .fuzzy import (TNORM_KINDS, FuzzySet, TNorm, check_embedding_bound, check_rosenfeld, tabulated)
from .instances import (FloatInstance, IntegersMod, PerturbedRealField, PerturbedVectorSpace, as_structure,
                        classical_real_field)
from .liegroup import BilinearPerturbation, PerturbedMatrixGroup, c1_convergence, extract_bracket
from .morphisms import (MorphismDescriptor, affine_map, check_approx_homomorphism, embed_classical,
                        mod_linear_map, mod_power_map, scaling_map, tabulated_map)
from .structures import KINDS, Carrier, OperationTable, StructureDescriptor, audit, describe_kinds

TASK_TYPES = ("audit", "collapse", "bracket", "c1", "fuzzy-embed", "morphism")
INSTANCES = ("perturbed-field", "perturbed-vector-space", "perturbed-matrix-group", "float", "integers-mod",
             "classical-field", "tabulated", "constant-defect")
MAP_KINDS = ("identity", "scaling", "affine", "mod-linear", "mod-power", "tabulated")
MEMBERSHIP_FORMULAS = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "reciprocal": lambda x: 1.0 / (1.0 + np.abs(x)),
    "gaussian": lambda x: np.exp(-np.asarray(x, dtype=float) ** 2),
}


# -- config access with field-path diagnostics -------------------------------


class Node:
    """A JSON object with its path, for error messages like ``tasks[2].structure.kind``."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path or 'config'}: expected an object")
        self.data, self.path = data, path

    def where(self, key) -> str:
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return key in self.data

    def get(self, key, kind=None, default=..., choices=None):
        if key not in self.data:
            if default is ...:
                raise ConfigurationError(f"{self.where(key)}: required field is missing")
            return default
        value = self.data[key]
        if kind is not None:
            value = _coerce(value, kind, self.where(key))
        if choices is not None and value not in choices:
            raise ConfigurationError(f"{self.where(key)}: {value!r} is not one of {list(choices)}")
        return value

    def child(self, key, default=...):
        if key not in self.data and default is not ...:
            return default
        return Node(self.get(key), self.where(key))


def _coerce(value, kind, where):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigurationError(f"{where}: expected a finite number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{where}: expected a string, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{where}: expected true or false, got {value!r}")
        return value
    if kind == "box":
        if (not isinstance(value, list) or len(value) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            raise ConfigurationError(f"{where}: expected [low, high]")
        if value[0] > value[1]:
            raise ConfigurationError(f"{where}: low exceeds high")
        return (float(value[0]), float(value[1]))
    if kind == "numbers":
        if not isinstance(value, list) or not value or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigurationError(f"{where}: expected a nonempty list of numbers")
        return [float(v) for v in value]
    if kind is list:
        if not isinstance(value, list):
            raise ConfigurationError(f"{where}: expected a list")
        return value
    raise AssertionError(kind)


def _positive(node: Node, key, kind=int, default=...):
    v = node.get(key, kind, default)
    if v is not None and v <= 0:
        raise ConfigurationError(f"{node.where(key)}: must be positive")
    return v


def _nonneg(node: Node, key, default=...):
    v = node.get(key, float, default)
    if v is not None and v < 0:
        raise ConfigurationError(f"{node.where(key)}: must be nonnegative")
    return v


def _wrap(node: Node, key: str, fn: Callable):
    """Run a constructor, turning library errors into field diagnostics."""
    try:
        return fn()
    except ConfigurationError as exc:
        if str(exc).startswith(node.path):
            raise
        raise ConfigurationError(f"{node.where(key)}: {exc}") from exc
    except (SimAlgError, ValueError) as exc:
        raise ConfigurationError(f"{node.where(key)}: {exc}") from exc


# -- structures and families ------------------------------------------------


def _tabulated_structure(node: Node, kind: str) -> StructureDescriptor:
    elems = node.get("elements", "numbers")
    k = len(elems)
    tables = node.child("tables", default=None)
    ops: Dict[str, Any] = {}
    if tables is not None:
        for sym in ("add", "mul"):
            if tables.has(sym):
                ops[sym] = _wrap(tables, sym, lambda: tabulated(elems, tables.get(sym, list)))
    unary = node.child("unary", default=None)
    if unary is not None:
        for sym in ("neg", "inv"):
            if unary.has(sym):
                image = unary.get(sym, "numbers")
                if len(image) != k:
                    raise ConfigurationError(f"{unary.where(sym)}: needs one entry per element")
                ops[sym] = tabulated_map(dict(zip(elems, image)))
    consts = node.child("constants", default=None)
    if consts is not None:
        for sym in ("zero", "one"):
            if consts.has(sym):
                ops[sym] = consts.get(sym, float)
    eps = _nonneg(node, "eps", 0.0)
    return StructureDescriptor(kind, Carrier.finite(elems), eps, OperationTable(**ops), metric=Metric("discrete"),
                               name=node.get("name", str, "tabulated"))


def _group(node: Node, eps: float) -> PerturbedMatrixGroup:
    n = _positive(node, "n")
    radius = _positive(node, "radius", float, 0.5)
    return _wrap(node, "n", lambda: PerturbedMatrixGroup(n, eps, BilinearPerturbation(), radius))


def build_structure(node: Node, eps_override: Optional[float] = None) -> StructureDescriptor:
    inst = node.get("instance", str, choices=INSTANCES)
    kind = node.get("kind", str, None)
    if kind is not None and kind not in KINDS:
        raise ConfigurationError(f"{node.where('kind')}: unknown kind {kind!r}; expected one of {list(KINDS)}")
    eps = eps_override if eps_override is not None else None
    op = node.get("operation", str, "add", choices=("add", "mul"))

    def e(default=...):
        return eps if eps is not None else _nonneg(node, "eps", default)

    if inst == "perturbed-field":
        low, high = node.get("box", "box", (-2.0, 2.0))
        radius = _positive(node, "inverse_radius", float, 0.1)
        make = lambda: as_structure(PerturbedRealField(e(), low, high, radius), kind, op)
    elif inst == "perturbed-vector-space":
        low, high = node.get("box", "box", (-1.0, 1.0))
        slo, shi = node.get("scalar_box", "box", (-1.0, 1.0))
        dim = _positive(node, "dim")
        make = lambda: as_structure(PerturbedVectorSpace(dim, e(), low, high, slo, shi), kind, op)
    elif inst == "perturbed-matrix-group":
        grp = _group(node, e())
        make = lambda: as_structure(grp, kind)
    elif inst == "float":
        low, high = node.get("box", "box", (-1.0, 1.0))
        prec = node.get("precision", str, "binary64", choices=("binary32", "binary64"))
        make = lambda: as_structure(FloatInstance(prec, low, high), kind, op)
    elif inst == "integers-mod":
        n = _positive(node, "n")
        make = lambda: as_structure(IntegersMod(n), kind, op)
    elif inst == "classical-field":
        low, high = node.get("box", "box", (-2.0, 2.0))
        make = lambda: classical_real_field(low, high)
    elif inst == "constant-defect":
        level = _nonneg(node, "level", 0.1)
        make = lambda: constant_defect_family(level)(e(0.0))
    else:
        make = lambda: _tabulated_structure(node, kind or "monoid")
    desc = _wrap(node, "instance", make)
    if node.has("metric"):
        desc.metric = Metric(node.get("metric", str, choices=METRIC_KINDS))
    if node.has("similarity"):
        desc.similarity = node.get("similarity", str, choices=SIMILARITY_MODES)
    return desc


def build_family(node: Node) -> EpsilonFamily:
    if node.has("eps"):
        raise ConfigurationError(f"{node.where('eps')}: a collapse family takes its eps from the grid")
    build_structure(node, eps_override=0.0)  # validates every field once
    return EpsilonFamily(lambda eps: build_structure(node, eps_override=eps), name=node.get("instance", str))


def build_samples(node: Optional[Node], desc: StructureDescriptor, seed: int, slots: int) -> SampleSet:
    node = node or Node({}, "samples")
    seed = node.get("seed", int, seed)
    carrier = desc.carrier
    if carrier.elements is not None:
        scheme = node.get("scheme", str, "exhaustive", choices=("exhaustive", "choice"))
        if scheme == "exhaustive":
            return SampleSet.exhaustive(carrier.elements, slots)
        return SampleSet.choice(seed, carrier.elements, _positive(node, "count", int, 1024), slots)
    if len(carrier.shape) == 2:
        node.get("scheme", str, "ball", choices=("ball",))
        n = carrier.shape[0]
        radius = float(np.max(carrier.high - np.eye(n)))
        count = _positive(node, "count", int, 1024)
        return SampleSet.ball(seed, np.eye(n), radius, count, slots)
    scheme = node.get("scheme", str, "uniform", choices=("uniform", "grid"))
    if scheme == "grid":
        per_axis = _positive(node, "per_axis", int, 16)
        return SampleSet.grid(carrier.low, carrier.high, per_axis, slots, carrier.shape)
    count = _positive(node, "count", int, 4096)
    return SampleSet(seed, carrier.low, carrier.high, count, slots, carrier.shape)


def _grid(node: Node, key: str, default):
    if not node.has(key):
        return list(default)
    raw = node.data[key]
    if isinstance(raw, dict):
        g = Node(raw, node.where(key))
        return _wrap(node, key, lambda: geometric_grid(g.get("start", float), g.get("stop", float),
                                                      g.get("num", int, 8)))
    values = node.get(key, "numbers")
    if any(v <= 0 for v in values) or any(b >= a for a, b in zip(values, values[1:])):
        raise ConfigurationError(f"{node.where(key)}: eps values must be positive and strictly decreasing")
    return values


# -- tasks ------------------------------------------------------------------


@dataclass
class Outcome:
    passed: bool
    result: dict
    tables: Dict[str, List[dict]]


def _max_arity(desc: StructureDescriptor) -> int:
    return max(ax.arity for ax in desc.catalog())


def plan_audit(node: Node, seed: int):
    desc = build_structure(node.child("structure"))
    samples = _wrap(node, "samples", lambda: build_samples(node.child("samples", None), desc, seed, _max_arity(desc)))

    def run(jobs):
        rep = audit(desc, samples, jobs=jobs)
        return Outcome(rep.overall_pass, {"samples": samples.describe(), **rep.to_dict()}, {})

    return run


def plan_collapse(node: Node, seed: int):
    snode = node.child("structure")
    family = build_family(snode)
    grid = _grid(node, "grid", DEFAULT_GRID)
    probe = family(grid[0])
    samples = _wrap(node, "samples", lambda: build_samples(node.child("samples", None), probe, seed,
                                                           _max_arity(probe)))

    def run(jobs):
        verdicts = verify_collapse(family, grid, samples, jobs=jobs)
        tables = {name: v.curve.to_rows() for name, v in verdicts.items()}
        result = {"family": family.name, "grid": grid, "samples": samples.describe(),
                  "axioms": [v.to_dict() for v in verdicts.values()]}
        return Outcome(all(v.passed for v in verdicts.values()), result, tables)

    return run


def _unit_pairs(rng, n, count):
    X = rng.standard_normal((count, n, n))
    Y = rng.standard_normal((count, n, n))
    X /= np.linalg.norm(X, axis=(-2, -1), keepdims=True)
    Y /= np.linalg.norm(Y, axis=(-2, -1), keepdims=True)
    return X, Y


def plan_bracket(node: Node, seed: int):
    eps = _nonneg(node, "eps", 0.0)
    grp = _group(node, eps)
    t = _positive(node, "t", float, 1e-3)
    count = _positive(node, "pairs", int, 20)
    tol = _nonneg(node, "tolerance", 0.05 + 10 * eps)
    seed = node.get("seed", int, seed)

    def run(jobs):
        X, Y = _unit_pairs(np.random.default_rng(seed), grp.n, count)
        est = extract_bracket(X, Y, grp, t)
        exact = X @ Y - Y @ X
        rel = np.linalg.norm(est - exact, axis=(-2, -1)) / np.linalg.norm(exact, axis=(-2, -1))
        i = int(np.argmax(rel))
        result = {"n": grp.n, "eps": eps, "t": t, "pairs": count, "tolerance": tol,
                  "max_relative_error": float(rel[i]), "mean_relative_error": float(rel.mean()),
                  "worst_pair": [X[i].tolist(), Y[i].tolist()]}
        return Outcome(bool(rel[i] <= tol), result, {})

    return run


def plan_c1(node: Node, seed: int):
    grp = _group(node, 0.0)
    grid = _grid(node, "grid", DEFAULT_GRID)
    h = _positive(node, "h", float, 1e-5)
    count = _positive(node, "probes", int, 64)
    slope_tol = _positive(node, "slope_tolerance", float, 0.1)
    min_r2 = node.get("min_r_squared", float, 0.99)
    seed = node.get("seed", int, seed)
    probes = _wrap(node, "probes", lambda: grp.sample(seed, count, 2))

    def run(jobs):
        table = c1_convergence(grp, grid, probes, h)
        fit = fit_rate(table.curve())
        ok = fit.status == "rate" and abs(fit.slope - 1.0) <= slope_tol and fit.r_squared >= min_r2
        rows = [{"epsilon": e, "max_defect": g, "mean_defect": m}
                for e, g, m in zip(table.eps, table.max_gap, table.mean_gap)]
        result = {"n": grp.n, "h": h, "probes": count, "fit": fit.to_dict(), "table": rows}
        return Outcome(bool(ok), result, {"jacobian-gap": rows})

    return run


def _fuzzy_operation(node: Node, key: str, fs: FuzzySet):
    choice = node.data.get(key)
    if isinstance(choice, str):
        ops = {"add": np.add, "mul": np.multiply, "max": np.maximum, "min": np.minimum}
        if choice not in ops:
            raise ConfigurationError(f"{node.where(key)}: {choice!r} is not one of {sorted(ops)} or an object")
        return ops[choice]
    o = node.child(key)
    kind = o.get("kind", str, choices=("add-mod", "mul-mod", "table"))
    if kind == "table":
        if not fs.finite:
            raise ConfigurationError(f"{o.where('kind')}: a Cayley table needs a finite carrier")
        return _wrap(o, "table", lambda: tabulated(fs.elements, o.get("table", list)))
    n = _positive(o, "n")
    if kind == "add-mod":
        return lambda x, y: np.mod(np.asarray(x) + y, n)
    return lambda x, y: np.mod(np.asarray(x) * y, n)


def build_fuzzy(node: Node) -> FuzzySet:
    if node.has("elements"):
        elems = node.get("elements", "numbers")
        if node.has("memberships"):
            mus = node.get("memberships", "numbers")
            if len(mus) != len(elems):
                raise ConfigurationError(f"{node.where('memberships')}: needs one degree per element")
            return _wrap(node, "memberships", lambda: FuzzySet(elems, mus))
        formula = node.get("membership", str, choices=tuple(MEMBERSHIP_FORMULAS))
        return _wrap(node, "membership", lambda: FuzzySet(elems, membership=MEMBERSHIP_FORMULAS[formula],
                                                          name=formula))
    box = node.get("box", "box")
    formula = node.get("membership", str, choices=tuple(MEMBERSHIP_FORMULAS))
    return FuzzySet(membership=MEMBERSHIP_FORMULAS[formula], box=box, name=formula)


def plan_fuzzy(node: Node, seed: int):
    fs = build_fuzzy(node.child("fuzzy"))
    t = TNorm(node.get("tnorm", str, "minimum", choices=TNORM_KINDS))
    op = _fuzzy_operation(node, "operation", fs)
    snode = node.child("samples", None)
    if fs.finite:
        samples = fs.samples(3)
    else:
        snode = snode or Node({}, node.where("samples"))
        samples = fs.samples(3, snode.get("seed", int, seed), _positive(snode, "count", int, 4096))

    def run(jobs):
        bound = check_embedding_bound(fs, t, op, samples)
        ros = check_rosenfeld(fs, op, t, samples)
        result = {"fuzzy": fs.describe(), "tnorm": t.kind, "embedding_bound": bound.to_dict(),
                  "rosenfeld": ros.to_dict()}
        return Outcome(bound.holds, result, {})

    return run


def build_map(node: Node) -> Callable:
    kind = node.get("kind", str, choices=MAP_KINDS)
    if kind == "identity":
        return lambda x: np.asarray(x, dtype=float)
    if kind == "scaling":
        return scaling_map(node.get("c", float))
    if kind == "affine":
        return affine_map(node.get("a", float), node.get("b", float))
    if kind == "mod-linear":
        return mod_linear_map(node.get("c", int), _positive(node, "k"))
    if kind == "mod-power":
        return mod_power_map(_positive(node, "p"), _positive(node, "k"))
    table = node.get("table")
    if isinstance(table, list):
        if not all(isinstance(p, list) and len(p) == 2 for p in table):
            raise ConfigurationError(f"{node.where('table')}: expected [[input, output], ...]")
        table = {p[0]: p[1] for p in table}
    if not isinstance(table, dict):
        raise ConfigurationError(f"{node.where('table')}: expected an object or a list of pairs")
    return _wrap(node, "table", lambda: tabulated_map(table))


def plan_morphism(node: Node, seed: int):
    source = build_structure(node.child("source"))
    same = node.data.get("target") == "source"
    target = source if same else build_structure(node.child("target"))
    if node.get("classical", bool, False):
        exact = build_samples(None, source, seed, _max_arity(source))
        source = _wrap(node, "source", lambda: embed_classical(source, exact))
        target = source if same else _wrap(node, "target", lambda: embed_classical(
            target, build_samples(None, target, seed, _max_arity(target))))
    f = build_map(node.child("map"))
    eps = _nonneg(node, "eps", None)
    samples = _wrap(node, "samples", lambda: build_samples(node.child("samples", None), source, seed, 2))
    m = MorphismDescriptor(source, target, f, name=node.child("map").get("kind", str))

    def run(jobs):
        rep = check_approx_homomorphism(m, eps, samples)
        return Outcome(rep.passes_at_eps, {"map": m.name, "samples": samples.describe(), **rep.to_dict()}, {})

    return run


PLANNERS = {"audit": plan_audit, "collapse": plan_collapse, "bracket": plan_bracket, "c1": plan_c1,
            "fuzzy-embed": plan_fuzzy, "morphism": plan_morphism}


# -- config loading and running ---------------------------------------------


def load_config(path: str):
    """Read and parse the config; returns (raw bytes, parsed object)."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc.strerror}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"{path}: not UTF-8 text") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return raw, data


def plan(data, seed_override: Optional[int] = None):
    """Validate the whole config before anything runs; returns (seed, [(name, type, expect, runner)])."""
    root = Node(data, "")
    seed = root.get("seed", int)
    if seed_override is not None:
        seed = seed_override
    tasks = root.get("tasks", list)
    if not tasks:
        raise ConfigurationError("tasks: at least one task is required")
    planned, names = [], set()
    for i, raw in enumerate(tasks):
        node = Node(raw, f"tasks[{i}]")
        ttype = node.get("type", str, choices=TASK_TYPES)
        name = node.get("name", str, f"task{i}-{ttype}")
        if name in names:
            raise ConfigurationError(f"{node.where('name')}: duplicate task name {name!r}")
        if not name.replace("-", "").replace("_", "").replace(".", "").isalnum():
            raise ConfigurationError(f"{node.where('name')}: use letters, digits, '-', '_' or '.'")
        names.add(name)
        expect = node.get("expect", str, "pass", choices=("pass", "fail"))
        planned.append((name, ttype, expect, PLANNERS[ttype](node, seed)))
    return seed, planned


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: List[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["epsilon", "max_defect", "mean_defect"], lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(float(r[k])) for k in writer.fieldnames})
    return buf.getvalue()


def execute(config_path: str, out_dir: str, seed: Optional[int] = None, jobs: int = 1,
            log=sys.stderr) -> int:
    """Run a config end to end and write the report; returns the exit status."""
    try:
        raw, data = load_config(config_path)
        seed, planned = plan(data, seed)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=log)
        return 2

    os.makedirs(out_dir, exist_ok=True)
    results, status = [], 0
    for name, ttype, expect, runner in planned:
        entry: Dict[str, Any] = {"name": name, "type": ttype, "expect": expect}
        try:
            outcome = runner(jobs)
        except SimAlgError as exc:
            entry.update(verdict="ERROR", error=f"{type(exc).__name__}: {exc}")
            status = 2
            print(f"{name}: ERROR {exc}", file=log)
            results.append(entry)
            continue
        ok = outcome.passed == (expect == "pass")
        files = []
        for table, rows in outcome.tables.items():
            fname = f"{name}.{table}.csv"
            atomic_write(os.path.join(out_dir, fname), _csv_text(rows))
            files.append(fname)
        entry.update(outcome="pass" if outcome.passed else "fail", verdict="PASS" if ok else "FAIL",
                     files=files, result=outcome.result)
        if not ok and status == 0:
            status = 1
        print(f"{name}: {entry['verdict']}", file=log)
        results.append(entry)

    report = {
        "tool": "simalg",
        "version": __version__,
        "config": os.path.basename(config_path),
        "config_digest": "sha256:" + hashlib.sha256(raw).hexdigest(),
        "seed": seed,
        "status": {0: "PASS", 1: "FAIL", 2: "ERROR"}[status],
        "tasks": results,
    }
    atomic_write(os.path.join(out_dir, "report.json"), json.dumps(_clean(report), indent=2) + "\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simalg", description="Audit approximate algebraic structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--list-kinds", action="store_true", help="print structure kinds and their axiom catalogs")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run the tasks of a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default="simalg-report", help="output directory (default: %(default)s)")
    r.add_argument("--jobs", type=int, default=1, help="worker threads per task (results do not depend on it)")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_kinds:
        print(describe_kinds())
        print()
        print("instances: " + ", ".join(INSTANCES))
        return 0
    if args.command != "run":
        parser.print_usage(sys.stderr)
        return 2
    if args.jobs < 1:
        print("configuration error: --jobs must be at least 1", file=sys.stderr)
        return 2
    return execute(args.config, args.out, args.seed, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
